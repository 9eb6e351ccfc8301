// SPDX-License-Identifier: Apache-2.0

//! Exact Gaussian rationals `re + i·im` with arbitrary-precision parts.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A number `re + i·im` with `re, im ∈ ℚ`.
///
/// Both parts are stored as reduced `BigRational`s with positive
/// denominators, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    /// Builds `re + i·im`.
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    /// The real integer `k`.
    pub fn from_int(k: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(k)), BigRational::zero())
    }

    /// The real rational `p/q`.
    ///
    /// # Panics
    /// Panics if `q == 0`.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::new(BigRational::new(BigInt::from(p), BigInt::from(q)), BigRational::zero())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    /// `0`.
    pub fn zero() -> Self {
        Self::default()
    }

    /// `1`.
    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// True iff both parts vanish.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// True iff the value is exactly one.
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// True iff the imaginary part vanishes.
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &norm, -(&self.im / &norm)))
    }

    /// Integer power.
    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Lossy conversion of both parts to `f64`, for reporting only.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        fn cvt(r: &BigRational) -> f64 {
            use num::ToPrimitive;
            r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
        }
        (cvt(&self.re), cvt(&self.im))
    }

    /// True when the value is a real number with negative sign, used by the printer.
    pub(crate) fn is_negative_real(&self) -> bool {
        self.im.is_zero() && self.re.is_negative()
    }

    /// True when the value is purely imaginary with negative imaginary part.
    pub(crate) fn is_negative_imag(&self) -> bool {
        self.re.is_zero() && self.im.is_negative()
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "I")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-I")
                } else {
                    write!(f, "{}*I", fmt_rat(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({} {} {}*I)", fmt_rat(&self.re), sign, fmt_rat(&self.im.abs()))
            }
        }
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRational::new(&self.re * &o.re, BigRational::zero());
        }
        GaussRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    /// # Panics
    /// Panics on division by zero.
    fn div(self, o: &GaussRational) -> GaussRational {
        self * &o.inv().expect("division by zero Gaussian rational")
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re, -self.im)
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Add for GaussRational {
    type Output = GaussRational;
    fn add(self, o: GaussRational) -> GaussRational {
        &self + &o
    }
}

impl Sub for GaussRational {
    type Output = GaussRational;
    fn sub(self, o: GaussRational) -> GaussRational {
        &self - &o
    }
}

impl Mul for GaussRational {
    type Output = GaussRational;
    fn mul(self, o: GaussRational) -> GaussRational {
        &self * &o
    }
}

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, o: &GaussRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, o: &GaussRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussRational::i();
        assert_eq!(&i * &i, GaussRational::from_int(-1));
    }

    #[test]
    fn inverse_round_trips() {
        let z = GaussRational::new(
            BigRational::new(3.into(), 7.into()),
            BigRational::new((-2).into(), 5.into()),
        );
        let w = z.inv().unwrap();
        assert!((&z * &w).is_one());
        assert!(GaussRational::zero().inv().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussRational::from_ratio(-3, 6).to_string(), "-1/2");
        assert_eq!(GaussRational::i().to_string(), "I");
        let z = GaussRational::from_int(2) - GaussRational::i();
        assert_eq!(z.to_string(), "(2 - 1*I)");
    }

    #[test]
    fn power_matches_repeated_product() {
        let z = GaussRational::from_int(2) - GaussRational::i();
        assert_eq!(z.pow(3), &(&z * &z) * &z);
        assert_eq!(z.pow(3), GaussRational::from_int(2) - GaussRational::from_int(11) * GaussRational::i());
    }
}
