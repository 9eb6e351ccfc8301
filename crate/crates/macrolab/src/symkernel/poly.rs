// SPDX-License-Identifier: Apache-2.0

//! Sparse multivariate polynomials over the Gaussian rationals.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is the
//! graded lexicographic order with `τ > ℓ > Λ₁ > Λ₂ > Λ₃ > n₁ > n₂ > n₃ >
//! ξ₁ > ξ₂ > ξ₃`. The last map entry is therefore the leading term.

use super::gauss::GaussRational;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Number of symbols in the fixed alphabet.
pub const NVARS: usize = 11;

/// The symbols available to [`SymExpr`], listed from largest to smallest
/// in the monomial order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    Tau = 0,
    L = 1,
    Lam1 = 2,
    Lam2 = 3,
    Lam3 = 4,
    N1 = 5,
    N2 = 6,
    N3 = 7,
    Xi1 = 8,
    Xi2 = 9,
    Xi3 = 10,
}

impl Sym {
    /// All symbols in order.
    pub const ALL: [Sym; NVARS] = [
        Sym::Tau,
        Sym::L,
        Sym::Lam1,
        Sym::Lam2,
        Sym::Lam3,
        Sym::N1,
        Sym::N2,
        Sym::N3,
        Sym::Xi1,
        Sym::Xi2,
        Sym::Xi3,
    ];

    /// `Λ₁, Λ₂, Λ₃`.
    pub const LAM: [Sym; 3] = [Sym::Lam1, Sym::Lam2, Sym::Lam3];
    /// `n₁, n₂, n₃`.
    pub const N: [Sym; 3] = [Sym::N1, Sym::N2, Sym::N3];
    /// `ξ₁, ξ₂, ξ₃`.
    pub const XI: [Sym; 3] = [Sym::Xi1, Sym::Xi2, Sym::Xi3];

    /// ASCII name used by the printer and parser.
    pub fn name(self) -> &'static str {
        match self {
            Sym::Tau => "tau",
            Sym::L => "l",
            Sym::Lam1 => "L1",
            Sym::Lam2 => "L2",
            Sym::Lam3 => "L3",
            Sym::N1 => "n1",
            Sym::N2 => "n2",
            Sym::N3 => "n3",
            Sym::Xi1 => "xi1",
            Sym::Xi2 => "xi2",
            Sym::Xi3 => "xi3",
        }
    }

    /// Inverse of [`Sym::name`].
    pub fn from_name(s: &str) -> Option<Sym> {
        Sym::ALL.iter().copied().find(|v| v.name() == s)
    }

    /// Position in the exponent vector.
    pub fn index(self) -> usize {
        self as usize
    }
}

/// An exponent vector over the fixed alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u16; NVARS]);

impl Monomial {
    /// The constant monomial `1`.
    pub fn one() -> Self {
        Self::default()
    }

    /// The monomial `v^e`.
    pub fn var(v: Sym, e: u16) -> Self {
        let mut m = Self::default();
        m.0[v.index()] = e;
        m
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    /// Exponent of one symbol.
    pub fn exp(&self, v: Sym) -> u16 {
        self.0[v.index()]
    }

    /// Product of monomials.
    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            *a += *b;
        }
        r
    }

    /// True iff `o` divides `self`.
    pub fn divisible_by(&self, o: &Monomial) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a >= b)
    }

    /// `self / o`, assuming divisibility.
    pub fn div(&self, o: &Monomial) -> Monomial {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            *a -= *b;
        }
        r
    }

    /// Least common multiple.
    pub fn lcm(&self, o: &Monomial) -> Monomial {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            *a = (*a).max(*b);
        }
        r
    }

    /// True iff the two monomials share no symbol.
    pub fn coprime(&self, o: &Monomial) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Exact polynomial in the eleven symbols with Gaussian-rational coefficients.
///
/// No zero coefficient is ever stored, so the zero polynomial is the empty map
/// and structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct SymExpr {
    terms: BTreeMap<Monomial, GaussRational>,
}

impl SymExpr {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant `c`.
    pub fn constant(c: GaussRational) -> Self {
        let mut e = Self::zero();
        e.add_term(Monomial::one(), c);
        e
    }

    /// The integer constant `k`.
    pub fn int(k: i64) -> Self {
        Self::constant(GaussRational::from_int(k))
    }

    /// The imaginary unit as a polynomial.
    pub fn i() -> Self {
        Self::constant(GaussRational::i())
    }

    /// The single symbol `v`.
    pub fn var(v: Sym) -> Self {
        Self::term(Monomial::var(v, 1), GaussRational::one())
    }

    /// The single term `c·m`.
    pub fn term(m: Monomial, c: GaussRational) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    /// True iff this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True iff no term is stored.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates over terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussRational)> {
        self.terms.iter()
    }

    /// Leading monomial and coefficient.
    pub fn leading(&self) -> Option<(&Monomial, &GaussRational)> {
        self.terms.iter().next_back()
    }

    /// Adds `c·m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn pop_leading(&mut self) -> Option<(Monomial, GaussRational)> {
        self.terms.pop_last()
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &GaussRational) -> SymExpr {
        if c.is_zero() {
            return SymExpr::zero();
        }
        SymExpr {
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    /// Multiplies by the term `c·m`.
    pub fn mul_term(&self, m: &Monomial, c: &GaussRational) -> SymExpr {
        if c.is_zero() {
            return SymExpr::zero();
        }
        SymExpr {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    /// Adds `c·m·q` to `self` in place.
    pub fn add_scaled_product(&mut self, q: &SymExpr, m: &Monomial, c: &GaussRational) {
        for (k, a) in q.terms.iter() {
            self.add_term(k.mul(m), a * c);
        }
    }

    /// Integer power.
    pub fn pow(&self, mut e: u32) -> SymExpr {
        let mut base = self.clone();
        let mut acc = SymExpr::int(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Highest exponent of `v` occurring in any term; `None` for zero.
    pub fn degree_in(&self, v: Sym) -> Option<u16> {
        self.terms.keys().map(|m| m.exp(v)).max()
    }

    /// Total degree; `None` for zero.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Coefficient of `v^k`, as a polynomial free of `v`.
    pub fn coeff_of(&self, v: Sym, k: u16) -> SymExpr {
        let mut out = SymExpr::zero();
        for (m, c) in self.terms.iter() {
            if m.exp(v) == k {
                let mut mm = *m;
                mm.0[v.index()] = 0;
                out.add_term(mm, c.clone());
            }
        }
        out
    }

    /// True iff the expression does not involve `v`.
    pub fn free_of(&self, v: Sym) -> bool {
        self.terms.keys().all(|m| m.exp(v) == 0)
    }

    /// Substitutes `v ↦ value` everywhere.
    pub fn subs(&self, v: Sym, value: &SymExpr) -> SymExpr {
        let maxe = self.degree_in(v).unwrap_or(0) as usize;
        let mut powers = Vec::with_capacity(maxe + 1);
        powers.push(SymExpr::int(1));
        for k in 1..=maxe {
            let next = &powers[k - 1] * value;
            powers.push(next);
        }
        let mut out = SymExpr::zero();
        for (m, c) in self.terms.iter() {
            let e = m.exp(v) as usize;
            let mut rest = *m;
            rest.0[v.index()] = 0;
            out.add_scaled_product(&powers[e], &rest, c);
        }
        out
    }

    /// Substitutes several symbols simultaneously.
    pub fn subs_many(&self, map: &[(Sym, SymExpr)]) -> SymExpr {
        let mut out = SymExpr::zero();
        let mut cache: Vec<Vec<SymExpr>> = map.iter().map(|_| vec![SymExpr::int(1)]).collect();
        for (m, c) in self.terms.iter() {
            let mut rest = *m;
            let mut prod = SymExpr::int(1);
            for (j, (v, val)) in map.iter().enumerate() {
                let e = m.exp(*v) as usize;
                rest.0[v.index()] = 0;
                while cache[j].len() <= e {
                    let next = cache[j].last().expect("nonempty") * val;
                    cache[j].push(next);
                }
                if e > 0 {
                    prod = &prod * &cache[j][e];
                }
            }
            out.add_scaled_product(&prod, &rest, c);
        }
        out
    }

    /// Exact evaluation at a point given for every symbol.
    pub fn eval(&self, point: &[GaussRational; NVARS]) -> GaussRational {
        let mut acc = GaussRational::zero();
        for (m, c) in self.terms.iter() {
            let mut t = c.clone();
            for (k, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &point[k].pow(e as u32);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Complex conjugate of every coefficient.
    pub fn conj(&self) -> SymExpr {
        SymExpr {
            terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect(),
        }
    }
}

impl<'a> Add<&'a SymExpr> for &'a SymExpr {
    type Output = SymExpr;
    fn add(self, o: &SymExpr) -> SymExpr {
        let mut r = self.clone();
        for (m, c) in o.terms.iter() {
            r.add_term(*m, c.clone());
        }
        r
    }
}

impl<'a> Sub<&'a SymExpr> for &'a SymExpr {
    type Output = SymExpr;
    fn sub(self, o: &SymExpr) -> SymExpr {
        let mut r = self.clone();
        for (m, c) in o.terms.iter() {
            r.add_term(*m, -c);
        }
        r
    }
}

impl<'a> Mul<&'a SymExpr> for &'a SymExpr {
    type Output = SymExpr;
    fn mul(self, o: &SymExpr) -> SymExpr {
        let (small, big) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        let mut r = SymExpr::zero();
        for (m, c) in small.terms.iter() {
            r.add_scaled_product(big, m, c);
        }
        r
    }
}

impl Neg for &SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        SymExpr {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        -&self
    }
}

impl Add for SymExpr {
    type Output = SymExpr;
    fn add(self, o: SymExpr) -> SymExpr {
        &self + &o
    }
}

impl Sub for SymExpr {
    type Output = SymExpr;
    fn sub(self, o: SymExpr) -> SymExpr {
        &self - &o
    }
}

impl Mul for SymExpr {
    type Output = SymExpr;
    fn mul(self, o: SymExpr) -> SymExpr {
        &self * &o
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for v in Sym::ALL {
        match m.exp(v) {
            0 => {}
            1 => parts.push(v.name().to_string()),
            e => parts.push(format!("{}^{}", v.name(), e)),
        }
    }
    parts.join("*")
}

impl fmt::Display for SymExpr {
    /// Prints terms from the leading one downwards in a syntax accepted by
    /// [`super::parse::parse_expr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative_real() || c.is_negative_imag();
            let mag = if negative { -c } else { c.clone() };
            let mono = fmt_monomial(m);
            let body = if mono.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                mono
            } else {
                format!("{}*{}", mag, mono)
            };
            match (idx, negative) {
                (0, false) => write!(f, "{}", body)?,
                (0, true) => write!(f, "-{}", body)?,
                (_, false) => write!(f, " + {}", body)?,
                (_, true) => write!(f, " - {}", body)?,
            }
        }
        Ok(())
    }
}

/// Shorthand for `SymExpr::var`.
pub fn v(s: Sym) -> SymExpr {
    SymExpr::var(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order_puts_tau_first() {
        let t = Monomial::var(Sym::Tau, 1);
        let l = Monomial::var(Sym::L, 1);
        let l2 = Monomial::var(Sym::L, 2);
        assert!(t > l);
        assert!(l2 > t);
        let x = Monomial::var(Sym::Xi3, 1);
        assert!(x > Monomial::one());
    }

    #[test]
    fn conjugate_product_is_sum_of_squares() {
        let tau = v(Sym::Tau);
        let il = &SymExpr::i() * &v(Sym::L);
        let p = &(&tau + &il) * &(&tau - &il);
        let expect = &tau.pow(2) + &v(Sym::L).pow(2);
        assert_eq!(p, expect);
    }

    #[test]
    fn self_difference_is_empty() {
        let p = &v(Sym::N1).pow(3) + &SymExpr::int(7);
        assert!((&p - &p).is_empty());
    }

    #[test]
    fn binomial_expansion() {
        let s = &v(Sym::N1) + &v(Sym::N2);
        let sq = s.pow(2);
        let expect = &(&v(Sym::N1).pow(2) + &(&v(Sym::N1) * &v(Sym::N2)).scale(&GaussRational::from_int(2)))
            + &v(Sym::N2).pow(2);
        assert_eq!(sq, expect);
    }

    #[test]
    fn substitution_and_coefficients() {
        let p = &v(Sym::Tau).pow(2) + &v(Sym::L);
        let q = p.subs(Sym::Tau, &(&v(Sym::N1) + &SymExpr::int(1)));
        assert!(q.free_of(Sym::Tau));
        assert_eq!(q.coeff_of(Sym::N1, 2), SymExpr::int(1));
        assert_eq!(q.coeff_of(Sym::N1, 1), SymExpr::int(2));
    }

    #[test]
    fn printer_output() {
        let p = &(&v(Sym::Tau).pow(3) - &(&SymExpr::i() * &v(Sym::L)).scale(&GaussRational::from_int(3)))
            + &SymExpr::int(-2);
        assert_eq!(p.to_string(), "tau^3 - 3*I*l - 2");
    }
}
