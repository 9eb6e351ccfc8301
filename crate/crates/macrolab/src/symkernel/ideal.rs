// SPDX-License-Identifier: Apache-2.0

//! The constraint ideal `(|n|² − 1, n·Λ, ℓ² − |Λ|²)`, its Gröbner basis and
//! two independent membership tests.

use super::gauss::GaussRational;
use super::poly::{v, Monomial, Sym, SymExpr, NVARS};
use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

/// Generators of the ideal encoding `|n| = 1`, `Λ ⊥ n` and `ℓ = |Λ|`.
#[derive(Clone, Debug)]
pub struct ConstraintIdeal {
    generators: Vec<SymExpr>,
}

impl Default for ConstraintIdeal {
    fn default() -> Self {
        Self::new()
    }
}

impl ConstraintIdeal {
    /// The fixed three-generator ideal.
    pub fn new() -> Self {
        let n2: SymExpr = Sym::N.iter().map(|&s| v(s).pow(2)).fold(SymExpr::int(-1), |a, b| &a + &b);
        let dot = Sym::N
            .iter()
            .zip(Sym::LAM.iter())
            .map(|(&a, &b)| &v(a) * &v(b))
            .fold(SymExpr::zero(), |a, b| &a + &b);
        let lam2 = Sym::LAM.iter().map(|&s| v(s).pow(2)).fold(SymExpr::zero(), |a, b| &a + &b);
        let ell = &v(Sym::L).pow(2) - &lam2;
        Self { generators: vec![n2, dot, ell] }
    }

    /// The generator list.
    pub fn generators(&self) -> &[SymExpr] {
        &self.generators
    }

    /// Reduced Gröbner basis under grlex, computed once per process.
    pub fn groebner(&self) -> &'static [SymExpr] {
        static GB: OnceLock<Vec<SymExpr>> = OnceLock::new();
        GB.get_or_init(|| buchberger(&ConstraintIdeal::new().generators))
    }

    /// Normal form of `p` with respect to the cached Gröbner basis.
    pub fn normal_form(&self, p: &SymExpr) -> SymExpr {
        normal_form(p, self.groebner())
    }

    /// `ℓ`-parity split: returns `(A, B)` free of `ℓ` with `p ≡ A + ℓ·B`
    /// after substituting `ℓ² = Λ₁² + Λ₂² + Λ₃²`.
    pub fn split_ell(p: &SymExpr) -> (SymExpr, SymExpr) {
        let lam2 = Sym::LAM.iter().map(|&s| v(s).pow(2)).fold(SymExpr::zero(), |a, b| &a + &b);
        let maxe = p.degree_in(Sym::L).unwrap_or(0) as usize;
        let mut pows = vec![SymExpr::int(1)];
        for k in 1..=maxe / 2 {
            let next = &pows[k - 1] * &lam2;
            pows.push(next);
        }
        let mut a = SymExpr::zero();
        let mut b = SymExpr::zero();
        for (m, c) in p.terms() {
            let e = m.exp(Sym::L) as usize;
            let mut rest = *m;
            rest.0[Sym::L.index()] = 0;
            let target = if e % 2 == 0 { &mut a } else { &mut b };
            target.add_scaled_product(&pows[e / 2], &rest, c);
        }
        (a, b)
    }

    /// Randomized membership test by exact evaluation at `points` rational
    /// points on the constraint variety.
    ///
    /// `n` is drawn on the rational unit sphere by inverse stereographic
    /// projection, `Λ = n × w` for a random rational `w`, and `τ, ξ` are free.
    /// `ℓ` is never instantiated: both parity parts from
    /// [`ConstraintIdeal::split_ell`] must vanish.
    pub fn random_check(&self, p: &SymExpr, points: usize, seed: u64) -> bool {
        let (a, b) = Self::split_ell(p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..points).all(|_| {
            let pt = random_point(&mut rng);
            a.eval(&pt).is_zero() && b.eval(&pt).is_zero()
        })
    }
}

fn rand_rat(rng: &mut ChaCha8Rng) -> BigRational {
    let p: i64 = rng.gen_range(-9..=9);
    let q: i64 = rng.gen_range(1..=7);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn random_point(rng: &mut ChaCha8Rng) -> [GaussRational; NVARS] {
    let real = |r: BigRational| GaussRational::new(r, BigRational::from_integer(0.into()));
    let s = rand_rat(rng);
    let t = rand_rat(rng);
    let one = BigRational::from_integer(1.into());
    let two = BigRational::from_integer(2.into());
    let den = &s * &s + &t * &t + &one;
    let n = [&two * &s / &den, &two * &t / &den, (&s * &s + &t * &t - &one) / &den];
    let w = [rand_rat(rng), rand_rat(rng), rand_rat(rng)];
    let lam = [
        &n[1] * &w[2] - &n[2] * &w[1],
        &n[2] * &w[0] - &n[0] * &w[2],
        &n[0] * &w[1] - &n[1] * &w[0],
    ];
    let mut pt: [GaussRational; NVARS] = Default::default();
    pt[Sym::Tau.index()] = real(rand_rat(rng));
    for k in 0..3 {
        pt[Sym::LAM[k].index()] = real(lam[k].clone());
        pt[Sym::N[k].index()] = real(n[k].clone());
        pt[Sym::XI[k].index()] = real(rand_rat(rng));
    }
    pt
}

/// Full reduction of `p` by `basis` (every term, not only the leading one).
pub fn normal_form(p: &SymExpr, basis: &[SymExpr]) -> SymExpr {
    let leads: Vec<(Monomial, GaussRational, SymExpr)> = basis
        .iter()
        .filter_map(|g| {
            let (m, c) = g.leading()?;
            let mut tail = g.clone();
            tail.pop_leading();
            Some((*m, c.inv().expect("nonzero leading coefficient"), tail))
        })
        .collect();
    let mut work = p.clone();
    let mut rem = SymExpr::zero();
    while let Some((m, c)) = work.pop_leading() {
        match leads.iter().find(|(lm, _, _)| m.divisible_by(lm)) {
            Some((lm, lc_inv, tail)) => {
                let q = m.div(lm);
                let factor = -(&c * lc_inv);
                work.add_scaled_product(tail, &q, &factor);
            }
            None => rem.add_term(m, c),
        }
    }
    rem
}

fn make_monic(p: &SymExpr) -> SymExpr {
    match p.leading() {
        Some((_, c)) => p.scale(&c.inv().expect("nonzero")),
        None => p.clone(),
    }
}

fn s_poly(f: &SymExpr, g: &SymExpr) -> SymExpr {
    let (mf, cf) = f.leading().expect("nonzero");
    let (mg, cg) = g.leading().expect("nonzero");
    let lcm = mf.lcm(mg);
    let a = f.mul_term(&lcm.div(mf), &cf.inv().expect("nonzero"));
    let b = g.mul_term(&lcm.div(mg), &cg.inv().expect("nonzero"));
    &a - &b
}

/// Buchberger's algorithm with the coprime-leading-term criterion, followed
/// by inter-reduction to the unique reduced basis.
pub fn buchberger(gens: &[SymExpr]) -> Vec<SymExpr> {
    let mut basis: Vec<SymExpr> = gens.iter().filter(|g| !g.is_zero()).map(make_monic).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    while let Some((i, j)) = pairs.pop() {
        let li = *basis[i].leading().expect("nonzero").0;
        let lj = *basis[j].leading().expect("nonzero").0;
        if li.coprime(&lj) {
            continue;
        }
        let r = normal_form(&s_poly(&basis[i], &basis[j]), &basis);
        if !r.is_zero() {
            basis.push(make_monic(&r));
            let k = basis.len() - 1;
            for i2 in 0..k {
                pairs.push((i2, k));
            }
        }
    }
    // Drop elements whose leading monomial is divisible by another's.
    let mut keep: Vec<SymExpr> = Vec::new();
    for (idx, g) in basis.iter().enumerate() {
        let lg = *g.leading().expect("nonzero").0;
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            let lh = *h.leading().expect("nonzero").0;
            j != idx && lg.divisible_by(&lh) && (lg != lh || j < idx)
        });
        if !redundant {
            keep.push(g.clone());
        }
    }
    // Inter-reduce tails.
    let mut reduced = Vec::with_capacity(keep.len());
    for idx in 0..keep.len() {
        let others: Vec<SymExpr> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, g)| g.clone())
            .collect();
        reduced.push(make_monic(&normal_form(&keep[idx], &others)));
    }
    reduced.sort_by(|a, b| a.leading().expect("nonzero").0.cmp(b.leading().expect("nonzero").0));
    reduced
}

/// True iff `p` lies in `ideal`, decided by Gröbner normal form.
pub fn is_zero_mod_ideal(p: &SymExpr, ideal: &ConstraintIdeal) -> bool {
    ideal.normal_form(p).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::parse::parse_expr;

    fn ideal() -> ConstraintIdeal {
        ConstraintIdeal::new()
    }

    #[test]
    fn groebner_basis_matches_independent_cas() {
        // Reference basis computed with an independent computer-algebra system (grlex).
        let expect = [
            "L1*n1 + L2*n2 + L3*n3",
            "n1^2 + n2^2 + n3^2 - 1",
            "l^2 - L1^2 - L2^2 - L3^2",
            "L1*n2^2 + L1*n3^2 - L1 - L2*n1*n2 - L3*n1*n3",
        ];
        let gb = ideal().groebner();
        assert_eq!(gb.len(), 4);
        for e in expect {
            let p = parse_expr(e).unwrap();
            assert!(gb.contains(&p), "missing {e}; basis = {:?}", gb.iter().map(|g| g.to_string()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn generators_and_powers_are_members() {
        let id = ideal();
        for g in id.generators() {
            assert!(is_zero_mod_ideal(g, &id));
            assert!(id.random_check(g, 64, 1));
        }
        let p = parse_expr("l^4 - (L1^2 + L2^2 + L3^2)^2").unwrap();
        assert!(is_zero_mod_ideal(&p, &id));
        assert!(id.random_check(&p, 64, 2));
    }

    #[test]
    fn free_symbols_are_not_members() {
        let id = ideal();
        for e in ["tau", "l", "n3", "xi1*L2", "l*n3 - 1"] {
            let p = parse_expr(e).unwrap();
            assert!(!is_zero_mod_ideal(&p, &id), "{e}");
            assert!(!id.random_check(&p, 64, 3), "{e}");
        }
    }

    #[test]
    fn ell_split_reassembles() {
        let p = parse_expr("l^3*tau + l^2 - 2*l*n1").unwrap();
        let (a, b) = ConstraintIdeal::split_ell(&p);
        let back = &a + &(&v(Sym::L) * &b);
        assert!(is_zero_mod_ideal(&(&back - &p), &ideal()));
    }
}
