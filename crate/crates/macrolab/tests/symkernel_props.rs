// SPDX-License-Identifier: Apache-2.0

//! Property tests for the exact polynomial kernel.

use macrolab::symkernel::*;
use num::BigRational;
use proptest::prelude::*;

fn term() -> impl Strategy<Value = (usize, u16, usize, u16, i64, i64)> {
    (0..NVARS, 0u16..3, 0..NVARS, 0u16..2, -5i64..=5, -3i64..=3)
}

fn expr(max_terms: usize) -> impl Strategy<Value = SymExpr> {
    prop::collection::vec(term(), 0..=max_terms).prop_map(|ts| {
        let mut p = SymExpr::zero();
        for (a, ea, b, eb, re, im) in ts {
            let m = Monomial::var(Sym::ALL[a], ea).mul(&Monomial::var(Sym::ALL[b], eb));
            p.add_term(m, GaussRational::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into())));
        }
        p
    })
}

/// A polynomial that is monic in `τ` of degree 1..=3 with `τ`-free lower coefficients.
fn monic_tau() -> impl Strategy<Value = SymExpr> {
    (1u32..=3, prop::collection::vec(expr(2), 3)).prop_map(|(d, cs)| {
        let mut m = v(Sym::Tau).pow(d);
        for (k, c) in cs.into_iter().take(d as usize).enumerate() {
            let c = c.subs(Sym::Tau, &SymExpr::int(1));
            m = &m + &(&c * &v(Sym::Tau).pow(k as u32));
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ideal_membership_is_symmetric_and_matches_evaluation(p in expr(4), q in expr(4), h in expr(2), k in 0usize..3, seed in 0u64..1000) {
        let ideal = ConstraintIdeal::new();
        let diff = &p - &q;
        let back = &q - &p;
        prop_assert_eq!(is_zero_mod_ideal(&diff, &ideal), is_zero_mod_ideal(&back, &ideal));
        prop_assert_eq!(is_zero_mod_ideal(&diff, &ideal), ideal.random_check(&diff, 64, seed));
        let member = &p + &(&h * &ideal.generators()[k]);
        let d = &member - &p;
        prop_assert!(is_zero_mod_ideal(&d, &ideal));
        prop_assert!(ideal.random_check(&d, 64, seed));
    }

    #[test]
    fn matrix_times_adjugate_is_det_identity(entries in prop::collection::vec(expr(2), 9)) {
        let m = SymMatrix::from_fn(3, 3, |i, j| entries[3 * i + j].clone());
        let det = m.det().unwrap();
        let prod = m.matmul(&m.adjugate().unwrap()).unwrap();
        let want = SymMatrix::identity(3).scale(&det);
        prop_assert!(prod.sub(&want).unwrap().is_zero());
    }

    #[test]
    fn division_by_monic_tau_round_trips(p in expr(5), m in monic_tau()) {
        let ideal = ConstraintIdeal::new();
        let (q, r) = divrem_tau(&p, &m, &ideal).unwrap();
        let m_deg = m.degree_in(Sym::Tau).unwrap();
        prop_assert!(r.degree_in(Sym::Tau).map_or(true, |d| d < m_deg));
        let recon = &p - &(&(&q * &m) + &r);
        prop_assert!(is_zero_mod_ideal(&recon, &ideal));
    }

    #[test]
    fn arithmetic_is_reproducible(p in expr(4), q in expr(4)) {
        let a = poly_arith(&p, &q, ArithOp::Mul);
        let b = poly_arith(&p, &q, ArithOp::Mul);
        prop_assert_eq!(a.to_string(), b.to_string());
        prop_assert_eq!(poly_arith(&p, &q, ArithOp::Add), poly_arith(&q, &p, ArithOp::Add));
        prop_assert_eq!(parse_expr(&a.to_string()).unwrap(), a);
    }
}
