// SPDX-License-Identifier: Apache-2.0

//! Exact computer algebra for the complementing-condition computation.
//!
//! Coefficients are Gaussian rationals, polynomials are sparse maps over a
//! fixed eleven-symbol alphabet, and zero tests are performed modulo the
//! constraint ideal `(|n|² − 1, n·Λ, ℓ² − |Λ|²)`.

pub mod gauss;
pub mod ideal;
pub mod matrix;
pub mod parse;
pub mod poly;

pub use gauss::GaussRational;
pub use ideal::{is_zero_mod_ideal, ConstraintIdeal};
pub use matrix::SymMatrix;
pub use parse::parse_expr;
pub use poly::{v, Monomial, Sym, SymExpr, NVARS};

use crate::error::{MacrolabError, Result};

/// Sum, difference or product of two expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Exact polynomial arithmetic in canonical form.
pub fn poly_arith(a: &SymExpr, b: &SymExpr, op: ArithOp) -> SymExpr {
    match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    }
}

/// Quotient and remainder of `p` divided by `m` as polynomials in `τ`.
///
/// `m` must be monic in `τ` with `τ`-free lower coefficients. The remainder
/// is returned in ideal normal form; because the ideal generators do not
/// involve `τ`, normalisation never raises the `τ`-degree.
pub fn divrem_tau(p: &SymExpr, m: &SymExpr, ideal: &ConstraintIdeal) -> Result<(SymExpr, SymExpr)> {
    let d = m
        .degree_in(Sym::Tau)
        .ok_or_else(|| MacrolabError::NotMonic("zero divisor".into()))?;
    if m.coeff_of(Sym::Tau, d) != SymExpr::int(1) {
        return Err(MacrolabError::NotMonic(m.to_string()));
    }
    let tail = m - &SymExpr::term(Monomial::var(Sym::Tau, d), GaussRational::one());
    let mut r = p.clone();
    let mut q = SymExpr::zero();
    while let Some(k) = r.degree_in(Sym::Tau) {
        if k < d {
            break;
        }
        let c = r.coeff_of(Sym::Tau, k);
        let shift = Monomial::var(Sym::Tau, k - d);
        let qt = &c * &SymExpr::term(shift, GaussRational::one());
        // Subtract qt·m = qt·τ^d + qt·tail; the first part cancels the τ^k slice exactly.
        let mut next = SymExpr::zero();
        for (mono, coef) in r.terms() {
            if mono.exp(Sym::Tau) != k {
                next.add_term(*mono, coef.clone());
            }
        }
        r = &next - &(&qt * &tail);
        q = &q + &qt;
    }
    Ok((q, ideal.normal_form(&r)))
}

/// Remainder of `p` modulo the monic-in-`τ` polynomial `m`, reduced modulo the ideal.
pub fn rem_mod_tau(p: &SymExpr, m: &SymExpr, ideal: &ConstraintIdeal) -> Result<SymExpr> {
    Ok(divrem_tau(p, m, ideal)?.1)
}

/// Canonical representative of `p` in the quotient by `(m) + ideal`.
///
/// The quotient is free over the ideal's quotient ring with basis
/// `1, τ, …, τ^{d−1}`, so two expressions agree modulo `(m) + ideal` iff
/// their canonical forms are equal.
pub fn canonical_mod(p: &SymExpr, m: &SymExpr, ideal: &ConstraintIdeal) -> Result<SymExpr> {
    rem_mod_tau(&ideal.normal_form(p), m, ideal)
}

/// `(τ − iℓ)^k` expanded.
pub fn tau_minus_il_pow(k: u32) -> SymExpr {
    (&v(Sym::Tau) - &(&SymExpr::i() * &v(Sym::L))).pow(k)
}
