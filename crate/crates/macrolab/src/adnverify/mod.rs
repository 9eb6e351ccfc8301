// SPDX-License-Identifier: Apache-2.0

//! Replays the complementing-condition computation for the symmetric
//! Poisson system with slip and tangential-traction boundary conditions.
//!
//! Every transcribed closed form in [`table`] is compared with a value
//! computed independently from the operator symbols. Comparisons happen in
//! the quotient ring modulo the constraint ideal, and additionally modulo a
//! power of `τ − iℓ` where the closed form is a remainder.

pub mod table;

use crate::error::{MacrolabError, Result};
use crate::symkernel::{
    canonical_mod, divrem_tau, ideal::buchberger, ideal::normal_form, rem_mod_tau, tau_minus_il_pow, v,
    ConstraintIdeal, Sym, SymExpr, SymMatrix,
};
use serde::Serialize;
pub use table::Transcription;

/// How a step compares its expected and computed values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    /// Zero normal form of the difference modulo the ideal.
    Exact,
    /// Zero canonical form modulo `(τ − iℓ)^k` and the ideal.
    ModTauMinusIl(u32),
    /// Zero normal form modulo the ideal extended by `n₃`.
    ModIdealAndN3,
    /// The printed value is wrong; the step checks that it differs from the
    /// computed value by exactly the documented correction.
    Erratum,
}

/// One expected-versus-computed comparison.
#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub name: String,
    pub compare: Compare,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Outcome of [`run_pipeline`].
#[derive(Clone, Debug, Serialize)]
pub struct AdnPipelineReport {
    pub steps: Vec<Step>,
    /// Closed form of the final determinant when verified, otherwise the computed normal form.
    pub final_determinant: String,
    /// Normal form of the computed determinant.
    pub final_determinant_expanded: String,
    pub pass: bool,
    pub first_failure: Option<String>,
    pub notes: Vec<String>,
}

impl AdnPipelineReport {
    /// Names of the failing steps, in order.
    pub fn failing_steps(&self) -> Vec<&str> {
        self.steps.iter().filter(|s| !s.pass).map(|s| s.name.as_str()).collect()
    }
}

/// Closed form reported for the final determinant.
pub const FINAL_DETERMINANT: &str = "384*l^8*n3*(tau - I*l)^3";

fn xi_vec() -> [SymExpr; 3] {
    [v(Sym::Xi1), v(Sym::Xi2), v(Sym::Xi3)]
}

fn lam_plus_tau_n() -> Vec<(Sym, SymExpr)> {
    (0..3)
        .map(|k| (Sym::XI[k], &v(Sym::LAM[k]) + &(&v(Sym::Tau) * &v(Sym::N[k]))))
        .collect()
}

/// Principal symbol `l(ξ)` of `−(Δu + ∇div u)`, i.e. `−(|ξ|²δᵢⱼ + ξᵢξⱼ)`.
pub fn build_l() -> SymMatrix {
    let xi = xi_vec();
    let s = xi.iter().fold(SymExpr::zero(), |a, e| &a + &e.pow(2));
    SymMatrix::from_fn(3, 3, |i, j| {
        let diag = if i == j { s.clone() } else { SymExpr::zero() };
        -(&diag + &(&xi[i] * &xi[j]))
    })
}

/// `M⁺ = (τ − iℓ)³` expanded.
pub fn build_mplus() -> SymExpr {
    tau_minus_il_pow(3)
}

/// Boundary symbol `B(ξ)`: tangential projection of the traction symbol
/// `(ξₖδᵢₘ + ξᵢδₖₘ)nₖ`, stacked on the slip row `n`.
pub fn build_boundary_xi() -> SymMatrix {
    let xi = xi_vec();
    let n: Vec<SymExpr> = Sym::N.iter().map(|&s| v(s)).collect();
    let xn = (0..3).fold(SymExpr::zero(), |a, k| &a + &(&xi[k] * &n[k]));
    let traction = SymMatrix::from_fn(3, 3, |i, m| {
        let diag = if i == m { xn.clone() } else { SymExpr::zero() };
        &diag + &(&xi[i] * &n[m])
    });
    let proj = SymMatrix::from_fn(3, 3, |i, j| {
        let d = if i == j { SymExpr::int(1) } else { SymExpr::zero() };
        &d - &(&n[i] * &n[j])
    });
    let top = proj.matmul(&traction).expect("3x3 product");
    SymMatrix::from_fn(4, 3, |i, j| if i < 3 { top[(i, j)].clone() } else { n[j].clone() })
}

/// `B(Λ + τn)` (4×3) and the reduced 3×3 matrix 𝔅 made of rows 1, 2 and 4.
pub fn build_boundary() -> (SymMatrix, SymMatrix) {
    let sub = lam_plus_tau_n();
    let b = build_boundary_xi().map(|e| e.subs_many(&sub));
    let fb = b.select_rows(&[0, 1, 3]).expect("rows in range");
    (b, fb)
}

/// Remainders `ρ_jk = ξⱼξₖ|ξ|² mod M⁺` and `τ·ξⱼξₖ|ξ|² mod M⁺` at `ξ = Λ + τn`,
/// each divided by `τ − iℓ`. These are the computed `B_jk` and `C_jk`.
pub fn build_bc_coeffs() -> Result<(Vec<Vec<SymExpr>>, Vec<Vec<SymExpr>>)> {
    let ideal = ConstraintIdeal::new();
    let sub = lam_plus_tau_n();
    let x: Vec<SymExpr> = sub.iter().map(|(_, e)| e.clone()).collect();
    let s2 = x.iter().fold(SymExpr::zero(), |a, e| &a + &e.pow(2));
    let m = build_mplus();
    let t = tau_minus_il_pow(1);
    let mut bs = vec![vec![SymExpr::zero(); 3]; 3];
    let mut cs = vec![vec![SymExpr::zero(); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let p = &(&x[j] * &x[k]) * &s2;
            for (target, poly) in [(&mut bs, p.clone()), (&mut cs, &v(Sym::Tau) * &p)] {
                let r = rem_mod_tau(&poly, &m, &ideal)?;
                let (q, rr) = divrem_tau(&r, &t, &ideal)?;
                if !rr.is_zero() {
                    return Err(MacrolabError::StepFailed(format!("remainder ({},{}) not divisible by tau - i l", j + 1, k + 1)));
                }
                target[j][k] = ideal.normal_form(&q);
            }
        }
    }
    Ok((bs, cs))
}

/// Computed `M(Λ + τn)`: canonical form of `𝔅·N` modulo `(τ − iℓ)²`, where
/// `−(τ − iℓ)N` is the remainder of the adjoint modulo `M⁺`.
fn build_m_from(fb: &SymMatrix, n: &SymMatrix) -> Result<SymMatrix> {
    let ideal = ConstraintIdeal::new();
    let t2 = tau_minus_il_pow(2);
    let prod = fb.matmul(n)?;
    let mut out = SymMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            out[(i, j)] = canonical_mod(&prod[(i, j)], &t2, &ideal)?;
        }
    }
    Ok(out)
}

fn adjoint_mod_mplus() -> Result<(SymMatrix, SymMatrix)> {
    let ideal = ConstraintIdeal::new();
    let sub = lam_plus_tau_n();
    let big_l = build_l().adjugate()?.map(|e| (-e).subs_many(&sub));
    let m = build_mplus();
    let t = tau_minus_il_pow(1);
    let mut n = SymMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let r = rem_mod_tau(&big_l[(i, j)], &m, &ideal)?;
            let (q, rr) = divrem_tau(&r, &t, &ideal)?;
            if !rr.is_zero() {
                return Err(MacrolabError::StepFailed("adjoint modulo M+ not divisible by tau - i l".into()));
            }
            n[(i, j)] = -ideal.normal_form(&q);
        }
    }
    Ok((big_l, n))
}

/// Computes `det M(Λ + τn)` from scratch.
pub fn complementing_determinant() -> Result<SymExpr> {
    let (_, fb) = build_boundary();
    let (_, n) = adjoint_mod_mplus()?;
    let m = build_m_from(&fb, &n)?;
    Ok(ConstraintIdeal::new().normal_form(&m.det()?))
}

fn fmt_matrix(m: &SymMatrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let cells: Vec<String> = (0..m.cols()).map(|j| m[(i, j)].to_string()).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

struct Ctx {
    ideal: ConstraintIdeal,
    n3_basis: Vec<SymExpr>,
    steps: Vec<Step>,
}

impl Ctx {
    fn zero_under(&self, diff: &SymExpr, cmp: Compare) -> Result<bool> {
        Ok(match cmp {
            Compare::Exact | Compare::Erratum => self.ideal.normal_form(diff).is_zero(),
            Compare::ModTauMinusIl(k) => canonical_mod(diff, &tau_minus_il_pow(k), &self.ideal)?.is_zero(),
            Compare::ModIdealAndN3 => normal_form(diff, &self.n3_basis).is_zero(),
        })
    }

    fn push(&mut self, name: impl Into<String>, cmp: Compare, expected: String, computed: String, pass: bool, note: Option<&str>) {
        self.steps.push(Step {
            name: name.into(),
            compare: cmp,
            expected,
            computed,
            pass,
            note: note.map(str::to_string),
        });
    }

    fn scalar(&mut self, name: &str, cmp: Compare, expected: &SymExpr, computed: &SymExpr, note: Option<&str>) -> Result<()> {
        let pass = self.zero_under(&(expected - computed), cmp)?;
        self.push(name, cmp, expected.to_string(), computed.to_string(), pass, note);
        Ok(())
    }

    fn matrix(&mut self, name: &str, cmp: Compare, expected: &SymMatrix, computed: &SymMatrix, note: Option<&str>) -> Result<()> {
        let diff = expected.sub(computed)?;
        let mut pass = true;
        for i in 0..diff.rows() {
            for j in 0..diff.cols() {
                pass &= self.zero_under(&diff[(i, j)], cmp)?;
            }
        }
        self.push(name, cmp, fmt_matrix(expected), fmt_matrix(computed), pass, note);
        Ok(())
    }
}

fn table_matrix(t: &Transcription, prefix: &str, rows: usize, cols: usize) -> Result<SymMatrix> {
    let mut m = SymMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = t.expr(&format!("{prefix}[{},{}]", i + 1, j + 1))?;
        }
    }
    Ok(m)
}

/// Runs the full replay against the bundled transcription.
pub fn run_pipeline() -> Result<AdnPipelineReport> {
    run_pipeline_with(&Transcription::new())
}

/// Runs the full replay against a given transcription (used for fault injection).
pub fn run_pipeline_with(t: &Transcription) -> Result<AdnPipelineReport> {
    let ideal = ConstraintIdeal::new();
    let mut n3_gens: Vec<SymExpr> = ideal.generators().to_vec();
    n3_gens.push(v(Sym::N3));
    let mut cx = Ctx { ideal: ideal.clone(), n3_basis: buchberger(&n3_gens), steps: Vec::new() };
    let sub = lam_plus_tau_n();
    let tm = tau_minus_il_pow(1);

    // Interior symbol and its determinant.
    let l = build_l();
    cx.matrix("l(xi)", Compare::Exact, &table_matrix(t, "l", 3, 3)?, &l, None)?;
    let d = l.det()?;
    cx.scalar("D(xi) = det l(xi)", Compare::Exact, &t.expr("D")?, &d, None)?;

    // Adjoint: the transcribed matrix is the negated classical adjugate.
    let adj = l.adjugate()?;
    let big_l = adj.map(|e| -e);
    cx.matrix(
        "L(xi)",
        Compare::Exact,
        &table_matrix(t, "L", 3, 3)?,
        &big_l,
        Some("the transcribed adjoint equals minus the classical adjugate, so l(xi) L(xi) = -D(xi) I"),
    )?;
    let prod = l.matmul(&big_l)?;
    cx.matrix("l(xi) L(xi) = -D I", Compare::Exact, &SymMatrix::identity(3).scale(&-&d), &prod, None)?;

    // Roots of D(Λ + τn).
    let d_tn = d.subs_many(&sub);
    cx.scalar("D(L + tau n)", Compare::Exact, &t.expr("D(L+tau*n)")?, &d_tn, Some("all three roots with positive imaginary part equal i|L|"))?;
    let mplus = build_mplus();
    cx.scalar("M+", Compare::Exact, &t.expr("M+")?, &mplus, None)?;
    let r = rem_mod_tau(&d_tn, &mplus, &ideal)?;
    cx.scalar("M+ divides D(L + tau n)", Compare::Exact, &SymExpr::zero(), &r, None)?;

    // Boundary symbols.
    let bxi = build_boundary_xi();
    cx.matrix("B(xi)", Compare::Exact, &table_matrix(t, "B", 4, 3)?, &bxi, None)?;
    let (btn, fb) = build_boundary();
    cx.matrix("B(L + tau n)", Compare::Exact, &table_matrix(t, "Btn", 4, 3)?, &btn, None)?;
    let top = btn.select_rows(&[0, 1, 2])?;
    cx.scalar("det of first three rows of B(L + tau n)", Compare::Exact, &t.expr("Btn rank")?, &top.det()?, None)?;
    let rows12 = btn.select_rows(&[0, 1])?;
    cx.matrix(
        "first two rows of B(L + tau n) at n3 = 0",
        Compare::ModIdealAndN3,
        &table_matrix(t, "Bn3", 2, 3)?,
        &rows12,
        None,
    )?;
    let minor = &(&rows12[(0, 0)] * &rows12[(1, 1)]) - &(&rows12[(0, 1)] * &rows12[(1, 0)]);
    cx.scalar(
        "rows 1 and 2 dependent at n3 = 0",
        Compare::ModIdealAndN3,
        &SymExpr::zero(),
        &minor,
        Some("hence n3 != 0 once the first two rows are independent"),
    )?;
    cx.matrix("reduced boundary matrix", Compare::Exact, &table_matrix(t, "fB", 3, 3)?, &fb, None)?;

    // Remainders modulo M+.
    let x: Vec<SymExpr> = sub.iter().map(|(_, e)| e.clone()).collect();
    let s2 = x.iter().fold(SymExpr::zero(), |a, e| &a + &e.pow(2));
    let q4 = s2.pow(2);
    cx.scalar("L_mod_1", Compare::Exact, &t.expr("L_mod_1")?, &rem_mod_tau(&q4, &mplus, &ideal)?, None)?;
    cx.scalar(
        "L_mod_1 times tau",
        Compare::Exact,
        &t.expr("L_mod_1 tau")?,
        &rem_mod_tau(&(&v(Sym::Tau) * &q4), &mplus, &ideal)?,
        None,
    )?;
    let (bc_b, bc_c) = build_bc_coeffs()?;
    for j in 0..3 {
        for k in 0..3 {
            let eb = t.indexed("B_jk", j + 1, k + 1)?;
            let rb = rem_mod_tau(&(&(&x[j] * &x[k]) * &s2), &mplus, &ideal)?;
            cx.scalar(&format!("B_{}{}", j + 1, k + 1), Compare::ModTauMinusIl(3), &(&tm * &eb), &rb, None)?;
            let ec = t.indexed("C_jk", j + 1, k + 1)?;
            let rc = rem_mod_tau(&(&v(Sym::Tau) * &(&(&x[j] * &x[k]) * &s2)), &mplus, &ideal)?;
            cx.scalar(&format!("C_{}{}", j + 1, k + 1), Compare::ModTauMinusIl(3), &(&tm * &ec), &rc, None)?;
        }
    }
    for j in 0..3 {
        for k in 0..3 {
            let a = &bc_b[j][k];
            cx.scalar(&format!("symmetry B_{}{} = B_{}{}", j + 1, k + 1, k + 1, j + 1), Compare::Exact, &bc_b[k][j], a, None)?;
            let tb = &v(Sym::Tau) * a;
            cx.scalar(&format!("tau B_{}{} = C_{}{}", j + 1, k + 1, j + 1, k + 1), Compare::ModTauMinusIl(2), &bc_c[j][k], &tb, None)?;
        }
    }

    // Adjoint modulo M+.
    let (l_tn, n_comp) = adjoint_mod_mplus()?;
    let n_tab = table_matrix(t, "N", 3, 3)?;
    cx.matrix(
        "L(L + tau n) mod M+",
        Compare::ModTauMinusIl(3),
        &n_tab.scale(&-&tm),
        &l_tn,
        None,
    )?;

    // M = 𝔅 N modulo (τ − iℓ)².
    let m_comp = build_m_from(&fb, &n_comp)?;
    let bl = fb.matmul(&l_tn)?;
    cx.matrix("reduced B times L mod M+ = -(tau - i l) M", Compare::ModTauMinusIl(3), &m_comp.scale(&-&tm), &bl, None)?;
    for i in 1..=3 {
        for j in 1..=3 {
            let key = format!("M[{i},{j}]");
            let comp = &m_comp[(i - 1, j - 1)];
            for suffix in [" def", " expanded"] {
                let k2 = format!("{key}{suffix}");
                if t.raw(&k2).is_ok() {
                    cx.scalar(&format!("M_{i}{j}{suffix}"), Compare::ModTauMinusIl(2), &t.expr(&k2)?, comp, None)?;
                }
            }
            cx.scalar(&format!("M_{i}{j}"), Compare::ModTauMinusIl(2), &t.expr(&key)?, comp, None)?;
        }
    }
    // Erratum: the printed simplified line of M_23.
    {
        let printed = t.expr("M[2,3] printed")?;
        let delta = t.expr("M[2,3] erratum")?;
        let comp = &m_comp[(1, 2)];
        let differs = !cx.zero_under(&(&printed - comp), Compare::ModTauMinusIl(2))?;
        let explained = cx.zero_under(&(&(&printed - comp) - &delta), Compare::ModTauMinusIl(2))?;
        cx.push(
            "M_23 printed simplified line",
            Compare::Erratum,
            printed.to_string(),
            comp.to_string(),
            differs && explained,
            Some("the printed line replaces 8 i l^3 n2 n3 (tau - i l) by -8 L2 n3 l^2 (tau - i l); the expanded line and the later expansion carry the correct term"),
        );
    }

    // Determinant blocks.
    let mm = |i: usize, j: usize| m_comp[(i - 1, j - 1)].clone();
    let first = &(&mm(1, 2) * &mm(2, 3)) - &(&mm(2, 2) * &mm(1, 3));
    let first = ideal.normal_form(&first);
    cx.scalar("det:first expansion", Compare::Exact, &t.expr("det:first")?, &first, None)?;
    cx.scalar("det:first combined", Compare::Exact, &t.expr("det:first combined")?, &first, None)?;
    for key in ["(1)x(4)", "(2)x(5)", "(3)x(6)", "(2)x(6)+(3)x(5)", "(1)x(5)+(2)x(4)", "(1)x(6)+(3)x(4)"] {
        let (lhs, rhs) = t.equation(key)?;
        cx.scalar(&format!("common terms {key}"), Compare::Exact, &rhs, &lhs, None)?;
    }
    let b1 = ideal.normal_form(&(&mm(3, 1) * &first));
    let second = ideal.normal_form(&(&(&mm(1, 1) * &mm(2, 3)) - &(&mm(2, 1) * &mm(1, 3))));
    let b2 = ideal.normal_form(&-(&mm(3, 2) * &second));
    let third = ideal.normal_form(&(&(&mm(1, 1) * &mm(2, 2)) - &(&mm(1, 2) * &mm(2, 1))));
    let b3 = ideal.normal_form(&(&mm(3, 3) * &third));
    cx.scalar("det:1", Compare::Exact, &t.expr("det:1")?, &b1, None)?;
    cx.scalar("det:2", Compare::Exact, &t.expr("det:2")?, &b2, None)?;
    cx.scalar("det:3", Compare::Exact, &t.expr("det:3")?, &b3, None)?;
    for key in ["[1]x[3]", "[1]x[4]", "[1]x[5]", "[2]x[3]", "[2]x[4]", "[2]x[5]"] {
        let (lhs, rhs) = t.equation(key)?;
        cx.scalar(&format!("common terms {key}"), Compare::Exact, &rhs, &lhs, None)?;
    }
    let det = ideal.normal_form(&m_comp.det()?);
    let sum = ideal.normal_form(&(&(&b1 + &b2) + &b3));
    cx.scalar("det:1 + det:2 + det:3 = det M", Compare::Exact, &sum, &det, None)?;
    for key in ["det:final 1", "det:final 2", "det:final 3"] {
        cx.scalar(key, Compare::Exact, &t.expr(key)?, &det, None)?;
    }
    let expected_det = t.expr("det")?;
    cx.scalar("det M(L + tau n)", Compare::Exact, &expected_det, &det, None)?;
    let rand_ok = ideal.random_check(&(&expected_det - &det), 64, 0x5eed);
    cx.push(
        "det M(L + tau n), randomized evaluation at 64 constraint points",
        Compare::Exact,
        expected_det.to_string(),
        det.to_string(),
        rand_ok,
        None,
    );
    let nonzero = !ideal.normal_form(&expected_det).is_zero();
    cx.push(
        "det M nonzero in the quotient ring",
        Compare::Exact,
        "nonzero".into(),
        if nonzero { "nonzero".into() } else { "zero".into() },
        nonzero,
        Some("uses |L| != 0 and n3 != 0"),
    );

    let pass = cx.steps.iter().all(|s| s.pass);
    let first_failure = cx.steps.iter().find(|s| !s.pass).map(|s| s.name.clone());
    let det_str = det.to_string();
    Ok(AdnPipelineReport {
        steps: cx.steps,
        final_determinant: if pass { FINAL_DETERMINANT.to_string() } else { det_str.clone() },
        final_determinant_expanded: det_str,
        pass,
        first_failure,
        notes: vec![
            "identities are proved in the quotient ring by |n|^2 = 1, L.n = 0, l^2 = |L|^2; n3 is a free symbol and the hypothesis n3 != 0 is stated, not case-split".into(),
            "the interior equation reads sum_j l_ij(d) u_j = 2 h_i; the factor 2 relative to -div(sym grad u) = h is recorded, not resolved".into(),
            "the transcribed adjoint L is minus the classical adjugate of l; with the classical adjugate the determinant changes sign".into(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::GaussRational;

    fn int(k: i64) -> GaussRational {
        GaussRational::from_int(k)
    }

    fn eval_at(e: &SymExpr, tau: i64) -> GaussRational {
        let mut pt: [GaussRational; crate::symkernel::NVARS] = Default::default();
        pt[Sym::Tau.index()] = int(tau);
        pt[Sym::L.index()] = int(1);
        pt[Sym::Lam1.index()] = int(1);
        pt[Sym::N3.index()] = int(1);
        e.eval(&pt)
    }

    #[test]
    fn l_entries_and_spot_value() {
        let l = build_l();
        assert_eq!(l, l.transpose());
        let mut pt: [GaussRational; crate::symkernel::NVARS] = Default::default();
        pt[Sym::Xi1.index()] = int(1);
        let vals: Vec<GaussRational> = (0..9).map(|k| l[(k / 3, k % 3)].eval(&pt)).collect();
        let expect = [-2, 0, 0, 0, -1, 0, 0, 0, -1];
        for (a, b) in vals.iter().zip(expect) {
            assert_eq!(*a, int(b));
        }
    }

    #[test]
    fn mplus_expansion() {
        assert_eq!(build_mplus(), crate::symkernel::parse_expr("tau^3 - 3*I*l*tau^2 - 3*l^2*tau + I*l^3").unwrap());
    }

    #[test]
    fn boundary_spot_checks() {
        let (b, fb) = build_boundary();
        assert_eq!(b.rows(), 4);
        assert_eq!(fb[(2, 0)], v(Sym::N1));
        let expect = crate::symkernel::parse_expr("tau*(1 - n1^2) + L1*n1").unwrap();
        let id = ConstraintIdeal::new();
        assert!(id.normal_form(&(&fb[(0, 0)] - &expect)).is_zero());
    }

    #[test]
    fn bc_coefficient_spot_value() {
        // n = e3, Λ = e1, ℓ = 1: B_11 = τ + i.
        let (b, _) = build_bc_coeffs().unwrap();
        let val = eval_at(&b[0][0], 0);
        assert_eq!(val, GaussRational::i());
        let val1 = eval_at(&b[0][0], 1);
        assert_eq!(val1, int(1) + GaussRational::i());
    }

    #[test]
    fn determinant_spot_value() {
        // n = e3, Λ = e1, ℓ = 1, τ = 2: 384 (2 - i)^3 = 768 - 4224 i.
        let det = complementing_determinant().unwrap();
        let val = eval_at(&det, 2);
        assert_eq!(val, int(768) - int(4224) * GaussRational::i());
    }

    #[test]
    fn pipeline_passes() {
        let r = run_pipeline().unwrap();
        assert!(r.pass, "failing steps: {:?}", r.failing_steps());
        assert_eq!(r.final_determinant, FINAL_DETERMINANT);
    }

    #[test]
    fn reduced_boundary_mutation_is_caught_first_there() {
        let t = Transcription::new().flip_sign("fB[1,2]", 0).unwrap();
        let r = run_pipeline_with(&t).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_failure.as_deref(), Some("reduced boundary matrix"));
    }
}
