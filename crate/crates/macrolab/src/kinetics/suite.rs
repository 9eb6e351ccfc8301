// SPDX-License-Identifier: Apache-2.0

//! The velocity identity suite: Gaussian moments, the null-space basis and
//! projection, Burnett functions, test-function forms, transport identities,
//! boundary cancellation, `σ` coefficients and the relaxation operator.

use super::testfn::{psi_b, psi_b_expansion, psi_scalar, BoundarySample};
use super::{
    bgk_apply, boundary_vanish_check, burnett, chi_basis, maxwellian, nu, sigma_at, sigma_norm, specular_reflect,
    transport_identity_check, ChiTable, Poly3, SigmaCoeffs, TestFunctionField, TestKind, VelocityGrid,
};
use crate::error::Result;
use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Frozen constant for `‖μ^{1/4}(I−P)f‖ ≤ C‖(I−P)f‖_σ` on random test functions.
///
/// Twice the largest ratio (0.2015) seen over 20 functions from each of the
/// calibration seeds 1000, 1001, 1002 on the 16-point grid.
pub const SIGMA_LOWER_CAP: f64 = 0.403;

/// Direction of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `defect ≤ tol`.
    AtMost,
    /// Passes when `defect > tol` (negative controls).
    Above,
}

/// One row of the suite table.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub label: String,
    /// The computed quantity (an integral, a ratio or a defect).
    pub value: f64,
    /// The quantity compared against `tol`.
    pub defect: f64,
    pub tol: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl SuiteEntry {
    fn new(label: impl Into<String>, value: f64, defect: f64, tol: f64, bound: Bound) -> SuiteEntry {
        let pass = defect.is_finite()
            && match bound {
                Bound::AtMost => defect <= tol,
                Bound::Above => defect > tol,
            };
        SuiteEntry { label: label.into(), value, defect, tol, bound, pass }
    }

    /// A computed value checked against an expected one.
    fn value(label: &str, value: f64, want: f64, tol: f64) -> SuiteEntry {
        SuiteEntry::new(label, value, (value - want).abs(), tol, Bound::AtMost)
    }

    /// A defect that must stay below `tol`.
    fn defect(label: &str, defect: f64, tol: f64) -> SuiteEntry {
        SuiteEntry::new(label, defect, defect, tol, Bound::AtMost)
    }
}

/// The full table with timing-free metadata.
#[derive(Clone, Debug, Serialize)]
pub struct MomentSuite {
    pub grid_points: usize,
    pub seed: u64,
    pub entries: Vec<SuiteEntry>,
    pub pass: bool,
}

impl MomentSuite {
    pub fn failing(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| !e.pass).map(|e| e.label.as_str()).collect()
    }

    pub fn get(&self, label: &str) -> Option<&SuiteEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

const EXACT: f64 = 1e-12;
const IDENTITY: f64 = 1e-10;

/// Gaussian moments, orthonormality, projection table, Burnett and `ψ` forms.
pub fn moment_checks(grid: &VelocityGrid, seed: u64) -> Vec<SuiteEntry> {
    let chi = ChiTable::new(grid);
    let m = |f: &dyn Fn([f64; 3]) -> f64| grid.integrate(&grid.sample(|v| f(v) * maxwellian(v)));
    let worst = |vals: Vec<f64>, want: f64| vals.iter().map(|x| (x - want).abs()).fold(0.0, f64::max);
    let mut out = Vec::new();

    out.push(SuiteEntry::value("fact:1", m(&|_| 1.0), 1.0, EXACT));
    let sq: Vec<f64> = (0..3).map(|i| m(&|v| v[i] * v[i])).collect();
    out.push(SuiteEntry::new("fact:|v_i|^2", sq[0], worst(sq.clone(), 1.0), EXACT, Bound::AtMost));
    let mixed: Vec<f64> =
        [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| m(&|v| v[i] * v[i] * v[j] * v[j])).collect();
    out.push(SuiteEntry::new("fact:|v_i|^2|v_j|^2", mixed[0], worst(mixed.clone(), 1.0), EXACT, Bound::AtMost));
    let quart: Vec<f64> = (0..3).map(|i| m(&|v| v[i].powi(4))).collect();
    out.push(SuiteEntry::new("fact:|v_i|^4", quart[0], worst(quart.clone(), 3.0), EXACT, Bound::AtMost));

    let mut ortho = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let want = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((grid.inner(&chi.chi[i], &chi.chi[j]) - want).abs());
        }
    }
    out.push(SuiteEntry::defect("basis_chi:orthonormal", ortho, EXACT));
    out.push(SuiteEntry::value("basis_chi:chi4_at_|v|^2=3", chi_basis([1.0, 1.0, 1.0])[4], 0.0, EXACT));

    let proj_defect = |f: &[f64], want: [f64; 5]| {
        let got = chi.moments(grid, f).as_array();
        got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let mut cube = 0.0f64;
    let mut quad_lin = 0.0f64;
    for i in 0..3 {
        let mut want = [0.0; 5];
        want[i + 1] = 3.0;
        cube = cube.max(proj_defect(&grid.sample(|v| v[i].powi(3) * maxwellian(v).sqrt()), want));
        for k in (0..3).filter(|&k| k != i) {
            let mut want = [0.0; 5];
            want[k + 1] = 1.0;
            quad_lin = quad_lin.max(proj_defect(&grid.sample(|v| v[i] * v[i] * v[k] * maxwellian(v).sqrt()), want));
        }
    }
    out.push(SuiteEntry::defect("projection:P(v_i^3 sqrt_mu)=3chi_i", cube, EXACT));
    out.push(SuiteEntry::defect("projection:P(v_i^2 v_k sqrt_mu)=chi_k", quad_lin, EXACT));
    out.push(SuiteEntry::defect("projection:P(chi_0)=chi_0", proj_defect(&chi.chi[0], [1.0, 0.0, 0.0, 0.0, 0.0]), EXACT));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idem = 0.0f64;
    let mut orth = 0.0f64;
    for _ in 0..5 {
        let f = random_velocity_function(grid, &mut rng);
        let (_, pf) = chi.project(grid, &f);
        let (_, ppf) = chi.project(grid, &pf);
        idem = idem.max(pf.iter().zip(&ppf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let micro = chi.micro(grid, &f);
        for k in 0..5 {
            orth = orth.max(grid.inner(&micro, &chi.chi[k]).abs());
        }
    }
    out.push(SuiteEntry::defect("projection:idempotent", idem, EXACT));
    out.push(SuiteEntry::defect("projection:orthogonal", orth, EXACT));

    let b: Vec<([[f64; 3]; 3], [f64; 3])> = grid.nodes.iter().map(|&v| burnett(v)).collect();
    let mut pa = 0.0f64;
    let mut pb = 0.0f64;
    let mut trace = 0.0f64;
    for (a, _) in &b {
        trace = trace.max((a[0][0] + a[1][1] + a[2][2]).abs());
    }
    for i in 0..3 {
        let bi: Vec<f64> = b.iter().map(|x| x.1[i]).collect();
        pb = pb.max(proj_defect(&bi, [0.0; 5]));
        for j in 0..3 {
            let aij: Vec<f64> = b.iter().map(|x| x.0[i][j]).collect();
            pa = pa.max(proj_defect(&aij, [0.0; 5]));
        }
    }
    let a12: Vec<f64> = b.iter().map(|x| x.0[0][1]).collect();
    let pair = grid.inner(&a12, &grid.sample(|v| v[0] * v[1] * maxwellian(v).sqrt()));
    out.push(SuiteEntry::defect("B_ij_property:P(A_ij)=0", pa, EXACT));
    out.push(SuiteEntry::defect("B_ij_property:P(B_i)=0", pb, EXACT));
    out.push(SuiteEntry::defect("B_ij:traceless", trace, EXACT));
    out.push(SuiteEntry::value("B_ij:<A_12,v_1v_2 sqrt_mu>", pair, 1.0, EXACT));

    let mut two_form = 0.0f64;
    for _ in 0..10 {
        let jac: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen::<f64>() * 2.0 - 1.0));
        for &v in &grid.nodes {
            two_form = two_form.max((psi_b(&jac, v) - psi_b_expansion(&jac, v)).abs());
        }
    }
    out.push(SuiteEntry::defect("test_b:two_forms", two_form, EXACT));
    let grad: [f64; 3] = std::array::from_fn(|_| rng.gen::<f64>() * 2.0 - 1.0);
    let mut lin_a = 0.0f64;
    for &v in &grid.nodes {
        let (_, bv) = burnett(v);
        let c = chi_basis(v);
        let want: f64 = (0..3).map(|i| grad[i] * (10f64.sqrt() * bv[i] - 5.0 * c[i + 1])).sum();
        lin_a = lin_a.max((psi_scalar(TestKind::PsiA, &grad, v) - want).abs());
    }
    out.push(SuiteEntry::defect("test_a:burnett_form", lin_a, EXACT));

    let mut refl = 0.0f64;
    for _ in 0..20 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen::<f64>() * 8.0 - 4.0);
        let n = unit(std::array::from_fn(|_| rng.gen::<f64>() - 0.5));
        let r = specular_reflect(v, n).expect("unit normal");
        let rr = specular_reflect(r, n).expect("unit normal");
        let speed = (dot(r, r).sqrt() - dot(v, v).sqrt()).abs();
        let flip = (dot(n, r) + dot(n, v)).abs();
        let back = (0..3).map(|d| (rr[d] - v[d]).abs()).fold(0.0, f64::max);
        refl = refl.max(speed).max(flip).max(back);
    }
    out.push(SuiteEntry::defect("reflection:speed_and_involution", refl, EXACT));
    out
}

/// Transport identities for `n_poly` random polynomials per kind and the
/// flat-face boundary cancellation with its negative control.
pub fn transport_checks(grid: &VelocityGrid, seed: u64, n_poly: usize) -> Result<Vec<SuiteEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a11);
    let mut out = Vec::new();
    for (kind, label) in
        [(TestKind::PsiA, "transport_a"), (TestKind::PsiB, "transport_b"), (TestKind::PsiC, "transport_c")]
    {
        let mut worst = 0.0f64;
        for k in 0..n_poly {
            let deg = (k % 5) as u8;
            let comps = if kind == TestKind::PsiB { 3 } else { 1 };
            let phi: Vec<Poly3> = (0..comps).map(|_| Poly3::random(deg, &mut rng)).collect();
            let pts: Vec<[f64; 3]> = (0..2).map(|_| std::array::from_fn(|_| rng.gen::<f64>() * 2.0 - 1.0)).collect();
            worst = worst.max(transport_identity_check(kind, &phi, &pts, grid)?);
        }
        out.push(SuiteEntry::defect(label, worst, IDENTITY));
    }

    // Tangential traction on n = e1 vanishes iff ∂₂φ¹ + ∂₁φ² = 0 and ∂₃φ¹ + ∂₁φ³ = 0.
    let jac = [[0.7, 0.4, -0.2], [-0.4, 1.1, 0.5], [0.2, -0.3, 0.9]];
    let psi = TestFunctionField::from_jacobians(vec![jac]);
    let even = grid.sample(|v| (1.0 + v[0] * v[0] + 0.3 * v[1] + v[1] * v[2]) * maxwellian(v).sqrt());
    let sample = BoundarySample { cell: 0, normal: [1.0, 0.0, 0.0], f: even };
    let d = boundary_vanish_check(&psi, std::slice::from_ref(&sample), grid)?;
    out.push(SuiteEntry::defect("bdr_2_3_vanish:flat_face", d, IDENTITY));
    let odd = grid.sample(|v| (v[0] + v[0] * v[1]) * maxwellian(v).sqrt());
    let d = boundary_vanish_check(&psi, &[BoundarySample { f: odd, ..sample }], grid)?;
    out.push(SuiteEntry::new("bdr_2_3_vanish:odd_f_flagged", d, d, 1e-3, Bound::Above));
    let zero = TestFunctionField::from_jacobians(vec![[[0.0; 3]; 3]]);
    let s = BoundarySample { cell: 0, normal: [1.0, 0.0, 0.0], f: grid.sqrt_mu.clone() };
    out.push(SuiteEntry::defect("bdr_2_3_vanish:zero_psi", boundary_vanish_check(&zero, &[s], grid)?, 0.0));
    Ok(out)
}

/// Exact trace `Σσ^{ii}(v) = ∫ 2|v−u|⁻¹μ(u) du = 2·erf(|v|/√2)/|v|`.
pub fn sigma_trace_oracle(v: [f64; 3]) -> f64 {
    let r = dot(v, v).sqrt();
    if r < 1e-8 {
        return 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    }
    2.0 * libm::erf(r / 2f64.sqrt()) / r
}

/// `‖μ^{1/4}(I−P)f‖_{L²} / ‖(I−P)f‖_σ`.
pub fn sigma_lower_ratio(grid: &VelocityGrid, chi: &ChiTable, sigma: &SigmaCoeffs, f: &[f64]) -> f64 {
    let micro = chi.micro(grid, f);
    let weighted: f64 =
        micro.iter().zip(&grid.sqrt_mu).zip(&grid.weights).map(|((m, s), w)| m * m * s * w).sum();
    (weighted / sigma_norm(grid, sigma, &micro)).sqrt()
}

/// Random `p(v)√μ` with `p` of degree ≤ 4 and coefficients in `[−1, 1]`.
pub fn random_velocity_function(grid: &VelocityGrid, rng: &mut impl Rng) -> Vec<f64> {
    let p = Poly3::random(4, rng);
    grid.nodes.iter().zip(&grid.sqrt_mu).map(|(&v, s)| p.eval(v) * s).collect()
}

/// Largest `sigma_lower_ratio` over `count` random functions drawn from `seed`.
pub fn sigma_lower_max(grid: &VelocityGrid, sigma: &SigmaCoeffs, seed: u64, count: usize) -> f64 {
    let chi = ChiTable::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| sigma_lower_ratio(grid, &chi, sigma, &random_velocity_function(grid, &mut rng)))
        .fold(0.0, f64::max)
}

/// `σ` symmetry and semidefiniteness at every node, the trace identity at 20
/// random velocities, the `σ`-norm examples and the calibrated lower bound.
pub fn sigma_checks(grid: &VelocityGrid, seed: u64) -> Result<Vec<SuiteEntry>> {
    let sigma = SigmaCoeffs::new(grid)?;
    let mut asym = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut min_quad = f64::INFINITY;
    for (s, &v) in sigma.values.iter().zip(&grid.nodes) {
        for i in 0..3 {
            for j in 0..3 {
                asym = asym.max((s[i][j] - s[j][i]).abs());
            }
        }
        min_eig = min_eig.min(SymmetricEigen::new(Matrix3::from_fn(|i, j| s[i][j])).eigenvalues.min());
        let q: f64 = (0..3).map(|i| (0..3).map(|j| s[i][j] * v[i] * v[j]).sum::<f64>()).sum();
        min_quad = min_quad.min(q);
    }
    let mut out = vec![
        SuiteEntry::defect("sigma:symmetric", asym, 1e-15),
        SuiteEntry::new("sigma:min_eigenvalue", min_eig, (-min_eig).max(0.0), 1e-12, Bound::AtMost),
        SuiteEntry::new("sigma:v_sigma_v", min_quad, (-min_quad).max(0.0), 1e-12, Bound::AtMost),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    let mut rel = 0.0f64;
    for _ in 0..20 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen::<f64>() * 8.0 - 4.0);
        let s = sigma_at(v)?;
        let want = sigma_trace_oracle(v);
        rel = rel.max(((s[0][0] + s[1][1] + s[2][2]) - want).abs() / want);
    }
    out.push(SuiteEntry::defect("sigma:trace_identity", rel, 1e-6));

    let z = sigma_norm(grid, &sigma, &vec![0.0; grid.len()]);
    out.push(SuiteEntry::defect("sigma_norm:zero", z, 0.0));
    let c0 = sigma_norm(grid, &sigma, &grid.sqrt_mu);
    out.push(SuiteEntry::new("sigma_norm:chi_0_positive", c0, c0, 0.0, Bound::Above));
    let ratio = sigma_lower_max(grid, &sigma, seed, 20);
    out.push(SuiteEntry::new("sigma_lower:calibrated", ratio, ratio, SIGMA_LOWER_CAP, Bound::AtMost));
    Ok(out)
}

/// Null space, nonnegativity and `PL = 0` of the relaxation operator.
pub fn bgk_checks(grid: &VelocityGrid, seed: u64) -> Vec<SuiteEntry> {
    let chi = ChiTable::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb9);
    let mut null = 0.0f64;
    for k in 0..5 {
        null = null.max(bgk_apply(grid, &chi, &chi.chi[k]).iter().fold(0.0, |a, x| a.max(x.abs())));
    }
    let mut neg = 0.0f64;
    let mut pl = 0.0f64;
    for _ in 0..100 {
        let f: Vec<f64> = grid.sqrt_mu.iter().map(|s| s * (rng.gen::<f64>() - 0.5)).collect();
        let lf = bgk_apply(grid, &chi, &f);
        neg = neg.max(-grid.inner(&lf, &f));
        pl = pl.max(chi.moments(grid, &lf).as_array().iter().fold(0.0, |a, x| a.max(x.abs())));
    }
    let a11: Vec<f64> = grid.nodes.iter().map(|&v| burnett(v).0[0][0]).collect();
    let l = bgk_apply(grid, &chi, &a11);
    let micro = l.iter().zip(&a11).zip(&grid.nodes).map(|((x, a), &v)| (x - nu(v) * a).abs()).fold(0.0, f64::max);
    vec![
        SuiteEntry::defect("bgk:null_space", null, EXACT),
        SuiteEntry::new("bgk:nonnegative", -neg, neg.max(0.0), 1e-12, Bound::AtMost),
        SuiteEntry::defect("collision_inv:PL=0", pl, EXACT),
        SuiteEntry::defect("bgk:A_11", micro, EXACT),
    ]
}

/// Every check on a grid with `grid_points` nodes per axis.
pub fn run_suite(grid_points: usize, seed: u64) -> Result<MomentSuite> {
    let grid = VelocityGrid::new(grid_points);
    let mut entries = moment_checks(&grid, seed);
    entries.extend(transport_checks(&grid, seed, 17)?);
    entries.extend(sigma_checks(&grid, seed)?);
    entries.extend(bgk_checks(&grid, seed));
    let pass = entries.iter().all(|e| e.pass);
    Ok(MomentSuite { grid_points, seed, entries, pass })
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let l = dot(a, a).sqrt();
    a.map(|x| x / l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_checks_pass_on_default_grid() {
        let g = VelocityGrid::new(16);
        let entries = moment_checks(&g, 1);
        let fails: Vec<_> = entries.iter().filter(|e| !e.pass).collect();
        assert!(fails.is_empty(), "{fails:?}");
        let quart = entries.iter().find(|e| e.label == "fact:|v_i|^4").unwrap();
        assert!((quart.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_oracle_matches_limit() {
        let small = sigma_trace_oracle([1e-6, 0.0, 0.0]);
        assert!((small - sigma_trace_oracle([0.0; 3])).abs() < 1e-10);
    }

    #[test]
    fn sigma_norm_examples() {
        let g = VelocityGrid::new(8);
        let s = SigmaCoeffs::new(&g).unwrap();
        assert_eq!(sigma_norm(&g, &s, &vec![0.0; g.len()]), 0.0);
        let c0 = sigma_norm(&g, &s, &g.sqrt_mu);
        assert!(c0.is_finite() && c0 > 0.0);
    }
}
