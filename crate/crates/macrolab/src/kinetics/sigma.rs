// SPDX-License-Identifier: Apache-2.0

//! Landau coefficients `σ^{ij} = φ^{ij} * μ` for the Coulomb kernel
//! `φ^{ij}(z) = (δ_ij − z_iz_j/|z|²)/|z|`, and the weighted `σ`-norm.
//!
//! By rotational symmetry `σ(v) = σ_∥(|v|) v̂v̂ᵀ + σ_⊥(|v|)(I − v̂v̂ᵀ)`. In
//! spherical coordinates `z = ρ(c v̂ + …)` about `v`, with `μ(v − z)`
//! depending on `ρ` and `c` only,
//! `σ_∥ = 2π ∫ρ ∫(1−c²) μ dc dρ` and `σ_⊥ = π ∫ρ ∫(1+c²) μ dc dρ`;
//! the `1/|z|` singularity is absorbed by the Jacobian `ρ²`.

use super::grid::VelocityGrid;
use crate::error::{MacrolabError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::HashMap;
use std::sync::OnceLock;

const GL_POINTS: usize = 12;
/// Target accuracy of the `σ` quadrature.
pub const SIGMA_TOL: f64 = 1e-8;

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let jac = DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) == 1 {
                let k = i.max(j) as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> =
            (0..n).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    })
}

fn gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre();
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    x.iter().zip(w).map(|(xi, wi)| wi * f(m + h * xi)).sum::<f64>() * h
}

/// Adaptive Gauss–Legendre quadrature: a panel is accepted when its
/// estimate agrees with the sum over its two halves to `tol`.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = gl(f, a, m);
        let right = gl(f, m, b);
        let err = (left + right - whole).abs();
        if err <= tol {
            return Ok(left + right);
        }
        if depth == 0 {
            return Err(MacrolabError::Quadrature(format!("panel [{a}, {b}] error {err:e}")));
        }
        Ok(rec(f, a, m, left, 0.5 * tol, depth - 1)? + rec(f, m, b, right, 0.5 * tol, depth - 1)?)
    }
    rec(f, a, b, gl(f, a, b), tol, 40)
}

/// `(σ_∥, σ_⊥)` at speed `r`.
pub fn sigma_radial(r: f64) -> Result<(f64, f64)> {
    let norm = (2.0 * std::f64::consts::PI).powf(-1.5);
    let rho_max = r + 14.0;
    let inner = |rho: f64, plus: bool| -> Result<f64> {
        let g = |c: f64| {
            let ang = if plus { 1.0 + c * c } else { 1.0 - c * c };
            ang * norm * (-0.5 * (r * r - 2.0 * r * rho * c + rho * rho)).exp()
        };
        adaptive(&g, -1.0, 1.0, 1e-3 * SIGMA_TOL)
    };
    let outer = |plus: bool| -> Result<f64> {
        let err = std::cell::Cell::new(None);
        let h = |rho: f64| match inner(rho, plus) {
            Ok(v) => rho * v,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        };
        let split = r.clamp(1e-3, rho_max - 1.0);
        let total = adaptive(&h, 0.0, split, 0.5 * SIGMA_TOL)? + adaptive(&h, split, rho_max, 0.5 * SIGMA_TOL)?;
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(total),
        }
    };
    let pi = std::f64::consts::PI;
    Ok((2.0 * pi * outer(false)?, pi * outer(true)?))
}

/// `σ(v)` as a symmetric 3×3 matrix.
pub fn sigma_at(v: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let (par, perp) = sigma_radial(r)?;
    Ok(assemble(v, r, par, perp))
}

fn assemble(v: [f64; 3], r: f64, par: f64, perp: f64) -> [[f64; 3]; 3] {
    let u = if r > 0.0 { [v[0] / r, v[1] / r, v[2] / r] } else { [0.0, 0.0, 1.0] };
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let id = if i == j { 1.0 } else { 0.0 };
            par * u[i] * u[j] + perp * (id - u[i] * u[j])
        })
    })
}

/// `σ` at every node of a velocity grid.
#[derive(Clone, Debug)]
pub struct SigmaCoeffs {
    pub values: Vec<[[f64; 3]; 3]>,
}

impl SigmaCoeffs {
    /// Computes `σ` once per distinct speed on the grid.
    pub fn new(grid: &VelocityGrid) -> Result<SigmaCoeffs> {
        let mut cache: HashMap<u64, (f64, f64)> = HashMap::new();
        let mut values = Vec::with_capacity(grid.len());
        for &v in &grid.nodes {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let key = (r * 1e12).round() as u64;
            let (par, perp) = match cache.get(&key) {
                Some(p) => *p,
                None => {
                    let p = sigma_radial(r)?;
                    cache.insert(key, p);
                    p
                }
            };
            values.push(assemble(v, r, par, perp));
        }
        Ok(SigmaCoeffs { values })
    }
}

/// `∫ σ^{ij}∂_if∂_jf + σ^{ij}v_iv_j f² dv` for one velocity function, with
/// derivatives from the Hermite-function expansion.
pub fn sigma_norm(grid: &VelocityGrid, sigma: &SigmaCoeffs, f: &[f64]) -> f64 {
    let d: [Vec<f64>; 3] = std::array::from_fn(|k| grid.derivative(f, k));
    let mut total = 0.0;
    for (n, v) in grid.nodes.iter().enumerate() {
        let s = &sigma.values[n];
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += s[i][j] * (d[i][n] * d[j][n] + v[i] * v[j] * f[n] * f[n]);
            }
        }
        total += grid.weights[n] * q;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn erf(x: f64) -> f64 {
        // Independent oracle: composite Simpson on ∫₀ˣ 2/√π e^{-t²} dt.
        let n = 20_000;
        let h = x / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut s = f(0.0) + f(x);
        for k in 1..n {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0 * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn isotropic_at_origin() {
        let s = sigma_at([0.0; 3]).unwrap();
        assert!((s[0][0] - s[1][1]).abs() < 1e-10 && (s[1][1] - s[2][2]).abs() < 1e-10);
        assert!(s[0][1].abs() < 1e-15);
        // Both reductions equal (4/3)·2π∫ρμ(ρ)dρ = (4/3)·2π/(2π)^{3/2} at v = 0.
        let want = 4.0 / 3.0 * (2.0 * std::f64::consts::PI).powf(-0.5);
        assert!((s[0][0] - want).abs() < 1e-9);
    }

    #[test]
    fn trace_matches_gaussian_potential() {
        for r in [0.3, 1.0, 2.5, 5.0] {
            let (par, perp) = sigma_radial(r).unwrap();
            let want = 2.0 * erf(r / 2f64.sqrt()) / r;
            assert!((par + 2.0 * perp - want).abs() < 1e-8, "{r}: {} vs {want}", par + 2.0 * perp);
        }
    }

    #[test]
    fn positive_semidefinite_at_random_velocities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let v: [f64; 3] = std::array::from_fn(|_| rng.gen::<f64>() * 8.0 - 4.0);
            let s = sigma_at(v).unwrap();
            let m = nalgebra::Matrix3::from_fn(|i, j| s[i][j]);
            let e = SymmetricEigen::new(m);
            assert!(e.eigenvalues.min() >= -1e-12);
            let q: f64 = (0..3).map(|i| (0..3).map(|j| s[i][j] * v[i] * v[j]).sum::<f64>()).sum();
            assert!(q >= 0.0);
        }
    }
}
