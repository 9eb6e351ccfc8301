// SPDX-License-Identifier: Apache-2.0

//! Velocity-space toolkit: Maxwellian, null-space basis and macroscopic
//! projection, Burnett functions, specular reflection, the test functions
//! with their transport identities, Landau `σ` coefficients and the BGK
//! surrogate collision operator.
//!
//! Velocity functions are stored as values at the grid nodes and include
//! the `√μ` factor (for example `χ₀` is stored as `√μ`).

pub mod grid;
pub mod sigma;
pub mod suite;
pub mod testfn;

pub use grid::{maxwellian, VelocityGrid};
pub use sigma::{sigma_at, sigma_norm, SigmaCoeffs};
pub use testfn::{
    boundary_vanish_check, transport_identity_check, Poly3, TestFunctionField, TestKind,
};

use crate::error::{MacrolabError, Result};

/// Null-space basis `(√μ, v₁√μ, v₂√μ, v₃√μ, (|v|²−3)/√6·√μ)`.
pub fn chi_basis(v: [f64; 3]) -> [f64; 5] {
    let s = maxwellian(v).sqrt();
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    [s, v[0] * s, v[1] * s, v[2] * s, (r2 - 3.0) / 6f64.sqrt() * s]
}

/// Macroscopic moments of one velocity function.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Moments {
    pub a: f64,
    pub b: [f64; 3],
    pub c: f64,
}

impl Moments {
    pub fn as_array(&self) -> [f64; 5] {
        [self.a, self.b[0], self.b[1], self.b[2], self.c]
    }
}

/// Cellwise macroscopic fields `a`, `b`, `c`.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct MomentState {
    pub a: Vec<f64>,
    pub b: Vec<[f64; 3]>,
    pub c: Vec<f64>,
}

impl MomentState {
    pub fn push(&mut self, m: Moments) {
        self.a.push(m.a);
        self.b.push(m.b);
        self.c.push(m.c);
    }
}

/// Null-space basis sampled on a grid.
#[derive(Clone, Debug)]
pub struct ChiTable {
    pub chi: [Vec<f64>; 5],
}

impl ChiTable {
    pub fn new(grid: &VelocityGrid) -> ChiTable {
        let rows: Vec<[f64; 5]> = grid.nodes.iter().map(|&v| chi_basis(v)).collect();
        ChiTable { chi: std::array::from_fn(|k| rows.iter().map(|r| r[k]).collect()) }
    }

    /// `⟨f, χ_k⟩` for all five basis functions.
    pub fn moments(&self, grid: &VelocityGrid, f: &[f64]) -> Moments {
        let m: [f64; 5] = std::array::from_fn(|k| grid.inner(f, &self.chi[k]));
        Moments { a: m[0], b: [m[1], m[2], m[3]], c: m[4] }
    }

    /// `Σ m_k χ_k`.
    pub fn expand(&self, m: &Moments) -> Vec<f64> {
        let c = m.as_array();
        (0..self.chi[0].len()).map(|i| (0..5).map(|k| c[k] * self.chi[k][i]).sum()).collect()
    }

    /// Moments and `Pf`.
    pub fn project(&self, grid: &VelocityGrid, f: &[f64]) -> (Moments, Vec<f64>) {
        let m = self.moments(grid, f);
        let pf = self.expand(&m);
        (m, pf)
    }

    /// `(I − P)f`.
    pub fn micro(&self, grid: &VelocityGrid, f: &[f64]) -> Vec<f64> {
        let (_, pf) = self.project(grid, f);
        f.iter().zip(pf).map(|(a, b)| a - b).collect()
    }
}

/// Moments of `f` and its macroscopic part `Pf`.
pub fn project_p(grid: &VelocityGrid, f: &[f64]) -> Result<(Moments, Vec<f64>)> {
    if f.len() != grid.len() {
        return Err(MacrolabError::Dimension(format!("{} values for a {}-node grid", f.len(), grid.len())));
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(MacrolabError::Dimension("non-finite velocity values".into()));
    }
    Ok(ChiTable::new(grid).project(grid, f))
}

/// Burnett functions `Â_ij = (v_iv_j − δ_ij|v|²/3)√μ` and `B̂_i = v_i(|v|²−5)/√10·√μ`.
pub fn burnett(v: [f64; 3]) -> ([[f64; 3]; 3], [f64; 3]) {
    let s = maxwellian(v).sqrt();
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let a = std::array::from_fn(|i| {
        std::array::from_fn(|j| (v[i] * v[j] - if i == j { r2 / 3.0 } else { 0.0 }) * s)
    });
    let b = std::array::from_fn(|i| v[i] * (r2 - 5.0) / 10f64.sqrt() * s);
    (a, b)
}

/// Specular reflection `v − 2n(n·v)`.
pub fn specular_reflect(v: [f64; 3], n: [f64; 3]) -> Result<[f64; 3]> {
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (len - 1.0).abs() > 1e-12 {
        return Err(MacrolabError::NonUnitNormal(len));
    }
    let d = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
    Ok([v[0] - 2.0 * d * n[0], v[1] - 2.0 * d * n[1], v[2] - 2.0 * d * n[2]])
}

/// Collision frequency `ν(v) = √(1+|v|²)`.
pub fn nu(v: [f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Relaxation operator `L f = (I − P)[ν (I − P) f]`: symmetric, nonnegative
/// and annihilating exactly the null space.
pub fn bgk_apply(grid: &VelocityGrid, chi: &ChiTable, f: &[f64]) -> Vec<f64> {
    let micro = chi.micro(grid, f);
    let weighted: Vec<f64> = micro.iter().zip(&grid.nodes).map(|(m, &v)| nu(v) * m).collect();
    chi.micro(grid, &weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn grid() -> VelocityGrid {
        VelocityGrid::new(16)
    }

    #[test]
    fn gaussian_facts() {
        let g = grid();
        let m = |f: &dyn Fn([f64; 3]) -> f64| g.integrate(&g.sample(|v| f(v) * maxwellian(v)));
        assert!((m(&|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((m(&|v| v[1] * v[1]) - 1.0).abs() < 1e-12);
        assert!((m(&|v| v[0] * v[0] * v[2] * v[2]) - 1.0).abs() < 1e-12);
        assert!((m(&|v| v[2].powi(4)) - 3.0).abs() < 1e-12);
        assert!((m(&|v| v[0].powi(4) * v[1].powi(4)) - 9.0).abs() < 1e-11);
    }

    #[test]
    fn chi_orthonormal_and_projection_examples() {
        let g = grid();
        let chi = ChiTable::new(&g);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.inner(&chi.chi[i], &chi.chi[j]) - want).abs() < 1e-12);
            }
        }
        assert_eq!(chi_basis([1.0, 1.0, 1.0])[4], 0.0);
        let (m, _) = chi.project(&g, &chi.chi[0]);
        assert!((m.a - 1.0).abs() < 1e-12 && m.b.iter().all(|x| x.abs() < 1e-12) && m.c.abs() < 1e-12);
        let cube = g.sample(|v| v[0].powi(3) * maxwellian(v).sqrt());
        let (m, _) = chi.project(&g, &cube);
        assert!((m.b[0] - 3.0).abs() < 1e-12 && m.a.abs() < 1e-12 && m.c.abs() < 1e-12);
        let mixed = g.sample(|v| v[1] * v[1] * v[2] * maxwellian(v).sqrt());
        let (m, _) = chi.project(&g, &mixed);
        assert!((m.b[2] - 1.0).abs() < 1e-12 && m.b[0].abs() < 1e-12 && m.b[1].abs() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let g = grid();
        let chi = ChiTable::new(&g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f: Vec<f64> = g.sqrt_mu.iter().map(|s| s * (rng.gen::<f64>() - 0.5)).collect();
        let (_, pf) = chi.project(&g, &f);
        let (_, ppf) = chi.project(&g, &pf);
        for (a, b) in pf.iter().zip(&ppf) {
            assert!((a - b).abs() < 1e-12);
        }
        let micro = chi.micro(&g, &f);
        for k in 0..5 {
            assert!(g.inner(&micro, &chi.chi[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn burnett_properties() {
        let g = grid();
        let chi = ChiTable::new(&g);
        let a: Vec<([[f64; 3]; 3], [f64; 3])> = g.nodes.iter().map(|&v| burnett(v)).collect();
        for (m, _) in &a {
            assert!((m[0][0] + m[1][1] + m[2][2]).abs() < 1e-15);
        }
        for i in 0..3 {
            let bi: Vec<f64> = a.iter().map(|x| x.1[i]).collect();
            assert!(chi.moments(&g, &bi).as_array().iter().all(|x| x.abs() < 1e-12));
            for j in 0..3 {
                let aij: Vec<f64> = a.iter().map(|x| x.0[i][j]).collect();
                assert!(chi.moments(&g, &aij).as_array().iter().all(|x| x.abs() < 1e-12));
            }
        }
        let a12: Vec<f64> = a.iter().map(|x| x.0[0][1]).collect();
        let v1v2 = g.sample(|v| v[0] * v[1] * maxwellian(v).sqrt());
        assert!((g.inner(&a12, &v1v2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection() {
        assert_eq!(specular_reflect([1.0, 2.0, 3.0], [1.0, 0.0, 0.0]).unwrap(), [-1.0, 2.0, 3.0]);
        let n = [0.6, 0.0, 0.8];
        let v = [0.3, -1.2, 2.5];
        let r = specular_reflect(v, n).unwrap();
        let rr = specular_reflect(r, n).unwrap();
        for d in 0..3 {
            assert!((rr[d] - v[d]).abs() < 1e-15);
        }
        assert_eq!(specular_reflect([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]).unwrap(), [0.0, 1.0, 0.0]);
        assert!(specular_reflect(v, [1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn bgk_structure() {
        let g = VelocityGrid::new(10);
        let chi = ChiTable::new(&g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let f: Vec<f64> = g.sqrt_mu.iter().map(|s| s * (rng.gen::<f64>() - 0.5)).collect();
            let lf = bgk_apply(&g, &chi, &f);
            assert!(g.inner(&lf, &f) >= -1e-12);
            assert!(chi.moments(&g, &lf).as_array().iter().all(|x| x.abs() < 1e-12));
        }
        let z = bgk_apply(&g, &chi, &chi.chi[3]);
        assert!(z.iter().all(|x| x.abs() < 1e-12));
        let a11: Vec<f64> = g.nodes.iter().map(|&v| burnett(v).0[0][0]).collect();
        let l = bgk_apply(&g, &chi, &a11);
        for ((x, a), &v) in l.iter().zip(&a11).zip(&g.nodes) {
            assert!((x - nu(v) * a).abs() < 1e-12);
        }
    }
}
