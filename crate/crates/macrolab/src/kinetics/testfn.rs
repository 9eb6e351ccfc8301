// SPDX-License-Identifier: Apache-2.0

//! Test functions `ψ_a`, `ψ_b`, `ψ_c` built from elliptic solutions, their
//! transport identities and the boundary cancellation for `ψ_b`.

use super::{burnett, chi_basis, grid::maxwellian, ChiTable, VelocityGrid};
use crate::ellipticfem::{EllipticSystem, ScalarFieldFE, VectorFieldFE};
use crate::error::{MacrolabError, Result};
use rand::Rng;
use std::collections::BTreeMap;

/// Which test function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// `Σ ∂_iφ v_i(|v|²−10)√μ`.
    PsiA,
    /// `Σ ∂_jφ^i v_iv_j√μ − div φ √μ`.
    PsiB,
    /// `Σ ∂_iφ v_i(|v|²−5)√μ`.
    PsiC,
}

impl TestKind {
    /// The shift `s` in `v_i(|v|² − s)` for the scalar kinds.
    fn shift(self) -> f64 {
        match self {
            TestKind::PsiA => 10.0,
            TestKind::PsiC => 5.0,
            TestKind::PsiB => f64::NAN,
        }
    }
}

/// `ψ_b` at velocity `v` for the Jacobian `J[i][j] = ∂_jφ^i`.
pub fn psi_b(jac: &[[f64; 3]; 3], v: [f64; 3]) -> f64 {
    let s = maxwellian(v).sqrt();
    let mut q = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            q += jac[i][j] * v[i] * v[j];
        }
    }
    (q - (jac[0][0] + jac[1][1] + jac[2][2])) * s
}

/// `ψ_b` through the Burnett/`χ₄` expansion.
pub fn psi_b_expansion(jac: &[[f64; 3]; 3], v: [f64; 3]) -> f64 {
    let (a, _) = burnett(v);
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += jac[i][j] * a[i][j];
        }
    }
    s + (jac[0][0] + jac[1][1] + jac[2][2]) * chi_basis(v)[4] * 6f64.sqrt() / 3.0
}

/// `ψ_a` or `ψ_c` at `v` for the gradient `g = ∇φ`.
pub fn psi_scalar(kind: TestKind, g: &[f64; 3], v: [f64; 3]) -> f64 {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    (g[0] * v[0] + g[1] * v[1] + g[2] * v[2]) * (r2 - kind.shift()) * maxwellian(v).sqrt()
}

/// A test function with its underlying derivative data per mesh cell.
#[derive(Clone, Debug)]
pub struct TestFunctionField {
    pub kind: TestKind,
    /// `∇φ` per cell (kinds a and c).
    pub grads: Vec<[f64; 3]>,
    /// `J[i][j] = ∂_jφ^i` per cell (kind b).
    pub jacobians: Vec<[[f64; 3]; 3]>,
}

/// Velocity kernels for pairing test functions with distributions.
#[derive(Clone, Debug)]
pub struct TestKernels {
    /// `v_i(|v|²−10)√μ`.
    pub a: [Vec<f64>; 3],
    /// `v_i(|v|²−5)√μ`.
    pub c: [Vec<f64>; 3],
    /// `v_iv_j√μ`.
    pub vv: [[Vec<f64>; 3]; 3],
    /// `√μ`.
    pub s: Vec<f64>,
}

impl TestKernels {
    pub fn new(grid: &VelocityGrid) -> TestKernels {
        let s: Vec<f64> = grid.sqrt_mu.clone();
        let r2: Vec<f64> = grid.nodes.iter().map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).collect();
        let lin = |i: usize, shift: f64| -> Vec<f64> {
            grid.nodes.iter().zip(&r2).zip(&s).map(|((v, r), sm)| v[i] * (r - shift) * sm).collect()
        };
        TestKernels {
            a: std::array::from_fn(|i| lin(i, 10.0)),
            c: std::array::from_fn(|i| lin(i, 5.0)),
            vv: std::array::from_fn(|i| {
                std::array::from_fn(|j| grid.nodes.iter().zip(&s).map(|(v, sm)| v[i] * v[j] * sm).collect())
            }),
            s,
        }
    }
}

impl TestFunctionField {
    /// Scalar-potential test function from per-cell gradients.
    pub fn from_gradients(kind: TestKind, grads: Vec<[f64; 3]>) -> Result<Self> {
        if kind == TestKind::PsiB {
            return Err(MacrolabError::MissingData("psi_b needs a Jacobian per cell".into()));
        }
        Ok(TestFunctionField { kind, grads, jacobians: Vec::new() })
    }

    /// `ψ_b` from per-cell Jacobians.
    pub fn from_jacobians(jacobians: Vec<[[f64; 3]; 3]>) -> Self {
        TestFunctionField { kind: TestKind::PsiB, grads: Vec::new(), jacobians }
    }

    /// `ψ_a` or `ψ_c` from a nodal scalar solution (cellwise gradients).
    pub fn from_scalar_solution(kind: TestKind, sys: &EllipticSystem, phi: &ScalarFieldFE) -> Result<Self> {
        let grads = (0..sys.mesh.tets.len())
            .map(|t| {
                let (g, _) = &sys.asm.grads[t];
                let mut out = [0.0; 3];
                for (a, &v) in sys.mesh.tets[t].iter().enumerate() {
                    for d in 0..3 {
                        out[d] += phi.values[v] * g[a][d];
                    }
                }
                out
            })
            .collect();
        Self::from_gradients(kind, grads)
    }

    /// `ψ_b` from a nodal vector solution (cellwise Jacobians).
    pub fn from_vector_solution(sys: &EllipticSystem, u: &VectorFieldFE) -> Self {
        let jac = (0..sys.mesh.tets.len())
            .map(|t| {
                let (g, _) = &sys.asm.grads[t];
                let mut j = [[0.0; 3]; 3];
                for (a, &v) in sys.mesh.tets[t].iter().enumerate() {
                    for i in 0..3 {
                        for k in 0..3 {
                            j[i][k] += u.values[v][i] * g[a][k];
                        }
                    }
                }
                j
            })
            .collect();
        Self::from_jacobians(jac)
    }

    pub fn cells(&self) -> usize {
        match self.kind {
            TestKind::PsiB => self.jacobians.len(),
            _ => self.grads.len(),
        }
    }

    /// `ψ(cell, v)`.
    pub fn eval(&self, cell: usize, v: [f64; 3]) -> f64 {
        match self.kind {
            TestKind::PsiB => psi_b(&self.jacobians[cell], v),
            k => psi_scalar(k, &self.grads[cell], v),
        }
    }

    /// `∫ ψ(cell, v) f(v) dv` via precomputed kernels.
    pub fn pair(&self, cell: usize, grid: &VelocityGrid, k: &TestKernels, f: &[f64]) -> f64 {
        match self.kind {
            TestKind::PsiB => {
                let j = &self.jacobians[cell];
                let mut s = -(j[0][0] + j[1][1] + j[2][2]) * grid.inner(&k.s, f);
                for i in 0..3 {
                    for l in 0..3 {
                        if j[i][l] != 0.0 {
                            s += j[i][l] * grid.inner(&k.vv[i][l], f);
                        }
                    }
                }
                s
            }
            TestKind::PsiA => (0..3).map(|i| self.grads[cell][i] * grid.inner(&k.a[i], f)).sum(),
            TestKind::PsiC => (0..3).map(|i| self.grads[cell][i] * grid.inner(&k.c[i], f)).sum(),
        }
    }
}

/// Sparse polynomial in `x₁, x₂, x₃` with real coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly3 {
    pub terms: BTreeMap<[u8; 3], f64>,
}

impl Poly3 {
    pub fn monomial(e: [u8; 3], c: f64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(e, c);
        Poly3 { terms }
    }

    /// Random polynomial with every monomial of total degree ≤ `deg`.
    pub fn random(deg: u8, rng: &mut impl Rng) -> Self {
        let mut terms = BTreeMap::new();
        for a in 0..=deg {
            for b in 0..=deg - a {
                for c in 0..=deg - a - b {
                    terms.insert([a, b, c], rng.gen::<f64>() * 2.0 - 1.0);
                }
            }
        }
        Poly3 { terms }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn deriv(&self, axis: usize) -> Poly3 {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut f = *e;
                f[axis] -= 1;
                *terms.entry(f).or_insert(0.0) += c * e[axis] as f64;
            }
        }
        Poly3 { terms }
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|k| self.deriv(k).eval(x))
    }

    pub fn hessian(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.deriv(i).deriv(j).eval(x)))
    }
}

/// Largest nodal defect between `−v·∇ₓψ[φ]` evaluated directly and its
/// decomposition into a projected part and an `(I−P)` part, over the sample
/// points and every grid velocity. `phi` holds one polynomial for kinds a
/// and c and three components for kind b.
pub fn transport_identity_check(kind: TestKind, phi: &[Poly3], points: &[[f64; 3]], grid: &VelocityGrid) -> Result<f64> {
    let want = if kind == TestKind::PsiB { 3 } else { 1 };
    if phi.len() != want {
        return Err(MacrolabError::Dimension(format!("{kind:?} needs {want} polynomial components")));
    }
    let chi = ChiTable::new(grid);
    let r2: Vec<f64> = grid.nodes.iter().map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).collect();
    let mut worst = 0.0f64;
    for &x in points {
        let (lhs, rhs) = match kind {
            TestKind::PsiB => {
                // ∂_k∂_j φ^i
                let h: Vec<[[f64; 3]; 3]> = phi.iter().map(|p| p.hessian(x)).collect();
                let lhs: Vec<f64> = grid
                    .nodes
                    .iter()
                    .zip(&grid.sqrt_mu)
                    .map(|(v, s)| {
                        let mut t = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                for k in 0..3 {
                                    t -= h[i][k][j] * v[i] * v[j] * v[k];
                                }
                                t += v[j] * h[i][j][i];
                            }
                        }
                        t * s
                    })
                    .collect();
                let cubic: Vec<f64> = grid
                    .nodes
                    .iter()
                    .zip(&grid.sqrt_mu)
                    .map(|(v, s)| {
                        let mut t = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                for k in 0..3 {
                                    t += h[i][k][j] * v[i] * v[j] * v[k];
                                }
                            }
                        }
                        t * s
                    })
                    .collect();
                let micro = chi.micro(grid, &cubic);
                let coef: [f64; 3] = std::array::from_fn(|i| {
                    let lap = h[i][0][0] + h[i][1][1] + h[i][2][2];
                    let grad_div = h[0][i][0] + h[1][i][1] + h[2][i][2];
                    -(lap + grad_div)
                });
                let rhs: Vec<f64> = (0..grid.len())
                    .map(|n| -micro[n] + (0..3).map(|i| coef[i] * chi.chi[i + 1][n]).sum::<f64>())
                    .collect();
                (lhs, rhs)
            }
            k => {
                let h = phi[0].hessian(x);
                let shift = k.shift();
                let quad: Vec<f64> = grid
                    .nodes
                    .iter()
                    .zip(&r2)
                    .zip(&grid.sqrt_mu)
                    .map(|((v, r), s)| {
                        let mut t = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                t += h[i][j] * v[i] * v[j];
                            }
                        }
                        t * (r - shift) * s
                    })
                    .collect();
                let lhs: Vec<f64> = quad.iter().map(|q| -q).collect();
                let micro = chi.micro(grid, &quad);
                let lap = h[0][0] + h[1][1] + h[2][2];
                let rhs: Vec<f64> = (0..grid.len())
                    .map(|n| {
                        let projected = if k == TestKind::PsiA {
                            5.0 * lap * chi.chi[0][n]
                        } else {
                            -(5.0 * 6f64.sqrt() / 3.0) * lap * chi.chi[4][n]
                        };
                        projected - micro[n]
                    })
                    .collect();
                (lhs, rhs)
            }
        };
        for (a, b) in lhs.iter().zip(&rhs) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// One boundary sample: the owning cell, the outward unit normal and the
/// distribution at that boundary point.
#[derive(Clone, Debug)]
pub struct BoundarySample {
    pub cell: usize,
    pub normal: [f64; 3],
    pub f: Vec<f64>,
}

/// `max |∫ (n·v) ψ_b f dv|` over boundary samples.
pub fn boundary_vanish_check(psi: &TestFunctionField, samples: &[BoundarySample], grid: &VelocityGrid) -> Result<f64> {
    if psi.kind != TestKind::PsiB {
        return Err(MacrolabError::MissingData("boundary cancellation applies to psi_b".into()));
    }
    let mut worst = 0.0f64;
    for s in samples {
        let vals: Vec<f64> = grid
            .nodes
            .iter()
            .zip(&s.f)
            .map(|(&v, f)| (v[0] * s.normal[0] + v[1] * s.normal[1] + v[2] * s.normal[2]) * psi.eval(s.cell, v) * f)
            .collect();
        worst = worst.max(grid.integrate(&vals).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn psi_b_forms_agree() {
        let g = VelocityGrid::new(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let j: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen::<f64>() - 0.5));
            for &v in &g.nodes {
                assert!((psi_b(&j, v) - psi_b_expansion(&j, v)).abs() < 1e-12);
            }
        }
        assert_eq!(psi_b(&[[0.0; 3]; 3], [1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn psi_a_linear_potential_matches_burnett_form() {
        let grad = [0.3, -1.0, 2.0];
        for v in [[0.1, 0.2, 0.3], [1.5, -2.0, 0.7]] {
            let (_, b) = burnett(v);
            let chi = chi_basis(v);
            let want: f64 = (0..3).map(|i| grad[i] * (10f64.sqrt() * b[i] - 5.0 * chi[i + 1])).sum();
            assert!((psi_scalar(TestKind::PsiA, &grad, v) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn transport_identities_hold() {
        let g = VelocityGrid::new(12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<[f64; 3]> = (0..4).map(|_| std::array::from_fn(|_| rng.gen::<f64>() * 2.0 - 1.0)).collect();
        let lin = Poly3::random(1, &mut rng);
        for kind in [TestKind::PsiA, TestKind::PsiC] {
            assert!(transport_identity_check(kind, &[lin.clone()], &pts, &g).unwrap() < 1e-14);
            for deg in [3, 4] {
                let p = Poly3::random(deg, &mut rng);
                assert!(transport_identity_check(kind, &[p], &pts, &g).unwrap() < 1e-10);
            }
        }
        let x2 = vec![Poly3::monomial([2, 0, 0], 1.0), Poly3::default(), Poly3::default()];
        assert!(transport_identity_check(TestKind::PsiB, &x2, &pts, &g).unwrap() < 1e-10);
        let rnd: Vec<Poly3> = (0..3).map(|_| Poly3::random(4, &mut rng)).collect();
        assert!(transport_identity_check(TestKind::PsiB, &rnd, &pts, &g).unwrap() < 1e-10);
    }

    #[test]
    fn boundary_cancellation_on_flat_face() {
        let g = VelocityGrid::new(12);
        // Tangential traction on n = e1 vanishes iff ∂₂φ¹ + ∂₁φ² = 0 and ∂₃φ¹ + ∂₁φ³ = 0.
        let jac = [[0.7, 0.4, -0.2], [-0.4, 1.1, 0.5], [0.2, -0.3, 0.9]];
        let psi = TestFunctionField::from_jacobians(vec![jac]);
        let even = g.sample(|v| (1.0 + v[0] * v[0] + 0.3 * v[1] + v[1] * v[2]) * maxwellian(v).sqrt());
        let sample = BoundarySample { cell: 0, normal: [1.0, 0.0, 0.0], f: even };
        assert!(boundary_vanish_check(&psi, &[sample.clone()], &g).unwrap() < 1e-10);
        let odd = g.sample(|v| (v[0] + v[0] * v[1]) * maxwellian(v).sqrt());
        let bad = BoundarySample { f: odd, ..sample };
        assert!(boundary_vanish_check(&psi, &[bad], &g).unwrap() > 1e-3);
        let zero = TestFunctionField::from_jacobians(vec![[[0.0; 3]; 3]]);
        let s = BoundarySample { cell: 0, normal: [1.0, 0.0, 0.0], f: g.sqrt_mu.clone() };
        assert_eq!(boundary_vanish_check(&zero, &[s], &g).unwrap(), 0.0);
    }
}
