// SPDX-License-Identifier: Apache-2.0

//! Finite-element solvers for the symmetric Poisson system with slip and
//! tangential-traction-free boundary conditions, the scalar Neumann
//! problem, rigid-mode detection, compatibility projection and the
//! discrete Korn constant.

pub mod fe;
pub mod linalg;
pub mod mesh;

pub use fe::{Assembly, ScalarFieldFE, SlipSpace, VectorFieldFE};
pub use mesh::{gen_mesh, BoundaryFace, Mesh, ReferenceGrid, Shape};

use crate::error::{MacrolabError, Result};
use fe::Reduced;
use linalg::{dot as vdot, gram_schmidt, lowest_eigenvalue, pcg, CgOutcome, Constraint, InnerSolve};
use mesh::{cross, dot};
use nalgebra::{Matrix3, SymmetricEigen};
use serde::Serialize;

/// Relative boundary normal residual below which a rotation counts as a rigid mode.
pub const RIGID_THRESHOLD: f64 = 1e-6;
/// Relative residual target of every linear solve.
pub const SOLVER_TOL: f64 = 1e-10;
/// Relative eigen-residual target of the Korn and Poincaré eigensolves.
pub const EIG_TOL: f64 = 1e-7;
/// Relative size of `∫R·h` tolerated by the symmetric solver.
pub const COMPAT_TOL: f64 = 1e-8;

/// Orthonormal basis of the rotations tangent to the boundary.
#[derive(Clone, Debug)]
pub struct RigidModeBasis {
    /// Number of modes (0 to 3).
    pub dim: usize,
    /// Angular velocities `ω` with `R(x) = ω × x`.
    pub omegas: Vec<[f64; 3]>,
    /// Nodal fields, orthonormal in `L²`.
    pub fields: Vec<VectorFieldFE>,
    /// Relative boundary normal residual of all three candidate directions, ascending.
    pub residuals: [f64; 3],
}

impl RigidModeBasis {
    pub fn is_axisymmetric(&self) -> bool {
        self.dim >= 1
    }
}

/// A mesh with its assembled operators and slip space.
pub struct EllipticSystem {
    pub mesh: Mesh,
    pub asm: Assembly,
    pub space: SlipSpace,
}

/// Diagnostics of a symmetric Poisson solution.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// `‖Pᵀ(K u − M ĥ)‖ / ‖Pᵀ M ĥ‖` over the slip space.
    pub interior_residual: f64,
    /// `max |u·n|` over boundary vertices.
    pub max_slip: f64,
    /// `L²(∂Ω)` norm of the tangential traction `(∇^sym u)n − ((∇^sym u):n⊗n)n`.
    pub traction_residual: f64,
    /// `∫|∇^sym u|²`.
    pub energy: f64,
    /// `∫ĥ·u`.
    pub work: f64,
}

impl EllipticSystem {
    pub fn new(mesh: Mesh) -> EllipticSystem {
        let asm = Assembly::new(&mesh);
        let space = SlipSpace::new(&mesh);
        EllipticSystem { mesh, asm, space }
    }

    fn mass_times(&self, u: &VectorFieldFE) -> Vec<f64> {
        let x = u.flat();
        let mut y = vec![0.0; x.len()];
        self.asm.mass.matvec(&x, &mut y);
        y
    }

    /// Detects the rotations `ω × x` whose normal component vanishes on the boundary.
    pub fn rigid_basis(&self) -> RigidModeBasis {
        let mesh = &self.mesh;
        // Boundary quadrature weight per vertex: a third of the adjacent face areas.
        let mut w = vec![0.0; mesh.vertices.len()];
        for k in 0..mesh.boundary_faces.len() {
            let a = mesh.face_area(k) / 3.0;
            for &v in &mesh.boundary_faces[k].verts {
                w[v] += a;
            }
        }
        // (ω×x)·n = ω·(x×n): boundary energy ωᵀGω.
        let mut g = Matrix3::<f64>::zeros();
        for v in mesh.boundary_vertices() {
            let c = cross(mesh.vertices[v], mesh.vertex_normals[v].unwrap());
            for i in 0..3 {
                for j in 0..3 {
                    g[(i, j)] += w[v] * c[i] * c[j];
                }
            }
        }
        // L² Gram matrix of the unit rotations.
        let unit: Vec<VectorFieldFE> = (0..3)
            .map(|k| {
                let mut e = [0.0; 3];
                e[k] = 1.0;
                VectorFieldFE::from_fn(mesh, |x| cross(e, x))
            })
            .collect();
        let mut j = Matrix3::<f64>::zeros();
        for a in 0..3 {
            let ma = self.mass_times(&unit[a]);
            for b in 0..3 {
                j[(a, b)] = vdot(&ma, &unit[b].flat());
            }
        }
        let l = j.cholesky().expect("inertia matrix is definite").l();
        let linv = l.try_inverse().expect("invertible");
        let c = linv * g * linv.transpose();
        let eig = SymmetricEigen::new((c + c.transpose()) * 0.5);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
        // Each candidate ω has ωᵀJω = 1; evaluate its residual directly rather
        // than through the eigenvalue, whose rounding noise is ~1e−16 absolute.
        let cands: Vec<[f64; 3]> = order
            .iter()
            .map(|&i| {
                let om = linv.transpose() * eig.eigenvectors.column(i);
                [om[0], om[1], om[2]]
            })
            .collect();
        let residuals = [0, 1, 2].map(|k| {
            let om = nalgebra::Vector3::from(cands[k]);
            (om.transpose() * g * om)[0].max(0.0).sqrt()
        });
        let mut omegas = Vec::new();
        let mut fields = Vec::new();
        for (slot, &om) in cands.iter().enumerate() {
            if residuals[slot] >= RIGID_THRESHOLD {
                continue;
            }
            fields.push(VectorFieldFE::from_fn(mesh, |x| cross(om, x)));
            omegas.push(om);
        }
        RigidModeBasis { dim: omegas.len(), omegas, fields, residuals }
    }

    /// `ĥ = h − Σ (∫Rᵢ·h / ∫|Rᵢ|²) Rᵢ`.
    pub fn compatibility_project(&self, h: &VectorFieldFE, basis: &RigidModeBasis) -> VectorFieldFE {
        let mut out = h.clone();
        for r in &basis.fields {
            let mr = self.mass_times(r);
            let bi = vdot(&mr, &h.flat());
            let mi = vdot(&mr, &r.flat());
            for (o, rv) in out.values.iter_mut().zip(&r.values) {
                for d in 0..3 {
                    o[d] -= bi / mi * rv[d];
                }
            }
        }
        out
    }

    fn reduced_kernel(&self, basis: &RigidModeBasis) -> Vec<Vec<f64>> {
        let rs: Vec<Vec<f64>> = basis.fields.iter().map(|r| self.space.restrict(&r.flat())).collect();
        gram_schmidt(&rs)
    }

    fn remove_rigid(&self, u: &mut VectorFieldFE, basis: &RigidModeBasis) {
        for r in &basis.fields {
            let c = vdot(&self.mass_times(r), &u.flat()) / self.asm.l2_inner(r, r);
            for (o, rv) in u.values.iter_mut().zip(&r.values) {
                for d in 0..3 {
                    o[d] -= c * rv[d];
                }
            }
        }
    }

    /// Solves `−div(∇^sym u) = h` with slip and traction-free conditions,
    /// `u` orthogonal to the rigid modes.
    pub fn solve_sym_poisson(&self, h: &VectorFieldFE, basis: &RigidModeBasis) -> Result<(VectorFieldFE, CgOutcome)> {
        let hn = self.asm.l2_inner(h, h).sqrt();
        for r in &basis.fields {
            let b = self.asm.l2_inner(r, h) / self.asm.l2_inner(r, r).sqrt();
            if b.abs() > COMPAT_TOL * hn.max(f64::MIN_POSITIVE) {
                return Err(MacrolabError::Incompatible(b.abs()));
            }
        }
        let f = self.space.restrict(&self.mass_times(h));
        let op = Reduced { a: &self.asm.k_sym, space: &self.space, shift: None };
        let kernel = self.reduced_kernel(basis);
        let mut x = vec![0.0; self.space.dim];
        let out = pcg(&op, &f, &mut x, &kernel, SOLVER_TOL, 20 * self.space.dim + 1000)?;
        let mut u = VectorFieldFE::from_flat(&self.space.prolong(&x));
        self.remove_rigid(&mut u, basis);
        Ok((u, out))
    }

    /// Mass-weighted mean of a scalar field.
    pub fn mean(&self, h: &ScalarFieldFE) -> f64 {
        let mut mh = vec![0.0; h.values.len()];
        self.asm.smass.matvec(&h.values, &mut mh);
        mh.iter().sum::<f64>() / self.mesh.total_volume()
    }

    /// Mean-zero solution of `−Δφ = h − mean(h)` with `∂φ/∂n = 0`.
    pub fn solve_neumann_poisson(&self, h: &ScalarFieldFE) -> Result<(ScalarFieldFE, CgOutcome)> {
        let n = h.values.len();
        let mean = self.mean(h);
        let centered: Vec<f64> = h.values.iter().map(|x| x - mean).collect();
        let mut f = vec![0.0; n];
        self.asm.smass.matvec(&centered, &mut f);
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let mut x = vec![0.0; n];
        let out = pcg(&self.asm.stiff, &f, &mut x, &[ones], SOLVER_TOL, 20 * n + 1000)?;
        let mut phi = ScalarFieldFE { values: x };
        let m = self.mean(&phi);
        phi.values.iter_mut().for_each(|p| *p -= m);
        Ok((phi, out))
    }

    /// Smallest `‖∇^sym u‖² / ‖u‖²_{H¹}` over slip fields `L²`-orthogonal to the rigid modes.
    pub fn korn_constant(&self, basis: &RigidModeBasis) -> Result<f64> {
        let a = Reduced { a: &self.asm.k_sym, space: &self.space, shift: None };
        let b = Reduced { a: &self.asm.k_grad, space: &self.space, shift: Some(&self.asm.mass) };
        // Constraint Cᵀx = 0 with C = PᵀMR and right inverse the reduced rigid fields.
        let mut rs = Vec::new();
        let mut cs = Vec::new();
        for r in &basis.fields {
            let nr = self.asm.l2_inner(r, r).sqrt();
            let rn: Vec<f64> = r.flat().iter().map(|x| x / nr).collect();
            let mut mr = vec![0.0; rn.len()];
            self.asm.mass.matvec(&rn, &mut mr);
            rs.push(self.space.restrict(&rn));
            cs.push(self.space.restrict(&mr));
        }
        let constraint = (!rs.is_empty()).then(|| Constraint { c: &cs, r: &rs });
        // B is spectrally equivalent to A on the constrained space, so an
        // approximate B⁻¹ is an effective preconditioner.
        let pre = InnerSolve::new(&b, 1e-1, 500);
        let k = lowest_eigenvalue(&a, &b, constraint, Some(&pre), 4, 7, EIG_TOL, 2_000)?;
        if !(k > 0.0) {
            return Err(MacrolabError::NoConvergence { what: "Korn constant not positive".into(), residual: k });
        }
        Ok(k)
    }

    /// Largest `‖u‖_{L²} / ‖∇u‖_{L²}` over slip fields.
    pub fn poincare_ratio(&self) -> Result<f64> {
        let a = Reduced { a: &self.asm.k_grad, space: &self.space, shift: None };
        let b = Reduced { a: &self.asm.mass, space: &self.space, shift: None };
        let pre = InnerSolve::new(&a, 1e-1, 500);
        let lam = lowest_eigenvalue(&a, &b, None, Some(&pre), 3, 11, EIG_TOL, 2_000)?;
        Ok(1.0 / lam.sqrt())
    }

    /// `‖∇^sym u‖² / ‖u‖²_{H¹}` at a trial field.
    pub fn rayleigh_quotient(&self, u: &VectorFieldFE) -> f64 {
        self.asm.sym_energy(u) / self.asm.h1_sq(u)
    }

    /// Projects a field onto the slip space and removes rigid components.
    pub fn admissible(&self, u: &VectorFieldFE, basis: &RigidModeBasis) -> VectorFieldFE {
        let mut w = VectorFieldFE::from_flat(&self.space.prolong(&self.space.restrict(&u.flat())));
        self.remove_rigid(&mut w, basis);
        w
    }

    /// Residual diagnostics of a symmetric Poisson solution `u` for source `ĥ`.
    pub fn residual_report(&self, u: &VectorFieldFE, h: &VectorFieldFE) -> ResidualReport {
        let x = u.flat();
        let mut ku = vec![0.0; x.len()];
        self.asm.k_sym.matvec(&x, &mut ku);
        let mh = self.mass_times(h);
        let res: Vec<f64> = ku.iter().zip(&mh).map(|(a, b)| a - b).collect();
        let rr = self.space.restrict(&res);
        let rf = self.space.restrict(&mh);
        let fnorm = linalg::norm(&rf);
        let interior_residual = if fnorm > 0.0 { linalg::norm(&rr) / fnorm } else { linalg::norm(&rr) };
        let max_slip = self
            .mesh
            .boundary_vertices()
            .iter()
            .map(|&v| dot(u.values[v], self.mesh.vertex_normals[v].unwrap()).abs())
            .fold(0.0, f64::max);
        let mut tr = 0.0;
        for (k, f) in self.mesh.boundary_faces.iter().enumerate() {
            let s = self.asm.sym_grad(&self.mesh, u, f.tet);
            let n = f.normal;
            let sn = [dot(s[0], n), dot(s[1], n), dot(s[2], n)];
            let nn = dot(sn, n);
            let t = [sn[0] - nn * n[0], sn[1] - nn * n[1], sn[2] - nn * n[2]];
            tr += self.mesh.face_area(k) * dot(t, t);
        }
        ResidualReport {
            interior_residual,
            max_slip,
            traction_residual: tr.sqrt(),
            energy: self.asm.sym_energy(u),
            work: vdot(&mh, &x),
        }
    }
}

/// Evaluates a nodal field of a coarser generated mesh at the vertices of a
/// finer one by physical barycentric interpolation.
///
/// The reference grid narrows the search to the tetrahedra of the 27
/// sub-cubes around the fine vertex's reference position; the containing
/// tetrahedron (or, outside the coarse polyhedron, the one with the largest
/// minimum barycentric coordinate) supplies the weights.
pub fn transfer<const D: usize>(coarse: &Mesh, values: &[[f64; D]], fine: &Mesh) -> Result<Vec<[f64; D]>> {
    let (cr, fr) = match (&coarse.reference, &fine.reference) {
        (Some(c), Some(f)) => (c, f),
        _ => return Err(MacrolabError::Mesh("level transfer needs generated meshes".into())),
    };
    let n = cr.n;
    let inverses: Vec<(Matrix3<f64>, [f64; 3])> = (0..coarse.tets.len())
        .map(|t| {
            let p = coarse.tet_points(t);
            let e = Matrix3::from_fn(|r, c| p[c + 1][r] - p[0][r]);
            (e.try_inverse().expect("non-degenerate tetrahedron"), p[0])
        })
        .collect();
    let out = fr
        .coords
        .iter()
        .zip(&fine.vertices)
        .map(|(q, &x)| {
            let cell = q.map(|z| (((z + 1.0) * 0.5 * n as f64).floor() as isize).clamp(0, n as isize - 1));
            let mut best = (f64::NEG_INFINITY, 0usize, [0.0; 4]);
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    for dk in -1..=1isize {
                        let (i, j, k) = (cell[0] + di, cell[1] + dj, cell[2] + dk);
                        if [i, j, k].iter().any(|&c| c < 0 || c >= n as isize) {
                            continue;
                        }
                        let base = ((i as usize * n + j as usize) * n + k as usize) * 6;
                        for t in base..base + 6 {
                            let (inv, p0) = &inverses[t];
                            let l = inv * nalgebra::Vector3::new(x[0] - p0[0], x[1] - p0[1], x[2] - p0[2]);
                            let w = [1.0 - l[0] - l[1] - l[2], l[0], l[1], l[2]];
                            let m = w.iter().copied().fold(f64::INFINITY, f64::min);
                            if m > best.0 {
                                best = (m, t, w);
                            }
                        }
                    }
                }
            }
            let (_, t, w) = best;
            let mut o = [0.0; D];
            for (a, &vtx) in coarse.tets[t].iter().enumerate() {
                for d in 0..D {
                    o[d] += w[a] * values[vtx][d];
                }
            }
            o
        })
        .collect();
    Ok(out)
}

/// Convenience wrappers over [`EllipticSystem`].
pub fn rigid_basis(mesh: &Mesh) -> RigidModeBasis {
    EllipticSystem::new(mesh.clone()).rigid_basis()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth_h(x: [f64; 3]) -> [f64; 3] {
        [x[1] * x[1] + x[2], (x[0] * x[2]).sin(), x[0] * x[0] - x[1]]
    }

    #[test]
    fn rigid_classification() {
        let cases = [
            (Shape::Ball, 3),
            (Shape::Spheroid { a: 1.0, c: 1.5 }, 1),
            (Shape::Ellipsoid { a: 1.0, b: 1.3, c: 1.7 }, 0),
        ];
        for (shape, dim) in cases {
            let sys = EllipticSystem::new(gen_mesh(shape, 0).unwrap());
            let b = sys.rigid_basis();
            assert_eq!(b.dim, dim, "{shape:?} residuals {:?}", b.residuals);
            for (i, r) in b.fields.iter().enumerate() {
                for (j, s) in b.fields.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((sys.asm.l2_inner(r, s) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spheroid_mode_is_axial_rotation() {
        let sys = EllipticSystem::new(gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 0).unwrap());
        let b = sys.rigid_basis();
        let om = b.omegas[0];
        assert!(om[0].abs() < 1e-10 && om[1].abs() < 1e-10 && om[2].abs() > 0.1);
        assert!(b.residuals[0] < 1e-10);
    }

    #[test]
    fn projection_properties() {
        let sys = EllipticSystem::new(gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 0).unwrap());
        let b = sys.rigid_basis();
        let h = VectorFieldFE::from_fn(&sys.mesh, smooth_h);
        let hp = sys.compatibility_project(&h, &b);
        let hn = sys.asm.l2_inner(&h, &h).sqrt();
        assert!(sys.asm.l2_inner(&b.fields[0], &hp).abs() < 1e-12 * hn);
        let twice = sys.compatibility_project(&hp, &b);
        for (p, q) in twice.values.iter().zip(&hp.values) {
            for d in 0..3 {
                assert!((p[d] - q[d]).abs() < 1e-13);
            }
        }
        let r = sys.compatibility_project(&b.fields[0], &b);
        assert!(r.values.iter().all(|v| v.iter().all(|x| x.abs() < 1e-13)));
    }

    #[test]
    fn sym_poisson_basic_properties() {
        let sys = EllipticSystem::new(gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 1).unwrap());
        let b = sys.rigid_basis();
        let zero = VectorFieldFE::zeros(sys.mesh.vertices.len());
        let (u0, _) = sys.solve_sym_poisson(&zero, &b).unwrap();
        assert!(u0.values.iter().all(|v| v == &[0.0; 3]));
        assert!(matches!(sys.solve_sym_poisson(&b.fields[0], &b), Err(MacrolabError::Incompatible(_))));
        let h = sys.compatibility_project(&VectorFieldFE::from_fn(&sys.mesh, smooth_h), &b);
        let (u, _) = sys.solve_sym_poisson(&h, &b).unwrap();
        let rep = sys.residual_report(&u, &h);
        assert!((rep.energy - rep.work).abs() <= 1e-8 * rep.energy);
        assert!(rep.max_slip < 1e-10);
        assert!(rep.interior_residual < 1e-9);
        let (u2, _) = sys.solve_sym_poisson(&h, &b).unwrap();
        assert_eq!(u, u2);
    }

    #[test]
    fn neumann_constant_source_and_mean() {
        let sys = EllipticSystem::new(gen_mesh(Shape::Ball, 1).unwrap());
        let (phi, _) = sys.solve_neumann_poisson(&ScalarFieldFE { values: vec![3.0; sys.mesh.vertices.len()] }).unwrap();
        assert!(phi.values.iter().all(|p| p.abs() < 1e-12));
        let h = ScalarFieldFE::from_fn(&sys.mesh, |x| 12.0 - 20.0 * dot(x, x));
        let (phi, _) = sys.solve_neumann_poisson(&h).unwrap();
        assert!(sys.mean(&phi).abs() < 1e-12);
    }

    #[test]
    fn korn_positive_minimal_and_rotation_invariant() {
        let sys = EllipticSystem::new(gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 0).unwrap());
        let b = sys.rigid_basis();
        let k = sys.korn_constant(&b).unwrap();
        assert!(k > 0.0 && k < 1.0);
        for s in 0..5 {
            let trial = sys.admissible(
                &VectorFieldFE::from_fn(&sys.mesh, |x| [(x[1] + s as f64).sin(), x[0] * x[2], (x[2] * s as f64).cos()]),
                &b,
            );
            assert!(sys.rayleigh_quotient(&trial) >= k * (1.0 - 1e-12));
        }
        let (c, s) = (0.6f64, 0.8f64);
        let rot = mul3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]);
        let sys2 = EllipticSystem::new(sys.mesh.rotated(rot));
        let b2 = sys2.rigid_basis();
        assert_eq!(b2.dim, 1);
        let k2 = sys2.korn_constant(&b2).unwrap();
        assert!((k - k2).abs() <= 1e-10 * k, "{k} {k2}");
    }

    fn mul3(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    #[test]
    fn transfer_is_exact_for_linear_fields_inside_the_coarse_mesh() {
        let c = gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 0).unwrap();
        let f = gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 1).unwrap();
        let lin = |x: [f64; 3]| x[0] + 2.0 * x[1] - x[2];
        let vals: Vec<[f64; 1]> = c.vertices.iter().map(|&x| [lin(x)]).collect();
        let out = transfer(&c, &vals, &f).unwrap();
        for (x, o) in f.vertices.iter().zip(&out) {
            assert!((o[0] - lin(*x)).abs() < 1e-12);
        }
    }
}
