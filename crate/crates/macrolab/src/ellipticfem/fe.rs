// SPDX-License-Identifier: Apache-2.0

//! Piecewise-linear finite elements on tetrahedra: element gradients,
//! assembled stiffness and mass matrices, and the slip-constrained
//! reduced space.

use super::linalg::{BlockCsr, LinOp, Pattern, ScalarCsr};
use super::mesh::{cross, dot, normalize, Mesh};
use nalgebra::Matrix3;
use rayon::prelude::*;
use std::sync::Arc;

/// Nodal vector field (one 3-vector per mesh vertex).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldFE {
    pub values: Vec<[f64; 3]>,
}

/// Nodal scalar field (one value per mesh vertex).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFieldFE {
    pub values: Vec<f64>,
}

impl VectorFieldFE {
    pub fn zeros(nv: usize) -> Self {
        VectorFieldFE { values: vec![[0.0; 3]; nv] }
    }

    /// Samples `f` at every vertex of `mesh`.
    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        VectorFieldFE { values: mesh.vertices.iter().map(|&x| f(x)).collect() }
    }

    /// Vertex-major flat view.
    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_flat(x: &[f64]) -> Self {
        VectorFieldFE { values: x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|x| x.is_finite()))
    }
}

impl ScalarFieldFE {
    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 3]) -> f64) -> Self {
        ScalarFieldFE { values: mesh.vertices.iter().map(|&x| f(x)).collect() }
    }
}

/// Gradients of the four barycentric coordinates and the volume of a tetrahedron.
pub fn element_gradients(p: &[[f64; 3]; 4]) -> ([[f64; 3]; 4], f64) {
    let e = Matrix3::from_fn(|r, c| p[c + 1][r] - p[0][r]);
    let vol = e.determinant() / 6.0;
    let inv = e.try_inverse().expect("non-degenerate tetrahedron");
    let mut g = [[0.0; 3]; 4];
    for k in 0..3 {
        g[k + 1] = [inv[(k, 0)], inv[(k, 1)], inv[(k, 2)]];
    }
    g[0] = [-(g[1][0] + g[2][0] + g[3][0]), -(g[1][1] + g[2][1] + g[3][1]), -(g[1][2] + g[2][2] + g[3][2])];
    (g, vol)
}

/// Assembled matrices of a mesh.
pub struct Assembly {
    pub pattern: Arc<Pattern>,
    /// `∫ ∇^sym u : ∇^sym w`.
    pub k_sym: BlockCsr,
    /// `∫ ∇u : ∇w`.
    pub k_grad: BlockCsr,
    /// Consistent vector mass matrix.
    pub mass: BlockCsr,
    /// Scalar stiffness `∫ ∇φ·∇ψ`.
    pub stiff: ScalarCsr,
    /// Scalar consistent mass.
    pub smass: ScalarCsr,
    /// Element barycentric gradients and volumes.
    pub grads: Vec<([[f64; 3]; 4], f64)>,
}

struct Local {
    ksym: [[[[f64; 3]; 3]; 4]; 4],
    stiff: [[f64; 4]; 4],
}

impl Assembly {
    /// Assembles every operator; element work is parallel, accumulation is sequential.
    pub fn new(mesh: &Mesh) -> Assembly {
        let nv = mesh.vertices.len();
        let pattern = Arc::new(Pattern::from_tets(nv, &mesh.tets));
        let grads: Vec<([[f64; 3]; 4], f64)> =
            (0..mesh.tets.len()).into_par_iter().map(|t| element_gradients(&mesh.tet_points(t))).collect();
        let locals: Vec<Local> = grads
            .par_iter()
            .map(|(g, vol)| {
                let mut ksym = [[[[0.0; 3]; 3]; 4]; 4];
                let mut stiff = [[0.0; 4]; 4];
                for a in 0..4 {
                    for b in 0..4 {
                        let gg = dot(g[a], g[b]);
                        stiff[a][b] = vol * gg;
                        for i in 0..3 {
                            for j in 0..3 {
                                let delta = if i == j { gg } else { 0.0 };
                                ksym[a][b][i][j] = 0.5 * vol * (delta + g[b][i] * g[a][j]);
                            }
                        }
                    }
                }
                Local { ksym, stiff }
            })
            .collect();
        let nnz = pattern.indices.len();
        let mut ks = vec![[[0.0; 3]; 3]; nnz];
        let mut kg = vec![[[0.0; 3]; 3]; nnz];
        let mut mm = vec![[[0.0; 3]; 3]; nnz];
        let mut st = vec![0.0; nnz];
        let mut sm = vec![0.0; nnz];
        for (t, tet) in mesh.tets.iter().enumerate() {
            let vol = grads[t].1;
            let loc = &locals[t];
            for a in 0..4 {
                for b in 0..4 {
                    let s = pattern.slot(tet[a], tet[b]);
                    let m = vol / 20.0 * if a == b { 2.0 } else { 1.0 };
                    st[s] += loc.stiff[a][b];
                    sm[s] += m;
                    for i in 0..3 {
                        kg[s][i][i] += loc.stiff[a][b];
                        mm[s][i][i] += m;
                        for j in 0..3 {
                            ks[s][i][j] += loc.ksym[a][b][i][j];
                        }
                    }
                }
            }
        }
        Assembly {
            k_sym: BlockCsr { pattern: pattern.clone(), blocks: ks },
            k_grad: BlockCsr { pattern: pattern.clone(), blocks: kg },
            mass: BlockCsr { pattern: pattern.clone(), blocks: mm },
            stiff: ScalarCsr { pattern: pattern.clone(), data: st },
            smass: ScalarCsr { pattern: pattern.clone(), data: sm },
            pattern,
            grads,
        }
    }

    /// `L²` inner product of two nodal vector fields.
    pub fn l2_inner(&self, u: &VectorFieldFE, w: &VectorFieldFE) -> f64 {
        self.mass.form(&u.flat(), &w.flat())
    }

    /// Squared `H¹` norm `‖∇u‖² + ‖u‖²`.
    pub fn h1_sq(&self, u: &VectorFieldFE) -> f64 {
        let x = u.flat();
        self.k_grad.form(&x, &x) + self.mass.form(&x, &x)
    }

    /// `‖∇^sym u‖²`.
    pub fn sym_energy(&self, u: &VectorFieldFE) -> f64 {
        let x = u.flat();
        self.k_sym.form(&x, &x)
    }

    /// Symmetric gradient of `u` on tetrahedron `t`.
    pub fn sym_grad(&self, mesh: &Mesh, u: &VectorFieldFE, t: usize) -> [[f64; 3]; 3] {
        let (g, _) = &self.grads[t];
        let mut du = [[0.0; 3]; 3];
        for (a, &v) in mesh.tets[t].iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    du[i][j] += u.values[v][i] * g[a][j];
                }
            }
        }
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = 0.5 * (du[i][j] + du[j][i]);
            }
        }
        s
    }
}

/// Orthonormal tangent pair for a unit normal.
pub fn tangent_frame(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let t1 = normalize(cross(n, helper));
    let t2 = cross(n, t1);
    (t1, t2)
}

/// Slip-constrained space: three unknowns per interior vertex and two
/// tangential unknowns per boundary vertex.
#[derive(Clone, Debug)]
pub struct SlipSpace {
    pub offset: Vec<usize>,
    /// Tangent frames at boundary vertices.
    pub frames: Vec<Option<([f64; 3], [f64; 3])>>,
    pub dim: usize,
}

impl SlipSpace {
    pub fn new(mesh: &Mesh) -> SlipSpace {
        let mut offset = Vec::with_capacity(mesh.vertices.len());
        let mut frames = Vec::with_capacity(mesh.vertices.len());
        let mut dim = 0;
        for n in &mesh.vertex_normals {
            offset.push(dim);
            match n {
                Some(n) => {
                    frames.push(Some(tangent_frame(*n)));
                    dim += 2;
                }
                None => {
                    frames.push(None);
                    dim += 3;
                }
            }
        }
        SlipSpace { offset, frames, dim }
    }

    /// Reduced coordinates to a full vertex-major vector.
    pub fn prolong(&self, xr: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 3 * self.offset.len()];
        out.par_chunks_mut(3).enumerate().for_each(|(v, o)| {
            let k = self.offset[v];
            match &self.frames[v] {
                Some((t1, t2)) => {
                    for d in 0..3 {
                        o[d] = xr[k] * t1[d] + xr[k + 1] * t2[d];
                    }
                }
                None => o.copy_from_slice(&xr[k..k + 3]),
            }
        });
        out
    }

    /// Adjoint of [`SlipSpace::prolong`].
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (v, fr) in self.frames.iter().enumerate() {
            let k = self.offset[v];
            let xv = [x[3 * v], x[3 * v + 1], x[3 * v + 2]];
            match fr {
                Some((t1, t2)) => {
                    out[k] = dot(xv, *t1);
                    out[k + 1] = dot(xv, *t2);
                }
                None => out[k..k + 3].copy_from_slice(&xv),
            }
        }
        out
    }
}

/// `Pᵀ A P` applied matrix-free.
pub struct Reduced<'a> {
    pub a: &'a BlockCsr,
    pub space: &'a SlipSpace,
    pub shift: Option<&'a BlockCsr>,
}

impl LinOp for Reduced<'_> {
    fn dim(&self) -> usize {
        self.space.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let full = self.space.prolong(x);
        let mut ax = vec![0.0; full.len()];
        self.a.matvec(&full, &mut ax);
        if let Some(s) = self.shift {
            let mut sx = vec![0.0; full.len()];
            s.matvec(&full, &mut sx);
            ax.iter_mut().zip(sx).for_each(|(p, q)| *p += q);
        }
        y.copy_from_slice(&self.space.restrict(&ax));
    }

    fn diagonal(&self) -> Vec<f64> {
        let p = &self.a.pattern;
        let mut d = vec![0.0; self.space.dim];
        for (v, fr) in self.space.frames.iter().enumerate() {
            let mut b = self.a.blocks[p.slot(v, v)];
            if let Some(s) = self.shift {
                let sb = s.blocks[p.slot(v, v)];
                for i in 0..3 {
                    for j in 0..3 {
                        b[i][j] += sb[i][j];
                    }
                }
            }
            let k = self.space.offset[v];
            let quad = |t: [f64; 3]| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += t[i] * b[i][j] * t[j];
                    }
                }
                s
            };
            match fr {
                Some((t1, t2)) => {
                    d[k] = quad(*t1);
                    d[k + 1] = quad(*t2);
                }
                None => {
                    for i in 0..3 {
                        d[k + i] = b[i][i];
                    }
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::super::mesh::{gen_mesh, Shape};
    use super::*;

    #[test]
    fn stiffness_annihilates_rigid_motions_and_integrates_linear_fields() {
        let m = gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 0).unwrap();
        let asm = Assembly::new(&m);
        let rot = VectorFieldFE::from_fn(&m, |x| [-x[1] + 0.3 * x[2], x[0], -0.3 * x[0]]);
        assert!(asm.sym_energy(&rot).abs() < 1e-12);
        let lin = VectorFieldFE::from_fn(&m, |x| [x[0], 0.0, 0.0]);
        // ∇^sym has one unit entry, so the energy equals the volume.
        assert!((asm.sym_energy(&lin) - m.total_volume()).abs() < 1e-12);
        let one = VectorFieldFE::from_fn(&m, |_| [1.0, 0.0, 0.0]);
        assert!((asm.l2_inner(&one, &one) - m.total_volume()).abs() < 1e-12);
    }

    #[test]
    fn prolong_and_restrict_are_adjoint() {
        let m = gen_mesh(Shape::Ball, 0).unwrap();
        let sp = SlipSpace::new(&m);
        let xr: Vec<f64> = (0..sp.dim).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..3 * m.vertices.len()).map(|i| (i as f64 * 0.11).cos()).collect();
        let lhs = super::super::linalg::dot(&sp.prolong(&xr), &y);
        let rhs = super::super::linalg::dot(&xr, &sp.restrict(&y));
        assert!((lhs - rhs).abs() < 1e-12);
        let full = sp.prolong(&xr);
        for v in m.boundary_vertices() {
            let n = m.vertex_normals[v].unwrap();
            assert!(dot([full[3 * v], full[3 * v + 1], full[3 * v + 2]], n).abs() < 1e-15);
        }
    }
}
