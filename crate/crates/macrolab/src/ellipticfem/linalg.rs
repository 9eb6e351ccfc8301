// SPDX-License-Identifier: Apache-2.0

//! Sparse storage, deterministic parallel reductions, preconditioned
//! conjugate gradients with deflation, and a block eigensolver for the
//! smallest generalized eigenvalue.

use crate::error::{MacrolabError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Dot product with a fixed chunked reduction order (thread-count independent).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Symmetric linear operator on `R^n`.
pub trait LinOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// Row-compressed sparsity pattern over mesh vertices (self included).
#[derive(Clone, Debug)]
pub struct Pattern {
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
}

impl Pattern {
    /// Vertex adjacency of a tetrahedral mesh.
    pub fn from_tets(nv: usize, tets: &[[usize; 4]]) -> Pattern {
        let mut adj: Vec<Vec<usize>> = (0..nv).map(|v| vec![v]).collect();
        for t in tets {
            for &a in t {
                for &b in t {
                    adj[a].push(b);
                }
            }
        }
        let mut indptr = Vec::with_capacity(nv + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for mut row in adj {
            row.sort_unstable();
            row.dedup();
            indices.extend(row);
            indptr.push(indices.len());
        }
        Pattern { indptr, indices }
    }

    /// Storage slot of entry `(r, c)`.
    pub fn slot(&self, r: usize, c: usize) -> usize {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        self.indptr[r] + row.binary_search(&c).expect("entry outside the pattern")
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }
}

/// Scalar sparse matrix on a vertex pattern.
#[derive(Clone, Debug)]
pub struct ScalarCsr {
    pub pattern: std::sync::Arc<Pattern>,
    pub data: Vec<f64>,
}

impl ScalarCsr {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let p = &self.pattern;
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut s = 0.0;
            for k in p.indptr[r]..p.indptr[r + 1] {
                s += self.data[k] * x[p.indices[k]];
            }
            *yr = s;
        });
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.pattern.rows()).map(|r| self.data[self.pattern.slot(r, r)]).collect()
    }
}

impl LinOp for ScalarCsr {
    fn dim(&self) -> usize {
        self.pattern.rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
    fn diagonal(&self) -> Vec<f64> {
        self.diag()
    }
}

/// Sparse matrix of 3×3 blocks on a vertex pattern, acting on `3·nv` vectors
/// laid out vertex-major.
#[derive(Clone, Debug)]
pub struct BlockCsr {
    pub pattern: std::sync::Arc<Pattern>,
    pub blocks: Vec<[[f64; 3]; 3]>,
}

impl BlockCsr {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let p = &self.pattern;
        y.par_chunks_mut(3).enumerate().for_each(|(r, yr)| {
            let mut s = [0.0; 3];
            for k in p.indptr[r]..p.indptr[r + 1] {
                let c = p.indices[k];
                let b = &self.blocks[k];
                for i in 0..3 {
                    s[i] += b[i][0] * x[3 * c] + b[i][1] * x[3 * c + 1] + b[i][2] * x[3 * c + 2];
                }
            }
            yr.copy_from_slice(&s);
        });
    }

    /// Quadratic form `xᵀ A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut ay = vec![0.0; y.len()];
        self.matvec(y, &mut ay);
        dot(x, &ay)
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Removes components along the Euclidean-orthonormal vectors `z`.
pub fn deflate(z: &[Vec<f64>], x: &mut [f64]) {
    for zi in z {
        let c = dot(zi, x);
        axpy(-c, zi, x);
    }
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// semidefinite operator whose kernel is spanned by `kernel`
/// (Euclidean-orthonormal). The right-hand side is projected onto the
/// range and iterates stay orthogonal to the kernel.
pub fn pcg(
    op: &dyn LinOp,
    b: &[f64],
    x: &mut [f64],
    kernel: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let dinv: Vec<f64> = op.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let out = pcg_with(op, &dinv, b, x, kernel, tol, max_iter)?;
    if out.relative_residual <= tol {
        Ok(out)
    } else {
        Err(MacrolabError::NoConvergence { what: "conjugate gradients".into(), residual: out.relative_residual })
    }
}

/// Conjugate-gradient core with a given inverse diagonal; returns the
/// outcome after `max_iter` steps even when `tol` was not reached.
pub fn pcg_with(
    op: &dyn LinOp,
    dinv: &[f64],
    b: &[f64],
    x: &mut [f64],
    kernel: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = op.dim();
    let mut rhs = b.to_vec();
    deflate(kernel, &mut rhs);
    let bnorm = norm(&rhs);
    deflate(kernel, x);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    r.par_iter_mut().zip(rhs.par_iter()).for_each(|(ri, bi)| *ri = bi - *ri);
    deflate(kernel, &mut r);
    let precond = |r: &[f64]| {
        let mut z: Vec<f64> = r.par_iter().zip(dinv.par_iter()).map(|(a, d)| a * d).collect();
        deflate(kernel, &mut z);
        z
    };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm(&r) / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok(CgOutcome { iterations: it, relative_residual: res });
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(MacrolabError::NoConvergence { what: "conjugate gradients (breakdown)".into(), residual: res });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        if it % 50 == 49 {
            // Refresh the recursive residual to keep the kernel projection tight.
            op.apply(x, &mut r);
            r.par_iter_mut().zip(rhs.par_iter()).for_each(|(ri, bi)| *ri = bi - *ri);
            deflate(kernel, &mut r);
        }
        res = norm(&r) / bnorm;
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Ok(CgOutcome { iterations: max_iter, relative_residual: res })
}

/// Approximate inverse of an SPD operator by a fixed-accuracy inner
/// conjugate-gradient solve, used as an eigensolver preconditioner.
pub struct InnerSolve<'a> {
    pub op: &'a dyn LinOp,
    pub dinv: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl<'a> InnerSolve<'a> {
    pub fn new(op: &'a dyn LinOp, tol: f64, max_iter: usize) -> Self {
        let dinv = op.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
        InnerSolve { op, dinv, tol, max_iter }
    }

    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; r.len()];
        pcg_with(self.op, &self.dinv, r, &mut x, &[], self.tol, self.max_iter)?;
        Ok(x)
    }
}

/// Orthonormalizes `vs` in the Euclidean inner product, dropping dependent vectors.
pub fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            deflate(&out, &mut w);
        }
        let nrm = norm(&w);
        if nrm > 1e-12 * norm(v).max(1e-300) {
            w.iter_mut().for_each(|x| *x /= nrm);
            out.push(w);
        }
    }
    out
}

/// Linear constraint `Cᵀx = 0` with a right inverse `R` (`CᵀR = I`), applied
/// as `x ↦ x − R(Cᵀx)`.
pub struct Constraint<'a> {
    pub c: &'a [Vec<f64>],
    pub r: &'a [Vec<f64>],
}

impl Constraint<'_> {
    fn project(&self, x: &mut [f64]) {
        for (ci, ri) in self.c.iter().zip(self.r) {
            let s = dot(ci, x);
            axpy(-s, ri, x);
        }
    }

    /// Range projection `x ↦ x − C(Rᵀx)`, the adjoint of [`Constraint::project`].
    fn project_adjoint(&self, x: &mut [f64]) {
        for (ci, ri) in self.c.iter().zip(self.r) {
            let s = dot(ri, x);
            axpy(-s, ci, x);
        }
    }
}

/// A vector together with its images under `A` and `B`.
#[derive(Clone)]
struct Triple {
    x: Vec<f64>,
    ax: Vec<f64>,
    bx: Vec<f64>,
}

impl Triple {
    fn new(x: Vec<f64>, a: &dyn LinOp, b: &dyn LinOp) -> Triple {
        let mut ax = vec![0.0; x.len()];
        let mut bx = vec![0.0; x.len()];
        a.apply(&x, &mut ax);
        b.apply(&x, &mut bx);
        Triple { x, ax, bx }
    }

    fn axpy(&mut self, c: f64, o: &Triple) {
        axpy(c, &o.x, &mut self.x);
        axpy(c, &o.ax, &mut self.ax);
        axpy(c, &o.bx, &mut self.bx);
    }

    fn scale(&mut self, c: f64) {
        for v in [&mut self.x, &mut self.ax, &mut self.bx] {
            v.iter_mut().for_each(|t| *t *= c);
        }
    }

    fn combine(ts: &[Triple], coef: impl Fn(usize) -> f64) -> Triple {
        let n = ts[0].x.len();
        let mut out = Triple { x: vec![0.0; n], ax: vec![0.0; n], bx: vec![0.0; n] };
        for (i, t) in ts.iter().enumerate() {
            let c = coef(i);
            if c != 0.0 {
                out.axpy(c, t);
            }
        }
        out
    }
}

/// `B`-orthonormalizes `new` against `basis` and itself (two passes),
/// dropping vectors that become negligible.
fn b_orthonormalize(basis: &mut Vec<Triple>, new: Vec<Triple>) {
    for mut t in new {
        let n0 = dot(&t.x, &t.bx).max(0.0).sqrt();
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in basis.iter() {
                let c = dot(&q.bx, &t.x);
                t.axpy(-c, q);
            }
        }
        let nrm = dot(&t.x, &t.bx).max(0.0).sqrt();
        if nrm > 1e-10 * n0 {
            t.scale(1.0 / nrm);
            basis.push(t);
        }
    }
}

/// Smallest generalized eigenvalue of `A x = λ B x` over `{Cᵀx = 0}` by
/// the locally optimal block preconditioned conjugate gradient method.
/// The preconditioner is `precond` when given and Jacobi otherwise. `A` must be positive definite on the
/// constrained subspace; `B` must be positive definite.
pub fn lowest_eigenvalue(
    a: &dyn LinOp,
    b: &dyn LinOp,
    constraint: Option<Constraint<'_>>,
    precond: Option<&InnerSolve<'_>>,
    block: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let n = a.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dinv: Vec<f64> = a
        .diagonal()
        .iter()
        .zip(b.diagonal())
        .map(|(da, db)| 1.0 / (da + 1e-3 * db).max(f64::MIN_POSITIVE))
        .collect();
    let project = |x: &mut Vec<f64>| {
        if let Some(c) = &constraint {
            c.project(x);
        }
    };
    let start: Vec<Triple> = (0..block)
        .map(|_| {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            project(&mut x);
            Triple::new(x, a, b)
        })
        .collect();
    let mut xs = Vec::new();
    b_orthonormalize(&mut xs, start);
    let mut ps: Vec<Triple> = Vec::new();
    let mut lam = f64::NAN;
    let mut rel = f64::INFINITY;
    for it in 0..max_iter {
        if it > 0 && it % 25 == 0 {
            // Refresh the carried images to bound rounding drift.
            let fresh: Vec<Triple> = xs.iter().map(|t| Triple::new(t.x.clone(), a, b)).collect();
            xs.clear();
            b_orthonormalize(&mut xs, fresh);
            let fresh: Vec<Triple> = ps.iter().map(|t| Triple::new(t.x.clone(), a, b)).collect();
            ps = fresh;
        }
        let m = xs.len();
        let mut ws = Vec::with_capacity(m);
        for (k, t) in xs.iter().enumerate() {
            let lk = dot(&t.x, &t.ax);
            let mut r = t.ax.clone();
            axpy(-lk, &t.bx, &mut r);
            // The constrained residual excludes the multiplier component along C.
            if let Some(c) = &constraint {
                c.project_adjoint(&mut r);
            }
            if k == 0 {
                lam = lk;
                rel = norm(&r) / norm(&t.ax).max(f64::MIN_POSITIVE);
            }
            let mut w: Vec<f64> = match precond {
                Some(p) => p.apply(&r)?,
                None => r.iter().zip(&dinv).map(|(ri, d)| ri * d).collect(),
            };
            project(&mut w);
            ws.push(Triple::new(w, a, b));
        }
        if rel <= tol {
            return Ok(lam);
        }
        let mut basis = xs.clone();
        b_orthonormalize(&mut basis, ws);
        b_orthonormalize(&mut basis, ps.clone());
        let k = basis.len();
        let mut g = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = 0.5 * (dot(&basis[i].x, &basis[j].ax) + dot(&basis[j].x, &basis[i].ax));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let cols: Vec<usize> = order.into_iter().take(m).collect();
        let new_x: Vec<Triple> = cols.iter().map(|&c| Triple::combine(&basis, |i| eig.eigenvectors[(i, c)])).collect();
        ps = cols
            .iter()
            .map(|&c| Triple::combine(&basis, |i| if i >= m { eig.eigenvectors[(i, c)] } else { 0.0 }))
            .collect();
        xs = new_x;
    }
    Err(MacrolabError::NoConvergence { what: "LOBPCG eigensolver".into(), residual: rel })
}

/// Eigenpairs of the dense symmetric-definite pencil `(A, B)`, ascending.
pub fn generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| MacrolabError::NoConvergence { what: "Ritz mass matrix not definite".into(), residual: f64::NAN })?;
    let l = chol.l();
    let linv = l.clone().try_inverse().expect("triangular factor invertible");
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, linv.transpose() * y))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense(DMatrix<f64>);
    impl LinOp for Dense {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            let v = &self.0 * nalgebra::DVector::from_column_slice(x);
            y.copy_from_slice(v.as_slice());
        }
        fn diagonal(&self) -> Vec<f64> {
            self.0.diagonal().iter().copied().collect()
        }
    }

    fn laplacian_1d(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 })
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = Dense(laplacian_1d(50));
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 50];
        let out = pcg(&a, &b, &mut x, &[], 1e-12, 500).unwrap();
        assert!(out.relative_residual <= 1e-12);
        let mut ax = vec![0.0; 50];
        a.apply(&x, &mut ax);
        for i in 0..50 {
            assert!((ax[i] - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_handles_singular_neumann_matrix() {
        let n = 40;
        let mut m = laplacian_1d(n);
        m[(0, 0)] = 1.0;
        m[(n - 1, n - 1)] = 1.0;
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let mut x = vec![0.0; n];
        pcg(&Dense(m), &b, &mut x, &[ones.clone()], 1e-12, 1000).unwrap();
        assert!(dot(&x, &ones).abs() < 1e-10);
    }

    #[test]
    fn smallest_eigenvalue_of_laplacian() {
        let n = 30;
        let a = Dense(laplacian_1d(n));
        let b = Dense(DMatrix::identity(n, n));
        let lam = lowest_eigenvalue(&a, &b, None, None, 3, 1, 1e-9, 500).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((lam - exact).abs() < 1e-10 * exact.max(1.0));
    }

    #[test]
    fn reduction_is_thread_count_independent() {
        let a: Vec<f64> = (0..100_000).map(|i| ((i * 7919) % 1000) as f64 * 1e-3).collect();
        let one = dot(&a, &a);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let two = pool.install(|| dot(&a, &a));
        assert_eq!(one.to_bits(), two.to_bits());
    }
}
