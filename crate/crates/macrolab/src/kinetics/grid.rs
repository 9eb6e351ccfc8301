// SPDX-License-Identifier: Apache-2.0

//! Tensor Gauss–Hermite velocity grid and Hermite-function differentiation.

use nalgebra::{DMatrix, SymmetricEigen};

/// Standard Maxwellian `μ(v) = (2π)^{-3/2} e^{-|v|²/2}`.
pub fn maxwellian(v: [f64; 3]) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-1.5) * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()
}

/// Orthonormal probabilists' Hermite polynomials `p_0..p_{n}` at `x`
/// (orthonormal against the one-dimensional standard Gaussian).
pub fn hermite_orthonormal(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 1..n {
        p[k + 1] = (x * p[k] - (k as f64).sqrt() * p[k - 1]) / ((k + 1) as f64).sqrt();
    }
    p
}

/// Nodes and probability weights of the `n`-point rule for `∫ h(x) e^{-x²/2}/√(2π) dx`.
pub fn gauss_hermite_prob(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64).sqrt() } else { 0.0 });
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    // Polish each node with Newton steps on p_n (p_n' = √n p_{n−1}).
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let p = hermite_orthonormal(n, *x);
            let step = p[n] / ((n as f64).sqrt() * p[n - 1]);
            *x -= step;
        }
    }
    // Symmetrize to make the rule exactly even.
    for i in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / hermite_orthonormal(n - 1, x).iter().map(|p| p * p).sum::<f64>())
        .collect();
    for i in 0..n / 2 {
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    (nodes, weights)
}

/// Tensor velocity grid; index `k = (i·n + j)·n + l`.
#[derive(Clone, Debug)]
pub struct VelocityGrid {
    /// Points per axis.
    pub n1d: usize,
    pub nodes1d: Vec<f64>,
    /// Probability weights per axis (against the 1D Gaussian).
    pub prob1d: Vec<f64>,
    pub nodes: Vec<[f64; 3]>,
    /// Weights for `∫ g dv`.
    pub weights: Vec<f64>,
    /// `√μ` at each node.
    pub sqrt_mu: Vec<f64>,
    /// One-dimensional Hermite-function differentiation matrix.
    pub diff1d: DMatrix<f64>,
}

impl VelocityGrid {
    /// Tensor grid with `n` Gauss–Hermite points per axis.
    pub fn new(n: usize) -> VelocityGrid {
        assert!(n >= 2, "velocity grid needs at least two points per axis");
        let (x, w) = gauss_hermite_prob(n);
        let mut nodes = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        let mut sqrt_mu = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v = [x[i], x[j], x[l]];
                    let mu = maxwellian(v);
                    nodes.push(v);
                    weights.push(w[i] * w[j] * w[l] / mu);
                    sqrt_mu.push(mu.sqrt());
                }
            }
        }
        let diff1d = hermite_diff_matrix(&x, &w);
        VelocityGrid { n1d: n, nodes1d: x, prob1d: w, nodes, weights, sqrt_mu, diff1d }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f g dv`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
    }

    /// `∫ g dv`.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&v| f(v)).collect()
    }

    /// `∂f/∂v_axis` by exact differentiation of the Hermite-function expansion.
    pub fn derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let n = self.n1d;
        let stride = [n * n, n, 1][axis];
        let mut out = vec![0.0; f.len()];
        for base in 0..f.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            for a in 0..n {
                let mut s = 0.0;
                for b in 0..n {
                    s += self.diff1d[(a, b)] * f[base + b * stride];
                }
                out[base + a * stride] = s;
            }
        }
        out
    }
}

/// Differentiation matrix for functions `Σ c_k p_k(v) √μ₁(v)` sampled at the nodes.
fn hermite_diff_matrix(x: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let sqrt_mu1 = |v: f64| ((-0.25 * v * v).exp()) / (2.0 * std::f64::consts::PI).powf(0.25);
    // Coefficient map: c_k = Σ_i w_i p_k(x_i) f(x_i)/√μ₁(x_i).
    let ps: Vec<Vec<f64>> = x.iter().map(|&v| hermite_orthonormal(n, v)).collect();
    DMatrix::from_fn(n, n, |a, i| {
        let mut s = 0.0;
        for k in 0..n {
            // (p_k √μ₁)' = √μ₁ [ (√k/2) p_{k−1} − (√(k+1)/2) p_{k+1} ]
            let lower = if k > 0 { 0.5 * (k as f64).sqrt() * ps[a][k - 1] } else { 0.0 };
            let upper = 0.5 * ((k + 1) as f64).sqrt() * ps[a][k + 1];
            s += (lower - upper) * w[i] * ps[i][k];
        }
        s * sqrt_mu1(x[a]) / sqrt_mu1(x[i])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_rule_is_exact_for_gaussian_moments() {
        let (x, w) = gauss_hermite_prob(16);
        let m = |p: i32| x.iter().zip(&w).map(|(a, b)| a.powi(p) * b).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-14);
        assert!((m(2) - 1.0).abs() < 1e-13);
        assert!((m(4) - 3.0).abs() < 1e-13);
        assert!((m(8) - 105.0).abs() < 1e-11);
        assert!(m(5).abs() < 1e-13);
    }

    #[test]
    fn derivative_of_gaussian_times_polynomial() {
        let g = VelocityGrid::new(12);
        let f = g.sample(|v| (v[0] * v[0] - 2.0 * v[1]) * maxwellian(v).sqrt());
        let exact = g.sample(|v| (2.0 * v[0] - 0.5 * v[0] * (v[0] * v[0] - 2.0 * v[1])) * maxwellian(v).sqrt());
        let d = g.derivative(&f, 0);
        for (a, b) in d.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-11, "{a} {b}");
        }
        let d2 = g.derivative(&f, 1);
        let exact2 = g.sample(|v| (-2.0 - 0.5 * v[1] * (v[0] * v[0] - 2.0 * v[1])) * maxwellian(v).sqrt());
        for (a, b) in d2.iter().zip(&exact2) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
