// SPDX-License-Identifier: Apache-2.0

//! Dense matrices of [`SymExpr`] entries.

use super::poly::SymExpr;
use crate::error::{MacrolabError, Result};
use std::ops::{Index, IndexMut};

/// Row-major rectangular matrix of exact polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SymExpr>,
}

impl SymMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![SymExpr::zero(); rows * cols] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { SymExpr::int(1) } else { SymExpr::zero() })
    }

    /// Builds entry `(i, j)` from a closure (zero-based indices).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> SymExpr) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: Vec<Vec<SymExpr>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(MacrolabError::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Row count.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Checked entry access.
    pub fn get(&self, i: usize, j: usize) -> Option<&SymExpr> {
        (i < self.rows && j < self.cols).then(|| &self.data[i * self.cols + j])
    }

    /// Applies `f` to every entry.
    pub fn map(&self, f: impl Fn(&SymExpr) -> SymExpr) -> SymMatrix {
        SymMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Transpose.
    pub fn transpose(&self) -> SymMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<SymMatrix> {
        if rows.iter().any(|&r| r >= self.rows) {
            return Err(MacrolabError::Dimension("row index out of range".into()));
        }
        Ok(Self::from_fn(rows.len(), self.cols, |i, j| self[(rows[i], j)].clone()))
    }

    /// Matrix product.
    pub fn matmul(&self, o: &SymMatrix) -> Result<SymMatrix> {
        if self.cols != o.rows {
            return Err(MacrolabError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(Self::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(SymExpr::zero(), |acc, k| &acc + &(&self[(i, k)] * &o[(k, j)]))
        }))
    }

    /// Entrywise difference.
    pub fn sub(&self, o: &SymMatrix) -> Result<SymMatrix> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(MacrolabError::Dimension("shape mismatch in subtraction".into()));
        }
        Ok(SymMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(o.data.iter()).map(|(a, b)| a - b).collect(),
        })
    }

    /// Multiplies every entry by a polynomial.
    pub fn scale(&self, s: &SymExpr) -> SymMatrix {
        self.map(|e| e * s)
    }

    /// True iff every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> SymMatrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != skip_r).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != skip_c).collect();
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<SymExpr> {
        if self.rows != self.cols {
            return Err(MacrolabError::Dimension(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(self.det_unchecked())
    }

    fn det_unchecked(&self) -> SymExpr {
        match self.rows {
            0 => SymExpr::int(1),
            1 => self.data[0].clone(),
            2 => &(&self[(0, 0)] * &self[(1, 1)]) - &(&self[(0, 1)] * &self[(1, 0)]),
            n => {
                let mut acc = SymExpr::zero();
                for j in 0..n {
                    if self[(0, j)].is_zero() {
                        continue;
                    }
                    let term = &self[(0, j)] * &self.minor(0, j).det_unchecked();
                    acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Classical adjugate of a 3×3 matrix: the transposed cofactor matrix.
    pub fn adjugate(&self) -> Result<SymMatrix> {
        if self.rows != 3 || self.cols != 3 {
            return Err(MacrolabError::Dimension(format!(
                "adjugate requires a 3x3 matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_fn(3, 3, |i, j| {
            let c = self.minor(j, i).det_unchecked();
            if (i + j) % 2 == 0 {
                c
            } else {
                -c
            }
        }))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = SymExpr;
    fn index(&self, (i, j): (usize, usize)) -> &SymExpr {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for SymMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut SymExpr {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::parse::parse_expr;

    fn m3(entries: [&str; 9]) -> SymMatrix {
        SymMatrix::from_fn(3, 3, |i, j| parse_expr(entries[3 * i + j]).unwrap())
    }

    #[test]
    fn identity_det_and_adjugate() {
        let id = SymMatrix::identity(3);
        assert_eq!(id.det().unwrap(), SymExpr::int(1));
        assert_eq!(id.adjugate().unwrap(), id);
    }

    #[test]
    fn adjugate_identity_on_generic_matrix() {
        let m = m3(["tau", "l*n1", "2", "L1 - I", "n2^2", "xi3", "1", "tau*L2", "n3"]);
        let adj = m.adjugate().unwrap();
        let lhs = m.matmul(&adj).unwrap();
        let rhs = SymMatrix::identity(3).scale(&m.det().unwrap());
        assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn shape_errors() {
        let r = SymMatrix::zeros(2, 3);
        assert!(r.det().is_err());
        assert!(r.adjugate().is_err());
        assert!(r.matmul(&r).is_err());
        assert!(SymMatrix::identity(4).adjugate().is_err());
    }
}
