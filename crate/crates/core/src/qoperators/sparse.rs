use num_complex::Complex64;

use super::OperatorError;
use crate::lattice::{Axis, IndexSpace};

/// Entries with modulus below this are not stored.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// A complex sparse matrix on a finite window, stored column by column.
///
/// Each column holds `(row, value)` pairs sorted by row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    space: IndexSpace,
    cols: Vec<Vec<(usize, Complex64)>>,
}

fn keep(v: Complex64) -> bool {
    v.norm() >= DROP_TOLERANCE
}

impl SparseOperator {
    pub fn zero(space: IndexSpace) -> Self {
        let cols = vec![Vec::new(); space.dim()];
        Self { space, cols }
    }

    pub fn identity(space: IndexSpace) -> Self {
        Self::diagonal(space, |_| Complex64::new(1.0, 0.0))
    }

    pub fn diagonal(space: IndexSpace, f: impl Fn(&[i64]) -> Complex64) -> Self {
        let cols = space
            .points()
            .enumerate()
            .map(|(j, p)| {
                let v = f(&p);
                if keep(v) {
                    vec![(j, v)]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { space, cols }
    }

    /// Builds an operator column by column. `f` maps a column point to
    /// `(row point, amplitude)` pairs; rows outside the window are dropped.
    pub fn from_columns(
        space: IndexSpace,
        f: impl Fn(&[i64]) -> Vec<(Vec<i64>, Complex64)>,
    ) -> Self {
        let cols = space
            .points()
            .map(|p| {
                let col: Vec<_> = f(&p)
                    .into_iter()
                    .filter_map(|(row, v)| space.index_of(&row).map(|i| (i, v)))
                    .collect();
                normalize_column(col)
            })
            .collect();
        Self { space, cols }
    }

    /// Builds from `(row, col, value)` triples given by index. Duplicates add.
    pub fn from_triplets(
        space: IndexSpace,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self, OperatorError> {
        let dim = space.dim();
        let mut cols = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(OperatorError::IndexOutOfRange {
                    row: r,
                    col: c,
                    dim,
                });
            }
            cols[c].push((r, v));
        }
        let cols = cols.into_iter().map(normalize_column).collect();
        Ok(Self { space, cols })
    }

    pub fn space(&self) -> &IndexSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(usize, Complex64)] {
        &self.cols[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let c = &self.cols[col];
        match c.binary_search_by_key(&row, |&(r, _)| r) {
            Ok(i) => c[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Entry at `(row point, column point)`; zero if either lies outside the window.
    pub fn get(&self, row: &[i64], col: &[i64]) -> Complex64 {
        match (self.space.index_of(row), self.space.index_of(col)) {
            (Some(r), Some(c)) => self.entry(r, c),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, v)| (i, j, v)))
    }

    fn check_same_space(&self, other: &Self) -> Result<(), OperatorError> {
        if self.space != other.space {
            return Err(OperatorError::SpaceMismatch);
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let mut cols = vec![Vec::new(); self.dim()];
        for (i, j, v) in self.triplets() {
            cols[i].push((j, v.conj()));
        }
        // triplets are visited in increasing column order, so each new column is sorted
        Self {
            space: self.space.clone(),
            cols,
        }
    }

    /// self · rhs
    pub fn multiply(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_same_space(rhs)?;
        let cols = rhs
            .cols
            .iter()
            .map(|bcol| {
                let mut acc = Vec::new();
                for &(k, b) in bcol {
                    acc.extend(self.cols[k].iter().map(|&(i, a)| (i, a * b)));
                }
                normalize_column(acc)
            })
            .collect();
        Ok(Self {
            space: self.space.clone(),
            cols,
        })
    }

    /// alpha · self + beta · rhs
    pub fn add(
        &self,
        rhs: &Self,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Self, OperatorError> {
        self.check_same_space(rhs)?;
        let cols = self
            .cols
            .iter()
            .zip(&rhs.cols)
            .map(|(a, b)| {
                let merged = a
                    .iter()
                    .map(|&(i, v)| (i, alpha * v))
                    .chain(b.iter().map(|&(i, v)| (i, beta * v)))
                    .collect();
                normalize_column(merged)
            })
            .collect();
        Ok(Self {
            space: self.space.clone(),
            cols,
        })
    }

    /// self − rhs
    pub fn sub(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.add(rhs, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let cols = self
            .cols
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&(i, v)| (i, s * v))
                    .filter(|e| keep(e.1))
                    .collect()
            })
            .collect();
        Self {
            space: self.space.clone(),
            cols,
        }
    }

    /// Product of a list of operators, left to right.
    pub fn product<'a>(
        space: &IndexSpace,
        factors: impl IntoIterator<Item = &'a SparseOperator>,
    ) -> Result<Self, OperatorError> {
        let mut acc = Self::identity(space.clone());
        for f in factors {
            acc = acc.multiply(f)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj.norm_sqr() == 0.0 {
                continue;
            }
            for &(i, v) in col {
                y[i] += v * xj;
            }
        }
        y
    }

    /// self^* · x without forming the adjoint.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v.conj() * x[i]).sum())
            .collect()
    }

    /// ‖A e_j‖
    pub fn column_norm(&self, j: usize) -> f64 {
        self.cols[j]
            .iter()
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.triplets()
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// max |self_ij − other_ij|
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, OperatorError> {
        Ok(self.sub(other)?.max_abs_entry())
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(i, j, _)| i == j)
    }

    /// Diagonal entries, or `None` if the operator has off-diagonal entries.
    pub fn diagonal_entries(&self) -> Option<Vec<Complex64>> {
        if !self.is_diagonal() {
            return None;
        }
        Some((0..self.dim()).map(|j| self.entry(j, j)).collect())
    }

    /// P A P where P projects onto the basis vectors whose points satisfy `keep_point`.
    pub fn compress(&self, keep_point: impl Fn(&[i64]) -> bool) -> Self {
        let mask: Vec<bool> = self.space.points().map(|p| keep_point(&p)).collect();
        let cols = self
            .cols
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if mask[j] {
                    c.iter().copied().filter(|&(i, _)| mask[i]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self {
            space: self.space.clone(),
            cols,
        }
    }

    /// A ⊗ I on the space extended by `axis`.
    pub fn tensor_identity(&self, axis: Axis) -> Self {
        let space = self.space.with_axis(axis);
        let n = axis.len();
        let mut cols = Vec::with_capacity(space.dim());
        for col in &self.cols {
            for f in 0..n {
                cols.push(col.iter().map(|&(i, v)| (i * n + f, v)).collect());
            }
        }
        Self { space, cols }
    }
}

fn normalize_column(mut col: Vec<(usize, Complex64)>) -> Vec<(usize, Complex64)> {
    if col.len() > 1 {
        col.sort_unstable_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(col.len());
        for (i, v) in col {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => out.push((i, v)),
            }
        }
        col = out;
    }
    col.retain(|e| keep(e.1));
    col
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Truncation;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn add_self_cancels() {
        let t = Truncation::new(1, 2, 2).unwrap();
        let a = SparseOperator::from_columns(t.space(), |p| {
            vec![(vec![p[0], p[1] + 1], Complex64::new(p[0] as f64 + 1.0, 0.5))]
        });
        assert!(a.nnz() > 0);
        assert_eq!(a.add(&a, c(1.0), c(-1.0)).unwrap().nnz(), 0);
    }

    #[test]
    fn adjoint_involution_and_products() {
        let t = Truncation::new(1, 2, 2).unwrap();
        let a = SparseOperator::from_columns(t.space(), |p| {
            vec![
                (vec![p[0], p[1] + 1], Complex64::new(1.0, 2.0)),
                (vec![p[0], p[1]], Complex64::new(0.0, -1.0)),
            ]
        });
        assert_eq!(a.adjoint().adjoint(), a);
        let aa = a.adjoint().multiply(&a).unwrap();
        assert_eq!(aa.adjoint().max_abs_diff(&aa).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = SparseOperator::zero(Truncation::new(1, 2, 2).unwrap().space());
        let b = SparseOperator::zero(Truncation::new(1, 3, 2).unwrap().space());
        assert!(matches!(a.multiply(&b), Err(OperatorError::SpaceMismatch)));
        assert!(a.add(&b, c(1.0), c(1.0)).is_err());
    }

    #[test]
    fn tensor_identity_layout() {
        let t = Truncation::new(1, 1, 1).unwrap();
        let a = SparseOperator::from_columns(t.space(), |p| vec![(vec![p[0], p[1] + 1], c(2.0))]);
        let b = a.tensor_identity(Axis::Integer(1));
        assert_eq!(b.dim(), a.dim() * 3);
        assert_eq!(b.get(&[0, 1, -1], &[0, 0, -1]), c(2.0));
        assert_eq!(b.get(&[0, 1, 0], &[0, 0, -1]), c(0.0));
    }
}
