//! Assembled sector matrices used by the eigensolver hot path.

/// A real symmetric linear map `y = A x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Symmetric matrix stored as its diagonal plus the off-diagonal entries of
/// each row in ascending column order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    diag: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists; duplicates are summed
    /// and entries on the diagonal are folded into it.
    pub fn from_rows(diag: Vec<f64>, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut diag = diag;
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<u32> = None;
            for (c, v) in row {
                if c as usize == i {
                    diag[i] += v;
                } else if last == Some(c) {
                    *vals.last_mut().expect("previous entry exists") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            offsets.push(cols.len());
        }
        SparseMatrix {
            diag,
            offsets,
            cols,
            vals,
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn nnz_offdiag(&self) -> usize {
        self.vals.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.vals.iter().all(|&v| v == 0.0)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&c, &v)| (c as usize, v))
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let r = self.offsets[i]..self.offsets[i + 1];
        let mut acc = self.diag[i] * x[i];
        for (&c, &v) in self.cols[r.clone()].iter().zip(&self.vals[r]) {
            acc += v * x[c as usize];
        }
        acc
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for (c, v) in self.row(i) {
                m[(i, c)] += v;
            }
        }
        m
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }
}

/// `(1 - s) * driver + s * problem` without materialising the sum.
#[derive(Clone, Copy, Debug)]
pub struct Pencil<'a> {
    pub driver: &'a SparseMatrix,
    pub problem: &'a SparseMatrix,
    pub s: f64,
}

impl LinearOperator for Pencil<'_> {
    fn dim(&self) -> usize {
        self.driver.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let (a, b) = (1.0 - self.s, self.s);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = a * self.driver.row_dot(i, x) + b * self.problem.row_dot(i, x);
        }
    }
}

impl LinearOperator for nalgebra::DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_merge_duplicates_and_diagonal() {
        let m = SparseMatrix::from_rows(
            vec![1.0, 2.0],
            vec![vec![(1, 0.5), (1, 0.25), (0, 3.0)], vec![(0, 0.75)]],
        );
        assert_eq!(m.diagonal(), &[4.0, 2.0]);
        assert_eq!(m.apply(&[1.0, 1.0]), vec![4.75, 2.75]);
        assert_eq!(m.nnz_offdiag(), 2);
    }

    #[test]
    fn pencil_interpolates() {
        let a = SparseMatrix::from_rows(vec![0.0, 0.0], vec![vec![(1, -1.0)], vec![(0, -1.0)]]);
        let b = SparseMatrix::from_rows(vec![1.0, -1.0], vec![vec![], vec![]]);
        let p = Pencil { driver: &a, problem: &b, s: 0.25 };
        assert_eq!(p.apply(&[1.0, 0.0]), vec![0.25, -0.75]);
    }
}
