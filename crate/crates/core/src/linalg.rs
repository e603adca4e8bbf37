//! Exact rational linear algebra for pointwise fiber computations.
//!
//! Ranks are computed by fraction-free (Bareiss) elimination over the
//! integers after clearing denominators; reduced row echelon forms over the
//! rationals give canonical subspace representatives, null spaces, and
//! membership tests.

use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Dense matrix of exact rationals, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[Scalar]> {
        (0..self.rows).map(|i| self.row(i))
    }

    pub fn push_row(&mut self, row: Vec<Scalar>) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn vstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        QMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Keep the listed columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> QMatrix {
        let mut out = QMatrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (j_new, &j) in cols.iter().enumerate() {
                out[(i, j_new)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn transpose(&self) -> QMatrix {
        let mut out = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Rank by fraction-free Gaussian elimination (Bareiss) on the integer
    /// matrix obtained by clearing row denominators.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let mut m: Vec<Vec<BigInt>> = self
            .rows_iter()
            .map(|row| {
                let lcm = row
                    .iter()
                    .fold(BigInt::one(), |acc, s| acc.lcm(s.denom()));
                row.iter()
                    .map(|s| s.numer() * (&lcm / s.denom()))
                    .collect()
            })
            .collect();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        let mut prev = BigInt::one();
        let mut pivot_row = 0;
        for col in 0..cols {
            let Some(found) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(pivot_row, found);
            for r in (pivot_row + 1)..rows {
                for c in (col + 1)..cols {
                    let num = &m[pivot_row][col] * &m[r][c] - &m[r][col] * &m[pivot_row][c];
                    m[r][c] = num / &prev;
                }
                m[r][col] = BigInt::zero();
            }
            prev = m[pivot_row][col].clone();
            pivot_row += 1;
            rank += 1;
            if pivot_row == rows {
                break;
            }
        }
        rank
    }

    /// Reduced row echelon form with the pivot column list.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            let Some(found) = (pivot_row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(pivot_row, found);
            let inv = m[(pivot_row, col)].recip();
            for c in col..m.cols {
                let v = &m[(pivot_row, c)] * &inv;
                m[(pivot_row, c)] = v;
            }
            for r in 0..m.rows {
                if r != pivot_row && !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone();
                    for c in col..m.cols {
                        let v = &m[(r, c)] - &(&factor * &m[(pivot_row, c)]);
                        m[(r, c)] = v;
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
            if pivot_row == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    /// Canonical basis of the row space: nonzero rows of the RREF.
    pub fn row_space_basis(&self) -> QMatrix {
        let (r, pivots) = self.rref();
        let mut out = QMatrix::zeros(0, self.cols);
        for i in 0..pivots.len() {
            out.push_row(r.row(i).to_vec());
        }
        out
    }

    /// Row spaces compared via their canonical RREF bases.
    pub fn row_space_equal(&self, other: &QMatrix) -> bool {
        self.cols == other.cols && self.row_space_basis() == other.row_space_basis()
    }

    pub fn row_space_contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.cols);
        let stacked = self.vstack(&QMatrix::from_rows(vec![v.to_vec()]));
        stacked.rank() == self.rank()
    }

    /// Basis rows for the null space `{x : M x = 0}` (columns as unknowns).
    pub fn nullspace(&self) -> QMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = QMatrix::zeros(0, self.cols);
        for &f in &free {
            let mut v = vec![Scalar::zero(); self.cols];
            v[f] = Scalar::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&r[(i, f)];
            }
            out.push_row(v);
        }
        out
    }

    /// One solution of `M x = b`, if any.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = QMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Dimension of the intersection of two row spaces.
pub fn intersection_dim(a: &QMatrix, b: &QMatrix) -> usize {
    // dim(A) + dim(B) - dim(A + B)
    let da = a.rank();
    let db = b.rank();
    let dsum = a.vstack(b).rank();
    da + db - dsum
}
