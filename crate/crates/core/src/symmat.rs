//! Linear algebra over the field of rational coefficient functions.
//!
//! Pivot decisions use the exact rational-function normal form, so these
//! routines are only offered for matrices free of transcendental entries;
//! callers fall back to pointwise checks otherwise.

use crate::error::{Error, Result};
use crate::expr::{rational_form, Expr};

#[derive(Debug, Clone)]
pub struct SymMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Expr>,
}

impl SymMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SymMatrix {
            rows,
            cols,
            data: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        SymMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[Expr] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: Vec<Expr>) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn is_rational(&self) -> bool {
        !self.data.iter().any(Expr::has_transcendental)
    }

    fn entry_is_zero(e: &Expr) -> Result<bool> {
        match rational_form(e) {
            Ok(nf) => Ok(nf.is_zero()),
            Err(err) => Err(err),
        }
    }

    fn normalize_entry(e: &Expr) -> Expr {
        rational_form(e).map(|nf| nf.to_expr()).unwrap_or_else(|_| e.clone())
    }

    /// Reduced row echelon form over the rational-function field, with pivot
    /// columns. Entries are returned in normal form.
    pub fn rref(&self) -> Result<(SymMatrix, Vec<usize>)> {
        if !self.is_rational() {
            return Err(Error::InvalidInput(
                "symbolic elimination requires rational coefficient functions".into(),
            ));
        }
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            let mut found = None;
            for r in pivot_row..m.rows {
                if !Self::entry_is_zero(&m.data[r * m.cols + col])? {
                    found = Some(r);
                    break;
                }
            }
            let Some(found) = found else { continue };
            m.swap_rows(pivot_row, found);
            let pivot = m.data[pivot_row * m.cols + col].clone();
            for c in col..m.cols {
                let idx = pivot_row * m.cols + c;
                m.data[idx] = Self::normalize_entry(&Expr::div(m.data[idx].clone(), pivot.clone()));
            }
            for r in 0..m.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = m.data[r * m.cols + col].clone();
                if Self::entry_is_zero(&factor)? {
                    continue;
                }
                for c in col..m.cols {
                    let idx = r * m.cols + c;
                    let pivot_entry = m.data[pivot_row * m.cols + c].clone();
                    m.data[idx] = Self::normalize_entry(&Expr::sub(
                        m.data[idx].clone(),
                        Expr::mul(factor.clone(), pivot_entry),
                    ));
                }
            }
            pivots.push(col);
            pivot_row += 1;
            if pivot_row == m.rows {
                break;
            }
        }
        Ok((m, pivots))
    }

    /// Generic rank over the rational-function field.
    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref()?.1.len())
    }

    /// Basis of `{x : M x = 0}` over the rational-function field.
    pub fn nullspace(&self) -> Result<SymMatrix> {
        let (r, pivots) = self.rref()?;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = SymMatrix::zeros(0, self.cols);
        for &f in &free {
            let mut v = vec![Expr::zero(); self.cols];
            v[f] = Expr::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = Self::normalize_entry(&Expr::neg(r.data[i * r.cols + f].clone()));
            }
            out.push_row(v);
        }
        Ok(out)
    }

    /// One solution of `M x = b` over the rational-function field.
    pub fn solve(&self, b: &[Expr]) -> Result<Option<Vec<Expr>>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = SymMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.data[i * aug.cols + j] = self.data[i * self.cols + j].clone();
            }
            aug.data[i * aug.cols + self.cols] = b[i].clone();
        }
        let (r, pivots) = aug.rref()?;
        if pivots.contains(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![Expr::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r.data[i * r.cols + self.cols].clone();
        }
        Ok(Some(x))
    }

    pub fn transpose(&self) -> SymMatrix {
        let mut out = SymMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].clone();
            }
        }
        out
    }

    /// Coefficients `xi` with `sum_i xi_i row_i = b`, i.e. a solution of the
    /// transposed system.
    pub fn transpose_solve(&self, b: &[Expr]) -> Result<Option<Vec<Expr>>> {
        self.transpose().solve(b)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::parse_expr;

    fn e(s: &str) -> Expr {
        let chart = Chart::new(vec!["x", "y"]).unwrap();
        parse_expr(s, &chart).unwrap()
    }

    #[test]
    fn symbolic_nullspace() {
        // x*a + y*b = 0 has the solution line (y, -x) over the function field
        let m = SymMatrix::from_rows(vec![vec![e("x"), e("y")]]);
        let ns = m.nullspace().unwrap();
        assert_eq!(ns.rows, 1);
        let combo = Expr::add(
            Expr::mul(e("x"), ns.row(0)[0].clone()),
            Expr::mul(e("y"), ns.row(0)[1].clone()),
        );
        assert!(rational_form(&combo).unwrap().is_zero());
    }

    #[test]
    fn symbolic_solve_with_function_pivots() {
        let m = SymMatrix::from_rows(vec![vec![e("x"), Expr::zero()], vec![Expr::zero(), e("y")]]);
        let sol = m.solve(&[e("x^2"), e("x*y")]).unwrap().unwrap();
        assert!(rational_form(&Expr::sub(sol[0].clone(), e("x"))).unwrap().is_zero());
        assert!(rational_form(&Expr::sub(sol[1].clone(), e("x"))).unwrap().is_zero());
    }

    #[test]
    fn rejects_transcendental_matrices() {
        let m = SymMatrix::from_rows(vec![vec![Expr::sin(e("x"))]]);
        assert!(m.rref().is_err());
    }
}
