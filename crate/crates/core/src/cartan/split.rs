//! Normal/tangent frame splits and the bigraded decomposition of d.
//!
//! A split presents the normal bundle as a graph over the transverse
//! coordinate fields: `X_u = d/dx^u + A^a_u d/dy^a`, with dual coframes
//! `{dx^u}` and `{l^a = dy^a - A^a_u dx^u}`. Duality `l^a(X_u) = 0` holds by
//! construction. Relative to the split, the exterior derivative of a
//! homogeneous piece decomposes into parts of bidegree (1,0), (0,1) and
//! (2,-1).

use super::ops::ext_d;
use super::tensor::{DiffForm, MultiVector, OneForm, VectorField};
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::Expr;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSplit {
    chart: Chart,
    /// `a[ai][ui]`: coefficient of `d/dy^(leaf ai)` in the lift of
    /// `d/dx^(transverse ui)`.
    a: Vec<Vec<Expr>>,
}

impl FrameSplit {
    /// The coordinate split (`A = 0`).
    pub fn coordinate(chart: &Chart) -> FrameSplit {
        let p = chart.leaf_dim();
        let q = chart.transverse_dim();
        FrameSplit {
            chart: chart.clone(),
            a: vec![vec![Expr::zero(); q]; p],
        }
    }

    /// A split from lift coefficients; `a[ai][ui]` indexed by leaf then
    /// transverse position.
    pub fn new(chart: &Chart, a: Vec<Vec<Expr>>) -> Result<FrameSplit> {
        let p = chart.leaf_dim();
        let q = chart.transverse_dim();
        if a.len() != p || a.iter().any(|row| row.len() != q) {
            return Err(Error::DimensionMismatch(format!(
                "lift coefficients must be {p} x {q}"
            )));
        }
        Ok(FrameSplit {
            chart: chart.clone(),
            a,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coefficient(&self, ai: usize, ui: usize) -> &Expr {
        &self.a[ai][ui]
    }

    pub fn coefficients(&self) -> &[Vec<Expr>] {
        &self.a
    }

    /// The lifted normal frame field `X_u` for transverse position `ui`.
    pub fn h_field(&self, ui: usize) -> VectorField {
        let mut v = VectorField::zero(&self.chart);
        let u = self.chart.transverse_indices()[ui];
        v.set_comp(u, Expr::one());
        for (ai, &a_coord) in self.chart.leaf_indices().iter().enumerate() {
            v.set_comp(a_coord, self.a[ai][ui].clone());
        }
        v
    }

    pub fn h_frame(&self) -> Vec<VectorField> {
        (0..self.chart.transverse_dim()).map(|u| self.h_field(u)).collect()
    }

    /// The leaf frame field `d/dy^a` for leaf position `ai`.
    pub fn f_field(&self, ai: usize) -> VectorField {
        VectorField::basis(&self.chart, self.chart.leaf_indices()[ai])
    }

    pub fn f_frame(&self) -> Vec<VectorField> {
        (0..self.chart.leaf_dim()).map(|a| self.f_field(a)).collect()
    }

    /// The annihilator coframe element `l^a = dy^a - A^a_u dx^u`.
    pub fn lambda_form(&self, ai: usize) -> OneForm {
        let mut w = OneForm::zero(&self.chart);
        w.set_comp(self.chart.leaf_indices()[ai], Expr::one());
        for (ui, &u_coord) in self.chart.transverse_indices().iter().enumerate() {
            w.set_comp(u_coord, Expr::neg(self.a[ai][ui].clone()));
        }
        w
    }

    pub fn lambda_coframe(&self) -> Vec<OneForm> {
        (0..self.chart.leaf_dim()).map(|a| self.lambda_form(a)).collect()
    }

    /// Projection of a vector field onto the leaf directions along the lifted
    /// normal frame.
    pub fn project_leaf(&self, z: &VectorField) -> Result<VectorField> {
        self.chart.same_as(z.chart())?;
        let mut out = z.clone();
        for (ui, &u_coord) in self.chart.transverse_indices().iter().enumerate() {
            let coeff = z.comp(u_coord).clone();
            if coeff.is_zero_const() {
                continue;
            }
            out = out.sub(&self.h_field(ui).scale(&coeff))?;
        }
        Ok(out)
    }

    /// Derivative of a function along the leaves: the (0,1) part of df,
    /// `d''f = (df/dy^a) l^a`.
    pub fn d_leaf_scalar(&self, f: &Expr) -> OneForm {
        let mut out = OneForm::zero(&self.chart);
        for (ai, &a_coord) in self.chart.leaf_indices().iter().enumerate() {
            let df = f.diff(self.chart.name(a_coord));
            if df.is_zero_const() {
                continue;
            }
            out = out
                .add(&self.lambda_form(ai).scale(&df))
                .expect("same chart");
        }
        out
    }

    /// Bidegree components of a bivector relative to the split:
    /// `(P(dx,dx), P(dx,l), P(l,l))` tables.
    pub fn bigrade_bivector(&self, p: &MultiVector) -> Result<BivectorBlocks> {
        self.chart.same_as(p.chart())?;
        if p.degree() != 2 {
            return Err(Error::InvalidDegree("expected a bivector".into()));
        }
        let q = self.chart.transverse_dim();
        let pl = self.chart.leaf_dim();
        let dxs: Vec<OneForm> = self
            .chart
            .transverse_indices()
            .iter()
            .map(|&u| OneForm::basis(&self.chart, u))
            .collect();
        let lambdas = self.lambda_coframe();
        let mut hh = vec![vec![Expr::zero(); q]; q];
        let mut hf = vec![vec![Expr::zero(); pl]; q];
        let mut ff = vec![vec![Expr::zero(); pl]; pl];
        for u in 0..q {
            for v in 0..q {
                hh[u][v] = p.eval_on(&[&dxs[u], &dxs[v]])?;
            }
            for a in 0..pl {
                hf[u][a] = p.eval_on(&[&dxs[u], &lambdas[a]])?;
            }
        }
        for a in 0..pl {
            for b in 0..pl {
                ff[a][b] = p.eval_on(&[&lambdas[a], &lambdas[b]])?;
            }
        }
        Ok(BivectorBlocks { hh, hf, ff })
    }
}

/// Component tables of a bivector in the split frame.
pub struct BivectorBlocks {
    /// `P(dx^u, dx^v)`
    pub hh: Vec<Vec<Expr>>,
    /// `P(dx^u, l^a)`
    pub hf: Vec<Vec<Expr>>,
    /// `P(l^a, l^b)`
    pub ff: Vec<Vec<Expr>>,
}

/// A form expressed in the bigraded coframe: coefficient of
/// `dx^{xs} ^ l^{ys}` per pair of strictly increasing position tuples
/// (`xs` over transverse positions, `ys` over leaf positions).
#[derive(Debug, Clone, PartialEq)]
pub struct BigradedForm {
    chart: Chart,
    terms: BTreeMap<(Vec<usize>, Vec<usize>), Expr>,
}

impl BigradedForm {
    fn zero(chart: &Chart) -> Self {
        BigradedForm {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    fn add_term(&mut self, xs: Vec<usize>, ys: Vec<usize>, coeff: Expr) {
        if coeff.is_zero_const() {
            return;
        }
        let entry = self.terms.entry((xs, ys)).or_insert_with(Expr::zero);
        *entry = Expr::add(entry.clone(), coeff);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<usize>, Vec<usize>), &Expr)> {
        self.terms.iter()
    }

    /// The homogeneous piece of bidegree `(r, s)`.
    pub fn piece(&self, r: usize, s: usize) -> BigradedForm {
        BigradedForm {
            chart: self.chart.clone(),
            terms: self
                .terms
                .iter()
                .filter(|((xs, ys), _)| xs.len() == r && ys.len() == s)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn bidegrees(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .terms
            .keys()
            .map(|(xs, ys)| (xs.len(), ys.len()))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_syntactically_zero(&self) -> bool {
        self.terms.values().all(Expr::is_zero_const)
    }
}

// One factor of a bigraded wedge monomial.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Factor {
    X(usize),
    Y(usize),
}

// Canonically sort a factor list into (xs..., ys...), each ascending, with
// the permutation sign; `None` on a repeated factor.
fn canonical_sign(factors: &[Factor]) -> Option<(Vec<usize>, Vec<usize>, i32)> {
    let mut sign = 1;
    let mut list = factors.to_vec();
    let rank = |f: &Factor| match f {
        Factor::X(i) => (0usize, *i),
        Factor::Y(i) => (1usize, *i),
    };
    for i in 0..list.len() {
        for j in (i + 1..list.len()).rev() {
            if rank(&list[j - 1]) > rank(&list[j]) {
                list.swap(j - 1, j);
                sign = -sign;
            } else if rank(&list[j - 1]) == rank(&list[j]) {
                return None;
            }
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for f in list {
        match f {
            Factor::X(i) => xs.push(i),
            Factor::Y(i) => ys.push(i),
        }
    }
    Some((xs, ys, sign))
}

/// Express a coordinate-basis form in the bigraded coframe of the split,
/// substituting `dy^a = l^a + A^a_u dx^u`.
pub fn to_bigraded(w: &DiffForm, split: &FrameSplit) -> Result<BigradedForm> {
    split.chart().same_as(w.chart())?;
    let chart = split.chart();
    let trans = chart.transverse_indices();
    let leaves = chart.leaf_indices();
    let mut out = BigradedForm::zero(chart);
    for (idx, coeff) in w.terms() {
        // expand each coordinate covector factor into bigraded factors
        let mut expansion: Vec<(Vec<Factor>, Expr)> = vec![(Vec::new(), coeff.clone())];
        for &i in idx {
            let mut next = Vec::new();
            if let Some(ui) = trans.iter().position(|&t| t == i) {
                for (fs, c) in &expansion {
                    let mut fs = fs.clone();
                    fs.push(Factor::X(ui));
                    next.push((fs, c.clone()));
                }
            } else {
                let ai = leaves.iter().position(|&l| l == i).expect("leaf index");
                for (fs, c) in &expansion {
                    let mut fs_l = fs.clone();
                    fs_l.push(Factor::Y(ai));
                    next.push((fs_l, c.clone()));
                    for ui in 0..trans.len() {
                        let a = split.coefficient(ai, ui).clone();
                        if a.is_zero_const() {
                            continue;
                        }
                        let mut fs_x = fs.clone();
                        fs_x.push(Factor::X(ui));
                        next.push((fs_x, Expr::mul(a, c.clone())));
                    }
                }
            }
            expansion = next;
        }
        for (fs, c) in expansion {
            if let Some((xs, ys, sign)) = canonical_sign(&fs) {
                out.add_term(xs, ys, if sign >= 0 { c } else { Expr::neg(c) });
            }
        }
    }
    Ok(out)
}

/// Rebuild the coordinate-basis form, substituting `l^a = dy^a - A^a_u dx^u`.
pub fn from_bigraded(w: &BigradedForm, split: &FrameSplit) -> Result<DiffForm> {
    let chart = split.chart();
    chart.same_as(&w.chart)?;
    let trans = chart.transverse_indices();
    let leaves = chart.leaf_indices();
    let degree = w
        .terms
        .keys()
        .map(|(xs, ys)| xs.len() + ys.len())
        .max()
        .unwrap_or(0);
    let mut out = DiffForm::zero(chart, degree)?;
    for ((xs, ys), coeff) in &w.terms {
        if xs.len() + ys.len() != degree {
            return Err(Error::InvalidDegree(
                "mixed total degrees in a bigraded form".into(),
            ));
        }
        // expand each l^a factor into coordinate covectors
        let mut expansion: Vec<(Vec<usize>, Expr)> = vec![(Vec::new(), coeff.clone())];
        for &ui in xs {
            for (ids, _) in &mut expansion {
                ids.push(trans[ui]);
            }
        }
        for &ai in ys {
            let mut next = Vec::new();
            for (ids, c) in &expansion {
                let mut ids_l = ids.clone();
                ids_l.push(leaves[ai]);
                next.push((ids_l, c.clone()));
                for (ui, &u_coord) in trans.iter().enumerate() {
                    let a = split.coefficient(ai, ui).clone();
                    if a.is_zero_const() {
                        continue;
                    }
                    let mut ids_x = ids.clone();
                    ids_x.push(u_coord);
                    next.push((ids_x, Expr::neg(Expr::mul(a, c.clone()))));
                }
            }
            expansion = next;
        }
        for (ids, c) in expansion {
            out.add_term(&ids, c);
        }
    }
    Ok(out)
}

/// The three components of `dw` of bidegrees (1,0), (0,1) and (2,-1) relative
/// to the split, returned as coordinate-basis forms. Their sum is `dw`.
pub fn bigraded_d(w: &DiffForm, split: &FrameSplit) -> Result<(DiffForm, DiffForm, DiffForm)> {
    split.chart().same_as(w.chart())?;
    let chart = split.chart();
    let out_degree = (w.degree() + 1).min(chart.dim());
    let mut d1 = DiffForm::zero(chart, out_degree)?;
    let mut d2 = DiffForm::zero(chart, out_degree)?;
    let mut d3 = DiffForm::zero(chart, out_degree)?;
    let big = to_bigraded(w, split)?;
    for (r, s) in big.bidegrees() {
        let piece = big.piece(r, s);
        let coord_piece = from_bigraded(&piece, split)?;
        let d_piece = ext_d(&coord_piece)?;
        let d_big = to_bigraded(&d_piece, split)?;
        for (r2, s2) in d_big.bidegrees() {
            let part = from_bigraded(&d_big.piece(r2, s2), split)?;
            if (r2, s2) == (r + 1, s) {
                d1 = d1.add(&part)?;
            } else if (r2, s2) == (r, s + 1) {
                d2 = d2.add(&part)?;
            } else if (r2, s2) == (r + 2, s.wrapping_sub(1)) {
                d3 = d3.add(&part)?;
            } else {
                return Err(Error::InvalidDegree(format!(
                    "unexpected bidegree ({r2},{s2}) in d of a ({r},{s}) piece"
                )));
            }
        }
    }
    Ok((d1, d2, d3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn coframe_duality_holds_identically() {
        let chart = Chart::adapted(vec!["x1", "x2", "y1"], &["y1"]).unwrap();
        let a = parse_expr("x1*y1 + 1", &chart).unwrap();
        let b = parse_expr("x2^2", &chart).unwrap();
        let split = FrameSplit::new(&chart, vec![vec![a, b]]).unwrap();
        for u in 0..2 {
            let x = split.h_field(u);
            let l = split.lambda_form(0);
            let pairing = l.apply(&x).unwrap();
            assert!(crate::expr::rational_form(&pairing).unwrap().is_zero());
        }
    }

    #[test]
    fn bigraded_round_trip() {
        let chart = Chart::adapted(vec!["x1", "x2", "y1"], &["y1"]).unwrap();
        let a = parse_expr("y1", &chart).unwrap();
        let split = FrameSplit::new(&chart, vec![vec![a, Expr::zero()]]).unwrap();
        let mut w = DiffForm::zero(&chart, 2).unwrap();
        w.add_term(&[0, 2], parse_expr("x1 + y1", &chart).unwrap());
        w.add_term(&[0, 1], parse_expr("x2", &chart).unwrap());
        let big = to_bigraded(&w, &split).unwrap();
        let back = from_bigraded(&big, &split).unwrap();
        let diff = w.sub(&back).unwrap();
        for (_, c) in diff.terms() {
            assert!(crate::expr::rational_form(c).unwrap().is_zero());
        }
    }
}
