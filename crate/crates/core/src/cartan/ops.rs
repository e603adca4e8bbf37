//! Chart-level exterior calculus operators.

use super::tensor::{DiffForm, MultiVector, OneForm, VectorField};
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::Expr;

/// `[X,Y]^i = sum_j (X^j d_j Y^i - Y^j d_j X^i)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.chart().same_as(y.chart())?;
    let chart = x.chart();
    let n = chart.dim();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Expr::zero();
        for j in 0..n {
            let name = chart.name(j);
            acc = Expr::add(
                acc,
                Expr::sub(
                    Expr::mul(x.comp(j).clone(), y.comp(i).diff(name)),
                    Expr::mul(y.comp(j).clone(), x.comp(i).diff(name)),
                ),
            );
        }
        comps.push(acc);
    }
    VectorField::new(chart, comps)
}

/// Directional derivative of a function along a vector field.
pub fn apply_field(x: &VectorField, f: &Expr) -> Expr {
    let chart = x.chart();
    Expr::sum(
        (0..chart.dim()).map(|j| Expr::mul(x.comp(j).clone(), f.diff(chart.name(j)))),
    )
}

/// Differential of a function as a 1-form.
pub fn d_scalar(chart: &Chart, f: &Expr) -> OneForm {
    let comps = (0..chart.dim()).map(|i| f.diff(chart.name(i))).collect();
    OneForm::new(chart, comps).expect("dimension matches")
}

/// Exterior derivative: `d(f dx^I) = df ^ dx^I`; satisfies `d(d(w)) = 0`.
pub fn ext_d(w: &DiffForm) -> Result<DiffForm> {
    let chart = w.chart();
    if w.degree() >= chart.dim() {
        // top degree: the derivative is the zero form one degree up when it
        // exists at all
        return DiffForm::zero(chart, chart.dim().min(w.degree() + 1));
    }
    let mut out = DiffForm::zero(chart, w.degree() + 1)?;
    for (idx, c) in w.terms() {
        for j in 0..chart.dim() {
            let dc = c.diff(chart.name(j));
            if dc.is_zero_const() {
                continue;
            }
            let mut full = Vec::with_capacity(idx.len() + 1);
            full.push(j);
            full.extend_from_slice(idx);
            out.add_term(&full, dc);
        }
    }
    Ok(out)
}

/// Cartan formula on forms: `L_X = i(X) d + d i(X)`.
pub fn lie_derivative_form(x: &VectorField, w: &DiffForm) -> Result<DiffForm> {
    x.chart().same_as(w.chart())?;
    if w.degree() == 0 {
        return Ok(DiffForm::scalar(w.chart(), apply_field(x, &w.comp(&[]))));
    }
    let term1 = ext_d(w)?.interior(x)?;
    let term2 = ext_d(&w.interior(x)?)?;
    term1.add(&term2)
}

/// Lie derivative on multivectors, extending `[X, -]` as a derivation of the
/// wedge: `L_X(f d_I) = X(f) d_I + f sum_m d_{i_1}^...^[X, d_{i_m}]^...`.
pub fn lie_derivative_multi(x: &VectorField, p: &MultiVector) -> Result<MultiVector> {
    x.chart().same_as(p.chart())?;
    let chart = p.chart();
    let n = chart.dim();
    let mut out = MultiVector::zero(chart, p.degree())?;
    for (idx, c) in p.terms() {
        out.add_term(idx, apply_field(x, c));
        // [X, d_i] = -(d_i X^j) d_j
        for (m, &i) in idx.iter().enumerate() {
            for j in 0..n {
                let coeff = Expr::neg(Expr::mul(c.clone(), x.comp(j).diff(chart.name(i))));
                if coeff.is_zero_const() {
                    continue;
                }
                let mut new_idx = idx.clone();
                new_idx[m] = j;
                out.add_term(&new_idx, coeff);
            }
        }
    }
    Ok(out)
}

/// Schouten bracket of two bivectors, normalized so that
/// `(1/2)[P,P](df,dg,dh)` is the Jacobi defect of the bracket
/// `{f,g} = P(df,dg)`:
/// `[P,Q]^{abc} = sum_l cyc(abc) { P^{lc} d_l Q^{ab} + Q^{lc} d_l P^{ab} }`.
pub fn schouten_bracket(p: &MultiVector, q: &MultiVector) -> Result<MultiVector> {
    p.chart().same_as(q.chart())?;
    if p.degree() != 2 || q.degree() != 2 {
        return Err(Error::InvalidDegree(
            "the Schouten bracket is implemented for bivectors".into(),
        ));
    }
    let chart = p.chart();
    let n = chart.dim();
    let mut out = MultiVector::zero(chart, 3.min(n))?;
    if n < 3 {
        return Ok(out);
    }
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let mut acc = Expr::zero();
                for l in 0..n {
                    let dl = chart.name(l);
                    for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
                        acc = Expr::add(
                            acc,
                            Expr::add(
                                Expr::mul(p.comp_signed(&[l, k]), q.comp_signed(&[i, j]).diff(dl)),
                                Expr::mul(q.comp_signed(&[l, k]), p.comp_signed(&[i, j]).diff(dl)),
                            ),
                        );
                    }
                }
                out.add_term(&[a, b, c], acc);
            }
        }
    }
    Ok(out)
}

/// `#_P a = i(a) P`.
pub fn sharp(p: &MultiVector, a: &OneForm) -> Result<VectorField> {
    if p.degree() != 2 {
        return Err(Error::InvalidDegree("sharp expects a bivector".into()));
    }
    VectorField::from_graded(&p.interior(a)?)
}

/// `b_s X = i(X) s`.
pub fn flat(s: &DiffForm, x: &VectorField) -> Result<OneForm> {
    if s.degree() != 2 {
        return Err(Error::InvalidDegree("flat expects a 2-form".into()));
    }
    OneForm::from_graded(&s.interior(x)?)
}

/// Poisson bracket of functions: `{f,g} = P(df, dg)`.
pub fn poisson_bracket(p: &MultiVector, f: &Expr, g: &Expr) -> Result<Expr> {
    let chart = p.chart();
    let df = d_scalar(chart, f);
    let dg = d_scalar(chart, g);
    p.eval_on(&[&df, &dg])
}

/// Bracket of 1-forms induced by a bivector:
/// `{a,b}_P = L_{#a} b - L_{#b} a - d(P(a,b))`.
pub fn form_bracket(p: &MultiVector, a: &OneForm, b: &OneForm) -> Result<OneForm> {
    let sa = sharp(p, a)?;
    let sb = sharp(p, b)?;
    let term1 = lie_derivative_form(&sa, &b.to_graded())?;
    let term2 = lie_derivative_form(&sb, &a.to_graded())?;
    let pab = p.eval_on(&[a, b])?;
    let term3 = d_scalar(p.chart(), &pab).to_graded();
    OneForm::from_graded(&term1.sub(&term2)?.sub(&term3)?)
}
