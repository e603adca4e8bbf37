//! Vector fields, differential forms, and multivector fields on a chart.
//!
//! Degree-k objects store one coefficient per strictly increasing index
//! tuple; antisymmetry is implicit in the indexing. Conventions fixed here
//! for the whole crate:
//!
//! * evaluation is the determinant pairing, `(a^b)(X,Y) = a(X)b(Y) - a(Y)b(X)`;
//! * interior products contract the first slot, `i(a)(X^Y) = a(X)Y - a(Y)X`
//!   and `(i(X)w)(...) = w(X, ...)`.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::Expr;
use std::collections::BTreeMap;

/// Merge two strictly increasing index tuples; `None` on a repeated index,
/// otherwise the sorted union with the permutation sign.
pub fn merge_indices(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut sign = 1;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] hops over the remaining entries of a
            if (a.len() - i) % 2 == 1 {
                sign = -sign;
            }
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

/// Sign of removing position `m` from a tuple (first-slot contraction).
fn removal_sign(m: usize) -> i32 {
    if m % 2 == 0 {
        1
    } else {
        -1
    }
}

fn signed(e: Expr, sign: i32) -> Expr {
    if sign >= 0 {
        e
    } else {
        Expr::neg(e)
    }
}

macro_rules! graded_tensor {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            chart: Chart,
            degree: usize,
            comps: BTreeMap<Vec<usize>, Expr>,
        }

        impl $name {
            pub fn zero(chart: &Chart, degree: usize) -> Result<Self> {
                if degree > chart.dim() {
                    return Err(Error::DegreeOverflow(format!(
                        "degree {degree} on a {}-dimensional chart",
                        chart.dim()
                    )));
                }
                Ok(Self {
                    chart: chart.clone(),
                    degree,
                    comps: BTreeMap::new(),
                })
            }

            pub fn chart(&self) -> &Chart {
                &self.chart
            }

            pub fn degree(&self) -> usize {
                self.degree
            }

            /// Add `coeff` onto the component of the (not necessarily sorted,
            /// possibly repeating) index tuple, with the sorting sign.
            pub fn add_term(&mut self, indices: &[usize], coeff: Expr) {
                debug_assert_eq!(indices.len(), self.degree);
                if coeff.is_zero_const() {
                    return;
                }
                let mut sorted: Vec<usize> = indices.to_vec();
                // bubble sort tracking the permutation sign; tuples are tiny
                let mut sign = 1;
                for i in 0..sorted.len() {
                    for j in (i + 1..sorted.len()).rev() {
                        if sorted[j - 1] > sorted[j] {
                            sorted.swap(j - 1, j);
                            sign = -sign;
                        }
                    }
                }
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return;
                }
                let entry = self.comps.entry(sorted.clone()).or_insert_with(Expr::zero);
                *entry = Expr::add(entry.clone(), signed(coeff, sign));
                if entry.is_zero_const() {
                    self.comps.remove(&sorted);
                }
            }

            /// Component of a strictly increasing index tuple.
            pub fn comp(&self, indices: &[usize]) -> Expr {
                debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
                self.comps.get(indices).cloned().unwrap_or_else(Expr::zero)
            }

            /// Component of an arbitrary index tuple (full antisymmetry).
            pub fn comp_signed(&self, indices: &[usize]) -> Expr {
                let mut sorted = indices.to_vec();
                let mut sign = 1;
                for i in 0..sorted.len() {
                    for j in (i + 1..sorted.len()).rev() {
                        if sorted[j - 1] > sorted[j] {
                            sorted.swap(j - 1, j);
                            sign = -sign;
                        }
                    }
                }
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Expr::zero();
                }
                signed(self.comp(&sorted), sign)
            }

            pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
                self.comps.iter()
            }

            pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> Self {
                let mut out = Self {
                    chart: self.chart.clone(),
                    degree: self.degree,
                    comps: BTreeMap::new(),
                };
                for (idx, c) in &self.comps {
                    out.add_term(idx, f(c));
                }
                out
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.chart.same_as(&other.chart)?;
                if self.degree != other.degree {
                    return Err(Error::InvalidDegree(format!(
                        "cannot add degrees {} and {}",
                        self.degree, other.degree
                    )));
                }
                let mut out = self.clone();
                for (idx, c) in &other.comps {
                    out.add_term(idx, c.clone());
                }
                Ok(out)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.add(&other.neg())
            }

            pub fn neg(&self) -> Self {
                self.map_coeffs(|c| Expr::neg(c.clone()))
            }

            pub fn scale(&self, f: &Expr) -> Self {
                self.map_coeffs(|c| Expr::mul(f.clone(), c.clone()))
            }

            /// Wedge product within the same kind.
            pub fn wedge(&self, other: &Self) -> Result<Self> {
                self.chart.same_as(&other.chart)?;
                let mut out = Self::zero(&self.chart, self.degree + other.degree)?;
                for (ia, ca) in &self.comps {
                    for (ib, cb) in &other.comps {
                        if let Some((idx, sign)) = merge_indices(ia, ib) {
                            out.add_term(&idx, signed(Expr::mul(ca.clone(), cb.clone()), sign));
                        }
                    }
                }
                Ok(out)
            }

            pub fn is_syntactically_zero(&self) -> bool {
                self.comps.values().all(Expr::is_zero_const)
            }
        }
    };
}

graded_tensor!(
    DiffForm,
    "A differential k-form with one `Expr` per strictly increasing index tuple."
);
graded_tensor!(
    MultiVector,
    "A k-vector field with one `Expr` per strictly increasing index tuple."
);

/// A vector field, dense over the coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

/// A 1-form, dense over the coordinate coframe.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    chart: Chart,
    comps: Vec<Expr>,
}

macro_rules! dense_degree_one {
    ($name:ident, $graded:ident) => {
        impl $name {
            pub fn zero(chart: &Chart) -> Self {
                Self {
                    chart: chart.clone(),
                    comps: vec![Expr::zero(); chart.dim()],
                }
            }

            pub fn new(chart: &Chart, comps: Vec<Expr>) -> Result<Self> {
                if comps.len() != chart.dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} components on a {}-dimensional chart",
                        comps.len(),
                        chart.dim()
                    )));
                }
                Ok(Self {
                    chart: chart.clone(),
                    comps,
                })
            }

            /// The coordinate basis element with index `i`.
            pub fn basis(chart: &Chart, i: usize) -> Self {
                let mut v = Self::zero(chart);
                v.comps[i] = Expr::one();
                v
            }

            pub fn chart(&self) -> &Chart {
                &self.chart
            }

            pub fn comp(&self, i: usize) -> &Expr {
                &self.comps[i]
            }

            pub fn comps(&self) -> &[Expr] {
                &self.comps
            }

            pub fn set_comp(&mut self, i: usize, e: Expr) {
                self.comps[i] = e;
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.chart.same_as(&other.chart)?;
                Ok(Self {
                    chart: self.chart.clone(),
                    comps: self
                        .comps
                        .iter()
                        .zip(&other.comps)
                        .map(|(a, b)| Expr::add(a.clone(), b.clone()))
                        .collect(),
                })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.add(&other.neg())
            }

            pub fn neg(&self) -> Self {
                Self {
                    chart: self.chart.clone(),
                    comps: self.comps.iter().map(|c| Expr::neg(c.clone())).collect(),
                }
            }

            pub fn scale(&self, f: &Expr) -> Self {
                Self {
                    chart: self.chart.clone(),
                    comps: self
                        .comps
                        .iter()
                        .map(|c| Expr::mul(f.clone(), c.clone()))
                        .collect(),
                }
            }

            pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> Self {
                Self {
                    chart: self.chart.clone(),
                    comps: self.comps.iter().map(|c| f(c)).collect(),
                }
            }

            pub fn to_graded(&self) -> $graded {
                let mut out = $graded::zero(&self.chart, 1).expect("degree 1 fits");
                for (i, c) in self.comps.iter().enumerate() {
                    out.add_term(&[i], c.clone());
                }
                out
            }

            pub fn from_graded(g: &$graded) -> Result<Self> {
                if g.degree() != 1 {
                    return Err(Error::InvalidDegree(format!(
                        "expected degree 1, got {}",
                        g.degree()
                    )));
                }
                let mut out = Self::zero(g.chart());
                for (idx, c) in g.terms() {
                    out.comps[idx[0]] = c.clone();
                }
                Ok(out)
            }

            pub fn is_syntactically_zero(&self) -> bool {
                self.comps.iter().all(Expr::is_zero_const)
            }
        }
    };
}

dense_degree_one!(VectorField, MultiVector);
dense_degree_one!(OneForm, DiffForm);

impl OneForm {
    /// Natural pairing `a(X)`.
    pub fn apply(&self, x: &VectorField) -> Result<Expr> {
        self.chart.same_as(x.chart())?;
        Ok(Expr::sum(
            self.comps
                .iter()
                .zip(x.comps())
                .map(|(a, b)| Expr::mul(a.clone(), b.clone())),
        ))
    }
}

impl DiffForm {
    /// 0-form from a scalar function.
    pub fn scalar(chart: &Chart, f: Expr) -> Self {
        let mut out = DiffForm::zero(chart, 0).expect("degree 0 fits");
        out.add_term(&[], f);
        out
    }

    /// Interior product with the first slot: `(i(X)w)(...) = w(X, ...)`.
    pub fn interior(&self, x: &VectorField) -> Result<DiffForm> {
        self.chart.same_as(x.chart())?;
        if self.degree == 0 {
            return Err(Error::InvalidDegree(
                "interior product with a 0-form".into(),
            ));
        }
        let mut out = DiffForm::zero(&self.chart, self.degree - 1)?;
        for (idx, c) in &self.comps {
            for (m, &i) in idx.iter().enumerate() {
                let rest: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != m)
                    .map(|(_, &v)| v)
                    .collect();
                out.add_term(
                    &rest,
                    signed(Expr::mul(x.comp(i).clone(), c.clone()), removal_sign(m)),
                );
            }
        }
        Ok(out)
    }

    /// Full evaluation on `degree` vector fields.
    pub fn eval_on(&self, fields: &[&VectorField]) -> Result<Expr> {
        if fields.len() != self.degree {
            return Err(Error::InvalidDegree(format!(
                "evaluating a {}-form on {} fields",
                self.degree,
                fields.len()
            )));
        }
        if self.degree == 0 {
            return Ok(self.comp(&[]));
        }
        let mut acc = self.clone();
        for x in fields {
            acc = acc.interior(x)?;
        }
        Ok(acc.comp(&[]))
    }
}

impl MultiVector {
    /// Interior product of a 1-form with the first slot:
    /// `i(a)(X1^...^Xk) = sum_m (-1)^(m-1) a(Xm) X1^...(no Xm)...^Xk`.
    pub fn interior(&self, a: &OneForm) -> Result<MultiVector> {
        self.chart.same_as(a.chart())?;
        if self.degree == 0 {
            return Err(Error::InvalidDegree(
                "interior product with a 0-vector".into(),
            ));
        }
        let mut out = MultiVector::zero(&self.chart, self.degree - 1)?;
        for (idx, c) in &self.comps {
            for (m, &i) in idx.iter().enumerate() {
                let rest: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != m)
                    .map(|(_, &v)| v)
                    .collect();
                out.add_term(
                    &rest,
                    signed(Expr::mul(a.comp(i).clone(), c.clone()), removal_sign(m)),
                );
            }
        }
        Ok(out)
    }

    /// Full evaluation on `degree` one-forms.
    pub fn eval_on(&self, forms: &[&OneForm]) -> Result<Expr> {
        if forms.len() != self.degree {
            return Err(Error::InvalidDegree(format!(
                "evaluating a {}-vector on {} forms",
                self.degree,
                forms.len()
            )));
        }
        if self.degree == 0 {
            return Ok(self.comp(&[]));
        }
        let mut acc = self.clone();
        for a in forms {
            acc = acc.interior(a)?;
        }
        Ok(acc.comp(&[]))
    }
}
