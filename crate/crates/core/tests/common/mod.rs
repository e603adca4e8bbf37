//! Shared test support: seeded float points, the central-difference oracle,
//! and numeric re-implementations of the derivative-bearing operations.
//!
//! The numeric routes recompute each operation's component formula with
//! finite differences of the input component functions; they never call the
//! symbolic differentiation path they are checking.

#![allow(dead_code)]

use courant::cartan::{DiffForm, MultiVector, OneForm, VectorField};
use courant::chart::{Chart, FloatPoint};
use courant::courant::Section;
use courant::expr::{classify_zero, sample_point, Expr, SampleConfig};

pub const ORACLE_STEP: f64 = 9.5367431640625e-7; // 2^-20
pub const ORACLE_TOL: f64 = 1e-6;
pub const ORACLE_POINTS: usize = 10;

/// Seeded float points (rational draws converted to doubles).
pub fn float_points(chart: &Chart, count: usize) -> Vec<FloatPoint> {
    let cfg = SampleConfig::default();
    (0..count).map(|k| sample_point(chart, &cfg, k).to_f64()).collect()
}

pub fn assert_zero(e: &Expr, chart: &Chart) {
    let v = classify_zero(e, chart, &SampleConfig::default());
    assert!(v.is_exactly_zero(), "expected exact zero, got {v:?} for {e}");
}

pub fn assert_zero_sampled_ok(e: &Expr, chart: &Chart) {
    let v = classify_zero(e, chart, &SampleConfig::default());
    assert!(v.is_zero(), "expected zero verdict, got {v:?} for {e}");
}

pub fn assert_expr_eq(a: &Expr, b: &Expr, chart: &Chart) {
    assert_zero(&Expr::sub(a.clone(), b.clone()), chart);
}

pub fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ORACLE_TOL * 1.0_f64.max(a.abs()).max(b.abs())
}

/// Central difference of an expression in coordinate `i` at a float point.
pub fn central_diff(e: &Expr, chart: &Chart, p: &FloatPoint, i: usize) -> f64 {
    let plus = p.with_value(i, p.value(i) + ORACLE_STEP);
    let minus = p.with_value(i, p.value(i) - ORACLE_STEP);
    let f_plus = e.eval_f64(chart, &plus).expect("oracle evaluation");
    let f_minus = e.eval_f64(chart, &minus).expect("oracle evaluation");
    (f_plus - f_minus) / (2.0 * ORACLE_STEP)
}

fn eval(e: &Expr, chart: &Chart, p: &FloatPoint) -> f64 {
    e.eval_f64(chart, p).expect("oracle evaluation")
}

/// Numeric value of the full antisymmetric component of a sparse graded
/// tensor at an arbitrary index tuple.
fn form_comp_signed(w: &DiffForm, idx: &[usize], chart: &Chart, p: &FloatPoint) -> f64 {
    eval(&w.comp_signed(idx), chart, p)
}

fn multi_comp_signed(v: &MultiVector, idx: &[usize], chart: &Chart, p: &FloatPoint) -> f64 {
    eval(&v.comp_signed(idx), chart, p)
}

/// `[X,Y]^i = sum_j (X^j d_j Y^i - Y^j d_j X^i)` with numeric derivatives.
pub fn num_lie_bracket(
    x: &VectorField,
    y: &VectorField,
    i: usize,
    p: &FloatPoint,
) -> f64 {
    let chart = x.chart();
    let mut acc = 0.0;
    for j in 0..chart.dim() {
        acc += eval(x.comp(j), chart, p) * central_diff(y.comp(i), chart, p, j);
        acc -= eval(y.comp(j), chart, p) * central_diff(x.comp(i), chart, p, j);
    }
    acc
}

/// `(dw)(e_{k0},...,e_{kr}) = sum_m (-1)^m d_{k_m} w(e_{k0},..hat..,e_{kr})`
/// with numeric derivatives; the tuple must be strictly increasing.
pub fn num_ext_d(w: &DiffForm, idx: &[usize], p: &FloatPoint) -> f64 {
    let chart = w.chart();
    let mut acc = 0.0;
    for m in 0..idx.len() {
        let rest: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != m)
            .map(|(_, &v)| v)
            .collect();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let comp = w.comp(&rest);
        acc += sign * central_diff(&comp, chart, p, idx[m]);
    }
    acc
}

/// Lie derivative of a form on coordinate arguments:
/// `(L_X w)_J = sum_l X^l d_l w_J + sum_m sum_l (d_{J_m} X^l) w_{J:m->l}`.
pub fn num_lie_derivative_form(
    x: &VectorField,
    w: &DiffForm,
    idx: &[usize],
    p: &FloatPoint,
) -> f64 {
    let chart = x.chart();
    let n = chart.dim();
    let mut acc = 0.0;
    for l in 0..n {
        let comp = w.comp(idx);
        acc += eval(x.comp(l), chart, p) * central_diff(&comp, chart, p, l);
    }
    for m in 0..idx.len() {
        for l in 0..n {
            let mut swapped = idx.to_vec();
            swapped[m] = l;
            acc += central_diff(x.comp(l), chart, p, idx[m])
                * form_comp_signed(w, &swapped, chart, p);
        }
    }
    acc
}

/// Lie derivative of a multivector:
/// `(L_X P)^J = sum_l X^l d_l P^J - sum_m sum_l (d_l X^{J_m}) P^{J:m->l}`.
pub fn num_lie_derivative_multi(
    x: &VectorField,
    v: &MultiVector,
    idx: &[usize],
    p: &FloatPoint,
) -> f64 {
    let chart = x.chart();
    let n = chart.dim();
    let mut acc = 0.0;
    for l in 0..n {
        let comp = v.comp(idx);
        acc += eval(x.comp(l), chart, p) * central_diff(&comp, chart, p, l);
    }
    for m in 0..idx.len() {
        for l in 0..n {
            let mut swapped = idx.to_vec();
            swapped[m] = l;
            acc -= central_diff(x.comp(idx[m]), chart, p, l)
                * multi_comp_signed(v, &swapped, chart, p);
        }
    }
    acc
}

/// Schouten bracket of bivectors with numeric derivatives:
/// `[P,Q]^{abc} = sum_l cyc { P^{lc} d_l Q^{ab} + Q^{lc} d_l P^{ab} }`.
pub fn num_schouten(
    p_biv: &MultiVector,
    q_biv: &MultiVector,
    idx: &[usize; 3],
    p: &FloatPoint,
) -> f64 {
    let chart = p_biv.chart();
    let n = chart.dim();
    let mut acc = 0.0;
    let &[a, b, c] = idx;
    for l in 0..n {
        for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
            let q_comp = q_biv.comp_signed(&[i, j]);
            let p_comp = p_biv.comp_signed(&[i, j]);
            acc += multi_comp_signed(p_biv, &[l, k], chart, p)
                * central_diff(&q_comp, chart, p, l);
            acc += multi_comp_signed(q_biv, &[l, k], chart, p)
                * central_diff(&p_comp, chart, p, l);
        }
    }
    acc
}

/// Courant bracket with numeric derivatives: the vector part is the numeric
/// Lie bracket; the form part is
/// `(L_X b - L_Y a)_i + (1/2) d_i (b(X) - a(Y))`.
pub fn num_courant_bracket_vector(s1: &Section, s2: &Section, i: usize, p: &FloatPoint) -> f64 {
    num_lie_bracket(&s1.vector, &s2.vector, i, p)
}

pub fn num_courant_bracket_form(s1: &Section, s2: &Section, i: usize, p: &FloatPoint) -> f64 {
    let chart = s1.chart();
    let lxb = num_lie_derivative_form(&s1.vector, &s2.form.to_graded(), &[i], p);
    let lya = num_lie_derivative_form(&s2.vector, &s1.form.to_graded(), &[i], p);
    // w(s1,s2) = (a(Y) - b(X))/2, bracket adds d of it
    let omega = {
        let a_y = s1.form.apply(&s2.vector).expect("chart");
        let b_x = s2.form.apply(&s1.vector).expect("chart");
        Expr::mul(Expr::rat(1, 2), Expr::sub(a_y, b_x))
    };
    lxb - lya + central_diff(&omega, chart, p, i)
}

/// Jacobi defect of the function bracket induced by a bivector, computed by
/// nested brackets of the coordinate functions (the oracle for the Schouten
/// square).
pub fn jacobiator(p_biv: &MultiVector, f: &Expr, g: &Expr, h: &Expr) -> Expr {
    let bracket = |a: &Expr, b: &Expr| -> Expr {
        courant::cartan::poisson_bracket(p_biv, a, b).expect("bracket")
    };
    let mut acc = Expr::zero();
    for (a, b, c) in [(f, g, h), (g, h, f), (h, f, g)] {
        acc = Expr::add(acc, bracket(&bracket(a, b), c));
    }
    acc
}

/// All strictly increasing index tuples of length `k` in `0..n`.
pub fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in start..n {
            prefix.push(i);
            rec(i + 1, n, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Deterministic random polynomial of degree <= 2 with integer coefficients
/// in [-3, 3], driven by a simple splitmix stream.
pub struct CoeffStream {
    state: u64,
}

impl CoeffStream {
    pub fn new(seed: u64) -> Self {
        CoeffStream { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn coeff(&mut self) -> i64 {
        (self.next_u64() % 7) as i64 - 3
    }

    /// Polynomial of degree <= 2 over the chart coordinates.
    pub fn poly(&mut self, chart: &Chart) -> Expr {
        let mut acc = Expr::int(self.coeff());
        for i in 0..chart.dim() {
            acc = Expr::add(
                acc,
                Expr::mul(Expr::int(self.coeff()), Expr::coord(chart.name(i))),
            );
            for j in i..chart.dim() {
                acc = Expr::add(
                    acc,
                    Expr::mul(
                        Expr::int(self.coeff()),
                        Expr::mul(Expr::coord(chart.name(i)), Expr::coord(chart.name(j))),
                    ),
                );
            }
        }
        acc
    }

    pub fn vector_field(&mut self, chart: &Chart) -> VectorField {
        VectorField::new(chart, (0..chart.dim()).map(|_| self.poly(chart)).collect())
            .expect("dimension matches")
    }

    pub fn one_form(&mut self, chart: &Chart) -> OneForm {
        OneForm::new(chart, (0..chart.dim()).map(|_| self.poly(chart)).collect())
            .expect("dimension matches")
    }

    pub fn section(&mut self, chart: &Chart) -> Section {
        Section::new(self.vector_field(chart), self.one_form(chart)).expect("chart")
    }
}
