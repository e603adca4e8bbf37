//! Named example structures shared by the test suites and the bundled input
//! files: graphs of closed and non-closed 2-forms, linear and non-integrable
//! bivectors, and block coupling data.

use crate::cartan::{DiffForm, FrameSplit, MultiVector};
use crate::chart::Chart;
use crate::coupling::GeometricData;
use crate::courant::DiracFrame;
use crate::expr::{parse_expr, Expr};

fn e(chart: &Chart, s: &str) -> Expr {
    parse_expr(s, chart).expect("catalog expression parses")
}

/// `(x, y)` with no foliation.
pub fn chart_r2() -> Chart {
    Chart::new(vec!["x", "y"]).unwrap()
}

/// `(x, y)` foliated by `y`.
pub fn chart_r2_foliated() -> Chart {
    Chart::adapted(vec!["x", "y"], &["y"]).unwrap()
}

/// `(x1, x2, x3)` with no foliation.
pub fn chart_r3() -> Chart {
    Chart::new(vec!["x1", "x2", "x3"]).unwrap()
}

/// `(x1, x2, x3, x4)` with no foliation.
pub fn chart_r4() -> Chart {
    Chart::new(vec!["x1", "x2", "x3", "x4"]).unwrap()
}

/// `(x1, x2, y1, y2)` foliated by `(y1, y2)`.
pub fn chart_r4_foliated() -> Chart {
    Chart::adapted(vec!["x1", "x2", "y1", "y2"], &["y1", "y2"]).unwrap()
}

/// `(y1, y2, y3)`: every coordinate along the leaves (a point leaf at 0).
pub fn chart_r3_all_leaf() -> Chart {
    Chart::adapted(vec!["y1", "y2", "y3"], &["y1", "y2", "y3"]).unwrap()
}

/// The constant symplectic form `dx ^ dy` on the plane.
pub fn symplectic_r2(chart: &Chart) -> DiffForm {
    let mut tau = DiffForm::zero(chart, 2).unwrap();
    tau.add_term(&[0, 1], Expr::one());
    tau
}

/// The block form `dx1 ^ dx2 + dy1 ^ dy2` on the foliated 4-space.
pub fn tau_block(chart: &Chart) -> DiffForm {
    let mut tau = DiffForm::zero(chart, 2).unwrap();
    tau.add_term(&[0, 1], Expr::one());
    tau.add_term(&[2, 3], Expr::one());
    tau
}

/// The non-closed form `x3 dx1 ^ dx2` on 3-space.
pub fn nonclosed_tau_r3(chart: &Chart) -> DiffForm {
    let mut tau = DiffForm::zero(chart, 2).unwrap();
    tau.add_term(&[0, 1], e(chart, "x3"));
    tau
}

/// The closed form `x2 dx1 ^ dx2` on 3-space (the coefficient repeats a
/// wedge factor, so its differential vanishes).
pub fn closed_x2_tau_r3(chart: &Chart) -> DiffForm {
    let mut tau = DiffForm::zero(chart, 2).unwrap();
    tau.add_term(&[0, 1], e(chart, "x2"));
    tau
}

/// The degenerate closed form `dx1 ^ dx2` on 3-space.
pub fn degenerate_tau_r3(chart: &Chart) -> DiffForm {
    let mut tau = DiffForm::zero(chart, 2).unwrap();
    tau.add_term(&[0, 1], Expr::one());
    tau
}

/// The rank-jumping form `x1 dx1 ^ dx2` on 3-space.
pub fn jumping_tau_r3(chart: &Chart) -> DiffForm {
    let mut tau = DiffForm::zero(chart, 2).unwrap();
    tau.add_term(&[0, 1], e(chart, "x1"));
    tau
}

/// The linear bivector `c3 d1^d2 + c1 d2^d3 + c2 d3^d1` on a 3-chart with
/// coordinate names taken from the chart.
pub fn so3_bivector(chart: &Chart) -> MultiVector {
    let n = |i: usize| chart.name(i).to_string();
    let mut p = MultiVector::zero(chart, 2).unwrap();
    p.add_term(&[0, 1], e(chart, &n(2)));
    p.add_term(&[1, 2], e(chart, &n(0)));
    p.add_term(&[2, 0], e(chart, &n(1)));
    p
}

/// The bivector `d1^d2 + x1 d3^d4`, which violates the Jacobi identity.
pub fn jacobi_violating_bivector(chart: &Chart) -> MultiVector {
    let mut p = MultiVector::zero(chart, 2).unwrap();
    p.add_term(&[0, 1], Expr::one());
    p.add_term(&[2, 3], e(chart, "x1"));
    p
}

/// The constant bivector `d1^d2` on any chart of dimension >= 2.
pub fn constant_bivector(chart: &Chart) -> MultiVector {
    let mut p = MultiVector::zero(chart, 2).unwrap();
    p.add_term(&[0, 1], Expr::one());
    p
}

/// The constant block bivector `dx1^dx2 + dy1^dy2` on the foliated 4-space.
pub fn p_block(chart: &Chart) -> MultiVector {
    let mut p = MultiVector::zero(chart, 2).unwrap();
    p.add_term(&[0, 1], Expr::one());
    p.add_term(&[2, 3], Expr::one());
    p
}

/// The leaf-tangent bivector `dy1 ^ dy2` on the foliated 4-space.
pub fn leaf_bivector(chart: &Chart) -> MultiVector {
    let mut p = MultiVector::zero(chart, 2).unwrap();
    p.add_term(&[2, 3], Expr::one());
    p
}

/// Coupling data on the foliated 4-space: coordinate split,
/// `sigma = (1 + x1^2) dx1^dx2`, `pi = (1 + y1^2) dy1^dy2`.
pub fn coupling_data(chart: &Chart) -> GeometricData {
    let split = FrameSplit::coordinate(chart);
    let mut sigma = DiffForm::zero(chart, 2).unwrap();
    sigma.add_term(&[0, 1], e(chart, "1 + x1^2"));
    let mut pi = MultiVector::zero(chart, 2).unwrap();
    pi.add_term(&[2, 3], e(chart, "1 + y1^2"));
    GeometricData::new(split, sigma, pi).unwrap()
}

/// The invariance-breaking mutation: `pi = x1 dy1^dy2`.
pub fn coupling_data_bad_invariance(chart: &Chart) -> GeometricData {
    let split = FrameSplit::coordinate(chart);
    let mut sigma = DiffForm::zero(chart, 2).unwrap();
    sigma.add_term(&[0, 1], e(chart, "1 + x1^2"));
    let mut pi = MultiVector::zero(chart, 2).unwrap();
    pi.add_term(&[2, 3], e(chart, "x1"));
    GeometricData::new(split, sigma, pi).unwrap()
}

/// The curvature-breaking mutation: `sigma = y1 dx1^dx2` with an invertible
/// leaf bivector.
pub fn coupling_data_bad_curvature(chart: &Chart) -> GeometricData {
    let split = FrameSplit::coordinate(chart);
    let mut sigma = DiffForm::zero(chart, 2).unwrap();
    sigma.add_term(&[0, 1], e(chart, "y1"));
    let mut pi = MultiVector::zero(chart, 2).unwrap();
    pi.add_term(&[2, 3], e(chart, "1 + y1^2"));
    GeometricData::new(split, sigma, pi).unwrap()
}

/// Leaf-adapted data on the foliated 4-space with the leaf at `y = 0`:
/// `sigma = dx1^dx2`, `pi = y1 dy1^dy2`.
pub fn leaf_data(chart: &Chart) -> GeometricData {
    let split = FrameSplit::coordinate(chart);
    let mut sigma = DiffForm::zero(chart, 2).unwrap();
    sigma.add_term(&[0, 1], Expr::one());
    let mut pi = MultiVector::zero(chart, 2).unwrap();
    pi.add_term(&[2, 3], e(chart, "y1"));
    GeometricData::new(split, sigma, pi).unwrap()
}

/// Leaf-adapted data whose leaf coefficient is quadratic: `pi = (y1 + y1^2) dy1^dy2`.
pub fn leaf_data_quadratic(chart: &Chart) -> GeometricData {
    let split = FrameSplit::coordinate(chart);
    let mut sigma = DiffForm::zero(chart, 2).unwrap();
    sigma.add_term(&[0, 1], Expr::one());
    let mut pi = MultiVector::zero(chart, 2).unwrap();
    pi.add_term(&[2, 3], e(chart, "y1 + y1^2"));
    GeometricData::new(split, sigma, pi).unwrap()
}

/// `x3 d1 ^ d2` on 3-space.
pub fn x3_bivector(chart: &Chart) -> MultiVector {
    let mut p = MultiVector::zero(chart, 2).unwrap();
    p.add_term(&[0, 1], e(chart, "x3"));
    p
}

/// `d1^d2 + d3^d4` on 4-space.
pub fn p22_bivector(chart: &Chart) -> MultiVector {
    let mut p = MultiVector::zero(chart, 2).unwrap();
    p.add_term(&[0, 1], Expr::one());
    p.add_term(&[2, 3], Expr::one());
    p
}

/// Every catalog structure that is a Dirac structure, with labels; used by
/// the oracle and parity suites.
pub fn dirac_catalog() -> Vec<(String, DiracFrame)> {
    let mut out = Vec::new();
    out.push((
        "symplectic_r2".to_string(),
        DiracFrame::graph_of_presymplectic(&symplectic_r2(&chart_r2())).unwrap(),
    ));
    out.push((
        "tau_block_r4".to_string(),
        DiracFrame::graph_of_presymplectic(&tau_block(&chart_r4_foliated())).unwrap(),
    ));
    out.push((
        "degenerate_tau_r3".to_string(),
        DiracFrame::graph_of_presymplectic(&degenerate_tau_r3(&chart_r3())).unwrap(),
    ));
    out.push((
        "so3_r3".to_string(),
        DiracFrame::graph_of_poisson(&so3_bivector(&chart_r3())).unwrap(),
    ));
    out.push((
        "p_block_r4".to_string(),
        DiracFrame::graph_of_poisson(&p_block(&chart_r4_foliated())).unwrap(),
    ));
    out.push((
        "x3_bivector_r3".to_string(),
        DiracFrame::graph_of_poisson(&x3_bivector(&chart_r3())).unwrap(),
    ));
    out.push((
        "cotangent_r3".to_string(),
        DiracFrame::graph_of_poisson(&MultiVector::zero(&chart_r3(), 2).unwrap()).unwrap(),
    ));
    out
}

/// Catalog structures that are almost Dirac but fail bracket closure.
pub fn non_dirac_catalog() -> Vec<(String, DiracFrame)> {
    vec![
        (
            "jacobi_violating_r4".to_string(),
            DiracFrame::graph_of_poisson(&jacobi_violating_bivector(&chart_r4())).unwrap(),
        ),
        (
            "nonclosed_tau_r3".to_string(),
            DiracFrame::graph_of_presymplectic(&nonclosed_tau_r3(&chart_r3())).unwrap(),
        ),
    ]
}
