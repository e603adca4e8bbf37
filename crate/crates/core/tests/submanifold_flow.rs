//! Submanifold calculus: pointwise restriction, kernel and properness,
//! induced structures, the restricted bracket and its second fundamental
//! form, the cosymplectic verdicts, the contravariant derivative, and the
//! Gauss splitting.

mod common;

use common::*;
use courant::cartan::{OneForm, VectorField};
use courant::catalog;
use courant::chart::{Chart, Point};
use courant::coupling::{poisson_bivector_of, reconstruct};
use courant::courant::{
    check_dirac, courant_bracket, fiber_g, DiracFrame, Section,
};
use courant::expr::{classify_zero, parse_expr, sample_point, Expr, SampleConfig};
use courant::report::CheckStatus;
use courant::scalar::Scalar;
use courant::submanifold::{
    bracket_a, contravariant_derivative, cosymplectic_verdicts, gauss_split, induced_structure,
    kernel_and_properness, restrict_at_point, second_fundamental_form,
    spanning_admissible_sections, ExtensionRecipe, Metric, RestrictionDirection, Submanifold,
};

fn e(chart: &Chart, s: &str) -> Expr {
    parse_expr(s, chart).unwrap()
}

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

#[test]
fn pointwise_restriction_of_the_symplectic_plane() {
    let chart = catalog::chart_r2();
    let n = Submanifold::new(&chart, &["y"]).unwrap();
    let frame = DiracFrame::graph_of_presymplectic(&catalog::symplectic_r2(&chart)).unwrap();
    let p = Point::origin(&chart);
    // pullback: sections tangent to the axis are (d_x, dy); dy pulls back to 0
    let pull = restrict_at_point(&frame, &n, &p, RestrictionDirection::Pullback).unwrap();
    assert_eq!(pull.basis.rows, 1);
    assert_eq!(pull.basis.row(0), &[s(1), s(0)]);
    // pushforward: covectors annihilating d_y are multiples of dx, forcing
    // the tangent part into the normal direction
    let push = restrict_at_point(&frame, &n, &p, RestrictionDirection::Pushforward).unwrap();
    assert_eq!(push.basis.rows, 1);
    assert_eq!(push.basis.row(0), &[s(0), s(1)]);
}

#[test]
fn pointwise_restriction_of_the_constant_bivector() {
    let chart = catalog::chart_r2();
    let n = Submanifold::new(&chart, &["y"]).unwrap();
    let p_biv = catalog::constant_bivector(&chart);
    let frame = DiracFrame::graph_of_poisson(&p_biv).unwrap();
    let p = Point::origin(&chart);
    let pull = restrict_at_point(&frame, &n, &p, RestrictionDirection::Pullback).unwrap();
    assert_eq!(pull.basis.rows, 1);
    assert_eq!(pull.basis.row(0), &[s(1), s(0)]);
}

#[test]
fn restrictions_are_maximal_isotropic() {
    let cfg = SampleConfig::default();
    let fixtures: Vec<(DiracFrame, Submanifold)> = vec![
        {
            let chart = catalog::chart_r4_foliated();
            (
                DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap(),
                Submanifold::new(&chart, &["y1", "y2"]).unwrap(),
            )
        },
        {
            let chart = catalog::chart_r3();
            (
                DiracFrame::graph_of_poisson(&catalog::x3_bivector(&chart)).unwrap(),
                Submanifold::new(&chart, &["x3"]).unwrap(),
            )
        },
        {
            let chart = catalog::chart_r4();
            (
                DiracFrame::graph_of_poisson(&catalog::p22_bivector(&chart)).unwrap(),
                Submanifold::new(&chart, &["x3", "x4"]).unwrap(),
            )
        },
    ];
    for (frame, n) in fixtures {
        let chart = frame.chart();
        for k in 0..4 {
            let p = n.project_point(&sample_point(chart, &cfg, k));
            for direction in [RestrictionDirection::Pullback, RestrictionDirection::Pushforward] {
                let sub = restrict_at_point(&frame, &n, &p, direction).unwrap();
                assert_eq!(sub.basis.rank(), n.dim(), "restriction has full rank");
                for r1 in sub.basis.rows_iter() {
                    for r2 in sub.basis.rows_iter() {
                        assert!(fiber_g(r1, r2).is_zero(), "restriction is isotropic");
                    }
                }
            }
        }
    }
}

#[test]
fn restriction_rejects_points_off_the_submanifold() {
    let chart = catalog::chart_r2();
    let n = Submanifold::new(&chart, &["y"]).unwrap();
    let frame = DiracFrame::graph_of_presymplectic(&catalog::symplectic_r2(&chart)).unwrap();
    let off = Point::new(&chart, vec![Scalar::zero(), Scalar::one()]).unwrap();
    assert!(restrict_at_point(&frame, &n, &off, RestrictionDirection::Pullback).is_err());
}

#[test]
fn kernel_of_the_symplectic_plane_along_the_axis() {
    let chart = catalog::chart_r2();
    let cfg = SampleConfig::default();
    let n = Submanifold::new(&chart, &["y"]).unwrap();
    let frame = DiracFrame::graph_of_presymplectic(&catalog::symplectic_r2(&chart)).unwrap();
    let verdict = kernel_and_properness(&frame, &n, &cfg).unwrap();
    // K(N) = TN: every tangent section pairs with a conormal covector
    assert!(verdict.kernel_dims.iter().all(|d| *d == Some(1)));
}

#[test]
fn properly_normalized_bivector_graph() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let frame = DiracFrame::graph_of_poisson(&catalog::x3_bivector(&chart)).unwrap();
    let verdict = kernel_and_properness(&frame, &n, &cfg).unwrap();
    assert!(verdict.kernel_dims.iter().all(|d| *d == Some(0)));
    assert_eq!(verdict.properly_normalized, CheckStatus::Pass);
    assert_eq!(verdict.poisson_kernel, Some(CheckStatus::Pass));
}

#[test]
fn rotation_bivector_fails_properness_with_witness() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let frame = DiracFrame::graph_of_poisson(&catalog::so3_bivector(&chart)).unwrap();
    let verdict = kernel_and_properness(&frame, &n, &cfg).unwrap();
    assert_eq!(verdict.poisson_kernel, Some(CheckStatus::Fail));
    let record = verdict
        .report
        .find("submanifold.poisson_kernel")
        .expect("kernel condition recorded");
    assert_eq!(record.status, CheckStatus::Fail);
    assert!(!record.witnesses.is_empty(), "failure carries a witness");
    // the witness exhibits the sharp image of the conormal direction
    let rendered = &record.witnesses[0].values[0];
    assert!(rendered.contains("d/d"), "witness renders a vector: {rendered}");
}

#[test]
fn induced_structures_match_the_expected_graphs() {
    let cfg = SampleConfig::default();
    // block form restricts to its normal block
    let chart = catalog::chart_r4_foliated();
    let frame = DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["y1", "y2"]).unwrap();
    let induced = induced_structure(&frame, &n, &cfg).unwrap();
    assert!(induced.report.passed());
    let sub_chart = n.sub_chart().unwrap();
    let mut expected_tau = courant::cartan::DiffForm::zero(&sub_chart, 2).unwrap();
    expected_tau.add_term(&[0, 1], Expr::one());
    let expected = DiracFrame::graph_of_presymplectic(&expected_tau).unwrap();
    for k in 0..cfg.count {
        let p = sample_point(&sub_chart, &cfg, k);
        assert!(induced
            .frame
            .matrix_at(&p)
            .unwrap()
            .row_space_equal(&expected.matrix_at(&p).unwrap()));
    }
    assert!(check_dirac(&induced.frame, &cfg).passed());
    // the vanishing-on-N bivector induces the cotangent frame
    let chart = catalog::chart_r3();
    let frame = DiracFrame::graph_of_poisson(&catalog::x3_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let induced = induced_structure(&frame, &n, &cfg).unwrap();
    assert!(induced.report.passed());
    let pi_n = poisson_bivector_of(&induced.frame).unwrap().unwrap();
    assert!(pi_n.is_syntactically_zero() || pi_n.terms().all(|(_, c)| c.is_zero_const()));
    // the constant block bivector restricts to its tangent block
    let chart = catalog::chart_r4();
    let frame = DiracFrame::graph_of_poisson(&catalog::p22_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3", "x4"]).unwrap();
    let induced = induced_structure(&frame, &n, &cfg).unwrap();
    let pi_n = poisson_bivector_of(&induced.frame).unwrap().unwrap();
    let sub_chart = n.sub_chart().unwrap();
    assert_expr_eq(&pi_n.comp(&[0, 1]), &Expr::one(), &sub_chart);
    assert!(check_dirac(&induced.frame, &cfg).passed());
}

#[test]
fn properly_normalized_restrictions_agree_both_ways() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let frame = DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["y1", "y2"]).unwrap();
    for k in 0..cfg.count {
        let p = n.project_point(&sample_point(&chart, &cfg, k));
        let pull = restrict_at_point(&frame, &n, &p, RestrictionDirection::Pullback).unwrap();
        let push = restrict_at_point(&frame, &n, &p, RestrictionDirection::Pushforward).unwrap();
        assert!(pull.basis.row_space_equal(&push.basis));
    }
}

#[test]
fn restricted_bracket_worked_example() {
    // [(0,dx1),(0,dx2)]_A = (0, dx3) on N for the vanishing-on-N bivector
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let frame = DiracFrame::graph_of_poisson(&catalog::x3_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let s1 = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 0)).unwrap();
    let s2 = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 1)).unwrap();
    for recipe in [ExtensionRecipe::Constant, ExtensionRecipe::Scaled] {
        let b = bracket_a(&frame, &n, &s1, &s2, recipe, &cfg).unwrap();
        assert!(b.vector.is_syntactically_zero() || b.vector.comps().iter().all(|c| {
            classify_zero(c, &chart, &cfg).is_zero()
        }));
        assert_expr_eq(b.form.comp(0), &Expr::zero(), &chart);
        assert_expr_eq(b.form.comp(1), &Expr::zero(), &chart);
        assert_expr_eq(b.form.comp(2), &Expr::one(), &chart);
    }
}

#[test]
fn restricted_bracket_is_extension_independent() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let frame = reconstruct(&catalog::coupling_data(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["y1", "y2"]).unwrap();
    let spanning = spanning_admissible_sections(&frame, &n);
    assert!(spanning.len() >= 2);
    for i in 0..spanning.len() {
        for j in (i + 1)..spanning.len() {
            let plain = bracket_a(&frame, &n, &spanning[i], &spanning[j], ExtensionRecipe::Constant, &cfg)
                .unwrap();
            let scaled = bracket_a(&frame, &n, &spanning[i], &spanning[j], ExtensionRecipe::Scaled, &cfg)
                .unwrap();
            let diff = plain.sub(&scaled).unwrap();
            for c in diff.vector.comps().iter().chain(diff.form.comps()) {
                assert!(classify_zero(c, &chart, &cfg).is_exactly_zero());
            }
        }
    }
}

#[test]
fn restricted_bracket_leibniz_instance() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let frame = DiracFrame::graph_of_poisson(&catalog::x3_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let s1 = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 0)).unwrap();
    let t = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 1)).unwrap();
    let f = e(&chart, "x1");
    let ft = t.scale(&f);
    let lhs = bracket_a(&frame, &n, &s1, &ft, ExtensionRecipe::Constant, &cfg).unwrap();
    let rhs = bracket_a(&frame, &n, &s1, &t, ExtensionRecipe::Constant, &cfg)
        .unwrap()
        .scale(&f);
    // (rho s1) f = 0 and g(s1, t) = 0 on this fixture, so the Leibniz
    // correction vanishes
    let diff = lhs.sub(&rhs).unwrap();
    for c in diff.vector.comps().iter().chain(diff.form.comps()) {
        assert!(classify_zero(c, &chart, &cfg).is_exactly_zero());
    }
}

#[test]
fn restricted_bracket_is_a_morphism_onto_the_induced_bracket() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let frame = reconstruct(&catalog::coupling_data(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["y1", "y2"]).unwrap();
    let induced = induced_structure(&frame, &n, &cfg).unwrap();
    let sub_chart = n.sub_chart().unwrap();
    let spanning = spanning_admissible_sections(&frame, &n);
    let project = |sec: &Section| -> Section {
        let comps_v: Vec<Expr> = n
            .tangent_indices()
            .iter()
            .map(|&t| n.on_n(sec.vector.comp(t)))
            .collect();
        let comps_f: Vec<Expr> = n
            .tangent_indices()
            .iter()
            .map(|&t| n.on_n(sec.form.comp(t)))
            .collect();
        Section::new(
            VectorField::new(&sub_chart, comps_v).unwrap(),
            OneForm::new(&sub_chart, comps_f).unwrap(),
        )
        .unwrap()
    };
    for i in 0..spanning.len() {
        for j in (i + 1)..spanning.len() {
            let ambient = bracket_a(&frame, &n, &spanning[i], &spanning[j], ExtensionRecipe::Constant, &cfg)
                .unwrap();
            let lhs = project(&ambient);
            let rhs = courant_bracket(&project(&spanning[i]), &project(&spanning[j])).unwrap();
            let diff = lhs.sub(&rhs).unwrap();
            for c in diff.vector.comps().iter().chain(diff.form.comps()) {
                assert!(classify_zero(c, &sub_chart, &cfg).is_exactly_zero());
            }
        }
    }
    let _ = induced;
}

#[test]
fn second_fundamental_form_routes_agree() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let frame = DiracFrame::graph_of_poisson(&catalog::x3_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let s1 = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 0)).unwrap();
    let s2 = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 1)).unwrap();
    let b = second_fundamental_form(&frame, &n, &s1, &s2, &cfg).unwrap();
    assert!(
        b.report.passed(),
        "{:?}",
        b.report
            .checks
            .iter()
            .filter(|c| c.status != CheckStatus::Pass)
            .collect::<Vec<_>>()
    );
    // |B(dx1,dx2)(d_3)| = 1, with the sign fixed by the bracket route
    assert_expr_eq(&b.components[0], &Expr::one(), &chart);
}

#[test]
fn second_fundamental_form_vanishes_for_constant_bivectors() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4();
    let frame = DiracFrame::graph_of_poisson(&catalog::p22_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3", "x4"]).unwrap();
    let spanning = spanning_admissible_sections(&frame, &n);
    for i in 0..spanning.len() {
        for j in (i + 1)..spanning.len() {
            let b = second_fundamental_form(&frame, &n, &spanning[i], &spanning[j], &cfg).unwrap();
            for c in &b.components {
                assert!(classify_zero(c, &chart, &cfg).is_exactly_zero());
            }
        }
    }
}

#[test]
fn cosymplectic_verdicts_on_the_catalog() {
    let cfg = SampleConfig::default();
    // constant block bivector: complement exists, form vanishes
    let chart = catalog::chart_r4();
    let frame = DiracFrame::graph_of_poisson(&catalog::p22_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3", "x4"]).unwrap();
    let verdict = cosymplectic_verdicts(&frame, &n, &cfg).unwrap();
    assert_eq!(verdict.cosymplectic, CheckStatus::Pass);
    assert_eq!(verdict.totally_dirac, CheckStatus::Pass);
    // the vanishing-on-N bivector: no complement, nonzero form
    let chart = catalog::chart_r3();
    let frame = DiracFrame::graph_of_poisson(&catalog::x3_bivector(&chart)).unwrap();
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let verdict = cosymplectic_verdicts(&frame, &n, &cfg).unwrap();
    assert_eq!(verdict.cosymplectic, CheckStatus::Fail);
    assert_eq!(verdict.totally_dirac, CheckStatus::Fail);
    // a constant symplectic form along a coordinate symplectic subspace
    let chart = catalog::chart_r4();
    let mut tau = courant::cartan::DiffForm::zero(&chart, 2).unwrap();
    tau.add_term(&[0, 1], Expr::one());
    tau.add_term(&[2, 3], Expr::one());
    let frame = DiracFrame::graph_of_presymplectic(&tau).unwrap();
    let n = Submanifold::new(&chart, &["x3", "x4"]).unwrap();
    let verdict = cosymplectic_verdicts(&frame, &n, &cfg).unwrap();
    assert_eq!(verdict.totally_dirac, CheckStatus::Pass);
}

#[test]
fn contravariant_derivative_examples() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let g = Metric::euclidean(&chart);
    // constant bivector: every term vanishes
    let constant = catalog::constant_bivector(&chart);
    let d = contravariant_derivative(
        &constant,
        &g,
        &OneForm::basis(&chart, 0),
        &OneForm::basis(&chart, 1),
    )
    .unwrap();
    for c in d.comps() {
        assert!(classify_zero(c, &chart, &cfg).is_exactly_zero());
    }
    // the vanishing-on-N bivector: the conormal component is 1/2
    let p_biv = catalog::x3_bivector(&chart);
    let d12 = contravariant_derivative(
        &p_biv,
        &g,
        &OneForm::basis(&chart, 0),
        &OneForm::basis(&chart, 1),
    )
    .unwrap();
    assert_expr_eq(d12.comp(2), &Expr::rat(1, 2), &chart);
    // torsion: D_a b - D_b a = {a, b}
    let d21 = contravariant_derivative(
        &p_biv,
        &g,
        &OneForm::basis(&chart, 1),
        &OneForm::basis(&chart, 0),
    )
    .unwrap();
    let torsion = d12.sub(&d21).unwrap();
    let bracket = courant::cartan::form_bracket(
        &p_biv,
        &OneForm::basis(&chart, 0),
        &OneForm::basis(&chart, 1),
    )
    .unwrap();
    for (a, b) in torsion.comps().iter().zip(bracket.comps()) {
        assert_expr_eq(a, b, &chart);
    }
}

#[test]
fn contravariant_derivative_axioms_for_all_pairs() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let g = Metric::euclidean(&chart);
    let p_biv = catalog::x3_bivector(&chart);
    for i in 0..3 {
        for j in 0..3 {
            let a = OneForm::basis(&chart, i);
            let b = OneForm::basis(&chart, j);
            // torsion residual
            let dab = contravariant_derivative(&p_biv, &g, &a, &b).unwrap();
            let dba = contravariant_derivative(&p_biv, &g, &b, &a).unwrap();
            let bracket = courant::cartan::form_bracket(&p_biv, &a, &b).unwrap();
            let torsion = dab.sub(&dba).unwrap().sub(&bracket).unwrap();
            for c in torsion.comps() {
                assert!(classify_zero(c, &chart, &cfg).is_exactly_zero());
            }
            // metric compatibility residual for every probe form
            for k in 0..3 {
                let gamma = OneForm::basis(&chart, k);
                let sharp_gamma = courant::cartan::sharp(&p_biv, &gamma).unwrap();
                let lhs = courant::cartan::apply_field(&sharp_gamma, &g.pair_forms(&a, &b));
                let dga = contravariant_derivative(&p_biv, &g, &gamma, &a).unwrap();
                let dgb = contravariant_derivative(&p_biv, &g, &gamma, &b).unwrap();
                let rhs = Expr::add(g.pair_forms(&dga, &b), g.pair_forms(&a, &dgb));
                assert!(
                    classify_zero(&Expr::sub(lhs, rhs), &chart, &cfg).is_exactly_zero()
                );
            }
        }
    }
}

#[test]
fn degenerate_metric_is_rejected() {
    let chart = catalog::chart_r2();
    let entries = vec![
        vec![Expr::one(), Expr::one()],
        vec![Expr::one(), Expr::one()],
    ];
    assert!(Metric::new(&chart, entries).is_err());
    let asym = vec![
        vec![Expr::one(), Expr::one()],
        vec![Expr::zero(), Expr::one()],
    ];
    assert!(Metric::new(&chart, asym).is_err());
}

#[test]
fn gauss_split_of_the_vanishing_bivector() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let g = Metric::euclidean(&chart);
    let p_biv = catalog::x3_bivector(&chart);
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let split = gauss_split(
        &p_biv,
        &g,
        &n,
        &OneForm::basis(&chart, 0),
        &OneForm::basis(&chart, 1),
        &cfg,
    )
    .unwrap();
    assert!(
        split.report.passed(),
        "{:?}",
        split
            .report
            .checks
            .iter()
            .filter(|c| c.status != CheckStatus::Pass)
            .collect::<Vec<_>>()
    );
    // the induced bivector vanishes, so the difference is the ambient
    // derivative with conormal component 1/2
    for c in split.induced.comps() {
        assert!(classify_zero(c, &chart, &cfg).is_exactly_zero());
    }
    assert_expr_eq(split.psi.comp(2), &Expr::rat(1, 2), &chart);
}

#[test]
fn gauss_split_skew_part_is_half_the_form() {
    let chart = catalog::chart_r3();
    let cfg = SampleConfig::default();
    let g = Metric::euclidean(&chart);
    let p_biv = catalog::x3_bivector(&chart);
    let n = Submanifold::new(&chart, &["x3"]).unwrap();
    let s1 = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 0)).unwrap();
    let s2 = Section::new(VectorField::zero(&chart), OneForm::basis(&chart, 1)).unwrap();
    let frame = DiracFrame::graph_of_poisson(&p_biv).unwrap();
    let b = second_fundamental_form(&frame, &n, &s1, &s2, &cfg).unwrap();
    let split = gauss_split(
        &p_biv,
        &g,
        &n,
        &OneForm::basis(&chart, 0),
        &OneForm::basis(&chart, 1),
        &cfg,
    )
    .unwrap();
    let split_ba = gauss_split(
        &p_biv,
        &g,
        &n,
        &OneForm::basis(&chart, 1),
        &OneForm::basis(&chart, 0),
        &cfg,
    )
    .unwrap();
    // skew(Psi)(d_3) = (1/2) B(dx1,dx2)(d_3)
    let skew = Expr::mul(
        Expr::rat(1, 2),
        Expr::sub(split.psi.comp(2).clone(), split_ba.psi.comp(2).clone()),
    );
    let half_b = Expr::mul(Expr::rat(1, 2), b.components[0].clone());
    assert_expr_eq(&skew, &half_b, &chart);
}
