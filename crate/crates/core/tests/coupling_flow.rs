//! Coupling layer: the normal distribution, coupling verdicts, splitting,
//! extraction and reconstruction round trips, and the equivalence of the
//! integrability condition sets with bracket closure.

mod common;

use common::*;
use courant::cartan::{
    ext_d, schouten_bracket, to_bigraded, DiffForm, FrameSplit, MultiVector, VectorField,
};
use courant::catalog;
use courant::chart::Chart;
use courant::coupling::{
    check_integrability, check_integrability_almost_coupling, check_integrability_data,
    check_integrability_poisson, check_integrability_presymplectic, decompose_almost_coupling,
    extract_geometric_data, is_coupling, normal_distribution, reconstruct, GeometricData,
    IntegrabilityInput,
};
use courant::courant::{check_almost_dirac, check_dirac, DiracFrame, Section};
use courant::expr::{classify_zero, parse_expr, sample_point, Expr, SampleConfig};
use courant::report::CheckStatus;

fn e(chart: &Chart, s: &str) -> Expr {
    parse_expr(s, chart).unwrap()
}

#[test]
fn normal_distribution_of_block_form() {
    let chart = catalog::chart_r4_foliated();
    let cfg = SampleConfig::default();
    let frame = DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap();
    let nd = normal_distribution(&frame, &cfg);
    assert!(nd.report.passed());
    assert!(nd.h_dims.iter().all(|d| *d == Some(2)));
    assert!(nd.kstar_dims.iter().all(|d| *d == Some(2)));
    assert_eq!(nd.duality, CheckStatus::Pass);
    // constant picture: both symbolic frames are solved
    let split = nd.h_split.expect("normal frame solved");
    for row in split.coefficients() {
        for a in row {
            assert_zero(a, &chart);
        }
    }
    let kstar = nd.kstar_frame.expect("conormal frame solved");
    assert_eq!(kstar.len(), 2);
    for form in &kstar {
        // conormal covectors of the block form have no transverse components
        assert_zero(form.comp(0), &chart);
        assert_zero(form.comp(1), &chart);
    }
}

#[test]
fn normal_distribution_degenerate_cases() {
    let cfg = SampleConfig::default();
    // the symplectic plane foliated by y: the orthogonal of F lies inside F,
    // so H has the right dimension but is not a complement
    let chart = catalog::chart_r2_foliated();
    let frame =
        DiracFrame::graph_of_presymplectic(&catalog::symplectic_r2(&chart)).unwrap();
    let nd = normal_distribution(&frame, &cfg);
    assert_eq!(nd.report.status(), CheckStatus::Fail);
    assert!(nd.h_dims.iter().all(|d| *d == Some(1)));
    // a purely leaf-tangent bivector: H vanishes everywhere
    let chart = catalog::chart_r4_foliated();
    let frame = DiracFrame::graph_of_poisson(&catalog::leaf_bivector(&chart)).unwrap();
    let nd = normal_distribution(&frame, &cfg);
    assert!(nd.h_dims.iter().all(|d| *d == Some(0)));
    assert_eq!(nd.duality, CheckStatus::Fail);
}

#[test]
fn coupling_verdicts_across_fixtures() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let tau_frame = DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap();
    let verdict = is_coupling(&tau_frame, &cfg);
    assert!(verdict.report.passed());
    let split = verdict.split.expect("solved normal split");
    for row in split.coefficients() {
        for a in row {
            assert_zero(a, &chart);
        }
    }
    let p_frame = DiracFrame::graph_of_poisson(&catalog::p_block(&chart)).unwrap();
    assert!(is_coupling(&p_frame, &cfg).report.passed());

    let chart2 = catalog::chart_r2_foliated();
    let bad = DiracFrame::graph_of_presymplectic(&catalog::symplectic_r2(&chart2)).unwrap();
    assert_eq!(is_coupling(&bad, &cfg).report.status(), CheckStatus::Fail);
}

#[test]
fn coupling_iff_normal_complement_iff_duality() {
    // the transversality verdict, the complement property of the associated
    // distribution, and the conormal duality agree on every fixture; note
    // that the distribution can have the right dimension while lying inside
    // the foliation (the symplectic plane), so the complement property is
    // the faithful middle statement
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let fixtures = [
        DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap(),
        DiracFrame::graph_of_poisson(&catalog::p_block(&chart)).unwrap(),
        DiracFrame::graph_of_poisson(&catalog::leaf_bivector(&chart)).unwrap(),
        {
            let chart2 = catalog::chart_r2_foliated();
            DiracFrame::graph_of_presymplectic(&catalog::symplectic_r2(&chart2)).unwrap()
        },
    ];
    for frame in fixtures {
        let coupling = is_coupling(&frame, &cfg).report.passed();
        let nd = normal_distribution(&frame, &cfg);
        let complement = nd
            .report
            .find("normal_distribution.h_complement")
            .map(|c| c.status == CheckStatus::Pass)
            .unwrap_or(false);
        let duality = nd.duality == CheckStatus::Pass;
        assert_eq!(coupling, complement, "coupling vs normal complement");
        assert_eq!(coupling, duality, "coupling vs conormal duality");
    }
}

#[test]
fn almost_coupling_split_examples() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let split = FrameSplit::coordinate(&chart);
    // the tangent bundle splits trivially
    let tangent_frame = DiracFrame::from_sections(
        &chart,
        (0..4)
            .map(|i| {
                Section::new(
                    VectorField::basis(&chart, i),
                    courant::cartan::OneForm::zero(&chart),
                )
                .unwrap()
            })
            .collect(),
    )
    .unwrap();
    let (report, parts) = decompose_almost_coupling(&tangent_frame, &split, &cfg);
    assert!(report.passed());
    let (l_h, l_f) = parts.unwrap();
    assert_eq!(l_h.len(), 2);
    assert_eq!(l_f.len(), 2);
    for s in &l_h {
        assert!(s.form.is_syntactically_zero());
    }
    // the block form splits
    let tau_frame = DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap();
    let (report, parts) = decompose_almost_coupling(&tau_frame, &split, &cfg);
    assert!(report.passed());
    assert!(parts.is_some());
    // a cross-term form does not
    let mut crossed = DiffForm::zero(&chart, 2).unwrap();
    crossed.add_term(&[0, 2], Expr::one()); // dx1 ^ dy1
    crossed.add_term(&[1, 3], Expr::one()); // dx2 ^ dy2
    let crossed_frame = DiracFrame::graph_of_presymplectic(&crossed).unwrap();
    let (report, parts) = decompose_almost_coupling(&crossed_frame, &split, &cfg);
    assert_eq!(report.status(), CheckStatus::Fail);
    assert!(parts.is_none());
}

#[test]
fn extraction_reads_the_blocks() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    // graph of the block 2-form: sigma is the normal block, pi inverts the
    // leaf block under the fixed musical conventions
    let tau_frame = DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap();
    let data = extract_geometric_data(&tau_frame, &cfg).unwrap();
    assert_expr_eq(&data.sigma.comp(&[0, 1]), &Expr::one(), &chart);
    assert_expr_eq(&data.pi.comp(&[2, 3]), &Expr::int(-1), &chart);
    // graph of the block bivector: pi is the leaf block, sigma inverts the
    // normal block
    let p_frame = DiracFrame::graph_of_poisson(&catalog::p_block(&chart)).unwrap();
    let data = extract_geometric_data(&p_frame, &cfg).unwrap();
    assert_expr_eq(&data.sigma.comp(&[0, 1]), &Expr::int(-1), &chart);
    assert_expr_eq(&data.pi.comp(&[2, 3]), &Expr::one(), &chart);
    // the tangent bundle meets F + ann F in the leaf directions, so it is
    // not coupling and has no canonical extraction
    let tangent_frame = DiracFrame::from_sections(
        &chart,
        (0..4)
            .map(|i| {
                Section::new(
                    VectorField::basis(&chart, i),
                    courant::cartan::OneForm::zero(&chart),
                )
                .unwrap()
            })
            .collect(),
    )
    .unwrap();
    assert!(extract_geometric_data(&tangent_frame, &cfg).is_err());
}

#[test]
fn reconstruction_round_trip_spans_the_input() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    for frame in [
        DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap(),
        DiracFrame::graph_of_poisson(&catalog::p_block(&chart)).unwrap(),
    ] {
        let data = extract_geometric_data(&frame, &cfg).unwrap();
        let rebuilt = reconstruct(&data).unwrap();
        for k in 0..cfg.count {
            let p = sample_point(&chart, &cfg, k);
            let m1 = frame.matrix_at(&p).unwrap();
            let m2 = rebuilt.matrix_at(&p).unwrap();
            assert!(m1.row_space_equal(&m2), "round trip lost the span");
        }
        // the reconstruction decomposes with its own split
        let (report, parts) = decompose_almost_coupling(&rebuilt, &data.split, &cfg);
        assert!(report.passed());
        assert!(parts.is_some());
    }
}

#[test]
fn reconstruct_trivial_data() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let data = GeometricData::new(
        FrameSplit::coordinate(&chart),
        DiffForm::zero(&chart, 2).unwrap(),
        MultiVector::zero(&chart, 2).unwrap(),
    )
    .unwrap();
    let frame = reconstruct(&data).unwrap();
    assert!(check_almost_dirac(&frame, &cfg).passed());
    // sections are (d/dx_u, 0) and (0, dy_a)
    assert!(frame.sections()[0].form.is_syntactically_zero());
    assert!(frame.sections()[2].vector.is_syntactically_zero());
}

#[test]
fn reconstructed_fixture_is_coupling_and_almost_dirac() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let frame = reconstruct(&catalog::coupling_data(&chart)).unwrap();
    assert!(check_almost_dirac(&frame, &cfg).passed());
    assert!(is_coupling(&frame, &cfg).report.passed());
}

#[test]
fn integrability_of_the_coupling_fixture() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let data = catalog::coupling_data(&chart);
    let report = check_integrability(IntegrabilityInput::Data(&data), &cfg);
    assert!(report.passed(), "{:?}", report.checks.iter().filter(|c| c.status != CheckStatus::Pass).collect::<Vec<_>>());
    // the reconstruction is closed under the bracket
    let frame = reconstruct(&data).unwrap();
    assert!(check_dirac(&frame, &cfg).passed());
}

#[test]
fn invariance_mutation_fails_exactly_condition_iv() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let data = catalog::coupling_data_bad_invariance(&chart);
    let report = check_integrability_data(&data, &cfg);
    assert_eq!(report.status(), CheckStatus::Fail);
    let failing: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.id.as_str())
        .collect();
    assert!(!failing.is_empty());
    assert!(
        failing.iter().all(|id| id.starts_with("integrability.iv")),
        "failures outside condition iv: {failing:?}"
    );
    // the reconstruction fails bracket closure
    let frame = reconstruct(&data).unwrap();
    assert_eq!(check_dirac(&frame, &cfg).status(), CheckStatus::Fail);
}

#[test]
fn curvature_mutation_fails_exactly_condition_iii() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let data = catalog::coupling_data_bad_curvature(&chart);
    let report = check_integrability_data(&data, &cfg);
    assert_eq!(report.status(), CheckStatus::Fail);
    let failing: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.id.as_str())
        .collect();
    assert!(!failing.is_empty());
    assert!(
        failing.iter().all(|id| id.starts_with("integrability.iii")),
        "failures outside condition iii: {failing:?}"
    );
    let frame = reconstruct(&data).unwrap();
    assert_eq!(check_dirac(&frame, &cfg).status(), CheckStatus::Fail);
}

#[test]
fn frame_conditions_match_bracket_closure() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let split = FrameSplit::coordinate(&chart);
    // passing fixture: the block 2-form
    let good = DiracFrame::graph_of_presymplectic(&catalog::tau_block(&chart)).unwrap();
    // failing fixture: block form with a non-closed normal block
    let mut bad_tau = DiffForm::zero(&chart, 2).unwrap();
    bad_tau.add_term(&[0, 1], e(&chart, "y1"));
    bad_tau.add_term(&[2, 3], Expr::one());
    let bad = DiracFrame::graph_of_presymplectic(&bad_tau).unwrap();
    for (frame, expect_pass) in [(good, true), (bad, false)] {
        let (split_report, parts) = decompose_almost_coupling(&frame, &split, &cfg);
        assert!(split_report.passed());
        let (l_h, l_f) = parts.unwrap();
        let conditions = check_integrability_almost_coupling(&l_h, &l_f, &split, &cfg);
        let closure = check_dirac(&frame, &cfg);
        assert_eq!(conditions.passed(), expect_pass, "conditions vs expectation");
        assert_eq!(closure.passed(), expect_pass, "closure vs expectation");
    }
}

#[test]
fn poisson_conditions_match_schouten_square() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let split = FrameSplit::coordinate(&chart);
    let fixtures = [
        (catalog::p_block(&chart), true),
        // block bivector with a leaf coefficient broken by a transverse
        // coordinate: invariance fails
        (
            {
                let mut p = MultiVector::zero(&chart, 2).unwrap();
                p.add_term(&[0, 1], Expr::one());
                p.add_term(&[2, 3], e(&chart, "x1"));
                p
            },
            false,
        ),
    ];
    for (p_biv, expect_pass) in fixtures {
        let conditions = check_integrability_poisson(&p_biv, &split, &cfg);
        let square = schouten_bracket(&p_biv, &p_biv).unwrap();
        let square_zero = square
            .terms()
            .all(|(_, c)| classify_zero(c, &chart, &cfg).is_zero());
        let closure = check_dirac(&DiracFrame::graph_of_poisson(&p_biv).unwrap(), &cfg);
        assert_eq!(conditions.passed(), expect_pass);
        assert_eq!(square_zero, expect_pass);
        assert_eq!(closure.passed(), expect_pass);
    }
}

#[test]
fn data_conditions_match_closure_for_poisson_data() {
    // for bivector-shaped data the data conditions, the bracket closure of
    // the graph, and the Schouten square agree
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    for (data, expected) in [
        (catalog::coupling_data(&chart), true),
        (catalog::coupling_data_bad_invariance(&chart), false),
    ] {
        let conditions = check_integrability_data(&data, &cfg).passed();
        let frame = reconstruct(&data).unwrap();
        let closure = check_dirac(&frame, &cfg).passed();
        assert_eq!(conditions, expected);
        assert_eq!(closure, expected);
    }
}

#[test]
fn presymplectic_conditions_are_the_bigraded_components() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let mut stream = CoeffStream::new(2026);
    for round in 0..5 {
        // random split and random block coefficients
        let split = FrameSplit::new(
            &chart,
            vec![
                vec![stream.poly(&chart), stream.poly(&chart)],
                vec![stream.poly(&chart), stream.poly(&chart)],
            ],
        )
        .unwrap();
        // tau = sigma_uv dx^u ^ dx^v + pi_ab l^a ^ l^b
        let sigma_coeff = stream.poly(&chart);
        let pi_coeff = stream.poly(&chart);
        let dx1 = courant::cartan::OneForm::basis(&chart, 0).to_graded();
        let dx2 = courant::cartan::OneForm::basis(&chart, 1).to_graded();
        let l1 = split.lambda_form(0).to_graded();
        let l2 = split.lambda_form(1).to_graded();
        let tau = dx1
            .wedge(&dx2)
            .unwrap()
            .scale(&sigma_coeff)
            .add(&l1.wedge(&l2).unwrap().scale(&pi_coeff))
            .unwrap();
        let report = check_integrability_presymplectic(&tau, &split, &cfg);
        // compare with the bigraded pieces of d tau
        let dtau = ext_d(&tau).unwrap();
        let big = to_bigraded(&dtau, &split).unwrap();
        let piece_zero = |r: usize, s: usize| -> bool {
            let piece = courant::cartan::from_bigraded(&big.piece(r, s), &split).unwrap();
            let all_zero = piece
                .terms()
                .all(|(_, c)| classify_zero(c, &chart, &cfg).is_zero());
            all_zero
        };
        let expectations = [
            ("presymplectic.leaf_closed", piece_zero(0, 3)),
            ("presymplectic.normal_closed", piece_zero(3, 0)),
            ("presymplectic.mixed_closed", piece_zero(2, 1)),
            ("presymplectic.normal_leaf_closed", piece_zero(1, 2)),
        ];
        for (id, expected) in expectations {
            let record = report.find(id).expect("condition recorded");
            assert_eq!(
                record.status == CheckStatus::Pass,
                expected,
                "round {round}, condition {id}"
            );
        }
    }
}

#[test]
fn presymplectic_conditions_iff_closed() {
    let cfg = SampleConfig::default();
    let chart = catalog::chart_r4_foliated();
    let split = FrameSplit::coordinate(&chart);
    let closed = catalog::tau_block(&chart);
    assert!(check_integrability_presymplectic(&closed, &split, &cfg).passed());
    let mut open = DiffForm::zero(&chart, 2).unwrap();
    open.add_term(&[0, 1], e(&chart, "y1"));
    open.add_term(&[2, 3], Expr::one());
    let report = check_integrability_presymplectic(&open, &split, &cfg);
    assert_eq!(report.status(), CheckStatus::Fail);
    let dtau = ext_d(&open).unwrap();
    assert!(dtau
        .terms()
        .any(|(_, c)| !classify_zero(c, &chart, &cfg).is_zero()));
}
