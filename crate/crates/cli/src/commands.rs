//! Command drivers: each command assembles a verification report (and
//! optional output tables) from the document.

use crate::input::Document;
use courant::cartan::{OneForm, VectorField};
use courant::chart::Chart;
use courant::coupling::{
    check_integrability_data, extract_geometric_data, is_coupling, normal_distribution,
};
use courant::courant::{
    check_almost_dirac, check_courant_axioms, check_dirac, DiracFrame, Section,
};
use courant::expr::{Expr, SampleConfig};
use courant::leafline::{check_linear_approximation, dw_coefficients, linear_model, linear_model_data};
use courant::report::{CheckStatus, VerificationReport};
use courant::submanifold::{
    cosymplectic_verdicts, gauss_split, induced_structure, kernel_and_properness,
    second_fundamental_form, spanning_admissible_sections,
};
use std::collections::BTreeMap;

pub struct CommandOutcome {
    pub report: VerificationReport,
    pub outputs: BTreeMap<String, String>,
}

pub enum CommandError {
    /// Input is structurally unusable for the command (exit code 3).
    Invalid(String),
}

type Result<T> = std::result::Result<T, CommandError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(CommandError::Invalid(msg.into()))
}

fn require_frame(doc: &Document) -> Result<DiracFrame> {
    let block = doc
        .structure
        .as_ref()
        .ok_or_else(|| CommandError::Invalid("the input has no structure block".into()))?;
    block
        .frame(&doc.chart)
        .map_err(|e| CommandError::Invalid(e.to_string()))
}

fn prefix_ids(report: VerificationReport, prefix: &str) -> VerificationReport {
    let mut out = VerificationReport::new();
    for mut check in report.checks {
        check.id = format!("{prefix}.{}", check.id);
        out.push(check);
    }
    out
}

/// Merge, skipping records whose id is already present (sub-commands rerun
/// shared gates).
fn merge_unique(into: &mut VerificationReport, from: VerificationReport) {
    for check in from.checks {
        if into.find(&check.id).is_none() {
            into.push(check);
        }
    }
}

/// Isotropy, rank, bracket closure, and the algebroid axiom residuals on the
/// structure's own sections.
pub fn run_verify(doc: &Document, cfg: &SampleConfig) -> Result<CommandOutcome> {
    let frame = require_frame(doc)?;
    let mut report = check_almost_dirac(&frame, cfg);
    if report.passed() {
        merge_unique(&mut report, check_dirac(&frame, cfg));
    }
    let n = frame.chart().dim();
    if n >= 3 {
        let f = Expr::coord(frame.chart().name(0));
        for start in 0..(n - 2) {
            let triple = &frame.sections()[start..start + 3];
            match check_courant_axioms(triple, &f, cfg) {
                Ok(axioms) => {
                    merge_unique(&mut report, prefix_ids(axioms, &format!("triple{start}")))
                }
                Err(e) => report.record(
                    format!("triple{start}.axioms"),
                    e.to_string(),
                    CheckStatus::Invalid,
                    vec![],
                ),
            }
        }
    }
    Ok(CommandOutcome {
        report,
        outputs: BTreeMap::new(),
    })
}

/// Normal distribution, coupling verdict, extraction, and the integrability
/// conditions, with the extracted component tables in the outputs.
pub fn run_coupling(doc: &Document, cfg: &SampleConfig) -> Result<CommandOutcome> {
    if doc.chart.leaf_dim() == 0 {
        return invalid("the coupling command needs a chart with leaf coordinates");
    }
    let frame = require_frame(doc)?;
    let mut report = VerificationReport::new();
    let nd = normal_distribution(&frame, cfg);
    merge_unique(&mut report, nd.report);
    let verdict = is_coupling(&frame, cfg);
    let coupled = verdict.report.passed();
    merge_unique(&mut report, verdict.report);
    let mut outputs = BTreeMap::new();
    if coupled {
        match extract_geometric_data(&frame, cfg) {
            Ok(data) => {
                for (key, value) in data.component_tables() {
                    outputs.insert(key, value);
                }
                merge_unique(&mut report, check_integrability_data(&data, cfg));
            }
            Err(e) => report.record(
                "coupling.extract",
                e.to_string(),
                CheckStatus::Unknown,
                vec![],
            ),
        }
    }
    Ok(CommandOutcome { report, outputs })
}

/// Leaf coefficients, the linear model, and the approximation check; the
/// model is emitted as a new structure block in the outputs.
pub fn run_linearize(doc: &Document, cfg: &SampleConfig) -> Result<CommandOutcome> {
    if doc.chart.leaf_dim() == 0 {
        return invalid("the linearize command needs a chart with leaf coordinates");
    }
    let block = doc
        .structure
        .as_ref()
        .ok_or_else(|| CommandError::Invalid("the input has no structure block".into()))?;
    let result = match block.geometric_data() {
        Some(data) => dw_coefficients(None, Some(data), cfg),
        None => {
            let frame = require_frame(doc)?;
            dw_coefficients(Some(&frame), None, cfg)
        }
    };
    let (pres, mut report) = match result {
        Ok(ok) => ok,
        Err(e) => return invalid(format!("leaf presentation unavailable: {e}")),
    };
    let model = linear_model(&pres);
    match check_linear_approximation(&pres, &model, cfg) {
        Ok(approx) => merge_unique(&mut report, approx),
        Err(e) => report.record("linear.approximation", e.to_string(), CheckStatus::Invalid, vec![]),
    }
    let mut outputs = BTreeMap::new();
    match linear_model_data(&model) {
        Ok(lin_data) => {
            merge_unique(
                &mut report,
                prefix_ids(check_integrability_data(&lin_data, cfg), "linear_model"),
            );
            outputs.insert(
                "linear_model".to_string(),
                render_data_block(&block.name, &lin_data),
            );
        }
        Err(e) => report.record("linear.model", e.to_string(), CheckStatus::Invalid, vec![]),
    }
    Ok(CommandOutcome { report, outputs })
}

fn render_data_block(name: &str, data: &courant::coupling::GeometricData) -> String {
    let mut out = format!("structure \"{name}_linear\" {{\n  kind = geometric_data\n");
    for (key, value) in data.component_tables() {
        // keys come as `name(a, b)`; rewrite as `name (a, b) = value`
        if let Some(open) = key.find('(') {
            let (table, args) = key.split_at(open);
            out.push_str(&format!("  {} {} = {}\n", table.trim(), args, value));
        }
    }
    out.push('}');
    out
}

/// Kernel and properness, the induced structure, the second fundamental form
/// on the spanning family, and the cosymplectic verdicts.
pub fn run_submanifold(doc: &Document, cfg: &SampleConfig) -> Result<CommandOutcome> {
    let frame = require_frame(doc)?;
    let (_, sub) = doc
        .submanifold
        .as_ref()
        .ok_or_else(|| CommandError::Invalid("the input has no submanifold block".into()))?;
    let mut report = VerificationReport::new();
    let proper = kernel_and_properness(&frame, sub, cfg)
        .map_err(|e| CommandError::Invalid(e.to_string()))?;
    let properly_normalized = proper.properly_normalized == CheckStatus::Pass;
    merge_unique(&mut report, proper.report);
    let mut outputs = BTreeMap::new();
    if properly_normalized {
        match induced_structure(&frame, sub, cfg) {
            Ok(induced) => {
                merge_unique(&mut report, induced.report);
                for (i, section) in induced.frame.sections().iter().enumerate() {
                    let v: Vec<String> =
                        section.vector.comps().iter().map(|e| e.to_string()).collect();
                    let f: Vec<String> =
                        section.form.comps().iter().map(|e| e.to_string()).collect();
                    outputs.insert(
                        format!("induced.section{i}"),
                        format!("({} | {})", v.join(", "), f.join(", ")),
                    );
                }
            }
            Err(e) => report.record(
                "induced",
                e.to_string(),
                CheckStatus::Unknown,
                vec![],
            ),
        }
        let spanning = spanning_admissible_sections(&frame, sub);
        for i in 0..spanning.len() {
            for j in (i + 1)..spanning.len() {
                match second_fundamental_form(&frame, sub, &spanning[i], &spanning[j], cfg) {
                    Ok(b) => {
                        merge_unique(
                            &mut report,
                            prefix_ids(b.report, &format!("pair{i}{j}")),
                        );
                        for (k, comp) in b.components.iter().enumerate() {
                            let coord = frame.chart().name(sub.normal_indices()[k]);
                            outputs.insert(
                                format!("second_form({i},{j}).d{coord}"),
                                comp.to_string(),
                            );
                        }
                    }
                    Err(e) => report.record(
                        format!("second_form.{i}.{j}"),
                        e.to_string(),
                        CheckStatus::Unknown,
                        vec![],
                    ),
                }
            }
        }
    }
    match cosymplectic_verdicts(&frame, sub, cfg) {
        Ok(verdicts) => merge_unique(&mut report, verdicts.report),
        Err(e) => report.record("cosymplectic", e.to_string(), CheckStatus::Invalid, vec![]),
    }
    // with a metric and a bivector-graph structure, add the Gauss splitting
    // of the ambient derivative on the tangent coordinate coframe
    if let (Some(metric), courant::courant::FrameOrigin::PoissonGraph(p_biv)) =
        (&doc.metric, &frame.origin)
    {
        let chart = frame.chart();
        let tangents = sub.tangent_indices();
        for (ti, &t1) in tangents.iter().enumerate() {
            for &t2 in &tangents[ti + 1..] {
                let alpha = OneForm::basis(chart, t1);
                let beta = OneForm::basis(chart, t2);
                match gauss_split(p_biv, metric, sub, &alpha, &beta, cfg) {
                    Ok(split) => {
                        merge_unique(
                            &mut report,
                            prefix_ids(
                                split.report,
                                &format!("d{}.d{}", chart.name(t1), chart.name(t2)),
                            ),
                        );
                        for (i, comp) in split.psi.comps().iter().enumerate() {
                            if !comp.is_zero_const() {
                                outputs.insert(
                                    format!(
                                        "psi(d{}, d{}).d{}",
                                        chart.name(t1),
                                        chart.name(t2),
                                        chart.name(i)
                                    ),
                                    comp.to_string(),
                                );
                            }
                        }
                    }
                    Err(e) => report.record(
                        format!("gauss.{}.{}", chart.name(t1), chart.name(t2)),
                        e.to_string(),
                        CheckStatus::Unknown,
                        vec![],
                    ),
                }
            }
        }
    }
    Ok(CommandOutcome { report, outputs })
}

// deterministic polynomial stream for the axiom suite
struct PolyStream {
    state: u64,
}

impl PolyStream {
    fn new(seed: u64) -> Self {
        PolyStream { state: seed }
    }

    fn coeff(&mut self) -> i64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) % 7) as i64 - 3
    }

    fn poly(&mut self, chart: &Chart) -> Expr {
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

    fn section(&mut self, chart: &Chart) -> Section {
        let vector =
            VectorField::new(chart, (0..chart.dim()).map(|_| self.poly(chart)).collect())
                .expect("dimension matches");
        let form = OneForm::new(chart, (0..chart.dim()).map(|_| self.poly(chart)).collect())
            .expect("dimension matches");
        Section::new(vector, form).expect("same chart")
    }
}

/// The axiom suite on seeded random polynomial section triples over the
/// chart (degree <= 2, coefficients in [-3, 3]).
pub fn run_axioms(doc: &Document, cfg: &SampleConfig) -> Result<CommandOutcome> {
    let chart = &doc.chart;
    let mut stream = PolyStream::new(cfg.seed);
    let mut report = VerificationReport::new();
    let rounds = cfg.count.clamp(1, 20);
    for round in 0..rounds {
        let sections = vec![
            stream.section(chart),
            stream.section(chart),
            stream.section(chart),
        ];
        let f = stream.poly(chart);
        match check_courant_axioms(&sections, &f, cfg) {
            Ok(axioms) => merge_unique(&mut report, prefix_ids(axioms, &format!("triple{round}"))),
            Err(e) => report.record(
                format!("triple{round}.axioms"),
                e.to_string(),
                CheckStatus::Invalid,
                vec![],
            ),
        }
    }
    Ok(CommandOutcome {
        report,
        outputs: BTreeMap::new(),
    })
}
