//! Coupling of a structure with the chart foliation: the associated normal
//! distribution, coupling verdicts, the splitting into normal and
//! leaf-tangent components, extraction and reconstruction of geometric data,
//! and the integrability condition sets in all four presentations.

use crate::cartan::{
    bigraded_d, ext_d, lie_bracket, lie_derivative_multi, schouten_bracket, sharp,
    to_bigraded, DiffForm, FrameSplit, MultiVector, OneForm, VectorField,
};
use crate::chart::Chart;
use crate::courant::{courant_bracket, pairing_omega, DiracFrame, FrameOrigin, Section};
use crate::error::{Error, Result};
use crate::expr::{classify_zero, rational_form, with_retries, Expr, SampleConfig};
use crate::linalg::QMatrix;
use crate::report::{point_witness, CheckStatus, VerificationReport};
use crate::scalar::Scalar;
use crate::symmat::SymMatrix;

/// The equivalent presentation of a coupling structure: a normal frame split,
/// a transverse 2-form, and a leaf-tangent bivector.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricData {
    pub split: FrameSplit,
    /// Components only on transverse coordinate pairs (pure bidegree (2,0)).
    pub sigma: DiffForm,
    /// Components only on leaf coordinate pairs (pure bidegree (0,2)).
    pub pi: MultiVector,
}

impl GeometricData {
    pub fn new(split: FrameSplit, sigma: DiffForm, pi: MultiVector) -> Result<GeometricData> {
        let chart = split.chart();
        chart.same_as(sigma.chart())?;
        chart.same_as(pi.chart())?;
        if sigma.degree() != 2 || pi.degree() != 2 {
            return Err(Error::InvalidDegree("geometric data wants degree 2".into()));
        }
        for (idx, c) in sigma.terms() {
            if !c.is_zero_const() && idx.iter().any(|&i| chart.is_leaf(i)) {
                return Err(Error::InvalidInput(
                    "transverse 2-form has a leaf-indexed component".into(),
                ));
            }
        }
        for (idx, c) in pi.terms() {
            if !c.is_zero_const() && idx.iter().any(|&i| !chart.is_leaf(i)) {
                return Err(Error::InvalidInput(
                    "leaf bivector has a transverse-indexed component".into(),
                ));
            }
        }
        Ok(GeometricData { split, sigma, pi })
    }

    pub fn chart(&self) -> &Chart {
        self.split.chart()
    }

    /// Component table entries for reporting: `sigma(x_u, x_v)`, `pi(y_a, y_b)`.
    pub fn component_tables(&self) -> Vec<(String, String)> {
        let chart = self.chart();
        let mut out = Vec::new();
        let trans = chart.transverse_indices();
        for (i, &u) in trans.iter().enumerate() {
            for &v in &trans[i + 1..] {
                out.push((
                    format!("sigma({}, {})", chart.name(u), chart.name(v)),
                    self.sigma.comp(&[u, v]).to_string(),
                ));
            }
        }
        let leaves = chart.leaf_indices();
        for (i, &a) in leaves.iter().enumerate() {
            for &b in &leaves[i + 1..] {
                out.push((
                    format!("pi({}, {})", chart.name(a), chart.name(b)),
                    self.pi.comp(&[a, b]).to_string(),
                ));
            }
        }
        for (ai, &a) in leaves.iter().enumerate() {
            for (ui, &u) in trans.iter().enumerate() {
                out.push((
                    format!("A({}, {})", chart.name(a), chart.name(u)),
                    self.split.coefficient(ai, ui).to_string(),
                ));
            }
        }
        out
    }
}

/// Pointwise data of the associated normal distribution.
#[derive(Debug, Clone)]
pub struct NormalDistribution {
    /// Dimension of the tangent projection of `L meet (TM + ann F)` per
    /// sample point (`None` marks an inconclusive index).
    pub h_dims: Vec<Option<usize>>,
    /// Dimension of the conormal codistribution per sample point.
    pub kstar_dims: Vec<Option<usize>>,
    /// Whether the cotangent fiber splits as `ann F + K*` at every point.
    pub duality: CheckStatus,
    /// The normal frame solved symbolically as a graph over the transverse
    /// coordinate fields, when the distribution is a complement with
    /// rational coefficients.
    pub h_split: Option<FrameSplit>,
    /// A symbolic frame of the conormal codistribution, when solvable.
    pub kstar_frame: Option<Vec<OneForm>>,
    pub report: VerificationReport,
}

fn leaf_cols(chart: &Chart) -> Vec<usize> {
    let n = chart.dim();
    chart.leaf_indices().iter().map(|&a| n + a).collect()
}

/// At each sample point, compute the subspace `L meet (TM + ann F)`, its
/// tangent projection, and the conormal codistribution
/// `{theta : exists Y in F with (Y, theta) in L}`; report whether
/// `T*M = ann F + K*` holds pointwise.
pub fn normal_distribution(l: &DiracFrame, cfg: &SampleConfig) -> NormalDistribution {
    let chart = l.chart();
    let n = chart.dim();
    let q = chart.transverse_dim();
    let mut report = VerificationReport::new();
    let mut h_dims = Vec::with_capacity(cfg.count);
    let mut kstar_dims = Vec::with_capacity(cfg.count);
    let mut duality = CheckStatus::Pass;
    let mut duality_witnesses = Vec::new();
    let mut h_defect_witnesses = Vec::new();
    let mut h_constant = true;
    for k in 0..cfg.count {
        let sampled = with_retries(chart, cfg, k, |p| l.matrix_at(p).ok());
        let Some((p, m)) = sampled else {
            h_dims.push(None);
            kstar_dims.push(None);
            duality = duality.worst(CheckStatus::Unknown);
            continue;
        };
        // H-tilde: combinations whose form part annihilates F
        let leaf_form = m.select_cols(&leaf_cols(chart));
        let coeffs = leaf_form.transpose().nullspace();
        let mut h_rows = QMatrix::zeros(0, n);
        for xi in coeffs.rows_iter() {
            let mut row = vec![Scalar::zero(); n];
            for (i, c) in xi.iter().enumerate() {
                for col in 0..n {
                    let v = &row[col] + &(c * &m[(i, col)]);
                    row[col] = v;
                }
            }
            h_rows.push_row(row);
        }
        let h_dim = h_rows.rank();
        h_dims.push(Some(h_dim));
        // normality needs a complement: correct dimension and H meets F in 0
        let mut f_basis = QMatrix::zeros(0, n);
        for &a in &chart.leaf_indices() {
            let mut row = vec![Scalar::zero(); n];
            row[a] = Scalar::one();
            f_basis.push_row(row);
        }
        let complement_ok = h_dim == q && h_rows.vstack(&f_basis).rank() == n;
        if !complement_ok {
            h_constant = false;
            if h_defect_witnesses.len() < 3 {
                h_defect_witnesses.push(point_witness(
                    chart,
                    &p,
                    vec![format!(
                        "dim H = {h_dim}, dim(H + F) = {}",
                        h_rows.vstack(&f_basis).rank()
                    )],
                ));
            }
        }
        // K*: form parts of combinations whose tangent part lies in F
        let trans_tangent = m.select_cols(&chart.transverse_indices());
        let coeffs = trans_tangent.transpose().nullspace();
        let mut kstar_rows = QMatrix::zeros(0, n);
        for xi in coeffs.rows_iter() {
            let mut row = vec![Scalar::zero(); n];
            for (i, c) in xi.iter().enumerate() {
                for col in 0..n {
                    let v = &row[col] + &(c * &m[(i, n + col)]);
                    row[col] = v;
                }
            }
            kstar_rows.push_row(row);
        }
        let kstar_dim = kstar_rows.rank();
        kstar_dims.push(Some(kstar_dim));
        // duality: ann F (the dx's) + K* spans T*M directly
        let mut ann_f = QMatrix::zeros(0, n);
        for &u in &chart.transverse_indices() {
            let mut row = vec![Scalar::zero(); n];
            row[u] = Scalar::one();
            ann_f.push_row(row);
        }
        let total = ann_f.vstack(&kstar_rows);
        let split_ok = kstar_dim == chart.leaf_dim() && total.rank() == n;
        if !split_ok {
            duality = duality.worst(CheckStatus::Fail);
            if duality_witnesses.len() < 3 {
                duality_witnesses.push(point_witness(
                    chart,
                    &p,
                    vec![format!(
                        "dim K* = {kstar_dim}, dim(ann F + K*) = {}",
                        total.rank()
                    )],
                ));
            }
        }
    }
    report.record(
        "normal_distribution.h_complement",
        format!(
            "tangent projection of L meet (TM + ann F) is a {q}-dimensional complement of F"
        ),
        if h_dims.iter().any(Option::is_none) {
            CheckStatus::Unknown
        } else if h_constant {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        h_defect_witnesses,
    );
    report.record(
        "normal_distribution.duality",
        "the cotangent fiber splits as ann F + K* at all sample points",
        duality,
        duality_witnesses,
    );
    // symbolic frames where the pointwise picture is constant
    let h_split = if h_constant && !h_dims.iter().any(Option::is_none) {
        solve_normal_split(l).ok()
    } else {
        None
    };
    let kstar_frame = solve_conormal_frame(l).ok();
    NormalDistribution {
        h_dims,
        kstar_dims,
        duality,
        h_split,
        kstar_frame,
        report,
    }
}

/// Covector fields spanning the conormal codistribution: form parts of the
/// solutions whose tangent part is leaf-tangent.
fn solve_conormal_frame(l: &DiracFrame) -> Result<Vec<OneForm>> {
    let chart = l.chart();
    let mut m = SymMatrix::zeros(0, l.sections().len());
    for &u in &chart.transverse_indices() {
        m.push_row(
            l.sections()
                .iter()
                .map(|s| s.vector.comp(u).clone())
                .collect(),
        );
    }
    let null = m.nullspace()?;
    let mut out = Vec::new();
    for r in 0..null.rows {
        let mut form = OneForm::zero(chart);
        for (i, c) in null.row(r).iter().enumerate() {
            form = form.add(&l.sections()[i].form.scale(c))?;
        }
        out.push(form.map_coeffs(|e| e.simplified()));
    }
    Ok(out)
}

/// Outcome of the coupling verdict, with the solved split on PASS.
#[derive(Debug, Clone)]
pub struct CouplingVerdict {
    pub report: VerificationReport,
    /// The differentiable normal frame solved from `L meet (TM + ann F)`,
    /// presented as a graph over the transverse coordinate fields. Available
    /// when the verdict passes and the coefficients are rational functions.
    pub split: Option<FrameSplit>,
}

/// PASS iff `L meet (F + ann F) = 0` at every sample point. On PASS, the
/// normal frame is solved symbolically from the homogeneous linear system
/// when the coefficients are rational; otherwise per-point solutions are
/// checked for constancy.
pub fn is_coupling(l: &DiracFrame, cfg: &SampleConfig) -> CouplingVerdict {
    let chart = l.chart();
    let n = chart.dim();
    let mut report = VerificationReport::new();
    let mut witnesses = Vec::new();
    let mut ok = true;
    let mut unknown = false;
    for k in 0..cfg.count {
        let sampled = with_retries(chart, cfg, k, |p| l.matrix_at(p).ok());
        let Some((p, m)) = sampled else {
            unknown = true;
            continue;
        };
        // constraints: tangent transverse components = 0, form leaf components = 0
        let mut constraint_cols = chart.transverse_indices();
        constraint_cols.extend(leaf_cols(chart));
        let constraints = m.select_cols(&constraint_cols);
        let dim = n - constraints.rank();
        if dim != 0 {
            ok = false;
            if witnesses.len() < 3 {
                witnesses.push(point_witness(
                    chart,
                    &p,
                    vec![format!("dim L meet (F + ann F) = {dim}")],
                ));
            }
        }
    }
    let status = if !ok {
        CheckStatus::Fail
    } else if unknown {
        CheckStatus::Unknown
    } else {
        CheckStatus::Pass
    };
    report.record(
        "coupling.transversality",
        "L meets F + ann F only in zero at all sample points",
        status,
        witnesses,
    );
    let split = if status == CheckStatus::Pass {
        match solve_normal_split(l) {
            Ok(split) => Some(split),
            Err(_) => {
                report.record(
                    "coupling.h_frame",
                    "normal frame not solved symbolically (non-rational coefficients)",
                    CheckStatus::Unknown,
                    vec![],
                );
                None
            }
        }
    } else {
        None
    };
    CouplingVerdict { report, split }
}

/// Solve the normal frame from the frame sections whose form parts
/// annihilate the foliation, normalized as a graph over the transverse
/// coordinate fields.
fn solve_normal_split(l: &DiracFrame) -> Result<FrameSplit> {
    let chart = l.chart();
    let q = chart.transverse_dim();
    let p_dim = chart.leaf_dim();
    let sections = solve_h_tilde_sections(l)?;
    if sections.len() != q {
        return Err(Error::NotCoupling(format!(
            "normal system has {} fundamental solutions, expected {q}",
            sections.len()
        )));
    }
    // normalize to X_u = d/dx^u + A^a_u d/dy^a by inverting the transverse block
    let trans = chart.transverse_indices();
    let c = SymMatrix::from_rows(
        sections
            .iter()
            .map(|s| trans.iter().map(|&u| s.vector.comp(u).clone()).collect())
            .collect(),
    );
    let mut a = vec![vec![Expr::zero(); q]; p_dim];
    for (ui, _) in trans.iter().enumerate() {
        let mut target = vec![Expr::zero(); q];
        target[ui] = Expr::one();
        let xi = c
            .transpose_solve(&target)?
            .ok_or_else(|| Error::NotCoupling("transverse block is singular".into()))?;
        for (ai, &a_coord) in chart.leaf_indices().iter().enumerate() {
            let mut acc = Expr::zero();
            for (j, coeff) in xi.iter().enumerate() {
                acc = Expr::add(
                    acc,
                    Expr::mul(coeff.clone(), sections[j].vector.comp(a_coord).clone()),
                );
            }
            a[ai][ui] = rational_form(&acc)?.to_expr();
        }
    }
    FrameSplit::new(chart, a)
}

/// Fundamental solutions of the homogeneous system cutting out
/// `L meet (TM + ann F)` over the rational-function field.
fn solve_h_tilde_sections(l: &DiracFrame) -> Result<Vec<Section>> {
    let chart = l.chart();
    let leaves = chart.leaf_indices();
    let mut m = SymMatrix::zeros(0, l.sections().len());
    for &a in &leaves {
        m.push_row(
            l.sections()
                .iter()
                .map(|s| s.form.comp(a).clone())
                .collect(),
        );
    }
    let null = m.nullspace()?;
    let mut out = Vec::new();
    for xi in 0..null.rows {
        let coeffs = null.row(xi);
        let mut section = Section::zero(chart);
        for (i, c) in coeffs.iter().enumerate() {
            section = section.add(&l.sections()[i].scale(c))?;
        }
        out.push(section.map_coeffs(|e| rational_form(e).map(|nf| nf.to_expr()).unwrap_or_else(|_| e.clone())));
    }
    Ok(out)
}

/// Fundamental solutions for the leaf component `L meet (F + F*)`,
/// normalized as the graph of a leaf bivector over the annihilator coframe.
fn solve_leaf_bivector(l: &DiracFrame, split: &FrameSplit) -> Result<MultiVector> {
    let chart = l.chart();
    let p_dim = chart.leaf_dim();
    let h_frame = split.h_frame();
    // constraints: transverse tangent components vanish, form(X_u) vanishes
    let mut m = SymMatrix::zeros(0, l.sections().len());
    for &u in &chart.transverse_indices() {
        m.push_row(
            l.sections()
                .iter()
                .map(|s| s.vector.comp(u).clone())
                .collect(),
        );
    }
    for x in &h_frame {
        m.push_row(
            l.sections()
                .iter()
                .map(|s| s.form.apply(x))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let null = m.nullspace()?;
    if null.rows != p_dim {
        return Err(Error::NotCoupling(format!(
            "leaf system has {} fundamental solutions, expected {p_dim}",
            null.rows
        )));
    }
    let mut sections = Vec::new();
    for r in 0..null.rows {
        let mut section = Section::zero(chart);
        for (i, c) in null.row(r).iter().enumerate() {
            section = section.add(&l.sections()[i].scale(c))?;
        }
        sections.push(section);
    }
    // normalize so the form parts are the coframe elements lambda^a
    let leaves = chart.leaf_indices();
    let e = SymMatrix::from_rows(
        sections
            .iter()
            .map(|s| leaves.iter().map(|&a| s.form.comp(a).clone()).collect())
            .collect(),
    );
    let mut pi = MultiVector::zero(chart, 2)?;
    for (ai, _) in leaves.iter().enumerate() {
        let mut target = vec![Expr::zero(); p_dim];
        target[ai] = Expr::one();
        let xi = e
            .transpose_solve(&target)?
            .ok_or_else(|| Error::NotCoupling("leaf block is singular".into()))?;
        // Pi^{ab} persists as the d/dy^b component of the normalized section
        for (bi, &b_coord) in leaves.iter().enumerate() {
            if bi <= ai {
                continue;
            }
            let mut acc = Expr::zero();
            for (j, coeff) in xi.iter().enumerate() {
                acc = Expr::add(
                    acc,
                    Expr::mul(coeff.clone(), sections[j].vector.comp(b_coord).clone()),
                );
            }
            pi.add_term(&[leaves[ai], b_coord], rational_form(&acc)?.to_expr());
        }
    }
    Ok(pi)
}

/// Split every frame section into its normal and leaf parts relative to the
/// split and test pointwise that both parts stay inside the structure.
/// Returns the two sub-frames on PASS.
pub fn decompose_almost_coupling(
    l: &DiracFrame,
    split: &FrameSplit,
    cfg: &SampleConfig,
) -> (VerificationReport, Option<(Vec<Section>, Vec<Section>)>) {
    let chart = l.chart();
    let n = chart.dim();
    let mut report = VerificationReport::new();
    if let Err(e) = chart.same_as(split.chart()) {
        report.record("almost_coupling.chart", e.to_string(), CheckStatus::Invalid, vec![]);
        return (report, None);
    }
    let h_frame = split.h_frame();
    let lambda = split.lambda_coframe();
    let mut h_parts = Vec::new();
    let mut f_parts = Vec::new();
    for s in l.sections() {
        // tangent split: Z_H = dx^u(Z) X_u, Z_F = Z - Z_H
        let mut z_h = VectorField::zero(chart);
        for (ui, &u) in chart.transverse_indices().iter().enumerate() {
            z_h = z_h.add(&h_frame[ui].scale(s.vector.comp(u))).expect("same chart");
        }
        let z_f = s.vector.sub(&z_h).expect("same chart");
        // covector split: theta_H = theta(X_u) dx^u, theta_F = theta(d/dy^a) lambda^a
        let mut theta_h = OneForm::zero(chart);
        for (ui, &u) in chart.transverse_indices().iter().enumerate() {
            let coeff = s.form.apply(&h_frame[ui]).expect("same chart");
            let mut dx = OneForm::zero(chart);
            dx.set_comp(u, Expr::one());
            theta_h = theta_h.add(&dx.scale(&coeff)).expect("same chart");
        }
        let mut theta_f = OneForm::zero(chart);
        for (ai, &a) in chart.leaf_indices().iter().enumerate() {
            theta_f = theta_f
                .add(&lambda[ai].scale(s.form.comp(a)))
                .expect("same chart");
        }
        h_parts.push(Section::new(z_h, theta_h).expect("same chart"));
        f_parts.push(Section::new(z_f, theta_f).expect("same chart"));
    }
    // pointwise membership of every part in L
    let mut ok = true;
    let mut unknown = false;
    let mut witnesses = Vec::new();
    for k in 0..cfg.count {
        let sampled = with_retries(chart, cfg, k, |p| {
            let m = l.matrix_at(p).ok()?;
            if m.rank() != n {
                return None;
            }
            let mut parts = Vec::new();
            for s in h_parts.iter().chain(&f_parts) {
                parts.push(s.fiber_row_at(p).ok()?);
            }
            Some((m, parts))
        });
        let Some((p, (m, parts))) = sampled else {
            unknown = true;
            continue;
        };
        for row in parts {
            if !m.row_space_contains(&row) {
                ok = false;
                if witnesses.len() < 3 {
                    witnesses.push(point_witness(
                        chart,
                        &p,
                        vec!["a split part leaves the structure".into()],
                    ));
                }
                break;
            }
        }
    }
    let status = if !ok {
        CheckStatus::Fail
    } else if unknown {
        CheckStatus::Unknown
    } else {
        CheckStatus::Pass
    };
    report.record(
        "almost_coupling.split",
        "every frame section splits into normal and leaf parts inside the structure",
        status,
        witnesses,
    );
    if status != CheckStatus::Pass {
        return (report, None);
    }
    // the sub-frames: a maximal independent subset of each part family
    let l_h = independent_sections(&h_parts, chart.transverse_dim());
    let l_f = independent_sections(&f_parts, chart.leaf_dim());
    match (l_h, l_f) {
        (Some(l_h), Some(l_f)) => (report, Some((l_h, l_f))),
        _ => {
            report.record(
                "almost_coupling.subframes",
                "could not extract independent sub-frames of the expected dimensions",
                CheckStatus::Unknown,
                vec![],
            );
            (report, None)
        }
    }
}

/// Pick `want` sections spanning the family over the function field.
fn independent_sections(sections: &[Section], want: usize) -> Option<Vec<Section>> {
    if want == 0 {
        return Some(Vec::new());
    }
    let mut chosen: Vec<usize> = Vec::new();
    for (i, s) in sections.iter().enumerate() {
        let mut candidate_rows: Vec<Vec<Expr>> =
            chosen.iter().map(|&j| sections[j].fiber_row()).collect();
        candidate_rows.push(s.fiber_row());
        let candidate = SymMatrix::from_rows(candidate_rows);
        match candidate.rank() {
            Ok(r) if r == chosen.len() + 1 => {
                chosen.push(i);
                if chosen.len() == want {
                    return Some(chosen.iter().map(|&j| sections[j].clone()).collect());
                }
            }
            Ok(_) => {}
            Err(_) => return None,
        }
    }
    None
}

/// Extract the geometric data of a coupling structure: the solved normal
/// split, the transverse 2-form read off the normal component, and the leaf
/// bivector read off the leaf component.
pub fn extract_geometric_data(l: &DiracFrame, cfg: &SampleConfig) -> Result<GeometricData> {
    let verdict = is_coupling(l, cfg);
    if !verdict.report.passed() {
        return Err(Error::NotCoupling(
            "the structure does not couple with the foliation".into(),
        ));
    }
    let split = verdict
        .split
        .ok_or_else(|| Error::NotCoupling("no symbolic normal frame available".into()))?;
    let chart = l.chart();
    // sigma(X_u, X_v) = alpha_u(X_v) for the normalized normal sections
    let h_sections = normalized_h_sections(l, &split)?;
    let trans = chart.transverse_indices();
    let mut sigma = DiffForm::zero(chart, 2)?;
    for (ui, &u) in trans.iter().enumerate() {
        for (vi, &v) in trans.iter().enumerate() {
            if vi <= ui {
                continue;
            }
            let value = h_sections[ui].form.apply(&split.h_field(vi))?;
            sigma.add_term(&[u, v], rational_form(&value)?.to_expr());
        }
    }
    let pi = solve_leaf_bivector(l, &split)?;
    GeometricData::new(split, sigma, pi)
}

/// The normal sections normalized as graphs: `(X_u, alpha_u)` with
/// `alpha_u` annihilating the foliation.
fn normalized_h_sections(l: &DiracFrame, split: &FrameSplit) -> Result<Vec<Section>> {
    let chart = l.chart();
    let q = chart.transverse_dim();
    let raw = solve_h_tilde_sections(l)?;
    if raw.len() != q {
        return Err(Error::NotCoupling("unexpected normal system dimension".into()));
    }
    let trans = chart.transverse_indices();
    let c = SymMatrix::from_rows(
        raw.iter()
            .map(|s| trans.iter().map(|&u| s.vector.comp(u).clone()).collect())
            .collect(),
    );
    let mut out = Vec::new();
    for ui in 0..q {
        let mut target = vec![Expr::zero(); q];
        target[ui] = Expr::one();
        let xi = c
            .transpose_solve(&target)?
            .ok_or_else(|| Error::NotCoupling("transverse block is singular".into()))?;
        let mut section = Section::zero(chart);
        for (j, coeff) in xi.iter().enumerate() {
            section = section.add(&raw[j].scale(coeff))?;
        }
        out.push(section.map_coeffs(|e| {
            rational_form(e).map(|nf| nf.to_expr()).unwrap_or_else(|_| e.clone())
        }));
    }
    let _ = split;
    Ok(out)
}

/// Reconstruct the frame `{(X_u, i(X_u) sigma)} + {(i(lambda^a) Pi, lambda^a)}`
/// from geometric data. The output always passes the almost-Dirac verdict.
pub fn reconstruct(data: &GeometricData) -> Result<DiracFrame> {
    let chart = data.chart().clone();
    let mut sections = Vec::with_capacity(chart.dim());
    for ui in 0..chart.transverse_dim() {
        let x = data.split.h_field(ui);
        let form = OneForm::from_graded(&data.sigma.interior(&x)?)?;
        sections.push(Section::new(x, form)?);
    }
    for ai in 0..chart.leaf_dim() {
        let lambda = data.split.lambda_form(ai);
        let vector = sharp(&data.pi, &lambda)?;
        sections.push(Section::new(vector, lambda)?);
    }
    Ok(DiracFrame::from_sections(&chart, sections)?.with_origin(FrameOrigin::Reconstructed))
}

/// Input presentations accepted by the integrability verdicts.
pub enum IntegrabilityInput<'a> {
    /// A geometric-data triple.
    Data(&'a GeometricData),
    /// Sub-frames of an almost-coupling structure together with the split.
    AlmostCoupling {
        l_h: &'a [Section],
        l_f: &'a [Section],
        split: &'a FrameSplit,
    },
    /// A bivector that splits by bidegree relative to the split.
    Poisson {
        p: &'a MultiVector,
        split: &'a FrameSplit,
    },
    /// A 2-form that splits by bidegree relative to the split.
    Presymplectic {
        tau: &'a DiffForm,
        split: &'a FrameSplit,
    },
}

/// Dispatch an integrability check in any of the four presentations.
pub fn check_integrability(input: IntegrabilityInput<'_>, cfg: &SampleConfig) -> VerificationReport {
    match input {
        IntegrabilityInput::Data(data) => check_integrability_data(data, cfg),
        IntegrabilityInput::AlmostCoupling { l_h, l_f, split } => {
            check_integrability_almost_coupling(l_h, l_f, split, cfg)
        }
        IntegrabilityInput::Poisson { p, split } => check_integrability_poisson(p, split, cfg),
        IntegrabilityInput::Presymplectic { tau, split } => {
            check_integrability_presymplectic(tau, split, cfg)
        }
    }
}

/// The four conditions on geometric data: the leaf bivector is fiberwise
/// integrable, the transverse form is closed along the normal directions, the
/// curvature of the normal frame is the leaf-Hamiltonian of the transverse
/// form, and the leaf bivector is invariant along the normal frame.
pub fn check_integrability_data(data: &GeometricData, cfg: &SampleConfig) -> VerificationReport {
    let mut report = VerificationReport::new();
    let chart = data.chart();
    let split = &data.split;
    let lambda = split.lambda_coframe();
    let leaves = chart.leaf_indices();
    let p_dim = chart.leaf_dim();
    let q = chart.transverse_dim();
    // i) the Schouten square of the leaf bivector vanishes on coframe triples
    match schouten_bracket(&data.pi, &data.pi) {
        Ok(sq) => {
            if p_dim < 3 {
                report.record(
                    "integrability.i",
                    "leaf bivector squares to zero (vacuous below fiber dimension 3)",
                    CheckStatus::Pass,
                    vec![],
                );
            } else {
                for ai in 0..p_dim {
                    for bi in (ai + 1)..p_dim {
                        for ci in (bi + 1)..p_dim {
                            let value = sq
                                .eval_on(&[&lambda[ai], &lambda[bi], &lambda[ci]])
                                .expect("degrees match");
                            report.record_zero(
                                format!("integrability.i.{ai}.{bi}.{ci}"),
                                format!(
                                    "Schouten square on (l^{}, l^{}, l^{})",
                                    chart.name(leaves[ai]),
                                    chart.name(leaves[bi]),
                                    chart.name(leaves[ci])
                                ),
                                &classify_zero(&value, chart, cfg),
                            );
                        }
                    }
                }
            }
        }
        Err(e) => report.record("integrability.i", e.to_string(), CheckStatus::Invalid, vec![]),
    }
    // ii) d sigma vanishes on triples of normal fields (vacuous for q < 3)
    if q < 3 {
        report.record(
            "integrability.ii",
            "transverse 2-form closed along normal directions (vacuous below 3)",
            CheckStatus::Pass,
            vec![],
        );
    } else {
        let dsigma = ext_d(&data.sigma).expect("degree fits");
        let h = split.h_frame();
        for u in 0..q {
            for v in (u + 1)..q {
                for w in (v + 1)..q {
                    let value = dsigma.eval_on(&[&h[u], &h[v], &h[w]]).expect("degrees");
                    report.record_zero(
                        format!("integrability.ii.{u}.{v}.{w}"),
                        format!("d sigma on normal frame triple ({u},{v},{w})"),
                        &classify_zero(&value, chart, cfg),
                    );
                }
            }
        }
    }
    // iii) leaf part of [X_u, X_v] equals the leaf-Hamiltonian of sigma(X_u, X_v)
    let h = split.h_frame();
    for u in 0..q {
        for v in (u + 1)..q {
            let bracket = lie_bracket(&h[u], &h[v]).expect("same chart");
            let pr_f = split.project_leaf(&bracket).expect("same chart");
            let sigma_uv = data.sigma.eval_on(&[&h[u], &h[v]]).expect("degrees");
            let dd = split.d_leaf_scalar(&sigma_uv);
            let rhs = sharp(&data.pi, &dd).expect("bivector");
            let residual = pr_f.sub(&rhs).expect("same chart");
            for &a in &leaves {
                report.record_zero(
                    format!("integrability.iii.{u}.{v}.{}", chart.name(a)),
                    format!(
                        "curvature of ({u},{v}) matches the leaf-Hamiltonian along d/d{}",
                        chart.name(a)
                    ),
                    &classify_zero(residual.comp(a), chart, cfg),
                );
            }
        }
    }
    // iv) the leaf bivector is invariant along the normal frame
    for u in 0..q {
        match lie_derivative_multi(&h[u], &data.pi) {
            Ok(lie) => {
                for (idx, c) in lie.terms() {
                    report.record_zero(
                        format!(
                            "integrability.iv.{u}.{}.{}",
                            chart.name(idx[0]),
                            chart.name(idx[1])
                        ),
                        format!("invariance of the leaf bivector along normal field {u}"),
                        &classify_zero(c, chart, cfg),
                    );
                }
                if lie.terms().count() == 0 {
                    report.record(
                        format!("integrability.iv.{u}"),
                        format!("invariance of the leaf bivector along normal field {u}"),
                        CheckStatus::Pass,
                        vec![],
                    );
                }
            }
            Err(e) => report.record(
                format!("integrability.iv.{u}"),
                e.to_string(),
                CheckStatus::Invalid,
                vec![],
            ),
        }
    }
    report
}

/// The frame-level conditions on an almost-coupling pair of sub-frames.
pub fn check_integrability_almost_coupling(
    l_h: &[Section],
    l_f: &[Section],
    split: &FrameSplit,
    cfg: &SampleConfig,
) -> VerificationReport {
    let mut report = VerificationReport::new();
    let chart = split.chart();
    // 1) cyclic sum of X1(alpha2(X3)) + alpha1([X2, X3]) over normal triples
    let mut cond1_checked = false;
    for i in 0..l_h.len() {
        for j in 0..l_h.len() {
            for k in 0..l_h.len() {
                if i == j || j == k || i == k {
                    continue;
                }
                cond1_checked = true;
                let mut acc = Expr::zero();
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    let x1 = &l_h[a];
                    let x2 = &l_h[b];
                    let x3 = &l_h[c];
                    let alpha2_x3 = x2.form.apply(&x3.vector).expect("chart");
                    acc = Expr::add(
                        acc,
                        crate::cartan::apply_field(&x1.vector, &alpha2_x3),
                    );
                    let bracket = lie_bracket(&x2.vector, &x3.vector).expect("chart");
                    acc = Expr::add(acc, x1.form.apply(&bracket).expect("chart"));
                }
                report.record_zero(
                    format!("almost_coupling_integrability.1.{i}.{j}.{k}"),
                    format!("normal-triple cocycle condition on ({i},{j},{k})"),
                    &classify_zero(&acc, chart, cfg),
                );
            }
        }
    }
    if !cond1_checked {
        report.record(
            "almost_coupling_integrability.1",
            "normal-triple cocycle condition (vacuous below three normal sections)",
            CheckStatus::Pass,
            vec![],
        );
    }
    // 2) (L_Y alpha2)(X1) + alpha1([Y, X2]) = lambda([X1, X2])
    for (yi, yf) in l_f.iter().enumerate() {
        for (i, s1) in l_h.iter().enumerate() {
            for (j, s2) in l_h.iter().enumerate() {
                if i == j {
                    continue;
                }
                let ly_alpha2 =
                    crate::cartan::lie_derivative_form(&yf.vector, &s2.form.to_graded())
                        .expect("chart");
                let term1 = OneForm::from_graded(&ly_alpha2)
                    .expect("degree 1")
                    .apply(&s1.vector)
                    .expect("chart");
                let term2 = s1
                    .form
                    .apply(&lie_bracket(&yf.vector, &s2.vector).expect("chart"))
                    .expect("chart");
                let rhs = yf
                    .form
                    .apply(&lie_bracket(&s1.vector, &s2.vector).expect("chart"))
                    .expect("chart");
                let residual = Expr::sub(Expr::add(term1, term2), rhs);
                report.record_zero(
                    format!("almost_coupling_integrability.2.{yi}.{i}.{j}"),
                    format!("mixed condition on leaf section {yi} and normal pair ({i},{j})"),
                    &classify_zero(&residual, chart, cfg),
                );
            }
        }
    }
    // 3) (L_X lambda1)(Y2) + lambda2([X, Y1]) = 0
    for (xi, xs) in l_h.iter().enumerate() {
        for (i, t1) in l_f.iter().enumerate() {
            for (j, t2) in l_f.iter().enumerate() {
                let lx_lambda1 =
                    crate::cartan::lie_derivative_form(&xs.vector, &t1.form.to_graded())
                        .expect("chart");
                let term1 = OneForm::from_graded(&lx_lambda1)
                    .expect("degree 1")
                    .apply(&t2.vector)
                    .expect("chart");
                let term2 = t2
                    .form
                    .apply(&lie_bracket(&xs.vector, &t1.vector).expect("chart"))
                    .expect("chart");
                let residual = Expr::add(term1, term2);
                report.record_zero(
                    format!("almost_coupling_integrability.3.{xi}.{i}.{j}"),
                    format!("mixed condition on normal section {xi} and leaf pair ({i},{j})"),
                    &classify_zero(&residual, chart, cfg),
                );
            }
        }
    }
    // 4) the leaf-tangent bracket of leaf sections stays in the leaf component
    for i in 0..l_f.len() {
        for j in (i + 1)..l_f.len() {
            let y1 = &l_f[i];
            let y2 = &l_f[j];
            let vector = lie_bracket(&y1.vector, &y2.vector).expect("chart");
            let d2_lambda2 = bigraded_d(&y2.form.to_graded(), split).expect("chart").1;
            let d2_lambda1 = bigraded_d(&y1.form.to_graded(), split).expect("chart").1;
            let t1 = d2_lambda2.interior(&y1.vector).expect("chart");
            let t2 = d2_lambda1.interior(&y2.vector).expect("chart");
            let pairing = y2.form.apply(&y1.vector).expect("chart");
            let t3 = split.d_leaf_scalar(&pairing).to_graded();
            let form = OneForm::from_graded(&t1.sub(&t2).expect("chart").add(&t3).expect("chart"))
                .expect("degree 1");
            let candidate = Section::new(vector, form).expect("chart");
            let (status, label) = section_in_span(&candidate, l_f, chart, cfg);
            report.record(
                format!("almost_coupling_integrability.4.{i}.{j}"),
                format!("leaf bracket of ({i},{j}) stays leaf-tangent{label}"),
                status,
                vec![],
            );
        }
    }
    report
}

/// Decide whether a section lies in the span of a family over the function
/// field, with a pointwise fallback for non-rational coefficients.
fn section_in_span(
    candidate: &Section,
    family: &[Section],
    chart: &Chart,
    cfg: &SampleConfig,
) -> (CheckStatus, &'static str) {
    let mut rows: Vec<Vec<Expr>> = family.iter().map(Section::fiber_row).collect();
    let base = SymMatrix::from_rows(rows.clone());
    rows.push(candidate.fiber_row());
    let stacked = SymMatrix::from_rows(rows);
    if let (Ok(a), Ok(b)) = (base.rank(), stacked.rank()) {
        return (
            if a == b { CheckStatus::Pass } else { CheckStatus::Fail },
            "",
        );
    }
    // pointwise fallback
    for k in 0..cfg.count {
        let outcome = with_retries(chart, cfg, k, |p| {
            let mut base_rows = Vec::new();
            for s in family {
                base_rows.push(s.fiber_row_at(p).ok()?);
            }
            let m = QMatrix::from_rows(base_rows);
            let row = candidate.fiber_row_at(p).ok()?;
            Some(m.row_space_contains(&row))
        });
        match outcome {
            Some((_, true)) => {}
            Some((_, false)) => return (CheckStatus::Fail, " [sampled]"),
            None => return (CheckStatus::Unknown, " [sampled]"),
        }
    }
    (CheckStatus::Pass, " [sampled]")
}

/// The four conditions on an almost-coupling bivector, quantified over the
/// split coframes.
pub fn check_integrability_poisson(
    p: &MultiVector,
    split: &FrameSplit,
    cfg: &SampleConfig,
) -> VerificationReport {
    let mut report = VerificationReport::new();
    let chart = split.chart();
    let blocks = match split.bigrade_bivector(p) {
        Ok(b) => b,
        Err(e) => {
            report.record("poisson.blocks", e.to_string(), CheckStatus::Invalid, vec![]);
            return report;
        }
    };
    // almost-coupling gate: no mixed component
    let mut mixed_ok = true;
    for row in &blocks.hf {
        for c in row {
            if !classify_zero(c, chart, cfg).is_zero() {
                mixed_ok = false;
            }
        }
    }
    report.record_pass_fail(
        "poisson.almost_coupling",
        "the bivector has no mixed component relative to the split",
        mixed_ok,
        vec![],
    );
    if !mixed_ok {
        return report;
    }
    let q = chart.transverse_dim();
    let p_dim = chart.leaf_dim();
    // assemble the pure parts as actual bivectors
    let h = split.h_frame();
    let mut p_h = MultiVector::zero(chart, 2).expect("degree 2");
    for u in 0..q {
        for v in (u + 1)..q {
            let wedge = h[u].to_graded().wedge(&h[v].to_graded()).expect("chart");
            p_h = p_h.add(&wedge.scale(&blocks.hh[u][v])).expect("chart");
        }
    }
    let leaves = chart.leaf_indices();
    let mut p_f = MultiVector::zero(chart, 2).expect("degree 2");
    for a in 0..p_dim {
        for b in (a + 1)..p_dim {
            p_f.add_term(&[leaves[a], leaves[b]], blocks.ff[a][b].clone());
        }
    }
    let dxs: Vec<OneForm> = chart
        .transverse_indices()
        .iter()
        .map(|&u| OneForm::basis(chart, u))
        .collect();
    let lambdas = split.lambda_coframe();
    // 1) (L_{#P' gamma} P')(alpha, beta) = d' gamma (#P' alpha, #P' beta)
    for g in 0..q {
        let sg = sharp(&p_h, &dxs[g]).expect("bivector");
        let lie = lie_derivative_multi(&sg, &p_h).expect("chart");
        let (d1g, _, _) = bigraded_d(&dxs[g].to_graded(), split).expect("chart");
        for a in 0..q {
            for b in (a + 1)..q {
                let lhs = lie.eval_on(&[&dxs[a], &dxs[b]]).expect("degrees");
                let sa = sharp(&p_h, &dxs[a]).expect("bivector");
                let sb = sharp(&p_h, &dxs[b]).expect("bivector");
                let rhs = d1g.eval_on(&[&sa, &sb]).expect("degrees");
                report.record_zero(
                    format!("poisson.1.{g}.{a}.{b}"),
                    format!("normal derivative condition on (dx^{g}; dx^{a}, dx^{b})"),
                    &classify_zero(&Expr::sub(lhs, rhs), chart, cfg),
                );
            }
        }
    }
    // 2) (L_{#P' lambda} P')(alpha, beta) = -lambda([#P' alpha, #P' beta])
    for li in 0..p_dim {
        let sl = sharp(&p_h, &lambdas[li]).expect("bivector");
        let lie = lie_derivative_multi(&sl, &p_h).expect("chart");
        for a in 0..q {
            for b in (a + 1)..q {
                let lhs = lie.eval_on(&[&dxs[a], &dxs[b]]).expect("degrees");
                let sa = sharp(&p_h, &dxs[a]).expect("bivector");
                let sb = sharp(&p_h, &dxs[b]).expect("bivector");
                let bracket = lie_bracket(&sa, &sb).expect("chart");
                let rhs = Expr::neg(lambdas[li].apply(&bracket).expect("chart"));
                report.record_zero(
                    format!("poisson.2.{li}.{a}.{b}"),
                    format!("leaf covector condition on (l^{li}; dx^{a}, dx^{b})"),
                    &classify_zero(&Expr::sub(lhs, rhs), chart, cfg),
                );
            }
        }
    }
    // 3) (L_{#P' gamma} P'')(lambda, mu) = 0
    for g in 0..q {
        let sg = sharp(&p_h, &dxs[g]).expect("bivector");
        let lie = lie_derivative_multi(&sg, &p_f).expect("chart");
        for a in 0..p_dim {
            for b in (a + 1)..p_dim {
                let value = lie.eval_on(&[&lambdas[a], &lambdas[b]]).expect("degrees");
                report.record_zero(
                    format!("poisson.3.{g}.{a}.{b}"),
                    format!("leaf-part invariance on (dx^{g}; l^{a}, l^{b})"),
                    &classify_zero(&value, chart, cfg),
                );
            }
        }
    }
    // 4) (L_{#P'' nu} P')(lambda, mu) = d'' nu (#P'' lambda, #P'' mu)
    for ni in 0..p_dim {
        let sn = sharp(&p_f, &lambdas[ni]).expect("bivector");
        let lie = lie_derivative_multi(&sn, &p_h).expect("chart");
        let (_, d2n, _) = bigraded_d(&lambdas[ni].to_graded(), split).expect("chart");
        for a in 0..p_dim {
            for b in (a + 1)..p_dim {
                let lhs = lie.eval_on(&[&lambdas[a], &lambdas[b]]).expect("degrees");
                let sa = sharp(&p_f, &lambdas[a]).expect("bivector");
                let sb = sharp(&p_f, &lambdas[b]).expect("bivector");
                let rhs = d2n.eval_on(&[&sa, &sb]).expect("degrees");
                report.record_zero(
                    format!("poisson.4.{ni}.{a}.{b}"),
                    format!("fiber condition on (l^{ni}; l^{a}, l^{b})"),
                    &classify_zero(&Expr::sub(lhs, rhs), chart, cfg),
                );
            }
        }
    }
    report
}

/// The homogeneous closedness conditions of a block 2-form relative to the
/// split: the leaf and normal parts are closed in each bidegree.
pub fn check_integrability_presymplectic(
    tau: &DiffForm,
    split: &FrameSplit,
    cfg: &SampleConfig,
) -> VerificationReport {
    let mut report = VerificationReport::new();
    let chart = split.chart();
    let big = match to_bigraded(tau, split) {
        Ok(b) => b,
        Err(e) => {
            report.record("presymplectic.blocks", e.to_string(), CheckStatus::Invalid, vec![]);
            return report;
        }
    };
    let mixed = crate::cartan::from_bigraded(&big.piece(1, 1), split).expect("chart");
    let mut mixed_ok = true;
    for (_, c) in mixed.terms() {
        if !classify_zero(c, chart, cfg).is_zero() {
            mixed_ok = false;
        }
    }
    report.record_pass_fail(
        "presymplectic.almost_coupling",
        "the 2-form has no mixed component relative to the split",
        mixed_ok,
        vec![],
    );
    if !mixed_ok {
        return report;
    }
    let tau_h = crate::cartan::from_bigraded(&big.piece(2, 0), split).expect("chart");
    let tau_f = crate::cartan::from_bigraded(&big.piece(0, 2), split).expect("chart");
    let (d1_h, d2_h, _d3_h) = bigraded_d(&tau_h, split).expect("chart");
    let (d1_f, d2_f, d3_f) = bigraded_d(&tau_f, split).expect("chart");
    let conditions: [(&str, &str, DiffForm); 4] = [
        (
            "presymplectic.leaf_closed",
            "leaf part closed along the leaves",
            d2_f,
        ),
        (
            "presymplectic.normal_closed",
            "normal part closed along the normal directions",
            d1_h,
        ),
        (
            "presymplectic.mixed_closed",
            "mixed component of d tau vanishes",
            d2_h.add(&d3_f).expect("degrees"),
        ),
        (
            "presymplectic.normal_leaf_closed",
            "leaf part closed along the normal directions",
            d1_f,
        ),
    ];
    for (id, label, form) in conditions {
        let mut worst = CheckStatus::Pass;
        let mut witness = Vec::new();
        let mut sampled = false;
        for (_, c) in form.terms() {
            let v = classify_zero(c, chart, cfg);
            match v {
                crate::expr::ZeroVerdict::Zero => {}
                crate::expr::ZeroVerdict::SampledZero => sampled = true,
                crate::expr::ZeroVerdict::NonZero(ref w) => {
                    worst = worst.worst(CheckStatus::Fail);
                    if witness.is_empty() {
                        witness.push(crate::report::Witness::from_zero_witness(w));
                    }
                }
                crate::expr::ZeroVerdict::Unknown => worst = worst.worst(CheckStatus::Unknown),
            }
        }
        let label = if sampled {
            format!("{label} [sampled]")
        } else {
            label.to_string()
        };
        report.record(id, label, worst, witness);
    }
    report
}

/// Recover a bivector whose graph spans the frame, when one exists: solve
/// for sections with form parts the coordinate coframe.
pub fn poisson_bivector_of(l: &DiracFrame) -> Result<Option<MultiVector>> {
    let chart = l.chart();
    let n = chart.dim();
    let forms = SymMatrix::from_rows(
        l.sections()
            .iter()
            .map(|s| s.form.comps().to_vec())
            .collect(),
    );
    let mut pi = MultiVector::zero(chart, 2)?;
    for i in 0..n {
        let mut target = vec![Expr::zero(); n];
        target[i] = Expr::one();
        let Some(xi) = forms.transpose_solve(&target)? else {
            return Ok(None);
        };
        for j in (i + 1)..n {
            let mut acc = Expr::zero();
            for (k, c) in xi.iter().enumerate() {
                acc = Expr::add(acc, Expr::mul(c.clone(), l.sections()[k].vector.comp(j).clone()));
            }
            pi.add_term(&[i, j], rational_form(&acc)?.to_expr());
        }
    }
    Ok(Some(pi))
}

/// Antisymmetry witness used in unit tests: `w(s1,s2)` restricted to frames.
pub fn frame_omega(l: &DiracFrame, i: usize, j: usize) -> Result<Expr> {
    pairing_omega(&l.sections()[i], &l.sections()[j])
}

/// Bracket-closure residual against an explicit section family; used by the
/// equivalence tests between the frame conditions and the data conditions.
pub fn closure_residual(l: &DiracFrame, i: usize, j: usize, k: usize) -> Result<Expr> {
    let b = courant_bracket(&l.sections()[i], &l.sections()[j])?;
    crate::courant::pairing_g(&b, &l.sections()[k])
}
