//! The standard Courant algebroid `TM + T*M`: pairings, bracket, Dirac
//! verdicts, pointwise characteristic data and pointwise normal-form bases.
//!
//! A structure is always presented by an explicit frame of `dim M` sections;
//! subbundle conditions become exact pairing and rank computations.

use crate::cartan::{
    d_scalar, flat, lie_bracket, lie_derivative_form, sharp, DiffForm, MultiVector, OneForm,
    VectorField,
};
use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::expr::{classify_zero, with_retries, Expr, SampleConfig, ZeroVerdict};
use crate::linalg::{intersection_dim, QMatrix};
use crate::report::{point_witness, CheckStatus, VerificationReport};
use crate::scalar::Scalar;

/// A section of `TM + T*M`: a vector field together with a 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub vector: VectorField,
    pub form: OneForm,
}

impl Section {
    pub fn new(vector: VectorField, form: OneForm) -> Result<Section> {
        vector.chart().same_as(form.chart())?;
        Ok(Section { vector, form })
    }

    pub fn zero(chart: &Chart) -> Section {
        Section {
            vector: VectorField::zero(chart),
            form: OneForm::zero(chart),
        }
    }

    pub fn chart(&self) -> &Chart {
        self.vector.chart()
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        Ok(Section {
            vector: self.vector.add(&other.vector)?,
            form: self.form.add(&other.form)?,
        })
    }

    pub fn sub(&self, other: &Section) -> Result<Section> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Section {
        Section {
            vector: self.vector.neg(),
            form: self.form.neg(),
        }
    }

    pub fn scale(&self, f: &Expr) -> Section {
        Section {
            vector: self.vector.scale(f),
            form: self.form.scale(f),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> Section {
        Section {
            vector: self.vector.map_coeffs(&f),
            form: self.form.map_coeffs(&f),
        }
    }

    /// The fiber coordinates `(X^1..X^n, a_1..a_n)` as expressions.
    pub fn fiber_row(&self) -> Vec<Expr> {
        self.vector
            .comps()
            .iter()
            .chain(self.form.comps().iter())
            .cloned()
            .collect()
    }

    /// Evaluate to an exact fiber row at a point.
    pub fn fiber_row_at(&self, p: &Point) -> Result<Vec<Scalar>> {
        let chart = self.chart();
        self.fiber_row()
            .iter()
            .map(|e| e.eval_exact(chart, p))
            .collect()
    }
}

/// Symmetric pairing `g(s1,s2) = (b(X) + a(Y))/2`.
pub fn pairing_g(s1: &Section, s2: &Section) -> Result<Expr> {
    s1.chart().same_as(s2.chart())?;
    let term1 = s2.form.apply(&s1.vector)?;
    let term2 = s1.form.apply(&s2.vector)?;
    Ok(Expr::mul(Expr::rat(1, 2), Expr::add(term1, term2)))
}

/// Antisymmetric pairing `w(s1,s2) = (a(Y) - b(X))/2`.
pub fn pairing_omega(s1: &Section, s2: &Section) -> Result<Expr> {
    s1.chart().same_as(s2.chart())?;
    let term1 = s1.form.apply(&s2.vector)?;
    let term2 = s2.form.apply(&s1.vector)?;
    Ok(Expr::mul(Expr::rat(1, 2), Expr::sub(term1, term2)))
}

/// The skew bracket `[(X,a),(Y,b)] = ([X,Y], L_X b - L_Y a + d w(s1,s2))`.
/// Components are returned in normal form so that nested brackets stay
/// compact.
pub fn courant_bracket(s1: &Section, s2: &Section) -> Result<Section> {
    s1.chart().same_as(s2.chart())?;
    let chart = s1.chart();
    let vector = lie_bracket(&s1.vector, &s2.vector)?;
    let lxb = lie_derivative_form(&s1.vector, &s2.form.to_graded())?;
    let lya = lie_derivative_form(&s2.vector, &s1.form.to_graded())?;
    let omega = pairing_omega(s1, s2)?;
    let domega = d_scalar(chart, &omega).to_graded();
    let form = OneForm::from_graded(&lxb.sub(&lya)?.add(&domega)?)?;
    Ok(Section::new(vector, form)?.map_coeffs(Expr::simplified))
}

/// `(0, df)`; satisfies `g(c, partial f) = (1/2) (rho c) f` identically.
pub fn partial_f(chart: &Chart, f: &Expr) -> Section {
    Section {
        vector: VectorField::zero(chart),
        form: d_scalar(chart, f),
    }
}

/// How a frame came to be; some verdicts specialize on the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameOrigin {
    Explicit,
    PoissonGraph(MultiVector),
    PresymplecticGraph(DiffForm),
    Reconstructed,
}

/// A maximal isotropic subbundle candidate presented by `dim M` sections.
///
/// Pointwise rank is checked by the verdicts, not assumed; isotropy is a
/// verdict of [`check_almost_dirac`], not an invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracFrame {
    chart: Chart,
    sections: Vec<Section>,
    pub origin: FrameOrigin,
}

impl DiracFrame {
    pub fn from_sections(chart: &Chart, sections: Vec<Section>) -> Result<DiracFrame> {
        for s in &sections {
            chart.same_as(s.chart())?;
        }
        if sections.len() != chart.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} sections for a {}-dimensional chart",
                sections.len(),
                chart.dim()
            )));
        }
        Ok(DiracFrame {
            chart: chart.clone(),
            sections,
            origin: FrameOrigin::Explicit,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn with_origin(mut self, origin: FrameOrigin) -> DiracFrame {
        self.origin = origin;
        self
    }

    /// Graph of a bivector: frame `{(#_P dx^i, dx^i)}`.
    pub fn graph_of_poisson(p: &MultiVector) -> Result<DiracFrame> {
        if p.degree() != 2 {
            return Err(Error::InvalidDegree("expected a bivector".into()));
        }
        let chart = p.chart().clone();
        let mut sections = Vec::with_capacity(chart.dim());
        for i in 0..chart.dim() {
            let dxi = OneForm::basis(&chart, i);
            sections.push(Section {
                vector: sharp(p, &dxi)?,
                form: dxi,
            });
        }
        Ok(DiracFrame {
            chart,
            sections,
            origin: FrameOrigin::PoissonGraph(p.clone()),
        })
    }

    /// Graph of a 2-form: frame `{(d_i, b_t d_i)}`.
    pub fn graph_of_presymplectic(tau: &DiffForm) -> Result<DiracFrame> {
        if tau.degree() != 2 {
            return Err(Error::InvalidDegree("expected a 2-form".into()));
        }
        let chart = tau.chart().clone();
        let mut sections = Vec::with_capacity(chart.dim());
        for i in 0..chart.dim() {
            let ei = VectorField::basis(&chart, i);
            sections.push(Section {
                form: flat(tau, &ei)?,
                vector: ei,
            });
        }
        Ok(DiracFrame {
            chart,
            sections,
            origin: FrameOrigin::PresymplecticGraph(tau.clone()),
        })
    }

    /// Exact fiber matrix of the frame at a point (rows are sections).
    pub fn matrix_at(&self, p: &Point) -> Result<QMatrix> {
        let rows = self
            .sections
            .iter()
            .map(|s| s.fiber_row_at(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(QMatrix::from_rows(rows))
    }

    /// The same frame over a chart with renamed coordinates.
    pub fn rename_chart(&self, new_chart: &Chart) -> Result<DiracFrame> {
        if new_chart.dim() != self.chart.dim() {
            return Err(Error::DimensionMismatch(
                "renamed chart has a different dimension".into(),
            ));
        }
        let map: Vec<(&str, &str)> = self
            .chart
            .names()
            .iter()
            .zip(new_chart.names())
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let sections = self
            .sections
            .iter()
            .map(|s| {
                Section::new(
                    VectorField::new(
                        new_chart,
                        s.vector.comps().iter().map(|e| e.rename_coords(&map)).collect(),
                    )?,
                    OneForm::new(
                        new_chart,
                        s.form.comps().iter().map(|e| e.rename_coords(&map)).collect(),
                    )?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiracFrame {
            chart: new_chart.clone(),
            sections,
            origin: FrameOrigin::Explicit,
        })
    }
}

/// A point of a chart together with an exact basis of a subspace of the
/// `2n`-dimensional fiber of `TM + T*M`.
#[derive(Debug, Clone)]
pub struct PointSubspace {
    pub point: Point,
    pub basis: QMatrix,
}

impl PointSubspace {
    pub fn dim(&self) -> usize {
        self.basis.rank()
    }
}

/// Fiber-level symmetric pairing of two `2n`-rows.
pub fn fiber_g(row1: &[Scalar], row2: &[Scalar]) -> Scalar {
    let n = row1.len() / 2;
    let mut acc = Scalar::zero();
    for i in 0..n {
        acc += &row1[i] * &row2[n + i];
        acc += &row2[i] * &row1[n + i];
    }
    acc * Scalar::ratio(1, 2)
}

/// Fiber-level antisymmetric pairing of two `2n`-rows.
pub fn fiber_omega(row1: &[Scalar], row2: &[Scalar]) -> Scalar {
    let n = row1.len() / 2;
    let mut acc = Scalar::zero();
    for i in 0..n {
        acc += &row1[n + i] * &row2[i];
        acc -= &row2[n + i] * &row1[i];
    }
    acc * Scalar::ratio(1, 2)
}

/// PASS iff all pairwise `g`-pairings classify Zero and the frame has
/// pointwise rank `n` at every sample point.
pub fn check_almost_dirac(l: &DiracFrame, cfg: &SampleConfig) -> VerificationReport {
    let mut report = VerificationReport::new();
    let chart = l.chart();
    let n = chart.dim();
    for i in 0..n {
        for j in i..n {
            match pairing_g(&l.sections[i], &l.sections[j]) {
                Ok(g) => {
                    let verdict = classify_zero(&g, chart, cfg);
                    report.record_zero(
                        format!("almost_dirac.isotropy.{i}.{j}"),
                        format!("pairing g(l_{i}, l_{j}) vanishes identically"),
                        &verdict,
                    );
                }
                Err(e) => report.record(
                    format!("almost_dirac.isotropy.{i}.{j}"),
                    e.to_string(),
                    CheckStatus::Invalid,
                    vec![],
                ),
            }
        }
    }
    let mut rank_witnesses = Vec::new();
    let mut rank_ok = true;
    let mut rank_unknown = false;
    let mut rank_sampled = false;
    for k in 0..cfg.count {
        let outcome = with_retries(chart, cfg, k, |p| match l.matrix_at(p) {
            Ok(m) => Some((m.rank(), true)),
            Err(Error::TranscendentalExact) => {
                float_rank_at(l, p, cfg.tol).map(|r| (r, false))
            }
            Err(_) => None,
        });
        match outcome {
            Some((p, (r, exact))) => {
                if !exact {
                    rank_sampled = true;
                }
                if r != n {
                    rank_ok = false;
                    rank_witnesses.push(point_witness(chart, &p, vec![format!("rank = {r}")]));
                }
            }
            None => rank_unknown = true,
        }
    }
    let status = if !rank_ok {
        CheckStatus::Fail
    } else if rank_unknown {
        CheckStatus::Unknown
    } else {
        CheckStatus::Pass
    };
    let mut label = format!("frame has pointwise rank {n} at all sample points");
    if rank_sampled {
        label.push_str(" [sampled]");
    }
    report.record("almost_dirac.rank", label, status, rank_witnesses);
    report
}

/// Numeric rank with a pivot threshold, for frames whose coefficients cannot
/// be evaluated exactly.
fn float_rank_at(l: &DiracFrame, p: &Point, tol: f64) -> Option<usize> {
    let chart = l.chart();
    let fp = p.to_f64();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for s in l.sections() {
        let row = s
            .fiber_row()
            .iter()
            .map(|e| e.eval_f64(chart, &fp))
            .collect::<Result<Vec<f64>>>()
            .ok()?;
        rows.push(row);
    }
    let scale = rows
        .iter()
        .flatten()
        .fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let threshold = tol * scale;
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(best) = (pivot_row..rows.len())
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
        else {
            break;
        };
        if rows[best][col].abs() <= threshold {
            continue;
        }
        rows.swap(pivot_row, best);
        for r in (pivot_row + 1)..rows.len() {
            let factor = rows[r][col] / rows[pivot_row][col];
            for c in col..cols {
                rows[r][c] -= factor * rows[pivot_row][c];
            }
        }
        pivot_row += 1;
        rank += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    Some(rank)
}

/// PASS iff `g([l_i, l_j], l_k)` classifies Zero for all frame pairs `i < j`
/// and all `k`. Requires [`check_almost_dirac`] to pass; reported INVALID
/// otherwise. Frame closure is equivalent to closure for arbitrary sections
/// by bilinearity and the Leibniz behavior of the bracket.
pub fn check_dirac(l: &DiracFrame, cfg: &SampleConfig) -> VerificationReport {
    let mut report = VerificationReport::new();
    let almost = check_almost_dirac(l, cfg);
    if !almost.passed() {
        report.record(
            "dirac.precondition",
            "almost-Dirac verdict must pass before bracket closure",
            CheckStatus::Invalid,
            vec![],
        );
        report.merge(almost);
        return report;
    }
    let chart = l.chart();
    let n = chart.dim();
    for i in 0..n {
        for j in (i + 1)..n {
            let bracket = match courant_bracket(&l.sections[i], &l.sections[j]) {
                Ok(b) => b,
                Err(e) => {
                    report.record(
                        format!("dirac.closure.{i}.{j}"),
                        e.to_string(),
                        CheckStatus::Invalid,
                        vec![],
                    );
                    continue;
                }
            };
            for k in 0..n {
                match pairing_g(&bracket, &l.sections[k]) {
                    Ok(g) => {
                        let verdict = classify_zero(&g, chart, cfg);
                        report.record_zero(
                            format!("dirac.closure.{i}.{j}.{k}"),
                            format!("g([l_{i}, l_{j}], l_{k}) vanishes identically"),
                            &verdict,
                        );
                    }
                    Err(e) => report.record(
                        format!("dirac.closure.{i}.{j}.{k}"),
                        e.to_string(),
                        CheckStatus::Invalid,
                        vec![],
                    ),
                }
            }
        }
    }
    report
}

/// Residuals of the three Courant algebroid axioms on the given sections:
/// anchor homomorphism, the Jacobi anomaly identity, and metric invariance.
/// The first three sections supply the test triple.
pub fn check_courant_axioms(
    sections: &[Section],
    f: &Expr,
    cfg: &SampleConfig,
) -> Result<VerificationReport> {
    if sections.len() < 3 {
        return Err(Error::InvalidInput(
            "the axiom suite needs at least three sections".into(),
        ));
    }
    let chart = sections[0].chart().clone();
    for s in sections {
        chart.same_as(s.chart())?;
    }
    let mut report = VerificationReport::new();
    let c1 = &sections[0];
    let c2 = &sections[1];
    let c3 = &sections[2];

    // i) rho[c1,c2] = [rho c1, rho c2]
    let bracket = courant_bracket(c1, c2)?;
    let anchor_residual = bracket.vector.sub(&lie_bracket(&c1.vector, &c2.vector)?)?;
    record_vector_zero(&mut report, "axioms.anchor", &anchor_residual, &chart, cfg);

    // the derived operator: g(c, (0,df)) = (1/2)(rho c) f
    let pf = partial_f(&chart, f);
    let gpf = pairing_g(c1, &pf)?;
    let half_cf = Expr::mul(Expr::rat(1, 2), crate::cartan::apply_field(&c1.vector, f));
    report.record_zero(
        "axioms.partial_pairing",
        "g(c, (0,df)) equals half the anchor derivative of f",
        &classify_zero(&Expr::sub(gpf, half_cf), &chart, cfg),
    );

    // ii) sum_cycl [[c1,c2],c3] = (1/3)(0, d sum_cycl g([c1,c2],c3))
    let mut jacobi = Section::zero(&chart);
    let mut scalar_sum = Expr::zero();
    for (a, b, c) in [(c1, c2, c3), (c2, c3, c1), (c3, c1, c2)] {
        let ab = courant_bracket(a, b)?;
        jacobi = jacobi.add(&courant_bracket(&ab, c)?)?;
        scalar_sum = Expr::add(scalar_sum, pairing_g(&ab, c)?.simplified());
    }
    let rhs = partial_f(&chart, &scalar_sum.simplified()).scale(&Expr::rat(1, 3));
    let residual = jacobi.sub(&rhs)?;
    record_vector_zero(&mut report, "axioms.jacobi.vector", &residual.vector, &chart, cfg);
    record_form_zero(&mut report, "axioms.jacobi.form", &residual.form, &chart, cfg);

    // iii) (rho c){g(c1,c2)} = g([c,c1] + partial g(c,c1), c2)
    //                        + g(c1, [c,c2] + partial g(c,c2))
    let lhs = crate::cartan::apply_field(&c1.vector, &pairing_g(c2, c3)?.simplified());
    let t1 =
        courant_bracket(c1, c2)?.add(&partial_f(&chart, &pairing_g(c1, c2)?.simplified()))?;
    let t2 =
        courant_bracket(c1, c3)?.add(&partial_f(&chart, &pairing_g(c1, c3)?.simplified()))?;
    let rhs = Expr::add(pairing_g(&t1, c3)?, pairing_g(c2, &t2)?);
    report.record_zero(
        "axioms.invariance",
        "anchor derivative of g(c1,c2) matches the bracket derivation identity",
        &classify_zero(&Expr::sub(lhs, rhs), &chart, cfg),
    );
    Ok(report)
}

pub(crate) fn record_vector_zero(
    report: &mut VerificationReport,
    id: &str,
    v: &VectorField,
    chart: &Chart,
    cfg: &SampleConfig,
) {
    for (i, comp) in v.comps().iter().enumerate() {
        let verdict = classify_zero(comp, chart, cfg);
        if !matches!(verdict, ZeroVerdict::Zero) || i == 0 {
            report.record_zero(
                format!("{id}.{}", chart.name(i)),
                format!("component along d/d{} vanishes", chart.name(i)),
                &verdict,
            );
        }
    }
}

pub(crate) fn record_form_zero(
    report: &mut VerificationReport,
    id: &str,
    w: &OneForm,
    chart: &Chart,
    cfg: &SampleConfig,
) {
    for (i, comp) in w.comps().iter().enumerate() {
        let verdict = classify_zero(comp, chart, cfg);
        if !matches!(verdict, ZeroVerdict::Zero) || i == 0 {
            report.record_zero(
                format!("{id}.d{}", chart.name(i)),
                format!("component along d{} vanishes", chart.name(i)),
                &verdict,
            );
        }
    }
}

/// Pointwise characteristic data of a frame at a regular point.
#[derive(Debug, Clone)]
pub struct CharacteristicData {
    /// Basis rows of the tangent projection (an `r x n` matrix).
    pub l_plus: QMatrix,
    /// The induced 2-form on that basis, from representatives in the fiber.
    pub omega_plus: QMatrix,
    /// Basis rows of `L` intersected with the tangent fiber.
    pub kernel_tangent: QMatrix,
    /// Basis rows of `L` intersected with the cotangent fiber.
    pub kernel_cotangent: QMatrix,
}

/// Compute `L+`, the induced 2-form on it, and the tangent and cotangent
/// intersections at a point. The induced form is well defined because
/// representatives differ by cotangent elements, which pair to zero with
/// everything in the subspace.
pub fn characteristic_data_at(l: &DiracFrame, p: &Point) -> Result<CharacteristicData> {
    let n = l.chart().dim();
    let m = l.matrix_at(p).map_err(|_| Error::SingularPoint)?;
    if m.rank() != n {
        return Err(Error::SingularPoint);
    }
    let tangent = m.select_cols(&(0..n).collect::<Vec<_>>());
    let l_plus = tangent.row_space_basis();
    let r = l_plus.rows;
    let tangent_t = tangent.transpose();
    let mut reps = Vec::with_capacity(r);
    for u in 0..r {
        let xi = tangent_t.solve(l_plus.row(u)).ok_or(Error::SingularPoint)?;
        let mut row = vec![Scalar::zero(); 2 * n];
        for (i, coeff) in xi.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for c in 0..2 * n {
                let v = &row[c] + &(coeff * &m[(i, c)]);
                row[c] = v;
            }
        }
        reps.push(row);
    }
    let mut omega_plus = QMatrix::zeros(r, r);
    for u in 0..r {
        for v in 0..r {
            omega_plus[(u, v)] = fiber_omega(&reps[u], &reps[v]);
        }
    }
    let form_part = m.select_cols(&(n..2 * n).collect::<Vec<_>>());
    let kernel_tangent = combine_rows(&form_part.transpose().nullspace(), &tangent).row_space_basis();
    let kernel_cotangent =
        combine_rows(&tangent.transpose().nullspace(), &form_part).row_space_basis();
    Ok(CharacteristicData {
        l_plus,
        omega_plus,
        kernel_tangent,
        kernel_cotangent,
    })
}

/// Rows `xi . m` for each coefficient row `xi`.
fn combine_rows(coeffs: &QMatrix, m: &QMatrix) -> QMatrix {
    let mut out = QMatrix::zeros(0, m.cols);
    for xi in coeffs.rows_iter() {
        let mut row = vec![Scalar::zero(); m.cols];
        for (i, coeff) in xi.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for c in 0..m.cols {
                let v = &row[c] + &(coeff * &m[(i, c)]);
                row[c] = v;
            }
        }
        out.push_row(row);
    }
    out
}

/// A pointwise basis in block normal form for a maximal isotropic subspace.
#[derive(Debug, Clone)]
pub struct DwBasis {
    /// Rows `(l_u + A^b_u f_b | alpha_uv lambda^v)` in fiber coordinates.
    pub h_rows: QMatrix,
    /// Rows `(B^{ab} f_b | phi^a - A^a_v lambda^v)` in fiber coordinates.
    pub v_rows: QMatrix,
    /// Graph coefficients of the h-rows over the complement (`r x (n-r)`).
    pub a_coeffs: QMatrix,
    /// Coefficient matrix of the induced 2-form on the h-rows (`r x r`).
    pub alpha: QMatrix,
    /// Complement coefficients of the v-rows (`(n-r) x (n-r)`).
    pub b_coeffs: QMatrix,
}

impl DwBasis {
    pub fn assembled(&self) -> QMatrix {
        self.h_rows.vstack(&self.v_rows)
    }
}

/// Put a maximal isotropic point subspace into block normal form relative to
/// a chosen complement of its tangent projection.
///
/// `complement` lists tangent fiber vectors spanning a complement of the
/// tangent projection; the first family solves for elements over the
/// projection basis with no dual-complement covector components, the second
/// family for elements over the dual complement covectors.
pub fn dw_basis_at(l_p: &PointSubspace, complement: &[Vec<Scalar>]) -> Result<DwBasis> {
    let cols = l_p.basis.cols;
    if cols % 2 != 0 {
        return Err(Error::DimensionMismatch("fiber dimension must be even".into()));
    }
    let n = cols / 2;
    let m = &l_p.basis;
    if m.rank() != n {
        return Err(Error::NotMaximalIsotropic);
    }
    for r1 in m.rows_iter() {
        for r2 in m.rows_iter() {
            if !fiber_g(r1, r2).is_zero() {
                return Err(Error::NotMaximalIsotropic);
            }
        }
    }
    let tangent = m.select_cols(&(0..n).collect::<Vec<_>>());
    let l_plus = tangent.row_space_basis();
    let r = l_plus.rows;
    if complement.len() != n - r {
        return Err(Error::InvalidComplement(format!(
            "expected {} complement vectors, got {}",
            n - r,
            complement.len()
        )));
    }
    let mut basis = l_plus.clone();
    for f in complement {
        if f.len() != n {
            return Err(Error::InvalidComplement("wrong vector length".into()));
        }
        basis.push_row(f.clone());
    }
    if basis.rank() != n {
        return Err(Error::InvalidComplement(
            "complement does not complete the tangent projection".into(),
        ));
    }
    // dual coframe rows: inverse transpose of `basis`
    let basis_t = basis.transpose();
    let mut dual = QMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = vec![Scalar::zero(); n];
        e[i] = Scalar::one();
        let col = basis_t
            .solve(&e)
            .ok_or_else(|| Error::InvalidComplement("basis inversion failed".into()))?;
        for j in 0..n {
            dual[(i, j)] = col[j].clone();
        }
    }
    // frame coordinates of a fiber row: tangent part over (l,f), covector
    // part over (lambda,phi) via theta = theta(l_u) lambda^u + theta(f_a) phi^a
    let frame_rows: Vec<Vec<Scalar>> = m
        .rows_iter()
        .map(|row| {
            let mut out = basis_t.solve(&row[0..n]).expect("basis spans the fiber");
            for i in 0..n {
                let mut acc = Scalar::zero();
                for c in 0..n {
                    acc += &basis[(i, c)] * &row[n + c];
                }
                out.push(acc);
            }
            out
        })
        .collect();
    let frame_m = QMatrix::from_rows(frame_rows);
    let solve_family = |targets: &[(usize, Scalar)]| -> Result<Vec<Scalar>> {
        let cols: Vec<usize> = targets.iter().map(|(c, _)| *c).collect();
        let vals: Vec<Scalar> = targets.iter().map(|(_, v)| v.clone()).collect();
        let system = frame_m.select_cols(&cols).transpose();
        let xi = system.solve(&vals).ok_or(Error::NotMaximalIsotropic)?;
        let mut row = vec![Scalar::zero(); 2 * n];
        for (i, coeff) in xi.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for c in 0..2 * n {
                let v = &row[c] + &(coeff * &frame_m[(i, c)]);
                row[c] = v;
            }
        }
        Ok(row)
    };
    let mut h_frame_rows = QMatrix::zeros(0, 2 * n);
    let mut a_coeffs = QMatrix::zeros(r, n - r);
    let mut alpha = QMatrix::zeros(r, r);
    for u in 0..r {
        let mut targets: Vec<(usize, Scalar)> = (0..r)
            .map(|c| (c, if c == u { Scalar::one() } else { Scalar::zero() }))
            .collect();
        targets.extend((0..(n - r)).map(|a| (n + r + a, Scalar::zero())));
        let row = solve_family(&targets)?;
        for b in 0..(n - r) {
            a_coeffs[(u, b)] = row[r + b].clone();
        }
        for v in 0..r {
            alpha[(u, v)] = row[n + v].clone();
        }
        h_frame_rows.push_row(row);
    }
    let mut v_frame_rows = QMatrix::zeros(0, 2 * n);
    let mut b_coeffs = QMatrix::zeros(n - r, n - r);
    for a in 0..(n - r) {
        let mut targets: Vec<(usize, Scalar)> = (0..r).map(|c| (c, Scalar::zero())).collect();
        targets.extend(
            (0..(n - r)).map(|b| (n + r + b, if b == a { Scalar::one() } else { Scalar::zero() })),
        );
        let row = solve_family(&targets)?;
        for b in 0..(n - r) {
            b_coeffs[(a, b)] = row[r + b].clone();
        }
        v_frame_rows.push_row(row);
    }
    // back to fiber coordinates
    let to_fiber = |row: &[Scalar]| -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); 2 * n];
        for (i, c) in row[0..n].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for j in 0..n {
                let v = &out[j] + &(c * &basis[(i, j)]);
                out[j] = v;
            }
        }
        for (i, c) in row[n..2 * n].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for j in 0..n {
                let v = &out[n + j] + &(c * &dual[(i, j)]);
                out[n + j] = v;
            }
        }
        out
    };
    let mut h_rows = QMatrix::zeros(0, 2 * n);
    for row in h_frame_rows.rows_iter() {
        h_rows.push_row(to_fiber(row));
    }
    let mut v_rows = QMatrix::zeros(0, 2 * n);
    for row in v_frame_rows.rows_iter() {
        v_rows.push_row(to_fiber(row));
    }
    Ok(DwBasis {
        h_rows,
        v_rows,
        a_coeffs,
        alpha,
        b_coeffs,
    })
}

/// Pointwise dimensions of the tangent projection across the sample points;
/// used by the leaf-parity verdicts. `None` marks an inconclusive index.
pub fn tangent_projection_dims(l: &DiracFrame, cfg: &SampleConfig) -> Vec<Option<usize>> {
    let chart = l.chart();
    let n = chart.dim();
    (0..cfg.count)
        .map(|k| {
            with_retries(chart, cfg, k, |p| {
                let m = l.matrix_at(p).ok()?;
                if m.rank() != n {
                    return None;
                }
                Some(m.select_cols(&(0..n).collect::<Vec<_>>()).rank())
            })
            .map(|(_, d)| d)
        })
        .collect()
}

/// Intersection dimension of two fiber subspaces given by basis rows.
pub fn fiber_intersection_dim(a: &QMatrix, b: &QMatrix) -> usize {
    intersection_dim(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn chart2() -> Chart {
        Chart::new(vec!["x", "y"]).unwrap()
    }

    fn sym2(chart: &Chart) -> DiffForm {
        let mut tau = DiffForm::zero(chart, 2).unwrap();
        tau.add_term(&[0, 1], Expr::one());
        tau
    }

    #[test]
    fn pairing_conventions() {
        let c = chart2();
        let s1 = Section::new(VectorField::basis(&c, 0), OneForm::basis(&c, 1)).unwrap();
        let s2 = Section::new(VectorField::basis(&c, 1), OneForm::basis(&c, 0)).unwrap();
        assert_eq!(pairing_g(&s1, &s2).unwrap(), Expr::one());
        assert_eq!(pairing_omega(&s1, &s2).unwrap(), Expr::zero());
        let t1 = Section::new(VectorField::basis(&c, 0), OneForm::zero(&c)).unwrap();
        let t2 = Section::new(VectorField::basis(&c, 1), OneForm::zero(&c)).unwrap();
        assert_eq!(pairing_g(&t1, &t2).unwrap(), Expr::zero());
    }

    #[test]
    fn bracket_on_exact_forms_vanishes() {
        let c = chart2();
        let f = parse_expr("x^2*y", &c).unwrap();
        let g = parse_expr("y^3 + x", &c).unwrap();
        let b = courant_bracket(&partial_f(&c, &f), &partial_f(&c, &g)).unwrap();
        let cfg = SampleConfig::default();
        for comp in b.vector.comps().iter().chain(b.form.comps()) {
            assert!(classify_zero(comp, &c, &cfg).is_exactly_zero());
        }
    }

    #[test]
    fn bracket_worked_example() {
        let c = chart2();
        // [(x d_y, dx), (d_x, 0)] = (-d_y, 0)
        let s1 = Section::new(
            VectorField::new(&c, vec![Expr::zero(), parse_expr("x", &c).unwrap()]).unwrap(),
            OneForm::basis(&c, 0),
        )
        .unwrap();
        let s2 = Section::new(VectorField::basis(&c, 0), OneForm::zero(&c)).unwrap();
        let b = courant_bracket(&s1, &s2).unwrap();
        let cfg = SampleConfig::default();
        let expected = VectorField::basis(&c, 1).neg();
        for (lhs, rhs) in b.vector.comps().iter().zip(expected.comps()) {
            assert!(
                classify_zero(&Expr::sub(lhs.clone(), rhs.clone()), &c, &cfg).is_exactly_zero()
            );
        }
        for comp in b.form.comps() {
            assert!(classify_zero(comp, &c, &cfg).is_exactly_zero());
        }
    }

    #[test]
    fn antisymmetry_of_the_bracket() {
        let c = chart2();
        let s1 = Section::new(
            VectorField::new(&c, vec![parse_expr("x*y", &c).unwrap(), Expr::one()]).unwrap(),
            OneForm::new(&c, vec![parse_expr("y^2", &c).unwrap(), Expr::zero()]).unwrap(),
        )
        .unwrap();
        let s2 = Section::new(
            VectorField::new(&c, vec![Expr::zero(), parse_expr("x", &c).unwrap()]).unwrap(),
            OneForm::new(&c, vec![Expr::one(), parse_expr("x + y", &c).unwrap()]).unwrap(),
        )
        .unwrap();
        let sum = courant_bracket(&s1, &s2)
            .unwrap()
            .add(&courant_bracket(&s2, &s1).unwrap())
            .unwrap();
        let cfg = SampleConfig::default();
        for comp in sum.vector.comps().iter().chain(sum.form.comps()) {
            assert!(classify_zero(comp, &c, &cfg).is_exactly_zero());
        }
    }

    #[test]
    fn graph_conventions() {
        let c = chart2();
        let frame = DiracFrame::graph_of_presymplectic(&sym2(&c)).unwrap();
        assert_eq!(frame.sections()[0].form, OneForm::basis(&c, 1));
        assert_eq!(frame.sections()[1].form, OneForm::basis(&c, 0).neg());
        let mut p = MultiVector::zero(&c, 2).unwrap();
        p.add_term(&[0, 1], Expr::one());
        let frame = DiracFrame::graph_of_poisson(&p).unwrap();
        assert_eq!(frame.sections()[0].vector, VectorField::basis(&c, 1));
        assert_eq!(frame.sections()[1].vector, VectorField::basis(&c, 0).neg());
        // P = 0 gives the cotangent frame
        let zero = MultiVector::zero(&c, 2).unwrap();
        let frame = DiracFrame::graph_of_poisson(&zero).unwrap();
        for (i, s) in frame.sections().iter().enumerate() {
            assert!(s.vector.is_syntactically_zero());
            assert_eq!(s.form, OneForm::basis(&c, i));
        }
    }

    #[test]
    fn almost_dirac_verdicts() {
        let c = chart2();
        let cfg = SampleConfig::default();
        let good = DiracFrame::graph_of_presymplectic(&sym2(&c)).unwrap();
        assert!(check_almost_dirac(&good, &cfg).passed());
        let mixed = DiracFrame::from_sections(
            &c,
            vec![
                Section::new(VectorField::basis(&c, 0), OneForm::zero(&c)).unwrap(),
                Section::new(VectorField::zero(&c), OneForm::basis(&c, 1)).unwrap(),
            ],
        )
        .unwrap();
        assert!(check_almost_dirac(&mixed, &cfg).passed());
        let bad_chart = Chart::new(vec!["x"]).unwrap();
        let bad = DiracFrame::from_sections(
            &bad_chart,
            vec![Section::new(
                VectorField::basis(&bad_chart, 0),
                OneForm::basis(&bad_chart, 0),
            )
            .unwrap()],
        )
        .unwrap();
        let report = check_almost_dirac(&bad, &cfg);
        assert_eq!(report.status(), CheckStatus::Fail);
    }

    #[test]
    fn characteristic_data_symplectic() {
        let c = chart2();
        let frame = DiracFrame::graph_of_presymplectic(&sym2(&c)).unwrap();
        let p = Point::origin(&c);
        let data = characteristic_data_at(&frame, &p).unwrap();
        assert_eq!(data.l_plus.rows, 2);
        assert_eq!(data.kernel_tangent.rows, 0);
        assert_eq!(data.omega_plus[(0, 1)], Scalar::one());
        assert_eq!(data.omega_plus[(1, 0)], Scalar::from_int(-1));
    }

    #[test]
    fn dw_basis_identity_case() {
        let c = chart2();
        let p = Point::origin(&c);
        let s = |v: [i64; 4]| v.map(Scalar::from_int).to_vec();
        let basis = QMatrix::from_rows(vec![s([1, 0, 0, 0]), s([0, 0, 0, 1])]);
        let sub = PointSubspace { point: p, basis };
        let dw = dw_basis_at(&sub, &[vec![Scalar::zero(), Scalar::one()]]).unwrap();
        assert!(dw.a_coeffs.rows_iter().all(|r| r.iter().all(Scalar::is_zero)));
        assert!(dw.b_coeffs.rows_iter().all(|r| r.iter().all(Scalar::is_zero)));
        assert!(dw.alpha.rows_iter().all(|r| r.iter().all(Scalar::is_zero)));
        assert!(dw.assembled().row_space_equal(&sub.basis));
    }
}
