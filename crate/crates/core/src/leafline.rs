//! First-order calculus of a structure around the leaf `y = 0` of an adapted
//! chart: block coefficient presentations, the induced bracket tables on the
//! restriction, the linear model on the normal bundle, and the locally
//! reducible normal form verdict.

use crate::cartan::{DiffForm, FrameSplit, MultiVector};
use crate::chart::{Chart, Point};
use crate::coupling::{extract_geometric_data, reconstruct, GeometricData};
use crate::courant::{courant_bracket, DiracFrame, Section};
use crate::error::{Error, Result};
use crate::expr::{classify_zero, rational_form, with_retries, Expr, SampleConfig};
use crate::report::{point_witness, CheckStatus, VerificationReport};
use crate::scalar::Scalar;
use crate::symmat::SymMatrix;

/// Block coefficients of a structure around the leaf `y = 0`: the lift
/// coefficients vanish on the leaf, the leaf bivector vanishes on the leaf,
/// and the transverse form restricts to the leaf presymplectic form.
#[derive(Debug, Clone)]
pub struct LeafPresentation {
    data: GeometricData,
}

impl LeafPresentation {
    /// Wrap geometric data after verifying the leaf conditions exactly.
    pub fn new(data: GeometricData, cfg: &SampleConfig) -> Result<LeafPresentation> {
        let chart = data.chart();
        let leaf_names: Vec<&str> = chart
            .leaf_indices()
            .iter()
            .map(|&a| chart.name(a))
            .collect();
        for (ai, row) in data.split.coefficients().iter().enumerate() {
            for (ui, a) in row.iter().enumerate() {
                let restricted = a.subst_zero(&leaf_names);
                if !classify_zero(&restricted, chart, cfg).is_zero() {
                    return Err(Error::LeafCondition(format!(
                        "lift coefficient ({ai},{ui}) does not vanish on the leaf"
                    )));
                }
            }
        }
        for (idx, c) in data.pi.terms() {
            let restricted = c.subst_zero(&leaf_names);
            if !classify_zero(&restricted, chart, cfg).is_zero() {
                return Err(Error::LeafCondition(format!(
                    "leaf bivector component ({}, {}) does not vanish on the leaf",
                    chart.name(idx[0]),
                    chart.name(idx[1])
                )));
            }
        }
        Ok(LeafPresentation { data })
    }

    pub fn data(&self) -> &GeometricData {
        &self.data
    }

    pub fn chart(&self) -> &Chart {
        self.data.chart()
    }

    fn leaf_names(&self) -> Vec<String> {
        let chart = self.chart();
        chart
            .leaf_indices()
            .iter()
            .map(|&a| chart.name(a).to_string())
            .collect()
    }

    /// Restriction of an expression to the leaf.
    pub fn on_leaf(&self, e: &Expr) -> Expr {
        let names = self.leaf_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        e.subst_zero(&refs)
    }

    /// `d/dy^c` of an expression, restricted to the leaf.
    pub fn leaf_derivative(&self, e: &Expr, ci: usize) -> Expr {
        let chart = self.chart();
        let name = chart.name(chart.leaf_indices()[ci]);
        self.on_leaf(&e.diff(name))
    }

    /// The leaf presymplectic coefficients `alpha_uv(x, 0)`.
    pub fn leaf_form(&self) -> Vec<Vec<Expr>> {
        let chart = self.chart();
        let trans = chart.transverse_indices();
        trans
            .iter()
            .map(|&u| {
                trans
                    .iter()
                    .map(|&v| self.on_leaf(&self.data.sigma.comp_signed(&[u, v])))
                    .collect()
            })
            .collect()
    }
}

/// First-order model data along the leaf: connection, structure, leaf form,
/// and curvature-correction coefficient tables (functions of the transverse
/// coordinates only).
#[derive(Debug, Clone)]
pub struct LinearModel {
    chart: Chart,
    /// `gamma[ai][ui][ci] = dA^a_u/dy^c (x, 0)`.
    pub gamma: Vec<Vec<Vec<Expr>>>,
    /// `structure[ai][bi][ci] = dB^{ab}/dy^c (x, 0)`, antisymmetric in (a,b).
    pub structure: Vec<Vec<Vec<Expr>>>,
    /// `leaf_form[ui][vi] = alpha_uv(x, 0)`, antisymmetric.
    pub leaf_form: Vec<Vec<Expr>>,
    /// `correction[ui][vi][ci] = dalpha_uv/dy^c (x, 0)`.
    pub correction: Vec<Vec<Vec<Expr>>>,
}

impl LinearModel {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }
}

/// Read the block coefficients off a coupling presentation around the leaf
/// `y = 0`, verifying the leaf conditions and the coupling rank along the
/// leaf (with leaf coordinates drawn from a shrinking box).
pub fn dw_coefficients(
    frame: Option<&DiracFrame>,
    data: Option<&GeometricData>,
    cfg: &SampleConfig,
) -> Result<(LeafPresentation, VerificationReport)> {
    let data = match (frame, data) {
        (_, Some(data)) => data.clone(),
        (Some(frame), None) => extract_geometric_data(frame, cfg)?,
        (None, None) => {
            return Err(Error::InvalidInput("no structure given".into()));
        }
    };
    let pres = LeafPresentation::new(data, cfg)?;
    let mut report = VerificationReport::new();
    report.record(
        "leaf.conditions",
        "lift coefficients and the leaf bivector vanish on the leaf",
        CheckStatus::Pass,
        vec![],
    );
    // coupling rank along the leaf: the frame together with the leaf-tangent
    // and leaf-conormal fiber directions spans the fiber, sampled with
    // shrinking leaf coordinates
    let reconstructed;
    let l = match frame {
        Some(frame) => frame,
        None => {
            reconstructed = reconstruct(pres.data())?;
            &reconstructed
        }
    };
    let chart = pres.chart().clone();
    let n = chart.dim();
    let mut ok = true;
    let mut unknown = false;
    let mut witnesses = Vec::new();
    for k in 0..cfg.count {
        let shrink = Scalar::from_int(1i64 << k.min(30));
        let outcome = with_retries(&chart, cfg, k, |p| {
            // shrink the leaf coordinates toward the leaf
            let mut q = p.clone();
            for &a in &chart.leaf_indices() {
                q = q.with_value(a, &(p.value(a).clone()) / &shrink);
            }
            let m = l.matrix_at(&q).ok()?;
            Some((q, m))
        });
        let Some((_, (q, m))) = outcome else {
            unknown = true;
            continue;
        };
        let mut stacked = m;
        for &a in &chart.leaf_indices() {
            let mut row = vec![Scalar::zero(); 2 * n];
            row[a] = Scalar::one();
            stacked.push_row(row);
        }
        for &u in &chart.transverse_indices() {
            let mut row = vec![Scalar::zero(); 2 * n];
            row[n + u] = Scalar::one();
            stacked.push_row(row);
        }
        let r = stacked.rank();
        if r != 2 * n {
            ok = false;
            if witnesses.len() < 3 {
                witnesses.push(point_witness(
                    &chart,
                    &q,
                    vec![format!("rank of L + (F + ann F) = {r}, expected {}", 2 * n)],
                ));
            }
        }
    }
    report.record(
        "leaf.coupling_rank",
        "the structure together with F + ann F spans the fiber near the leaf",
        if !ok {
            CheckStatus::Fail
        } else if unknown {
            CheckStatus::Unknown
        } else {
            CheckStatus::Pass
        },
        witnesses,
    );
    Ok((pres, report))
}

/// The linear model of a presentation: first-order leaf derivatives of the
/// block coefficients.
pub fn linear_model(pres: &LeafPresentation) -> LinearModel {
    let chart = pres.chart().clone();
    let trans = chart.transverse_indices();
    let leaves = chart.leaf_indices();
    let q = trans.len();
    let p = leaves.len();
    let gamma = (0..p)
        .map(|ai| {
            (0..q)
                .map(|ui| {
                    (0..p)
                        .map(|ci| {
                            pres.leaf_derivative(pres.data().split.coefficient(ai, ui), ci)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let structure = (0..p)
        .map(|ai| {
            (0..p)
                .map(|bi| {
                    (0..p)
                        .map(|ci| {
                            let comp =
                                pres.data().pi.comp_signed(&[leaves[ai], leaves[bi]]);
                            pres.leaf_derivative(&comp, ci)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let leaf_form = pres.leaf_form();
    let correction = (0..q)
        .map(|ui| {
            (0..q)
                .map(|vi| {
                    (0..p)
                        .map(|ci| {
                            let comp =
                                pres.data().sigma.comp_signed(&[trans[ui], trans[vi]]);
                            pres.leaf_derivative(&comp, ci)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    LinearModel {
        chart,
        gamma,
        structure,
        leaf_form,
        correction,
    }
}

/// Geometric data of the linear model on the normal bundle of the leaf. The
/// fiber coordinates reuse the leaf coordinate names.
pub fn linear_model_data(model: &LinearModel) -> Result<GeometricData> {
    let chart = &model.chart;
    let trans = chart.transverse_indices();
    let leaves = chart.leaf_indices();
    let q = trans.len();
    let p = leaves.len();
    let eta = |ci: usize| Expr::coord(chart.name(leaves[ci]).to_string());
    let mut a = vec![vec![Expr::zero(); q]; p];
    for ai in 0..p {
        for ui in 0..q {
            a[ai][ui] = Expr::sum(
                (0..p).map(|ci| Expr::mul(model.gamma[ai][ui][ci].clone(), eta(ci))),
            );
        }
    }
    let split = FrameSplit::new(chart, a)?;
    let mut sigma = DiffForm::zero(chart, 2)?;
    for ui in 0..q {
        for vi in (ui + 1)..q {
            let linear_part = Expr::sum(
                (0..p).map(|ci| Expr::mul(model.correction[ui][vi][ci].clone(), eta(ci))),
            );
            sigma.add_term(
                &[trans[ui], trans[vi]],
                Expr::sub(model.leaf_form[ui][vi].clone(), linear_part),
            );
        }
    }
    let mut pi = MultiVector::zero(chart, 2)?;
    for ai in 0..p {
        for bi in (ai + 1)..p {
            let linear_part = Expr::sum(
                (0..p).map(|ci| Expr::mul(model.structure[ai][bi][ci].clone(), eta(ci))),
            );
            pi.add_term(&[leaves[ai], leaves[bi]], linear_part);
        }
    }
    GeometricData::new(split, sigma, pi)
}

/// Emit the frame of the linear model around the leaf: lifted transverse
/// fields paired with the corrected transverse form, and linear leaf fields
/// paired with the annihilator coframe. The leaf is a presymplectic leaf of
/// the output with the restricted leaf form.
pub fn linearize(pres: &LeafPresentation) -> Result<DiracFrame> {
    let model = linear_model(pres);
    let data = linear_model_data(&model)?;
    reconstruct(&data)
}

/// Compare a linear model against the first-order leaf expansion of a
/// presentation: zeroth and first leaf derivatives of every coefficient.
pub fn check_linear_approximation(
    pres: &LeafPresentation,
    model: &LinearModel,
    cfg: &SampleConfig,
) -> Result<VerificationReport> {
    pres.chart().same_as(&model.chart)?;
    let chart = pres.chart();
    let reference = linear_model(pres);
    let mut report = VerificationReport::new();
    let q = chart.transverse_dim();
    let p = chart.leaf_dim();
    for ai in 0..p {
        for ui in 0..q {
            for ci in 0..p {
                let diff = Expr::sub(
                    model.gamma[ai][ui][ci].clone(),
                    reference.gamma[ai][ui][ci].clone(),
                );
                report.record_zero(
                    format!("linear.gamma.{ai}.{ui}.{ci}"),
                    format!("connection coefficient ({ai},{ui},{ci}) matches the leaf expansion"),
                    &classify_zero(&diff, chart, cfg),
                );
            }
        }
    }
    for ai in 0..p {
        for bi in (ai + 1)..p {
            for ci in 0..p {
                let diff = Expr::sub(
                    model.structure[ai][bi][ci].clone(),
                    reference.structure[ai][bi][ci].clone(),
                );
                report.record_zero(
                    format!("linear.structure.{ai}.{bi}.{ci}"),
                    format!("structure coefficient ({ai},{bi},{ci}) matches the leaf expansion"),
                    &classify_zero(&diff, chart, cfg),
                );
            }
        }
    }
    for ui in 0..q {
        for vi in (ui + 1)..q {
            let diff = Expr::sub(
                model.leaf_form[ui][vi].clone(),
                reference.leaf_form[ui][vi].clone(),
            );
            report.record_zero(
                format!("linear.leaf_form.{ui}.{vi}"),
                format!("leaf form coefficient ({ui},{vi}) matches the restriction"),
                &classify_zero(&diff, chart, cfg),
            );
            for ci in 0..p {
                let diff = Expr::sub(
                    model.correction[ui][vi][ci].clone(),
                    reference.correction[ui][vi][ci].clone(),
                );
                report.record_zero(
                    format!("linear.correction.{ui}.{vi}.{ci}"),
                    format!("correction coefficient ({ui},{vi},{ci}) matches the leaf expansion"),
                    &classify_zero(&diff, chart, cfg),
                );
            }
        }
    }
    Ok(report)
}

/// The induced bracket tables on the restriction to the leaf, together with
/// the extension-independence verdicts.
#[derive(Debug, Clone)]
pub struct LeafAlgebroid {
    /// `vv[ai][bi][ci]`: coefficient of the leaf generator `ci` in the
    /// bracket of leaf generators `(ai, bi)`.
    pub vv: Vec<Vec<Vec<Expr>>>,
    /// `hv[ui][ai][ci]`: coefficient in the bracket of a transverse and a
    /// leaf generator.
    pub hv: Vec<Vec<Vec<Expr>>>,
    /// `hh[ui][vi][ci]`: coefficient in the bracket of transverse generators.
    pub hh: Vec<Vec<Vec<Expr>>>,
    pub report: VerificationReport,
}

/// Bracket tables of the restriction: leaf derivatives of the block
/// coefficients, cross-checked against the restricted bracket computed with
/// two different extension recipes.
pub fn leaf_algebroid(pres: &LeafPresentation, cfg: &SampleConfig) -> Result<LeafAlgebroid> {
    let model = linear_model(pres);
    let chart = pres.chart().clone();
    let q = chart.transverse_dim();
    let p = chart.leaf_dim();
    let mut report = VerificationReport::new();
    // the formula tables
    let vv = model.structure.clone();
    let hv: Vec<Vec<Vec<Expr>>> = (0..q)
        .map(|ui| {
            (0..p)
                .map(|ai| (0..p).map(|ci| model.gamma[ai][ui][ci].clone()).collect())
                .collect()
        })
        .collect();
    let hh = model.correction.clone();
    // the bracket route with two extension recipes
    let frame = reconstruct(pres.data())?;
    let scale_name = chart.name(chart.leaf_indices()[0]).to_string();
    let recipes: [(&str, Box<dyn Fn(&Section) -> Section>); 2] = [
        ("plain", Box::new(|s: &Section| s.clone())),
        (
            "scaled",
            Box::new(move |s: &Section| {
                let factor = Expr::add(
                    Expr::one(),
                    Expr::pow(Expr::coord(scale_name.clone()), 2),
                );
                s.scale(&factor)
            }),
        ),
    ];
    let h_sections: Vec<&Section> = frame.sections()[..q].iter().collect();
    let v_sections: Vec<&Section> = frame.sections()[q..].iter().collect();
    let mut check = |id: String, lhs: &Section, table: &[Expr]| {
        // expected: sum_c table[c] V^c restricted to the leaf = (0, dy^c) parts
        let chart = pres.chart();
        let leaves = chart.leaf_indices();
        // the restricted bracket must have vanishing vector part and leaf
        // covector components equal to the table
        for (i, comp) in lhs.vector.comps().iter().enumerate() {
            let restricted = pres.on_leaf(comp);
            report.record_zero(
                format!("{id}.vector.{}", chart.name(i)),
                format!("restricted bracket has no d/d{} component", chart.name(i)),
                &classify_zero(&restricted, chart, cfg),
            );
        }
        for (i, comp) in lhs.form.comps().iter().enumerate() {
            let restricted = pres.on_leaf(comp);
            let expected = leaves
                .iter()
                .position(|&a| a == i)
                .map(|ci| table[ci].clone())
                .unwrap_or_else(Expr::zero);
            report.record_zero(
                format!("{id}.form.{}", chart.name(i)),
                format!("restricted bracket component along d{}", chart.name(i)),
                &classify_zero(&Expr::sub(restricted, expected), chart, cfg),
            );
        }
    };
    for (recipe_name, recipe) in &recipes {
        for ai in 0..p {
            for bi in (ai + 1)..p {
                let bracket =
                    courant_bracket(&recipe(v_sections[ai]), &recipe(v_sections[bi]))?;
                let table: Vec<Expr> = (0..p).map(|ci| vv[ai][bi][ci].clone()).collect();
                check(format!("leaf_algebroid.vv.{recipe_name}.{ai}.{bi}"), &bracket, &table);
            }
        }
        for ui in 0..q {
            for ai in 0..p {
                let bracket =
                    courant_bracket(&recipe(h_sections[ui]), &recipe(v_sections[ai]))?;
                let table: Vec<Expr> = (0..p).map(|ci| hv[ui][ai][ci].clone()).collect();
                check(format!("leaf_algebroid.hv.{recipe_name}.{ui}.{ai}"), &bracket, &table);
            }
        }
        for ui in 0..q {
            for vi in (ui + 1)..q {
                let bracket =
                    courant_bracket(&recipe(h_sections[ui]), &recipe(h_sections[vi]))?;
                let table: Vec<Expr> = (0..p).map(|ci| hh[ui][vi][ci].clone()).collect();
                check(format!("leaf_algebroid.hh.{recipe_name}.{ui}.{vi}"), &bracket, &table);
            }
        }
    }
    Ok(LeafAlgebroid {
        vv,
        hv,
        hh,
        report,
    })
}

/// Verdict of the locally-reducible normal form check.
#[derive(Debug, Clone)]
pub struct ReducibleVerdict {
    /// Kernel dimension per sample point; index 0 is the chart origin.
    pub kernel_dims: Vec<Option<usize>>,
    /// Coordinate indices spanning the kernel, when it is coordinate-spanned.
    pub kernel_coords: Option<Vec<usize>>,
    pub report: VerificationReport,
}

/// Compute the tangent kernel `K = L meet TM` pointwise (including the chart
/// origin), solve it symbolically, and when it is spanned by coordinate
/// fields verify that the canonical frame coefficients do not depend on the
/// kernel coordinates.
pub fn reducible_normal_form_check(l: &DiracFrame, cfg: &SampleConfig) -> ReducibleVerdict {
    let chart = l.chart().clone();
    let n = chart.dim();
    let mut report = VerificationReport::new();
    let mut kernel_dims = Vec::new();
    // dims at the origin plus the seeded points: degeneracy loci of
    // chart-local data routinely pass through coordinate-aligned points
    let kernel_dim_at = |p: &Point| -> Option<usize> {
        let m = l.matrix_at(p).ok()?;
        if m.rank() != n {
            return None;
        }
        let form_part = m.select_cols(&(n..2 * n).collect::<Vec<_>>());
        Some(n - form_part.rank())
    };
    kernel_dims.push(kernel_dim_at(&Point::origin(&chart)));
    for k in 0..cfg.count {
        kernel_dims
            .push(with_retries(&chart, cfg, k, |p| kernel_dim_at(p)).map(|(_, d)| d));
    }
    let seen: Vec<usize> = kernel_dims.iter().flatten().copied().collect();
    let constant = seen.windows(2).all(|w| w[0] == w[1]);
    if !constant {
        report.record(
            "reducible.constant_rank",
            format!("tangent kernel dimension is not constant: saw {seen:?}"),
            CheckStatus::Fail,
            vec![],
        );
        return ReducibleVerdict {
            kernel_dims,
            kernel_coords: None,
            report,
        };
    }
    report.record(
        "reducible.constant_rank",
        "tangent kernel dimension constant across sampled points",
        if kernel_dims.iter().any(Option::is_none) {
            CheckStatus::Unknown
        } else {
            CheckStatus::Pass
        },
        vec![],
    );
    // symbolic kernel
    let form_matrix = SymMatrix::from_rows(
        l.sections()
            .iter()
            .map(|s| s.form.comps().to_vec())
            .collect(),
    );
    let kernel_fields = match form_matrix.transpose().nullspace() {
        Ok(null) => {
            let mut rows = Vec::new();
            for r in 0..null.rows {
                let mut field = vec![Expr::zero(); n];
                for (i, c) in null.row(r).iter().enumerate() {
                    for j in 0..n {
                        field[j] = Expr::add(
                            field[j].clone(),
                            Expr::mul(c.clone(), l.sections()[i].vector.comp(j).clone()),
                        );
                    }
                }
                rows.push(field);
            }
            match SymMatrix::from_rows(rows).rref() {
                Ok((m, pivots)) => Some((m, pivots)),
                Err(_) => None,
            }
        }
        Err(_) => None,
    };
    let Some((kernel_rref, kernel_pivots)) = kernel_fields else {
        report.record(
            "reducible.kernel_frame",
            "kernel frame not solvable symbolically (non-rational coefficients)",
            CheckStatus::Unknown,
            vec![],
        );
        return ReducibleVerdict {
            kernel_dims,
            kernel_coords: None,
            report,
        };
    };
    // coordinate-spanned: each canonical kernel row is a single unit entry
    let mut coords = Vec::new();
    let mut coordinate_spanned = true;
    for r in 0..kernel_pivots.len() {
        let row = kernel_rref.row(r);
        let mut nonzero = Vec::new();
        for (j, c) in row.iter().enumerate() {
            match rational_form(c) {
                Ok(nf) if nf.is_zero() => {}
                _ => nonzero.push(j),
            }
        }
        if nonzero.len() == 1 && row[nonzero[0]].is_one_const() {
            coords.push(nonzero[0]);
        } else {
            coordinate_spanned = false;
        }
    }
    if !coordinate_spanned {
        report.record(
            "reducible.coordinate_span",
            "tangent kernel is not spanned by coordinate fields; no straightening attempted",
            CheckStatus::Unknown,
            vec![],
        );
        return ReducibleVerdict {
            kernel_dims,
            kernel_coords: None,
            report,
        };
    }
    report.record(
        "reducible.coordinate_span",
        format!(
            "tangent kernel spanned by coordinate fields {:?}",
            coords.iter().map(|&j| chart.name(j)).collect::<Vec<_>>()
        ),
        CheckStatus::Pass,
        vec![],
    );
    // canonical frame coefficients must not depend on the kernel coordinates
    let full = SymMatrix::from_rows(l.sections().iter().map(Section::fiber_row).collect());
    match full.rref() {
        Ok((canonical, _)) => {
            let mut ok = true;
            let mut witness_entry = None;
            'outer: for r in 0..canonical.rows {
                for c in canonical.row(r) {
                    for &z in &coords {
                        let dz = c.diff(chart.name(z));
                        if !classify_zero(&dz, &chart, cfg).is_zero() {
                            ok = false;
                            witness_entry = Some(format!(
                                "coefficient {c} depends on {}",
                                chart.name(z)
                            ));
                            break 'outer;
                        }
                    }
                }
            }
            report.record(
                "reducible.kernel_independence",
                "canonical frame coefficients are independent of the kernel coordinates",
                if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                witness_entry
                    .map(|w| {
                        vec![crate::report::Witness {
                            point: vec![],
                            values: vec![w],
                        }]
                    })
                    .unwrap_or_default(),
            );
        }
        Err(_) => {
            report.record(
                "reducible.kernel_independence",
                "canonical frame not computable symbolically",
                CheckStatus::Unknown,
                vec![],
            );
        }
    }
    ReducibleVerdict {
        kernel_dims,
        kernel_coords: Some(coords),
        report,
    }
}
