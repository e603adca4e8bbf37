//! Zero classification: the decision procedure behind every "= 0" verdict.

use super::normal::rational_form;
use super::sample::{with_retries, SampleConfig};
use super::Expr;
use crate::chart::Chart;
use crate::error::Error;
use crate::expr::eval::WitnessValue;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroWitness {
    pub point: Vec<(String, Scalar)>,
    pub value: WitnessValue,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    /// The rational-function normal form is identically zero. Exact.
    Zero,
    /// A point where the expression provably does not vanish.
    NonZero(ZeroWitness),
    /// Transcendental subtrees prevent an exact decision, but every sampled
    /// value is within tolerance.
    SampledZero,
    /// Sampling was inconclusive (singular points exhausted the retries).
    Unknown,
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::Zero | ZeroVerdict::SampledZero)
    }

    pub fn is_exactly_zero(&self) -> bool {
        matches!(self, ZeroVerdict::Zero)
    }
}

/// Decide whether `e` is identically zero on the chart.
///
/// Rational expressions are decided exactly from the normal form; a nonzero
/// normal form is certified by an exact witness point. Expressions with
/// transcendental atoms fall back to seeded sampling.
pub fn classify_zero(e: &Expr, chart: &Chart, cfg: &SampleConfig) -> ZeroVerdict {
    let nf = match rational_form(e) {
        Ok(nf) => nf,
        // an identically-zero denominator leaves nothing to decide
        Err(_) => return ZeroVerdict::Unknown,
    };
    if nf.is_zero() {
        return ZeroVerdict::Zero;
    }
    if !nf.has_transcendental() {
        // exact witness search on the normal form
        let num = nf.num.to_expr();
        let den = nf.den.to_expr();
        for k in 0..cfg.count {
            let found = with_retries(chart, cfg, k, |p| {
                let d = den.eval_exact(chart, p).ok()?;
                if d.is_zero() {
                    return None;
                }
                let n = num.eval_exact(chart, p).ok()?;
                if n.is_zero() {
                    return None;
                }
                Some(&n / &d)
            });
            if let Some((p, value)) = found {
                return ZeroVerdict::NonZero(ZeroWitness {
                    point: p
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(i, v)| (chart.name(i).to_string(), v.clone()))
                        .collect(),
                    value: WitnessValue::Exact(value),
                });
            }
        }
        return ZeroVerdict::Unknown;
    }
    // transcendental: sampled verdict
    let mut all_evaluated = true;
    for k in 0..cfg.count {
        let outcome = with_retries(chart, cfg, k, |p| {
            let fp = p.to_f64();
            match e.eval_f64(chart, &fp) {
                Ok(v) => Some(Ok(v)),
                Err(Error::DivisionByZero) | Err(Error::NonFinite) => None,
                Err(other) => Some(Err(other)),
            }
        });
        match outcome {
            Some((p, Ok(v))) => {
                if v.abs() > cfg.tol {
                    return ZeroVerdict::NonZero(ZeroWitness {
                        point: p
                            .values()
                            .iter()
                            .enumerate()
                            .map(|(i, s)| (chart.name(i).to_string(), s.clone()))
                            .collect(),
                        value: WitnessValue::Approx(v),
                    });
                }
            }
            Some((_, Err(_))) => return ZeroVerdict::Unknown,
            None => {
                all_evaluated = false;
            }
        }
    }
    if all_evaluated {
        ZeroVerdict::SampledZero
    } else {
        ZeroVerdict::Unknown
    }
}
