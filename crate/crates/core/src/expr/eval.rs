//! Exact and double-precision evaluation at chart points.

use super::Expr;
use crate::chart::{Chart, FloatPoint, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Value attached to a witness point: exact in the rational path, approximate
/// in the sampled path.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessValue {
    Exact(Scalar),
    Approx(f64),
}

impl std::fmt::Display for WitnessValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WitnessValue::Exact(s) => write!(f, "{s}"),
            WitnessValue::Approx(v) => write!(f, "{v:e}"),
        }
    }
}

impl Expr {
    /// Exact rational evaluation. Requires a transcendental-free tree.
    pub fn eval_exact(&self, chart: &Chart, p: &Point) -> Result<Scalar> {
        match self {
            Expr::Const(c) => Ok(c.clone()),
            Expr::Coord(name) => {
                let i = chart
                    .index_of(name)
                    .ok_or_else(|| Error::MissingCoordinate(name.clone()))?;
                Ok(p.value(i).clone())
            }
            Expr::Neg(e) => Ok(-e.eval_exact(chart, p)?),
            Expr::Add(a, b) => Ok(a.eval_exact(chart, p)? + b.eval_exact(chart, p)?),
            Expr::Mul(a, b) => Ok(a.eval_exact(chart, p)? * b.eval_exact(chart, p)?),
            Expr::Div(a, b) => {
                let den = b.eval_exact(chart, p)?;
                if den.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(a.eval_exact(chart, p)? / den)
            }
            Expr::Pow(base, k) => {
                let v = base.eval_exact(chart, p)?;
                if *k < 0 && v.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(v.pow(*k))
            }
            Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => Err(Error::TranscendentalExact),
        }
    }

    /// Double-precision evaluation; rejects non-finite intermediate values.
    pub fn eval_f64(&self, chart: &Chart, p: &FloatPoint) -> Result<f64> {
        let v = self.eval_f64_inner(chart, p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }

    fn eval_f64_inner(&self, chart: &Chart, p: &FloatPoint) -> Result<f64> {
        match self {
            Expr::Const(c) => Ok(c.to_f64()),
            Expr::Coord(name) => {
                let i = chart
                    .index_of(name)
                    .ok_or_else(|| Error::MissingCoordinate(name.clone()))?;
                Ok(p.value(i))
            }
            Expr::Neg(e) => Ok(-e.eval_f64_inner(chart, p)?),
            Expr::Add(a, b) => Ok(a.eval_f64_inner(chart, p)? + b.eval_f64_inner(chart, p)?),
            Expr::Mul(a, b) => Ok(a.eval_f64_inner(chart, p)? * b.eval_f64_inner(chart, p)?),
            Expr::Div(a, b) => {
                let den = b.eval_f64_inner(chart, p)?;
                if den == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(a.eval_f64_inner(chart, p)? / den)
            }
            Expr::Pow(base, k) => {
                let v = base.eval_f64_inner(chart, p)?;
                if *k < 0 && v == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(v.powi(*k))
            }
            Expr::Sin(a) => Ok(a.eval_f64_inner(chart, p)?.sin()),
            Expr::Cos(a) => Ok(a.eval_f64_inner(chart, p)?.cos()),
            Expr::Exp(a) => Ok(a.eval_f64_inner(chart, p)?.exp()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn exact_arithmetic() {
        let chart = Chart::new(vec!["x1"]).unwrap();
        let e = parse_expr("x1^2 + 1/2", &chart).unwrap();
        let p = Point::from_pairs(&chart, &[("x1", Scalar::ratio(3, 2))]).unwrap();
        assert_eq!(e.eval_exact(&chart, &p).unwrap(), Scalar::ratio(11, 4));
    }

    #[test]
    fn sin_at_zero_in_float_mode() {
        let chart = Chart::new(vec!["x1"]).unwrap();
        let e = parse_expr("sin(x1)", &chart).unwrap();
        let p = FloatPoint::new(vec![0.0]);
        assert_eq!(e.eval_f64(&chart, &p).unwrap(), 0.0);
        let exact = Point::origin(&chart);
        assert!(matches!(
            e.eval_exact(&chart, &exact),
            Err(Error::TranscendentalExact)
        ));
    }

    #[test]
    fn division_by_zero_at_point() {
        let chart = Chart::new(vec!["x1"]).unwrap();
        let e = parse_expr("1/x1", &chart).unwrap();
        let p = Point::origin(&chart);
        assert!(matches!(e.eval_exact(&chart, &p), Err(Error::DivisionByZero)));
    }

    #[test]
    fn missing_coordinate() {
        let chart = Chart::new(vec!["x1"]).unwrap();
        let other = Chart::new(vec!["q"]).unwrap();
        let e = parse_expr("x1", &chart).unwrap();
        let p = Point::origin(&other);
        assert!(matches!(
            e.eval_exact(&other, &p),
            Err(Error::MissingCoordinate(_))
        ));
    }
}
