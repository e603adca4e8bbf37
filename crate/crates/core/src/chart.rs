//! Local coordinate charts with an optional foliation split.
//!
//! A chart is an ordered list of coordinate names. An adapted chart designates
//! some names as leaf coordinates; the foliation is by definition the span of
//! the leaf coordinate fields, and the remaining names are transverse.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::fmt;

pub const RESERVED: [&str; 3] = ["sin", "cos", "exp"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    coords: Vec<String>,
    leaf: Vec<bool>,
}

impl Chart {
    /// A chart with no foliation (every coordinate transverse).
    pub fn new<S: Into<String>>(coords: Vec<S>) -> Result<Self> {
        let coords: Vec<String> = coords.into_iter().map(Into::into).collect();
        let leaf = vec![false; coords.len()];
        let chart = Chart { coords, leaf };
        chart.validate()?;
        Ok(chart)
    }

    /// An adapted chart: `leaf_names` must be a subset of `coords`.
    pub fn adapted<S: Into<String>>(coords: Vec<S>, leaf_names: &[&str]) -> Result<Self> {
        let coords: Vec<String> = coords.into_iter().map(Into::into).collect();
        let mut leaf = vec![false; coords.len()];
        for name in leaf_names {
            match coords.iter().position(|c| c == name) {
                Some(i) => leaf[i] = true,
                None => {
                    return Err(Error::InvalidChart(format!(
                        "leaf coordinate `{name}` is not declared in the chart"
                    )))
                }
            }
        }
        let chart = Chart { coords, leaf };
        chart.validate()?;
        Ok(chart)
    }

    fn validate(&self) -> Result<()> {
        for (i, name) in self.coords.iter().enumerate() {
            if name.is_empty() || !name.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(Error::InvalidChart(format!("bad coordinate name `{name}`")));
            }
            if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::InvalidChart(format!("bad coordinate name `{name}`")));
            }
            if RESERVED.contains(&name.as_str()) {
                return Err(Error::InvalidChart(format!("`{name}` is a reserved word")));
            }
            if self.coords[..i].contains(name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{name}`")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of leaf coordinates (the foliation dimension).
    pub fn leaf_dim(&self) -> usize {
        self.leaf.iter().filter(|b| **b).count()
    }

    /// Number of transverse coordinates.
    pub fn transverse_dim(&self) -> usize {
        self.dim() - self.leaf_dim()
    }

    pub fn names(&self) -> &[String] {
        &self.coords
    }

    pub fn name(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.leaf[i]
    }

    pub fn leaf_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.leaf[i]).collect()
    }

    pub fn transverse_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.leaf[i]).collect()
    }

    /// The chart on the submanifold obtained by dropping the given coordinates.
    /// Leaf designations of the kept coordinates are preserved.
    pub fn drop_coords(&self, dropped: &[usize]) -> Result<Chart> {
        let mut coords = Vec::new();
        let mut leaf = Vec::new();
        for i in 0..self.dim() {
            if !dropped.contains(&i) {
                coords.push(self.coords[i].clone());
                leaf.push(self.leaf[i]);
            }
        }
        if coords.is_empty() {
            return Err(Error::InvalidChart("empty chart after restriction".into()));
        }
        Ok(Chart { coords, leaf })
    }

    pub fn same_as(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, name) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name}")?;
            if self.leaf[i] {
                write!(f, "*")?;
            }
        }
        write!(f, ")")
    }
}

/// An exact point of a chart: one rational value per coordinate, in chart order.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    values: Vec<Scalar>,
}

impl Point {
    pub fn new(chart: &Chart, values: Vec<Scalar>) -> Result<Self> {
        if values.len() != chart.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} values for a {}-dimensional chart",
                values.len(),
                chart.dim()
            )));
        }
        Ok(Point { values })
    }

    pub fn origin(chart: &Chart) -> Self {
        Point {
            values: vec![Scalar::zero(); chart.dim()],
        }
    }

    /// Build from `(name, value)` pairs; every chart coordinate must be covered.
    pub fn from_pairs(chart: &Chart, pairs: &[(&str, Scalar)]) -> Result<Self> {
        let mut values = vec![None; chart.dim()];
        for (name, v) in pairs {
            let i = chart
                .index_of(name)
                .ok_or_else(|| Error::MissingCoordinate((*name).into()))?;
            values[i] = Some(v.clone());
        }
        let mut out = Vec::with_capacity(chart.dim());
        for (i, v) in values.into_iter().enumerate() {
            out.push(v.ok_or_else(|| Error::MissingCoordinate(chart.name(i).into()))?);
        }
        Ok(Point { values: out })
    }

    pub fn value(&self, i: usize) -> &Scalar {
        &self.values[i]
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn with_value(&self, i: usize, v: Scalar) -> Point {
        let mut values = self.values.clone();
        values[i] = v;
        Point { values }
    }

    pub fn to_f64(&self) -> FloatPoint {
        FloatPoint {
            values: self.values.iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn render(&self, chart: &Chart) -> Vec<(String, String)> {
        chart
            .names()
            .iter()
            .zip(&self.values)
            .map(|(n, v)| (n.clone(), v.to_string()))
            .collect()
    }
}

/// A double-precision point, used by the sampling verdicts and numeric oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPoint {
    values: Vec<f64>,
}

impl FloatPoint {
    pub fn new(values: Vec<f64>) -> Self {
        FloatPoint { values }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn with_value(&self, i: usize, v: f64) -> FloatPoint {
        let mut values = self.values.clone();
        values[i] = v;
        FloatPoint { values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adapted_chart_partition() {
        let chart = Chart::adapted(vec!["x1", "x2", "y1", "y2"], &["y1", "y2"]).unwrap();
        assert_eq!(chart.dim(), 4);
        assert_eq!(chart.leaf_dim(), 2);
        assert_eq!(chart.transverse_indices(), vec![0, 1]);
        assert_eq!(chart.leaf_indices(), vec![2, 3]);
    }

    #[test]
    fn rejects_unknown_leaf_and_duplicates() {
        assert!(Chart::adapted(vec!["x", "y"], &["z9"]).is_err());
        assert!(Chart::new(vec!["x", "x"]).is_err());
        assert!(Chart::new(vec!["sin"]).is_err());
    }
}
