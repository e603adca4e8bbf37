//! Rational-function normal form.
//!
//! An expression is flattened to a fraction of multivariate polynomials whose
//! indeterminates ("atoms") are coordinate symbols and transcendental nodes
//! with already-normalized arguments. Monomials are kept in a fixed total
//! order and the shared integer content of the fraction is factored out, so
//! syntactic equality of normal forms decides semantic equality for the
//! rational core.

use super::Expr;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Coord(String),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
}

impl Atom {
    fn to_expr(&self) -> Expr {
        match self {
            Atom::Coord(name) => Expr::coord(name.clone()),
            Atom::Sin(e) => Expr::sin(e.clone()),
            Atom::Cos(e) => Expr::cos(e.clone()),
            Atom::Exp(e) => Expr::exp(e.clone()),
        }
    }

    fn is_transcendental(&self) -> bool {
        !matches!(self, Atom::Coord(_))
    }
}

pub type Monomial = BTreeMap<Atom, u32>;

/// Polynomial over atoms with rational coefficients; zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Scalar) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        Poly { terms }
    }

    pub fn one() -> Poly {
        Poly::constant(Scalar::one())
    }

    pub fn atom(a: Atom) -> Poly {
        let mut m = Monomial::new();
        m.insert(a, 1);
        let mut terms = BTreeMap::new();
        terms.insert(m, Scalar::one());
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_empty() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn has_transcendental(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.keys().any(Atom::is_transcendental))
    }

    fn insert_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (a, e) in m2 {
                    *m.entry(a.clone()).or_insert(0) += e;
                }
                out.insert_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Leading (largest) monomial in the fixed total order.
    fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    /// Componentwise minimum of all monomials: the common monomial factor.
    fn monomial_content(&self) -> Monomial {
        let mut iter = self.terms.keys();
        let mut content: Monomial = match iter.next() {
            Some(m) => m.clone(),
            None => return Monomial::new(),
        };
        for m in iter {
            content = content
                .iter()
                .filter_map(|(a, e)| m.get(a).map(|e2| (a.clone(), (*e).min(*e2))))
                .filter(|(_, e)| *e > 0)
                .collect();
            if content.is_empty() {
                break;
            }
        }
        content
    }

    fn divide_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mono, c)| {
                    let mut out = mono.clone();
                    for (a, e) in m {
                        let cur = out.get_mut(a).expect("monomial division");
                        *cur -= e;
                        if *cur == 0 {
                            out.remove(a);
                        }
                    }
                    (out, c.clone())
                })
                .collect(),
        }
    }

    /// Exact polynomial division; `None` when `self` is not a multiple of `d`.
    fn divide_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.is_constant() {
            let inv = c.recip();
            return Some(Poly {
                terms: self
                    .terms
                    .iter()
                    .map(|(m, coeff)| (m.clone(), coeff * &inv))
                    .collect(),
            });
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        let (dm, dc) = d.leading().unwrap();
        let dm = dm.clone();
        let dc = dc.clone();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().unwrap();
            // dm must divide rm
            let mut qm = rm.clone();
            for (a, e) in &dm {
                match qm.get_mut(a) {
                    Some(cur) if *cur >= *e => {
                        *cur -= e;
                        if *cur == 0 {
                            qm.remove(a);
                        }
                    }
                    _ => return None,
                }
            }
            let qc = rc / &dc;
            let mut qterm = Poly::zero();
            qterm.insert_term(qm, qc);
            rem = rem.sub(&qterm.mul(d));
            quot = quot.add(&qterm);
        }
        Some(quot)
    }

    /// Least common multiple of the coefficient denominators.
    fn denominator_lcm(&self) -> BigInt {
        let mut acc = BigInt::one();
        for c in self.terms.values() {
            acc = acc.lcm(c.denom());
        }
        acc
    }

    fn integer_content(&self) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.terms.values() {
            acc = acc.gcd(c.numer());
        }
        acc
    }

    fn scale(&self, s: &Scalar) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        if self.terms.is_empty() {
            return Expr::zero();
        }
        let mut acc = Expr::zero();
        for (m, c) in &self.terms {
            let mut term = Expr::Const(c.clone());
            for (a, e) in m {
                let factor = Expr::pow(a.to_expr(), *e as i32);
                if term.is_one_const() {
                    term = factor;
                } else {
                    term = Expr::mul(term, factor);
                }
            }
            acc = Expr::add(acc, term);
        }
        acc
    }

    /// Evaluate onto another polynomial ring by mapping atoms.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }
}

/// A fraction of polynomials in canonical scaling: integer coefficients with
/// joint content 1, leading denominator coefficient positive, common monomial
/// factor and exact polynomial factors of the denominator cancelled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalForm {
    pub num: Poly,
    pub den: Poly,
}

impl RationalForm {
    fn canonical(num: Poly, den: Poly) -> Result<RationalForm> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RationalForm {
                num: Poly::zero(),
                den: Poly::one(),
            });
        }
        // cancel the common monomial factor
        let mut num = num;
        let mut den = den;
        let content_n = num.monomial_content();
        let content_d = den.monomial_content();
        let common: Monomial = content_n
            .iter()
            .filter_map(|(a, e)| content_d.get(a).map(|e2| (a.clone(), (*e).min(*e2))))
            .filter(|(_, e)| *e > 0)
            .collect();
        if !common.is_empty() {
            num = num.divide_monomial(&common);
            den = den.divide_monomial(&common);
        }
        // cancel an exact polynomial factor when the denominator divides the
        // numerator outright
        if let Some(q) = num.divide_exact(&den) {
            num = q;
            den = Poly::one();
        }
        // joint integer scaling
        let lcm = num.denominator_lcm().lcm(&den.denominator_lcm());
        let scale = Scalar::from_bigint(lcm);
        num = num.scale(&scale);
        den = den.scale(&scale);
        let gcd = num.integer_content().gcd(&den.integer_content());
        if !gcd.is_zero() && !gcd.is_one() {
            let inv = Scalar::from_bigint(gcd).recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        if den.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            num = num.neg();
            den = den.neg();
        }
        Ok(RationalForm { num, den })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn has_transcendental(&self) -> bool {
        self.num.has_transcendental() || self.den.has_transcendental()
    }

    pub fn to_expr(&self) -> Expr {
        let num = self.num.to_expr();
        if let Some(c) = self.den.is_constant() {
            if c.is_one() {
                return num;
            }
        }
        Expr::Div(Box::new(num), Box::new(self.den.to_expr()))
    }
}

/// Flatten an expression into its rational-function normal form.
pub fn rational_form(e: &Expr) -> Result<RationalForm> {
    let (num, den) = flatten(e)?;
    RationalForm::canonical(num, den)
}

fn flatten(e: &Expr) -> Result<(Poly, Poly)> {
    match e {
        Expr::Const(c) => Ok((Poly::constant(c.clone()), Poly::one())),
        Expr::Coord(name) => Ok((Poly::atom(Atom::Coord(name.clone())), Poly::one())),
        Expr::Neg(inner) => {
            let (n, d) = flatten(inner)?;
            Ok((n.neg(), d))
        }
        Expr::Add(a, b) => {
            let (n1, d1) = flatten(a)?;
            let (n2, d2) = flatten(b)?;
            if d1 == d2 {
                Ok((n1.add(&n2), d1))
            } else {
                Ok((n1.mul(&d2).add(&n2.mul(&d1)), d1.mul(&d2)))
            }
        }
        Expr::Mul(a, b) => {
            let (n1, d1) = flatten(a)?;
            let (n2, d2) = flatten(b)?;
            Ok((n1.mul(&n2), d1.mul(&d2)))
        }
        Expr::Div(a, b) => {
            let (n1, d1) = flatten(a)?;
            let (n2, d2) = flatten(b)?;
            if n2.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            Ok((n1.mul(&d2), d1.mul(&n2)))
        }
        Expr::Pow(base, k) => {
            let (n, d) = flatten(base)?;
            if *k >= 0 {
                Ok((n.pow(*k as u32), d.pow(*k as u32)))
            } else {
                if n.is_zero() {
                    return Err(Error::ZeroDenominator);
                }
                let k = (-*k) as u32;
                Ok((d.pow(k), n.pow(k)))
            }
        }
        Expr::Sin(arg) => transcendental_atom(arg, Atom::Sin, |c| {
            if c.is_zero() {
                Some(Scalar::zero())
            } else {
                None
            }
        }),
        Expr::Cos(arg) => transcendental_atom(arg, Atom::Cos, |c| {
            if c.is_zero() {
                Some(Scalar::one())
            } else {
                None
            }
        }),
        Expr::Exp(arg) => transcendental_atom(arg, Atom::Exp, |c| {
            if c.is_zero() {
                Some(Scalar::one())
            } else {
                None
            }
        }),
    }
}

fn transcendental_atom(
    arg: &Expr,
    make: fn(Expr) -> Atom,
    fold: fn(&Scalar) -> Option<Scalar>,
) -> Result<(Poly, Poly)> {
    let arg_nf = rational_form(arg)?;
    if let (Some(c), true) = (arg_nf.num.is_constant(), arg_nf.den.is_constant().is_some()) {
        let den_c = arg_nf.den.is_constant().unwrap();
        let value = &c / &den_c;
        if let Some(folded) = fold(&value) {
            return Ok((Poly::constant(folded), Poly::one()));
        }
    }
    Ok((Poly::atom(make(arg_nf.to_expr())), Poly::one()))
}

/// Canonical form of an expression: the rebuilt tree of its normal form.
/// Idempotent: `normalize(normalize(e)) == normalize(e)`.
pub fn normalize(e: &Expr) -> Result<Expr> {
    Ok(rational_form(e)?.to_expr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::parse_expr;

    fn parse(s: &str) -> Expr {
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        parse_expr(s, &chart).unwrap()
    }

    #[test]
    fn polynomial_identity_normalizes_to_zero() {
        let e = parse("(x+1)^2 - x^2 - 2*x - 1");
        assert!(rational_form(&e).unwrap().is_zero());
    }

    #[test]
    fn cancellation_of_common_factors() {
        let e = parse("(x^2 - 1)/(x - 1)");
        assert_eq!(normalize(&e).unwrap(), normalize(&parse("x + 1")).unwrap());
        let e = parse("(x*y)/(x*z)");
        assert_eq!(normalize(&e).unwrap(), normalize(&parse("y/z")).unwrap());
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        for s in [
            "x^2/2 + y/3 - 1/6",
            "(x + y)/(x - y)",
            "sin(x)^2 + cos(x)^2 - 1",
            "sin(2*x) - sin(x + x)",
            "exp(0) + cos(0)",
            "x^(-2) * y",
        ] {
            let e = parse(s);
            let n1 = normalize(&e).unwrap();
            let n2 = normalize(&n1).unwrap();
            assert_eq!(n1, n2, "normalize not idempotent on {s}");
        }
    }

    #[test]
    fn transcendental_arguments_unify() {
        let e = parse("sin(x + x) - sin(2*x)");
        assert!(rational_form(&e).unwrap().is_zero());
        let e = parse("sin(x)^2 + cos(x)^2 - 1");
        assert!(!rational_form(&e).unwrap().is_zero());
    }

    #[test]
    fn zero_denominator_detected() {
        let e = parse("x / (y - y)");
        assert!(matches!(rational_form(&e), Err(Error::ZeroDenominator)));
    }
}
