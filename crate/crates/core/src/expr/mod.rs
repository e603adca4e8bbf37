//! Exact symbolic scalar expressions over chart coordinates.
//!
//! Trees are built from rational constants, coordinate symbols, the ring
//! operations, integer powers, and `sin`/`cos`/`exp`. Rational subtrees are
//! fully decidable (normal form, exact zero test); trees containing a
//! transcendental node degrade to sampled verdicts.

mod classify;
mod diff;
mod eval;
mod normal;
mod parse;
mod sample;

pub use classify::{classify_zero, ZeroVerdict, ZeroWitness};
pub use eval::WitnessValue;
pub use normal::{normalize, rational_form, Poly, RationalForm};
pub use parse::parse_expr;
pub use sample::{sample_point, with_retries, SampleConfig, MAX_RETRIES};

use crate::scalar::Scalar;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    Const(Scalar),
    Coord(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Scalar::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Scalar::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Scalar::from_int(n))
    }

    pub fn rat(num: i64, den: i64) -> Expr {
        Expr::Const(Scalar::ratio(num, den))
    }

    pub fn coord<S: Into<String>>(name: S) -> Expr {
        Expr::Coord(name.into())
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Constant-folding sum.
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) if a.is_zero_const() => b,
            (a, b) if b.is_zero_const() => a,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(a, Expr::neg(b))
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (a, b) if a.is_zero_const() || b.is_zero_const() => Expr::zero(),
            (a, b) if a.is_one_const() => b,
            (a, b) if b.is_one_const() => a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// Constant-folding quotient. Division by a literal zero constant is kept
    /// as a tree node; it surfaces as an error at evaluation or normalization.
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if !y.is_zero() => Expr::Const(x / y),
            (a, b) if a.is_zero_const() && !b.is_zero_const() => Expr::zero(),
            (a, b) if b.is_one_const() => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(e: Expr, k: i32) -> Expr {
        match (e, k) {
            (_, 0) => Expr::one(),
            (e, 1) => e,
            (Expr::Const(c), k) if !(c.is_zero() && k < 0) => Expr::Const(c.pow(k)),
            (e, k) => Expr::Pow(Box::new(e), k),
        }
    }

    pub fn sin(e: Expr) -> Expr {
        Expr::Sin(Box::new(e))
    }

    pub fn cos(e: Expr) -> Expr {
        Expr::Cos(Box::new(e))
    }

    pub fn exp(e: Expr) -> Expr {
        Expr::Exp(Box::new(e))
    }

    /// Linear combination helper: `sum(terms)`.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), Expr::add)
    }

    pub fn scale(c: Scalar, e: Expr) -> Expr {
        Expr::mul(Expr::Const(c), e)
    }

    /// Canonical compact form via the rational normal form; the expression
    /// is returned unchanged when it has an identically-zero denominator.
    pub fn simplified(&self) -> Expr {
        normal::rational_form(self)
            .map(|nf| nf.to_expr())
            .unwrap_or_else(|_| self.clone())
    }

    pub fn has_transcendental(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Coord(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) => e.has_transcendental(),
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_transcendental() || b.has_transcendental()
            }
            Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => true,
        }
    }

    pub fn free_coords(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_coords(&mut out);
        out
    }

    fn collect_coords(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Coord(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Sin(e) | Expr::Cos(e) | Expr::Exp(e) => {
                e.collect_coords(out)
            }
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_coords(out);
                b.collect_coords(out);
            }
        }
    }

    /// Substitute `replacement` for every occurrence of the coordinate `name`.
    pub fn subst(&self, name: &str, replacement: &Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Coord(n) => {
                if n == name {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Neg(e) => Expr::neg(e.subst(name, replacement)),
            Expr::Add(a, b) => Expr::add(a.subst(name, replacement), b.subst(name, replacement)),
            Expr::Mul(a, b) => Expr::mul(a.subst(name, replacement), b.subst(name, replacement)),
            Expr::Div(a, b) => Expr::div(a.subst(name, replacement), b.subst(name, replacement)),
            Expr::Pow(e, k) => Expr::pow(e.subst(name, replacement), *k),
            Expr::Sin(e) => Expr::sin(e.subst(name, replacement)),
            Expr::Cos(e) => Expr::cos(e.subst(name, replacement)),
            Expr::Exp(e) => Expr::exp(e.subst(name, replacement)),
        }
    }

    /// Substitute zero for every coordinate in `names`.
    pub fn subst_zero(&self, names: &[&str]) -> Expr {
        let mut e = self.clone();
        for name in names {
            e = e.subst(name, &Expr::zero());
        }
        e
    }

    /// Rename coordinates according to `(old, new)` pairs.
    pub fn rename_coords(&self, map: &[(&str, &str)]) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Coord(n) => {
                for (old, new) in map {
                    if n == old {
                        return Expr::coord(*new);
                    }
                }
                self.clone()
            }
            Expr::Neg(e) => Expr::Neg(Box::new(e.rename_coords(map))),
            Expr::Add(a, b) => {
                Expr::Add(Box::new(a.rename_coords(map)), Box::new(b.rename_coords(map)))
            }
            Expr::Mul(a, b) => {
                Expr::Mul(Box::new(a.rename_coords(map)), Box::new(b.rename_coords(map)))
            }
            Expr::Div(a, b) => {
                Expr::Div(Box::new(a.rename_coords(map)), Box::new(b.rename_coords(map)))
            }
            Expr::Pow(e, k) => Expr::Pow(Box::new(e.rename_coords(map)), *k),
            Expr::Sin(e) => Expr::Sin(Box::new(e.rename_coords(map))),
            Expr::Cos(e) => Expr::Cos(Box::new(e.rename_coords(map))),
            Expr::Exp(e) => Expr::Exp(Box::new(e.rename_coords(map))),
        }
    }
}

impl From<Scalar> for Expr {
    fn from(s: Scalar) -> Expr {
        Expr::Const(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// Precedence levels for display: 0 sum, 1 product, 2 unary, 3 power, 4 atom.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) => 0,
        Expr::Mul(..) | Expr::Div(..) => 1,
        Expr::Neg(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Const(c) if c.is_negative() || !c.is_integer() => 1,
        _ => 4,
    }
}

fn fmt_prec(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(e);
    if p < min {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(c) => write!(f, "{c}")?,
        Expr::Coord(n) => write!(f, "{n}")?,
        Expr::Neg(inner) => {
            write!(f, "-")?;
            fmt_prec(inner, 2, f)?;
        }
        Expr::Add(a, b) => {
            fmt_prec(a, 0, f)?;
            if let Expr::Neg(inner) = &**b {
                write!(f, " - ")?;
                fmt_prec(inner, 1, f)?;
            } else if let Expr::Const(c) = &**b {
                if c.is_negative() {
                    write!(f, " - {}", c.abs())?;
                } else {
                    write!(f, " + {c}")?;
                }
            } else {
                write!(f, " + ")?;
                fmt_prec(b, 1, f)?;
            }
        }
        Expr::Mul(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, "*")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Div(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, "/")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Pow(base, k) => {
            fmt_prec(base, 4, f)?;
            if *k < 0 {
                write!(f, "^({k})")?;
            } else {
                write!(f, "^{k}")?;
            }
        }
        Expr::Sin(a) => {
            write!(f, "sin(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
        Expr::Cos(a) => {
            write!(f, "cos(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
    }
    if p < min {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smart_constructors_fold() {
        let x = Expr::coord("x");
        assert_eq!(Expr::add(Expr::zero(), x.clone()), x);
        assert_eq!(Expr::mul(Expr::zero(), x.clone()), Expr::zero());
        assert_eq!(Expr::mul(Expr::one(), x.clone()), x);
        assert_eq!(Expr::pow(x.clone(), 0), Expr::one());
        assert_eq!(Expr::neg(Expr::neg(x.clone())), x);
        assert_eq!(Expr::div(Expr::int(3), Expr::int(2)), Expr::rat(3, 2));
    }

    #[test]
    fn display_round_trip_shapes() {
        let e = Expr::sub(
            Expr::pow(Expr::coord("x1"), 2),
            Expr::mul(Expr::rat(3, 2), Expr::coord("y")),
        );
        assert_eq!(e.to_string(), "x1^2 - 3/2*y");
    }
}
