//! Exact partial differentiation.

use super::Expr;

impl Expr {
    /// Partial derivative with respect to the named coordinate. Total and
    /// linear; satisfies the Leibniz and chain rules by construction.
    pub fn diff(&self, coord: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Coord(name) => {
                if name == coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Neg(e) => Expr::neg(e.diff(coord)),
            Expr::Add(a, b) => Expr::add(a.diff(coord), b.diff(coord)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(coord), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(coord)),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = (a' b - a b') / b^2
                let num = Expr::sub(
                    Expr::mul(a.diff(coord), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(coord)),
                );
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
            Expr::Pow(base, k) => Expr::mul(
                Expr::mul(Expr::int(*k as i64), Expr::pow((**base).clone(), k - 1)),
                base.diff(coord),
            ),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.diff(coord)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.diff(coord))),
            Expr::Exp(a) => Expr::mul(Expr::exp((**a).clone()), a.diff(coord)),
        }
    }
}
