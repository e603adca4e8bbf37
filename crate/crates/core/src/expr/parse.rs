//! Recursive descent parser for the expression grammar.
//!
//! Numbers are integers or `a/b`; symbols are `[A-Za-z][A-Za-z0-9_]*`;
//! operators `+ - * / ^` with the usual precedence, `^` right-associative
//! with an integer exponent; `sin( )`, `cos( )`, `exp( )`; parentheses.

use super::Expr;
use crate::chart::Chart;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next_tok(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let n: i64 = text.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                self.pos = end;
                return Ok((Tok::Num(n), start));
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                return Ok((Tok::Ident(text), start));
            }
            other => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    chart: &'a Chart,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, chart: &'a Chart) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let (tok, tok_pos) = lexer.next_tok()?;
        Ok(Parser {
            lexer,
            tok,
            tok_pos,
            chart,
        })
    }

    fn advance(&mut self) -> Result<()> {
        let (tok, pos) = self.lexer.next_tok()?;
        self.tok = tok;
        self.tok_pos = pos;
        Ok(())
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.tok_pos,
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.advance()?;
                    acc = Expr::add(acc, self.term()?);
                }
                Tok::Minus => {
                    self.advance()?;
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.advance()?;
                    acc = Expr::mul(acc, self.factor()?);
                }
                Tok::Slash => {
                    self.advance()?;
                    acc = Expr::div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.tok == Tok::Minus {
            self.advance()?;
            return Ok(Expr::neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let k = self.exponent()?;
            return Ok(Expr::pow(base, k));
        }
        Ok(base)
    }

    // Exponents are integers; `a^b^c` nests to the right on the integers.
    fn exponent(&mut self) -> Result<i32> {
        let mut neg = false;
        let mut parens = false;
        if self.tok == Tok::LParen {
            parens = true;
            self.advance()?;
        }
        if self.tok == Tok::Minus {
            neg = true;
            self.advance()?;
        }
        let n = match self.tok {
            Tok::Num(n) => n,
            _ => return self.err("expected integer exponent"),
        };
        self.advance()?;
        let mut value: i64 = if neg { -n } else { n };
        if !parens && self.tok == Tok::Caret {
            self.advance()?;
            let upper = self.exponent()? as i64;
            if upper < 0 {
                return self.err("negative exponent in an exponent tower");
            }
            value = value
                .checked_pow(upper.try_into().map_err(|_| Error::ExponentRange)?)
                .ok_or(Error::ExponentRange)?;
        }
        if parens {
            if self.tok != Tok::RParen {
                return self.err("expected `)` after exponent");
            }
            self.advance()?;
        }
        i32::try_from(value).map_err(|_| Error::ExponentRange)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(n) => {
                self.advance()?;
                Ok(Expr::int(n))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.advance()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let pos = self.tok_pos;
                self.advance()?;
                match name.as_str() {
                    "sin" | "cos" | "exp" => {
                        if self.tok != Tok::LParen {
                            return self.err(format!("expected `(` after `{name}`"));
                        }
                        self.advance()?;
                        let arg = self.expr()?;
                        if self.tok != Tok::RParen {
                            return self.err("expected `)`");
                        }
                        self.advance()?;
                        Ok(match name.as_str() {
                            "sin" => Expr::sin(arg),
                            "cos" => Expr::cos(arg),
                            _ => Expr::exp(arg),
                        })
                    }
                    _ => {
                        if self.chart.index_of(&name).is_none() {
                            return Err(Error::UnknownSymbol { name, pos });
                        }
                        Ok(Expr::coord(name))
                    }
                }
            }
            Tok::End => self.err("unexpected end of input"),
            other => self.err(format!("unexpected token {other:?}")),
        }
    }
}

/// Parse `text` against the declared chart coordinates.
pub fn parse_expr(text: &str, chart: &Chart) -> Result<Expr> {
    let mut parser = Parser::new(text, chart)?;
    let e = parser.expr()?;
    if parser.tok != Tok::End {
        return parser.err(format!("trailing input starting with {:?}", parser.tok));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new(vec!["x1", "y2"]).unwrap()
    }

    #[test]
    fn parses_polynomials() {
        let c = chart();
        let e = parse_expr("x1^2 + 3/2", &c).unwrap();
        assert_eq!(
            e,
            Expr::add(Expr::pow(Expr::coord("x1"), 2), Expr::rat(3, 2))
        );
    }

    #[test]
    fn parses_functions_and_products() {
        let c = chart();
        let e = parse_expr("sin(x1)*y2", &c).unwrap();
        assert_eq!(e, Expr::mul(Expr::sin(Expr::coord("x1")), Expr::coord("y2")));
    }

    #[test]
    fn reports_syntax_error_position() {
        let c = chart();
        let err = parse_expr("x1 + * 2", &c).unwrap_err();
        match err {
            Error::Syntax { pos, .. } => assert_eq!(pos, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_symbol() {
        let c = chart();
        assert!(matches!(
            parse_expr("z9 + 1", &c),
            Err(Error::UnknownSymbol { .. })
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        let c = chart();
        assert_eq!(
            parse_expr("2*x1^2^3", &c).unwrap(),
            Expr::mul(Expr::int(2), Expr::pow(Expr::coord("x1"), 8))
        );
        assert_eq!(
            parse_expr("-x1^2", &c).unwrap(),
            Expr::neg(Expr::pow(Expr::coord("x1"), 2))
        );
        assert_eq!(parse_expr("x1^(-2)", &c).unwrap(), Expr::Pow(Box::new(Expr::coord("x1")), -2));
        assert_eq!(
            parse_expr("1 - 2 - 3", &c).unwrap(),
            Expr::Const(Scalar::from_int(-4))
        );
    }

    use crate::scalar::Scalar;
}
