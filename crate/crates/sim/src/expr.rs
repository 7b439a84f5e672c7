//! Closed-form density expressions in `x` and `y`.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 'x' | 'y' | 'pi' | 'e' | 'exp' '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus on its left,
//! so `-x^2` is `-(x^2)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("expression error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let mut parser = Parser { src, pos: 0 };
        let expr = parser.sum()?;
        parser.skip_ws();
        if parser.pos < src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(expr)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::Pow(a, b) => {
                let base = a.eval(x, y);
                let exponent = b.eval(x, y);
                // Integer exponents keep negative bases meaningful.
                if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
                    base.powi(exponent as i32)
                } else {
                    base.powf(exponent)
                }
            }
            Expr::Exp(a) => a.eval(x, y).exp(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let len = self.src[start..]
                    .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                    .unwrap_or(self.src.len() - start);
                let word = &self.src[start..start + len];
                self.pos += len;
                match word {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => Ok(Expr::Const(std::f64::consts::E)),
                    "exp" => {
                        if !self.eat('(') {
                            return Err(self.error("expected '(' after exp"));
                        }
                        let arg = self.sum()?;
                        if !self.eat(')') {
                            return Err(self.error("expected ')'"));
                        }
                        Ok(Expr::Exp(Box::new(arg)))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(format!("unknown identifier '{word}'")))
                    }
                }
            }
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        // Optional exponent, only when digits follow.
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut probe = end + 1;
            if probe < bytes.len() && (bytes[probe] == b'+' || bytes[probe] == b'-') {
                probe += 1;
            }
            if probe < bytes.len() && bytes[probe].is_ascii_digit() {
                end = probe;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = &self.src[start..end];
        let value = text
            .parse::<f64>()
            .map_err(|_| self.error(format!("bad number '{text}'")))?;
        self.pos = end;
        Ok(Expr::Const(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, x: f64, y: f64) -> f64 {
        Expr::parse(src).unwrap().eval(x, y)
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(eval("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(eval("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(eval("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(eval("x - y - 1", 5.0, 2.0), 2.0);
        assert_eq!(eval("8 / 2 / 2", 0.0, 0.0), 2.0);
        assert_eq!(eval("2^-1", 0.0, 0.0), 0.5);
    }

    #[test]
    fn gaussian_bump() {
        let v = eval("exp(-((x - 0.5)^2 + (y - 0.5)^2) / 0.08)", 0.5, 0.5);
        assert_eq!(v, 1.0);
        let w = eval("exp(-((x - 0.5)^2 + (y - 0.5)^2) / 0.08)", 0.7, 0.5);
        assert!((w - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn numbers_and_constants() {
        assert_eq!(eval("1.5e2", 0.0, 0.0), 150.0);
        assert!((eval("2*e", 0.0, 0.0) - 2.0 * std::f64::consts::E).abs() < 1e-15);
        assert!(Expr::parse("2e").is_err());
        assert!((eval("pi", 0.0, 0.0) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(eval(".25", 0.0, 0.0), 0.25);
    }

    #[test]
    fn errors_carry_positions() {
        let err = Expr::parse("1 + z").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(Expr::parse("exp 1").is_err());
        assert!(Expr::parse("(x + 1").is_err());
        assert!(Expr::parse("x y").is_err());
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = Expr::parse("1 - x*(y + 2)^2 / exp(-x)").unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        assert_eq!(e.eval(0.3, -0.7), again.eval(0.3, -0.7));
    }
}
