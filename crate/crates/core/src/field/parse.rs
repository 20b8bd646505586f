//! Expression grammar shared by every ingestion path.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' exponent)?
//! exponent := ['-'] integer | '(' ['-'] integer ')'
//! atom   := integer | identifier | '(' expr ')'
//! ```
//! Identifiers are the fiber coordinate, declared base variables, parameters
//! and the extension generator. `d<name>` is a differential when `<name>` is
//! the fiber or a base variable and `d<name>` is not itself declared.
//! Whitespace is ignored. Differentials may only be multiplied or divided by
//! scalars and added to other differentials.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::tower::{RationalFunction, ScalarTower};
use super::FieldError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, FieldError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((start, Tok::Int(s.parse().unwrap())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(FieldError::Parse { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

/// A parsed value: a scalar, or a 1-form given by its coefficients on
/// (d fiber, d base₀, d base₁, …).
#[derive(Clone, Debug)]
enum Val {
    Scalar(RationalFunction),
    Form(Vec<RationalFunction>),
}

struct Parser<'a> {
    tower: &'a Arc<ScalarTower>,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FieldError> {
        let pos = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end);
        Err(FieldError::Parse { pos, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn zero_form(&self) -> Vec<RationalFunction> {
        vec![RationalFunction::zero(self.tower); self.tower.nbase() + 1]
    }

    fn combine(&self, a: Val, b: Val, sign: bool) -> Result<Val, FieldError> {
        let op = |x: &RationalFunction, y: &RationalFunction| if sign { x + y } else { x - y };
        match (a, b) {
            (Val::Scalar(x), Val::Scalar(y)) => Ok(Val::Scalar(op(&x, &y))),
            (Val::Form(x), Val::Form(y)) => Ok(Val::Form(x.iter().zip(&y).map(|(p, q)| op(p, q)).collect())),
            (Val::Scalar(x), Val::Form(y)) | (Val::Form(y), Val::Scalar(x)) if x.is_zero() => {
                // keep orientation for subtraction `0 - form`
                Ok(Val::Form(y))
            }
            _ => self.err("cannot add a scalar and a differential"),
        }
    }

    fn expr(&mut self) -> Result<Val, FieldError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                acc = self.combine(acc, rhs, true)?;
            } else if self.eat('-') {
                let rhs = self.term()?;
                acc = match (acc, rhs) {
                    (Val::Scalar(x), Val::Form(y)) if x.is_zero() => Val::Form(y.iter().map(|c| -c).collect()),
                    (a, b) => self.combine(a, b, false)?,
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Val, FieldError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                acc = match (acc, rhs) {
                    (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(&x * &y),
                    (Val::Scalar(x), Val::Form(f)) | (Val::Form(f), Val::Scalar(x)) => {
                        Val::Form(f.iter().map(|c| c * &x).collect())
                    }
                    _ => return self.err("product of two differentials"),
                };
            } else if self.eat('/') {
                let rhs = self.unary()?;
                let den = match rhs {
                    Val::Scalar(y) => y,
                    Val::Form(_) => return self.err("division by a differential"),
                };
                let inv = den.inv().or_else(|_| self.err("division by zero"))?;
                acc = match acc {
                    Val::Scalar(x) => Val::Scalar(&x * &inv),
                    Val::Form(f) => Val::Form(f.iter().map(|c| c * &inv).collect()),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Val, FieldError> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                Val::Scalar(x) => Val::Scalar(-&x),
                Val::Form(f) => Val::Form(f.iter().map(|c| -c).collect()),
            });
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn exponent(&mut self) -> Result<i32, FieldError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let v = match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                i32::try_from(n).or_else(|_| self.err("exponent too large"))?
            }
            _ => return self.err("expected integer exponent"),
        };
        if paren && !self.eat(')') {
            return self.err("expected `)`");
        }
        Ok(if neg { -v } else { v })
    }

    fn power(&mut self) -> Result<Val, FieldError> {
        let base = self.atom()?;
        if self.eat('^') {
            let k = self.exponent()?;
            return match base {
                Val::Scalar(x) => {
                    if k < 0 && x.is_zero() {
                        return self.err("negative power of zero");
                    }
                    Ok(Val::Scalar(x.pow(k)))
                }
                Val::Form(_) => self.err("power of a differential"),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Val, FieldError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Val::Scalar(RationalFunction::from_rational(self.tower, BigRational::from_integer(n))))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.ident(&name)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(v)
            }
            _ => self.err("expected a number, a name or `(`"),
        }
    }

    fn ident(&mut self, name: &str) -> Result<Val, FieldError> {
        let t = self.tower;
        if let Some(i) = t.var_index(name) {
            return Ok(Val::Scalar(RationalFunction::var(t, i)));
        }
        if let Some((gen, _)) = t.ext() {
            if gen == name {
                return Ok(Val::Scalar(RationalFunction::gen(t)));
            }
        }
        if let Some(rest) = name.strip_prefix('d') {
            let slot = if rest == t.fiber() { Some(0) } else { t.base_position(rest).map(|i| i + 1) };
            if let Some(k) = slot {
                let mut f = self.zero_form();
                f[k] = RationalFunction::one(t);
                return Ok(Val::Form(f));
            }
        }
        self.pos -= 1;
        self.err(format!("unknown name `{name}`"))
    }
}

fn run(tower: &Arc<ScalarTower>, src: &str) -> Result<Val, FieldError> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(FieldError::Parse { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { tower, toks, pos: 0, end: src.len() };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// Parse a scalar expression.
pub fn parse_scalar(tower: &Arc<ScalarTower>, src: &str) -> Result<RationalFunction, FieldError> {
    match run(tower, src)? {
        Val::Scalar(x) => Ok(x),
        Val::Form(_) => Err(FieldError::Parse { pos: 0, msg: "expected a scalar, found a differential".into() }),
    }
}

/// Parse a 1-form; returns coefficients on (d fiber, d base₀, …). A bare `0`
/// is the zero form.
pub fn parse_form(tower: &Arc<ScalarTower>, src: &str) -> Result<Vec<RationalFunction>, FieldError> {
    match run(tower, src)? {
        Val::Form(f) => Ok(f),
        Val::Scalar(x) if x.is_zero() => Ok(vec![RationalFunction::zero(tower); tower.nbase() + 1]),
        Val::Scalar(_) => Err(FieldError::Parse { pos: 0, msg: "expected a differential form".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower() -> Arc<ScalarTower> {
        ScalarTower::new("z", &["a", "b"], &["alpha"], Some(("w", "a*b"))).unwrap()
    }

    #[test]
    fn precedence_and_powers() {
        let t = tower();
        let x = parse_scalar(&t, "-a^2 + 2*a*b/4").unwrap();
        let y = parse_scalar(&t, "(a*b - 2*a^2)/2").unwrap();
        assert_eq!(x, y);
        assert_eq!(parse_scalar(&t, "a^-2").unwrap(), parse_scalar(&t, "1/(a*a)").unwrap());
    }

    #[test]
    fn generator_relation() {
        let t = tower();
        assert!(parse_scalar(&t, "w^2/(a*b)").unwrap().is_one());
    }

    #[test]
    fn forms() {
        let t = tower();
        let f = parse_form(&t, "alpha*dz/z - 3*da + db/b").unwrap();
        assert_eq!(f[0], parse_scalar(&t, "alpha/z").unwrap());
        assert_eq!(f[1], parse_scalar(&t, "-3").unwrap());
        assert!(parse_form(&t, "dz*da").is_err());
        assert!(parse_form(&t, "z + dz").is_err());
        assert!(parse_form(&t, "dalpha").is_err());
        let neg = parse_form(&t, "0 - dz").unwrap();
        assert_eq!(neg[0], parse_scalar(&t, "-1").unwrap());
    }

    #[test]
    fn errors_carry_position() {
        let t = tower();
        match parse_scalar(&t, "a + q") {
            Err(FieldError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
    }
}
