//! Small expression language shared by system files and bracket operands.
//!
//! Grammar: `+ - * ^ /`, parentheses, rational literals, `sqrt(d)`, names.
//! Division is only allowed by expressions that evaluate to constants.

use thiserror::Error;

use crate::coeff::{parse_rational, CoeffError, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("division by a non-constant expression")]
    NonConstantDivisor,
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Sqrt(i64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// Target algebra for [`Expr::eval`].
pub trait ExprContext {
    type Value: Clone;
    type Error: From<ExprError>;

    fn constant(&self, c: Scalar) -> Result<Self::Value, Self::Error>;
    fn variable(&self, name: &str) -> Result<Self::Value, Self::Error>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, Self::Error>;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, Self::Error>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, Self::Error>;
    fn pow(&self, a: &Self::Value, e: i64) -> Result<Self::Value, Self::Error>;
    fn scale(&self, a: &Self::Value, c: &Scalar) -> Result<Self::Value, Self::Error>;
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Folds constant subexpressions; `None` when a name occurs.
    pub fn constant_value(&self) -> Result<Option<Scalar>, ExprError> {
        Ok(match self {
            Expr::Num(r) => Some(Scalar::Rat(r.clone())),
            Expr::Sqrt(d) => Some(Scalar::sqrt_of(*d)?),
            Expr::Var(_) => None,
            Expr::Neg(a) => a.constant_value()?.map(|x| -x),
            Expr::Add(a, b) => match (a.constant_value()?, b.constant_value()?) {
                (Some(x), Some(y)) => Some(x.try_add(&y)?),
                _ => None,
            },
            Expr::Sub(a, b) => match (a.constant_value()?, b.constant_value()?) {
                (Some(x), Some(y)) => Some(x.try_sub(&y)?),
                _ => None,
            },
            Expr::Mul(a, b) => match (a.constant_value()?, b.constant_value()?) {
                (Some(x), Some(y)) => Some(x.try_mul(&y)?),
                _ => None,
            },
            Expr::Div(a, b) => match (a.constant_value()?, b.constant_value()?) {
                (Some(x), Some(y)) => Some(x.try_div(&y)?),
                _ => None,
            },
            Expr::Pow(a, e) => match a.constant_value()? {
                Some(x) => Some(x.pow(*e)?),
                None => None,
            },
        })
    }

    pub fn eval<C: ExprContext>(&self, ctx: &C) -> Result<C::Value, C::Error> {
        if let Some(c) = self.constant_value()? {
            return ctx.constant(c);
        }
        match self {
            Expr::Num(_) | Expr::Sqrt(_) => unreachable!("constants folded above"),
            Expr::Var(name) => ctx.variable(name),
            Expr::Neg(a) => ctx.scale(&a.eval(ctx)?, &-Scalar::one()),
            Expr::Add(a, b) => ctx.add(&a.eval(ctx)?, &b.eval(ctx)?),
            Expr::Sub(a, b) => ctx.sub(&a.eval(ctx)?, &b.eval(ctx)?),
            Expr::Mul(a, b) => ctx.mul(&a.eval(ctx)?, &b.eval(ctx)?),
            Expr::Div(a, b) => {
                let c = b.constant_value()?.ok_or(ExprError::NonConstantDivisor)?;
                let inv = c.inv().map_err(ExprError::from)?;
                ctx.scale(&a.eval(ctx)?, &inv)
            }
            Expr::Pow(a, e) => ctx.pow(&a.eval(ctx)?, *e),
        }
    }

    /// Names occurring in the expression, in first-occurrence order.
    pub fn names(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Var(n) => {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                Expr::Num(_) | Expr::Sqrt(_) => {}
                Expr::Neg(a) | Expr::Pow(a, _) => walk(a, out),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            self.skip_ws();
            let digits = self.take_while(|c| c.is_ascii_digit());
            if digits.is_empty() {
                return Err(self.err("expected integer exponent"));
            }
            let e: i64 = digits.parse().map_err(|_| self.err("exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && f(self.src[self.pos]) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.take_while(|c| c.is_ascii_digit());
                Ok(Expr::Num(parse_rational(&digits)?))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'\'');
                if name == "sqrt" {
                    if !self.eat(b'(') {
                        return Err(self.err("expected `(` after sqrt"));
                    }
                    let neg = self.eat(b'-');
                    self.skip_ws();
                    let digits = self.take_while(|c| c.is_ascii_digit());
                    let d: i64 = digits.parse().map_err(|_| self.err("expected integer radicand"))?;
                    if !self.eat(b')') {
                        return Err(self.err("expected `)`"));
                    }
                    return Ok(Expr::Sqrt(if neg { -d } else { d }));
                }
                Ok(Expr::Var(name))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
