//! Exact coefficient arithmetic.
//!
//! Every series and polynomial in the crate carries coefficients of type
//! [`Scalar`]: either an arbitrary-precision rational or an element
//! `a + b*sqrt(d)` of a quadratic field. A scalar with `b = 0` is always
//! stored as a plain rational, so equality is structural.
//!
//! Mixing two quadratic elements with different radicands is an error
//! ([`CoeffError::FieldMismatch`]); the operator impls panic on it, the
//! `try_*` methods report it.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("quadratic fields do not match: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(i64, i64),
    #[error("{value} is not an exact {n}-th power in its field")]
    NotAPower { value: String, n: u32 },
    #[error("radicand {0} must be squarefree and not 0 or 1")]
    InvalidRadicand(i64),
    #[error("cannot parse scalar `{0}`")]
    Parse(String),
}

/// Builds the rational `num/den`. Panics when `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn is_squarefree(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let mut m = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= m {
        if m % (p * p) == 0 {
            return false;
        }
        if m % p == 0 {
            m /= p;
        }
        p += 1;
    }
    true
}

/// `a + b*sqrt(d)` with `d` squarefree, `d` not in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: Rational,
    b: Rational,
    d: i64,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational, d: i64) -> Result<Self, CoeffError> {
        if !is_squarefree(d) {
            return Err(CoeffError::InvalidRadicand(d));
        }
        Ok(QuadExt { a, b, d })
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// `a^2 - d*b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * rat_int(self.d)
    }

    pub fn conjugate(&self) -> QuadExt {
        QuadExt { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }
}

/// Universal exact coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(Rational),
    Quad(QuadExt),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Rat(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::Rat(rat_int(n))
    }
}

impl From<BigInt> for Scalar {
    fn from(n: BigInt) -> Self {
        Scalar::Rat(Rational::from_integer(n))
    }
}

impl From<QuadExt> for Scalar {
    fn from(q: QuadExt) -> Self {
        if q.b.is_zero() {
            Scalar::Rat(q.a)
        } else {
            Scalar::Quad(q)
        }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(Rational::one())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Rat(rat(num, den))
    }

    /// `b * sqrt(d)` as a scalar.
    pub fn sqrt_of(d: i64) -> Result<Self, CoeffError> {
        Ok(Scalar::from(QuadExt::new(Rational::zero(), Rational::one(), d)?))
    }

    pub fn quad(a: Rational, b: Rational, d: i64) -> Result<Self, CoeffError> {
        Ok(Scalar::from(QuadExt::new(a, b, d)?))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Quad(_) => None,
        }
    }

    /// Radicand of the field this element lives in, `None` for rationals.
    pub fn radicand(&self) -> Option<i64> {
        match self {
            Scalar::Rat(_) => None,
            Scalar::Quad(q) => Some(q.d),
        }
    }

    /// Rational part `a` of `a + b*sqrt(d)`.
    pub fn rational_part(&self) -> Rational {
        match self {
            Scalar::Rat(r) => r.clone(),
            Scalar::Quad(q) => q.a.clone(),
        }
    }

    /// Irrational coefficient `b` of `a + b*sqrt(d)` (zero for rationals).
    pub fn irrational_part(&self) -> Rational {
        match self {
            Scalar::Rat(_) => Rational::zero(),
            Scalar::Quad(q) => q.b.clone(),
        }
    }

    pub fn is_integral(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_integer(),
            Scalar::Quad(q) => q.a.is_integer() && q.b.is_integer(),
        }
    }

    pub fn conjugate(&self) -> Scalar {
        match self {
            Scalar::Rat(_) => self.clone(),
            Scalar::Quad(q) => Scalar::Quad(q.conjugate()),
        }
    }

    fn parts(&self) -> (Rational, Rational, Option<i64>) {
        match self {
            Scalar::Rat(r) => (r.clone(), Rational::zero(), None),
            Scalar::Quad(q) => (q.a.clone(), q.b.clone(), Some(q.d)),
        }
    }

    fn common_field(&self, other: &Scalar) -> Result<Option<i64>, CoeffError> {
        match (self.radicand(), other.radicand()) {
            (Some(x), Some(y)) if x != y => Err(CoeffError::FieldMismatch(x, y)),
            (Some(x), _) | (None, Some(x)) => Ok(Some(x)),
            (None, None) => Ok(None),
        }
    }

    fn build(a: Rational, b: Rational, d: Option<i64>) -> Scalar {
        match d {
            Some(d) if !b.is_zero() => Scalar::Quad(QuadExt { a, b, d }),
            _ => Scalar::Rat(a),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, CoeffError> {
        if let (Scalar::Rat(x), Scalar::Rat(y)) = (self, other) {
            return Ok(Scalar::Rat(x + y));
        }
        let d = self.common_field(other)?;
        let (a1, b1, _) = self.parts();
        let (a2, b2, _) = other.parts();
        Ok(Scalar::build(a1 + a2, b1 + b2, d))
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, CoeffError> {
        self.try_add(&-other.clone())
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, CoeffError> {
        match (self, other) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Ok(Scalar::Rat(x * y)),
            (Scalar::Rat(x), Scalar::Quad(q)) | (Scalar::Quad(q), Scalar::Rat(x)) => {
                Ok(Scalar::build(x * &q.a, x * &q.b, Some(q.d)))
            }
            (Scalar::Quad(p), Scalar::Quad(q)) => {
                if p.d != q.d {
                    return Err(CoeffError::FieldMismatch(p.d, q.d));
                }
                let a = &p.a * &q.a + &p.b * &q.b * rat_int(p.d);
                let b = &p.a * &q.b + &p.b * &q.a;
                Ok(Scalar::build(a, b, Some(p.d)))
            }
        }
    }

    pub fn inv(&self) -> Result<Scalar, CoeffError> {
        match self {
            Scalar::Rat(r) => {
                if r.is_zero() {
                    Err(CoeffError::DivisionByZero)
                } else {
                    Ok(Scalar::Rat(r.recip()))
                }
            }
            Scalar::Quad(q) => {
                // b != 0 and d not a square, so the norm is nonzero
                let n = q.norm();
                Ok(Scalar::build(&q.a / &n, -(&q.b / &n), Some(q.d)))
            }
        }
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, CoeffError> {
        self.try_mul(&other.inv()?)
    }

    pub fn scale(&self, r: &Rational) -> Scalar {
        match self {
            Scalar::Rat(x) => Scalar::Rat(x * r),
            Scalar::Quad(q) => Scalar::build(&q.a * r, &q.b * r, Some(q.d)),
        }
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<Scalar, CoeffError> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Scalar::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Exact `n`-th root inside the element's own field.
    ///
    /// For even `n` the root with positive rational part is returned (positive
    /// irrational part when the rational part vanishes).
    pub fn nth_root(&self, n: u32) -> Result<Scalar, CoeffError> {
        assert!(n > 0, "nth_root: n must be positive");
        let not_a_power = || CoeffError::NotAPower { value: self.to_string(), n };
        if n == 1 || self.is_zero() || self.is_one() {
            return Ok(self.clone());
        }
        match self {
            Scalar::Rat(r) => rational_nth_root(r, n).map(Scalar::Rat).ok_or_else(not_a_power),
            Scalar::Quad(q) => {
                if n % 2 == 0 {
                    let s = quad_sqrt(q).ok_or_else(not_a_power)?;
                    s.nth_root(n / 2).map_err(|_| not_a_power())
                } else {
                    quad_odd_root(q, n).ok_or_else(not_a_power)
                }
            }
        }
    }

    fn canonical_sign(self) -> Scalar {
        let (a, b, _) = self.parts();
        if a.is_negative() || (a.is_zero() && b.is_negative()) {
            -self
        } else {
            self
        }
    }
}

fn bigint_nth_root_exact(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return bigint_nth_root_exact(&-x, n).map(|r| -r);
    }
    let r = x.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) == *x {
        Some(r)
    } else {
        None
    }
}

pub fn rational_nth_root(r: &Rational, n: u32) -> Option<Rational> {
    let num = bigint_nth_root_exact(r.numer(), n)?;
    let den = bigint_nth_root_exact(r.denom(), n)?;
    Some(Rational::new(num, den))
}

// (u + v sqrt d)^2 = a + b sqrt d  =>  u^2 + d v^2 = a, 2uv = b,
// so u^2 = (a +- sqrt(norm)) / 2.
fn quad_sqrt(q: &QuadExt) -> Option<Scalar> {
    let root_norm = rational_nth_root(&q.norm(), 2)?;
    let two = rat_int(2);
    for cand in [(&q.a + &root_norm) / &two, (&q.a - &root_norm) / &two] {
        if let Some(u) = rational_nth_root(&cand, 2) {
            if u.is_zero() {
                // a = -d v^2 with b = 0 impossible since b != 0
                continue;
            }
            let v = &q.b / (&u * &two);
            let s = Scalar::build(u, v, Some(q.d));
            if s.try_mul(&s).ok()? == Scalar::Quad(q.clone()) {
                return Some(s.canonical_sign());
            }
        }
    }
    None
}

// Odd roots: locate candidates in floating point, recover the rational parts
// by continued fractions and confirm exactly. A miss is reported as NotAPower.
fn quad_odd_root(q: &QuadExt, n: u32) -> Option<Scalar> {
    let a = q.a.to_f64()?;
    let b = q.b.to_f64()?;
    let d = q.d as f64;
    let target = Scalar::Quad(q.clone());
    let mut candidates = Vec::new();
    if q.d > 0 {
        let x = a + b * d.sqrt();
        let xc = a - b * d.sqrt();
        let r = x.signum() * x.abs().powf(1.0 / n as f64);
        let rc = xc.signum() * xc.abs().powf(1.0 / n as f64);
        candidates.push(((r + rc) / 2.0, (r - rc) / (2.0 * d.sqrt())));
    } else {
        let im = b * (-d).sqrt();
        let modulus = (a * a + im * im).sqrt().powf(1.0 / n as f64);
        let arg = im.atan2(a);
        for k in 0..n {
            let t = (arg + 2.0 * std::f64::consts::PI * k as f64) / n as f64;
            candidates.push((modulus * t.cos(), modulus * t.sin() / (-d).sqrt()));
        }
    }
    for (u, v) in candidates {
        let (Some(u), Some(v)) = (approximate_rational(u), approximate_rational(v)) else {
            continue;
        };
        let s = Scalar::build(u, v, Some(q.d));
        if s.pow(n as i64).ok()? == target {
            return Some(s);
        }
    }
    None
}

fn approximate_rational(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x;
    for _ in 0..40 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = y - a;
        if frac.abs() < 1e-9 || ((h1 as f64) / (k1 as f64) - x).abs() < 1e-12 * x.abs().max(1.0) {
            break;
        }
        y = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(Rational::new(BigInt::from(h1), BigInt::from(k1)))
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Quad(q) => Scalar::Quad(QuadExt { a: -q.a, b: -q.b, d: q.d }),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{}", e))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        match (&mut *self, rhs) {
            (Scalar::Rat(x), Scalar::Rat(y)) => *x += y,
            _ => *self = &*self + rhs,
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        match (&mut *self, rhs) {
            (Scalar::Rat(x), Scalar::Rat(y)) => *x -= y,
            _ => *self = &*self - rhs,
        }
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_string(r: &Rational) -> String {
    struct W<'a>(&'a Rational);
    impl fmt::Display for W<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_rational(self.0, f)
        }
    }
    W(r).to_string()
}

/// Renders `a/b` (denominator omitted when 1) or `a/b+c/e*sqrt(d)`; the
/// irrational coefficient carries its own sign (`1-8*sqrt(-3)`).
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => fmt_rational(r, f),
            Scalar::Quad(q) => {
                fmt_rational(&q.a, f)?;
                if q.b.is_negative() {
                    write!(f, "-")?;
                } else {
                    write!(f, "+")?;
                }
                fmt_rational(&q.b.abs(), f)?;
                write!(f, "*sqrt({})", q.d)
            }
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, CoeffError> {
    let err = || CoeffError::Parse(s.to_string());
    let s = s.trim();
    if s.is_empty() {
        return Err(err());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| err())?;
    let den = BigInt::from_str(den).map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

impl FromStr for Scalar {
    type Err = CoeffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CoeffError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(pos) = t.find("sqrt(") else {
            return parse_rational(&t).map(Scalar::Rat);
        };
        if !t.ends_with(')') {
            return Err(err());
        }
        let d: i64 = t[pos + 5..t.len() - 1].parse().map_err(|_| err())?;
        let head = &t[..pos];
        let head = head.strip_suffix('*').unwrap_or(head);
        // split `a` from the signed coefficient of sqrt(d): the last +/- that
        // is not the leading sign and not inside a numerator/denominator
        let split = head
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-') && !head[..i].ends_with('/'))
            .map(|(i, _)| i)
            .last();
        let (a, b) = match split {
            Some(i) => (parse_rational(&head[..i])?, &head[i..]),
            None => (Rational::zero(), head),
        };
        let b = match b {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            b => parse_rational(b.strip_prefix('+').unwrap_or(b))?,
        };
        Scalar::quad(a, b, d)
    }
}
