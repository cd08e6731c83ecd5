//! Truncated Puiseux series over [`Scalar`].
//!
//! A series stores its terms keyed by integer-scaled exponents: key `e` with
//! exponent denominator `D` stands for `x^(e/D)`. The truncation bound `prec`
//! is a rational (or `None` for an exact, finite series); every stored
//! exponent lies strictly below it, and every coefficient below it is known.
//!
//! Precision propagation is pessimistic. Products follow
//! `prec(fg) = min(prec f + val g, prec g + val f)`; quotients keep the
//! smaller relative precision. Reading a coefficient at or beyond `prec`
//! is an error, never a silent zero.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{parse_rational, rat_int, rational_to_string, CoeffError, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("division by a series that is zero to its precision")]
    DivisionByZero,
    #[error("operation needs a finite precision; truncate the exact input first")]
    Unbounded,
    #[error("coefficient of x^{exponent} requested beyond precision O(x^{prec})")]
    BeyondPrecision { exponent: String, prec: String },
    #[error("valuation precondition violated: {0}")]
    Valuation(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("malformed series JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

#[derive(Clone, Debug)]
pub struct Series {
    denom: i64,
    terms: BTreeMap<i64, Scalar>,
    prec: Option<Rational>,
}

fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

fn min_prec(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(x.min(y).clone()),
    }
}

fn ceil_scaled(p: &Rational, d: i64) -> i64 {
    (p * rat_int(d)).ceil().to_integer().to_i64().expect("precision out of range")
}

impl Series {
    pub fn zero() -> Self {
        Series { denom: 1, terms: BTreeMap::new(), prec: None }
    }

    /// The zero series `O(x^prec)`.
    pub fn big_o(prec: Rational) -> Self {
        Series { denom: prec.denom().to_i64().unwrap_or(1), terms: BTreeMap::new(), prec: Some(prec) }
    }

    pub fn one() -> Self {
        Series::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Series::monomial(c, Rational::zero())
    }

    /// `c * x^exponent`, exact.
    pub fn monomial(c: Scalar, exponent: Rational) -> Self {
        let denom = exponent.denom().to_i64().expect("exponent denominator too large");
        let key = (exponent.numer()).to_i64().expect("exponent too large");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(key, c);
        }
        Series { denom, terms, prec: None }
    }

    /// The series variable `x`.
    pub fn var() -> Self {
        Series::monomial(Scalar::one(), Rational::one())
    }

    /// Integer-exponent series `sum c_k x^k + O(x^prec)`.
    pub fn from_coeffs<I: IntoIterator<Item = Scalar>>(coeffs: I, prec: Option<i64>) -> Self {
        let mut terms = BTreeMap::new();
        for (k, c) in coeffs.into_iter().enumerate() {
            let k = k as i64;
            if prec.is_some_and(|p| k >= p) {
                break;
            }
            if !c.is_zero() {
                terms.insert(k, c);
            }
        }
        Series { denom: 1, terms, prec: prec.map(rat_int) }
    }

    /// Builds a series from integer-scaled terms in denominator `denom`.
    pub fn from_terms<I>(denom: i64, terms: I, prec: Option<Rational>) -> Self
    where
        I: IntoIterator<Item = (i64, Scalar)>,
    {
        assert!(denom > 0, "exponent denominator must be positive");
        let cut = prec.as_ref().map(|p| ceil_scaled(p, denom));
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if c.is_zero() || cut.is_some_and(|cut| e >= cut) {
                continue;
            }
            map.insert(e, c);
        }
        Series { denom, terms: map, prec }.normalized()
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn prec(&self) -> Option<&Rational> {
        self.prec.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// `(scaled exponent, coefficient)` pairs in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    /// `(exponent, coefficient)` pairs with rational exponents.
    pub fn exponent_terms(&self) -> impl Iterator<Item = (Rational, &Scalar)> + '_ {
        self.terms.iter().map(move |(&e, c)| (Rational::new(e.into(), self.denom.into()), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True when every coefficient below the precision vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<Rational> {
        self.terms.keys().next().map(|&e| Rational::new(e.into(), self.denom.into()))
    }

    /// Valuation used for precision bookkeeping: the precision itself for a
    /// series that is zero to its precision.
    fn val_or_prec(&self) -> Option<Rational> {
        self.valuation().or_else(|| self.prec.clone())
    }

    pub fn leading_coeff(&self) -> Option<&Scalar> {
        self.terms.values().next()
    }

    /// Coefficient of `x^exponent`.
    pub fn coeff(&self, exponent: &Rational) -> Result<Scalar> {
        if let Some(p) = &self.prec {
            if exponent >= p {
                return Err(SeriesError::BeyondPrecision {
                    exponent: rational_to_string(exponent),
                    prec: rational_to_string(p),
                });
            }
        }
        let scaled = exponent * rat_int(self.denom);
        if !scaled.is_integer() {
            return Ok(Scalar::zero());
        }
        let key = scaled.to_integer().to_i64().expect("exponent out of range");
        Ok(self.terms.get(&key).cloned().unwrap_or_default())
    }

    /// Coefficient of `x^k` for integer `k`.
    pub fn coeff_at(&self, k: i64) -> Result<Scalar> {
        self.coeff(&rat_int(k))
    }

    /// Changes the exponent denominator to a multiple `new_denom` of the current one.
    pub fn lift(&self, new_denom: i64) -> Series {
        assert!(new_denom % self.denom == 0, "lift target must be a multiple");
        let f = new_denom / self.denom;
        Series {
            denom: new_denom,
            terms: self.terms.iter().map(|(&e, c)| (e * f, c.clone())).collect(),
            prec: self.prec.clone(),
        }
    }

    /// Reduces the exponent denominator as far as the stored exponents allow.
    fn normalized(mut self) -> Series {
        let mut g = self.denom;
        for &e in self.terms.keys() {
            g = g.gcd(&e);
            if g == 1 {
                break;
            }
        }
        if g > 1 {
            self.terms = std::mem::take(&mut self.terms).into_iter().map(|(e, c)| (e / g, c)).collect();
            self.denom /= g;
        }
        self
    }

    /// Truncates to `O(x^prec)`; never raises an existing precision.
    pub fn truncate(&self, prec: Rational) -> Series {
        let new_prec = min_prec(&self.prec, &Some(prec));
        let cut = ceil_scaled(new_prec.as_ref().unwrap(), self.denom);
        Series {
            denom: self.denom,
            terms: self.terms.range(..cut).map(|(&e, c)| (e, c.clone())).collect(),
            prec: new_prec,
        }
        .normalized()
    }

    pub fn truncate_int(&self, prec: i64) -> Series {
        self.truncate(rat_int(prec))
    }

    fn map_coeffs<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> Series {
        Series {
            denom: self.denom,
            terms: self
                .terms
                .iter()
                .filter_map(|(&e, c)| {
                    let v = f(c);
                    (!v.is_zero()).then_some((e, v))
                })
                .collect(),
            prec: self.prec.clone(),
        }
        .normalized()
    }

    pub fn scale(&self, c: &Scalar) -> Series {
        if c.is_zero() {
            return Series { denom: 1, terms: BTreeMap::new(), prec: self.prec.clone() };
        }
        self.map_coeffs(|x| x * c)
    }

    pub fn scale_rational(&self, r: &Rational) -> Series {
        self.scale(&Scalar::Rat(r.clone()))
    }

    /// Coefficientwise conjugation in the quadratic field.
    pub fn conjugate(&self) -> Series {
        self.map_coeffs(Scalar::conjugate)
    }

    /// Multiplies by `x^shift`.
    pub fn shift(&self, shift: &Rational) -> Series {
        let d = lcm(self.denom, shift.denom().to_i64().expect("shift denominator"));
        let lifted = self.lift(d);
        let s = (shift * rat_int(d)).to_integer().to_i64().unwrap();
        Series {
            denom: d,
            terms: lifted.terms.into_iter().map(|(e, c)| (e + s, c)).collect(),
            prec: self.prec.as_ref().map(|p| p + shift),
        }
        .normalized()
    }

    fn checked_add(&self, other: &Series, negate: bool) -> Series {
        let d = lcm(self.denom, other.denom);
        let prec = min_prec(&self.prec, &other.prec);
        let cut = prec.as_ref().map(|p| ceil_scaled(p, d));
        let fa = d / self.denom;
        let fb = d / other.denom;
        let mut terms: BTreeMap<i64, Scalar> = BTreeMap::new();
        for (&e, c) in &self.terms {
            let k = e * fa;
            if cut.is_some_and(|cut| k >= cut) {
                break;
            }
            terms.insert(k, c.clone());
        }
        for (&e, c) in &other.terms {
            let k = e * fb;
            if cut.is_some_and(|cut| k >= cut) {
                break;
            }
            let entry = terms.entry(k).or_default();
            if negate {
                *entry -= c;
            } else {
                *entry += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Series { denom: d, terms, prec }.normalized()
    }

    fn product(&self, other: &Series) -> Series {
        let d = lcm(self.denom, other.denom);
        let prec = match (&self.prec, &other.prec) {
            (None, None) => None,
            (Some(pf), None) => Some(pf + other.val_or_prec().unwrap_or_else(Rational::zero)),
            (None, Some(pg)) => Some(pg + self.val_or_prec().unwrap_or_else(Rational::zero)),
            (Some(pf), Some(pg)) => {
                let vf = self.val_or_prec().unwrap();
                let vg = other.val_or_prec().unwrap();
                Some((pf + &vg).min(pg + &vf))
            }
        };
        if self.terms.is_empty() || other.terms.is_empty() {
            return Series { denom: 1, terms: BTreeMap::new(), prec };
        }
        let fa = d / self.denom;
        let fb = d / other.denom;
        let a: Vec<(i64, &Scalar)> = self.terms.iter().map(|(&e, c)| (e * fa, c)).collect();
        let b: Vec<(i64, &Scalar)> = other.terms.iter().map(|(&e, c)| (e * fb, c)).collect();
        let lo = a[0].0 + b[0].0;
        let hi_exact = a.last().unwrap().0 + b.last().unwrap().0 + 1;
        let hi = match &prec {
            Some(p) => ceil_scaled(p, d).min(hi_exact),
            None => hi_exact,
        };
        if hi <= lo {
            return Series { denom: 1, terms: BTreeMap::new(), prec };
        }
        let mut acc: Vec<Scalar> = vec![Scalar::zero(); (hi - lo) as usize];
        for &(ea, ca) in &a {
            if ea + b[0].0 >= hi {
                break;
            }
            for &(eb, cb) in &b {
                let k = ea + eb;
                if k >= hi {
                    break;
                }
                let prod = ca * cb;
                acc[(k - lo) as usize] += &prod;
            }
        }
        let terms = acc
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as i64 + lo, c))
            .collect();
        Series { denom: d, terms, prec }.normalized()
    }

    /// Dense unit part: for `self = c x^v (u_0 + u_1 y + ...)` with `y = x^(1/D)`
    /// returns `(c, v scaled, [u_0 = 1, u_1, ...], relative length)`.
    fn unit_part(&self) -> Result<(Scalar, i64, Vec<Scalar>)> {
        let prec = self.prec.as_ref().ok_or(SeriesError::Unbounded)?;
        let (&v, c) = self.terms.iter().next().ok_or(SeriesError::DivisionByZero)?;
        let cut = ceil_scaled(prec, self.denom);
        let len = (cut - v) as usize;
        let cinv = c.inv()?;
        let mut u = vec![Scalar::zero(); len];
        for (&e, x) in self.terms.range(v..cut) {
            u[(e - v) as usize] = x * &cinv;
        }
        Ok((c.clone(), v, u))
    }

    /// Multiplicative inverse. The series must be nonzero to its precision
    /// and carry a finite precision.
    pub fn inverse(&self) -> Result<Series> {
        if self.is_exact() && self.terms.len() == 1 {
            let (&e, c) = self.terms.iter().next().unwrap();
            return Ok(Series::monomial(c.inv()?, Rational::new((-e).into(), self.denom.into())));
        }
        let (c, v, u) = self.unit_part()?;
        let n = u.len();
        let mut w = vec![Scalar::zero(); n];
        if n > 0 {
            w[0] = Scalar::one();
        }
        for k in 1..n {
            let mut s = Scalar::zero();
            for i in 1..=k {
                if !u[i].is_zero() && !w[k - i].is_zero() {
                    s += &(&u[i] * &w[k - i]);
                }
            }
            w[k] = -s;
        }
        let cinv = c.inv()?;
        let d = self.denom;
        let prec = Rational::new((n as i64 - v).into(), d.into());
        Ok(Series::from_terms(d, w.into_iter().enumerate().map(|(i, x)| (i as i64 - v, &x * &cinv)), Some(prec)))
    }

    pub fn div(&self, other: &Series) -> Result<Series> {
        if other.is_zero() {
            return Err(SeriesError::DivisionByZero);
        }
        Ok(self * &other.inverse()?)
    }

    /// `x d/dx`.
    pub fn theta(&self) -> Series {
        let d = rat_int(self.denom);
        Series {
            denom: self.denom,
            terms: self
                .terms
                .iter()
                .filter(|(&e, _)| e != 0)
                .map(|(&e, c)| (e, c.scale(&(rat_int(e) / &d))))
                .collect(),
            prec: self.prec.clone(),
        }
        .normalized()
    }

    /// `d/dx`.
    pub fn derivative(&self) -> Series {
        self.theta().shift(&-Rational::one())
    }

    /// Integer power; negative exponents go through [`Series::inverse`].
    pub fn pow(&self, e: i64) -> Result<Series> {
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Series::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// `self^exponent` for rational exponents.
    ///
    /// The leading coefficient must be an exact power in its field; the
    /// exponent denominator grows as needed.
    pub fn pow_rational(&self, exponent: &Rational) -> Result<Series> {
        if exponent.is_integer() {
            return self.pow(exponent.to_integer().to_i64().expect("exponent too large"));
        }
        if self.is_exact() && self.terms.len() == 1 {
            let (&e, c) = self.terms.iter().next().unwrap();
            let lead = rational_power(c, exponent)?;
            let ex = Rational::new(e.into(), self.denom.into()) * exponent;
            return Ok(Series::monomial(lead, ex));
        }
        let (c, v, u) = self.unit_part()?;
        let lead = rational_power(&c, exponent)?;
        let w = unit_power(&u, exponent);
        let n = w.len() as i64;
        // result = lead * x^(v e / D) * w(x^(1/D))
        let shift = Rational::new(v.into(), self.denom.into()) * exponent;
        let d = lcm(self.denom, shift.denom().to_i64().expect("exponent denominator"));
        let f = d / self.denom;
        let s = (&shift * rat_int(d)).to_integer().to_i64().unwrap();
        let prec = &shift + Rational::new(n.into(), self.denom.into());
        Ok(Series::from_terms(d, w.into_iter().enumerate().map(|(i, x)| (i as i64 * f + s, &x * &lead)), Some(prec)))
    }

    /// `g` with `g^n = self` to the available precision.
    pub fn nth_root(&self, n: u32) -> Result<Series> {
        assert!(n > 0, "nth_root: n must be positive");
        self.pow_rational(&Rational::new(BigInt::one(), BigInt::from(n)))
    }

    /// Formal exponential; needs positive valuation.
    pub fn exp(&self) -> Result<Series> {
        if let Some((&e, _)) = self.terms.iter().next() {
            if e <= 0 {
                return Err(SeriesError::Valuation("exp needs positive valuation".into()));
            }
        }
        let prec = self.prec.as_ref().ok_or(SeriesError::Unbounded)?;
        let d = self.denom;
        let n = ceil_scaled(prec, d).max(0) as usize;
        let mut f = vec![Scalar::zero(); n];
        for (&e, c) in self.terms.range(..n as i64) {
            f[e as usize] = c.clone();
        }
        let mut out = vec![Scalar::zero(); n];
        if n > 0 {
            out[0] = Scalar::one();
        }
        for k in 1..n {
            let mut s = Scalar::zero();
            for i in 1..=k {
                if !f[i].is_zero() && !out[k - i].is_zero() {
                    s += &(f[i].scale(&rat_int(i as i64)) * &out[k - i]);
                }
            }
            out[k] = s.scale(&Rational::new(BigInt::one(), BigInt::from(k)));
        }
        Ok(Series::from_terms(d, out.into_iter().enumerate().map(|(i, c)| (i as i64, c)), Some(prec.clone())))
    }

    /// Formal logarithm; needs constant term exactly 1.
    pub fn log(&self) -> Result<Series> {
        if self.terms.keys().next() != Some(&0) || !self.terms[&0].is_one() {
            return Err(SeriesError::Valuation("log needs constant term 1".into()));
        }
        let prec = self.prec.clone().ok_or(SeriesError::Unbounded)?;
        // log f has theta-image theta(f)/f, which has no constant term
        let ratio = self.theta().div(self)?;
        let d = ratio.denom;
        let dd = rat_int(d);
        Ok(Series::from_terms(
            d,
            ratio.terms.into_iter().map(|(e, c)| (e, c.scale(&(&dd / rat_int(e))))),
            Some(prec),
        ))
    }

    /// `self(inner)`.
    ///
    /// Either `inner` is an exact monomial `c x^a` (any exponents allowed in
    /// `self`), or `self` has integer exponents and `inner` has positive
    /// valuation. Exact polynomials accept any `inner`.
    pub fn compose(&self, inner: &Series) -> Result<Series> {
        if inner.is_exact() && inner.terms.len() == 1 {
            return self.compose_monomial(inner);
        }
        let outer = self.clone().normalized();
        // an exact polynomial outer series is a finite sum, so any inner works
        let polynomial = outer.is_exact() && outer.terms.keys().next().map_or(true, |&e| e >= 0);
        if !polynomial {
            let vi = inner
                .val_or_prec()
                .ok_or_else(|| SeriesError::Valuation("inner series is exactly zero".into()))?;
            if !vi.is_positive() {
                return Err(SeriesError::Valuation("inner series needs positive valuation".into()));
            }
        }
        if outer.denom != 1 {
            return Err(SeriesError::Valuation(
                "outer series needs integer exponents unless the inner series is a monomial".into(),
            ));
        }
        let low = outer.terms.keys().next().copied().unwrap_or(0).min(0);
        // outer = x^low * sum_{k>=0} b_k x^k
        let (mut acc, top) = match &outer.prec {
            Some(p) => {
                let top = ceil_scaled(p, 1) - low;
                (Series::big_o(Rational::zero()), top)
            }
            None => (Series::zero(), outer.terms.keys().last().map_or(0, |&e| e - low + 1)),
        };
        for k in (0..top).rev() {
            acc = &acc * inner;
            if let Some(c) = outer.terms.get(&(k + low)) {
                acc = &acc + &Series::constant(c.clone());
            }
        }
        if low < 0 {
            acc = &acc * &inner.pow(low)?;
        }
        Ok(acc)
    }

    fn compose_monomial(&self, inner: &Series) -> Result<Series> {
        let (&ie, c) = inner.terms.iter().next().unwrap();
        let a = Rational::new(ie.into(), inner.denom.into());
        if !a.is_positive() && !self.is_exact() {
            return Err(SeriesError::Valuation("monomial substitution needs a positive exponent".into()));
        }
        let mut terms = Vec::new();
        let mut denom = 1i64;
        for (ex, coeff) in self.exponent_terms() {
            let new_ex = &ex * &a;
            let factor = rational_power(c, &ex)?;
            denom = lcm(denom, new_ex.denom().to_i64().unwrap());
            terms.push((new_ex, coeff * &factor));
        }
        let prec = self.prec.as_ref().map(|p| p * &a);
        if let Some(p) = &prec {
            denom = lcm(denom, p.denom().to_i64().unwrap_or(1));
        }
        let dd = rat_int(denom);
        Ok(Series::from_terms(
            denom,
            terms.into_iter().map(|(e, c)| ((e * &dd).to_integer().to_i64().unwrap(), c)),
            prec,
        ))
    }

    /// Compositional inverse of a series `a_1 x + a_2 x^2 + ...` with `a_1 != 0`
    /// (Lagrange inversion).
    pub fn revert(&self) -> Result<Series> {
        let f = self.clone().normalized();
        if f.denom != 1 || f.terms.keys().next() != Some(&1) {
            return Err(SeriesError::Valuation("revert needs integer exponents and valuation exactly 1".into()));
        }
        let prec = f.prec.clone().ok_or(SeriesError::Unbounded)?;
        let p = ceil_scaled(&prec, 1);
        // h = x / f(x), known to relative precision p - 1
        let h = f.shift(&-Rational::one()).inverse()?;
        let len = (p - 1).max(0) as usize;
        let hv: Vec<Scalar> = (0..len).map(|k| h.coeff_at(k as i64).unwrap()).collect();
        let mut power = vec![Scalar::one()];
        power.resize(len, Scalar::zero());
        let mut out = Vec::with_capacity(len + 1);
        out.push(Scalar::zero());
        for n in 1..p {
            power = mul_dense(&power, &hv, len);
            let c = power[(n - 1) as usize].scale(&Rational::new(BigInt::one(), BigInt::from(n)));
            out.push(c);
        }
        Ok(Series::from_coeffs(out, Some(p)))
    }

    /// Series JSON form `{"denom": D, "prec": "p/q", "terms": [[e, "coeff"], ...]}`.
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            denom: self.denom,
            prec: self.prec.as_ref().map(rational_to_string),
            terms: self.terms.iter().map(|(&e, c)| (e, c.to_string())).collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Series> {
        if j.denom <= 0 {
            return Err(SeriesError::Json("denom must be positive".into()));
        }
        let prec = match &j.prec {
            Some(p) => Some(parse_rational(p)?),
            None => None,
        };
        let cut = prec.as_ref().map(|p| ceil_scaled(p, j.denom));
        let mut terms = BTreeMap::new();
        for (e, c) in &j.terms {
            let c: Scalar = c.parse()?;
            if c.is_zero() {
                return Err(SeriesError::Json(format!("zero coefficient stored at {e}")));
            }
            if cut.is_some_and(|cut| *e >= cut) {
                return Err(SeriesError::Json(format!("term {e} at or beyond precision")));
            }
            if terms.insert(*e, c).is_some() {
                return Err(SeriesError::Json(format!("duplicate exponent {e}")));
            }
        }
        Ok(Series { denom: j.denom, terms, prec })
    }

    /// Structural identity: same denominator, terms and precision.
    pub fn identical(&self, other: &Series) -> bool {
        self.denom == other.denom && self.terms == other.terms && self.prec == other.prec
    }

    /// True when every coefficient is integral.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(Scalar::is_integral)
    }
}

fn mul_dense(a: &[Scalar], b: &[Scalar], len: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += &(x * y);
            }
        }
    }
    out
}

/// `u^e` for a dense unit series `u` (`u[0] = 1`), via the power recurrence
/// `n w_n = sum_{i=1}^{n} ((e + 1) i - n) u_i w_{n-i}`.
fn unit_power(u: &[Scalar], e: &Rational) -> Vec<Scalar> {
    let n = u.len();
    let mut w = vec![Scalar::zero(); n];
    if n == 0 {
        return w;
    }
    w[0] = Scalar::one();
    let e1 = e + Rational::one();
    for k in 1..n {
        let mut s = Scalar::zero();
        for i in 1..=k {
            if u[i].is_zero() || w[k - i].is_zero() {
                continue;
            }
            let factor = &e1 * rat_int(i as i64) - rat_int(k as i64);
            if factor.is_zero() {
                continue;
            }
            s += &(&u[i] * &w[k - i]).scale(&factor);
        }
        w[k] = s.scale(&Rational::new(BigInt::one(), BigInt::from(k)));
    }
    w
}

/// `c^(p/q)` inside the field of `c`.
fn rational_power(c: &Scalar, e: &Rational) -> Result<Scalar> {
    if c.is_one() {
        return Ok(Scalar::one());
    }
    let p = e.numer().to_i64().expect("exponent numerator too large");
    let q = e.denom().to_u32().expect("exponent denominator too large");
    Ok(c.pow(p)?.nth_root(q)?)
}

impl PartialEq for Series {
    /// Agreement on every exponent below the smaller precision.
    fn eq(&self, other: &Series) -> bool {
        (self - other).is_zero()
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.map_coeffs(|c| -c)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

macro_rules! series_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Series> for &Series {
            type Output = Series;
            fn $method(self, rhs: &Series) -> Series {
                let f: fn(&Series, &Series) -> Series = $body;
                f(self, rhs)
            }
        }
        impl $tr<Series> for Series {
            type Output = Series;
            fn $method(self, rhs: Series) -> Series {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Series> for Series {
            type Output = Series;
            fn $method(self, rhs: &Series) -> Series {
                (&self).$method(rhs)
            }
        }
        impl $tr<Series> for &Series {
            type Output = Series;
            fn $method(self, rhs: Series) -> Series {
                self.$method(&rhs)
            }
        }
    };
}

series_binop!(Add, add, |a, b| a.checked_add(b, false));
series_binop!(Sub, sub, |a, b| a.checked_add(b, true));
series_binop!(Mul, mul, |a, b| a.product(b));

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (ex, c) in self.exponent_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if ex.is_zero() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*x^{}", rational_to_string(&ex))?;
            }
        }
        match &self.prec {
            Some(p) => {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "O(x^{})", rational_to_string(p))
            }
            None if first => write!(f, "0"),
            None => Ok(()),
        }
    }
}

/// Serialized form of a [`Series`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub denom: i64,
    pub prec: Option<String>,
    pub terms: Vec<(i64, String)>,
}
