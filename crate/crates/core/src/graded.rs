//! Weighted polynomial algebras and their derivations.
//!
//! Generators are free (no relations). Weights are rational vectors of a
//! fixed rank; rank 1 is the singly graded case used by RRC systems.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::brackets::{rc_bracket, PolyAlgebra, Weighted};
use crate::coeff::{parse_rational, rat_int, rational_to_string, CoeffError, Rational, Scalar};
use crate::expr::{Expr, ExprContext, ExprError};
use crate::series::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradedError {
    #[error("polynomials live over different generator sets")]
    SpecMismatch,
    #[error("generator `{generator}`: shape violation at term {term}")]
    ShapeViolation { generator: String, term: String },
    #[error("weight error: {0}")]
    Weight(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("exact division failed: {0}")]
    NotDivisible(String),
    #[error("system file line {line}: {msg}")]
    SystemFile { line: usize, msg: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub type Result<T> = std::result::Result<T, GradedError>;

/// Named generators with weight vectors of a common rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedAlgebraSpec {
    names: Vec<String>,
    weights: Vec<Vec<Rational>>,
}

impl GradedAlgebraSpec {
    pub fn new(generators: Vec<(String, Vec<Rational>)>) -> Result<Arc<Self>> {
        let rank = generators.first().map_or(1, |g| g.1.len());
        if rank == 0 {
            return Err(GradedError::Weight("weight rank must be at least 1".into()));
        }
        let mut names = Vec::new();
        let mut weights = Vec::new();
        for (name, w) in generators {
            if names.contains(&name) {
                return Err(GradedError::DuplicateName(name));
            }
            if w.len() != rank {
                return Err(GradedError::Weight(format!("generator `{name}` has weight rank {} not {rank}", w.len())));
            }
            names.push(name);
            weights.push(w);
        }
        Ok(Arc::new(GradedAlgebraSpec { names, weights }))
    }

    /// Singly graded spec from `(name, weight)` pairs.
    pub fn rank1(generators: &[(&str, Rational)]) -> Result<Arc<Self>> {
        Self::new(generators.iter().map(|(n, w)| (n.to_string(), vec![w.clone()])).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.weights.first().map_or(1, Vec::len)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn weight(&self, i: usize) -> &[Rational] {
        &self.weights[i]
    }

    /// First weight component; the weight for rank-1 specs.
    pub fn weight1(&self, i: usize) -> &Rational {
        &self.weights[i][0]
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| GradedError::UnknownGenerator(name.to_string()))
    }

    fn monomial_weight(&self, exps: &[u32]) -> Vec<Rational> {
        let mut w = vec![Rational::zero(); self.rank()];
        for (i, &e) in exps.iter().enumerate() {
            if e > 0 {
                for (acc, wi) in w.iter_mut().zip(&self.weights[i]) {
                    *acc += wi * rat_int(e as i64);
                }
            }
        }
        w
    }

    fn format_monomial(&self, exps: &[u32]) -> String {
        let parts: Vec<String> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { self.names[i].clone() } else { format!("{}^{e}", self.names[i]) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

fn same_spec(a: &Arc<GradedAlgebraSpec>, b: &Arc<GradedAlgebraSpec>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Sparse polynomial over a [`GradedAlgebraSpec`].
#[derive(Clone)]
pub struct GradedPoly {
    spec: Arc<GradedAlgebraSpec>,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl PartialEq for GradedPoly {
    fn eq(&self, other: &Self) -> bool {
        same_spec(&self.spec, &other.spec) && self.terms == other.terms
    }
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedPoly({self})")
    }
}

impl GradedPoly {
    pub fn zero(spec: &Arc<GradedAlgebraSpec>) -> Self {
        GradedPoly { spec: spec.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(spec: &Arc<GradedAlgebraSpec>, c: Scalar) -> Self {
        Self::monomial(spec, vec![0; spec.len()], c)
    }

    pub fn one(spec: &Arc<GradedAlgebraSpec>) -> Self {
        Self::constant(spec, Scalar::one())
    }

    pub fn gen(spec: &Arc<GradedAlgebraSpec>, i: usize) -> Self {
        let mut e = vec![0; spec.len()];
        e[i] = 1;
        Self::monomial(spec, e, Scalar::one())
    }

    pub fn named(spec: &Arc<GradedAlgebraSpec>, name: &str) -> Result<Self> {
        Ok(Self::gen(spec, spec.index(name)?))
    }

    pub fn monomial(spec: &Arc<GradedAlgebraSpec>, exps: Vec<u32>, c: Scalar) -> Self {
        assert_eq!(exps.len(), spec.len(), "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        GradedPoly { spec: spec.clone(), terms }
    }

    /// Parses a polynomial in the generator names of `spec`.
    pub fn parse(spec: &Arc<GradedAlgebraSpec>, src: &str) -> Result<Self> {
        Expr::parse(src)?.eval(&PolyContext { spec: spec.clone() })
    }

    pub fn spec(&self) -> &Arc<GradedAlgebraSpec> {
        &self.spec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Scalar)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> Scalar {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(&self.spec);
        }
        GradedPoly { spec: self.spec.clone(), terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&Scalar::Rat(r.clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.spec);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Largest exponent of generator `i` over all terms.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn is_free_of(&self, i: usize) -> bool {
        self.degree_in(i) == 0
    }

    /// Weight of the monomial with exponent vector `exps`.
    pub fn monomial_weight(&self, exps: &[u32]) -> Vec<Rational> {
        self.spec.monomial_weight(exps)
    }

    /// Common weight of all terms; `None` for zero or inhomogeneous input.
    pub fn homogeneous_weight(&self) -> Option<Vec<Rational>> {
        let mut it = self.terms.keys();
        let w = self.spec.monomial_weight(it.next()?);
        it.all(|e| self.spec.monomial_weight(e) == w).then_some(w)
    }

    /// First term whose weight differs from `w`, rendered as text.
    pub fn off_weight_term(&self, w: &[Rational]) -> Option<String> {
        self.terms
            .iter()
            .find(|(e, _)| self.spec.monomial_weight(e) != w)
            .map(|(e, c)| format!("{c}*{}", self.spec.format_monomial(e)))
    }

    /// True for zero or for a polynomial homogeneous of weight `w`.
    pub fn is_homogeneous_of(&self, w: &[Rational]) -> bool {
        self.off_weight_term(w).is_none()
    }

    /// Partial derivative with respect to generator `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                terms.insert(f, c.scale(&rat_int(e[i] as i64)));
            }
        }
        GradedPoly { spec: self.spec.clone(), terms }
    }

    /// Splits off the terms containing generator `i`: returns `(with, without)`.
    pub fn split_on(&self, i: usize) -> (Self, Self) {
        let (with, without): (BTreeMap<_, _>, BTreeMap<_, _>) =
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).partition(|(e, _)| e[i] > 0);
        (GradedPoly { spec: self.spec.clone(), terms: with }, GradedPoly { spec: self.spec.clone(), terms: without })
    }

    /// Moves the polynomial to `target` by renaming generators; generators
    /// that do not occur in `target` must have exponent zero.
    pub fn transport(&self, target: &Arc<GradedAlgebraSpec>) -> Result<Self> {
        let map: Vec<Option<usize>> = self.spec.names.iter().map(|n| target.index(n).ok()).collect();
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut f = vec![0; target.len()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| GradedError::UnknownGenerator(self.spec.names[i].clone()))?;
                f[j] = k;
            }
            terms.insert(f, c.clone());
        }
        Ok(GradedPoly { spec: target.clone(), terms })
    }

    /// Exact quotient `self / divisor`; fails when the division leaves a remainder.
    pub fn exact_div(&self, divisor: &GradedPoly) -> Result<Self> {
        if !same_spec(&self.spec, &divisor.spec) {
            return Err(GradedError::SpecMismatch);
        }
        let (lead_e, lead_c) = divisor
            .terms
            .iter()
            .next_back()
            .ok_or_else(|| GradedError::NotDivisible("division by zero polynomial".into()))?;
        let lead_inv = lead_c.inv()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.spec);
        while let Some((e, c)) = rem.terms.iter().next_back() {
            if e.iter().zip(lead_e).any(|(a, b)| a < b) {
                return Err(GradedError::NotDivisible(format!("{self} by {divisor}")));
            }
            let qe: Vec<u32> = e.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            let t = Self::monomial(&self.spec, qe, c * &lead_inv);
            rem = &rem - &(&t * divisor);
            quot = &quot + &t;
        }
        Ok(quot)
    }

    /// Evaluates at series values, one per generator.
    pub fn eval_series(&self, values: &[Series]) -> Result<Series> {
        assert_eq!(values.len(), self.spec.len(), "one value per generator");
        let mut cache: BTreeMap<(usize, u32), Series> = BTreeMap::new();
        let mut acc = Series::zero();
        for (e, c) in &self.terms {
            let mut t = Series::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let p = match cache.get(&(i, k)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = values[i].pow(k as i64)?;
                        cache.insert((i, k), p.clone());
                        p
                    }
                };
                t = &t * &p;
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    fn combine(&self, other: &GradedPoly, negate: bool) -> GradedPoly {
        assert!(same_spec(&self.spec, &other.spec), "polynomials over different specs");
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_default();
            if negate {
                *entry -= c;
            } else {
                *entry += c;
            }
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        GradedPoly { spec: self.spec.clone(), terms }
    }

    fn product(&self, other: &GradedPoly) -> GradedPoly {
        assert!(same_spec(&self.spec, &other.spec), "polynomials over different specs");
        let mut terms: BTreeMap<Vec<u32>, Scalar> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_default() += &(ca * cb);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        GradedPoly { spec: self.spec.clone(), terms }
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let m = self.spec.format_monomial(e);
            if m == "1" {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}

impl Neg for &GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        self.scale(&-Scalar::one())
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&GradedPoly> for &GradedPoly {
            type Output = GradedPoly;
            fn $method(self, rhs: &GradedPoly) -> GradedPoly {
                let f: fn(&GradedPoly, &GradedPoly) -> GradedPoly = $body;
                f(self, rhs)
            }
        }
        impl $tr<GradedPoly> for GradedPoly {
            type Output = GradedPoly;
            fn $method(self, rhs: GradedPoly) -> GradedPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, |a, b| a.combine(b, false));
poly_binop!(Sub, sub, |a, b| a.combine(b, true));
poly_binop!(Mul, mul, |a, b| a.product(b));

struct PolyContext {
    spec: Arc<GradedAlgebraSpec>,
}

impl ExprContext for PolyContext {
    type Value = GradedPoly;
    type Error = GradedError;

    fn constant(&self, c: Scalar) -> Result<GradedPoly> {
        Ok(GradedPoly::constant(&self.spec, c))
    }
    fn variable(&self, name: &str) -> Result<GradedPoly> {
        GradedPoly::named(&self.spec, name)
    }
    fn add(&self, a: &GradedPoly, b: &GradedPoly) -> Result<GradedPoly> {
        Ok(a + b)
    }
    fn sub(&self, a: &GradedPoly, b: &GradedPoly) -> Result<GradedPoly> {
        Ok(a - b)
    }
    fn mul(&self, a: &GradedPoly, b: &GradedPoly) -> Result<GradedPoly> {
        Ok(a * b)
    }
    fn pow(&self, a: &GradedPoly, e: i64) -> Result<GradedPoly> {
        let e = u32::try_from(e).map_err(|_| GradedError::Weight("negative powers are not polynomial".into()))?;
        Ok(a.pow(e))
    }
    fn scale(&self, a: &GradedPoly, c: &Scalar) -> Result<GradedPoly> {
        Ok(a.scale(c))
    }
}

/// A derivation given by its generator images.
#[derive(Clone, PartialEq)]
pub struct Derivation {
    spec: Arc<GradedAlgebraSpec>,
    images: Vec<GradedPoly>,
    shift: Vec<Rational>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Derivation {{ ")?;
        for (i, img) in self.images.iter().enumerate() {
            write!(f, "{} -> {img}; ", self.spec.names[i])?;
        }
        write!(f, "}}")
    }
}

impl Derivation {
    /// Builds a derivation and checks each image has weight `weight_i + shift`.
    pub fn new(spec: &Arc<GradedAlgebraSpec>, images: Vec<GradedPoly>, shift: Vec<Rational>) -> Result<Self> {
        let d = Self::new_unchecked(spec, images, shift)?;
        for (i, img) in d.images.iter().enumerate() {
            let target: Vec<Rational> = spec.weights[i].iter().zip(&d.shift).map(|(a, b)| a + b).collect();
            if let Some(term) = img.off_weight_term(&target) {
                return Err(GradedError::ShapeViolation { generator: spec.names[i].clone(), term });
            }
        }
        Ok(d)
    }

    /// Builds a derivation without the weight check.
    pub fn new_unchecked(spec: &Arc<GradedAlgebraSpec>, images: Vec<GradedPoly>, shift: Vec<Rational>) -> Result<Self> {
        if images.len() != spec.len() || images.iter().any(|p| !same_spec(&p.spec, spec)) {
            return Err(GradedError::SpecMismatch);
        }
        if shift.len() != spec.rank() {
            return Err(GradedError::Weight("shift rank differs from spec rank".into()));
        }
        Ok(Derivation { spec: spec.clone(), images, shift })
    }

    /// Rank-1 derivation from image expressions.
    pub fn parse(spec: &Arc<GradedAlgebraSpec>, images: &[&str], shift: Rational) -> Result<Self> {
        let polys = images.iter().map(|s| GradedPoly::parse(spec, s)).collect::<Result<Vec<_>>>()?;
        Self::new(spec, polys, vec![shift])
    }

    pub fn zero(spec: &Arc<GradedAlgebraSpec>, shift: Vec<Rational>) -> Self {
        Derivation { spec: spec.clone(), images: vec![GradedPoly::zero(spec); spec.len()], shift }
    }

    pub fn spec(&self) -> &Arc<GradedAlgebraSpec> {
        &self.spec
    }

    pub fn images(&self) -> &[GradedPoly] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &GradedPoly {
        &self.images[i]
    }

    pub fn shift(&self) -> &[Rational] {
        &self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(GradedPoly::is_zero)
    }

    /// Leibniz extension of the generator images.
    pub fn apply(&self, f: &GradedPoly) -> Result<GradedPoly> {
        if !same_spec(&self.spec, &f.spec) {
            return Err(GradedError::SpecMismatch);
        }
        let mut acc = GradedPoly::zero(&self.spec);
        for i in 0..self.spec.len() {
            if self.images[i].is_zero() || f.is_free_of(i) {
                continue;
            }
            acc = &acc + &(&f.partial(i) * &self.images[i]);
        }
        Ok(acc)
    }

    /// `D^r f`.
    pub fn apply_n(&self, f: &GradedPoly, r: usize) -> Result<GradedPoly> {
        let mut g = f.clone();
        for _ in 0..r {
            g = self.apply(&g)?;
        }
        Ok(g)
    }

    /// `[self, other] = self∘other − other∘self`, images `self(other_i) − other(self_i)`.
    pub fn lie_bracket(&self, other: &Derivation) -> Result<Derivation> {
        if !same_spec(&self.spec, &other.spec) {
            return Err(GradedError::SpecMismatch);
        }
        let images = (0..self.spec.len())
            .map(|i| Ok(&self.apply(&other.images[i])? - &other.apply(&self.images[i])?))
            .collect::<Result<Vec<_>>>()?;
        let shift = self.shift.iter().zip(&other.shift).map(|(a, b)| a + b).collect();
        Ok(Derivation { spec: self.spec.clone(), images, shift })
    }

    pub fn scale(&self, c: &Scalar) -> Derivation {
        Derivation { spec: self.spec.clone(), images: self.images.iter().map(|p| p.scale(c)).collect(), shift: self.shift.clone() }
    }

    pub fn sub(&self, other: &Derivation) -> Result<Derivation> {
        if !same_spec(&self.spec, &other.spec) {
            return Err(GradedError::SpecMismatch);
        }
        Ok(Derivation {
            spec: self.spec.clone(),
            images: self.images.iter().zip(&other.images).map(|(a, b)| a - b).collect(),
            shift: self.shift.clone(),
        })
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        self.sub(&other.scale(&-Scalar::one()))
    }

    /// Renders in the system text format `name : weight = image`.
    pub fn to_system_text(&self) -> String {
        let mut out = String::new();
        for (i, img) in self.images.iter().enumerate() {
            let w: Vec<String> = self.spec.weights[i].iter().map(rational_to_string).collect();
            let w = if w.len() == 1 { w[0].clone() } else { format!("({})", w.join(",")) };
            out.push_str(&format!("{} : {} = {}\n", self.spec.names[i], w, img));
        }
        out
    }
}

/// Parses a system file: one line `name : weight = expression` per generator.
/// Weights are rationals or parenthesized vectors `(a,b)`. Blank lines and
/// lines starting with `#` are ignored. The shift is the weight of the first
/// image minus the weight of its generator.
pub fn parse_system(text: &str) -> Result<Derivation> {
    let mut gens = Vec::new();
    let mut exprs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| GradedError::SystemFile { line: lineno + 1, msg: msg.to_string() };
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| err("expected `=`"))?;
        let (name, weight) = lhs.split_once(':').ok_or_else(|| err("expected `name : weight`"))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(err("bad generator name"));
        }
        let weight = weight.trim();
        let parts: Vec<&str> = match weight.strip_prefix('(').and_then(|w| w.strip_suffix(')')) {
            Some(inner) => inner.split(',').collect(),
            None => vec![weight],
        };
        let w = parts
            .iter()
            .map(|p| parse_rational(p.trim()).map_err(|e| err(&e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        gens.push((name.to_string(), w));
        exprs.push((lineno + 1, rhs.trim().to_string()));
    }
    if gens.is_empty() {
        return Err(GradedError::SystemFile { line: 0, msg: "no generators".into() });
    }
    let spec = GradedAlgebraSpec::new(gens)?;
    let mut images = Vec::new();
    for (line, src) in &exprs {
        let p = GradedPoly::parse(&spec, src).map_err(|e| GradedError::SystemFile { line: *line, msg: e.to_string() })?;
        images.push(p);
    }
    let shift = images
        .iter()
        .enumerate()
        .find_map(|(i, p)| p.homogeneous_weight().map(|w| w.iter().zip(spec.weight(i)).map(|(a, b)| a - b).collect()))
        .unwrap_or_else(|| vec![Rational::zero(); spec.rank()]);
    Derivation::new(&spec, images, shift)
}

/// `W = sum w_j t_j d/dt_j` on a rank-1 spec.
pub fn weight_operator(spec: &Arc<GradedAlgebraSpec>) -> Result<Derivation> {
    if spec.rank() != 1 {
        return Err(GradedError::Weight("weight operator needs a rank-1 spec".into()));
    }
    let images = (0..spec.len()).map(|i| GradedPoly::gen(spec, i).scale_rational(spec.weight1(i))).collect();
    Ok(Derivation { spec: spec.clone(), images, shift: vec![Rational::zero()] })
}

/// `δ = −d/dt₁` for the weight-2 generator `t1`.
pub fn lowering_operator(spec: &Arc<GradedAlgebraSpec>, t1: usize) -> Result<Derivation> {
    if spec.rank() != 1 || *spec.weight1(t1) != rat_int(2) {
        return Err(GradedError::Weight("lowering operator needs a designated generator of weight 2".into()));
    }
    let mut images = vec![GradedPoly::zero(spec); spec.len()];
    images[t1] = GradedPoly::constant(spec, -Scalar::one());
    Ok(Derivation { spec: spec.clone(), images, shift: vec![rat_int(-2)] })
}

/// Residuals of the three sl₂ relations; all zero on success.
#[derive(Debug, Clone)]
pub struct Sl2Report {
    /// `[D, δ] − W`
    pub d_delta: Derivation,
    /// `[W, D] − 2D`
    pub w_d: Derivation,
    /// `[W, δ] + 2δ`
    pub w_delta: Derivation,
}

impl Sl2Report {
    pub fn ok(&self) -> bool {
        self.d_delta.is_zero() && self.w_d.is_zero() && self.w_delta.is_zero()
    }

    pub fn residuals(&self) -> [(&'static str, &Derivation); 3] {
        [("[D,delta]-W", &self.d_delta), ("[W,D]-2D", &self.w_d), ("[W,delta]+2delta", &self.w_delta)]
    }
}

pub fn sl2_check(d: &Derivation, w: &Derivation, delta: &Derivation) -> Result<Sl2Report> {
    let two = Scalar::from(2);
    Ok(Sl2Report {
        d_delta: d.lie_bracket(delta)?.sub(w)?,
        w_d: w.lie_bracket(d)?.sub(&d.scale(&two))?,
        w_delta: w.lie_bracket(delta)?.add(&delta.scale(&two))?,
    })
}

/// A derivation of RRC shape: `D t₁ = t₁² + p₁`, `D t_j = w_j t₁ t_j + p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RrcSystem {
    derivation: Derivation,
    t1: usize,
    p: Vec<GradedPoly>,
}

impl RrcSystem {
    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn spec(&self) -> &Arc<GradedAlgebraSpec> {
        &self.derivation.spec
    }

    pub fn t1(&self) -> usize {
        self.t1
    }

    /// The t₁-free parts `p_j`, indexed like the generators.
    pub fn p(&self, j: usize) -> &GradedPoly {
        &self.p[j]
    }

    pub fn sl2_check(&self) -> Result<Sl2Report> {
        let spec = self.spec();
        sl2_check(&self.derivation, &weight_operator(spec)?, &lowering_operator(spec, self.t1)?)
    }
}

/// Validates the RRC shape of `d` with `t1` the weight-2 generator.
pub fn rrc_shape_check(d: &Derivation, t1: usize) -> Result<RrcSystem> {
    let spec = d.spec.clone();
    if spec.rank() != 1 {
        return Err(GradedError::Weight("RRC shape needs a rank-1 spec".into()));
    }
    if *spec.weight1(t1) != rat_int(2) {
        return Err(GradedError::Weight(format!("generator `{}` must have weight 2", spec.name(t1))));
    }
    if d.shift != [rat_int(2)] {
        return Err(GradedError::Weight("RRC derivation must raise weights by 2".into()));
    }
    let violation = |j: usize, term: String| GradedError::ShapeViolation { generator: spec.name(j).to_string(), term };
    let t1p = GradedPoly::gen(&spec, t1);
    let mut p = Vec::with_capacity(spec.len());
    for j in 0..spec.len() {
        let gj = GradedPoly::gen(&spec, j);
        let lead = if j == t1 { &t1p * &t1p } else { (&t1p * &gj).scale_rational(spec.weight1(j)) };
        let rest = &d.images[j] - &lead;
        let (with_t1, pj) = rest.split_on(t1);
        if let Some((e, c)) = with_t1.terms.iter().next() {
            return Err(violation(j, format!("{c}*{}", spec.format_monomial(e))));
        }
        let target = vec![spec.weight1(j) + rat_int(2)];
        if let Some(term) = pj.off_weight_term(&target) {
            return Err(violation(j, term));
        }
        p.push(pj);
    }
    Ok(RrcSystem { derivation: d.clone(), t1, p })
}

/// Spec without generator `t1`.
fn drop_generator(spec: &GradedAlgebraSpec, t1: usize) -> Result<Arc<GradedAlgebraSpec>> {
    GradedAlgebraSpec::new(
        spec.names.iter().zip(&spec.weights).enumerate().filter(|(i, _)| *i != t1).map(|(_, (n, w))| (n.clone(), w.clone())).collect(),
    )
}

/// The Ramanujan–Serre derivation `∂t_j = p_j` on the t₁-free subalgebra and `Φ = p₁`.
pub fn canonical_from_rrc(sys: &RrcSystem) -> Result<(Derivation, GradedPoly)> {
    let m = drop_generator(sys.spec(), sys.t1)?;
    let images = (0..sys.spec().len())
        .filter(|&j| j != sys.t1)
        .map(|j| sys.p[j].transport(&m))
        .collect::<Result<Vec<_>>>()?;
    let phi = sys.p[sys.t1].transport(&m)?;
    Ok((Derivation::new(&m, images, vec![rat_int(2)])?, phi))
}

/// Adjoins `t1_name` of weight 2 in front and builds the standard RRC system
/// `D t₁ = t₁² + Φ`, `D t_j = w_j t₁ t_j + ∂t_j`.
pub fn extend_algebra(partial: &Derivation, phi: &GradedPoly, t1_name: &str) -> Result<RrcSystem> {
    let m = partial.spec();
    if m.rank() != 1 || partial.shift != [rat_int(2)] {
        return Err(GradedError::Weight("∂ must be a rank-1 derivation raising weights by 2".into()));
    }
    if let Some(term) = phi.off_weight_term(&[rat_int(4)]) {
        return Err(GradedError::Weight(format!("Φ must have weight 4; offending term {term}")));
    }
    let mut gens = vec![(t1_name.to_string(), vec![rat_int(2)])];
    gens.extend(m.names.iter().cloned().zip(m.weights.iter().cloned()));
    let spec = GradedAlgebraSpec::new(gens)?;
    let t1 = GradedPoly::gen(&spec, 0);
    let mut images = vec![&(&t1 * &t1) + &phi.transport(&spec)?];
    for j in 0..m.len() {
        let gj = GradedPoly::gen(&spec, j + 1);
        images.push(&(&t1 * &gj).scale_rational(m.weight1(j)) + &partial.images[j].transport(&spec)?);
    }
    rrc_shape_check(&Derivation::new(&spec, images, vec![rat_int(2)])?, 0)
}

/// Outcome of reading an RRC system through a special element `F`.
#[derive(Debug, Clone)]
pub enum SpecialElementReport {
    /// `F` divides the needed brackets: each flag says whether
    /// `p_j = [F,t_j]₁/(wF)` (and `p₁ = [F,F]₂/(w²(w+1)F²)` at `t1`).
    Divisible { matches: Vec<(String, bool)>, partial_f_vanishes: bool },
    /// Some bracket is not divisible by `F`; the system rewritten over the
    /// extra generator `1/F`.
    Extended { system: Derivation, partial_f_vanishes: bool },
}

impl SpecialElementReport {
    pub fn ok(&self) -> bool {
        match self {
            SpecialElementReport::Divisible { matches, partial_f_vanishes } => {
                *partial_f_vanishes && matches.iter().all(|(_, ok)| *ok)
            }
            SpecialElementReport::Extended { partial_f_vanishes, .. } => *partial_f_vanishes,
        }
    }
}

/// Computes the brackets of `F` with the generators (using `D` itself as the
/// bracket derivation) and compares them with the system's `p_j`.
///
/// `∂F = D F − w t₁ F` must vanish for the reading to be consistent; the
/// flag is reported, not enforced.
pub fn special_element_form(sys: &RrcSystem, f: &GradedPoly, allow_extension: bool) -> Result<SpecialElementReport> {
    let spec = sys.spec().clone();
    let w = f
        .homogeneous_weight()
        .ok_or_else(|| GradedError::Weight("F must be homogeneous and nonzero".into()))?[0]
        .clone();
    if w.is_zero() {
        return Err(GradedError::Weight("F must have nonzero weight".into()));
    }
    let t1 = GradedPoly::gen(&spec, sys.t1);
    let alg = PolyAlgebra::new(sys.derivation.clone());
    let fw = Weighted::new(f.clone(), w.clone());
    let df = sys.derivation.apply(f)?;
    let partial_f_vanishes = (&df - &(&t1 * f).scale_rational(&w)).is_zero();

    let ws = Scalar::Rat(w.clone());
    let ff2 = rc_bracket(&alg, &fw, &fw, 2)?.value;
    let ff_coeff = Scalar::Rat(&w * &w * (&w + Rational::one())).inv()?;
    let mut first = Vec::new();
    for j in 0..spec.len() {
        if j == sys.t1 {
            continue;
        }
        let tj = Weighted::new(GradedPoly::gen(&spec, j), spec.weight1(j).clone());
        first.push((j, rc_bracket(&alg, &fw, &tj, 1)?.value));
    }

    let f2 = f * f;
    let divided: Result<Vec<(usize, GradedPoly)>> = first
        .iter()
        .map(|(j, b)| Ok((*j, b.exact_div(f)?.scale(&ws.inv()?))))
        .collect();
    let phi = ff2.exact_div(&f2).map(|q| q.scale(&ff_coeff));
    match (divided, phi) {
        (Ok(divided), Ok(phi)) => {
            let mut matches = vec![(spec.name(sys.t1).to_string(), phi == sys.p[sys.t1])];
            for (j, q) in divided {
                matches.push((spec.name(j).to_string(), q == sys.p[j]));
            }
            Ok(SpecialElementReport::Divisible { matches, partial_f_vanishes })
        }
        (Err(e), _) | (_, Err(e)) if !allow_extension => Err(e),
        _ => {
            // adjoin u = 1/F of weight −w
            let mut gens: Vec<(String, Vec<Rational>)> =
                spec.names.iter().cloned().zip(spec.weights.iter().cloned()).collect();
            let mut uname = "u".to_string();
            while spec.index(&uname).is_ok() {
                uname.push('_');
            }
            gens.push((uname, vec![-w.clone()]));
            let ext = GradedAlgebraSpec::new(gens)?;
            let u = GradedPoly::gen(&ext, spec.len());
            let t1e = GradedPoly::gen(&ext, sys.t1);
            let mut images = vec![GradedPoly::zero(&ext); ext.len()];
            images[sys.t1] = &(&t1e * &t1e) + &(&ff2.transport(&ext)? * &(&u * &u)).scale(&ff_coeff);
            for (j, b) in &first {
                let gj = GradedPoly::gen(&ext, *j);
                images[*j] = &(&t1e * &gj).scale_rational(spec.weight1(*j)) + &(&b.transport(&ext)? * &u).scale(&ws.inv()?);
            }
            images[spec.len()] = (&t1e * &u).scale(&-ws.clone());
            Ok(SpecialElementReport::Extended {
                system: Derivation::new(&ext, images, vec![rat_int(2)])?,
                partial_f_vanishes,
            })
        }
    }
}

/// Outcome of the bi-graded Serre-shape check for one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BigradedLine {
    pub generator: String,
    pub ok: bool,
    /// Offending term when `ok` is false.
    pub violation: Option<String>,
}

/// Checks that every image has the form `(k P₁ + l φ' P₂) f + p_f` with
/// `p_f` free of `P₁, P₂` and bi-homogeneous of weight `(k+2, l)`, where
/// `(k, l)` is the weight of `f`. For `P₁` and `P₂` themselves the expected
/// leading parts are `P₁²` and `φ' P₂²`.
pub fn bigraded_serre_check(d: &Derivation, p1: usize, p2: usize, phi_prime: &GradedPoly) -> Result<Vec<BigradedLine>> {
    let spec = d.spec();
    if spec.rank() != 2 {
        return Err(GradedError::Weight("bi-graded check needs a rank-2 spec".into()));
    }
    if !same_spec(spec, &phi_prime.spec) {
        return Err(GradedError::SpecMismatch);
    }
    let gp1 = GradedPoly::gen(spec, p1);
    let gp2 = GradedPoly::gen(spec, p2);
    let mut out = Vec::new();
    for j in 0..spec.len() {
        let w = spec.weight(j);
        let f = GradedPoly::gen(spec, j);
        let lead = if j == p1 {
            &gp1 * &gp1
        } else if j == p2 {
            &(phi_prime * &gp2) * &gp2
        } else {
            &(&gp1.scale_rational(&w[0]) + &(phi_prime * &gp2).scale_rational(&w[1])) * &f
        };
        let rest = &d.images[j] - &lead;
        let target = vec![&w[0] + rat_int(2), w[1].clone()];
        let violation = rest
            .terms
            .iter()
            .find(|(e, _)| e[p1] > 0 || e[p2] > 0)
            .map(|(e, c)| format!("{c}*{}", spec.format_monomial(e)))
            .or_else(|| rest.off_weight_term(&target));
        out.push(BigradedLine { generator: spec.name(j).to_string(), ok: violation.is_none(), violation });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;
    use proptest::prelude::*;

    pub(crate) fn classical() -> Derivation {
        let spec = GradedAlgebraSpec::rank1(&[("P", rat_int(2)), ("Q", rat_int(4)), ("R", rat_int(6))]).unwrap();
        Derivation::parse(&spec, &["P^2 - Q/144", "4*P*Q - R/3", "6*P*R - Q^2/2"], rat_int(2)).unwrap()
    }

    fn s33() -> Derivation {
        let spec = GradedAlgebraSpec::rank1(&[("P", rat_int(2)), ("Q", rat_int(2)), ("R", rat_int(2))]).unwrap();
        Derivation::parse(&spec, &["P^2 - Q*R/36", "2*P*Q - R^2/3", "2*P*R - Q^2/3"], rat_int(2)).unwrap()
    }

    #[test]
    fn apply_on_generators_and_constants() {
        let d = classical();
        let spec = d.spec().clone();
        let q = GradedPoly::named(&spec, "Q").unwrap();
        assert_eq!(d.apply(&q).unwrap(), GradedPoly::parse(&spec, "4*P*Q - R/3").unwrap());
        assert!(d.apply(&GradedPoly::one(&spec)).unwrap().is_zero());
        let r = GradedPoly::named(&spec, "R").unwrap();
        let lhs = d.apply(&(&q * &r)).unwrap();
        let rhs = &(&d.apply(&q).unwrap() * &r) + &(&q * &d.apply(&r).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn weight_and_lowering_operators() {
        let d = classical();
        let spec = d.spec().clone();
        let w = weight_operator(&spec).unwrap();
        let f = GradedPoly::parse(&spec, "Q^2*R").unwrap();
        assert_eq!(w.apply(&f).unwrap(), f.scale(&Scalar::from(14)));
        let delta = lowering_operator(&spec, 0).unwrap();
        assert_eq!(delta.apply(&GradedPoly::parse(&spec, "P^2").unwrap()).unwrap(), GradedPoly::parse(&spec, "-2*P").unwrap());
        assert!(delta.apply(&GradedPoly::named(&spec, "Q").unwrap()).unwrap().is_zero());
        assert!(lowering_operator(&spec, 1).is_err());
    }

    #[test]
    fn lie_bracket_examples() {
        let d = classical();
        let spec = d.spec().clone();
        assert!(d.lie_bracket(&d).unwrap().is_zero());
        let w = weight_operator(&spec).unwrap();
        let delta = lowering_operator(&spec, 0).unwrap();
        assert_eq!(w.lie_bracket(&delta).unwrap(), delta.scale(&Scalar::from(-2)));
        assert_eq!(w.lie_bracket(&d).unwrap(), d.scale(&Scalar::from(2)));
    }

    // oracle for the sl2 relations: expand [D,δ] on each generator by hand.
    // [D,δ](t) = D(δt) − δ(Dt); δ only sees t₁, so on P: 0 − δ(P² − Q/144) = 2P,
    // on Q: −δ(4PQ − R/3) = 4Q, on R: −δ(6PR − Q²/2) = 6R, which is W.
    #[test]
    fn sl2_classical_and_s33() {
        for d in [classical(), s33()] {
            let sys = rrc_shape_check(&d, 0).unwrap();
            let report = sys.sl2_check().unwrap();
            assert!(report.ok(), "{:?}", report);
        }
        let d = classical();
        let spec = d.spec().clone();
        let delta = lowering_operator(&spec, 0).unwrap();
        let expected: Vec<GradedPoly> =
            ["2*P", "4*Q", "6*R"].iter().map(|s| GradedPoly::parse(&spec, s).unwrap()).collect();
        assert_eq!(d.lie_bracket(&delta).unwrap().images(), expected.as_slice());
    }

    #[test]
    fn sl2_detects_perturbation() {
        let spec = GradedAlgebraSpec::rank1(&[("P", rat_int(2)), ("Q", rat_int(4)), ("R", rat_int(6))]).unwrap();
        let d = Derivation::new_unchecked(
            &spec,
            ["P^2 - Q/144", "2*P*Q + R^2/3 + Q", "6*P*R - Q^2/2"].iter().map(|s| GradedPoly::parse(&spec, s).unwrap()).collect(),
            vec![rat_int(2)],
        )
        .unwrap();
        let report = sl2_check(&d, &weight_operator(&spec).unwrap(), &lowering_operator(&spec, 0).unwrap()).unwrap();
        assert!(!report.ok());
    }

    #[test]
    fn shape_check() {
        let sys = rrc_shape_check(&classical(), 0).unwrap();
        assert_eq!(sys.p(0), &GradedPoly::parse(sys.spec(), "-Q/144").unwrap());
        let spec = classical().spec().clone();
        let bad = Derivation::parse(&spec, &["P^2 - Q/144", "4*P*Q - R/3 + P^3", "6*P*R - Q^2/2"], rat_int(2));
        // right weight, but P^3 contains t₁
        let err = rrc_shape_check(&bad.unwrap(), 0).unwrap_err();
        assert!(matches!(err, GradedError::ShapeViolation { ref generator, .. } if generator == "Q"));
        let wrong_coeff = Derivation::parse(&spec, &["P^2 - Q/144", "3*P*Q - R/3", "6*P*R - Q^2/2"], rat_int(2)).unwrap();
        assert!(rrc_shape_check(&wrong_coeff, 0).is_err());
    }

    #[test]
    fn canonical_data() {
        let sys = rrc_shape_check(&classical(), 0).unwrap();
        let (partial, phi) = canonical_from_rrc(&sys).unwrap();
        let m = partial.spec().clone();
        assert_eq!(m.names(), &["Q".to_string(), "R".to_string()]);
        assert_eq!(partial.image(0), &GradedPoly::parse(&m, "-R/3").unwrap());
        assert_eq!(partial.image(1), &GradedPoly::parse(&m, "-Q^2/2").unwrap());
        assert_eq!(phi, GradedPoly::parse(&m, "-Q/144").unwrap());

        let sys = rrc_shape_check(&s33(), 0).unwrap();
        let (partial, phi) = canonical_from_rrc(&sys).unwrap();
        let m = partial.spec().clone();
        assert_eq!(partial.image(0), &GradedPoly::parse(&m, "-R^2/3").unwrap());
        assert_eq!(partial.image(1), &GradedPoly::parse(&m, "-Q^2/3").unwrap());
        assert_eq!(phi, GradedPoly::parse(&m, "-Q*R/36").unwrap());
    }

    #[test]
    fn extend_round_trip_and_trivial() {
        for d in [classical(), s33()] {
            let sys = rrc_shape_check(&d, 0).unwrap();
            let (partial, phi) = canonical_from_rrc(&sys).unwrap();
            let back = extend_algebra(&partial, &phi, "P").unwrap();
            assert_eq!(back, sys);
            let (p2, phi2) = canonical_from_rrc(&back).unwrap();
            assert_eq!((p2, phi2), (partial, phi));
        }
        let m = GradedAlgebraSpec::rank1(&[("A", rat_int(4)), ("B", rat(6, 1))]).unwrap();
        let sys = extend_algebra(&Derivation::zero(&m, vec![rat_int(2)]), &GradedPoly::zero(&m), "T").unwrap();
        let spec = sys.spec().clone();
        assert_eq!(sys.derivation().image(0), &GradedPoly::parse(&spec, "T^2").unwrap());
        assert_eq!(sys.derivation().image(1), &GradedPoly::parse(&spec, "4*T*A").unwrap());
        let bad_phi = GradedPoly::named(&m, "B").unwrap();
        assert!(extend_algebra(&Derivation::zero(&m, vec![rat_int(2)]), &bad_phi, "T").is_err());
    }

    #[test]
    fn special_element_classical_delta() {
        let sys = rrc_shape_check(&classical(), 0).unwrap();
        let delta = GradedPoly::parse(sys.spec(), "(Q^3 - R^2)/1728").unwrap();
        let report = special_element_form(&sys, &delta, false).unwrap();
        assert!(report.ok(), "{report:?}");
        assert!(matches!(report, SpecialElementReport::Divisible { .. }));
    }

    #[test]
    fn special_element_extension() {
        // Q is not a good special element: [Q,R]_1 is not divisible by Q
        let sys = rrc_shape_check(&classical(), 0).unwrap();
        let q = GradedPoly::named(sys.spec(), "Q").unwrap();
        assert!(special_element_form(&sys, &q, false).is_err());
        let report = special_element_form(&sys, &q, true).unwrap();
        let SpecialElementReport::Extended { system, partial_f_vanishes } = report else {
            panic!("expected extension");
        };
        assert!(!partial_f_vanishes);
        let ext = rrc_shape_check(&system, 0).unwrap();
        assert!(ext.sl2_check().unwrap().ok());
    }

    #[test]
    fn exact_division() {
        let spec = classical().spec().clone();
        let a = GradedPoly::parse(&spec, "Q^3 - R^2").unwrap();
        let b = GradedPoly::parse(&spec, "Q*P + R").unwrap();
        assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
        assert!(a.exact_div(&b).is_err());
    }

    #[test]
    fn series_evaluation() {
        let spec = classical().spec().clone();
        let f = GradedPoly::parse(&spec, "P*Q - 2").unwrap();
        let x = Series::var().truncate_int(5);
        let vals = [x.clone(), &Series::one() + &x, Series::zero()];
        let got = f.eval_series(&vals).unwrap();
        let want = &(&x * &(&Series::one() + &x)) - &Series::constant(Scalar::from(2));
        assert_eq!(got, want);
    }

    #[test]
    fn system_file_round_trip() {
        let d = classical();
        let text = d.to_system_text();
        let back = parse_system(&text).unwrap();
        assert_eq!(back, d);
        assert!(parse_system("P : 2 = P^2 +").is_err());
        assert!(parse_system("P 2 = P").is_err());
        let bi = parse_system("B : (1,-3) = P1*B\nP1 : (2,0) = P1^2").unwrap();
        assert_eq!(bi.spec().rank(), 2);
        assert_eq!(bi.shift(), &[rat_int(2), rat_int(0)]);
    }

    pub(crate) fn s25() -> (Derivation, GradedPoly) {
        let text = "\
P1 : (2,0) = P1^2 - (3/20)^2*Q2^3*B^4
P2 : (0,2) = P2*B^2*Q2*P2 - (1/20)^2*Q2^2*B^2
B : (1,-3) = (P1 - 3*P2*B^2*Q2)*B
Q2 : (0,4) = 4*P2*B^2*Q2*Q2 - R2*B^2/5
R2 : (0,10) = 10*P2*B^2*Q2*R2 - Q2^4*B^2/2
";
        let d = parse_system(text).unwrap();
        let phi = GradedPoly::parse(d.spec(), "B^2*Q2").unwrap();
        (d, phi)
    }

    #[test]
    fn bigraded_s25() {
        let (d, phi) = s25();
        let spec = d.spec().clone();
        let lines = bigraded_serre_check(&d, 0, 1, &phi).unwrap();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.ok), "{lines:?}");
        assert_eq!(spec.weight(2), &[rat_int(1), rat_int(-3)]);

        let mut images = d.images().to_vec();
        images[2] = &images[2] + &GradedPoly::named(&spec, "Q2").unwrap();
        let bad = Derivation::new_unchecked(&spec, images, d.shift().to_vec()).unwrap();
        let lines = bigraded_serre_check(&bad, 0, 1, &phi).unwrap();
        assert!(!lines[2].ok);
        assert!(lines.iter().enumerate().all(|(i, l)| l.ok == (i != 2)));
    }

    fn arb_poly(spec: Arc<GradedAlgebraSpec>) -> impl Strategy<Value = GradedPoly> {
        prop::collection::vec((prop::collection::vec(0u32..3, 3), -4i64..5), 0..4).prop_map(move |ts| {
            ts.into_iter().fold(GradedPoly::zero(&spec), |acc, (e, c)| &acc + &GradedPoly::monomial(&spec, e, Scalar::from(c)))
        })
    }

    fn arb_derivation() -> impl Strategy<Value = Derivation> {
        let spec = classical().spec().clone();
        prop::collection::vec(arb_poly(spec.clone()), 3)
            .prop_map(move |images| Derivation::new_unchecked(&spec, images, vec![rat_int(0)]).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn lie_antisymmetry_and_jacobi(a in arb_derivation(), b in arb_derivation(), c in arb_derivation()) {
            let ab = a.lie_bracket(&b).unwrap();
            let ba = b.lie_bracket(&a).unwrap();
            prop_assert!(ab.add(&ba).unwrap().is_zero());
            let j = a.lie_bracket(&b.lie_bracket(&c).unwrap()).unwrap()
                .add(&b.lie_bracket(&c.lie_bracket(&a).unwrap()).unwrap()).unwrap()
                .add(&c.lie_bracket(&a.lie_bracket(&b).unwrap()).unwrap()).unwrap();
            prop_assert!(j.is_zero());
        }

        #[test]
        fn weight_operator_eigen(f in arb_poly(classical().spec().clone())) {
            let w = weight_operator(f.spec()).unwrap();
            for (e, c) in f.terms() {
                let m = GradedPoly::monomial(f.spec(), e.to_vec(), c.clone());
                let wt = m.homogeneous_weight().unwrap()[0].clone();
                prop_assert_eq!(w.apply(&m).unwrap(), m.scale_rational(&wt));
            }
        }
    }
}
