//! Exact q-expansions of the classical forms used in the examples, with their
//! nome conventions, and the verification bundles built from them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::brackets::Weighted;
use crate::coeff::{rat, rat_int, rational_to_string, Rational, Scalar};
use crate::expr::{Expr, ExprContext, ExprError};
use crate::graded::{Derivation, GradedAlgebraSpec, GradedError};
use crate::rrc::{build_system, verify_system, RrcError, SeriesSolution, SystemReport};
use crate::series::{Series, SeriesError};
use crate::triangle::{MultiplierValue, TriangleSignature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown catalog form `{0}`")]
    UnknownForm(String),
    #[error("nome mismatch: {a} vs {b}; re-express one side with with_nome")]
    NomeMismatch { a: String, b: String },
    #[error("cannot add forms of weights {a} and {b}")]
    WeightMismatch { a: String, b: String },
    #[error("order must be positive")]
    Order,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Rrc(#[from] RrcError),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

pub type Result<T> = std::result::Result<T, CatalogError>;

/// A q-expansion in the variable `e^{2πiτ·nome}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogForm {
    pub name: String,
    pub series: Series,
    pub weight: Rational,
    pub nome: Rational,
}

impl CatalogForm {
    pub fn new(name: impl Into<String>, series: Series, weight: Rational, nome: Rational) -> Self {
        CatalogForm { name: name.into(), series, weight, nome }
    }

    fn same_nome(&self, other: &CatalogForm) -> Result<()> {
        if self.nome != other.nome {
            return Err(CatalogError::NomeMismatch {
                a: format!("{} (nome {})", self.name, rational_to_string(&self.nome)),
                b: format!("{} (nome {})", other.name, rational_to_string(&other.nome)),
            });
        }
        Ok(())
    }

    /// Rewrites the expansion in the variable `e^{2πiτ·nome}`.
    pub fn with_nome(&self, nome: &Rational) -> Result<CatalogForm> {
        if nome.is_zero() || nome < &Rational::zero() {
            return Err(CatalogError::NomeMismatch { a: rational_to_string(&self.nome), b: rational_to_string(nome) });
        }
        let sub = Series::monomial(Scalar::one(), &self.nome / nome);
        Ok(CatalogForm::new(self.name.clone(), self.series.compose(&sub)?, self.weight.clone(), nome.clone()))
    }

    pub fn mul(&self, other: &CatalogForm) -> Result<CatalogForm> {
        self.same_nome(other)?;
        Ok(CatalogForm::new(
            format!("({})*({})", self.name, other.name),
            &self.series * &other.series,
            &self.weight + &other.weight,
            self.nome.clone(),
        ))
    }

    fn combine(&self, other: &CatalogForm, sign: &str) -> Result<CatalogForm> {
        self.same_nome(other)?;
        if self.weight != other.weight {
            return Err(CatalogError::WeightMismatch { a: rational_to_string(&self.weight), b: rational_to_string(&other.weight) });
        }
        let series = if sign == "+" { &self.series + &other.series } else { &self.series - &other.series };
        Ok(CatalogForm::new(format!("{} {sign} {}", self.name, other.name), series, self.weight.clone(), self.nome.clone()))
    }

    pub fn add(&self, other: &CatalogForm) -> Result<CatalogForm> {
        self.combine(other, "+")
    }

    pub fn sub(&self, other: &CatalogForm) -> Result<CatalogForm> {
        self.combine(other, "-")
    }

    pub fn scale(&self, c: &Scalar) -> CatalogForm {
        CatalogForm::new(format!("{c}*({})", self.name), self.series.scale(c), self.weight.clone(), self.nome.clone())
    }

    pub fn pow(&self, e: u32) -> Result<CatalogForm> {
        Ok(CatalogForm::new(
            format!("({})^{e}", self.name),
            self.series.pow(e as i64)?,
            &self.weight * rat_int(e as i64),
            self.nome.clone(),
        ))
    }

    pub fn weighted(&self) -> Weighted<Series> {
        Weighted::new(self.series.clone(), self.weight.clone())
    }
}

fn sigma(n: i64, p: u32) -> i64 {
    let mut s = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += d.pow(p);
            if d * d != n {
                s += (n / d).pow(p);
            }
        }
        d += 1;
    }
    s
}

fn check_order(order: i64) -> Result<()> {
    if order <= 0 {
        return Err(CatalogError::Order);
    }
    Ok(())
}

/// `E_2 = 1 − 24 Σσ₁(n)qⁿ`, `E_4 = 1 + 240 Σσ₃(n)qⁿ`, `E_6 = 1 − 504 Σσ₅(n)qⁿ`.
pub fn eisenstein(k: u32, order: i64) -> Result<CatalogForm> {
    check_order(order)?;
    let (c, p) = match k {
        2 => (-24, 1),
        4 => (240, 3),
        6 => (-504, 5),
        _ => return Err(CatalogError::UnknownForm(format!("E{k}"))),
    };
    let coeffs = (0..order).map(|n| Scalar::from(if n == 0 { 1 } else { c * sigma(n, p) }));
    Ok(CatalogForm::new(format!("E{k}"), Series::from_coeffs(coeffs, Some(order)), rat_int(k as i64), Rational::one()))
}

/// `θ₃ = Σ_{n∈ℤ} x^{n²}` or `θ₂ = Σ_{n∈ℤ+1/2} x^{n²}` with `x = e^{2πiτ}`,
/// re-expressed in the requested nome.
pub fn theta(which: u32, order: i64, nome: &Rational) -> Result<CatalogForm> {
    check_order(order)?;
    let base = match which {
        3 => {
            let mut terms = vec![(0, Scalar::one())];
            let mut n = 1;
            while n * n < order {
                terms.push((n * n, Scalar::from(2)));
                n += 1;
            }
            Series::from_terms(1, terms, Some(rat_int(order)))
        }
        2 => {
            // exponents (2j+1)²/4 in quarter units
            let mut terms = Vec::new();
            let mut j = 0;
            while (2 * j + 1) * (2 * j + 1) < 4 * order {
                terms.push(((2 * j + 1) * (2 * j + 1), Scalar::from(2)));
                j += 1;
            }
            Series::from_terms(4, terms, Some(rat_int(order)))
        }
        _ => return Err(CatalogError::UnknownForm(format!("THETA{which}"))),
    };
    CatalogForm::new(format!("THETA{which}"), base, rat(1, 2), Rational::one()).with_nome(nome)
}

/// `Δ = (E₄³ − E₆²)/1728`.
pub fn delta(order: i64) -> Result<CatalogForm> {
    let e4 = eisenstein(4, order)?;
    let e6 = eisenstein(6, order)?;
    let d = e4.pow(3)?.sub(&e6.pow(2)?)?;
    Ok(CatalogForm::new("DELTA", d.series.scale_rational(&rat(1, 1728)), rat_int(12), Rational::one()))
}

pub const FORM_NAMES: [&str; 6] = ["E2", "E4", "E6", "DELTA", "THETA2", "THETA3"];

/// Builds any form in [`FORM_NAMES`] in its own nome (`e^{2πiτ}`).
pub fn form(name: &str, order: i64) -> Result<CatalogForm> {
    match name {
        "E2" => eisenstein(2, order),
        "E4" => eisenstein(4, order),
        "E6" => eisenstein(6, order),
        "DELTA" => delta(order),
        "THETA2" => theta(2, order, &Rational::one()),
        "THETA3" => theta(3, order, &Rational::one()),
        _ => Err(CatalogError::UnknownForm(name.to_string())),
    }
}

/// Memoized catalog; each `(name, order)` is built once.
#[derive(Debug, Default)]
pub struct Catalog {
    cache: Mutex<HashMap<(String, i64), Arc<CatalogForm>>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str, order: i64) -> Result<Arc<CatalogForm>> {
        if let Some(f) = self.cache.lock().expect("catalog lock").get(&(name.to_string(), order)) {
            return Ok(f.clone());
        }
        let built = Arc::new(form(name, order)?);
        let mut cache = self.cache.lock().expect("catalog lock");
        Ok(cache.entry((name.to_string(), order)).or_insert(built).clone())
    }

    /// Evaluates a polynomial expression over the catalog names as a form of
    /// definite weight.
    pub fn eval(&self, src: &str, order: i64) -> Result<Weighted<Series>> {
        let expr = Expr::parse(src)?;
        let v = expr.eval(&FormContext { catalog: self, order })?;
        let weight = v.weight.unwrap_or_else(Rational::zero);
        Ok(Weighted::new(v.series, weight))
    }
}

/// `weight = None` marks the zero series, which has every weight.
#[derive(Debug, Clone)]
struct FormValue {
    series: Series,
    weight: Option<Rational>,
}

struct FormContext<'a> {
    catalog: &'a Catalog,
    order: i64,
}

impl FormContext<'_> {
    fn join(&self, a: &FormValue, b: &FormValue) -> Result<Option<Rational>> {
        match (&a.weight, &b.weight) {
            (Some(x), Some(y)) if x != y => {
                Err(CatalogError::WeightMismatch { a: rational_to_string(x), b: rational_to_string(y) })
            }
            (Some(x), _) | (None, Some(x)) => Ok(Some(x.clone())),
            (None, None) => Ok(None),
        }
    }
}

impl ExprContext for FormContext<'_> {
    type Value = FormValue;
    type Error = CatalogError;

    fn constant(&self, c: Scalar) -> Result<FormValue> {
        let weight = (!c.is_zero()).then(Rational::zero);
        Ok(FormValue { series: Series::constant(c), weight })
    }
    fn variable(&self, name: &str) -> Result<FormValue> {
        let f = self.catalog.get(name, self.order)?;
        Ok(FormValue { series: f.series.clone(), weight: Some(f.weight.clone()) })
    }
    fn add(&self, a: &FormValue, b: &FormValue) -> Result<FormValue> {
        Ok(FormValue { weight: self.join(a, b)?, series: &a.series + &b.series })
    }
    fn sub(&self, a: &FormValue, b: &FormValue) -> Result<FormValue> {
        Ok(FormValue { weight: self.join(a, b)?, series: &a.series - &b.series })
    }
    fn mul(&self, a: &FormValue, b: &FormValue) -> Result<FormValue> {
        let weight = match (&a.weight, &b.weight) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        Ok(FormValue { series: &a.series * &b.series, weight })
    }
    fn pow(&self, a: &FormValue, e: i64) -> Result<FormValue> {
        Ok(FormValue { series: a.series.pow(e)?, weight: a.weight.as_ref().map(|w| w * rat_int(e)) })
    }
    fn scale(&self, a: &FormValue, c: &Scalar) -> Result<FormValue> {
        let weight = if c.is_zero() { None } else { a.weight.clone() };
        Ok(FormValue { series: a.series.scale(c), weight })
    }
}

/// `(E₂/12, E₄, E₆)` against the `(2,3,1,1)` system with `D = q d/dq`.
pub fn verify_ramanujan(order: i64) -> Result<SystemReport> {
    let sig = TriangleSignature::new(2, 3, 1, 1).map_err(RrcError::from)?;
    let p = eisenstein(2, order)?.series.scale_rational(&rat(1, 12));
    let sol = SeriesSolution::in_nome(sig, p, eisenstein(4, order)?.series, eisenstein(6, order)?.series);
    Ok(verify_system(&sol, &build_system(&sig)?)?)
}

/// The Δ(3,3,∞) forms in `q = e^{πiτ}`.
#[derive(Debug, Clone)]
pub struct Bundle33 {
    pub p: CatalogForm,
    pub q: CatalogForm,
    pub r: CatalogForm,
}

/// `P = E₂/6`, `Q = θ₃⁴ + 2√−3·θ₃²θ₂² + θ₂⁴`, `R = conj(Q)`, with thetas and
/// `E₂` in `x = e^{2πiτ}` rewritten in `q = e^{πiτ}` (`x = q²`).
pub fn bundle_33(order: i64) -> Result<Bundle33> {
    let x_order = order / 2 + 1;
    let half = rat(1, 2);
    let t3 = theta(3, x_order, &Rational::one())?;
    let t2 = theta(2, x_order, &Rational::one())?;
    let t3sq = t3.pow(2)?;
    let t2sq = t2.pow(2)?;
    let mixed = t3sq.mul(&t2sq)?;
    let edges = t3sq.pow(2)?.add(&t2sq.pow(2)?)?;
    let s = Scalar::quad(Rational::zero(), rat_int(2), -3).map_err(SeriesError::from)?;
    let cut = |f: CatalogForm, name: &str| -> Result<CatalogForm> {
        let f = f.with_nome(&half)?;
        Ok(CatalogForm::new(name, f.series.truncate_int(order), f.weight, f.nome))
    };
    let q = cut(edges.add(&mixed.scale(&s))?, "Q")?;
    let r = cut(edges.add(&mixed.scale(&-s))?, "R")?;
    let e2 = eisenstein(2, x_order)?;
    let p = cut(CatalogForm::new("P", e2.series.scale_rational(&rat(1, 6)), rat_int(2), Rational::one()), "P")?;
    Ok(Bundle33 { p, q, r })
}

#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        CheckLine { name: name.to_string(), ok, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Report33 {
    pub lines: Vec<CheckLine>,
}

impl Report33 {
    pub fn ok(&self) -> bool {
        self.lines.iter().all(|l| l.ok)
    }

    pub fn line(&self, name: &str) -> Option<&CheckLine> {
        self.lines.iter().find(|l| l.name == name)
    }
}

fn zero_line(name: &str, s: &Series) -> CheckLine {
    let detail = match s.prec() {
        Some(p) => format!("zero to O(q^{})", rational_to_string(p)),
        None => "exact".into(),
    };
    if s.is_zero() {
        CheckLine::new(name, true, detail)
    } else {
        CheckLine::new(name, false, format!("nonzero at q^{}", s.valuation().map(|v| rational_to_string(&v)).unwrap_or_default()))
    }
}

/// Listed expansions `1 ± 8√−3 q + 24q² ± 32√−3 q³ + 24q⁴ ± 48√−3 q⁵` and
/// `P = 1/6 − 4q² − 12q⁴ − 16q⁶`.
pub fn listed_33() -> (Vec<Scalar>, Vec<Scalar>) {
    let sq = |b: i64| Scalar::quad(Rational::zero(), rat_int(b), -3).expect("−3 is squarefree");
    let q = vec![Scalar::one(), sq(8), Scalar::from(24), sq(32), Scalar::from(24), sq(48)];
    let p = [rat(1, 6), rat_int(0), rat_int(-4), rat_int(0), rat_int(-12), rat_int(0), rat_int(-16)]
        .into_iter()
        .map(Scalar::Rat)
        .collect();
    (q, p)
}

fn hat_derivation(images: &[&str]) -> Result<Derivation> {
    let spec = GradedAlgebraSpec::rank1(&[("Ph", rat_int(2)), ("Qh", rat_int(2)), ("Rh", rat_int(4))])?;
    Ok(Derivation::parse(&spec, images, rat_int(2))?)
}

/// The hat system `P̂' = P̂² − R̂/36`, `Q̂' = 2P̂Q̂ − (Q̂² − 2R̂)/3`,
/// `R̂' = 4P̂R̂ − (Q̂³ − 3Q̂R̂)/3`. It holds for `(P, Q+R, QR)`.
pub fn hat_system() -> Result<Derivation> {
    hat_derivation(&["Ph^2 - 1/36*Rh", "2*Ph*Qh - (Qh^2 - 2*Rh)/3", "4*Ph*Rh - (Qh^3 - 3*Qh*Rh)/3"])
}

/// The same system for `(P, (Q+R)/2, QR)`.
pub fn hat_system_halved() -> Result<Derivation> {
    hat_derivation(&["Ph^2 - 1/36*Rh", "2*Ph*Qh - (2*Qh^2 - Rh)/3", "4*Ph*Rh - (8*Qh^3 - 6*Qh*Rh)/3"])
}

/// Rotation of `f(τ+λ)/f(τ)` for a q-expansion with nome `ν`, when it is a
/// single value.
pub fn translation_rotation(f: &CatalogForm, lambda: &Rational) -> Option<MultiplierValue> {
    let mut rots = f.series.exponent_terms().map(|(e, _)| MultiplierValue::new(e * &f.nome * lambda));
    let first = rots.next()?;
    rots.all(|r| r == first).then_some(first)
}

pub fn verify_33(order: i64) -> Result<Report33> {
    let b = bundle_33(order)?;
    let mut lines = Vec::new();
    let (listed_q, listed_p) = listed_33();

    let mut expansion_ok = true;
    for (i, c) in listed_q.iter().enumerate() {
        expansion_ok &= b.q.series.coeff_at(i as i64)? == *c && b.r.series.coeff_at(i as i64)? == c.conjugate();
    }
    for (i, c) in listed_p.iter().enumerate() {
        expansion_ok &= b.p.series.coeff_at(i as i64)? == *c;
    }
    lines.push(CheckLine::new("listed expansions", expansion_ok, "P through q^6, Q and R through q^5"));
    lines.push(CheckLine::new("conjugate(Q) = R", b.q.series.conjugate() == b.r.series, ""));

    let sig = TriangleSignature::new(3, 3, 1, 1).map_err(RrcError::from)?;
    let sol = SeriesSolution::in_nome(sig, b.p.series.clone(), b.q.series.clone(), b.r.series.clone());
    let rep = verify_system(&sol, &build_system(&sig)?)?;
    for (g, s) in &rep.residuals {
        lines.push(zero_line(&format!("system residual D{g}"), s));
    }

    let sum = b.q.add(&b.r)?;
    let qh = sum.scale(&Scalar::ratio(1, 2));
    let rh = b.q.mul(&b.r)?;
    for (label, hat, second) in [("hat residual", hat_system()?, &sum), ("halved hat residual", hat_system_halved()?, &qh)] {
        let values = [b.p.series.clone(), second.series.clone(), rh.series.clone()];
        for (i, v) in values.iter().enumerate() {
            let res = &v.theta() - &hat.image(i).eval_series(&values)?;
            lines.push(zero_line(&format!("{label} D{}", hat.spec().name(i)), &res));
        }
    }

    let x_order = order / 2 + 1;
    let e4 = eisenstein(4, x_order)?.with_nome(&rat(1, 2))?;
    lines.push(zero_line("QR = E4", &(&rh.series - &e4.series).truncate_int(order)));
    let t3 = theta(3, x_order, &rat(1, 2))?;
    let t2 = theta(2, x_order, &rat(1, 2))?;
    let edges = t3.pow(4)?.add(&t2.pow(4)?)?;
    lines.push(zero_line("(Q+R)/2 = THETA3^4 + THETA2^4", &(&qh.series - &edges.series).truncate_int(order)));

    let p_tail = &b.p.series - &Series::constant(Scalar::ratio(1, 6));
    lines.push(CheckLine::new(
        "integral hat forms",
        qh.series.is_integral() && rh.series.is_integral() && p_tail.is_integral(),
        "Qh, Rh and Ph - 1/6",
    ));

    // weight 2 is integral, so v is a character: v(G) = v(S)^{-3} v(T)^{-2}
    let (vq_s, vr_s) = crate::triangle::multipliers(&sig);
    let lambda = rat_int(2);
    let gamma2 = match (translation_rotation(&b.q, &lambda), translation_rotation(&b.r, &lambda)) {
        (Some(tq), Some(tr)) => {
            let g = |s: &MultiplierValue, t: &MultiplierValue| MultiplierValue::new(-rat_int(3) * s.rotation() - rat_int(2) * t.rotation());
            g(&vq_s, &tq).rotation().is_zero() && g(&vr_s, &tr).rotation().is_zero()
        }
        _ => false,
    };
    lines.push(CheckLine::new("trivial multipliers on G = S^-2 T^-2 S^-1", gamma2, "rotations of v_Q(G), v_R(G)"));
    Ok(Report33 { lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    // oracle: brute-force divisor sums
    fn sigma_naive(n: i64, p: u32) -> i64 {
        (1..=n).filter(|d| n % d == 0).map(|d| d.pow(p)).sum()
    }

    #[test]
    fn divisor_sums() {
        for n in 1..200 {
            assert_eq!(sigma(n, 3), sigma_naive(n, 3));
        }
    }

    #[test]
    fn eisenstein_heads() {
        let e4 = eisenstein(4, 5).unwrap();
        assert_eq!(e4.series.coeff_at(1).unwrap(), Scalar::from(240));
        assert_eq!(e4.series.coeff_at(2).unwrap(), Scalar::from(2160));
        assert_eq!(eisenstein(2, 3).unwrap().series.coeff_at(0).unwrap(), Scalar::one());
        assert!(eisenstein(8, 3).is_err());
    }

    #[test]
    fn delta_coefficients() {
        let d = delta(12).unwrap().series;
        // Ramanujan tau values
        let tau = [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612];
        for (i, t) in tau.iter().enumerate() {
            assert_eq!(d.coeff_at(i as i64).unwrap(), Scalar::from(*t));
        }
        let e2 = eisenstein(2, 12).unwrap().series;
        assert_eq!(d.theta().div(&d).unwrap(), e2);
    }

    #[test]
    fn theta_series() {
        let t3 = theta(3, 10, &Rational::one()).unwrap().series;
        assert_eq!(t3.coeff_at(4).unwrap(), Scalar::from(2));
        assert_eq!(t3.coeff_at(3).unwrap(), Scalar::zero());
        let t2 = theta(2, 10, &Rational::one()).unwrap();
        assert_eq!(t2.series.valuation(), Some(rat(1, 4)));
        let t24 = t2.pow(4).unwrap().series;
        assert_eq!(t24.denom(), 1);
        assert_eq!(t24.coeff_at(1).unwrap(), Scalar::from(16));
        // θ₃ in q = e^{πiτ} has its squares at q^{n²}
        let t3q = theta(3, 10, &rat(1, 2)).unwrap().series;
        assert_eq!(t3q.coeff_at(8).unwrap(), Scalar::from(2));
        assert_eq!(t3q.coeff_at(4).unwrap(), Scalar::zero());
    }

    #[test]
    fn nome_mismatch_is_an_error() {
        let a = eisenstein(4, 6).unwrap();
        let b = a.with_nome(&rat(1, 2)).unwrap();
        assert!(matches!(a.mul(&b), Err(CatalogError::NomeMismatch { .. })));
        assert!(a.mul(&b.with_nome(&Rational::one()).unwrap()).is_ok());
    }

    #[test]
    fn ramanujan_residuals() {
        let rep = verify_ramanujan(60).unwrap();
        assert!(rep.ok());
        assert!(rep.order.unwrap() >= rat_int(59));
    }

    #[test]
    fn bundle_33_checks() {
        let rep = verify_33(30).unwrap();
        for l in &rep.lines {
            assert!(l.ok, "{}: {}", l.name, l.detail);
        }
    }

    #[test]
    fn expression_context() {
        let cat = Catalog::new();
        let f = cat.eval("(E4^3 - E6^2)/1728", 10).unwrap();
        assert_eq!(f.weight, rat_int(12));
        assert_eq!(f.value, delta(10).unwrap().series);
        assert!(matches!(cat.eval("E4 + E6", 5), Err(CatalogError::WeightMismatch { .. })));
        assert!(cat.eval("E4 + FOO", 5).is_err());
        let t = cat.eval("THETA3^4 + sqrt(-3)*THETA2^2*THETA3^2", 5).unwrap();
        assert_eq!(t.weight, rat_int(2));
        assert!(Arc::ptr_eq(&cat.get("E4", 10).unwrap(), &cat.get("E4", 10).unwrap()));
    }
}
