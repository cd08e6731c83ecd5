//! RRC systems attached to triangle groups: construction, series solutions in
//! the Hauptmodul `z` and in the canonical nome, and the inversion identities.

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{rat, rat_int, Rational, Scalar};
use crate::graded::{rrc_shape_check, Derivation, GradedAlgebraSpec, GradedError, GradedPoly, RrcSystem};
use crate::hypergeom::{self, frobenius_pair, hg_series, nome, qform, qform_y_squared, triangle_params, HypergeomError};
use crate::linalg;
use crate::series::{Series, SeriesError, SeriesJson};
use crate::triangle::{generator_weights, monomial_basis, TriangleError, TriangleSignature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RrcError {
    #[error(transparent)]
    Triangle(#[from] TriangleError),
    #[error(transparent)]
    Hypergeom(#[from] HypergeomError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Coeff(#[from] crate::coeff::CoeffError),
    #[error("cannot rescale: {0}")]
    Rescale(String),
    #[error("signature {0} is not an embedding of the reference group")]
    SignatureMismatch(TriangleSignature),
}

pub type Result<T> = std::result::Result<T, RrcError>;

/// The system with generators `P, Q, R` and, when some exponent is negative,
/// `Qinv = 1/Q` and `Rinv = 1/R`.
#[derive(Debug, Clone)]
pub struct TriangleRRC {
    pub sig: TriangleSignature,
    pub system: RrcSystem,
    pub q_inv: Option<usize>,
    pub r_inv: Option<usize>,
}

impl TriangleRRC {
    pub fn derivation(&self) -> &Derivation {
        self.system.derivation()
    }

    /// Generator values for evaluation: `[P, Q, R, (1/Q), (1/R)]`.
    pub fn values(&self, p: &Series, q: &Series, r: &Series) -> Result<Vec<Series>> {
        let mut v = vec![p.clone(), q.clone(), r.clone()];
        if self.q_inv.is_some() {
            v.push(q.inverse()?);
        }
        if self.r_inv.is_some() {
            v.push(r.inverse()?);
        }
        Ok(v)
    }
}

/// `D P = P² − (N/2nm)² Q^{m−2r} R^{n−2k}`,
/// `D Q = (2n/N) P Q − R^{n−k} Q^{1−r}/m`,
/// `D R = (2m/N) P R − Q^{m−r} R^{1−k}/n`.
pub fn build_system(sig: &TriangleSignature) -> Result<TriangleRRC> {
    let TriangleSignature { n, m, k, r } = *sig;
    let nn = sig.big_n();
    let (wq, wr) = generator_weights(sig);
    let need_u = m - 2 * r < 0 || r > 1;
    let need_v = n - 2 * k < 0 || k > 1;
    let mut gens = vec![("P", rat_int(2)), ("Q", wq.clone()), ("R", wr.clone())];
    if need_u {
        gens.push(("Qinv", -wq.clone()));
    }
    if need_v {
        gens.push(("Rinv", -wr.clone()));
    }
    let spec = GradedAlgebraSpec::rank1(&gens)?;
    let q_inv = need_u.then_some(3);
    let r_inv = need_v.then(|| if need_u { 4 } else { 3 });

    // c·P^a·Q^b·R^e with negative powers routed through the inverse generators
    let mono = |a: u32, b: i64, e: i64, c: Rational| {
        let mut exps = vec![0u32; spec.len()];
        exps[0] = a;
        match (b >= 0, q_inv) {
            (true, _) => exps[1] = b as u32,
            (false, Some(i)) => exps[i] = (-b) as u32,
            (false, None) => unreachable!("negative Q power without Qinv"),
        }
        match (e >= 0, r_inv) {
            (true, _) => exps[2] = e as u32,
            (false, Some(i)) => exps[i] = (-e) as u32,
            (false, None) => unreachable!("negative R power without Rinv"),
        }
        GradedPoly::monomial(&spec, exps, Scalar::Rat(c))
    };
    let c = rat(nn, 2 * n * m);
    let mut images = vec![
        &mono(2, 0, 0, Rational::one()) - &mono(0, m - 2 * r, n - 2 * k, &c * &c),
        &mono(1, 1, 0, wq.clone()) - &mono(0, 1 - r, n - k, rat(1, m)),
        &mono(1, 0, 1, wr.clone()) - &mono(0, m - r, 1 - k, rat(1, n)),
    ];
    // D(1/F) = −(DF)/F²
    if need_u {
        images.push(&mono(1, -1, 0, -wq.clone()) + &mono(0, -1 - r, n - k, rat(1, m)));
    }
    if need_v {
        images.push(&mono(1, 0, -1, -wr.clone()) + &mono(0, m - r, -1 - k, rat(1, n)));
    }
    let d = Derivation::new(&spec, images, vec![rat_int(2)])?;
    Ok(TriangleRRC { sig: *sig, system: rrc_shape_check(&d, 0)?, q_inv, r_inv })
}

/// Cusp values `(N/2mn, 1, 1)`.
pub fn fixed_point(sig: &TriangleSignature) -> (Rational, Rational, Rational) {
    (rat(sig.big_n(), 2 * sig.n * sig.m), Rational::one(), Rational::one())
}

/// Constant terms of the images at the fixed point (inverse generators at 1).
pub fn fixed_point_residual(sys: &TriangleRRC) -> Result<Vec<Scalar>> {
    let (p, q, r) = fixed_point(&sys.sig);
    let values = sys.values(&Series::constant(Scalar::Rat(p)), &Series::constant(Scalar::Rat(q)), &Series::constant(Scalar::Rat(r)))?;
    let d = sys.derivation();
    let spec = d.spec();
    (0..spec.len())
        .map(|i| {
            let img = d.image(i).eval_series(&values)?;
            // D of a constant is zero, so the image itself is the residual
            Ok(img.coeff_at(0)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    /// The canonical nome `q̃` (or an arithmetic nome after rescaling).
    Q,
    /// The Hauptmodul `z`.
    Z,
}

/// `P, Q, R` as series in one coordinate `x`, with the derivation
/// `D f = factor · df/dx`.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub sig: TriangleSignature,
    pub coordinate: Coordinate,
    pub p: Series,
    pub q: Series,
    pub r: Series,
    pub factor: Series,
}

impl SeriesSolution {
    /// A q-expansion solution with `D = q d/dq`.
    pub fn in_nome(sig: TriangleSignature, p: Series, q: Series, r: Series) -> Self {
        SeriesSolution { sig, coordinate: Coordinate::Q, p, q, r, factor: Series::var() }
    }

    pub fn apply_d(&self, f: &Series) -> Series {
        &self.factor * &f.derivative()
    }

    /// The smallest precision among `P, Q, R`.
    pub fn order(&self) -> Option<Rational> {
        [&self.p, &self.q, &self.r].iter().filter_map(|s| s.prec().cloned()).min()
    }

    pub fn to_json(&self) -> SolutionJson {
        SolutionJson {
            n: self.sig.n,
            m: self.sig.m,
            k: self.sig.k,
            r: self.sig.r,
            big_n: self.sig.big_n(),
            coordinate: self.coordinate,
            p: self.p.to_json(),
            q: self.q.to_json(),
            r_series: self.r.to_json(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionJson {
    pub n: i64,
    pub m: i64,
    pub k: i64,
    pub r: i64,
    #[serde(rename = "N")]
    pub big_n: i64,
    pub coordinate: Coordinate,
    #[serde(rename = "P")]
    pub p: SeriesJson,
    #[serde(rename = "Q")]
    pub q: SeriesJson,
    #[serde(rename = "R")]
    pub r_series: SeriesJson,
}

fn one_minus_z(prec: i64) -> Series {
    (&Series::one() - &Series::var()).truncate_int(prec)
}

/// Data shared by the z-coordinate constructions: `F` and `y² = z(1−z)^{α+β}F²`.
#[derive(Debug, Clone)]
pub struct ZData {
    pub f: Series,
    pub y2: Series,
}

pub fn z_data(sig: &TriangleSignature, order: i64) -> Result<ZData> {
    let p = triangle_params(sig.n, sig.m, sig.k, sig.r)?;
    let f = hg_series(&p, order)?;
    let y2 = qform_y_squared(&p, &f)?;
    Ok(ZData { f, y2 })
}

/// Hauptmodul solution: with `y² = z(1−z)^{1−k/n}F²` and `D = y² d/dz`,
/// `Q = (y^{2n} z^{−n} (1−z)^{−(n−k)})^{1/N}`, `R = (y^{2m} z^{−m} (1−z)^{−r})^{1/N}`,
/// `P = (N/2mn)·D log(Q^m − R^n)`.
pub fn solve_z(sig: &TriangleSignature, order: i64) -> Result<SeriesSolution> {
    let TriangleSignature { n, m, k, r } = *sig;
    let nn = sig.big_n();
    // spare terms cover the root shifts and the derivative in P
    let work = order + 3;
    let ZData { y2, .. } = z_data(sig, work)?;
    let om = one_minus_z(work);
    let root = |s: Series| s.pow_rational(&rat(1, nn));
    let q = root(&y2.pow(n)?.shift(&rat_int(-n)) * &om.pow(-(n - k))?)?;
    let rr = root(&y2.pow(m)?.shift(&rat_int(-m)) * &om.pow(-r)?)?;
    let delta = &q.pow(m)? - &rr.pow(n)?;
    let p = (&y2 * &delta.derivative().div(&delta)?).scale_rational(&rat(nn, 2 * m * n));
    Ok(SeriesSolution {
        sig: *sig,
        coordinate: Coordinate::Z,
        p: p.truncate_int(order),
        q: q.truncate_int(order),
        r: rr.truncate_int(order),
        factor: y2.truncate_int(order + 1),
    })
}

/// Canonical-nome solution for `(n, m, 1, 1)`, with `D = q̃ d/dq̃`.
pub fn solve_q(n: i64, m: i64, order: i64) -> Result<SeriesSolution> {
    let sig = TriangleSignature::new(n, m, 1, 1)?;
    let nn = sig.big_n();
    let params = triangle_params(n, m, 1, 1)?;
    let sol = frobenius_pair(&params, order + 2)?;
    let t = nome(&sol)?.revert()?;
    let tt = t.theta().div(&t)?;
    let om = (&Series::one() - &t).truncate(t.prec().cloned().ok_or(SeriesError::Unbounded)?);
    let root = |s: Series| s.pow_rational(&rat(1, nn));
    let q = root(&tt.pow(n)? * &om.pow(-(n - 1))?)?;
    let r = root(&tt.pow(m)? * &om.inverse()?)?;
    let delta = &q.pow(m)? - &r.pow(n)?;
    let p = delta.theta().div(&delta)?.scale_rational(&rat(nn, 2 * m * n));
    Ok(SeriesSolution::in_nome(sig, p.truncate_int(order), q.truncate_int(order), r.truncate_int(order)))
}

/// Substitutes `q̃ = c·q` in a nome solution.
pub fn rescale(sol: &SeriesSolution, c: &Scalar) -> Result<SeriesSolution> {
    if sol.coordinate != Coordinate::Q {
        return Err(RrcError::Rescale("only nome solutions can be rescaled".into()));
    }
    let sub = Series::monomial(c.clone(), Rational::one());
    Ok(SeriesSolution::in_nome(sol.sig, sol.p.compose(&sub)?, sol.q.compose(&sub)?, sol.r.compose(&sub)?))
}

/// The constant `c` with `series(c·q)` having linear coefficient `target`.
pub fn rescale_constant(series: &Series, target: &Scalar) -> Result<Scalar> {
    let a1 = series.coeff_at(1)?;
    if a1.is_zero() {
        return Err(RrcError::Rescale("linear coefficient vanishes".into()));
    }
    Ok(target.try_div(&a1)?)
}

#[derive(Debug, Clone)]
pub struct SystemReport {
    pub residuals: Vec<(String, Series)>,
    /// Precision to which every residual is known.
    pub order: Option<Rational>,
}

impl SystemReport {
    pub fn ok(&self) -> bool {
        self.residuals.iter().all(|(_, s)| s.is_zero())
    }

    /// First nonzero residual coefficient as `(generator, exponent)`.
    pub fn first_failure(&self) -> Option<(String, Rational)> {
        self.residuals.iter().find_map(|(g, s)| s.valuation().filter(|_| !s.is_zero()).map(|v| (g.clone(), v)))
    }
}

/// `D X − image(X)` for every generator.
pub fn verify_system(sol: &SeriesSolution, sys: &TriangleRRC) -> Result<SystemReport> {
    let values = sys.values(&sol.p, &sol.q, &sol.r)?;
    let d = sys.derivation();
    let spec = d.spec();
    let mut residuals = Vec::with_capacity(spec.len());
    for (i, v) in values.iter().enumerate() {
        let img = d.image(i).eval_series(&values)?;
        residuals.push((spec.name(i).to_string(), &sol.apply_d(v) - &img));
    }
    let order = residuals.iter().filter_map(|(_, s)| s.prec().cloned()).min();
    Ok(SystemReport { residuals, order })
}

/// One named identity `lhs = rhs` between series.
#[derive(Debug, Clone)]
pub struct IdentityLine {
    pub name: String,
    pub difference: Series,
}

impl IdentityLine {
    fn new(name: impl Into<String>, lhs: &Series, rhs: &Series) -> Self {
        IdentityLine { name: name.into(), difference: lhs - rhs }
    }

    pub fn ok(&self) -> bool {
        self.difference.is_zero()
    }

    pub fn order(&self) -> Option<&Rational> {
        self.difference.prec()
    }
}

#[derive(Debug, Clone, Default)]
pub struct IdentityReport {
    pub lines: Vec<IdentityLine>,
}

impl IdentityReport {
    pub fn ok(&self) -> bool {
        self.lines.iter().all(IdentityLine::ok)
    }

    pub fn min_order(&self) -> Option<Rational> {
        self.lines.iter().filter_map(|l| l.order().cloned()).min()
    }
}

/// `Δ = Q^m·z`, the three-term form of `P`, and `R^{nN}/Q^{mN} = (1−z)^N`.
pub fn hauptmodul_checks(sol: &SeriesSolution, data: &ZData) -> Result<IdentityReport> {
    let TriangleSignature { n, m, k, r } = sol.sig;
    let nn = sol.sig.big_n();
    let order = sol.order().map_or(0, |p| p.floor().to_integer().try_into().unwrap_or(0));
    let z = Series::var();
    let qm = sol.q.pow(m)?;
    let delta = &qm - &sol.r.pow(n)?;
    let mut lines = vec![IdentityLine::new("Q^m - R^n = Q^m z", &delta, &(&qm * &z))];

    let y2 = &data.y2;
    let zm1_inv = one_minus_z(order).inverse()?.scale(&-Scalar::one());
    let x = y2.derivative().scale_rational(&rat(1, 2));
    let y2_over_z = y2.shift(&-Rational::one());
    let three = &(&x - &(y2 * &zm1_inv).scale_rational(&rat(m + r, 2 * m)))
        + &(&y2_over_z * &zm1_inv).scale_rational(&rat(m * k + n * r, 2 * m * n));
    lines.push(IdentityLine::new("P three-term form", &sol.p, &three));

    let ratio = sol.r.pow(n * nn)?.div(&sol.q.pow(m * nn)?)?;
    lines.push(IdentityLine::new("R^(nN)/Q^(mN) = (1-z)^N", &ratio, &one_minus_z(order).pow(nn)?));
    Ok(IdentityReport { lines })
}

/// True when `R^{nN}/Q^{mN}` is not constant, so `Q^{mN}` and `R^{nN}` are
/// linearly independent.
pub fn independence_witness(sol: &SeriesSolution) -> Result<bool> {
    let nn = sol.sig.big_n();
    let ratio = sol.r.pow(sol.sig.n * nn)?.div(&sol.q.pow(sol.sig.m * nn)?)?;
    let varies = ratio.terms().any(|(e, c)| e != 0 && !c.is_zero());
    Ok(varies)
}

/// Rank of the monomials `Q^a R^b` of pure weight `w`, from their first
/// `terms` coefficients.
pub fn monomial_span_rank(sol: &SeriesSolution, w: &Rational, terms: usize) -> Result<usize> {
    let basis = monomial_basis(&sol.sig, w);
    if basis.is_empty() {
        return Ok(0);
    }
    let mut rows = Vec::with_capacity(basis.len());
    for (a, b) in basis {
        let s = &sol.q.pow(a as i64)? * &sol.r.pow(b as i64)?;
        rows.push((0..terms as i64).map(|i| s.coeff_at(i)).collect::<std::result::Result<Vec<_>, _>>()?);
    }
    Ok(linalg::rank(&rows)?)
}

/// `F(α_j, β_j; 1; z)² = Q_j^{N_j/n}` for one signature, and, against the
/// first embedding `sigs[0]`, `F_j² = Q₁^{N_j/n + r_j − 1} R₁^{k_j − 1} y_j²/y₁²`
/// for the others.
pub fn verify_inversion(sigs: &[TriangleSignature], order: i64) -> Result<IdentityReport> {
    let mut lines = Vec::new();
    let Some(first) = sigs.first() else {
        return Ok(IdentityReport::default());
    };
    let base = solve_z(first, order)?;
    let base_data = z_data(first, order)?;
    for sig in sigs {
        if (sig.n, sig.m) != (first.n, first.m) {
            return Err(RrcError::SignatureMismatch(*sig));
        }
        let sol = if sig == first { base.clone() } else { solve_z(sig, order)? };
        let data = z_data(sig, order)?;
        let f2 = &data.f * &data.f;
        lines.push(IdentityLine::new(format!("{sig}: F^2 = Q^(N/n)"), &f2, &sol.q.pow_rational(&rat(sig.big_n(), sig.n))?));
        if sig != first {
            let e = rat(sig.big_n(), sig.n) + rat_int(sig.r - 1);
            let rhs = &(&base.q.pow_rational(&e)? * &base.r.pow(sig.k - 1)?) * &data.y2.div(&base_data.y2)?;
            lines.push(IdentityLine::new(format!("{sig}: F^2 = Q1^e R1^(k-1) / phi'"), &f2, &rhs));
        }
    }
    Ok(IdentityReport { lines })
}

/// `X = (y²)'/2`, `Y = X − y²/z`, `Z = X − y²/(z−1)` in the z-coordinate.
pub fn ohyama_xyz(data: &ZData, order: i64) -> Result<(Series, Series, Series)> {
    let x = data.y2.derivative().scale_rational(&rat(1, 2));
    let y = &x - &data.y2.shift(&-Rational::one());
    let zm1_inv = one_minus_z(order).inverse()?.scale(&-Scalar::one());
    let z = &x - &(&data.y2 * &zm1_inv);
    Ok((x, y, z))
}

/// Rebuilds `P, Q, R` from `X, Y, Z`, compares with [`solve_z`], and checks
/// the Ohyama equations under `D = y² d/dz`.
pub fn ohyama_roundtrip(sig: &TriangleSignature, order: i64) -> Result<IdentityReport> {
    let TriangleSignature { n, m, k, r } = *sig;
    let nn = sig.big_n();
    let sol = solve_z(sig, order)?;
    let data = z_data(sig, order)?;
    let (x, y, z) = ohyama_xyz(&data, order)?;
    let xy = &x - &y;
    let zy = &z - &y;
    let p = (&(&x.scale_rational(&rat_int(n * (m - r))) + &y.scale_rational(&rat_int(m * k + n * r)))
        + &z.scale_rational(&rat_int(m * (n - k))))
        .scale_rational(&rat(1, 2 * m * n));
    let q = (&xy.pow(k)? * &zy.pow(n - k)?).pow_rational(&rat(1, nn))?;
    let rr = (&xy.pow(m - r)? * &zy.pow(r)?).pow_rational(&rat(1, nn))?;
    let mut lines = vec![
        IdentityLine::new("P from XYZ", &p, &sol.p),
        IdentityLine::new("Q from XYZ", &q, &sol.q),
        IdentityLine::new("R from XYZ", &rr, &sol.r),
    ];
    let field = hypergeom::ohyama_field(&qform(&triangle_params(n, m, k, r)?))?;
    let values = [x, y, z];
    for (i, v) in values.iter().enumerate() {
        let img = field.image(i).eval_series(&values)?;
        lines.push(IdentityLine::new(format!("d{} = Ohyama image", field.spec().name(i)), &sol.apply_d(v), &img));
    }
    Ok(IdentityReport { lines })
}
