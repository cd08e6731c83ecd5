//! Triangle-group signatures, dimensions of twisted form spaces, multipliers
//! and the reflection-group generators.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{rat, rat_int, rational_to_string, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriangleError {
    #[error("invalid signature ({n},{m},{k},{r}): {msg}")]
    Invalid { n: i64, m: i64, k: i64, r: i64, msg: String },
    #[error("(n, m) = ({n}, {m}) is not hyperbolic")]
    NotHyperbolic { n: i64, m: i64 },
    #[error("ambiguous fold for u = {u}: {msg}")]
    AmbiguousFold { u: i64, msg: String },
}

pub type Result<T> = std::result::Result<T, TriangleError>;

/// `(n, m, k, r)` with `N = nm − mk − nr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TriangleSignature {
    pub n: i64,
    pub m: i64,
    pub k: i64,
    pub r: i64,
}

impl TriangleSignature {
    pub fn new(n: i64, m: i64, k: i64, r: i64) -> Result<Self> {
        let bad = |msg: &str| TriangleError::Invalid { n, m, k, r, msg: msg.to_string() };
        if n < 2 || m < 2 {
            return Err(bad("n and m must be at least 2"));
        }
        if n > m {
            return Err(bad("expected n <= m"));
        }
        if k < 1 || r < 1 {
            return Err(bad("k and r must be positive"));
        }
        if rat(k, n) + rat(r, m) >= Rational::one() {
            return Err(bad("k/n + r/m must be < 1"));
        }
        Ok(TriangleSignature { n, m, k, r })
    }

    /// `N = nm − mk − nr`.
    pub fn big_n(&self) -> i64 {
        self.n * self.m - self.m * self.k - self.n * self.r
    }

    pub fn gcd_nm(&self) -> i64 {
        self.n.gcd(&self.m)
    }
}

impl fmt::Display for TriangleSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.n, self.m, self.k, self.r)
    }
}

fn fold(x: i64, n: i64) -> i64 {
    let x = x.rem_euclid(2 * n);
    x.min(2 * n - x)
}

/// Signatures of the embedding components by the Galois-fold heuristic:
/// for each `u` coprime to `2·lcm(n,m)`, taken up to sign, `k' = fold_n(u)`
/// and `r'` is whichever of `fold_m(u)`, `m − fold_m(u)` is hyperbolic.
/// Deduplicated and sorted, so `(1,1)` comes first.
pub fn candidate_embeddings(n: i64, m: i64) -> Result<Vec<TriangleSignature>> {
    if n < 2 || m < n || rat(1, n) + rat(1, m) >= Rational::one() {
        return Err(TriangleError::NotHyperbolic { n, m });
    }
    let l = n.lcm(&m);
    let mut out: Vec<TriangleSignature> = Vec::new();
    for u in 1..l {
        if u.gcd(&(2 * l)) != 1 {
            continue;
        }
        let k = fold(u, n);
        let f = fold(u, m);
        let ok: Vec<i64> = [f, m - f]
            .into_iter()
            .filter(|&r| r > 0 && rat(k, n) + rat(r, m) < Rational::one())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        match ok.as_slice() {
            [r] => {
                let sig = TriangleSignature::new(n, m, k, *r).expect("filtered hyperbolic");
                if !out.contains(&sig) {
                    out.push(sig);
                }
            }
            [] => return Err(TriangleError::AmbiguousFold { u, msg: "no hyperbolic choice".into() }),
            _ => return Err(TriangleError::AmbiguousFold { u, msg: "both choices hyperbolic".into() }),
        }
    }
    out.sort();
    Ok(out)
}

/// `(2n/N, 2m/N)`.
pub fn generator_weights(sig: &TriangleSignature) -> (Rational, Rational) {
    let nn = sig.big_n();
    (rat(2 * sig.n, nn), rat(2 * sig.m, nn))
}

/// True when `wN ∈ 2·gcd(n,m)·ℤ≥0`.
pub fn is_admissible(sig: &TriangleSignature, w: &Rational) -> bool {
    let x = w * rat_int(sig.big_n()) / rat_int(2 * sig.gcd_nm());
    x.is_integer() && !x.is_negative()
}

/// Dimension of the space of pure weight `w`.
///
/// With `g = gcd(n,m)`, `n' = n/g`, `m' = m/g` and `x = wNg/(2nm)`, the
/// dimension is `1 + ⌊x⌋` when `{x} = a/n' + b/m'` for some `a, b ≥ 0`,
/// else `⌊x⌋`. For coprime `n, m` this is the usual `wN/(2nm)` rule.
pub fn dim_pure_weight(sig: &TriangleSignature, w: &Rational) -> u64 {
    if !is_admissible(sig, w) {
        return 0;
    }
    let g = sig.gcd_nm();
    let (n1, m1) = (sig.n / g, sig.m / g);
    let x = w * rat_int(sig.big_n() * g) / rat_int(2 * sig.n * sig.m);
    let fl = x.floor();
    let frac = &x - &fl;
    let base = fl.to_integer().try_into().unwrap_or(0u64);
    let representable = (0..n1).any(|a| {
        let rest = &frac - rat(a, n1);
        !rest.is_negative() && (&rest * rat_int(m1)).is_integer()
    });
    base + u64::from(representable)
}

/// All `(a, b) ≥ 0` with `2an + 2bm = wN`, ordered by `a`.
pub fn monomial_basis(sig: &TriangleSignature, w: &Rational) -> Vec<(u64, u64)> {
    let target = w * rat_int(sig.big_n());
    if !target.is_integer() || target.is_negative() {
        return Vec::new();
    }
    let t = target.to_integer();
    let t: i64 = t.try_into().expect("weight too large");
    let mut out = Vec::new();
    let mut a = 0;
    while 2 * a * sig.n <= t {
        let rest = t - 2 * a * sig.n;
        if rest % (2 * sig.m) == 0 {
            out.push((a as u64, (rest / (2 * sig.m)) as u64));
        }
        a += 1;
    }
    out
}

/// A rotation number in `[0, 1)`: `v(S) = exp(2πi·rotation)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiplierValue(Rational);

impl MultiplierValue {
    pub fn new(r: Rational) -> Self {
        MultiplierValue(&r - r.floor())
    }

    pub fn rotation(&self) -> &Rational {
        &self.0
    }

    /// Rotation of the product of forms with these multipliers.
    pub fn combine(&self, a: u64, other: &MultiplierValue, b: u64) -> MultiplierValue {
        MultiplierValue::new(&self.0 * rat_int(a as i64) + &other.0 * rat_int(b as i64))
    }
}

impl fmt::Display for MultiplierValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational_to_string(&self.0))
    }
}

/// Multipliers at `S`: rotations `−k/N` for `Q` and `−(m−r)/N` for `R`.
pub fn multipliers(sig: &TriangleSignature) -> (MultiplierValue, MultiplierValue) {
    let nn = sig.big_n();
    (MultiplierValue::new(rat(-sig.k, nn)), MultiplierValue::new(rat(-(sig.m - sig.r), nn)))
}

/// `sum_j w_j N_j / (2nm)` over aligned signatures and weights.
pub fn valence_degree(sigs: &[TriangleSignature], weights: &[Rational]) -> Rational {
    assert_eq!(sigs.len(), weights.len(), "one weight per signature");
    sigs.iter().zip(weights).map(|(s, w)| w * rat_int(s.big_n()) / rat_int(2 * s.n * s.m)).sum()
}

/// One row of the dimension table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimRow {
    pub w: String,
    pub dim: u64,
    pub basis: Vec<(u64, u64)>,
    /// Shared rotation of the basis, or `None` when empty or mixed.
    pub rotation: Option<String>,
    pub classes: Vec<RotationClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RotationClass {
    pub rotation: String,
    pub basis: Vec<(u64, u64)>,
}

/// Rows for every admissible weight in `[0, wmax]`.
pub fn dimension_table(sig: &TriangleSignature, wmax: &Rational) -> Vec<DimRow> {
    let step = rat(2 * sig.gcd_nm(), sig.big_n());
    let (rq, rr) = multipliers(sig);
    let mut rows = Vec::new();
    let mut w = Rational::zero();
    while &w <= wmax {
        let basis = monomial_basis(sig, &w);
        let mut classes: Vec<(MultiplierValue, Vec<(u64, u64)>)> = Vec::new();
        for &(a, b) in &basis {
            let rot = rq.combine(a, &rr, b);
            match classes.iter_mut().find(|(r, _)| *r == rot) {
                Some((_, v)) => v.push((a, b)),
                None => classes.push((rot, vec![(a, b)])),
            }
        }
        classes.sort();
        let rotation = (classes.len() == 1).then(|| classes[0].0.to_string());
        rows.push(DimRow {
            w: rational_to_string(&w),
            dim: dim_pure_weight(sig, &w),
            basis,
            rotation,
            classes: classes.into_iter().map(|(r, basis)| RotationClass { rotation: r.to_string(), basis }).collect(),
        });
        w += &step;
    }
    rows
}

/// `2cos(πk/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoCos {
    pub k: i64,
    pub n: i64,
}

impl TwoCos {
    /// `2cos(2πj/M)` in lowest terms, `0 <= j <= M/2`.
    fn reduced(&self) -> (i64, i64) {
        let g = self.k.gcd(&(2 * self.n));
        let (mut j, mm) = (self.k / g, 2 * self.n / g);
        j = j.rem_euclid(mm);
        if 2 * j > mm {
            j = mm - j;
        }
        (j, mm)
    }

    /// Exact value when rational (only `0, ±1, ±2` occur).
    pub fn rational_value(&self) -> Option<Rational> {
        let (j, mm) = self.reduced();
        let x = rat(j, mm);
        let table = [(rat(0, 1), 2), (rat(1, 6), 1), (rat(1, 4), 0), (rat(1, 3), -1), (rat(1, 2), -2)];
        table.iter().find(|(t, _)| *t == x).map(|(_, v)| rat_int(*v))
    }

    /// Minimal polynomial over ℚ, coefficients from the constant term up.
    pub fn minimal_polynomial(&self) -> Vec<i64> {
        let (_, mm) = self.reduced();
        real_cyclotomic_minpoly(mm)
    }
}

impl fmt::Display for TwoCos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rational_value() {
            Some(v) => f.write_str(&rational_to_string(&v)),
            None => write!(f, "2cos({}pi/{})", self.k, self.n),
        }
    }
}

fn poly_divexact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dl = den.len();
    let lead = *den.last().unwrap();
    let mut q = vec![0; rem.len() + 1 - dl];
    for i in (0..q.len()).rev() {
        let c = rem[i + dl - 1] / lead;
        q[i] = c;
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

fn cyclotomic(mm: i64) -> Vec<i64> {
    let mut p = vec![0; mm as usize + 1];
    p[0] = -1;
    p[mm as usize] = 1;
    for d in 1..mm {
        if mm % d == 0 {
            p = poly_divexact(&p, &cyclotomic(d));
        }
    }
    p
}

/// Minimal polynomial of `2cos(2π/M)`.
fn real_cyclotomic_minpoly(mm: i64) -> Vec<i64> {
    match mm {
        1 => return vec![-2, 1],
        2 => return vec![2, 1],
        _ => {}
    }
    let phi = cyclotomic(mm);
    let d = (phi.len() - 1) / 2;
    // x^{-d} Φ(x) = c_d + sum_{i>=1} c_{d+i} (x^i + x^{-i}),  x^i + x^{-i} = V_i(y)
    let mut v: Vec<Vec<i64>> = vec![vec![2], vec![0, 1]];
    for i in 2..=d {
        let mut next = vec![0; i + 1];
        for (j, c) in v[i - 1].iter().enumerate() {
            next[j + 1] += c;
        }
        for (j, c) in v[i - 2].iter().enumerate() {
            next[j] -= c;
        }
        v.push(next);
    }
    let mut out = vec![0; d + 1];
    out[0] += phi[d];
    for i in 1..=d {
        for (j, c) in v[i].iter().enumerate() {
            out[j] += phi[d + i] * c;
        }
    }
    out
}

/// `rational + sum coeff·2cos(πk/n)` with irrational cosines kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealCyclotomic {
    pub rational: Rational,
    pub terms: Vec<(Rational, TwoCos)>,
}

impl RealCyclotomic {
    pub fn rational(r: Rational) -> Self {
        RealCyclotomic { rational: r, terms: Vec::new() }
    }

    pub fn two_cos(k: i64, n: i64) -> Self {
        let c = TwoCos { k, n };
        match c.rational_value() {
            Some(v) => Self::rational(v),
            None => RealCyclotomic { rational: Rational::zero(), terms: vec![(Rational::one(), c)] },
        }
    }

    pub fn add(&self, other: &RealCyclotomic) -> RealCyclotomic {
        let mut terms = self.terms.clone();
        for (c, t) in &other.terms {
            match terms.iter_mut().find(|(_, u)| u == t) {
                Some((d, _)) => *d += c,
                None => terms.push((c.clone(), *t)),
            }
        }
        terms.retain(|(c, _)| !c.is_zero());
        RealCyclotomic { rational: &self.rational + &other.rational, terms }
    }

    pub fn neg(&self) -> RealCyclotomic {
        RealCyclotomic { rational: -&self.rational, terms: self.terms.iter().map(|(c, t)| (-c, *t)).collect() }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.terms.is_empty().then_some(&self.rational)
    }
}

impl fmt::Display for RealCyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.rational.is_zero() || self.terms.is_empty() {
            parts.push(rational_to_string(&self.rational));
        }
        for (c, t) in &self.terms {
            parts.push(if c.is_one() { t.to_string() } else { format!("{}*{t}", rational_to_string(c)) });
        }
        f.write_str(&parts.join(" + "))
    }
}

pub type Matrix2 = [[RealCyclotomic; 2]; 2];

/// `S = (−2cos(πk/n), 1; −1, 0)`, `T = (1, λ; 0, 1)` with
/// `λ = 2cos(πr/m) + 2cos(πk/n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupGenerators {
    pub s: Matrix2,
    pub t: Matrix2,
    pub lambda: RealCyclotomic,
}

impl GroupGenerators {
    /// `S` with rational entries, when all cosines are rational.
    pub fn exact_s(&self) -> Option<[[Rational; 2]; 2]> {
        exact(&self.s)
    }

    pub fn exact_t(&self) -> Option<[[Rational; 2]; 2]> {
        exact(&self.t)
    }
}

fn exact(m: &Matrix2) -> Option<[[Rational; 2]; 2]> {
    Some([
        [m[0][0].as_rational()?.clone(), m[0][1].as_rational()?.clone()],
        [m[1][0].as_rational()?.clone(), m[1][1].as_rational()?.clone()],
    ])
}

pub fn group_generators(sig: &TriangleSignature) -> GroupGenerators {
    let cn = RealCyclotomic::two_cos(sig.k, sig.n);
    let cm = RealCyclotomic::two_cos(sig.r, sig.m);
    let one = RealCyclotomic::rational(Rational::one());
    let zero = RealCyclotomic::rational(Rational::zero());
    let lambda = cm.add(&cn);
    GroupGenerators {
        s: [[cn.neg(), one.clone()], [one.neg(), zero.clone()]],
        t: [[one.clone(), lambda.clone()], [zero, one]],
        lambda,
    }
}

pub fn mat_mul(a: &[[Rational; 2]; 2], b: &[[Rational; 2]; 2]) -> [[Rational; 2]; 2] {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn mat_pow(a: &[[Rational; 2]; 2], e: u32) -> [[Rational; 2]; 2] {
    let mut acc = [[Rational::one(), Rational::zero()], [Rational::zero(), Rational::one()]];
    for _ in 0..e {
        acc = mat_mul(&acc, a);
    }
    acc
}

/// True when `m = ±1`.
pub fn is_plus_minus_identity(m: &[[Rational; 2]; 2]) -> bool {
    m[0][1].is_zero() && m[1][0].is_zero() && m[0][0] == m[1][1] && m[0][0].abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: i64, m: i64, k: i64, r: i64) -> TriangleSignature {
        TriangleSignature::new(n, m, k, r).unwrap()
    }

    fn pairs(v: &[TriangleSignature]) -> Vec<(i64, i64)> {
        v.iter().map(|s| (s.k, s.r)).collect()
    }

    #[test]
    fn embeddings() {
        assert_eq!(pairs(&candidate_embeddings(2, 3).unwrap()), vec![(1, 1)]);
        assert_eq!(pairs(&candidate_embeddings(3, 3).unwrap()), vec![(1, 1)]);
        let e25 = candidate_embeddings(2, 5).unwrap();
        assert_eq!(pairs(&e25), vec![(1, 1), (1, 2)]);
        assert_eq!(e25.iter().map(|s| s.big_n()).collect::<Vec<_>>(), vec![3, 1]);
        assert_eq!(pairs(&candidate_embeddings(2, 7).unwrap()), vec![(1, 1), (1, 2), (1, 3)]);
        assert!(candidate_embeddings(2, 2).is_err());
    }

    // oracle: for prime m the trace field of Δ(2,m,∞) has degree (m−1)/2
    #[test]
    fn embedding_count_matches_trace_degree() {
        for m in [5, 7, 11, 13] {
            assert_eq!(candidate_embeddings(2, m).unwrap().len() as i64, (m - 1) / 2);
        }
    }

    #[test]
    fn signature_validation() {
        assert!(TriangleSignature::new(2, 3, 1, 2).is_err());
        assert!(TriangleSignature::new(3, 2, 1, 1).is_err());
        assert_eq!(sig(2, 5, 1, 2).big_n(), 1);
    }

    #[test]
    fn weights() {
        assert_eq!(generator_weights(&sig(2, 3, 1, 1)), (rat_int(4), rat_int(6)));
        assert_eq!(generator_weights(&sig(3, 3, 1, 1)), (rat_int(2), rat_int(2)));
        assert_eq!(generator_weights(&sig(2, 5, 1, 2)), (rat_int(4), rat_int(10)));
    }

    #[test]
    fn classical_dimensions() {
        let s = sig(2, 3, 1, 1);
        // oracle: dim M_k(SL2(Z)) = floor(k/12) + (0 if k ≡ 2 mod 12 else 1)
        for k in (0..=24).step_by(2) {
            let expect = k / 12 + if k % 12 == 2 { 0 } else { 1 };
            assert_eq!(dim_pure_weight(&s, &rat_int(k)), expect as u64, "k = {k}");
        }
        assert_eq!(dim_pure_weight(&s, &rat_int(3)), 0);
        assert_eq!(monomial_basis(&s, &rat_int(12)), vec![(0, 2), (3, 0)]);
        assert!(monomial_basis(&s, &rat_int(2)).is_empty());
        assert_eq!(dim_pure_weight(&sig(3, 3, 1, 1), &rat_int(2)), 2);
        assert_eq!(dim_pure_weight(&sig(2, 7, 1, 3), &Rational::zero()), 1);
    }

    #[test]
    fn multiplier_values() {
        let (q, r) = multipliers(&sig(3, 3, 1, 1));
        assert_eq!(q.rotation(), &rat(2, 3));
        assert_eq!(r.rotation(), &rat(1, 3));
        let (q, r) = multipliers(&sig(2, 3, 1, 1));
        assert!(q.rotation().is_zero() && r.rotation().is_zero());
    }

    #[test]
    fn valence() {
        let s = sig(2, 3, 1, 1);
        assert_eq!(valence_degree(&[s], &[rat_int(12)]), Rational::one());
        let e = candidate_embeddings(2, 5).unwrap();
        assert_eq!(valence_degree(&e, &[Rational::zero(), rat_int(20)]), Rational::one());
        assert_eq!(valence_degree(&e, &[Rational::zero(), Rational::zero()]), Rational::zero());
    }

    #[test]
    fn dimension_table_classes() {
        let rows = dimension_table(&sig(3, 3, 1, 1), &rat_int(4));
        let w2 = rows.iter().find(|r| r.w == "2").unwrap();
        assert_eq!(w2.dim, 2);
        assert_eq!(w2.rotation, None);
        assert_eq!(w2.classes.len(), 2);
        let rows = dimension_table(&sig(2, 3, 1, 1), &rat_int(12));
        assert_eq!(rows.iter().map(|r| r.dim).collect::<Vec<_>>(), vec![1, 0, 1, 1, 1, 1, 2]);
        assert!(rows.iter().filter(|r| r.dim > 0).all(|r| r.rotation.as_deref() == Some("0")));
    }

    #[test]
    fn generators() {
        let g = group_generators(&sig(2, 3, 1, 1));
        let s = g.exact_s().unwrap();
        assert_eq!(s, [[rat_int(0), rat_int(1)], [rat_int(-1), rat_int(0)]]);
        assert_eq!(g.lambda.as_rational(), Some(&rat_int(1)));
        assert!(is_plus_minus_identity(&mat_pow(&s, 2)));

        let g = group_generators(&sig(3, 3, 1, 1));
        let s = g.exact_s().unwrap();
        assert_eq!(s, [[rat_int(-1), rat_int(1)], [rat_int(-1), rat_int(0)]]);
        assert_eq!(g.lambda.as_rational(), Some(&rat_int(2)));
        assert!(is_plus_minus_identity(&mat_pow(&s, 3)));

        let g = group_generators(&sig(2, 5, 1, 1));
        assert!(g.exact_s().is_some());
        assert!(g.exact_t().is_none());
        // 2cos(π/5) is a root of y^2 − y − 1
        assert_eq!(g.lambda.terms[0].1.minimal_polynomial(), vec![-1, -1, 1]);
    }

    #[test]
    fn cosine_minimal_polynomials() {
        assert_eq!(TwoCos { k: 1, n: 7 }.minimal_polynomial(), vec![1, -2, -1, 1]);
        assert_eq!(TwoCos { k: 1, n: 4 }.minimal_polynomial(), vec![-2, 0, 1]);
        assert_eq!(TwoCos { k: 1, n: 3 }.rational_value(), Some(rat_int(1)));
        assert_eq!(TwoCos { k: 2, n: 3 }.rational_value(), Some(rat_int(-1)));
        assert_eq!(TwoCos { k: 1, n: 2 }.rational_value(), Some(rat_int(0)));
        assert_eq!(TwoCos { k: 1, n: 5 }.rational_value(), None);
    }

    #[test]
    fn dims_match_monomial_counts() {
        for (n, m) in [(2, 3), (3, 3), (2, 5), (2, 7), (3, 4), (4, 6)] {
            for s in candidate_embeddings(n, m).unwrap() {
                for wn in 0..=240 {
                    let w = rat(wn, s.big_n());
                    assert_eq!(dim_pure_weight(&s, &w), monomial_basis(&s, &w).len() as u64, "{s} w={w}");
                }
            }
        }
    }
}
