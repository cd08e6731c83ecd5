//! Rankin–Cohen brackets.
//!
//! Coefficients use binomials: `[f,g]_n = sum_{r+s=n} (−1)^r C(k+n−1, s)
//! C(l+n−1, r) D^r f D^s g` for `f` of weight `k` and `g` of weight `l`.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeff::{rat_int, rational_to_string, Rational};
use crate::graded::{Derivation, GradedError, GradedPoly};
use crate::series::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BracketError {
    #[error("Φ must have weight 4, got {0}")]
    PhiWeight(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl From<BracketError> for GradedError {
    fn from(e: BracketError) -> Self {
        match e {
            BracketError::Series(s) => GradedError::Series(s),
            BracketError::PhiWeight(w) => GradedError::Weight(format!("Φ must have weight 4, got {w}")),
        }
    }
}

/// A commutative algebra with a derivation.
pub trait DiffAlgebra {
    type Elem: Clone;
    type Error: From<BracketError>;

    fn derive(&self, f: &Self::Elem) -> Result<Self::Elem, Self::Error>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, c: &Rational) -> Self::Elem;
    fn zero_like(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.scale(b, &-Rational::one()))
    }
}

/// Series with `θ = x d/dx`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThetaAlgebra;

impl DiffAlgebra for ThetaAlgebra {
    type Elem = Series;
    type Error = BracketError;

    fn derive(&self, f: &Series) -> Result<Series, BracketError> {
        Ok(f.theta())
    }
    fn add(&self, a: &Series, b: &Series) -> Series {
        a + b
    }
    fn mul(&self, a: &Series, b: &Series) -> Series {
        a * b
    }
    fn scale(&self, a: &Series, c: &Rational) -> Series {
        a.scale_rational(c)
    }
    fn zero_like(&self, a: &Series) -> Series {
        a.scale_rational(&Rational::zero())
    }
    fn is_zero(&self, a: &Series) -> bool {
        a.is_zero()
    }
}

/// Graded polynomials with a [`Derivation`].
#[derive(Debug, Clone)]
pub struct PolyAlgebra {
    d: Derivation,
}

impl PolyAlgebra {
    pub fn new(d: Derivation) -> Self {
        PolyAlgebra { d }
    }

    pub fn derivation(&self) -> &Derivation {
        &self.d
    }
}

impl DiffAlgebra for PolyAlgebra {
    type Elem = GradedPoly;
    type Error = GradedError;

    fn derive(&self, f: &GradedPoly) -> Result<GradedPoly, GradedError> {
        self.d.apply(f)
    }
    fn add(&self, a: &GradedPoly, b: &GradedPoly) -> GradedPoly {
        a + b
    }
    fn mul(&self, a: &GradedPoly, b: &GradedPoly) -> GradedPoly {
        a * b
    }
    fn scale(&self, a: &GradedPoly, c: &Rational) -> GradedPoly {
        a.scale_rational(c)
    }
    fn zero_like(&self, a: &GradedPoly) -> GradedPoly {
        GradedPoly::zero(a.spec())
    }
    fn is_zero(&self, a: &GradedPoly) -> bool {
        a.is_zero()
    }
}

/// An element together with its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Weighted<E> {
    pub value: E,
    pub weight: Rational,
}

impl<E> Weighted<E> {
    pub fn new(value: E, weight: Rational) -> Self {
        Weighted { value, weight }
    }
}

/// Generalized binomial `C(x, s)` for rational `x`.
pub fn binomial(x: &Rational, s: usize) -> Rational {
    let mut acc = Rational::one();
    for i in 0..s {
        acc = acc * (x - rat_int(i as i64)) / rat_int(i as i64 + 1);
    }
    acc
}

fn bracket_sum<A: DiffAlgebra>(
    alg: &A,
    fs: &[A::Elem],
    gs: &[A::Elem],
    k: &Rational,
    l: &Rational,
    n: usize,
) -> A::Elem {
    let nn = rat_int(n as i64);
    let one = Rational::one();
    let mut acc = alg.zero_like(&alg.mul(&fs[0], &gs[0]));
    for r in 0..=n {
        let s = n - r;
        let mut c = binomial(&(k + &nn - &one), s) * binomial(&(l + &nn - &one), r);
        if r % 2 == 1 {
            c = -c;
        }
        if c.is_zero() {
            continue;
        }
        acc = alg.add(&acc, &alg.scale(&alg.mul(&fs[r], &gs[s]), &c));
    }
    acc
}

/// The standard bracket `[f,g]_n` for the derivation of `alg`.
pub fn rc_bracket<A: DiffAlgebra>(
    alg: &A,
    f: &Weighted<A::Elem>,
    g: &Weighted<A::Elem>,
    n: usize,
) -> Result<Weighted<A::Elem>, A::Error> {
    let mut fs = vec![f.value.clone()];
    let mut gs = vec![g.value.clone()];
    for i in 0..n {
        fs.push(alg.derive(&fs[i])?);
        gs.push(alg.derive(&gs[i])?);
    }
    let value = bracket_sum(alg, &fs, &gs, &f.weight, &g.weight, n);
    Ok(Weighted::new(value, &f.weight + &g.weight + rat_int(2 * n as i64)))
}

/// `f_0 = f`, `f_{r+1} = ∂f_r + r(r+k−1) Φ f_{r−1}`.
fn canonical_sequence<A: DiffAlgebra>(
    alg: &A,
    phi: &A::Elem,
    f: &Weighted<A::Elem>,
    n: usize,
) -> Result<Vec<A::Elem>, A::Error> {
    let mut out = vec![f.value.clone()];
    for r in 0..n {
        let mut next = alg.derive(&out[r])?;
        if r > 0 {
            let c = rat_int(r as i64) * (rat_int(r as i64) + &f.weight - Rational::one());
            next = alg.add(&next, &alg.scale(&alg.mul(phi, &out[r - 1]), &c));
        }
        out.push(next);
    }
    Ok(out)
}

/// The canonical bracket built from the derivation `∂` of `alg` and `Φ`.
pub fn canonical_bracket<A: DiffAlgebra>(
    alg: &A,
    phi: &Weighted<A::Elem>,
    f: &Weighted<A::Elem>,
    g: &Weighted<A::Elem>,
    n: usize,
) -> Result<Weighted<A::Elem>, A::Error> {
    if phi.weight != rat_int(4) && !alg.is_zero(&phi.value) {
        return Err(BracketError::PhiWeight(rational_to_string(&phi.weight)).into());
    }
    let fs = canonical_sequence(alg, &phi.value, f, n)?;
    let gs = canonical_sequence(alg, &phi.value, g, n)?;
    let value = bracket_sum(alg, &fs, &gs, &f.weight, &g.weight, n);
    Ok(Weighted::new(value, &f.weight + &g.weight + rat_int(2 * n as i64)))
}

/// One checked instance of a bracket identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub n: Option<usize>,
    pub witness: Vec<usize>,
    pub ok: bool,
}

#[derive(Debug, Clone, Default)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

/// Checks antisymmetry (`n ≤ 4`), the Jacobi identity for `[,]_1`, and
/// `[[g,h]_0,f]_2 − [[h,f]_0,g]_2 + [[g,h]_2,f]_0 − [[h,f]_2,g]_0 = [[f,g]_1,h]_1`
/// on all index combinations of `samples`.
pub fn identity_suite<A, B>(alg: &A, samples: &[Weighted<A::Elem>], bracket: B) -> Result<IdentityReport, A::Error>
where
    A: DiffAlgebra,
    B: Fn(&Weighted<A::Elem>, &Weighted<A::Elem>, usize) -> Result<Weighted<A::Elem>, A::Error>,
{
    let mut report = IdentityReport::default();
    let len = samples.len();
    for i in 0..len {
        for j in i..len {
            for n in 0..=4 {
                let a = bracket(&samples[i], &samples[j], n)?;
                let b = bracket(&samples[j], &samples[i], n)?;
                let res = if n % 2 == 0 { alg.sub(&a.value, &b.value) } else { alg.add(&a.value, &b.value) };
                report.checks.push(IdentityCheck {
                    identity: "antisymmetry",
                    n: Some(n),
                    witness: vec![i, j],
                    ok: alg.is_zero(&res),
                });
            }
        }
    }
    for i in 0..len {
        for j in 0..len {
            for k in 0..len {
                let (f, g, h) = (&samples[i], &samples[j], &samples[k]);
                if i <= j && j <= k {
                    let t1 = bracket(&bracket(f, g, 1)?, h, 1)?;
                    let t2 = bracket(&bracket(g, h, 1)?, f, 1)?;
                    let t3 = bracket(&bracket(h, f, 1)?, g, 1)?;
                    let sum = alg.add(&alg.add(&t1.value, &t2.value), &t3.value);
                    report.checks.push(IdentityCheck {
                        identity: "jacobi",
                        n: Some(1),
                        witness: vec![i, j, k],
                        ok: alg.is_zero(&sum),
                    });
                }
                let gh0 = bracket(g, h, 0)?;
                let hf0 = bracket(h, f, 0)?;
                let gh2 = bracket(g, h, 2)?;
                let hf2 = bracket(h, f, 2)?;
                let lhs = alg.add(
                    &alg.sub(&bracket(&gh0, f, 2)?.value, &bracket(&hf0, g, 2)?.value),
                    &alg.sub(&bracket(&gh2, f, 0)?.value, &bracket(&hf2, g, 0)?.value),
                );
                let rhs = bracket(&bracket(f, g, 1)?, h, 1)?;
                report.checks.push(IdentityCheck {
                    identity: "mixed",
                    n: None,
                    witness: vec![i, j, k],
                    ok: alg.is_zero(&alg.sub(&lhs, &rhs.value)),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, Scalar};
    use num_bigint::BigInt;
    use crate::graded::{canonical_from_rrc, extend_algebra, rrc_shape_check, GradedAlgebraSpec};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn sigma(n: i64, k: u32) -> BigInt {
        (1..=n).filter(|d| n % d == 0).map(|d| BigInt::from(d).pow(k)).sum()
    }

    // E4, E6 straight from divisor sums
    fn e4_e6(order: i64) -> (Series, Series) {
        let e4 = Series::from_coeffs(
            (0..order).map(|n| if n == 0 { Scalar::one() } else { Scalar::from(sigma(n, 3) * 240) }),
            Some(order),
        );
        let e6 = Series::from_coeffs(
            (0..order).map(|n| if n == 0 { Scalar::one() } else { Scalar::from(sigma(n, 5) * -504) }),
            Some(order),
        );
        (e4, e6)
    }

    fn delta(e4: &Series, e6: &Series) -> Series {
        (&(&e4.pow(3).unwrap() - &e6.pow(2).unwrap())).scale_rational(&rat(1, 1728))
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(&rat_int(5), 2), rat_int(10));
        assert_eq!(binomial(&rat_int(2), 3), rat_int(0));
        assert_eq!(binomial(&rat(1, 2), 2), rat(-1, 8));
    }

    #[test]
    fn bracket_zero_is_product() {
        let (e4, e6) = e4_e6(20);
        let f = Weighted::new(e4.clone(), rat_int(4));
        let g = Weighted::new(e6.clone(), rat_int(6));
        let b = rc_bracket(&ThetaAlgebra, &f, &g, 0).unwrap();
        assert_eq!(b.value, &e4 * &e6);
        assert_eq!(b.weight, rat_int(10));
    }

    #[test]
    fn delta_brackets_on_series() {
        let (e4, e6) = e4_e6(40);
        let d = delta(&e4, &e6);
        let dw = Weighted::new(d.clone(), rat_int(12));
        let q = Weighted::new(e4.clone(), rat_int(4));
        let r = Weighted::new(e6.clone(), rat_int(6));
        let b = rc_bracket(&ThetaAlgebra, &dw, &q, 1).unwrap();
        assert_eq!(b.value, (&e6 * &d).scale(&Scalar::from(-4)));
        let b = rc_bracket(&ThetaAlgebra, &dw, &dw, 2).unwrap();
        assert_eq!(b.value, (&e4 * &(&d * &d)).scale(&Scalar::from(-13)));
        let b = rc_bracket(&ThetaAlgebra, &dw, &r, 1).unwrap();
        assert_eq!(b.value, (&(&e4 * &e4) * &d).scale(&Scalar::from(-6)));
    }

    fn classical_m() -> (PolyAlgebra, Weighted<GradedPoly>, Arc<GradedAlgebraSpec>) {
        let m = GradedAlgebraSpec::rank1(&[("Q", rat_int(4)), ("R", rat_int(6))]).unwrap();
        let partial = Derivation::parse(&m, &["-R/3", "-Q^2/2"], rat_int(2)).unwrap();
        let phi = GradedPoly::parse(&m, "-Q/144").unwrap();
        (PolyAlgebra::new(partial), Weighted::new(phi, rat_int(4)), m)
    }

    #[test]
    fn canonical_small_n() {
        let (alg, phi, m) = classical_m();
        let q = Weighted::new(GradedPoly::named(&m, "Q").unwrap(), rat_int(4));
        let r = Weighted::new(GradedPoly::named(&m, "R").unwrap(), rat_int(6));
        let b0 = canonical_bracket(&alg, &phi, &q, &r, 0).unwrap();
        assert_eq!(b0.value, &q.value * &r.value);
        let b1 = canonical_bracket(&alg, &phi, &q, &r, 1).unwrap();
        let expect = &(&q.value * &alg.derive(&r.value).unwrap()).scale(&Scalar::from(4))
            - &(&alg.derive(&q.value).unwrap() * &r.value).scale(&Scalar::from(6));
        assert_eq!(b1.value, expect);
        let bad_phi = Weighted::new(phi.value.clone(), rat_int(6));
        assert!(canonical_bracket(&alg, &bad_phi, &q, &r, 2).is_err());
    }

    // canonical bracket on M against the standard bracket on series
    #[test]
    fn canonical_matches_series() {
        let (alg, phi, m) = classical_m();
        let (e4, e6) = e4_e6(30);
        let vals = [e4.clone(), e6.clone()];
        let elems = [("Q", 4), ("R", 6)];
        for (a, ka) in elems {
            for (b, kb) in elems {
                let f = Weighted::new(GradedPoly::named(&m, a).unwrap(), rat_int(ka));
                let g = Weighted::new(GradedPoly::named(&m, b).unwrap(), rat_int(kb));
                for n in 0..=3 {
                    let c = canonical_bracket(&alg, &phi, &f, &g, n).unwrap();
                    let fs = Weighted::new(f.value.eval_series(&vals).unwrap(), f.weight.clone());
                    let gs = Weighted::new(g.value.eval_series(&vals).unwrap(), g.weight.clone());
                    let s = rc_bracket(&ThetaAlgebra, &fs, &gs, n).unwrap();
                    assert_eq!(c.value.eval_series(&vals).unwrap(), s.value, "{a},{b},{n}");
                }
            }
        }
    }

    #[test]
    fn identity_suite_on_eisenstein() {
        let (e4, e6) = e4_e6(25);
        let d = delta(&e4, &e6);
        let samples = vec![
            Weighted::new(e4, rat_int(4)),
            Weighted::new(e6, rat_int(6)),
            Weighted::new(d, rat_int(12)),
        ];
        let report = identity_suite(&ThetaAlgebra, &samples, |f, g, n| rc_bracket(&ThetaAlgebra, f, g, n)).unwrap();
        assert!(report.ok(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn equal_weight_odd_vanishes() {
        let (e4, _) = e4_e6(20);
        let f = Weighted::new(e4, rat_int(4));
        for n in [1, 3] {
            assert!(rc_bracket(&ThetaAlgebra, &f, &f, n).unwrap().value.is_zero());
        }
    }

    // the bracket of two modular forms has no E2 component: solve for it in
    // span{E4^a E6^b} + E2*span{E4^a E6^b}
    #[test]
    fn brackets_are_modular() {
        use crate::linalg::solve_columns;
        let order = 30;
        let (e4, e6) = e4_e6(order);
        let e2 = Series::from_coeffs(
            (0..order).map(|n| if n == 0 { Scalar::one() } else { Scalar::from(sigma(n, 1) * -24) }),
            Some(order),
        );
        let basis = |w: i64| -> Vec<Series> {
            let mut out = Vec::new();
            for a in 0..=w / 4 {
                let rest = w - 4 * a;
                if rest >= 0 && rest % 6 == 0 {
                    out.push(&e4.pow(a).unwrap() * &e6.pow(rest / 6).unwrap());
                }
            }
            out
        };
        let cases = [(4, 6, 1), (4, 4, 2), (6, 6, 2), (4, 6, 3)];
        for (k, l, n) in cases {
            let f = Weighted::new(if k == 4 { e4.clone() } else { e6.clone() }, rat_int(k));
            let g = Weighted::new(if l == 4 { e4.clone() } else { e6.clone() }, rat_int(l));
            let b = rc_bracket(&ThetaAlgebra, &f, &g, n).unwrap().value;
            let w = k + l + 2 * n as i64;
            let modular = basis(w);
            let quasi: Vec<Series> = basis(w - 2).iter().map(|s| &e2 * s).collect();
            let cols: Vec<Vec<Scalar>> = modular
                .iter()
                .chain(quasi.iter())
                .map(|s| (0..order).map(|i| s.coeff_at(i).unwrap()).collect())
                .collect();
            let target: Vec<Scalar> = (0..order).map(|i| b.coeff_at(i).unwrap()).collect();
            let x = solve_columns(&cols, &target).unwrap().expect("bracket lies in the span");
            assert!(x[modular.len()..].iter().all(Scalar::is_zero), "E2 component for ({k},{l},{n})");
        }
    }

    // Restricting the standard bracket of the extended system to M gives the
    // canonical bracket of (∂, Φ).
    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn canonical_is_restricted_standard(
            c in prop::collection::vec(-4i64..5, 4),
            phi_c in -3i64..4,
            n in 0usize..4,
        ) {
            let m = GradedAlgebraSpec::rank1(&[("A", rat_int(4)), ("B", rat_int(6))]).unwrap();
            let partial = Derivation::new(
                &m,
                vec![
                    GradedPoly::named(&m, "B").unwrap().scale(&Scalar::from(c[0])),
                    (&GradedPoly::named(&m, "A").unwrap() * &GradedPoly::named(&m, "A").unwrap()).scale(&Scalar::from(c[1])),
                ],
                vec![rat_int(2)],
            ).unwrap();
            let phi = GradedPoly::named(&m, "A").unwrap().scale(&Scalar::from(phi_c));
            let f = &GradedPoly::named(&m, "A").unwrap().pow(3).scale(&Scalar::from(c[2])) + &GradedPoly::named(&m, "B").unwrap().pow(2);
            let g = &GradedPoly::named(&m, "B").unwrap().scale(&Scalar::from(c[3])) + &GradedPoly::zero(&m);
            let fw = Weighted::new(f.clone(), rat_int(12));
            let gw = Weighted::new(g.clone(), rat_int(6));
            let canon = canonical_bracket(&PolyAlgebra::new(partial.clone()), &Weighted::new(phi.clone(), rat_int(4)), &fw, &gw, n).unwrap();
            let sys = extend_algebra(&partial, &phi, "T").unwrap();
            let spec = sys.spec().clone();
            let std = rc_bracket(
                &PolyAlgebra::new(sys.derivation().clone()),
                &Weighted::new(f.transport(&spec).unwrap(), rat_int(12)),
                &Weighted::new(g.transport(&spec).unwrap(), rat_int(6)),
                n,
            ).unwrap();
            prop_assert_eq!(std.value, canon.value.transport(&spec).unwrap());
            let (p2, phi2) = canonical_from_rrc(&rrc_shape_check(sys.derivation(), 0).unwrap()).unwrap();
            prop_assert_eq!(p2, partial);
            prop_assert_eq!(phi2, phi);
        }
    }
}
