//! Gauss hypergeometric series, the Frobenius logarithmic partner for
//! `γ = 1`, the canonical nome, and the Ohyama vector field.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::coeff::{rat, rat_int, rational_to_string, Rational, Scalar};
use crate::graded::{Derivation, GradedAlgebraSpec, GradedError, GradedPoly};
use crate::series::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergeomError {
    #[error("γ = {0} is a nonpositive integer")]
    Pole(String),
    #[error("the logarithmic partner is only implemented for γ = 1, got {0}")]
    GammaNotOne(String),
    #[error("not hyperbolic: {k}/{n} + {r}/{m} >= 1")]
    NotHyperbolic { n: i64, m: i64, k: i64, r: i64 },
    #[error("signature entries must be positive")]
    NonPositive,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

pub type Result<T> = std::result::Result<T, HypergeomError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HgParams {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
}

impl HgParams {
    pub fn new(alpha: Rational, beta: Rational, gamma: Rational) -> Self {
        HgParams { alpha, beta, gamma }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QFormParams {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

/// `ŷ = y0·log z + h`.
#[derive(Debug, Clone)]
pub struct LogSolution {
    pub params: HgParams,
    pub y0: Series,
    pub h: Series,
}

/// `F(α,β;γ;z) = sum (α)_n(β)_n/((γ)_n n!) z^n + O(z^order)`.
pub fn hg_series(p: &HgParams, order: i64) -> Result<Series> {
    if !p.gamma.is_positive() && p.gamma.is_integer() {
        return Err(HypergeomError::Pole(rational_to_string(&p.gamma)));
    }
    let mut c = Rational::one();
    let mut coeffs = Vec::with_capacity(order.max(0) as usize);
    for n in 0..order {
        coeffs.push(Scalar::Rat(c.clone()));
        let nn = rat_int(n);
        c = c * (&p.alpha + &nn) * (&p.beta + &nn) / ((&p.gamma + &nn) * (&nn + Rational::one()));
    }
    Ok(Series::from_coeffs(coeffs, Some(order)))
}

fn z() -> Series {
    Series::var()
}

fn one() -> Series {
    Series::one()
}

/// `z(1−z)y'' + (γ − (α+β+1)z)y' − αβ y`.
pub fn hgde_residual(p: &HgParams, y: &Series) -> Series {
    let d1 = y.derivative();
    let d2 = d1.derivative();
    let zz = &z() * &(&one() - &z());
    let lin = &Series::constant(Scalar::Rat(p.gamma.clone()))
        - &z().scale_rational(&(&p.alpha + &p.beta + Rational::one()));
    &(&(&zz * &d2) + &(&lin * &d1)) - &y.scale_rational(&(&p.alpha * &p.beta))
}

/// `(α, β, 1)` with `α = (1 + r/m − k/n)/2`, `β = (1 − k/n − r/m)/2`.
pub fn triangle_params(n: i64, m: i64, k: i64, r: i64) -> Result<HgParams> {
    if n <= 0 || m <= 0 || k <= 0 || r <= 0 {
        return Err(HypergeomError::NonPositive);
    }
    let kn = rat(k, n);
    let rm = rat(r, m);
    if &kn + &rm >= Rational::one() {
        return Err(HypergeomError::NotHyperbolic { n, m, k, r });
    }
    let half = rat(1, 2);
    Ok(HgParams {
        alpha: &half * (Rational::one() + &rm - &kn),
        beta: &half * (Rational::one() - &kn - &rm),
        gamma: Rational::one(),
    })
}

pub fn qform(p: &HgParams) -> QFormParams {
    let g = &p.gamma;
    let s = &p.alpha + &p.beta - g;
    QFormParams {
        a: g * (g - rat_int(2)) / rat_int(4),
        b: (&s * &s - Rational::one()) / rat_int(4),
        c: (g * (&s + Rational::one()) - rat_int(2) * &p.alpha * &p.beta) / rat_int(2),
    }
}

/// Exponents `(γ/2, (α+β−γ+1)/2)` of `z` and `1−z` in the Q-form solution.
pub fn y_transform_exponents(p: &HgParams) -> (Rational, Rational) {
    (&p.gamma / rat_int(2), (&p.alpha + &p.beta - &p.gamma + Rational::one()) / rat_int(2))
}

/// Square of the Q-form solution `y = z^{γ/2}(1−z)^{(α+β−γ+1)/2} F`.
pub fn qform_y_squared(p: &HgParams, f: &Series) -> Result<Series> {
    let (ez, e1) = y_transform_exponents(p);
    let prec = f.prec().cloned().unwrap_or_else(|| rat_int(64));
    let one_minus = (&one() - &z()).truncate(prec);
    let factor = one_minus.pow_rational(&(e1 * rat_int(2)))?;
    Ok((&(f * f) * &factor).shift(&(ez * rat_int(2))))
}

/// Frobenius pair at `z = 0` for `γ = 1`: `y0 = F`, and
/// `h_n = y0_n · sum_{j<n} (1/(α+j) + 1/(β+j) − 2/(1+j))`.
pub fn frobenius_pair(p: &HgParams, order: i64) -> Result<LogSolution> {
    if !p.gamma.is_one() {
        return Err(HypergeomError::GammaNotOne(rational_to_string(&p.gamma)));
    }
    let y0 = hg_series(p, order)?;
    let mut acc = Rational::zero();
    let mut h = Vec::with_capacity(order.max(0) as usize);
    for n in 0..order {
        h.push(y0.coeff_at(n)?.scale(&acc));
        let j = rat_int(n);
        let one = Rational::one();
        for base in [&p.alpha, &p.beta] {
            let d = base + &j;
            if d.is_zero() {
                return Err(HypergeomError::Pole(rational_to_string(base)));
            }
            acc += d.recip();
        }
        acc -= rat_int(2) / (&j + &one);
    }
    Ok(LogSolution { params: p.clone(), y0, h: Series::from_coeffs(h, Some(order)) })
}

/// Log-free part of the ODE applied to `y0 log z + h`:
/// `L[h] + 2(1−z) y0' − (α+β) y0`, which must vanish when `L[y0] = 0`.
pub fn log_solution_residual(sol: &LogSolution) -> Series {
    let p = &sol.params;
    let lh = hgde_residual(p, &sol.h);
    let extra = &(&(&one() - &z()) * &sol.y0.derivative()).scale(&Scalar::from(2))
        - &sol.y0.scale_rational(&(&p.alpha + &p.beta));
    &lh + &extra
}

/// `q̃ = z·exp(h/y0)`.
pub fn nome(sol: &LogSolution) -> Result<Series> {
    let ratio = sol.h.div(&sol.y0)?;
    Ok(&z() * &ratio.exp()?)
}

/// The Ohyama field on `X, Y, Z` (weights 2):
/// `dX = X² + S`, `dY = Y² + S`, `dZ = Z² + S` with
/// `S = a(X−Y)² + b(X−Z)² + c(X−Y)(X−Z)`.
pub fn ohyama_field(qp: &QFormParams) -> Result<Derivation> {
    let spec = GradedAlgebraSpec::rank1(&[("X", rat_int(2)), ("Y", rat_int(2)), ("Z", rat_int(2))])?;
    let x = GradedPoly::gen(&spec, 0);
    let y = GradedPoly::gen(&spec, 1);
    let zz = GradedPoly::gen(&spec, 2);
    let xy = &x - &y;
    let xz = &x - &zz;
    let s = &(&(&xy * &xy).scale_rational(&qp.a) + &(&xz * &xz).scale_rational(&qp.b)) + &(&xy * &xz).scale_rational(&qp.c);
    let images = vec![&(&x * &x) + &s, &(&y * &y) + &s, &(&zz * &zz) + &s];
    Ok(Derivation::new(&spec, images, vec![rat_int(2)])?)
}

/// `W = 2X∂X + 2Y∂Y + 2Z∂Z` and `δ = −∂X − ∂Y − ∂Z` for the Ohyama field.
pub fn ohyama_sl2_operators(d: &Derivation) -> Result<(Derivation, Derivation)> {
    let spec = d.spec();
    let w = Derivation::new(spec, (0..3).map(|i| GradedPoly::gen(spec, i).scale(&Scalar::from(2))).collect(), vec![rat_int(0)])?;
    let delta = Derivation::new(spec, vec![GradedPoly::constant(spec, -Scalar::one()); 3], vec![rat_int(-2)])?;
    Ok((w, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::sl2_check;
    use proptest::prelude::*;

    fn classical() -> HgParams {
        HgParams::new(rat(5, 12), rat(1, 12), Rational::one())
    }

    #[test]
    fn first_terms_and_geometric() {
        let p = classical();
        let f = hg_series(&p, 10).unwrap();
        assert_eq!(f.coeff_at(1).unwrap(), Scalar::Rat(rat(5, 144)));
        let g = hg_series(&HgParams::new(rat_int(1), rat_int(1), rat_int(1)), 12).unwrap();
        assert!(g.identical(&Series::from_coeffs(vec![Scalar::one(); 12], Some(12))));
        assert!(hg_series(&HgParams::new(rat_int(1), rat_int(1), rat_int(-2)), 5).is_err());
    }

    #[test]
    fn ode_residual_vanishes() {
        for p in [classical(), HgParams::new(rat(1, 3), rat(2, 7), rat(3, 2))] {
            let f = hg_series(&p, 30).unwrap();
            let res = hgde_residual(&p, &f);
            assert!(res.is_zero());
            assert!(res.prec().unwrap() >= &rat_int(28));
        }
    }

    #[test]
    fn triangle_parameter_values() {
        assert_eq!(triangle_params(2, 3, 1, 1).unwrap(), HgParams::new(rat(5, 12), rat(1, 12), Rational::one()));
        assert_eq!(triangle_params(3, 3, 1, 1).unwrap(), HgParams::new(rat(1, 2), rat(1, 6), Rational::one()));
        assert_eq!(triangle_params(2, 5, 1, 2).unwrap(), HgParams::new(rat(9, 20), rat(1, 20), Rational::one()));
        assert!(triangle_params(2, 4, 1, 2).is_err());
    }

    #[test]
    fn qform_values() {
        let q = qform(&classical());
        assert_eq!(q.a, rat(-1, 4));
        // ((1/2 − 1)^2 − 1)/4
        assert_eq!(q.b, rat(-3, 16));
        assert_eq!(y_transform_exponents(&classical()), (rat(1, 2), rat(1, 4)));
    }

    // oracle: plug y0 log z + h into the ODE and solve the log-free part
    // order by order, (n+1)^2 h_{n+1} − (n+α)(n+β) h_n = rhs_n, with rhs
    // from 2(1−z) y0' − (α+β) y0 moved across
    fn h_oracle(p: &HgParams, order: usize) -> Vec<Rational> {
        let y: Vec<Rational> = {
            let mut v = vec![Rational::one()];
            for n in 0..order as i64 {
                let last = v.last().unwrap().clone();
                let nn = rat_int(n);
                v.push(last * (&p.alpha + &nn) * (&p.beta + &nn) / ((&nn + Rational::one()) * (&nn + Rational::one())));
            }
            v
        };
        let mut h = vec![Rational::zero(); order];
        for n in 0..order - 1 {
            let nn = rat_int(n as i64);
            // coefficient of z^n in 2(1−z)y0' − (α+β)y0
            let g = rat_int(2) * (&nn + Rational::one()) * &y[n + 1] - rat_int(2) * &nn * &y[n] - (&p.alpha + &p.beta) * &y[n];
            let rhs = (&nn + &p.alpha) * (&nn + &p.beta) * &h[n] - g;
            h[n + 1] = rhs / ((&nn + Rational::one()) * (&nn + Rational::one()));
        }
        h
    }

    #[test]
    fn frobenius_matches_oracle() {
        let p = classical();
        let sol = frobenius_pair(&p, 20).unwrap();
        assert_eq!(sol.h.coeff_at(1).unwrap(), Scalar::Rat(rat(31, 72)));
        assert!(sol.h.coeff_at(0).unwrap().is_zero());
        let oracle = h_oracle(&p, 20);
        for (n, o) in oracle.iter().enumerate() {
            assert_eq!(sol.h.coeff_at(n as i64).unwrap(), Scalar::Rat(o.clone()));
        }
        assert!(log_solution_residual(&sol).is_zero());
        assert!(frobenius_pair(&HgParams::new(rat(1, 2), rat(1, 2), rat(1, 2)), 5).is_err());
    }

    #[test]
    fn nome_shape() {
        let sol = frobenius_pair(&classical(), 15).unwrap();
        let q = nome(&sol).unwrap();
        assert_eq!(q.valuation(), Some(Rational::one()));
        assert_eq!(q.coeff_at(1).unwrap(), Scalar::one());
        assert_eq!(q.coeff_at(2).unwrap(), Scalar::Rat(rat(31, 72)));
        let back = q.revert().unwrap().compose(&q).unwrap();
        assert_eq!(back, Series::var().truncate_int(15));
    }

    #[test]
    fn ohyama_structure() {
        let d = ohyama_field(&qform(&classical())).unwrap();
        let spec = d.spec().clone();
        let parts: Vec<GradedPoly> = (0..3)
            .map(|i| {
                let g = GradedPoly::gen(&spec, i);
                d.image(i) - &(&g * &g)
            })
            .collect();
        assert_eq!(parts[0], parts[1]);
        assert_eq!(parts[1], parts[2]);
        let (w, delta) = ohyama_sl2_operators(&d).unwrap();
        assert!(sl2_check(&d, &w, &delta).unwrap().ok());
        let trivial = ohyama_field(&QFormParams { a: Rational::zero(), b: Rational::zero(), c: Rational::zero() }).unwrap();
        assert_eq!(trivial.image(0), &GradedPoly::parse(&spec, "X^2").unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn params_sum_and_difference(n in 2i64..9, m in 2i64..12, k in 1i64..8, r in 1i64..11) {
            prop_assume!(rat(k, n) + rat(r, m) < Rational::one());
            let p = triangle_params(n, m, k, r).unwrap();
            prop_assert_eq!(&p.alpha + &p.beta, Rational::one() - rat(k, n));
            prop_assert_eq!(&p.alpha - &p.beta, rat(r, m));
            let big_n = n * m - m * k - n * r;
            prop_assert_eq!(p.alpha.clone(), rat(big_n + 2 * n * r, 2 * m * n));
            prop_assert_eq!(p.beta.clone(), rat(big_n, 2 * m * n));
        }
    }
}
