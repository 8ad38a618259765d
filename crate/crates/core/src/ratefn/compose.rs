//! Rates of the sticky form assembled from interior and boundary rates.

use serde::{Deserialize, Serialize};

use super::{Constants, RateFunction};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which additive constant the boundary-diffusion weak Poincaré composition uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaVariant {
    /// `((1-θ)/θ) C0² C2²`
    #[default]
    Primed,
    /// `((1-θ)/θ) C0² C1²`
    Literal,
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if theta > T::zero() && theta < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidRate(format!("theta = {} outside (0, 1)", theta.f64())))
    }
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if delta > T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRate("boundary diffusion weight must be positive".into()))
    }
}

/// `r ↦ max{βV(r)/θ, βW(δr)/(1-θ)}`.
pub fn compose_beta_with_boundary<T: Real>(
    beta_v: &RateFunction<T>,
    beta_w: &RateFunction<T>,
    theta: T,
    delta: T,
) -> Result<RateFunction<T>> {
    check_theta(theta)?;
    check_delta(delta)?;
    if let (RateFunction::Constant { c: a }, RateFunction::Constant { c: b }) = (beta_v, beta_w) {
        return Ok(RateFunction::Constant { c: (*a / theta).max(*b / (T::one() - theta)) });
    }
    Ok(RateFunction::WithBoundary { v: Box::new(beta_v.clone()), w: Box::new(beta_w.clone()), theta, delta })
}

/// `r ↦ max{(1 + C0²C1²) αV(s) + ((1-θ)/θ) C0² C2², αW(s)/δ}` with
/// `s = r / (4 + 4θ C0² C1²)`.
pub fn compose_alpha_with_boundary<T: Real>(
    alpha_v: &RateFunction<T>,
    alpha_w: &RateFunction<T>,
    consts: &Constants<T>,
    delta: T,
    variant: AlphaVariant,
) -> Result<RateFunction<T>> {
    let theta = consts.theta;
    check_theta(theta)?;
    check_delta(delta)?;
    let (c0, c1, c2) = (consts.c0, consts.c1, consts.c2);
    if !(c0.is_finite() && c1.is_finite() && c2.is_finite()) {
        return Err(Error::MissingConstants("C0, C1, C2"));
    }
    let literal = variant == AlphaVariant::Literal;
    let composed = RateFunction::AlphaWithBoundary {
        v: Box::new(alpha_v.clone()),
        w: Box::new(alpha_w.clone()),
        theta,
        c0,
        c1,
        c2,
        delta,
        literal,
    };
    if let (RateFunction::Constant { .. }, RateFunction::Constant { .. }) = (alpha_v, alpha_w) {
        return Ok(RateFunction::Constant { c: composed.eval(T::one()) });
    }
    Ok(composed)
}

/// The no-boundary-diffusion super Poincaré composition:
/// `(2C0²C̄2²/(θr) + C0C̄1) · βV(θ²r² / (4C0²C̄2² + 2θC0C̄1 r))`.
pub fn compose_beta_no_boundary<T: Real>(beta_v: &RateFunction<T>, consts: &Constants<T>) -> Result<RateFunction<T>> {
    check_theta(consts.theta)?;
    let (Some(c1bar), Some(c2bar)) = (consts.c1bar, consts.c2bar) else {
        return Err(Error::MissingConstants("C1bar, C2bar"));
    };
    Ok(RateFunction::NoBoundary { v: Box::new(beta_v.clone()), theta: consts.theta, c0: consts.c0, c1bar, c2bar })
}

/// `r ↦ (A/θ) αV(r/(4A)) + B/θ`.
pub fn compose_alpha_no_boundary<T: Real>(alpha_v: &RateFunction<T>, consts: &Constants<T>) -> Result<RateFunction<T>> {
    let theta = consts.theta;
    check_theta(theta)?;
    let (Some(a), Some(b)) = (consts.a, consts.b) else {
        return Err(Error::MissingConstants("A, B"));
    };
    if let RateFunction::Constant { c } = alpha_v {
        return Ok(RateFunction::Constant { c: a / theta * *c + b / theta });
    }
    Ok(RateFunction::AlphaNoBoundary { v: Box::new(alpha_v.clone()), theta, a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ex41b() -> Constants<f64> {
        Constants::new(0.5, 0.5, 2.0, (1.0f64 / 3.0).sqrt()).with_bars(2.0, 1.0)
    }

    #[test]
    fn e1_constants_and_direct_value() {
        let one = RateFunction::constant(1.0);
        assert_eq!(compose_beta_with_boundary(&one, &one, 0.5, 1.0).unwrap(), RateFunction::constant(2.0));
        let v = RateFunction::Tabulated { r: vec![0.05, 0.1, 1.0], values: vec![9.0, 5.0, 1.0] };
        let w = RateFunction::Tabulated { r: vec![0.05, 0.1, 1.0], values: vec![8.0, 4.0, 1.0] };
        let b = compose_beta_with_boundary(&v, &w, 0.25, 0.5).unwrap();
        assert_relative_eq!(b.eval(0.1), 20.0, epsilon = 1e-12);
        let e = RateFunction::ExpPower { c: 0.7, p: 1.0 };
        let be = compose_beta_with_boundary(&e, &e, 0.5, 1.0).unwrap();
        assert_relative_eq!(be.eval(0.3), 2.0 * e.eval(0.3), max_relative = 1e-14);
        assert!(compose_beta_with_boundary(&one, &one, 1.0, 1.0).is_err());
        assert!(compose_beta_with_boundary(&one, &one, 0.5, 0.0).is_err());
    }

    #[test]
    fn e2_cases() {
        let one = RateFunction::constant(1.0);
        let c = Constants::new(0.5, 1.0, 1.0, 1.0);
        assert_eq!(
            compose_alpha_with_boundary(&one, &one, &c, 1.0, AlphaVariant::Primed).unwrap(),
            RateFunction::constant(3.0)
        );
        let v = RateFunction::<f64>::LogPower { c1: 0.0, c2: 1.0, q: 4.0 };
        let zero = Constants::new(0.5, 0.0, 3.0, 7.0);
        let a = compose_alpha_with_boundary(&v, &v, &zero, 2.0, AlphaVariant::Primed).unwrap();
        assert_relative_eq!(a.eval(0.2), v.eval(0.05).max(v.eval(0.05) / 2.0), max_relative = 1e-14);

        let k = ex41b();
        let a = compose_alpha_with_boundary(&v, &v, &k, 1.0, AlphaVariant::Primed).unwrap();
        let s: f64 = 0.1 / 6.0;
        let l4 = (1.0 + 1.0 / s).ln().powi(4);
        assert_relative_eq!(a.eval(0.1), (2.0 * l4 + 0.25 / 3.0).max(l4), max_relative = 1e-13);
        let lit = compose_alpha_with_boundary(&v, &v, &k, 1.0, AlphaVariant::Literal).unwrap();
        assert_relative_eq!(lit.eval(0.1), 2.0 * l4 + 0.25 * 4.0, max_relative = 1e-13);
    }

    #[test]
    fn b1_hand_value() {
        let v = RateFunction::Power { c: 1.0, p: 0.5 };
        let b = compose_beta_no_boundary(&v, &ex41b()).unwrap();
        assert_relative_eq!(b.eval(1.0), 2.0 * v.eval(0.125), max_relative = 1e-14);
        for &r in &[0.01, 0.3, 7.0] {
            let expected = (1.0 / r + 1.0) * v.eval(0.25 * r * r / (1.0 + r));
            assert_relative_eq!(b.eval(r), expected, max_relative = 1e-13);
        }
        let bc = compose_beta_no_boundary(&RateFunction::constant(1.0), &ex41b()).unwrap();
        assert_relative_eq!(bc.eval(0.01), 101.0, max_relative = 1e-13);
        // large r: prefactor tends to C0 C̄1 = 1
        assert_relative_eq!(bc.eval(1e9), 1.0, max_relative = 1e-8);
        assert!(matches!(
            compose_beta_no_boundary(&v, &Constants::new(0.5, 0.5, 2.0, 0.5)),
            Err(Error::MissingConstants(_))
        ));
    }

    #[test]
    fn b2_cases() {
        let v = RateFunction::LogPower { c1: 0.0, c2: 1.0, q: 4.0 };
        let a = compose_alpha_no_boundary(&v, &ex41b()).unwrap();
        for &r in &[0.01, 0.2, 0.9] {
            assert_relative_eq!(a.eval(r), 2.875 * v.eval(r / 5.75) + 13.0 / 12.0, max_relative = 1e-12);
        }
        let z = compose_alpha_no_boundary(&RateFunction::constant(0.0), &ex41b()).unwrap();
        assert_eq!(z, RateFunction::constant(13.0 / 12.0));
        // theta -> 1 with fixed constants
        let near = Constants::new(1.0 - 1e-12, 0.5, 2.0, 1.0).with_bars(2.0, 1.0);
        let b = compose_alpha_no_boundary(&v, &near).unwrap();
        assert_relative_eq!(b.eval(0.3), v.eval(0.3 / 4.0), max_relative = 1e-9);
    }
}
