//! Small-`r` growth classes of rate functions and the semigroup regimes they imply.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::RateFunction;
use crate::error::{Error, Result};
use crate::scalar::Real;

const EXP_TOL: f64 = 1e-9;

/// Growth of a rate function as `r -> 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Growth {
    Bounded,
    /// `[log(1/r)]^q`
    Log(f64),
    /// `r^-p`
    Poly(f64),
    /// `exp[c r^-p]`
    Exp(f64),
    Unknown,
}

impl Growth {
    fn rank(&self) -> (u8, f64) {
        match *self {
            Growth::Bounded => (0, 0.0),
            Growth::Log(q) => (1, q),
            Growth::Poly(p) => (2, p),
            Growth::Exp(p) => (3, p),
            Growth::Unknown => (4, 0.0),
        }
    }

    /// The faster-growing of two classes.
    pub fn max(self, other: Growth) -> Growth {
        if self == Growth::Unknown || other == Growth::Unknown {
            return Growth::Unknown;
        }
        let (a, b) = (self.rank(), other.rank());
        match a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal)) {
            Ordering::Less => other,
            _ => self,
        }
    }

    /// Class of `(c/r) · g(θ² r² / (a + b r))` for `g` of class `self`.
    fn no_boundary(self) -> Growth {
        match self {
            Growth::Bounded | Growth::Log(_) => Growth::Poly(1.0),
            Growth::Poly(p) => Growth::Poly(2.0 * p + 1.0),
            Growth::Exp(p) => Growth::Exp(2.0 * p),
            Growth::Unknown => Growth::Unknown,
        }
    }
}

impl<T: Real> RateFunction<T> {
    pub fn growth(&self) -> Growth {
        let pos = |x: &T| *x > T::zero();
        match self {
            RateFunction::ExpPower { p, .. } => Growth::Exp(p.f64()),
            RateFunction::Poly { p, .. } | RateFunction::Power { p, .. } => {
                if pos(p) {
                    Growth::Poly(p.f64())
                } else {
                    Growth::Bounded
                }
            }
            RateFunction::LogPower { c2, q, .. } => {
                if pos(c2) && pos(q) {
                    Growth::Log(q.f64())
                } else {
                    Growth::Bounded
                }
            }
            RateFunction::Constant { .. } => Growth::Bounded,
            RateFunction::Tabulated { .. } => Growth::Unknown,
            RateFunction::Scaled { inner, .. } => inner.growth(),
            RateFunction::WithBoundary { v, w, .. } | RateFunction::AlphaWithBoundary { v, w, .. } => {
                v.growth().max(w.growth())
            }
            RateFunction::NoBoundary { v, c0, c2bar, .. } => {
                if *c0 * *c2bar == T::zero() {
                    v.growth()
                } else {
                    v.growth().no_boundary()
                }
            }
            RateFunction::AlphaNoBoundary { v, .. } => v.growth(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", content = "exponent", rename_all = "kebab-case")]
pub enum Regime {
    Hyperbounded,
    Superbounded,
    /// `‖P_t‖_{1→∞}` grows like `exp[λ t^-e]` (exponential growth class) or
    /// `t^-e` (polynomial class) as `t -> 0`.
    Ultrabounded(f64),
    /// Orlicz exponent of the uniform-integrability functional.
    #[serde(rename = "L2-uniformly-integrable")]
    UniformlyIntegrable(f64),
    ExponentialErgodic,
    /// `‖P_t - μ‖_{∞→1} <= exp[c - c' t^e]`
    Subexponential(f64),
    /// `‖P_t - μ‖_{∞→1} <= c t^e`
    Algebraic(f64),
    /// `‖P_t - μ‖_{∞→1} <= c [log(1+t)]^-e`
    Logarithmic(f64),
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Hyperbounded => "hyperbounded",
            Regime::Superbounded => "superbounded",
            Regime::Ultrabounded(_) => "ultrabounded",
            Regime::UniformlyIntegrable(_) => "L2-uniformly-integrable",
            Regime::ExponentialErgodic => "exponential-ergodic",
            Regime::Subexponential(_) => "subexponential",
            Regime::Algebraic(_) => "algebraic",
            Regime::Logarithmic(_) => "logarithmic",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Regime::Ultrabounded(e)
            | Regime::UniformlyIntegrable(e)
            | Regime::Subexponential(e)
            | Regime::Algebraic(e)
            | Regime::Logarithmic(e) => Some(e),
            _ => None,
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.exponent() {
            Some(e) => write!(f, "{}({})", self.name(), e),
            None => f.write_str(self.name()),
        }
    }
}

/// Labels implied by a super and/or weak Poincaré rate. The first entry of
/// each list is the sharpest statement; the rest are its consequences.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub beta: Vec<Regime>,
    pub alpha: Vec<Regime>,
    pub beta_growth: Option<Growth>,
    pub alpha_growth: Option<Growth>,
}

impl RegimeReport {
    pub fn labels(&self) -> Vec<Regime> {
        self.beta.iter().chain(&self.alpha).copied().collect()
    }

    pub fn primary_beta(&self) -> Option<Regime> {
        self.beta.first().copied()
    }

    pub fn primary_alpha(&self) -> Option<Regime> {
        self.alpha.first().copied()
    }

    pub fn has(&self, name: &str) -> bool {
        self.labels().iter().any(|r| r.name() == name)
    }
}

fn beta_regimes(g: Growth) -> Vec<Regime> {
    let chain = |e: f64| vec![Regime::Ultrabounded(e), Regime::Superbounded, Regime::Hyperbounded];
    match g {
        Growth::Exp(p) if (p - 1.0).abs() <= EXP_TOL => vec![Regime::Hyperbounded, Regime::UniformlyIntegrable(1.0)],
        Growth::Exp(p) if p > 1.0 => vec![Regime::UniformlyIntegrable(1.0 / p)],
        Growth::Exp(p) => chain(p / (1.0 - p)),
        Growth::Poly(p) => chain(p),
        Growth::Bounded => chain(0.0),
        Growth::Log(_) => vec![Regime::Superbounded, Regime::Hyperbounded],
        Growth::Unknown => Vec::new(),
    }
}

fn alpha_regimes(g: Growth) -> Vec<Regime> {
    match g {
        Growth::Bounded => vec![Regime::ExponentialErgodic],
        Growth::Log(q) => vec![Regime::Subexponential(1.0 / (1.0 + q))],
        Growth::Poly(p) => vec![Regime::Algebraic(-1.0 / p)],
        Growth::Exp(p) => vec![Regime::Logarithmic(1.0 / p)],
        Growth::Unknown => Vec::new(),
    }
}

/// Reads the regime labels off the growth classes of `beta` and `alpha`.
pub fn classify_regime<T: Real>(
    beta: Option<&RateFunction<T>>,
    alpha: Option<&RateFunction<T>>,
) -> Result<RegimeReport> {
    let bg = beta.map(|b| b.growth());
    let ag = alpha.map(|a| a.growth());
    let report = RegimeReport {
        beta: bg.map(beta_regimes).unwrap_or_default(),
        alpha: ag.map(alpha_regimes).unwrap_or_default(),
        beta_growth: bg,
        alpha_growth: ag,
    };
    if report.beta.is_empty() && report.alpha.is_empty() {
        return Err(Error::Unclassified);
    }
    Ok(report)
}

/// Orlicz exponent `δ` when `β` has class `exp[c r^{-1/δ}]` with `δ ∈ (0, 1]`.
pub fn ui_functional_exponent<T: Real>(beta: &RateFunction<T>) -> Option<f64> {
    match beta.growth() {
        Growth::Exp(p) if p >= 1.0 - EXP_TOL => Some(if (p - 1.0).abs() <= EXP_TOL { 1.0 } else { 1.0 / p }),
        _ => None,
    }
}

/// Interior rate families of the power-potential half-line `V = -|x|^τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTauRates<T> {
    pub beta_v: Option<RateFunction<T>>,
    pub alpha_v: Option<RateFunction<T>>,
}

/// Rate families by `τ` with calibration constant `c`.
pub fn power_tau_rates<T: Real>(tau: T, c: T) -> PowerTauRates<T> {
    let one = T::one();
    if tau > one {
        PowerTauRates {
            beta_v: Some(RateFunction::ExpPower { c, p: tau / (T::lit(2.0) * (tau - one)) }),
            alpha_v: None,
        }
    } else if tau == one {
        PowerTauRates { beta_v: None, alpha_v: Some(RateFunction::Constant { c }) }
    } else {
        PowerTauRates {
            beta_v: None,
            alpha_v: Some(RateFunction::LogPower { c1: T::zero(), c2: c, q: T::lit(4.0) * (one - tau) / tau }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_tau_exponents() {
        let p = |tau: f64| match power_tau_rates(tau, 1.0).beta_v {
            Some(RateFunction::ExpPower { p, .. }) => p,
            other => panic!("{other:?}"),
        };
        assert_eq!(p(2.0), 1.0);
        assert!((p(4.0) - 2.0 / 3.0).abs() < 1e-15);
        match power_tau_rates(0.5, 1.0).alpha_v {
            Some(RateFunction::LogPower { q, .. }) => assert_eq!(q, 4.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(power_tau_rates(1.0, 2.0).alpha_v, Some(RateFunction::Constant { c: 2.0 }));
    }

    #[test]
    fn classifier_table() {
        let b = |p: f64| RateFunction::ExpPower { c: 1.0, p };
        let r = classify_regime(Some(&b(0.75)), None).unwrap();
        assert_eq!(r.primary_beta(), Some(Regime::Ultrabounded(3.0)));
        assert!(r.has("superbounded") && r.has("hyperbounded"));
        let r = classify_regime(Some(&b(1.0)), None).unwrap();
        assert_eq!(r.primary_beta(), Some(Regime::Hyperbounded));
        let r = classify_regime(Some(&b(1.5)), None).unwrap();
        assert_eq!(r.primary_beta(), Some(Regime::UniformlyIntegrable(1.0 / 1.5)));
        let a = RateFunction::LogPower { c1: 0.0, c2: 1.0, q: 4.0 };
        let r = classify_regime::<f64>(None, Some(&a)).unwrap();
        assert_eq!(r.primary_alpha(), Some(Regime::Subexponential(0.2)));
        let r = classify_regime::<f64>(None, Some(&RateFunction::Poly { c: 1.0, p: 2.0 })).unwrap();
        assert_eq!(r.primary_alpha(), Some(Regime::Algebraic(-0.5)));
        let r = classify_regime::<f64>(None, Some(&b(0.5))).unwrap();
        assert_eq!(r.primary_alpha(), Some(Regime::Logarithmic(2.0)));
        let tab = RateFunction::Tabulated { r: vec![0.1, 1.0], values: vec![2.0, 1.0] };
        assert!(matches!(classify_regime(Some(&tab), None), Err(Error::Unclassified)));
    }

    #[test]
    fn composite_classes() {
        let v = RateFunction::ExpPower { c: 1.0, p: 0.75 };
        let e1 = RateFunction::WithBoundary {
            v: Box::new(v.clone()),
            w: Box::new(RateFunction::constant(1.0)),
            theta: 0.5,
            delta: 1.0,
        };
        assert_eq!(e1.growth(), Growth::Exp(0.75));
        let b1 = RateFunction::NoBoundary {
            v: Box::new(RateFunction::Poly { c: 1.0, p: 0.5 }),
            theta: 0.5,
            c0: 0.5,
            c1bar: 2.0,
            c2bar: 1.0,
        };
        assert_eq!(b1.growth(), Growth::Poly(2.0));
        let b1e = RateFunction::NoBoundary { v: Box::new(v), theta: 0.5, c0: 0.5, c1bar: 2.0, c2bar: 1.0 };
        assert_eq!(b1e.growth(), Growth::Exp(1.5));
        assert_eq!(Growth::Log(4.0).max(Growth::Bounded), Growth::Log(4.0));
        assert_eq!(Growth::Poly(1.0).max(Growth::Exp(0.1)), Growth::Exp(0.1));
    }

    #[test]
    fn ui_exponent() {
        assert_eq!(ui_functional_exponent(&RateFunction::ExpPower { c: 1.0, p: 2.0 }), Some(0.5));
        let tau = 1.5;
        let b = power_tau_rates(tau, 1.0).beta_v.unwrap();
        assert!((ui_functional_exponent(&b).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(ui_functional_exponent(&RateFunction::Poly { c: 1.0, p: 1.0 }), None);
    }

    #[test]
    fn ultra_implies_weaker_labels() {
        for g in [Growth::Exp(0.5), Growth::Poly(1.0), Growth::Bounded] {
            let labels = beta_regimes(g);
            if labels.iter().any(|r| r.name() == "ultrabounded") {
                assert!(labels.contains(&Regime::Superbounded) && labels.contains(&Regime::Hyperbounded));
            }
        }
    }
}
