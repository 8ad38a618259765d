//! Rate functions for super and weak Poincaré inequalities.
//!
//! A [`RateFunction`] is a non-increasing map `(0, inf) -> (0, inf)`. Base
//! families are closed-form; the composite variants record how a rate for the
//! sticky form was assembled from interior and boundary rates so that the
//! small-`r` growth class can be read off without sampling.

mod compose;
mod constants;
mod regime;
mod transforms;

pub use compose::{
    compose_alpha_no_boundary, compose_alpha_with_boundary, compose_beta_no_boundary, compose_beta_with_boundary,
    AlphaVariant,
};
pub use constants::{constants_from_h, Constants};
pub use regime::{
    classify_regime, power_tau_rates, ui_functional_exponent, Growth, PowerTauRates, Regime, RegimeReport,
};
pub use transforms::{
    alpha_from_xi, alpha_from_xi_at, beta_from_phi, beta_from_phi_at, gamma_tail, psi_ultra, tail_bound, xi_from_alpha,
    PsiResult, PsiTransform, Table,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bisect_first, log_grid, BISECT_TOL};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum RateFunction<T> {
    /// `exp[c (1 + r^-p)]`
    ExpPower {
        c: T,
        p: T,
    },
    /// `c (1 ∧ r)^-p`
    Poly {
        c: T,
        p: T,
    },
    /// `c r^-p` on all of `(0, inf)`
    Power {
        c: T,
        p: T,
    },
    /// `c1 + c2 [log(1 + 1/r)]^q`
    LogPower {
        c1: T,
        c2: T,
        q: T,
    },
    Constant {
        c: T,
    },
    /// Log-log interpolation of `values` at increasing `r`, held constant
    /// outside the table.
    Tabulated {
        r: Vec<T>,
        values: Vec<T>,
    },
    /// `factor · inner(r)`
    Scaled {
        factor: T,
        inner: Box<RateFunction<T>>,
    },
    /// `max{v(r)/θ, w(δ r)/(1-θ)}`
    WithBoundary {
        v: Box<RateFunction<T>>,
        w: Box<RateFunction<T>>,
        theta: T,
        delta: T,
    },
    /// `max{(1 + C0²C1²) v(s) + ((1-θ)/θ) C0² K², w(s)/δ}` with
    /// `s = r / (4 + 4θ C0²C1²)`; `K = C2`, or `K = C1` when `literal`.
    AlphaWithBoundary {
        v: Box<RateFunction<T>>,
        w: Box<RateFunction<T>>,
        theta: T,
        c0: T,
        c1: T,
        c2: T,
        delta: T,
        literal: bool,
    },
    /// `(2C0²C̄2²/(θr) + C0C̄1) · v(θ²r² / (4C0²C̄2² + 2θC0C̄1 r))`
    NoBoundary {
        v: Box<RateFunction<T>>,
        theta: T,
        c0: T,
        c1bar: T,
        c2bar: T,
    },
    /// `(A/θ) v(r/(4A)) + B/θ`
    AlphaNoBoundary {
        v: Box<RateFunction<T>>,
        theta: T,
        a: T,
        b: T,
    },
}

/// `ln(e^{ln_x} + b)` without overflow.
fn ln_add<T: Real>(ln_x: T, b: T) -> T {
    if b <= T::zero() {
        return ln_x;
    }
    if ln_x == -T::infinity() {
        return b.ln();
    }
    let lb = b.ln();
    let (hi, lo) = if ln_x > lb { (ln_x, lb) } else { (lb, ln_x) };
    hi + (lo - hi).exp().ln_1p()
}

impl<T: Real> RateFunction<T> {
    pub fn constant(c: T) -> Self {
        Self::Constant { c }
    }

    pub fn scaled(self, factor: T) -> Self {
        match self {
            RateFunction::Constant { c } => RateFunction::Constant { c: c * factor },
            other => RateFunction::Scaled { factor, inner: Box::new(other) },
        }
    }

    fn b1_argument(r: T, theta: T, c0: T, c1bar: T, c2bar: T) -> T {
        let den = T::lit(4.0) * c0 * c0 * c2bar * c2bar + T::lit(2.0) * theta * c0 * c1bar * r;
        if den == T::zero() {
            T::infinity()
        } else {
            theta * theta * r * r / den
        }
    }

    fn e2_scale(theta: T, c0: T, c1: T) -> T {
        T::lit(4.0) + T::lit(4.0) * theta * c0 * c0 * c1 * c1
    }

    fn e2_additive(theta: T, c0: T, c1: T, c2: T, literal: bool) -> T {
        let k = if literal { c1 } else { c2 };
        (T::one() - theta) / theta * c0 * c0 * k * k
    }

    fn tab_eval(r: &[T], values: &[T], x: T) -> T {
        let n = r.len();
        if x <= r[0] {
            return values[0];
        }
        if x >= r[n - 1] {
            return values[n - 1];
        }
        let k = r.partition_point(|&ri| ri <= x).clamp(1, n - 1) - 1;
        let (a, b) = (values[k], values[k + 1]);
        if !a.is_finite() || !b.is_finite() {
            return a.max(b);
        }
        let s = (x.ln() - r[k].ln()) / (r[k + 1].ln() - r[k].ln());
        (a.ln() + s * (b.ln() - a.ln())).exp()
    }

    /// Value at `r > 0`. May be `+inf` when the value overflows.
    pub fn eval(&self, r: T) -> T {
        let one = T::one();
        match self {
            RateFunction::ExpPower { c, p } => (*c * (one + r.powf(-*p))).exp(),
            RateFunction::Poly { c, p } => *c * r.min(one).powf(-*p),
            RateFunction::Power { c, p } => *c * r.powf(-*p),
            RateFunction::LogPower { c1, c2, q } => *c1 + *c2 * (one / r).ln_1p().powf(*q),
            RateFunction::Constant { c } => *c,
            RateFunction::Tabulated { r: rs, values } => Self::tab_eval(rs, values, r),
            RateFunction::Scaled { factor, inner } => *factor * inner.eval(r),
            RateFunction::WithBoundary { v, w, theta, delta } => {
                (v.eval(r) / *theta).max(w.eval(*delta * r) / (one - *theta))
            }
            RateFunction::AlphaWithBoundary { v, w, theta, c0, c1, c2, delta, literal } => {
                let s = r / Self::e2_scale(*theta, *c0, *c1);
                let add = Self::e2_additive(*theta, *c0, *c1, *c2, *literal);
                ((one + *c0 * *c0 * *c1 * *c1) * v.eval(s) + add).max(w.eval(s) / *delta)
            }
            RateFunction::NoBoundary { v, theta, c0, c1bar, c2bar } => {
                let pref = T::lit(2.0) * *c0 * *c0 * *c2bar * *c2bar / (*theta * r) + *c0 * *c1bar;
                let arg = Self::b1_argument(r, *theta, *c0, *c1bar, *c2bar);
                let inner = if arg.is_finite() { v.eval(arg) } else { v.infimum() };
                pref * inner
            }
            RateFunction::AlphaNoBoundary { v, theta, a, b } => {
                *a / *theta * v.eval(r / (T::lit(4.0) * *a)) + *b / *theta
            }
        }
    }

    /// `ln` of the value, computed without forming overflowing intermediates.
    pub fn ln_eval(&self, r: T) -> T {
        let one = T::one();
        match self {
            RateFunction::ExpPower { c, p } => *c * (one + r.powf(-*p)),
            RateFunction::Poly { c, p } => c.ln() - *p * r.min(one).ln(),
            RateFunction::Power { c, p } => c.ln() - *p * r.ln(),
            RateFunction::Constant { c } => c.ln(),
            RateFunction::Scaled { factor, inner } => factor.ln() + inner.ln_eval(r),
            RateFunction::WithBoundary { v, w, theta, delta } => {
                (v.ln_eval(r) - theta.ln()).max(w.ln_eval(*delta * r) - (one - *theta).ln())
            }
            RateFunction::AlphaWithBoundary { v, w, theta, c0, c1, c2, delta, literal } => {
                let s = r / Self::e2_scale(*theta, *c0, *c1);
                let add = Self::e2_additive(*theta, *c0, *c1, *c2, *literal);
                let lv = ln_add((one + *c0 * *c0 * *c1 * *c1).ln() + v.ln_eval(s), add);
                lv.max(w.ln_eval(s) - delta.ln())
            }
            RateFunction::NoBoundary { v, theta, c0, c1bar, c2bar } => {
                let pref = T::lit(2.0) * *c0 * *c0 * *c2bar * *c2bar / (*theta * r) + *c0 * *c1bar;
                let arg = Self::b1_argument(r, *theta, *c0, *c1bar, *c2bar);
                let inner = if arg.is_finite() { v.ln_eval(arg) } else { v.infimum().ln() };
                pref.ln() + inner
            }
            RateFunction::AlphaNoBoundary { v, theta, a, b } => {
                ln_add((*a / *theta).ln() + v.ln_eval(r / (T::lit(4.0) * *a)), *b / *theta)
            }
            RateFunction::LogPower { .. } | RateFunction::Tabulated { .. } => self.eval(r).ln(),
        }
    }

    /// `lim_{r -> inf}` of the rate, i.e. its infimum.
    pub fn infimum(&self) -> T {
        let one = T::one();
        match self {
            RateFunction::ExpPower { c, .. } => c.exp(),
            RateFunction::Poly { c, .. } | RateFunction::Constant { c } => *c,
            RateFunction::Power { .. } => T::zero(),
            RateFunction::LogPower { c1, .. } => *c1,
            RateFunction::Tabulated { values, .. } => values[values.len() - 1],
            RateFunction::Scaled { factor, inner } => *factor * inner.infimum(),
            RateFunction::WithBoundary { v, w, theta, .. } => (v.infimum() / *theta).max(w.infimum() / (one - *theta)),
            RateFunction::AlphaWithBoundary { v, w, theta, c0, c1, c2, delta, literal } => {
                let add = Self::e2_additive(*theta, *c0, *c1, *c2, *literal);
                ((one + *c0 * *c0 * *c1 * *c1) * v.infimum() + add).max(w.infimum() / *delta)
            }
            RateFunction::NoBoundary { v, c0, c1bar, .. } => *c0 * *c1bar * v.infimum(),
            RateFunction::AlphaNoBoundary { v, theta, a, b } => *a / *theta * v.infimum() + *b / *theta,
        }
    }

    /// `inf{r > 0 : ln rate(r) <= level}`; `+inf` when the level is below the
    /// infimum and `0` when every `r` qualifies.
    pub fn inverse_ln(&self, level: T) -> T {
        let inf = self.infimum();
        if inf > T::zero() && level < inf.ln() {
            return T::infinity();
        }
        let lim = T::max_ln();
        if self.ln_eval((-lim).exp()) <= level {
            return T::zero();
        }
        if self.ln_eval(lim.exp()) > level {
            return T::infinity();
        }
        bisect_first(|u| self.ln_eval(u.exp()) <= level, -lim, lim, T::lit(BISECT_TOL)).exp()
    }

    /// `inf{r > 0 : rate(r) <= u}`.
    pub fn inverse(&self, u: T) -> T {
        if u <= T::zero() {
            return T::infinity();
        }
        self.inverse_ln(u.ln())
    }

    /// Checks positivity and monotonicity on a log grid `[1e-6, 1e3]`.
    pub fn validate(&self) -> Result<()> {
        if let RateFunction::Tabulated { r, values } = self {
            if r.len() < 2 || r.len() != values.len() || r.windows(2).any(|w| !(w[1] > w[0])) || !(r[0] > T::zero()) {
                return Err(Error::InvalidRate("table needs increasing positive r and matching values".into()));
            }
        }
        let grid = log_grid(T::lit(1e-6), T::lit(1e3), 1000);
        let mut prev = T::infinity();
        for r in grid {
            let v = self.eval(r);
            if !(v > T::zero()) {
                return Err(Error::InvalidRate(format!("value {} at r = {}", v.f64(), r.f64())));
            }
            if v > prev * (T::one() + T::lit(1e-12)) {
                return Err(Error::InvalidRate(format!("increases at r = {}", r.f64())));
            }
            prev = v;
        }
        Ok(())
    }

    /// Samples `(r, value)` on a log grid.
    pub fn sample(&self, r_grid: &[T]) -> Vec<(T, T)> {
        r_grid.iter().map(|&r| (r, self.eval(r))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_families() {
        let e = RateFunction::ExpPower { c: 1.0, p: 1.0 };
        assert!((e.eval(0.5) - 3f64.exp()).abs() < 1e-12);
        assert!((e.ln_eval(1e-8) - (1.0 + 1e8)).abs() < 1e-6);
        let p = RateFunction::<f64>::Poly { c: 2.0, p: 0.5 };
        assert_eq!(p.eval(4.0), 2.0);
        assert!((p.eval(0.25) - 4.0).abs() < 1e-14);
        let l = RateFunction::LogPower { c1: 1.0, c2: 1.0, q: 2.0 };
        assert!((l.eval(1.0) - (1.0 + 2f64.ln().powi(2))).abs() < 1e-14);
        for f in [e, p, l, RateFunction::Constant { c: 3.0 }, RateFunction::Power { c: 1.0, p: 1.0 }] {
            f.validate().unwrap();
        }
    }

    #[test]
    fn tabulated_is_log_log_linear() {
        let t = RateFunction::<f64>::Tabulated { r: vec![0.01, 1.0], values: vec![100.0, 1.0] };
        assert!((t.eval(0.1) - 10.0).abs() < 1e-10);
        assert_eq!(t.eval(5.0), 1.0);
        assert_eq!(t.eval(1e-4), 100.0);
        let bad = RateFunction::Tabulated { r: vec![0.01, 1.0], values: vec![1.0, 2.0] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn inverse_of_families() {
        let p = RateFunction::<f64>::Poly { c: 1.0, p: 1.0 };
        assert!((p.inverse(4.0) - 0.25).abs() < 1e-9);
        assert_eq!(p.inverse(0.5), f64::INFINITY);
        let c = RateFunction::Constant { c: 2.0 };
        assert_eq!(c.inverse(2.5), 0.0);
        assert_eq!(c.inverse(1.5), f64::INFINITY);
        let e = RateFunction::ExpPower { c: 1.0, p: 1.0 };
        // exp(1 + 1/r) = u  <=>  r = 1 / (ln u - 1)
        assert!((e.inverse(10f64.exp()) - 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn ln_eval_agrees_with_eval() {
        let v = RateFunction::ExpPower { c: 0.5, p: 0.75 };
        let fs = vec![
            RateFunction::WithBoundary {
                v: Box::new(v.clone()),
                w: Box::new(RateFunction::constant(1.0)),
                theta: 0.3,
                delta: 1.0,
            },
            RateFunction::NoBoundary { v: Box::new(v.clone()), theta: 0.5, c0: 0.5, c1bar: 2.0, c2bar: 1.0 },
            RateFunction::AlphaNoBoundary {
                v: Box::new(RateFunction::LogPower { c1: 0.0, c2: 1.0, q: 4.0 }),
                theta: 0.5,
                a: 1.4375,
                b: 13.0 / 24.0,
            },
            v.clone().scaled(3.0),
        ];
        for f in fs {
            for &r in &[1e-2f64, 0.1, 1.0, 10.0] {
                let direct = f.eval(r);
                if direct.is_finite() {
                    assert!((f.ln_eval(r) - direct.ln()).abs() < 1e-10, "{f:?} at {r}");
                } else {
                    assert!(f.ln_eval(r) > 700.0);
                }
            }
        }
    }

    #[test]
    fn json_shape() {
        let f = RateFunction::ExpPower { c: 1.0, p: 2.0 };
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"family":"ExpPower","params":{"c":1.0,"p":2.0}}"#);
        let back: RateFunction<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
