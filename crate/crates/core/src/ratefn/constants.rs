//! Collar constants entering the compositions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{partition_constants, ModelSpec, Point, SmoothFunction};
use crate::numerics::{gauss3, gauss3_2d, refined};
use crate::scalar::Real;

const NORMAL_TOL: f64 = 1e-4;
const REFINE_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants<T> {
    pub theta: T,
    pub c0: T,
    pub c1: T,
    pub c2: T,
    pub c1bar: Option<T>,
    pub c2bar: Option<T>,
    pub a: Option<T>,
    pub b: Option<T>,
}

impl<T: Real> Constants<T> {
    pub fn new(theta: T, c0: T, c1: T, c2: T) -> Self {
        Self { theta, c0, c1, c2, c1bar: None, c2bar: None, a: None, b: None }
    }

    /// Adds the sup-norm constants and derives `A`, `B`.
    pub fn with_bars(mut self, c1bar: T, c2bar: T) -> Self {
        let one = T::one();
        let th = self.theta;
        let c0 = self.c0;
        self.c1bar = Some(c1bar);
        self.c2bar = Some(c2bar);
        self.a = Some(
            th + (one - th) * (c0 * c0 * c2bar * c2bar + c0 * c1bar) * ((one - th) * c0 * c0 * self.c1 * self.c1 + one),
        );
        self.b = Some(one - th + (one - th) * (one - th) / th * c0 * c0 * self.c2 * self.c2);
        self
    }
}

fn inward_derivative<T: Real, H: SmoothFunction<T> + ?Sized>(h: &H, x0: T, dir: T, y: T, scale: T) -> T {
    let e = scale * T::lit(1e-5);
    let f = |k: f64| h.value(Point::new(x0 + dir * e * T::lit(k), y));
    (-T::lit(3.0) * f(0.0) + T::lit(4.0) * f(1.0) - f(2.0)) / (T::lit(2.0) * e)
}

/// Computes `C0, C1, C2, C̄1, C̄2` (and `A, B`) from a collar function `h`.
///
/// The integral norms use an open Gauss rule with refinement, so an
/// integrable singularity of `∇V` at the boundary is tolerated while a
/// divergent one is reported as [`Error::NonFinite`]. If the sup norms are
/// infinite the bar constants are left out.
pub fn constants_from_h<T: Real, H: SmoothFunction<T> + ?Sized>(
    model: &ModelSpec<T>,
    h: &H,
    quadrature_points: usize,
) -> Result<Constants<T>> {
    let summary = partition_constants(model, quadrature_points)?;
    let comps = model.domain.sticky_components();
    let circ = model.domain.circumference();
    let (lo, hi) = model.normal_range();
    let scale = hi - lo;
    let y_samples: Vec<T> = match circ {
        None => vec![T::zero()],
        Some(c) => (0..4).map(|k| c * T::nat(k) / T::lit(4.0)).collect(),
    };
    for comp in &comps {
        let dir = if comp.side == crate::model::Side::Lower { T::one() } else { -T::one() };
        for &y in &y_samples {
            let d = inward_derivative(h, comp.x, dir, y, scale);
            if !((d - T::one()).abs() <= T::lit(NORMAL_TOL)) {
                return Err(Error::NormalDerivativeMismatch { found: d.f64() });
            }
        }
    }

    let n_sup = 4 * quadrature_points;
    let mut sup_wv = -T::infinity();
    for comp in &comps {
        let ys: Vec<T> = match circ {
            None => vec![T::zero()],
            Some(c) => (0..n_sup).map(|k| c * T::nat(k) / T::nat(n_sup)).collect(),
        };
        for y in ys {
            let p = Point::new(comp.x, y);
            sup_wv = sup_wv.max(model.w.value(p) - model.v.value(p));
        }
    }
    let c0 = summary.z_v * sup_wv.max(T::zero()).exp() / summary.z_w_boundary;

    let lvh = |p: Point<T>| {
        let (vx, vy) = model.v.gradient(p);
        let (hx, hy) = h.gradient(p);
        h.laplacian(p) + vx * hx + vy * hy
    };
    let grad_sq = |p: Point<T>| {
        let (hx, hy) = h.gradient(p);
        hx * hx + hy * hy
    };
    let weight = |p: Point<T>| model.v.value(p).exp() / summary.z_v;
    let integrate = |g: &(dyn Fn(Point<T>) -> T + Sync), what: &str| -> Result<T> {
        let rule = |n: usize| match circ {
            None => gauss3(|x| g(Point::on_line(x)) * weight(Point::on_line(x)), lo, hi, n),
            Some(c) => {
                gauss3_2d(|x, y| g(Point::new(x, y)) * weight(Point::new(x, y)), (lo, hi), (T::zero(), c), n, n.min(32))
            }
        };
        refined(rule, quadrature_points, REFINE_TOL).ok_or_else(|| Error::NonFinite(what.to_string()))
    };
    let c1sq = integrate(
        &|p| {
            let v = (-lvh(p)).max(T::zero());
            v * v
        },
        "L2 norm of the negative part of L_V h",
    )?;
    let c2sq = integrate(&grad_sq, "L2 norm of grad h")?;

    let mut c1bar = T::zero();
    let mut c2bar = T::zero();
    let ny = if circ.is_some() { 16 } else { 1 };
    for i in 0..=n_sup {
        let x = lo + (hi - lo) * T::nat(i) / T::nat(n_sup);
        for j in 0..ny {
            let y = circ.map_or(T::zero(), |c| c * T::nat(j) / T::nat(ny));
            let p = Point::new(x, y);
            c1bar = c1bar.max((-lvh(p)).max(T::zero()));
            c2bar = c2bar.max(grad_sq(p).sqrt());
        }
    }

    let base = Constants::new(summary.theta, c0, c1sq.sqrt(), c2sq.sqrt());
    if c1bar.is_finite() && c2bar.is_finite() {
        Ok(base.with_bars(c1bar, c2bar))
    } else {
        Ok(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_h, DomainSpec, Profile};
    use approx::assert_relative_eq;

    fn quadratic() -> Profile<f64> {
        Profile { f: Box::new(|x| x * (1.0 - x)), df: Box::new(|x| 1.0 - 2.0 * x), d2f: Box::new(|_| -2.0) }
    }

    #[test]
    fn example_interval_constants() {
        let model = ModelSpec::flat_interval(0.0, 1.0, 0.5);
        let k = constants_from_h(&model, &quadratic(), 64).unwrap();
        assert_relative_eq!(k.theta, 0.5, epsilon = 1e-14);
        assert_relative_eq!(k.c0, 0.5, epsilon = 1e-14);
        assert_relative_eq!(k.c1, 2.0, epsilon = 1e-12);
        assert_relative_eq!(k.c2, (1.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(k.c1bar.unwrap(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(k.c2bar.unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(k.a.unwrap(), 1.4375, epsilon = 1e-11);
        assert_relative_eq!(k.b.unwrap(), 13.0 / 24.0, epsilon = 1e-11);
    }

    #[test]
    fn c0_does_not_depend_on_h() {
        let model = ModelSpec::flat_interval(0.0, 1.0, 0.5);
        let h = default_h(&model.domain, 0.25).unwrap();
        let k = constants_from_h(&model, &h, 64).unwrap();
        assert_relative_eq!(k.c0, 0.5, epsilon = 1e-14);
        assert!(k.a.unwrap() >= k.theta && k.b.unwrap() >= 1.0 - k.theta);
    }

    #[test]
    fn wrong_normal_derivative() {
        let model = ModelSpec::flat_interval(0.0, 1.0, 0.5);
        let h = Profile::<f64> {
            f: Box::new(|x| 2.0 * x * (1.0 - x)),
            df: Box::new(|x| 2.0 - 4.0 * x),
            d2f: Box::new(|_| -4.0),
        };
        assert!(matches!(constants_from_h(&model, &h, 64), Err(Error::NormalDerivativeMismatch { .. })));
    }

    #[test]
    fn singular_drift_is_non_finite() {
        let model = ModelSpec::<f64>::power_half_line(0.5, 10.0, 1.0, 1.0);
        let h = default_h(&DomainSpec::half_line(10.0), 1.0).unwrap();
        assert!(matches!(constants_from_h(&model, &h, 128), Err(Error::NonFinite(_))));
        let smooth = ModelSpec::<f64>::power_half_line(2.0, 10.0, 1.0, 1.0);
        let k = constants_from_h(&smooth, &h, 128).unwrap();
        assert!(k.c1.is_finite() && k.c1bar.is_some());
    }
}
