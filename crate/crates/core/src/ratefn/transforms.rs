//! Transforms linking rate functions with semigroup behaviour: the tail
//! radius `Γ_t`, the converse `β` from a tail profile `φ_t`, the
//! ultraboundedness integral `Ψ`, and the decay profile `ξ` with its converse.

use serde::{Deserialize, Serialize};

use super::RateFunction;
use crate::error::{Error, Result};
use crate::numerics::{bisect_first, golden_min, log_grid, BISECT_TOL};
use crate::scalar::Real;

/// A non-increasing tabulated function `x ↦ y` with increasing `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> Table<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidRate("table needs increasing x and matching y".into()));
        }
        Ok(Self { x, y })
    }

    pub fn from_fn<F: Fn(T) -> T>(x: Vec<T>, f: F) -> Result<Self> {
        let y = x.iter().map(|&v| f(v)).collect();
        Self::new(x, y)
    }

    fn non_increasing(&self) -> bool {
        self.y.windows(2).all(|w| w[1] <= w[0])
    }

    /// `inf{x_k : y_k <= u}` reading the table as a right-continuous step function.
    pub fn step_inverse(&self, u: T) -> Option<T> {
        self.x.iter().zip(&self.y).find(|(_, &y)| y <= u).map(|(&x, _)| x)
    }

    /// `inf{x : y(x) <= u}` for the piecewise log-linear interpolant
    /// (linear where a value is zero).
    pub fn interp_inverse(&self, u: T) -> Option<T> {
        if self.y[0] <= u {
            return Some(self.x[0]);
        }
        for k in 1..self.x.len() {
            let (y0, y1) = (self.y[k - 1], self.y[k]);
            if y1 <= u {
                let s = if y1 > T::zero() && u > T::zero() {
                    (y0.ln() - u.ln()) / (y0.ln() - y1.ln())
                } else {
                    (y0 - u) / (y0 - y1)
                };
                return Some(self.x[k - 1] + s * (self.x[k] - self.x[k - 1]));
            }
        }
        None
    }
}

/// `Γ_t(s) = inf{r >= 0 : β(1/r)(e^{2rt} - 1) >= s²}`.
pub fn gamma_tail<T: Real>(beta: &RateFunction<T>, t: T, s: T) -> T {
    if !(s > T::zero()) {
        return T::zero();
    }
    let two = T::lit(2.0);
    let target = two * s.ln();
    let pred = |r: T| r > T::zero() && beta.ln_eval(T::one() / r) + (two * r * t).exp_m1().ln() >= target;
    let mut hi = T::one();
    let mut guard = 0;
    while !pred(hi) {
        hi *= two;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return T::infinity();
        }
    }
    bisect_first(pred, T::zero(), hi, T::lit(BISECT_TOL))
}

/// The tail bound `exp[-2t Γ_t(ε r)] / (1 - ε)²`.
pub fn tail_bound<T: Real>(beta: &RateFunction<T>, t: T, r: T, eps: T) -> T {
    let g = gamma_tail(beta, t, eps * r);
    (-T::lit(2.0) * t * g).exp() / ((T::one() - eps) * (T::one() - eps))
}

/// `r [φ^{-1}(e^{-2t/r}/2)]² e^{2t/r} / (4t)` at a single `r`.
pub fn beta_from_phi_at<T: Real>(phi: &Table<T>, t: T, r: T) -> Result<T> {
    let two = T::lit(2.0);
    let u = (-two * t / r).exp() / two;
    let s = phi.step_inverse(u).ok_or(Error::PhiNotDecaying(u.f64()))?;
    Ok(r * s * s * (two * t / r).exp() / (T::lit(4.0) * t))
}

/// Tabulates the converse super Poincaré rate on `r_grid`. The raw values are
/// replaced by their running minimum from the left, which is still a valid
/// rate and makes the table non-increasing.
pub fn beta_from_phi<T: Real>(phi: &Table<T>, t: T, r_grid: &[T]) -> Result<RateFunction<T>> {
    if !phi.non_increasing() {
        return Err(Error::PhiNotDecaying(f64::NAN));
    }
    let mut values = Vec::with_capacity(r_grid.len());
    let mut best = T::infinity();
    for &r in r_grid {
        best = best.min(beta_from_phi_at(phi, t, r)?);
        values.push(best);
    }
    Ok(RateFunction::Tabulated { r: r_grid.to_vec(), values })
}

/// Result of the ultraboundedness transform at one `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiResult<T> {
    pub psi: T,
    /// `ln` of `inf_ε max{ε^{-1} inf β, Ψ^{-1}((1-ε)t)}`.
    pub ln_kernel_bound: T,
    pub kernel_bound: T,
}

/// Tabulated `Ψ(x) = ∫_x^∞ β^{-1}(u)/u du` in the variable `v = ln x`.
#[derive(Clone, Debug)]
pub struct PsiTransform<T> {
    inf_beta: T,
    v: Vec<T>,
    /// `Ψ(e^{v_k})`, non-increasing.
    psi: Vec<T>,
    tail_k: T,
    tail_a: T,
}

const PSI_LINEAR_SPAN: f64 = 60.0;
const PSI_LINEAR_STEP: f64 = 0.01;
const PSI_LOG_POINTS: usize = 4000;
const PSI_LOG_DECADES: f64 = 10.0;
const PSI_V_FLOOR: f64 = -50.0;

impl<T: Real> PsiTransform<T> {
    /// Fails with [`Error::NotUltra`] when `β^{-1}(e^v)` does not decay faster
    /// than `v^{-1}`, i.e. when `Ψ` is infinite.
    pub fn new(beta: &RateFunction<T>) -> Result<Self> {
        let inf_beta = beta.infimum();
        let v0 = if inf_beta > T::zero() { inf_beta.ln() } else { T::lit(PSI_V_FLOOR) };
        let g = |v: T| beta.inverse_ln(v);
        let mut v = Vec::new();
        let n_lin = (PSI_LINEAR_SPAN / PSI_LINEAR_STEP) as usize;
        for k in 0..=n_lin {
            v.push(v0 + T::lit(PSI_LINEAR_STEP) * T::nat(k));
        }
        let span = T::lit(PSI_LINEAR_SPAN);
        for k in 1..=PSI_LOG_POINTS {
            let f = T::lit(10f64.powf(PSI_LOG_DECADES * k as f64 / PSI_LOG_POINTS as f64));
            v.push(v0 + span * f);
        }
        let gv: Vec<T> = v.iter().map(|&x| g(x)).collect();
        if gv.iter().skip(1).any(|x| !x.is_finite()) {
            return Err(Error::NotUltra("inverse rate is infinite above the infimum".into()));
        }
        let last = gv.len() - 1;
        let (v_a, v_b) = (v[last] - v0, (v[last] - v0) / T::lit(2.0));
        let g_b = g(v0 + v_b);
        let (tail_k, tail_a) = if gv[last] <= T::zero() {
            (T::zero(), T::lit(f64::INFINITY))
        } else {
            let a = -(gv[last] / g_b).ln() / (v_a / v_b).ln();
            (gv[last] * v_a.powf(a), a)
        };
        if !(tail_a > T::lit(1.0 + 1e-3)) {
            return Err(Error::NotUltra(format!(
                "inverse rate decays like v^-{:.3}; the integral diverges",
                tail_a.f64()
            )));
        }
        let tail =
            if tail_k > T::zero() { tail_k * v_a.powf(T::one() - tail_a) / (tail_a - T::one()) } else { T::zero() };
        let mut psi = vec![T::zero(); v.len()];
        psi[last] = tail;
        for k in (0..last).rev() {
            psi[k] = psi[k + 1] + (v[k + 1] - v[k]) * (gv[k] + gv[k + 1]) / T::lit(2.0);
        }
        // The first node sits at the infimum, where the inverse may be infinite.
        if !gv[0].is_finite() {
            psi[0] = T::infinity();
        }
        Ok(Self { inf_beta, v, psi, tail_k, tail_a })
    }

    pub fn inf_beta(&self) -> T {
        self.inf_beta
    }

    /// `Ψ(x)` for `ln x = lx`.
    pub fn psi_ln(&self, lx: T) -> T {
        let n = self.v.len();
        if lx <= self.v[0] {
            return self.psi[0];
        }
        if lx >= self.v[n - 1] {
            return self.tail_k * (lx - self.v[0]).powf(T::one() - self.tail_a) / (self.tail_a - T::one());
        }
        let k = self.v.partition_point(|&x| x <= lx).clamp(1, n - 1) - 1;
        let s = (lx - self.v[k]) / (self.v[k + 1] - self.v[k]);
        if !self.psi[k].is_finite() {
            return T::infinity();
        }
        self.psi[k] + s * (self.psi[k + 1] - self.psi[k])
    }

    /// `ln Ψ^{-1}(y)` with `Ψ^{-1}(y) = inf{x >= inf β : Ψ(x) <= y}`.
    pub fn inverse_ln(&self, y: T) -> T {
        if !(y > T::zero()) {
            return T::infinity();
        }
        let n = self.v.len();
        if self.psi[0] <= y {
            return self.v[0];
        }
        if self.psi[n - 1] > y {
            if self.tail_k <= T::zero() {
                return self.v[n - 1];
            }
            let w = (y * (self.tail_a - T::one()) / self.tail_k).powf(T::one() / (T::one() - self.tail_a));
            return self.v[0] + w;
        }
        let k = self.psi.partition_point(|&p| p > y).clamp(1, n - 1);
        let (p0, p1) = (self.psi[k - 1], self.psi[k]);
        if !p0.is_finite() {
            return self.v[k];
        }
        let s = (p0 - y) / (p0 - p1);
        self.v[k - 1] + s * (self.v[k] - self.v[k - 1])
    }

    /// `ln inf_{ε∈(0,1)} max{ε^{-1} inf β, Ψ^{-1}((1-ε)t)}`.
    pub fn ln_kernel_bound(&self, t: T) -> T {
        let ln_inf = if self.inf_beta > T::zero() { self.inf_beta.ln() } else { -T::infinity() };
        let obj = |z: T| {
            let eps = T::one() / (T::one() + (-z).exp());
            (ln_inf - eps.ln()).max(self.inverse_ln((T::one() - eps) * t))
        };
        let (_, best) = golden_min(obj, T::lit(-30.0), T::lit(30.0), 120);
        best
    }

    pub fn at(&self, t: T) -> PsiResult<T> {
        let psi = if t > self.inf_beta { self.psi_ln(t.ln()) } else { T::infinity() };
        let ln_kernel_bound = self.ln_kernel_bound(t);
        PsiResult { psi, ln_kernel_bound, kernel_bound: ln_kernel_bound.exp() }
    }
}

/// `Ψ(t)` and the ultraboundedness kernel bound at `t`.
pub fn psi_ultra<T: Real>(beta: &RateFunction<T>, t: T) -> Result<PsiResult<T>> {
    Ok(PsiTransform::new(beta)?.at(t))
}

/// `ξ(t) = inf{2r : r > 0, -½ α(r) log r <= t}`; at most 2.
pub fn xi_from_alpha<T: Real>(alpha: &RateFunction<T>, t: T) -> T {
    let two = T::lit(2.0);
    if !(t > T::zero()) {
        return two;
    }
    // u = -ln r; the condition ½ α(e^{-u}) u <= t holds on [0, u*]
    let lt = t.ln();
    let holds = |u: T| u == T::zero() || alpha.ln_eval((-u).exp()) + u.ln() - two.ln() <= lt;
    let umax = T::max_ln();
    if holds(umax) {
        return two * (-umax).exp();
    }
    let u_star = bisect_first(|u| !holds(u), T::zero(), umax, T::lit(BISECT_TOL));
    two * (-u_star).exp()
}

/// `α(r) = 2r inf_{s>0} (1/s) ξ^{-1}(s e^{1 - s/r})` at a single `r`.
pub fn alpha_from_xi_at<T: Real>(xi: &Table<T>, r: T) -> Result<T> {
    let one = T::one();
    let f = |ls: T| {
        let s = ls.exp();
        match xi.interp_inverse(s * (one - s / r).exp()) {
            Some(inv) => inv / s,
            None => T::infinity(),
        }
    };
    let top = r.max(xi.y[0]) * T::lit(1e2);
    let grid = log_grid(r * T::lit(1e-8), top, 600);
    let lgrid: Vec<T> = grid.iter().map(|s| s.ln()).collect();
    let (k, best) = lgrid.iter().enumerate().map(|(k, &ls)| (k, f(ls))).fold((0, T::infinity()), |acc, (k, v)| {
        if v < acc.1 {
            (k, v)
        } else {
            acc
        }
    });
    if !best.is_finite() {
        return Err(Error::XiNotDecaying);
    }
    let a = lgrid[k.saturating_sub(1)];
    let b = lgrid[(k + 1).min(lgrid.len() - 1)];
    let (_, refined) = golden_min(f, a, b, 80);
    Ok(T::lit(2.0) * r * best.min(refined))
}

/// Tabulates the converse weak Poincaré rate on `r_grid`, replacing raw
/// values by their running minimum from the left.
pub fn alpha_from_xi<T: Real>(xi: &Table<T>, r_grid: &[T]) -> Result<RateFunction<T>> {
    if !xi.non_increasing() || !(xi.y[xi.y.len() - 1] < xi.y[0]) {
        return Err(Error::XiNotDecaying);
    }
    let mut values = Vec::with_capacity(r_grid.len());
    let mut best = T::infinity();
    for &r in r_grid {
        best = best.min(alpha_from_xi_at(xi, r)?);
        values.push(best.max(T::min_positive()));
    }
    Ok(RateFunction::Tabulated { r: r_grid.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_constant_rate() {
        let b = RateFunction::constant(1.0);
        assert_relative_eq!(gamma_tail(&b, 1.0, 1.0), 2f64.ln() / 2.0, epsilon = 1e-9);
        assert_eq!(gamma_tail(&b, 1.0, 0.0), 0.0);
    }

    #[test]
    fn gamma_poly_against_scan() {
        let b = RateFunction::Poly { c: 1.0, p: 0.5 };
        let (t, s) = (1.0, 10.0);
        let g = gamma_tail(&b, t, s);
        let lhs = |r: f64| b.eval(1.0 / r) * ((2.0 * r * t).exp() - 1.0);
        let scan = (1..=10_000).map(|k| k as f64 * 1e-3).find(|&r| lhs(r) >= s * s).unwrap();
        assert!((g - scan).abs() <= 1e-3 + 1e-9);
        assert!(lhs(g * (1.0 + 1e-8)) >= s * s && lhs(g * (1.0 - 1e-6)) < s * s);
    }

    #[test]
    fn beta_from_step_phi() {
        let phi = Table::new(vec![0.0, 0.5, 1.0, 2.0], vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        for &r in &[0.1f64, 1.0, 10.0] {
            let v = beta_from_phi_at(&phi, 1.0, r).unwrap();
            assert_relative_eq!(v, r * (2.0 / r).exp() / 4.0, max_relative = 1e-14);
        }
        // large r: the exponential factor tends to one
        let big = beta_from_phi_at(&phi, 1.0, 1e8).unwrap();
        assert_relative_eq!(big, 1e8 / 4.0, max_relative = 1e-6);
        let flat = Table::new(vec![0.0, 1.0], vec![1.0, 0.9]).unwrap();
        assert!(matches!(beta_from_phi_at(&flat, 1.0, 1.0), Err(Error::PhiNotDecaying(_))));
        let tab = beta_from_phi(&phi, 1.0, &log_grid(0.1, 100.0, 30)).unwrap();
        tab.validate().unwrap();
    }

    #[test]
    fn psi_of_reciprocal_rate() {
        let b = RateFunction::Power { c: 1.0, p: 1.0 };
        for &t in &[0.1, 1.0, 5.0] {
            let res = psi_ultra(&b, t).unwrap();
            assert_relative_eq!(res.psi, 1.0 / t, max_relative = 1e-3);
            assert_relative_eq!(res.kernel_bound, 1.0 / t, max_relative = 1e-3);
        }
        let p = RateFunction::Poly { c: 1.0, p: 1.0 };
        let tr = PsiTransform::new(&p).unwrap();
        for &t in &[1.5, 3.0] {
            assert_relative_eq!(tr.psi_ln(f64::ln(t)), 1.0 / t, max_relative = 1e-3);
        }
    }

    #[test]
    fn psi_tail_test() {
        assert!(psi_ultra(&RateFunction::ExpPower { c: 1.0, p: 0.75 }, 1.0).is_ok());
        assert!(matches!(psi_ultra(&RateFunction::ExpPower { c: 1.0, p: 1.0 }, 1.0), Err(Error::NotUltra(_))));
        assert!(matches!(psi_ultra(&RateFunction::ExpPower { c: 1.0, p: 1.5 }, 1.0), Err(Error::NotUltra(_))));
    }

    #[test]
    fn constant_rate_bounds_the_kernel_by_itself() {
        let res = psi_ultra(&RateFunction::constant(3.0), 0.5).unwrap();
        assert_relative_eq!(res.kernel_bound, 3.0, max_relative = 1e-6);
    }

    #[test]
    fn xi_of_constant_alpha() {
        let a = RateFunction::constant(1.0);
        assert_relative_eq!(xi_from_alpha(&a, 1.0), 2.0 * (-2f64).exp(), max_relative = 1e-9);
        let c = RateFunction::constant(3.0);
        for &t in &[0.1f64, 2.0, 10.0] {
            assert_relative_eq!(xi_from_alpha(&c, t), 2.0 * (-2.0 * t / 3.0).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn xi_of_log_power_against_scan() {
        let a = RateFunction::LogPower { c1: 0.0, c2: 1.0, q: 4.0 };
        let t = 10.0;
        let xi = xi_from_alpha(&a, t);
        let scan =
            (0..=200_000).map(|k| (-(k as f64) * 1e-4).exp()).rev().find(|&r| -0.5 * a.eval(r) * r.ln() <= t).unwrap();
        assert!((xi - 2.0 * scan).abs() / xi < 2e-4);
    }

    #[test]
    fn round_trip_constant_alpha() {
        let c = 2.0;
        let ts: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.02).collect();
        let xi = Table::from_fn(ts, |t| 2.0 * (-2.0 * t / c).exp()).unwrap();
        for r in log_grid(1e-3, 1.0, 12) {
            let a = alpha_from_xi_at(&xi, r).unwrap();
            assert!(a / c > 0.1 && a / c < 10.0, "r = {r}: {a}");
            // the minimiser s = 2 lies inside the tabulated range once r >= 2/81
            if r > 0.03 {
                assert_relative_eq!(a, c * (1.0 - r / 2.0), max_relative = 2e-3);
            }
        }
        let tab = alpha_from_xi(&xi, &log_grid(1e-3, 1.0, 12)).unwrap();
        tab.validate().unwrap();
    }

    #[test]
    fn step_xi() {
        let xi = Table::<f64>::new(vec![0.0, 1.0, 1.0 + 1e-9, 5.0], vec![2.0, 2.0, 0.0, 0.0]).unwrap();
        for &r in &[0.01, 0.5, 0.99] {
            let a = alpha_from_xi_at(&xi, r).unwrap();
            assert!(a.is_finite() && a > 0.0);
        }
        let flat = Table::new(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert!(matches!(alpha_from_xi(&flat, &[0.1]), Err(Error::XiNotDecaying)));
    }
}
