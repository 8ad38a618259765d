//! Continuum sticky models on flat desk-scale domains.
//!
//! A model couples an interior measure `e^V dx / Z_V` with a boundary measure
//! `e^W dσ / Z_W` on the sticky boundary components. The interior mass fraction
//! `theta = γ Z_W / (γ Z_W + Z_V)` fixes the convex combination that is invariant
//! for the sticky process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{refined, simpson, simpson_2d};
use crate::scalar::Real;

pub const DEFAULT_QUADRATURE: usize = 256;
/// Relative mass below which a truncated half-line is cut short.
pub const DEFAULT_MASS_FLOOR: f64 = 1e-12;
const REFINE_TOL: f64 = 1e-3;

/// A point of the closed domain. One-dimensional domains use `y = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn on_line(x: T) -> Self {
        Self { x, y: T::zero() }
    }
}

/// Boundary component selector: the lower (`x = a`, `x = 0`) or upper end in
/// the normal coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DomainKind<T> {
    Interval {
        a: T,
        b: T,
    },
    /// `[0, L]`; only `x = 0` can be sticky, `x = L` reflects.
    TruncatedHalfLine {
        length: T,
    },
    /// `(0, width) x S^1` with the circle of the given circumference.
    Strip {
        width: T,
        circumference: T,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec<T> {
    pub kind: DomainKind<T>,
    pub sticky: Vec<Side>,
}

/// A sticky boundary component: an endpoint or a circle `{x} x S^1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryComponent<T> {
    pub side: Side,
    pub x: T,
    /// `None` for a point, the circumference for a circle.
    pub circle: Option<T>,
}

impl<T: Real> DomainSpec<T> {
    pub fn interval(a: T, b: T) -> Self {
        Self { kind: DomainKind::Interval { a, b }, sticky: vec![Side::Lower, Side::Upper] }
    }

    pub fn half_line(length: T) -> Self {
        Self { kind: DomainKind::TruncatedHalfLine { length }, sticky: vec![Side::Lower] }
    }

    pub fn strip(width: T, circumference: T) -> Self {
        Self { kind: DomainKind::Strip { width, circumference }, sticky: vec![Side::Lower, Side::Upper] }
    }

    pub fn with_sticky(mut self, sides: &[Side]) -> Self {
        self.sticky = sides.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        match &self.kind {
            DomainKind::Interval { a, b } if !(*a < *b) => return bad("interval needs a < b"),
            DomainKind::TruncatedHalfLine { length } if !(*length > T::zero()) => {
                return bad("half-line truncation length must be positive")
            }
            DomainKind::TruncatedHalfLine { .. } if self.sticky.contains(&Side::Upper) => {
                return bad("the truncation end of a half-line is reflecting, not sticky")
            }
            DomainKind::Strip { width, circumference } if !(*width > T::zero() && *circumference > T::zero()) => {
                return bad("strip width and circumference must be positive")
            }
            _ => {}
        }
        if self.sticky.is_empty() {
            return bad("at least one boundary component must be sticky");
        }
        Ok(())
    }

    /// Extent of the normal coordinate.
    pub fn normal_range(&self) -> (T, T) {
        match &self.kind {
            DomainKind::Interval { a, b } => (*a, *b),
            DomainKind::TruncatedHalfLine { length } => (T::zero(), *length),
            DomainKind::Strip { width, .. } => (T::zero(), *width),
        }
    }

    pub fn circumference(&self) -> Option<T> {
        match &self.kind {
            DomainKind::Strip { circumference, .. } => Some(*circumference),
            _ => None,
        }
    }

    pub fn half_thickness(&self) -> T {
        let (lo, hi) = self.normal_range();
        (hi - lo) / T::lit(2.0)
    }

    /// Dimension of the boundary (0 for endpoints, 1 for circles).
    pub fn boundary_dimension(&self) -> usize {
        usize::from(matches!(self.kind, DomainKind::Strip { .. }))
    }

    pub fn sticky_components(&self) -> Vec<BoundaryComponent<T>> {
        let (lo, hi) = self.normal_range();
        let mut sides = self.sticky.clone();
        sides.sort();
        sides.dedup();
        sides
            .into_iter()
            .map(|side| BoundaryComponent {
                side,
                x: if side == Side::Lower { lo } else { hi },
                circle: self.circumference(),
            })
            .collect()
    }
}

/// Potential as a function of the normal coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form")]
pub enum PotentialSpec<T> {
    Zero,
    /// `V(x) = -|x|^tau`.
    PowerTau {
        tau: T,
    },
    /// Piecewise-linear interpolation of `values` at increasing nodes `x`,
    /// held constant outside the table.
    Tabulated {
        x: Vec<T>,
        values: Vec<T>,
    },
}

impl<T: Real> PotentialSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::PowerTau { tau } if *tau > T::zero() => Ok(()),
            PotentialSpec::PowerTau { .. } => Err(Error::InvalidModel("PowerTau needs tau > 0".into())),
            PotentialSpec::Tabulated { x, values } => {
                if x.len() < 2 || x.len() != values.len() {
                    return Err(Error::InvalidModel("tabulated potential needs matching x/values".into()));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidModel("tabulated potential needs increasing x and finite values".into()));
                }
                Ok(())
            }
        }
    }

    fn segment(x: &[T], p: T) -> usize {
        x.partition_point(|&xi| xi <= p).clamp(1, x.len() - 1) - 1
    }

    pub fn value(&self, p: Point<T>) -> T {
        match self {
            PotentialSpec::Zero => T::zero(),
            PotentialSpec::PowerTau { tau } => -p.x.abs().powf(*tau),
            PotentialSpec::Tabulated { x, values } => {
                let n = x.len();
                if p.x <= x[0] {
                    return values[0];
                }
                if p.x >= x[n - 1] {
                    return values[n - 1];
                }
                let k = Self::segment(x, p.x);
                let s = (p.x - x[k]) / (x[k + 1] - x[k]);
                values[k] + s * (values[k + 1] - values[k])
            }
        }
    }

    /// Gradient `(d/dx, d/dy)`. Singular at `x = 0` for `PowerTau` with `tau < 1`.
    pub fn gradient(&self, p: Point<T>) -> (T, T) {
        let dx = match self {
            PotentialSpec::Zero => T::zero(),
            PotentialSpec::PowerTau { tau } => {
                let ax = p.x.abs();
                if ax == T::zero() {
                    if *tau > T::one() {
                        T::zero()
                    } else if *tau == T::one() {
                        -T::one()
                    } else {
                        -T::infinity()
                    }
                } else {
                    -*tau * ax.powf(*tau - T::one()) * p.x.signum()
                }
            }
            PotentialSpec::Tabulated { x, values } => {
                let n = x.len();
                if p.x < x[0] || p.x > x[n - 1] {
                    T::zero()
                } else {
                    let k = Self::segment(x, p.x);
                    (values[k + 1] - values[k]) / (x[k + 1] - x[k])
                }
            }
        };
        (dx, T::zero())
    }
}

/// A continuum sticky model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<T> {
    pub domain: DomainSpec<T>,
    pub v: PotentialSpec<T>,
    pub w: PotentialSpec<T>,
    /// Reflection strength.
    pub gamma: T,
    /// Boundary diffusion weight.
    pub delta: T,
    /// Half-lines are cut where `e^V` falls below this fraction of its running
    /// maximum. `None` keeps the full length.
    #[serde(default)]
    pub mass_floor: Option<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(domain: DomainSpec<T>, v: PotentialSpec<T>, w: PotentialSpec<T>, gamma: T, delta: T) -> Self {
        let mass_floor =
            matches!(domain.kind, DomainKind::TruncatedHalfLine { .. }).then(|| T::lit(DEFAULT_MASS_FLOOR));
        Self { domain, v, w, gamma, delta, mass_floor }
    }

    /// Flat potentials on `(a, b)` with both ends sticky and no boundary diffusion.
    pub fn flat_interval(a: T, b: T, gamma: T) -> Self {
        Self::new(DomainSpec::interval(a, b), PotentialSpec::Zero, PotentialSpec::Zero, gamma, T::zero())
    }

    /// `V = W = -|x|^tau` on the truncated half-line.
    pub fn power_half_line(tau: T, length: T, gamma: T, delta: T) -> Self {
        Self::new(
            DomainSpec::half_line(length),
            PotentialSpec::PowerTau { tau },
            PotentialSpec::PowerTau { tau },
            gamma,
            delta,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.v.validate()?;
        self.w.validate()?;
        if !(self.gamma > T::zero()) || !self.gamma.is_finite() {
            return Err(Error::InvalidModel("gamma must be positive".into()));
        }
        if !(self.delta >= T::zero()) || !self.delta.is_finite() {
            return Err(Error::InvalidModel("delta must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.domain.boundary_dimension() == 0 && self.delta > T::zero() {
            out.push(
                "boundary is zero-dimensional: the boundary gradient vanishes and delta > 0 gives the same form as delta = 0"
                    .to_string(),
            );
        }
        if let Some(l) = self.truncated_length() {
            let (_, full) = self.domain.normal_range();
            if l < full {
                out.push(format!("half-line cut at {} where the interior density drops below the mass floor", l.f64()));
            }
        }
        out
    }

    /// Effective length of a truncated half-line after applying the mass floor.
    pub fn truncated_length(&self) -> Option<T> {
        let DomainKind::TruncatedHalfLine { length } = self.domain.kind else {
            return None;
        };
        let Some(floor) = self.mass_floor.filter(|f| *f > T::zero()) else {
            return Some(length);
        };
        let drop = -floor.ln();
        let n = 8192;
        let h = length / T::nat(n);
        let mut vmax = -T::infinity();
        for i in 0..=n {
            let x = h * T::nat(i);
            let v = self.v.value(Point::on_line(x));
            vmax = vmax.max(v);
            if v < vmax - drop {
                return Some(x.max(h * T::lit(2.0)));
            }
        }
        Some(length)
    }

    /// Normal-coordinate range actually used by quadrature and discretization.
    pub fn normal_range(&self) -> (T, T) {
        match self.truncated_length() {
            Some(l) => (T::zero(), l),
            None => self.domain.normal_range(),
        }
    }
}

/// Partition constants and the invariant measure of a model.
#[derive(Clone, Debug)]
pub struct MeasureSummary<T> {
    pub z_v: T,
    pub z_w_boundary: T,
    pub theta: T,
    pub model: ModelSpec<T>,
}

impl<T: Real> MeasureSummary<T> {
    /// Density of `mu_V` with respect to Lebesgue measure on the domain.
    pub fn density_v(&self, p: Point<T>) -> T {
        self.model.v.value(p).exp() / self.z_v
    }

    /// Density of `mu_W` with respect to the boundary measure (counting measure
    /// on endpoints, arc length on circles).
    pub fn density_w(&self, p: Point<T>) -> T {
        self.model.w.value(p).exp() / self.z_w_boundary
    }
}

pub(crate) fn interior_integral<T: Real, F: Fn(Point<T>) -> T + Sync>(model: &ModelSpec<T>, f: F, n: usize) -> T {
    let (lo, hi) = model.normal_range();
    match model.domain.circumference() {
        None => simpson(|x| f(Point::on_line(x)), lo, hi, n),
        Some(c) => simpson_2d(|x, y| f(Point::new(x, y)), (lo, hi), (T::zero(), c), n, n.min(64)),
    }
}

pub(crate) fn boundary_integral<T: Real, F: Fn(Point<T>) -> T>(model: &ModelSpec<T>, f: F, n: usize) -> T {
    model
        .domain
        .sticky_components()
        .into_iter()
        .map(|comp| match comp.circle {
            None => f(Point::on_line(comp.x)),
            Some(c) => simpson(|y| f(Point::new(comp.x, y)), T::zero(), c, n),
        })
        .fold(T::zero(), |a, b| a + b)
}

/// Computes `Z_V`, `Z_W` and `theta` by composite Simpson with a two-doubling
/// refinement check.
pub fn partition_constants<T: Real>(model: &ModelSpec<T>, quadrature_points: usize) -> Result<MeasureSummary<T>> {
    model.validate()?;
    if quadrature_points < 16 {
        return Err(Error::InvalidModel("quadrature needs at least 16 points".into()));
    }
    let z_v = refined(|n| interior_integral(model, |p| model.v.value(p).exp(), n), quadrature_points, REFINE_TOL)
        .ok_or_else(|| Error::NonIntegrable("exp(V) over the domain".into()))?;
    let z_w = refined(|n| boundary_integral(model, |p| model.w.value(p).exp(), n), quadrature_points, REFINE_TOL)
        .ok_or_else(|| Error::NonIntegrable("exp(W) over the sticky boundary".into()))?;
    if !(z_v > T::zero() && z_w > T::zero()) {
        return Err(Error::NonIntegrable("partition constant is not positive".into()));
    }
    Ok(MeasureSummary { z_v, z_w_boundary: z_w, theta: theta_from(model.gamma, z_v, z_w), model: model.clone() })
}

/// Interior mass fraction `γ Z_W / (γ Z_W + Z_V)`.
pub fn theta_from<T: Real>(gamma: T, z_v: T, z_w: T) -> T {
    gamma * z_w / (gamma * z_w + z_v)
}

pub fn theta<T: Real>(model: &ModelSpec<T>) -> Result<T> {
    Ok(partition_constants(model, DEFAULT_QUADRATURE)?.theta)
}

/// A `C^2` function on the closed domain with derivatives.
pub trait SmoothFunction<T: Real>: Send + Sync {
    fn value(&self, p: Point<T>) -> T;

    fn gradient(&self, p: Point<T>) -> (T, T) {
        let e = T::lit(1e-5);
        let two = T::lit(2.0);
        let gx = (self.value(Point::new(p.x + e, p.y)) - self.value(Point::new(p.x - e, p.y))) / (two * e);
        let gy = (self.value(Point::new(p.x, p.y + e)) - self.value(Point::new(p.x, p.y - e))) / (two * e);
        (gx, gy)
    }

    fn laplacian(&self, p: Point<T>) -> T {
        let e = T::lit(1e-4);
        let c = self.value(p) * T::lit(2.0);
        let dxx = self.value(Point::new(p.x + e, p.y)) + self.value(Point::new(p.x - e, p.y)) - c;
        let dyy = self.value(Point::new(p.x, p.y + e)) + self.value(Point::new(p.x, p.y - e)) - c;
        (dxx + dyy) / (e * e)
    }
}

/// Cutoff `ξ(s) = (1 - (s/s0)^2)^3` on `[0, s0]`, zero beyond; returns `(ξ, ξ', ξ'')`.
pub fn cutoff<T: Real>(s: T, s0: T) -> (T, T, T) {
    if s >= s0 {
        return (T::zero(), T::zero(), T::zero());
    }
    let u = s / s0;
    let q = T::one() - u * u;
    let six = T::lit(6.0);
    let xi = q * q * q;
    let d1 = -six * u * q * q / s0;
    let d2 = -six / (s0 * s0) * q * (T::one() - T::lit(5.0) * u * u);
    (xi.max(T::zero()).min(T::one()), d1, d2)
}

/// The collar function `h = ρ ξ(ρ)` built from the distance `ρ` to each sticky
/// boundary component.
#[derive(Clone, Debug)]
pub struct CollarFunction<T> {
    pub components: Vec<(Side, T)>,
    pub s0: T,
    /// Half-lines: `h(x) = x` without cutoff.
    pub uncut: bool,
    /// Set for half-lines, where the uncut `h(x) = x` is admissible as well.
    pub uncut_admissible: bool,
}

impl<T: Real> CollarFunction<T> {
    pub fn into_uncut(mut self) -> Self {
        self.uncut = self.uncut_admissible;
        self
    }

    fn profile(&self, rho: T) -> (T, T, T) {
        if self.uncut {
            return (rho, T::one(), T::zero());
        }
        let (xi, d1, d2) = cutoff(rho, self.s0);
        (rho * xi, xi + rho * d1, T::lit(2.0) * d1 + rho * d2)
    }

    fn fold<F: Fn(T, T, T, T) -> T>(&self, p: Point<T>, f: F) -> T {
        self.components.iter().fold(T::zero(), |acc, &(side, x0)| {
            let (rho, sign) = match side {
                Side::Lower => (p.x - x0, T::one()),
                Side::Upper => (x0 - p.x, -T::one()),
            };
            let (v, d1, d2) = self.profile(rho.max(T::zero()));
            acc + f(v, d1, d2, sign)
        })
    }
}

impl<T: Real> SmoothFunction<T> for CollarFunction<T> {
    fn value(&self, p: Point<T>) -> T {
        self.fold(p, |v, _, _, _| v)
    }

    fn gradient(&self, p: Point<T>) -> (T, T) {
        (self.fold(p, |_, d1, _, s| d1 * s), T::zero())
    }

    fn laplacian(&self, p: Point<T>) -> T {
        self.fold(p, |_, _, d2, _| d2)
    }
}

/// A function of the normal coordinate given by closures for value and
/// first two derivatives.
pub struct Profile<T> {
    pub f: Box<dyn Fn(T) -> T + Send + Sync>,
    pub df: Box<dyn Fn(T) -> T + Send + Sync>,
    pub d2f: Box<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Real> SmoothFunction<T> for Profile<T> {
    fn value(&self, p: Point<T>) -> T {
        (self.f)(p.x)
    }
    fn gradient(&self, p: Point<T>) -> (T, T) {
        ((self.df)(p.x), T::zero())
    }
    fn laplacian(&self, p: Point<T>) -> T {
        (self.d2f)(p.x)
    }
}

/// Builds the collar function of depth `s0` for the sticky boundary of `domain`.
pub fn default_h<T: Real>(domain: &DomainSpec<T>, s0: T) -> Result<CollarFunction<T>> {
    domain.validate()?;
    let half = domain.half_thickness();
    if !(s0 > T::zero()) || s0 >= half {
        return Err(Error::CollarTooDeep { s0: s0.f64(), half: half.f64() });
    }
    let half_line = matches!(domain.kind, DomainKind::TruncatedHalfLine { .. });
    Ok(CollarFunction {
        components: domain.sticky_components().iter().map(|c| (c.side, c.x)).collect(),
        s0,
        uncut: false,
        uncut_admissible: half_line,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_interval_half_gamma() {
        let m = partition_constants(&ModelSpec::flat_interval(0.0, 1.0, 0.5), 64).unwrap();
        assert_relative_eq!(m.z_v, 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.z_w_boundary, 2.0, epsilon = 1e-14);
        assert_relative_eq!(m.theta, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn interval_of_length_two() {
        let m = partition_constants(&ModelSpec::flat_interval(0.0, 2.0, 1.0), 64).unwrap();
        assert_relative_eq!(m.z_v, 2.0, epsilon = 1e-13);
        assert_relative_eq!(m.z_w_boundary, 2.0, epsilon = 1e-14);
        assert_relative_eq!(m.theta, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn theta_formula_cases() {
        assert_relative_eq!(theta_from(0.5, 1.0, 2.0), 0.5);
        assert_relative_eq!(theta_from(2.0, 2.0, 2.0), 2.0 / 3.0);
        assert_relative_eq!(theta_from(1.0, 1e12, 1.0), 1e-12, max_relative = 1e-9);
    }

    #[test]
    fn theta_increases_to_one_with_gamma() {
        let mut last = 0.0;
        for k in 0..=12 {
            let g = 10f64.powf(-6.0 + k as f64);
            let t = theta(&ModelSpec::flat_interval(0.0, 1.0, g)).unwrap();
            assert!(t > last && t < 1.0);
            last = t;
        }
        assert!(last > 1.0 - 1e-5);
    }

    #[test]
    fn invalid_gamma_and_sticky_set() {
        let bad = ModelSpec::flat_interval(0.0, 1.0, 0.0);
        assert!(matches!(partition_constants(&bad, 32), Err(Error::InvalidModel(_))));
        let mut none = ModelSpec::flat_interval(0.0, 1.0, 1.0);
        none.domain.sticky.clear();
        assert!(none.validate().is_err());
        let hl = DomainSpec::half_line(5.0).with_sticky(&[Side::Upper]);
        assert!(hl.validate().is_err());
    }

    #[test]
    fn strip_constants() {
        let model = ModelSpec::new(DomainSpec::strip(1.0, 2.0), PotentialSpec::Zero, PotentialSpec::Zero, 1.0, 1.0);
        let m = partition_constants(&model, 32).unwrap();
        assert_relative_eq!(m.z_v, 2.0, epsilon = 1e-12);
        assert_relative_eq!(m.z_w_boundary, 4.0, epsilon = 1e-12);
        assert_relative_eq!(m.theta, 4.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn densities_integrate_to_one() {
        let model = ModelSpec::power_half_line(2.0, 4.0, 1.0, 0.0);
        let m = partition_constants(&model, 512).unwrap();
        let total = interior_integral(&model, |p| m.density_v(p), 2048);
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        let bd = boundary_integral(&model, |p| m.density_w(p), 64);
        assert_relative_eq!(bd, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_floor_cuts_steep_half_lines() {
        let m = ModelSpec::power_half_line(3.0, 10.0, 1.0, 1.0);
        let l = m.truncated_length().unwrap();
        assert!((l - (1e12f64).ln().powf(1.0 / 3.0)).abs() < 5e-3);
        let gentle = ModelSpec::power_half_line(1.0, 10.0, 1.0, 1.0);
        assert_eq!(gentle.truncated_length(), Some(10.0));
        assert!(!m.warnings().is_empty());
    }

    fn inward_derivative(h: &CollarFunction<f64>, x0: f64, dir: f64) -> f64 {
        let e = 1e-6;
        let f = |k: f64| h.value(Point::on_line(x0 + dir * k * e));
        (-3.0 * f(0.0) + 4.0 * f(1.0) - f(2.0)) / (2.0 * e)
    }

    #[test]
    fn collar_on_interval() {
        let h = default_h(&DomainSpec::interval(0.0, 1.0), 0.25).unwrap();
        assert_eq!(h.value(Point::on_line(0.0)), 0.0);
        assert_eq!(h.value(Point::on_line(1.0)), 0.0);
        assert!((inward_derivative(&h, 0.0, 1.0) - 1.0).abs() < 1e-6);
        assert!((inward_derivative(&h, 1.0, -1.0) - 1.0).abs() < 1e-6);
        for k in 0..=50 {
            let x = 0.25 + 0.5 * k as f64 / 50.0;
            assert_eq!(h.value(Point::on_line(x)), 0.0);
        }
        // analytic derivatives agree with finite differences
        for &x in &[0.03, 0.1, 0.2, 0.8, 0.93] {
            let p = Point::on_line(x);
            let e = 1e-5;
            let fd = (h.value(Point::on_line(x + e)) - h.value(Point::on_line(x - e))) / (2.0 * e);
            assert!((h.gradient(p).0 - fd).abs() < 1e-8);
            let fd2 = (h.value(Point::on_line(x + e)) + h.value(Point::on_line(x - e)) - 2.0 * h.value(p)) / (e * e);
            assert!((h.laplacian(p) - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn collar_on_half_line_and_strip() {
        let h = default_h(&DomainSpec::half_line(10.0), 1.0).unwrap();
        assert!(h.uncut_admissible);
        assert!((inward_derivative(&h, 0.0, 1.0) - 1.0).abs() < 1e-6);
        assert_eq!(h.value(Point::on_line(1.5)), 0.0);
        let uncut = h.into_uncut();
        assert_eq!(uncut.value(Point::on_line(3.0)), 3.0);

        let hs = default_h(&DomainSpec::strip(1.0, 1.0), 0.25).unwrap();
        for &y in &[0.0, 0.3, 0.9] {
            assert_eq!(hs.value(Point::new(0.1, y)), hs.value(Point::new(0.1, 0.0)));
        }
        assert!(matches!(default_h(&DomainSpec::interval(0.0, 1.0), 0.5), Err(Error::CollarTooDeep { .. })));
    }
}
