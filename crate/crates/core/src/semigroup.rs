//! Exact semigroup `P_t = e^{tL}` of a discrete instance through a dense
//! eigendecomposition, and checks of the rate-function semigroup bounds.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::DiscreteInstance;
use crate::error::{Error, Result};
use crate::linalg::symmetrized;
use crate::ratefn::{tail_bound, xi_from_alpha, PsiTransform, RateFunction};
use crate::sampling::{stream, Ensemble, EnsembleKind};
use crate::scalar::Real;
use crate::verify::{violation, ViolationReport};

/// The row bound needs the full kernel; above this size only `e^{-λ₁t}` is used.
pub const ROW_BOUND_MAX_NODES: usize = 600;
/// `ε` of the tail bound.
pub const TAIL_EPS: f64 = 0.5;

/// Eigenpairs of `E φ = λ M φ` with `μ(φ_j φ_k) = δ_jk`, sorted ascending.
#[derive(Clone, Debug)]
pub struct SpectralData<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Column `k` is `φ_k` evaluated at the nodes.
    pub basis: DMatrix<T>,
    pub m: Vec<T>,
}

impl<T: Real> SpectralData<T> {
    pub fn new(inst: &DiscreteInstance<T>) -> Result<Self> {
        if !inst.is_connected() {
            return Err(Error::Disconnected);
        }
        let n = inst.len();
        let eig = SymmetricEigen::new(symmetrized(inst));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
        let mut eigenvalues = Vec::with_capacity(n);
        let mut basis = DMatrix::zeros(n, n);
        for (k, &j) in order.iter().enumerate() {
            let mut lam = eig.eigenvalues[j].max(T::zero());
            let col = eig.eigenvectors.column(j);
            if k == 0 {
                // the kernel of E is the constants exactly
                lam = T::zero();
                for i in 0..n {
                    basis[(i, 0)] = T::one();
                }
            } else {
                for i in 0..n {
                    basis[(i, k)] = col[i] / inst.m[i].sqrt();
                }
            }
            eigenvalues.push(lam);
        }
        Ok(Self { eigenvalues, basis, m: inst.m.clone() })
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn gap(&self) -> T {
        self.eigenvalues.get(1).copied().unwrap_or(T::zero())
    }

    /// `μ(f φ_k)` for every `k`.
    pub fn coefficients(&self, f: &[T]) -> DVector<T> {
        let weighted = DVector::from_iterator(f.len(), f.iter().zip(&self.m).map(|(&v, &w)| v * w));
        self.basis.tr_mul(&weighted)
    }

    fn synthesize(&self, coeffs: &DVector<T>, t: T) -> Vec<T> {
        let damped = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.eigenvalues).map(|(&c, &l)| c * (-l * t).exp()),
        );
        (&self.basis * damped).as_slice().to_vec()
    }

    pub fn evolve(&self, f: &[T], t: T) -> Vec<T> {
        self.synthesize(&self.coefficients(f), t)
    }

    /// `‖P_t - μ‖_{2→2} = e^{-λ₁t}`.
    pub fn decay_2to2(&self, t: T) -> T {
        (-self.gap() * t).exp()
    }

    /// `p_t(x, y) / m_y` as a dense matrix.
    pub fn kernel(&self, t: T) -> DMatrix<T> {
        let mut scaled = self.basis.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut((-l * t).exp());
        }
        scaled * self.basis.transpose()
    }

    /// `‖P_t‖_{1→∞} = max_{x,y} p_t(x,y)/m_y`. The kernel is positive
    /// semidefinite, so the maximum sits on the diagonal.
    pub fn kernel_sup(&self, t: T) -> T {
        let n = self.len();
        let w: Vec<T> = self.eigenvalues.iter().map(|&l| (-l * t).exp()).collect();
        (0..n)
            .into_par_iter()
            .map(|x| {
                let row = self.basis.row(x);
                row.iter().zip(&w).fold(T::zero(), |a, (&p, &e)| a + e * p * p)
            })
            .reduce(T::zero, |a, b| a.max(b))
    }

    /// Bracket on `‖P_t - μ‖_{∞→2}`.
    pub fn norm_infty_to_2_bounds(&self, t: T, trials: usize, seed: u64) -> InftyTo2<T> {
        let n = self.len();
        let norm_of = |s: &[T]| {
            let mut c = self.coefficients(s);
            c[0] = T::zero();
            c.iter()
                .zip(&self.eigenvalues)
                .fold(T::zero(), |a, (&ck, &l)| a + ck * ck * (-T::lit(2.0) * l * t).exp())
                .sqrt()
        };
        let mut candidates: Vec<Vec<T>> = Vec::new();
        if n > 1 {
            // level sets of the slowest modes
            for k in 1..n.min(4) {
                let phi = self.basis.column(k);
                let mut sorted: Vec<T> = phi.iter().copied().collect();
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                for q in [0.1, 0.25, 0.5, 0.75, 0.9] {
                    let level = sorted[((n - 1) as f64 * q) as usize];
                    candidates.push(phi.iter().map(|&v| if v > level { T::one() } else { -T::one() }).collect());
                }
            }
        }
        let mut lower = candidates.par_iter().map(|s| norm_of(s)).reduce(T::zero, |a, b| a.max(b));
        let random = (0..trials)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(seed, 0, k as u64);
                let s: Vec<T> = (0..n).map(|_| if rng.random_bool(0.5) { T::one() } else { -T::one() }).collect();
                norm_of(&s)
            })
            .reduce(T::zero, |a, b| a.max(b));
        lower = lower.max(random);
        let mut upper = self.decay_2to2(t);
        if n <= ROW_BOUND_MAX_NODES {
            let k = self.kernel(t);
            let rows = (0..n).fold(T::zero(), |acc, x| {
                let s = (0..n).fold(T::zero(), |a, y| a + ((k[(x, y)] - T::one()) * self.m[y]).abs());
                acc + self.m[x] * s * s
            });
            upper = upper.min(rows.sqrt());
        }
        InftyTo2 { lower: lower.min(upper), upper }
    }

    fn mean_sq(&self, f: &[T]) -> T {
        f.iter().zip(&self.m).fold(T::zero(), |a, (&v, &w)| a + w * v * v)
    }

    fn normalized(&self, f: &[T]) -> Vec<T> {
        let s = self.mean_sq(f).sqrt();
        if s > T::zero() {
            f.iter().map(|&v| v / s).collect()
        } else {
            f.to_vec()
        }
    }

    /// `μ((P_t f)² 1{|P_t f| > s})` with `f` scaled to `μ(f²) = 1`.
    pub fn tail_functional(&self, t: T, f: &[T], s: T) -> T {
        let pf = self.evolve(&self.normalized(f), t);
        pf.iter().zip(&self.m).fold(T::zero(), |a, (&v, &w)| if v.abs() > s { a + w * v * v } else { a })
    }

    /// `μ((P_t f)² exp[C_t (log(1 + (P_t f)²))^δ])` with `μ(f²) = 1`.
    pub fn ui_statistic(&self, t: T, ct: T, delta: T, f: &[T]) -> T {
        let pf = self.evolve(&self.normalized(f), t);
        pf.iter().zip(&self.m).fold(T::zero(), |a, (&v, &w)| {
            let v2 = v * v;
            a + w * v2 * (ct * v2.ln_1p().powf(delta)).exp()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InftyTo2<T> {
    pub lower: T,
    pub upper: T,
}

/// Random `f` against
/// `μ(|P_t f|²) <= e^{-2rt} μ(f²) + β(1/r)(1 - e^{-2rt}) μ(|f|)²` on `r_grid × t_grid`.
pub fn check_tt1_forward<T: Real>(
    inst: &DiscreteInstance<T>,
    spec: &SpectralData<T>,
    beta: &RateFunction<T>,
    r_grid: &[T],
    t_grid: &[T],
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let ens = Ensemble::new(inst)?;
    let two = T::lit(2.0);
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, u32::MAX as u64 - 1, k as u64);
            let f = ens.sample(EnsembleKind::of_trial(k), &mut rng);
            let c = spec.coefficients(&f);
            let (sq, ab) = (inst.mean_sq(&f), inst.mean_abs(&f));
            let mut out = (0usize, false, f64::NEG_INFINITY);
            for &t in t_grid {
                let lhs =
                    c.iter().zip(&spec.eigenvalues).fold(T::zero(), |a, (&ck, &l)| a + ck * ck * (-two * l * t).exp());
                for &r in r_grid {
                    let e = (-two * r * t).exp();
                    let rhs = e * sq + beta.eval(T::one() / r) * (-(-two * r * t).exp_m1()) * ab * ab;
                    let (bad, m) = violation(lhs, rhs);
                    out = (out.0 + 1, out.1 || bad, out.2.max(m));
                }
            }
            out
        })
        .collect();
    Ok(ViolationReport::collect(seed, per_trial))
}

/// Random `f` against the tail bound `exp[-2tΓ_t(εr)]/(1-ε)²` at `ε = 1/2`.
pub fn check_tail_bound<T: Real>(
    inst: &DiscreteInstance<T>,
    spec: &SpectralData<T>,
    beta: &RateFunction<T>,
    r_grid: &[T],
    t_grid: &[T],
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let ens = Ensemble::new(inst)?;
    let eps = T::lit(TAIL_EPS);
    let bounds: Vec<Vec<T>> =
        t_grid.iter().map(|&t| r_grid.iter().map(|&r| tail_bound(beta, t, r, eps)).collect()).collect();
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, u32::MAX as u64 - 2, k as u64);
            let f = ens.sample(EnsembleKind::of_trial(k), &mut rng);
            let mut out = (0usize, false, f64::NEG_INFINITY);
            for (t, row) in t_grid.iter().zip(&bounds) {
                for (&r, &b) in r_grid.iter().zip(row) {
                    let (bad, m) = violation(spec.tail_functional(*t, &f, r), b);
                    out = (out.0 + 1, out.1 || bad, out.2.max(m));
                }
            }
            out
        })
        .collect();
    Ok(ViolationReport::collect(seed, per_trial))
}

/// `kernel_sup(t)` against the ultraboundedness bound of `β` on `t_grid`
/// (compared in logs).
pub fn check_kernel_bound<T: Real>(
    spec: &SpectralData<T>,
    beta: &RateFunction<T>,
    t_grid: &[T],
) -> Result<ViolationReport> {
    let psi = PsiTransform::new(beta)?;
    let per_t = t_grid
        .par_iter()
        .map(|&t| {
            let (bad, m) = violation(spec.kernel_sup(t).ln(), psi.ln_kernel_bound(t));
            (1, bad, m)
        })
        .collect();
    Ok(ViolationReport::collect(0, per_t))
}

/// Squared lower bracket of `‖P_t - μ‖_{∞→2}` against `ξ(t)` from `α`.
pub fn check_xi_bound<T: Real>(
    spec: &SpectralData<T>,
    alpha: &RateFunction<T>,
    t_grid: &[T],
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let per_t = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let b = spec.norm_infty_to_2_bounds(t, trials, seed.wrapping_add(k as u64));
            let (bad, m) = violation(b.lower * b.lower, xi_from_alpha(alpha, t));
            (1, bad, m)
        })
        .collect();
    Ok(ViolationReport::collect(seed, per_t))
}

/// `(label, colour, points)` for one polyline of a chart.
pub type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);

/// One row of the decay table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow<T> {
    pub t: T,
    pub decay_2to2: T,
    pub kernel_sup: T,
    pub lower: T,
    pub upper: T,
    pub xi_bound: Option<T>,
}

pub fn decay_table<T: Real>(
    spec: &SpectralData<T>,
    alpha: Option<&RateFunction<T>>,
    t_grid: &[T],
    trials: usize,
    seed: u64,
) -> Vec<DecayRow<T>> {
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let b = spec.norm_infty_to_2_bounds(t, trials, seed.wrapping_add(k as u64));
            DecayRow {
                t,
                decay_2to2: spec.decay_2to2(t),
                kernel_sup: spec.kernel_sup(t),
                lower: b.lower,
                upper: b.upper,
                xi_bound: alpha.map(|a| xi_from_alpha(a, t)),
            }
        })
        .collect()
}

pub fn decay_csv<T: Real>(rows: &[DecayRow<T>]) -> String {
    let mut out = String::from("t,decay_2to2,kernel_sup,lower,upper,xi_bound\n");
    for r in rows {
        let xi = r.xi_bound.map_or(String::new(), |x| format!("{:e}", x.f64()));
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{}",
            r.t.f64(),
            r.decay_2to2.f64(),
            r.kernel_sup.f64(),
            r.lower.f64(),
            r.upper.f64(),
            xi
        );
    }
    out
}

/// Log-log line chart of the decay columns.
pub fn decay_svg<T: Real>(rows: &[DecayRow<T>]) -> String {
    let series: Vec<Series> = vec![
        ("decay_2to2", "#1f77b4", rows.iter().map(|r| (r.t.f64(), r.decay_2to2.f64())).collect()),
        ("kernel_sup", "#d62728", rows.iter().map(|r| (r.t.f64(), r.kernel_sup.f64())).collect()),
        ("lower", "#2ca02c", rows.iter().map(|r| (r.t.f64(), r.lower.f64())).collect()),
        ("xi_bound", "#9467bd", rows.iter().filter_map(|r| r.xi_bound.map(|x| (r.t.f64(), x.f64()))).collect()),
    ];
    line_chart_svg(&series)
}

/// Minimal log-log SVG line chart.
pub fn line_chart_svg(series: &[Series]) -> String {
    let (w, h, pad) = (640.0, 420.0, 50.0);
    let pts = || series.iter().flat_map(|s| s.2.iter()).filter(|(x, y)| *x > 0.0 && *y > 0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts() {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| pad + (x.log10() - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y.log10() - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    let _ = writeln!(
        out,
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        out,
        "<text x=\"{pad}\" y=\"{}\" font-size=\"11\">log10 x: [{x0:.2}, {x1:.2}]  log10 y: [{y0:.2}, {y1:.2}]</text>",
        h - 15.0
    );
    for (k, (name, colour, data)) in series.iter().enumerate() {
        let path: Vec<String> = data
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{colour}\" points=\"{}\"/>", path.join(" "));
        }
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{colour}\">{name}</text>",
            w - pad - 90.0,
            pad + 15.0 + 15.0 * k as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Edge, Node};
    use approx::assert_relative_eq;

    fn two_state() -> DiscreteInstance<f64> {
        let node = |x| Node { x, y: 0.0, boundary: false };
        DiscreteInstance::from_parts(vec![node(0.0), node(1.0)], vec![0.5, 0.5], vec![Edge { i: 0, j: 1, c: 0.5 }])
            .unwrap()
    }

    #[test]
    fn two_state_semigroup() {
        let s = SpectralData::new(&two_state()).unwrap();
        assert_relative_eq!(s.gap(), 2.0, epsilon = 1e-12);
        let p = s.evolve(&[1.0, -1.0], 0.5);
        assert_relative_eq!(p[0], (-1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(p[1], -(-1.0f64).exp(), epsilon = 1e-12);
        for t in [0.0, 0.3, 2.0] {
            assert_relative_eq!(s.kernel_sup(t), 1.0 + (-2.0 * t).exp(), epsilon = 1e-12);
            assert_relative_eq!(s.decay_2to2(t), (-2.0 * t).exp(), epsilon = 1e-12);
            let b = s.norm_infty_to_2_bounds(t, 8, 1);
            assert_relative_eq!(b.lower, (-2.0 * t).exp(), epsilon = 1e-12);
            assert_relative_eq!(b.upper, (-2.0 * t).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn two_state_tail() {
        let s = SpectralData::new(&two_state()).unwrap();
        let v = (-2.0f64).exp();
        assert_relative_eq!(s.tail_functional(1.0, &[3.0, -3.0], 0.1), v * v, epsilon = 1e-12);
        assert_eq!(s.tail_functional(1.0, &[3.0, -3.0], 0.2), 0.0);
        assert_relative_eq!(s.ui_statistic(1.0, 0.0, 1.0, &[1.0, -1.0]), v * v, epsilon = 1e-12);
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = line_chart_svg(&[("a", "#000", vec![(1.0, 1.0), (10.0, 0.1)])]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
