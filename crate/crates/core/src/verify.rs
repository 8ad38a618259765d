//! Oracles on a discrete instance: the Poincaré constant, lower bounds on the
//! discrete rate functions `β̂`, `α̂`, randomized inequality checks and the
//! calibration of multiplicative constants.
//!
//! `β̂` and `α̂` are projected gradient ascents preconditioned by a sparse
//! Cholesky factor (`M + rE` for `β̂`, `E + λ₁M` for `α̂`), so the iteration
//! count does not grow with the grid. Every reported value is the objective
//! evaluated exactly at a feasible point, hence a lower bound on the supremum.

use nalgebra::SymmetricEigen;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::DiscreteInstance;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, symmetrized, SpdSolver};
use crate::ratefn::RateFunction;
use crate::sampling::{stream, Ensemble, EnsembleKind};
use crate::scalar::Real;

pub const MIN_RESTARTS: usize = 8;
pub const MAX_ITER: usize = 10_000;
pub const REL_STOP: f64 = 1e-10;
pub const VIOLATION_REL: f64 = 1e-10;
pub const VIOLATION_ABS: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const FIEDLER_ITER: usize = 500;
/// Short ascents per `β̂` restart; the best one is run to convergence.
const SCOUTS: usize = 12;
const SCOUT_ITER: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerStatus {
    pub converged: bool,
    /// Some restart stopped on the iteration cap.
    pub max_iter: bool,
    /// `(best - worst) / best` over the random restarts.
    pub multi_start_spread: f64,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<T> {
    pub r: T,
    pub value: T,
    pub maximizer: Vec<T>,
    pub status: OptimizerStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub trials: usize,
    /// `(f, parameter)` pairs evaluated.
    pub checks: usize,
    /// Trials with at least one violating pair.
    pub violations: usize,
    /// Largest `(LHS - RHS) / RHS`; negative when every pair held.
    pub worst_margin: f64,
    pub seed: u64,
}

impl ViolationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub(crate) fn empty(seed: u64) -> Self {
        Self { trials: 0, checks: 0, violations: 0, worst_margin: f64::NEG_INFINITY, seed }
    }

    /// Folds per-trial `(checks, violated, margin)` triples.
    pub(crate) fn collect(seed: u64, per_trial: Vec<(usize, bool, f64)>) -> Self {
        per_trial.into_iter().fold(Self::empty(seed), |mut acc, (checks, bad, margin)| {
            acc.trials += 1;
            acc.checks += checks;
            acc.violations += bad as usize;
            acc.worst_margin = acc.worst_margin.max(margin);
            acc
        })
    }
}

/// Whether `lhs <= rhs` fails beyond the pinned tolerances, and the relative margin.
pub fn violation<T: Real>(lhs: T, rhs: T) -> (bool, f64) {
    let bad = lhs > rhs * (T::one() + T::lit(VIOLATION_REL)) + T::lit(VIOLATION_ABS);
    let margin = ((lhs - rhs) / rhs.abs().max(T::min_positive())).f64();
    (bad, margin)
}

/// Smallest nonzero eigenvalue of `E f = λ M f` from a dense decomposition.
pub fn spectral_gap<T: Real>(inst: &DiscreteInstance<T>) -> Result<T> {
    if !inst.is_connected() {
        return Err(Error::Disconnected);
    }
    let eig = SymmetricEigen::new(symmetrized(inst));
    let mut ev: Vec<T> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let top = ev[ev.len() - 1].abs();
    let l1 = ev[1];
    if !(l1 > top * T::epsilon() * T::nat(inst.len())) {
        return Err(Error::Disconnected);
    }
    Ok(l1)
}

/// `C(P) = 1/λ₁`.
pub fn poincare_constant<T: Real>(inst: &DiscreteInstance<T>) -> Result<T> {
    Ok(T::one() / spectral_gap(inst)?)
}

fn mean_zero<T: Real>(inst: &DiscreteInstance<T>, f: &mut [T]) {
    let mu = inst.mean(f);
    for v in f.iter_mut() {
        *v -= mu;
    }
}

fn scale_to_unit<T: Real>(inst: &DiscreteInstance<T>, f: &mut [T]) {
    let s = inst.mean_sq(f).sqrt();
    if s > T::zero() {
        for v in f.iter_mut() {
            *v /= s;
        }
    }
}

/// Eigenvector of the gap by shifted inverse iteration; returns `(λ₁, φ₁)`
/// with `μ(φ₁) = 0`, `μ(φ₁²) = 1`.
pub fn fiedler<T: Real>(inst: &DiscreteInstance<T>) -> Result<(T, Vec<T>)> {
    if !inst.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = inst.len();
    let diag_ratio = {
        let mut d = vec![T::zero(); n];
        for e in &inst.edges {
            d[e.i] += e.c;
            d[e.j] += e.c;
        }
        d.iter().zip(&inst.m).fold(T::zero(), |a, (&c, &w)| a.max(c / w))
    };
    let sigma = diag_ratio * T::lit(1e-8);
    let solver = SpdSolver::mass_energy(inst, sigma, T::one())?;
    let mut f: Vec<T> = (0..n).map(|i| inst.nodes[i].x + T::lit(0.1) * T::nat(i % 7) / T::nat(7)).collect();
    mean_zero(inst, &mut f);
    scale_to_unit(inst, &mut f);
    let mut lambda = inst.energy(&f);
    for _ in 0..FIEDLER_ITER {
        let rhs: Vec<T> = f.iter().zip(&inst.m).map(|(&v, &w)| v * w).collect();
        let mut g = solver.solve(&rhs);
        mean_zero(inst, &mut g);
        scale_to_unit(inst, &mut g);
        let next = inst.energy(&g);
        f = g;
        let done = (next - lambda).abs() <= T::lit(1e-13) * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    if !(lambda > T::zero()) {
        return Err(Error::Disconnected);
    }
    Ok((lambda, f))
}

struct Local<T> {
    value: T,
    f: Vec<T>,
    converged: bool,
    capped: bool,
}

/// Ascent of a scale-invariant objective `q` along preconditioned gradients,
/// with `project` applied after every step (it may return `None` when the
/// step leaves the feasible cone).
#[allow(clippy::type_complexity)]
fn ascend<T: Real>(
    start: Vec<T>,
    objective: &dyn Fn(&[T]) -> T,
    gradient: &dyn Fn(&[T], T) -> Vec<T>,
    precondition: &dyn Fn(&[T], &[T], T) -> Vec<T>,
    project: &dyn Fn(Vec<T>) -> Option<Vec<T>>,
    max_iter: usize,
) -> Local<T> {
    let Some(mut f) = project(start) else {
        return Local { value: -T::infinity(), f: Vec::new(), converged: false, capped: false };
    };
    let mut q = objective(&f);
    for _ in 0..max_iter {
        let g = gradient(&f, q);
        let d = precondition(&f, &g, q);
        let mut eta = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if let Some(cand) = project(axpy(&f, eta, &d)) {
                let qc = objective(&cand);
                let lin = dot(&g, &cand) - dot(&g, &f);
                if qc >= q + T::lit(ARMIJO) * lin.max(T::zero()) && qc >= q {
                    accepted = Some((cand, qc));
                    break;
                }
            }
            eta *= T::lit(0.5);
        }
        let Some((cand, qc)) = accepted else {
            return Local { value: q, f, converged: true, capped: false };
        };
        let rel = (qc - q) / q.abs().max(T::min_positive());
        f = cand;
        q = qc;
        if rel < T::lit(REL_STOP) {
            return Local { value: q, f, converged: true, capped: false };
        }
    }
    Local { value: q, f, converged: false, capped: true }
}

fn finish<T: Real>(r: T, constant: Option<Local<T>>, locals: Vec<Local<T>>) -> OracleResult<T> {
    let vals: Vec<f64> = locals.iter().map(|l| l.value.f64()).filter(|v| v.is_finite()).collect();
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if best.abs() > 0.0 && vals.len() > 1 { (best - worst) / best.abs() } else { 0.0 };
    let status = OptimizerStatus {
        converged: locals.iter().all(|l| l.converged),
        max_iter: locals.iter().any(|l| l.capped),
        multi_start_spread: spread,
        restarts: locals.len(),
    };
    let winner = constant
        .into_iter()
        .chain(locals)
        .filter(|l| !l.value.f64().is_nan())
        .fold(None::<Local<T>>, |acc, l| match acc {
            Some(a) if a.value >= l.value => Some(a),
            _ => Some(l),
        })
        .expect("at least one start");
    OracleResult { r, value: winner.value, maximizer: winner.f, status }
}

fn beta_hat_with<T: Real>(
    inst: &DiscreteInstance<T>,
    ens: &Ensemble<T>,
    r: T,
    restarts: usize,
    seed: u64,
    r_index: u64,
) -> Result<OracleResult<T>> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidRate(format!("beta_hat needs r > 0, got {}", r.f64())));
    }
    if restarts < MIN_RESTARTS {
        return Err(Error::NonConvergent(format!("need at least {MIN_RESTARTS} restarts")));
    }
    SpdSolver::mass_energy(inst, T::one(), r)?;
    let objective = |f: &[T]| {
        let s = inst.mean(f);
        (inst.mean_sq(f) - r * inst.energy(f)) / (s * s)
    };
    let gradient = |f: &[T], q: T| {
        let ef = inst.apply_e(f);
        (0..f.len()).map(|i| T::lit(2.0) * (inst.m[i] * f[i] - r * ef[i] - q * inst.m[i])).collect()
    };
    // Newton scaling (q - 1)M + rE once q > 2; two-metric projection: nodes
    // pinned at zero with an outward gradient are decoupled
    let precondition = |f: &[T], g: &[T], q: T| {
        let pinned: Vec<bool> = f.iter().zip(g).map(|(&v, &gi)| v <= T::zero() && gi < T::zero()).collect();
        let a = (q - T::one()).max(T::one());
        match SpdSolver::decoupled(inst, a, r, &pinned) {
            Ok(s) => s.solve(g),
            Err(_) => g.iter().zip(&inst.m).map(|(&gi, &w)| gi / w).collect(),
        }
    };
    let project = |mut f: Vec<T>| {
        for v in f.iter_mut() {
            *v = v.max(T::zero());
        }
        let s = inst.mean(&f);
        if !(s > T::zero()) || !s.is_finite() {
            return None;
        }
        f.iter_mut().for_each(|v| *v /= s);
        Some(f)
    };
    // maximizers are bumps of width about sqrt(r)
    let width = r.sqrt();
    let constant = Local {
        value: objective(&vec![T::one(); inst.len()]),
        f: vec![T::one(); inst.len()],
        converged: true,
        capped: false,
    };
    let locals: Vec<Local<T>> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, r_index, k as u64);
            let scouts: Vec<Local<T>> = (0..SCOUTS)
                .map(|j| {
                    let start = ens.envelope(width / T::lit(4.0), width, j % 3 == 0, &mut rng);
                    ascend(start, &objective, &gradient, &precondition, &project, SCOUT_ITER)
                })
                .collect();
            let best = scouts.into_iter().filter(|l| l.value.is_finite()).fold(None::<Local<T>>, |acc, l| match acc {
                Some(a) if a.value >= l.value => Some(a),
                _ => Some(l),
            });
            match best {
                Some(b) => ascend(b.f, &objective, &gradient, &precondition, &project, MAX_ITER),
                None => Local { value: -T::infinity(), f: Vec::new(), converged: false, capped: false },
            }
        })
        .collect();
    if locals.iter().all(|l| !l.value.is_finite()) {
        return Err(Error::NonConvergent("every projection failed".into()));
    }
    Ok(finish(r, Some(constant), locals))
}

/// Lower bound on `β(r) = sup{μ(f²) - r ℰ(f,f) : μ(|f|) = 1}` over `f >= 0`.
pub fn beta_hat<T: Real>(inst: &DiscreteInstance<T>, r: T, restarts: usize, seed: u64) -> Result<OracleResult<T>> {
    let ens = Ensemble::new(inst)?;
    beta_hat_with(inst, &ens, r, restarts, seed, 0)
}

/// [`beta_hat`] on every point of `r_grid`, streams keyed by the grid index.
pub fn beta_hat_grid<T: Real>(
    inst: &DiscreteInstance<T>,
    r_grid: &[T],
    restarts: usize,
    seed: u64,
) -> Result<Vec<OracleResult<T>>> {
    let ens = Ensemble::new(inst)?;
    r_grid.par_iter().enumerate().map(|(k, &r)| beta_hat_with(inst, &ens, r, restarts, seed, k as u64)).collect()
}

fn alpha_start<T: Real, R: Rng>(
    inst: &DiscreteInstance<T>,
    ens: &Ensemble<T>,
    phi: &[T],
    k: usize,
    rng: &mut R,
) -> Vec<T> {
    match k % 4 {
        0 => {
            let mut f: Vec<T> = phi.iter().map(|&v| v + T::lit(0.05) * T::lit(rng.random::<f64>() - 0.5)).collect();
            mean_zero(inst, &mut f);
            f
        }
        1 => {
            let w = T::lit(rng.random_range(0.05..2.0));
            let mut f: Vec<T> = phi.iter().map(|&v| (v / w).tanh()).collect();
            mean_zero(inst, &mut f);
            f
        }
        2 => ens.sample_mean_zero(EnsembleKind::Smoothed, rng),
        _ => ens.sample_mean_zero(EnsembleKind::Bump, rng),
    }
}

fn alpha_hat_with<T: Real>(
    inst: &DiscreteInstance<T>,
    ens: &Ensemble<T>,
    gap: &(T, Vec<T>),
    r: T,
    restarts: usize,
    seed: u64,
    r_index: u64,
) -> Result<OracleResult<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidRate(format!("alpha_hat needs r > 0, got {}", r.f64())));
    }
    if restarts < MIN_RESTARTS {
        return Err(Error::NonConvergent(format!("need at least {MIN_RESTARTS} restarts")));
    }
    let status = OptimizerStatus { converged: true, max_iter: false, multi_start_spread: 0.0, restarts };
    if r >= T::one() {
        return Ok(OracleResult { r, value: T::zero(), maximizer: vec![T::zero(); inst.len()], status });
    }
    let (lambda1, phi) = gap;
    let solver = SpdSolver::mass_energy(inst, *lambda1, T::one())?;
    let sup_sq = |f: &[T]| {
        f.iter().enumerate().fold((0usize, T::zero()), |(k, s), (i, &v)| if v * v > s { (i, v * v) } else { (k, s) })
    };
    let objective = |f: &[T]| {
        let d = inst.energy(f);
        if !(d > T::zero()) {
            return -T::infinity();
        }
        (inst.mean_sq(f) - r * sup_sq(f).1) / d
    };
    let gradient = |f: &[T], q: T| {
        let d = inst.energy(f);
        let ef = inst.apply_e(f);
        let (k, _) = sup_sq(f);
        let mut g: Vec<T> = (0..f.len()).map(|i| T::lit(2.0) * (inst.m[i] * f[i] - q * ef[i]) / d).collect();
        g[k] -= T::lit(2.0) * r * f[k] / d;
        g
    };
    let precondition = |_: &[T], g: &[T], _: T| {
        let mut d = solver.solve(g);
        mean_zero(inst, &mut d);
        d
    };
    let project = |mut f: Vec<T>| {
        mean_zero(inst, &mut f);
        scale_to_unit(inst, &mut f);
        (inst.energy(&f) > T::zero()).then_some(f)
    };
    let locals: Vec<Local<T>> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, r_index, k as u64);
            let start = alpha_start(inst, ens, phi, k, &mut rng);
            ascend(start, &objective, &gradient, &precondition, &project, MAX_ITER)
        })
        .collect();
    let mut res = finish(r, None, locals);
    res.value = res.value.max(T::zero());
    Ok(res)
}

/// Lower bound on `α(r) = sup{(μ(f²) - r‖f‖²_∞)⁺ : μ(f) = 0, ℰ(f,f) = 1}` in
/// quotient form; `0` for `r >= 1`.
pub fn alpha_hat<T: Real>(inst: &DiscreteInstance<T>, r: T, restarts: usize, seed: u64) -> Result<OracleResult<T>> {
    let ens = Ensemble::new(inst)?;
    let gap = fiedler(inst)?;
    alpha_hat_with(inst, &ens, &gap, r, restarts, seed, 0)
}

pub fn alpha_hat_grid<T: Real>(
    inst: &DiscreteInstance<T>,
    r_grid: &[T],
    restarts: usize,
    seed: u64,
) -> Result<Vec<OracleResult<T>>> {
    let ens = Ensemble::new(inst)?;
    let gap = fiedler(inst)?;
    r_grid.par_iter().enumerate().map(|(k, &r)| alpha_hat_with(inst, &ens, &gap, r, restarts, seed, k as u64)).collect()
}

/// Samples the three ensembles and checks
/// `μ(f²) <= r ℰ(f,f) + β(r) μ(|f|)²` at every `r` in the grid.
pub fn check_super_poincare<T: Real>(
    inst: &DiscreteInstance<T>,
    beta: &RateFunction<T>,
    r_grid: &[T],
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let ens = Ensemble::new(inst)?;
    let bvals: Vec<T> = r_grid.iter().map(|&r| beta.eval(r)).collect();
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, u32::MAX as u64, k as u64);
            let f = ens.sample(EnsembleKind::of_trial(k), &mut rng);
            let (sq, en, ab) = (inst.mean_sq(&f), inst.energy(&f), inst.mean_abs(&f));
            r_grid.iter().zip(&bvals).fold((0, false, f64::NEG_INFINITY), |(c, bad, worst), (&r, &b)| {
                let (v, m) = violation(sq, r * en + b * ab * ab);
                (c + 1, bad || v, worst.max(m))
            })
        })
        .collect();
    Ok(ViolationReport::collect(seed, per_trial))
}

/// Mean-zero ensembles against `μ(f²) <= α(r) ℰ(f,f) + r ‖f‖²_∞`.
pub fn check_weak_poincare<T: Real>(
    inst: &DiscreteInstance<T>,
    alpha: &RateFunction<T>,
    r_grid: &[T],
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let ens = Ensemble::new(inst)?;
    let avals: Vec<T> = r_grid.iter().map(|&r| alpha.eval(r)).collect();
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, u32::MAX as u64, k as u64);
            let f = ens.sample_mean_zero(EnsembleKind::of_trial(k), &mut rng);
            let (sq, en) = (inst.mean_sq(&f), inst.energy(&f));
            let sup = f.iter().fold(T::zero(), |a, &v| a.max(v * v));
            r_grid.iter().zip(&avals).fold((0, false, f64::NEG_INFINITY), |(c, bad, worst), (&r, &a)| {
                let (v, m) = violation(sq, a * en + r * sup);
                (c + 1, bad || v, worst.max(m))
            })
        })
        .collect();
    Ok(ViolationReport::collect(seed, per_trial))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

fn least_squares(points: &[(f64, f64)]) -> ScalingFit {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy, syy) = points.iter().fold((0.0, 0.0, 0.0), |(a, b, c), &(x, y)| {
        (a + (x - mx) * (x - mx), b + (x - mx) * (y - my), c + (y - my) * (y - my))
    });
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    ScalingFit { slope, intercept: my - slope * mx, r2 }
}

fn check_span(samples: &[(f64, f64)]) -> Result<()> {
    let (lo, hi) = samples.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &(r, _)| (a.min(r), b.max(r)));
    if samples.len() < 5 || !(lo > 0.0) || hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InsufficientSpan);
    }
    Ok(())
}

/// Least-squares line through `(ln r, ln value)`.
pub fn fit_scaling_exponent(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    check_span(samples)?;
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(r, v)| (r.ln(), v.ln())).collect();
    Ok(least_squares(&pts))
}

/// Least-squares line through `(ln r, ln ln value)`, for exponential growth.
pub fn fit_exp_scaling_exponent(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    check_span(samples)?;
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(r, v)| (r.ln(), v.ln().ln())).collect();
    Ok(least_squares(&pts))
}

/// Far point at which every super Poincaré rate must still be at least 1.
pub const FLOOR_R: f64 = 1e8;

/// `targets` plus the exact constraint `β(r) ≥ 1`, which holds for every
/// `r` because `f = 1` has zero energy.
pub fn with_unit_floor<T: Real>(targets: &[(T, T)]) -> Vec<(T, T)> {
    let mut out = targets.to_vec();
    out.push((T::lit(FLOOR_R), T::one()));
    out
}

/// Near point at which a weak Poincaré rate must reach the Poincaré constant.
pub const LIMIT_R: f64 = 1e-12;

/// `targets` plus `α(0+) = 1/λ₁`, the exact small-`r` limit of the optimal
/// weak Poincaré rate on a finite state space.
pub fn with_poincare_limit<T: Real>(inst: &DiscreteInstance<T>, targets: &[(T, T)]) -> Result<Vec<(T, T)>> {
    let mut out = targets.to_vec();
    out.push((T::lit(LIMIT_R), poincare_constant(inst)?));
    Ok(out)
}

/// Smallest `c` (to relative precision `1e-9`) such that `family(c)` dominates
/// every `(r, value)` target. `family` must be pointwise non-decreasing in `c`.
pub fn calibrate<T: Real>(
    family: &dyn Fn(T) -> Result<RateFunction<T>>,
    targets: &[(T, T)],
) -> Result<(T, RateFunction<T>)> {
    let dominates = |c: T| -> Result<bool> {
        let f = family(c)?;
        Ok(targets.iter().all(|&(r, v)| f.eval(r) >= v))
    };
    let two = T::lit(2.0);
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut guard = 0;
    while !dominates(hi)? {
        lo = hi;
        hi *= two;
        guard += 1;
        if guard > 200 {
            return Err(Error::NonConvergent("calibration constant diverges".into()));
        }
    }
    if lo == T::zero() {
        while hi > T::lit(1e-12) && dominates(hi / two)? {
            hi /= two;
        }
        lo = hi / two;
    }
    for _ in 0..100 {
        if (hi - lo) <= T::lit(1e-9) * hi {
            break;
        }
        let mid = (lo + hi) / two;
        if dominates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, family(hi)?))
}
