//! Seeded random streams and the test-function ensembles used by the checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::discretize::DiscreteInstance;
use crate::error::Result;
use crate::linalg::SpdSolver;
use crate::scalar::Real;

const SMOOTHING_LEVELS: usize = 6;

/// Independent stream for the pair `(a, b)` under `seed`.
pub fn stream(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((a << 32) ^ b);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Independent standard normals per node.
    Gaussian,
    /// Gaussian noise passed through `(M + ℓ² E)^{-1} M` at a random length `ℓ`.
    Smoothed,
    /// Indicator of a random ball, centred on a boundary node half the time.
    Bump,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 3] = [EnsembleKind::Gaussian, EnsembleKind::Smoothed, EnsembleKind::Bump];

    /// Round-robin assignment of trial `k`.
    pub fn of_trial(k: usize) -> Self {
        Self::ALL[k % 3]
    }
}

/// Test-function sampler tied to one instance.
pub struct Ensemble<T: Real> {
    x: Vec<T>,
    y: Vec<T>,
    boundary: Vec<usize>,
    /// Distance to the nearest boundary node.
    depth: Vec<T>,
    circumference: Option<T>,
    h: T,
    diameter: T,
    m: Vec<T>,
    smoothers: Vec<SpdSolver<T>>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(inst: &DiscreteInstance<T>) -> Result<Self> {
        let circumference = inst.metadata.circumference;
        let x: Vec<T> = inst.nodes.iter().map(|n| n.x).collect();
        let y: Vec<T> = inst.nodes.iter().map(|n| n.y).collect();
        let (lo, hi) = x.iter().fold((T::infinity(), -T::infinity()), |(a, b), &v| (a.min(v), b.max(v)));
        let span = (hi - lo).max(T::lit(1e-12));
        let diameter = circumference.map_or(span, |c| span.max(c / T::lit(2.0)));
        let h = span / T::nat(inst.metadata.n_interior.max(1));
        let smoothers = (0..SMOOTHING_LEVELS)
            .map(|k| {
                let frac = T::nat(k) / T::nat(SMOOTHING_LEVELS - 1);
                let ell = h * (diameter / h).powf(frac);
                SpdSolver::mass_energy(inst, T::one(), ell * ell)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ens = Self {
            boundary: inst.nodes.iter().enumerate().filter(|(_, n)| n.boundary).map(|(i, _)| i).collect(),
            depth: Vec::new(),
            x,
            y,
            circumference,
            h,
            diameter,
            m: inst.m.clone(),
            smoothers,
        };
        ens.depth = (0..inst.len())
            .map(|i| ens.boundary.iter().fold(T::infinity(), |d, &b| d.min(ens.distance(i, b))))
            .collect();
        Ok(ens)
    }

    fn distance(&self, i: usize, j: usize) -> T {
        let dx = self.x[i] - self.x[j];
        let mut dy = (self.y[i] - self.y[j]).abs();
        if let Some(c) = self.circumference {
            dy = dy.min(c - dy);
        }
        (dx * dx + dy * dy).sqrt()
    }

    pub fn sample<R: Rng>(&self, kind: EnsembleKind, rng: &mut R) -> Vec<T> {
        let n = self.m.len();
        let gauss = |rng: &mut R| -> Vec<T> { (0..n).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect() };
        match kind {
            EnsembleKind::Gaussian => gauss(rng),
            EnsembleKind::Smoothed => {
                let level = rng.random_range(0..self.smoothers.len());
                let noise = gauss(rng);
                let rhs: Vec<T> = noise.iter().zip(&self.m).map(|(&f, &w)| f * w).collect();
                self.smoothers[level].solve(&rhs)
            }
            EnsembleKind::Bump => {
                let centre = if !self.boundary.is_empty() && rng.random_bool(0.5) {
                    self.boundary[rng.random_range(0..self.boundary.len())]
                } else {
                    rng.random_range(0..n)
                };
                let u: f64 = rng.random();
                let radius = self.h * (self.diameter / self.h).powf(T::lit(u));
                let height = T::lit(rng.random_range(0.5..2.0));
                (0..n).map(|i| if self.distance(i, centre) <= radius { height } else { T::zero() }).collect()
            }
        }
    }

    /// Nonnegative noise under `exp(-d/ℓ)` with `ℓ` log-uniform on `[lo, hi]`
    /// (clamped to `[h, diameter]`), centred on a boundary node if
    /// `on_boundary` and otherwise on a node at least `2ℓ` from the boundary
    /// when there is one.
    pub fn envelope<R: Rng>(&self, lo: T, hi: T, on_boundary: bool, rng: &mut R) -> Vec<T> {
        let n = self.m.len();
        let lo = lo.max(self.h).min(self.diameter);
        let hi = hi.min(self.diameter).max(lo);
        let ell = lo * (hi / lo).powf(T::lit(rng.random::<f64>()));
        let centre = if on_boundary && !self.boundary.is_empty() {
            self.boundary[rng.random_range(0..self.boundary.len())]
        } else {
            let deep: Vec<usize> = (0..n).filter(|&i| self.depth[i] >= ell * T::lit(2.0)).collect();
            if deep.is_empty() {
                rng.random_range(0..n)
            } else {
                deep[rng.random_range(0..deep.len())]
            }
        };
        (0..n).map(|i| (-self.distance(i, centre) / ell).exp() * T::lit(1.0 + 0.5 * rng.random::<f64>())).collect()
    }

    /// Sample recentred to `μ`-mean zero.
    pub fn sample_mean_zero<R: Rng>(&self, kind: EnsembleKind, rng: &mut R) -> Vec<T> {
        let mut f = self.sample(kind, rng);
        let mean = self.m.iter().zip(&f).fold(T::zero(), |a, (&w, &v)| a + w * v);
        for v in f.iter_mut() {
            *v -= mean;
        }
        f
    }
}
