//! Jump-chain simulation of the discrete sticky process.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::Generator;
use crate::error::{Error, Result};
use crate::sampling::stream;
use crate::scalar::Real;

pub const BATCHES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Batch<T> {
    pub interior_time: T,
    pub total_time: T,
    /// Time integral of the observable over the window.
    pub integral: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats<T> {
    pub total_time: T,
    pub interior_time: T,
    pub boundary_time: T,
    pub jump_count: u64,
    pub occupation_fraction: T,
    /// Batch-means standard error of `occupation_fraction`.
    pub standard_error: T,
    pub batches: Vec<Batch<T>>,
}

/// Time average of `f` with its batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicAverage<T> {
    pub value: T,
    pub standard_error: T,
}

fn batch_means<T: Real>(ratios: impl Iterator<Item = T>) -> T {
    let v: Vec<T> = ratios.collect();
    let k = T::nat(v.len());
    let mean = v.iter().fold(T::zero(), |a, &x| a + x) / k;
    let var = v.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean)) / (k - T::one());
    (var / k).sqrt()
}

/// One trajectory of length `horizon` from `start`, cut into [`BATCHES`]
/// consecutive windows of equal length.
fn run<T: Real>(gen: &Generator<T>, start: usize, horizon: T, seed: u64, f: &[T]) -> Result<(Vec<Batch<T>>, u64)> {
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidInstance("horizon must be positive".into()));
    }
    if start >= gen.len() {
        return Err(Error::InvalidInstance(format!("start node {start} out of range")));
    }
    let window = horizon / T::nat(BATCHES);
    let mut batches = vec![Batch { interior_time: T::zero(), total_time: T::zero(), integral: T::zero() }; BATCHES];
    let mut rng = stream(seed, 0, 0);
    let (mut x, mut now, mut jumps) = (start, T::zero(), 0u64);
    while now < horizon {
        let q = gen.exit[x];
        if !(q > T::zero()) {
            return Err(Error::AbsorbingState(x));
        }
        let u: f64 = rng.random();
        let hold = -T::lit((1.0 - u).ln()) / q;
        let end = (now + hold).min(horizon);
        // spread the holding interval over the windows it covers
        let mut s = now;
        while s < end {
            let b = ((s / window).floor().f64() as usize).min(BATCHES - 1);
            let cut = if b == BATCHES - 1 { end } else { (window * T::nat(b + 1)).min(end) };
            let dt = cut - s;
            let batch = &mut batches[b];
            batch.total_time += dt;
            batch.integral += dt * f[x];
            if !gen.boundary[x] {
                batch.interior_time += dt;
            }
            s = if cut > s { cut } else { end };
        }
        now = end;
        if now >= horizon {
            break;
        }
        let mut target = T::lit(rng.random::<f64>()) * q;
        let row = &gen.rates[x];
        let mut next = row[row.len() - 1].0;
        for &(j, rate) in row {
            if target < rate {
                next = j;
                break;
            }
            target -= rate;
        }
        x = next;
        jumps += 1;
    }
    Ok((batches, jumps))
}

pub fn simulate<T: Real>(gen: &Generator<T>, start: usize, horizon: T, seed: u64) -> Result<TrajectoryStats<T>> {
    let zeros = vec![T::zero(); gen.len()];
    let (batches, jump_count) = run(gen, start, horizon, seed, &zeros)?;
    let interior_time = batches.iter().fold(T::zero(), |a, b| a + b.interior_time);
    let total_time = batches.iter().fold(T::zero(), |a, b| a + b.total_time);
    let boundary_time = total_time - interior_time;
    Ok(TrajectoryStats {
        total_time: interior_time + boundary_time,
        interior_time,
        boundary_time,
        jump_count,
        occupation_fraction: interior_time / total_time,
        standard_error: batch_means(batches.iter().map(|b| b.interior_time / b.total_time)),
        batches,
    })
}

/// Time average of `f` along a trajectory from node 0.
pub fn ergodic_average<T: Real>(gen: &Generator<T>, f: &[T], horizon: T, seed: u64) -> Result<ErgodicAverage<T>> {
    if f.len() != gen.len() {
        return Err(Error::InvalidInstance("observable length differs from the state space".into()));
    }
    let (batches, _) = run(gen, 0, horizon, seed, f)?;
    let total = batches.iter().fold(T::zero(), |a, b| a + b.total_time);
    let integral = batches.iter().fold(T::zero(), |a, b| a + b.integral);
    Ok(ErgodicAverage {
        value: integral / total,
        standard_error: batch_means(batches.iter().map(|b| b.integral / b.total_time)),
    })
}

pub fn batches_csv<T: Real>(stats: &TrajectoryStats<T>) -> String {
    let mut out = String::from("batch,interior_time,total_time\n");
    for (k, b) in stats.batches.iter().enumerate() {
        let _ = writeln!(out, "{k},{:e},{:e}", b.interior_time.f64(), b.total_time.f64());
    }
    out
}

/// Expected number of jumps on `[0, horizon]` at stationarity.
pub fn expected_jumps<T: Real>(gen: &Generator<T>, m: &[T], horizon: T) -> T {
    horizon * m.iter().zip(&gen.exit).fold(T::zero(), |a, (&w, &q)| a + w * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{generator_of, DiscreteInstance, Edge, Node};

    fn two_state() -> Generator<f64> {
        let node = |x, boundary| Node { x, y: 0.0, boundary };
        let inst = DiscreteInstance::from_parts(
            vec![node(0.0, false), node(1.0, true)],
            vec![0.5, 0.5],
            vec![Edge { i: 0, j: 1, c: 0.5 }],
        )
        .unwrap();
        generator_of(&inst).unwrap()
    }

    #[test]
    fn two_state_occupation() {
        let s = simulate(&two_state(), 0, 1e4, 3).unwrap();
        assert_eq!(s.interior_time + s.boundary_time, s.total_time);
        assert!((s.occupation_fraction - 0.5).abs() < 3.0 * s.standard_error, "{s:?}");
        assert!((s.total_time - 1e4).abs() < 1e-6);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(simulate(&two_state(), 0, 100.0, 9).unwrap(), simulate(&two_state(), 0, 100.0, 9).unwrap());
        assert_ne!(simulate(&two_state(), 0, 100.0, 9).unwrap(), simulate(&two_state(), 0, 100.0, 10).unwrap());
    }

    #[test]
    fn constant_observable() {
        let a = ergodic_average(&two_state(), &[1.0, 1.0], 50.0, 1).unwrap();
        assert!((a.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absorbing() {
        let mut g = two_state();
        g.exit[1] = 0.0;
        g.rates[1].clear();
        assert!(matches!(simulate(&g, 1, 1.0, 0), Err(Error::AbsorbingState(1))));
    }
}
