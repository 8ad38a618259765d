//! Numerical laboratory for sticky-reflected diffusions.
//!
//! Continuum models ([`model`]) are discretized into reversible finite-state
//! chains ([`discretize`]); rate functions for super and weak Poincaré
//! inequalities are composed in [`ratefn`] and tested against variational
//! ([`verify`]), spectral ([`semigroup`]) and Monte Carlo ([`mc`]) oracles.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod discretize;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod numerics;
pub mod ratefn;
pub mod sampling;
pub mod scalar;
pub mod semigroup;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelSpec = model::ModelSpec<f64>;
pub type DomainSpec = model::DomainSpec<f64>;
pub type PotentialSpec = model::PotentialSpec<f64>;
pub type MeasureSummary = model::MeasureSummary<f64>;
pub type DiscreteInstance = discretize::DiscreteInstance<f64>;
pub type Generator = discretize::Generator<f64>;
pub type RateFunction = ratefn::RateFunction<f64>;
pub type Constants = ratefn::Constants<f64>;
pub type SpectralData = semigroup::SpectralData<f64>;
pub type TrajectoryStats = mc::TrajectoryStats<f64>;
pub type OracleResult = verify::OracleResult<f64>;
