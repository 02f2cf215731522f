//! Configuration-model random multigraphs and their phase transition.
//!
//! This crate generates uniform random multigraphs with a prescribed bounded
//! degree sequence (stub matching), measures component structure by two
//! independent routes (union-find and a stub-level exploration walk), computes
//! the closed-form predictions for the giant component, the subcritical
//! extreme-value window and the critical scaling limit, and runs seeded
//! Monte Carlo campaigns that test the predictions statistically.
//!
//! The numeric core (degree moments, survival fixed points, trajectory,
//! exponential tilting) is generic over the scalar type via [`Scalar`];
//! concrete `f64` aliases are exported at the crate root. Simulation and
//! reporting layers are `f64`.

pub mod components;
pub mod critical;
pub mod degree;
pub mod error;
pub mod exploration;
pub mod generator;
pub mod harness;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod theory;
pub mod tilt;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Degree distribution with `f64` probabilities.
pub type DegreeDistribution64 = degree::DegreeDistribution<f64>;
/// Size-biased degree law with `f64` probabilities.
pub type SizeBiased64 = degree::SizeBiased<f64>;
/// Integer lattice distribution with `f64` probabilities.
pub type Lattice64 = tilt::LatticeDistribution<f64>;
/// Tilt result with `f64` scalars.
pub type TiltResult64 = tilt::TiltResult<f64>;
/// Survival solution with `f64` scalars.
pub type SurvivalSolution64 = theory::SurvivalSolution<f64>;
/// Supercritical prediction with `f64` scalars.
pub type SupercriticalPrediction64 = theory::SupercriticalPrediction<f64>;
/// Subcritical prediction with `f64` scalars.
pub type SubcriticalPrediction64 = theory::SubcriticalPrediction<f64>;
/// Trajectory point with `f64` scalars.
pub type TrajectoryPoint64 = theory::TrajectoryPoint<f64>;
