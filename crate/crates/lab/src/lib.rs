//! Simulation lab for LinCFA: synthetic generators, repeated-sampling
//! experiments, Monte Carlo bias-variance estimates and reducer
//! comparisons.
//!
//! Randomness is keyed by `(seed, arm, repetition, purpose)`, so results
//! do not depend on the number of worker threads.

pub mod compare;
pub mod coverage;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod model;
pub mod montecarlo;
pub mod report;
pub mod rng;
pub mod validate;

pub use error::{LabError, Result};
pub use experiment::{run_experiment_2d, run_experiment_3d, run_experiment_ddim, Arm2d, ExperimentConfig};
pub use generators::{gen_bivariate, gen_ddim, gen_trivariate, GeneratorSpec, Scenario, Truth};
pub use montecarlo::{monte_carlo_bias_variance, Estimate, ModelKind, MonteCarloReport};
