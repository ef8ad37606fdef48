//! Interpretable dimensionality reduction for linear regression.
//!
//! Features are greedily grouped and each group is replaced by its mean
//! whenever a bias-variance argument shows that merging a pair does not
//! increase the expected squared error of ordinary least squares. The
//! building blocks (moments, least squares, closed-form variance and bias
//! gaps, thresholds, quantiles) are exposed for reuse and validation.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom fix the common double-precision case.

pub mod error;
pub mod io;
pub mod linalg;
pub mod linreg;
pub mod pca;
pub mod quantile;
pub mod reducer;
pub mod scalar;
pub mod stats;
pub mod threshold;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use linreg::{ols_fit, LinearFit};
pub use pca::{pca_fit, pca_transform, PcaModel};
pub use reducer::{
    aggregate_partition, build_partition, fit_transform, pairwise_decision, transform,
    FittedReducer, Partition, ReducerConfig, ReducerMode, ThresholdKind,
};
pub use scalar::Scalar;
pub use stats::{
    column_moments, sample_correlation, sample_covariance, standardize, Dataset,
    StandardizationState,
};
pub use threshold::{AggregationDecision, DecisionMode, Threshold, ThresholdInputs, TwoFeatureRule};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type LinearFit64 = LinearFit<f64>;
pub type ReducerConfig64 = ReducerConfig<f64>;
pub type FittedReducer64 = FittedReducer<f64>;
pub type PcaModel64 = PcaModel<f64>;
pub type AggregationDecision64 = AggregationDecision<f64>;
