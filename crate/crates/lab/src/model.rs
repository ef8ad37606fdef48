//! Least squares on standardized, optionally aggregated, features.
//!
//! The intercept is the training mean of `y`; features are standardized
//! with training statistics before grouping.

use lincfa::{aggregate_partition, ols_fit, Dataset, LinearFit, Partition, StandardizationState};

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedModel {
    pub standardization: StandardizationState<f64>,
    pub partition: Partition,
    pub y_mean: f64,
    pub fit: LinearFit<f64>,
}

impl GroupedModel {
    pub fn fit(x: &Dataset<f64>, y: &[f64], partition: &Partition) -> Result<Self> {
        let standardization = StandardizationState::fit(x)?;
        let z = aggregate_partition(&standardization.apply(x)?, partition)?;
        let y_mean = y.iter().sum::<f64>() / y.len() as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        let cols: Vec<&[f64]> = z.columns().iter().map(Vec::as_slice).collect();
        let fit = ols_fit(&cols, &yc)?;
        Ok(Self {
            standardization,
            partition: partition.clone(),
            y_mean,
            fit,
        })
    }

    pub fn full(x: &Dataset<f64>, y: &[f64]) -> Result<Self> {
        Self::fit(x, y, &Partition::singletons(x.names().to_vec()))
    }

    pub fn predict(&self, x: &Dataset<f64>) -> Result<Vec<f64>> {
        let z = aggregate_partition(&self.standardization.apply(x)?, &self.partition)?;
        let cols: Vec<&[f64]> = z.columns().iter().map(Vec::as_slice).collect();
        Ok(self.fit.predict(&cols).into_iter().map(|v| v + self.y_mean).collect())
    }
}

pub fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64
}

/// `1 - SSE/SST`, with `SST` taken about the mean of `y` itself.
pub fn r2(pred: &[f64], y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|t| (t - m) * (t - m)).sum();
    let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    1.0 - sse / sst
}

/// Partition of `names` that merges columns `i` and `j` and keeps the rest.
pub fn pair_partition(names: &[String], i: usize, j: usize) -> Partition {
    let (a, b) = (i.min(j), i.max(j));
    let mut groups = Vec::new();
    for k in 0..names.len() {
        if k == a {
            groups.push(vec![a, b]);
        } else if k != b {
            groups.push(vec![k]);
        }
    }
    Partition {
        groups,
        source_columns: names.to_vec(),
    }
}
