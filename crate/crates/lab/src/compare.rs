//! Side-by-side scoring of reducers on one train/test split.

use lincfa::{reducer::fit as fit_reducer, ols_fit, pca_fit, pca_transform, standardize, Dataset, ReducerConfig, StandardizationState};

use rand::seq::SliceRandom;

use crate::model::{mse, r2};
use crate::rng::{substream, Purpose};
use crate::report::report_row;
use crate::{LabError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Reducer {
    /// All standardized features.
    Identity,
    LinCfa(ReducerConfig<f64>),
    /// Principal components keeping this share of variance.
    Pca(f64),
}

impl Reducer {
    pub fn name(&self) -> String {
        match self {
            Reducer::Identity => "full".into(),
            Reducer::LinCfa(c) => format!(
                "lincfa-{}",
                crate::montecarlo::mode_name(&c.mode)
            ),
            Reducer::Pca(f) => format!("pca-{f}"),
        }
    }

    /// Reduced training and test designs.
    fn reduce(&self, train: &Dataset<f64>, y: &[f64], test: &Dataset<f64>) -> lincfa::Result<(Dataset<f64>, Dataset<f64>)> {
        match self {
            Reducer::Identity => {
                let (z, state) = standardize(train)?;
                Ok((z, state.apply(test)?))
            }
            Reducer::LinCfa(cfg) => {
                let r = fit_reducer(train, y, cfg)?;
                Ok((r.transform(train)?, r.transform(test)?))
            }
            Reducer::Pca(frac) => {
                let state = StandardizationState::fit(train)?;
                let z = state.apply(train)?;
                let m = pca_fit(&z, *frac)?;
                Ok((pca_transform(&m, &z)?, pca_transform(&m, &state.apply(test)?)?))
            }
        }
    }
}

/// Shuffle row indices with `seed` and hold out `round(n * test_fraction)`
/// of them. Returns `(train, test)`, each in ascending order.
pub fn split_rows(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(LabError::Experiment(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let k = (n as f64 * test_fraction).round() as usize;
    if k < 2 || n - k < 2 {
        return Err(LabError::Experiment(format!(
            "{n} rows cannot be split into train and test at fraction {test_fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut substream(seed, 0, 0, Purpose::Test));
    let mut test = idx[..k].to_vec();
    let mut train = idx[k..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

report_row! {
    pub struct ScoreRow {
        pub method: String,
        pub d: usize,
        pub r2: f64,
        pub mse: f64,
    }
}

/// Fit each reducer and a least-squares model on `train`, score on `test`.
/// Errors name the reducer that produced them.
pub fn compare(
    reducers: &[Reducer],
    train: (&Dataset<f64>, &[f64]),
    test: (&Dataset<f64>, &[f64]),
) -> Result<Vec<ScoreRow>> {
    reducers
        .iter()
        .map(|red| {
            let wrap = |source| LabError::Reducer {
                reducer: red.name(),
                source,
            };
            let (zt, zs) = red.reduce(train.0, train.1, test.0).map_err(wrap)?;
            let y_mean = train.1.iter().sum::<f64>() / train.1.len() as f64;
            let yc: Vec<f64> = train.1.iter().map(|v| v - y_mean).collect();
            let cols: Vec<&[f64]> = zt.columns().iter().map(Vec::as_slice).collect();
            let fit = ols_fit(&cols, &yc).map_err(wrap)?;
            let test_cols: Vec<&[f64]> = zs.columns().iter().map(Vec::as_slice).collect();
            let pred: Vec<f64> = fit.predict(&test_cols).into_iter().map(|v| v + y_mean).collect();
            Ok(ScoreRow {
                method: red.name(),
                d: zt.dim(),
                r2: r2(&pred, test.1),
                mse: mse(&pred, test.1),
            })
        })
        .collect()
}
