//! Monte Carlo bias-variance decomposition on a fixed test set.
//!
//! `R` training sets are drawn independently; every repetition predicts the
//! same `K` test points and sees fresh test noise. From the `R × K`
//! prediction panel:
//!
//! * variance: per-point sample variance over repetitions, averaged over points;
//! * bias²: squared gap between the mean prediction and the signal, minus
//!   `variance / R` so the estimate is unbiased;
//! * noise: mean squared test noise.
//!
//! Standard errors combine the spread across repetitions with the spread
//! across test points in quadrature.

use lincfa::{reducer::fit as fit_reducer, Partition, ReducerConfig, ReducerMode, ThresholdKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::generators::{truth_for, GeneratorSpec, Truth};
use crate::model::{pair_partition, GroupedModel};
use crate::report::report_row;
use crate::rng::{substream, Purpose};
use crate::{LabError, Result};

pub const MIN_REPETITIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub model: String,
    pub repetitions: usize,
    pub test_size: usize,
    pub mse: Estimate,
    pub bias2: Estimate,
    pub variance: Estimate,
    pub noise: Estimate,
    /// `mse - (bias2 + variance + noise)`.
    pub decomposition_gap: f64,
    pub decomposition_se: f64,
    pub decomposition_ok: bool,
}

report_row! {
    /// Flat form of a [`MonteCarloReport`] for CSV output.
    pub struct MonteCarloRow {
        pub arm: String,
        pub model: String,
        pub repetitions: usize,
        pub test_size: usize,
        pub mse: f64,
        pub mse_se: f64,
        pub bias2: f64,
        pub bias2_se: f64,
        pub variance: f64,
        pub variance_se: f64,
        pub noise: f64,
        pub noise_se: f64,
        pub decomposition_gap: f64,
        pub decomposition_se: f64,
        pub decomposition_ok: bool,
    }
}

impl MonteCarloReport {
    pub fn row(&self, arm: impl Into<String>) -> MonteCarloRow {
        MonteCarloRow {
            arm: arm.into(),
            model: self.model.clone(),
            repetitions: self.repetitions,
            test_size: self.test_size,
            mse: self.mse.value,
            mse_se: self.mse.se,
            bias2: self.bias2.value,
            bias2_se: self.bias2.se,
            variance: self.variance.value,
            variance_se: self.variance.se,
            noise: self.noise.value,
            noise_se: self.noise.se,
            decomposition_gap: self.decomposition_gap,
            decomposition_se: self.decomposition_se,
            decomposition_ok: self.decomposition_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Full,
    /// Merge features `i` and `j` into their mean, keep the rest.
    AggregatedPair(usize, usize),
    /// Partition chosen per training set by the reducer; theoretical mode
    /// takes the true weights and noise variance.
    Reduced { mode: ReducerMode, kind: ThresholdKind },
}

impl ModelKind {
    pub fn name(&self) -> String {
        match self {
            ModelKind::Full => "full".into(),
            ModelKind::AggregatedPair(i, j) => format!("aggregated-{}-{}", i + 1, j + 1),
            ModelKind::Reduced { mode, kind } => format!("reduced-{}-{}", mode_name(mode), kind_name(kind)),
        }
    }

    pub fn partition(&self, truth: &Truth, x: &lincfa::Dataset<f64>, y: &[f64]) -> Result<Partition> {
        Ok(match self {
            ModelKind::Full => Partition::singletons(x.names().to_vec()),
            ModelKind::AggregatedPair(i, j) => pair_partition(x.names(), *i, *j),
            ModelKind::Reduced { mode, kind } => {
                let cfg = match mode {
                    ReducerMode::Theoretical => {
                        ReducerConfig::theoretical(*kind, truth.weights.clone(), truth.sigma2)
                    }
                    ReducerMode::Empirical => ReducerConfig::empirical(*kind),
                };
                fit_reducer(x, y, &cfg)?.partition
            }
        })
    }
}

pub fn mode_name(m: &ReducerMode) -> &'static str {
    match m {
        ReducerMode::Theoretical => "theoretical",
        ReducerMode::Empirical => "empirical",
    }
}

pub fn kind_name(k: &ThresholdKind) -> &'static str {
    match k {
        ThresholdKind::Asymptotic => "asymptotic",
        ThresholdKind::FiniteEqual => "finite-equal",
        ThresholdKind::ConfEmpirical => "conf-empirical",
        ThresholdKind::ConfTheoretical => "conf-theoretical",
    }
}

/// Raw output of a run: predictions per model, the signal and the noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub f: Vec<f64>,
    pub noise: Vec<Vec<f64>>,
    /// `predictions[m][r][k]`.
    pub predictions: Vec<Vec<Vec<f64>>>,
    pub partitions: Vec<Vec<Partition>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub reports: Vec<MonteCarloReport>,
    pub panel: Panel,
}

impl MonteCarloRun {
    /// Paired difference of the variance terms of models `a` and `b`.
    pub fn variance_difference(&self, a: usize, b: usize) -> Estimate {
        paired_variance_difference(&self.panel.predictions[a], &self.panel.predictions[b])
    }
}

/// Decompose the test error of each model on data from `spec`.
pub fn monte_carlo_bias_variance(
    spec: &GeneratorSpec,
    models: &[ModelKind],
    reps: usize,
    test_size: usize,
) -> Result<MonteCarloRun> {
    if reps < MIN_REPETITIONS {
        return Err(LabError::InsufficientRepetitions {
            reps,
            min: MIN_REPETITIONS,
        });
    }
    let truth = truth_for(spec, 0)?;
    let panel = simulate_panel(&truth, spec.n, reps, test_size, spec.seed, 0, models)?;
    let reports = models
        .iter()
        .zip(&panel.predictions)
        .map(|(m, p)| analyze(&m.name(), p, &panel.f, &panel.noise))
        .collect();
    Ok(MonteCarloRun { reports, panel })
}

pub fn simulate_panel(
    truth: &Truth,
    n: usize,
    reps: usize,
    test_size: usize,
    seed: u64,
    arm: u64,
    models: &[ModelKind],
) -> Result<Panel> {
    if test_size < 2 {
        return Err(LabError::Experiment(format!("test set needs at least 2 points, got {test_size}")));
    }
    let test = truth.draw(test_size, &mut substream(seed, arm, 0, Purpose::Test))?;
    let per_rep: Vec<(Vec<f64>, Vec<(Vec<f64>, Partition)>)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let train = truth.draw(n, &mut substream(seed, arm, r, Purpose::Train))?;
            let eps = truth.noise(test_size, &mut substream(seed, arm, r, Purpose::TestNoise));
            let mut out = Vec::with_capacity(models.len());
            for m in models {
                let part = m.partition(truth, &train.x, &train.y)?;
                let model = GroupedModel::fit(&train.x, &train.y, &part)?;
                out.push((model.predict(&test.x)?, part));
            }
            Ok((eps, out))
        })
        .collect::<Result<_>>()?;
    let mut predictions = vec![Vec::with_capacity(reps); models.len()];
    let mut partitions = vec![Vec::with_capacity(reps); models.len()];
    let mut noise = Vec::with_capacity(reps);
    for (eps, outs) in per_rep {
        noise.push(eps);
        for (m, (p, part)) in outs.into_iter().enumerate() {
            predictions[m].push(p);
            partitions[m].push(part);
        }
    }
    Ok(Panel {
        f: test.f,
        noise,
        predictions,
        partitions,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn se_of_mean(v: &[f64]) -> f64 {
    sample_sd(v) / (v.len() as f64).sqrt()
}

/// `Σ_ab (v_a·v_b)²`, the squared Frobenius norm of the Gram matrix.
fn gram_frobenius2(vs: &[Vec<f64>]) -> f64 {
    let parts: Vec<f64> = (0..vs.len())
        .into_par_iter()
        .map(|a| {
            let mut s = 0.0;
            for b in 0..vs.len() {
                let g: f64 = vs[a].iter().zip(&vs[b]).map(|(x, y)| x * y).sum();
                s += g * g;
            }
            s
        })
        .collect();
    parts.iter().sum()
}

/// Decompose one model's `R × K` prediction panel.
pub fn analyze(name: &str, preds: &[Vec<f64>], f: &[f64], noise: &[Vec<f64>]) -> MonteCarloReport {
    let r = preds.len();
    let k = f.len();
    let rf = r as f64;
    let hbar: Vec<f64> = (0..k).map(|j| preds.iter().map(|p| p[j]).sum::<f64>() / rf).collect();
    let dev: Vec<Vec<f64>> = preds
        .iter()
        .map(|p| p.iter().zip(&hbar).map(|(h, m)| h - m).collect())
        .collect();
    let var_k: Vec<f64> = (0..k)
        .map(|j| dev.iter().map(|d| d[j] * d[j]).sum::<f64>() / (rf - 1.0))
        .collect();
    let variance = mean(&var_k);
    let var_r: Vec<f64> = dev
        .iter()
        .map(|d| d.iter().map(|x| x * x).sum::<f64>() / k as f64 * rf / (rf - 1.0))
        .collect();
    let variance_se = (se_of_mean(&var_r).powi(2) + se_of_mean(&var_k).powi(2)).sqrt();

    let b: Vec<f64> = hbar.iter().zip(f).map(|(h, fk)| h - fk).collect();
    let bias2 = b.iter().map(|x| x * x).sum::<f64>() / k as f64 - variance / rf;
    // Sampling error of the mean predictions, C/R with C the covariance over
    // repetitions, plus the spread of the per-point terms.
    let frob = if r <= k {
        gram_frobenius2(&dev)
    } else {
        let cols: Vec<Vec<f64>> = (0..k).map(|j| dev.iter().map(|d| d[j]).collect()).collect();
        gram_frobenius2(&cols)
    } / ((rf - 1.0) * (rf - 1.0));
    let db: Vec<f64> = dev.iter().map(|d| d.iter().zip(&b).map(|(x, y)| x * y).sum()).collect();
    let btcb = db.iter().map(|x| x * x).sum::<f64>() / (rf - 1.0);
    let kf = k as f64;
    let point_terms: Vec<f64> = b.iter().zip(&var_k).map(|(bk, vk)| bk * bk - vk / rf).collect();
    let bias2_se = ((2.0 * frob / (rf * rf) + 4.0 * btcb / rf) / (kf * kf) + se_of_mean(&point_terms).powi(2)).sqrt();

    let noise_r: Vec<f64> = noise.iter().map(|e| e.iter().map(|x| x * x).sum::<f64>() / kf).collect();
    let noise_est = mean(&noise_r);
    let noise_se = se_of_mean(&noise_r);

    let mut mse_k = vec![0.0; k];
    let mse_r: Vec<f64> = preds
        .iter()
        .zip(noise)
        .map(|(p, e)| {
            let mut s = 0.0;
            for j in 0..k {
                let err = p[j] - f[j] - e[j];
                mse_k[j] += err * err / rf;
                s += err * err;
            }
            s / kf
        })
        .collect();
    let mse = mean(&mse_r);
    let mse_se = (se_of_mean(&mse_r).powi(2) + se_of_mean(&mse_k).powi(2)).sqrt();

    let gap = mse - (bias2 + variance + noise_est);
    let combined = (mse_se.powi(2) + bias2_se.powi(2) + variance_se.powi(2) + noise_se.powi(2)).sqrt();
    MonteCarloReport {
        model: name.to_string(),
        repetitions: r,
        test_size: k,
        mse: Estimate { value: mse, se: mse_se },
        bias2: Estimate { value: bias2, se: bias2_se },
        variance: Estimate { value: variance, se: variance_se },
        noise: Estimate { value: noise_est, se: noise_se },
        decomposition_gap: gap,
        decomposition_se: combined,
        decomposition_ok: gap.abs() <= 3.0 * combined,
    }
}

/// `variance(a) - variance(b)` from the same repetitions, with a standard
/// error that benefits from the pairing.
pub fn paired_variance_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> Estimate {
    let r = a.len();
    let k = a[0].len();
    let rf = r as f64;
    let centred = |p: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let m: Vec<f64> = (0..k).map(|j| p.iter().map(|row| row[j]).sum::<f64>() / rf).collect();
        p.iter().map(|row| row.iter().zip(&m).map(|(h, mm)| h - mm).collect()).collect()
    };
    let (da, db) = (centred(a), centred(b));
    let per_rep: Vec<f64> = da
        .iter()
        .zip(&db)
        .map(|(x, y)| {
            x.iter().zip(y).map(|(u, v)| u * u - v * v).sum::<f64>() / k as f64 * rf / (rf - 1.0)
        })
        .collect();
    let per_point: Vec<f64> = (0..k)
        .map(|j| da.iter().zip(&db).map(|(x, y)| x[j] * x[j] - y[j] * y[j]).sum::<f64>() / (rf - 1.0))
        .collect();
    Estimate {
        value: mean(&per_rep),
        se: (se_of_mean(&per_rep).powi(2) + se_of_mean(&per_point).powi(2)).sqrt(),
    }
}

/// Mean with a normal 95% half-width.
pub fn mean_ci(v: &[f64]) -> (f64, f64) {
    (mean(v), 1.96 * se_of_mean(v))
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}
