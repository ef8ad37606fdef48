//! Repeated-sampling experiments for two, three and many features.
//!
//! Theoretical decisions in the two-feature and many-feature runners use
//! the raw generator weights with unit variances; the three-feature runner
//! reports that convention next to the standardized one, where each weight
//! is scaled by its feature's population standard deviation. Empirical
//! decisions always use standardized training features and a centered
//! target.

use std::path::Path;

use lincfa::threshold::{threshold_2d, threshold_3d_interval};
use lincfa::{
    reducer::fit as fit_reducer, pairwise_decision, standardize, Dataset, ReducerConfig, Threshold, ThresholdInputs,
    ThresholdKind, TwoFeatureRule,
};
use lincfa::stats::sample_correlation;
use rayon::prelude::*;

use crate::generators::{truth_for, GeneratorSpec, Truth};
use crate::model::{mse, pair_partition, r2, GroupedModel};
use crate::montecarlo::{analyze, mean_ci, median, paired_variance_difference, MonteCarloReport, MIN_REPETITIONS};
use crate::report::{report_row, write_rows};
use crate::rng::{substream, Purpose};
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub reps: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(n: usize, reps: usize, seed: u64) -> Self {
        Self {
            n,
            reps,
            test_size: 500,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPETITIONS {
            return Err(LabError::InsufficientRepetitions {
                reps: self.reps,
                min: MIN_REPETITIONS,
            });
        }
        if self.test_size < 2 || self.n < 5 {
            return Err(LabError::Experiment(format!(
                "need n >= 5 and test_size >= 2 (got n={}, test_size={})",
                self.n, self.test_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm2d {
    pub sigma: f64,
    pub w: [f64; 2],
}

report_row! {
    /// One two-feature arm. `*_ci` columns are 95% half-widths, `*_se`
    /// columns standard errors.
    pub struct Row2d {
        pub arm: usize,
        pub sigma: f64,
        pub w1: f64,
        pub w2: f64,
        pub n: usize,
        pub reps: usize,
        pub rho_pop: f64,
        pub theo_threshold: f64,
        pub agg_theo: usize,
        pub emp_threshold_median: f64,
        pub agg_emp: usize,
        pub rho_hat_mean: f64,
        pub s2_mean: f64,
        pub w1_hat_mean: f64,
        pub w2_hat_mean: f64,
        pub mse_full: f64,
        pub mse_full_ci: f64,
        pub mse_aggr: f64,
        pub mse_aggr_ci: f64,
        pub r2_full: f64,
        pub r2_full_ci: f64,
        pub r2_aggr: f64,
        pub r2_aggr_ci: f64,
        pub var_full: f64,
        pub var_full_se: f64,
        pub var_aggr: f64,
        pub var_aggr_se: f64,
        pub var_diff: f64,
        pub var_diff_se: f64,
        pub bias2_full: f64,
        pub bias2_full_se: f64,
        pub bias2_aggr: f64,
        pub bias2_aggr_se: f64,
        pub noise: f64,
        /// Closed-form variance gap `σ²/(n-1)`.
        pub delta_var_theory: f64,
        /// Closed-form bias gap for standardized features.
        pub delta_bias_theory: f64,
        pub decomposition_ok: bool,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arm2dResult {
    pub row: Row2d,
    pub full: MonteCarloReport,
    pub aggr: MonteCarloReport,
    /// Per-repetition sample correlation and decisions.
    pub rho_hat: Vec<f64>,
    pub theo: Vec<bool>,
    pub emp: Vec<bool>,
    pub mse_full: Vec<f64>,
    pub mse_aggr: Vec<f64>,
    pub r2_full: Vec<f64>,
    pub r2_aggr: Vec<f64>,
}

struct Rep2d {
    rho: f64,
    theo: bool,
    emp_threshold: f64,
    emp: bool,
    s2: f64,
    w_hat: [f64; 2],
    full: Vec<f64>,
    aggr: Vec<f64>,
    eps: Vec<f64>,
}

fn threshold_value(t: &Threshold<f64>) -> f64 {
    match t {
        Threshold::Always => f64::NEG_INFINITY,
        Threshold::Empty => f64::INFINITY,
        other => other.scalar().unwrap_or(f64::NAN),
    }
}

fn rep_2d(truth: &Truth, arm: &Arm2d, cfg: &ExperimentConfig, a: u64, r: u64, test: &Dataset<f64>) -> Result<Rep2d> {
    let train = truth.draw(cfg.n, &mut substream(cfg.seed, a, r, Purpose::Train))?;
    let eps = truth.noise(cfg.test_size, &mut substream(cfg.seed, a, r, Purpose::TestNoise));
    let rho = sample_correlation(train.x.column(0), train.x.column(1))?;
    let theo = threshold_2d(
        &ThresholdInputs::new(truth.sigma2, cfg.n, arm.w[0], arm.w[1], rho),
        TwoFeatureRule::Asymptotic,
    )?;
    let (z, _) = standardize(&train.x)?;
    let emp = pairwise_decision(
        z.column(0),
        z.column(1),
        &train.y,
        &ReducerConfig::empirical(ThresholdKind::Asymptotic),
    )?;
    let full = GroupedModel::full(&train.x, &train.y)?;
    let aggr = GroupedModel::fit(&train.x, &train.y, &pair_partition(train.x.names(), 0, 1))?;
    Ok(Rep2d {
        rho,
        theo: theo.aggregate,
        emp_threshold: threshold_value(&emp.threshold),
        emp: emp.aggregate,
        s2: full.fit.residual_variance,
        w_hat: [full.fit.weights[0], full.fit.weights[1]],
        full: full.predict(test)?,
        aggr: aggr.predict(test)?,
        eps,
    })
}

fn scores(preds: &[Vec<f64>], f: &[f64], eps: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    preds
        .iter()
        .zip(eps)
        .map(|(p, e)| {
            let y: Vec<f64> = f.iter().zip(e).map(|(a, b)| a + b).collect();
            (mse(p, &y), r2(p, &y))
        })
        .unzip()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Two correlated features, one arm per `(σ, w)`: decision counts, test
/// error of the full and merged models, and their bias-variance split.
pub fn run_experiment_2d(arms: &[Arm2d], cfg: &ExperimentConfig, mix: f64) -> Result<Vec<Arm2dResult>> {
    cfg.validate()?;
    arms.iter()
        .enumerate()
        .map(|(a, arm)| {
            let mut spec = GeneratorSpec::bivariate(cfg.n, arm.sigma, arm.w, cfg.seed);
            spec.mix = mix;
            let truth = truth_for(&spec, 0)?;
            let a64 = a as u64;
            let test = truth.draw(cfg.test_size, &mut substream(cfg.seed, a64, 0, Purpose::Test))?;
            let reps: Vec<Rep2d> = (0..cfg.reps as u64)
                .into_par_iter()
                .map(|r| rep_2d(&truth, arm, cfg, a64, r, &test.x))
                .collect::<Result<_>>()?;
            summarize_2d(a, arm, cfg, &truth, &test.f, reps)
        })
        .collect()
}

fn summarize_2d(a: usize, arm: &Arm2d, cfg: &ExperimentConfig, truth: &Truth, f: &[f64], reps: Vec<Rep2d>) -> Result<Arm2dResult> {
    let rho_hat: Vec<f64> = reps.iter().map(|r| r.rho).collect();
    let theo: Vec<bool> = reps.iter().map(|r| r.theo).collect();
    let emp: Vec<bool> = reps.iter().map(|r| r.emp).collect();
    let emp_thr: Vec<f64> = reps.iter().map(|r| r.emp_threshold).collect();
    let eps: Vec<Vec<f64>> = reps.iter().map(|r| r.eps.clone()).collect();
    let pf: Vec<Vec<f64>> = reps.iter().map(|r| r.full.clone()).collect();
    let pa: Vec<Vec<f64>> = reps.iter().map(|r| r.aggr.clone()).collect();
    let full = analyze("full", &pf, f, &eps);
    let aggr = analyze("aggregated", &pa, f, &eps);
    let diff = paired_variance_difference(&pf, &pa);
    let (mse_f, r2_f) = scores(&pf, f, &eps);
    let (mse_a, r2_a) = scores(&pa, f, &eps);
    let (mf, mfc) = mean_ci(&mse_f);
    let (ma, mac) = mean_ci(&mse_a);
    let (rf, rfc) = mean_ci(&r2_f);
    let (ra, rac) = mean_ci(&r2_a);
    let rho_pop = truth.pop_corr(0, 1);
    let ws = truth.standardized_weights();
    let theo_threshold = threshold_value(
        &threshold_2d(
            &ThresholdInputs::new(truth.sigma2, cfg.n, arm.w[0], arm.w[1], rho_pop),
            TwoFeatureRule::Asymptotic,
        )?
        .threshold,
    );
    let row = Row2d {
        arm: a,
        sigma: arm.sigma,
        w1: arm.w[0],
        w2: arm.w[1],
        n: cfg.n,
        reps: cfg.reps,
        rho_pop,
        theo_threshold,
        agg_theo: theo.iter().filter(|&&b| b).count(),
        emp_threshold_median: median(&emp_thr),
        agg_emp: emp.iter().filter(|&&b| b).count(),
        rho_hat_mean: mean(&rho_hat),
        s2_mean: mean(&reps.iter().map(|r| r.s2).collect::<Vec<_>>()),
        w1_hat_mean: mean(&reps.iter().map(|r| r.w_hat[0]).collect::<Vec<_>>()),
        w2_hat_mean: mean(&reps.iter().map(|r| r.w_hat[1]).collect::<Vec<_>>()),
        mse_full: mf,
        mse_full_ci: mfc,
        mse_aggr: ma,
        mse_aggr_ci: mac,
        r2_full: rf,
        r2_full_ci: rfc,
        r2_aggr: ra,
        r2_aggr_ci: rac,
        var_full: full.variance.value,
        var_full_se: full.variance.se,
        var_aggr: aggr.variance.value,
        var_aggr_se: aggr.variance.se,
        var_diff: diff.value,
        var_diff_se: diff.se,
        bias2_full: full.bias2.value,
        bias2_full_se: full.bias2.se,
        bias2_aggr: aggr.bias2.value,
        bias2_aggr_se: aggr.bias2.se,
        noise: full.noise.value,
        delta_var_theory: truth.sigma2 / (cfg.n - 1) as f64,
        delta_bias_theory: 0.5 * (1.0 - rho_pop) * (ws[0] - ws[1]).powi(2),
        decomposition_ok: full.decomposition_ok && aggr.decomposition_ok,
    };
    Ok(Arm2dResult {
        row,
        full,
        aggr,
        rho_hat,
        theo,
        emp,
        mse_full: mse_f,
        mse_aggr: mse_a,
        r2_full: r2_f,
        r2_aggr: r2_a,
    })
}

report_row! {
    /// Merging the first two of three features. `theo_*` uses standardized
    /// weights, `raw_*` the raw generator weights.
    pub struct Row3d {
        pub n: usize,
        pub reps: usize,
        pub sigma: f64,
        pub w1: f64,
        pub w2: f64,
        pub w3: f64,
        pub rho12_pop: f64,
        pub rho13_pop: f64,
        pub rho23_pop: f64,
        pub theo_lower: f64,
        pub theo_upper: f64,
        pub agg_theo: usize,
        pub raw_lower: f64,
        pub raw_upper: f64,
        pub agg_theo_raw: usize,
        pub emp_lower_median: f64,
        pub emp_upper_median: f64,
        pub agg_emp: usize,
        pub rho_hat_mean: f64,
        pub mse_full: f64,
        pub mse_full_ci: f64,
        pub mse_aggr: f64,
        pub mse_aggr_ci: f64,
        pub r2_full: f64,
        pub r2_full_ci: f64,
        pub r2_aggr: f64,
        pub r2_aggr_ci: f64,
        pub var_full: f64,
        pub var_full_se: f64,
        pub var_aggr: f64,
        pub var_aggr_se: f64,
        pub bias2_full: f64,
        pub bias2_full_se: f64,
        pub bias2_aggr: f64,
        pub bias2_aggr_se: f64,
        pub decomposition_ok: bool,
    }
}

fn bounds(t: &Threshold<f64>) -> (f64, f64) {
    match *t {
        Threshold::Interval { lower, upper } => (lower, upper),
        Threshold::Always => (-1.0, 1.0),
        _ => (f64::NAN, f64::NAN),
    }
}

struct Rep3d {
    rho: f64,
    theo: bool,
    raw: bool,
    emp: (f64, f64),
    emp_agg: bool,
    full: Vec<f64>,
    aggr: Vec<f64>,
    eps: Vec<f64>,
}

fn interval(n: usize, w: &[f64], sx3: f64, sigma2: f64, rho: f64, r13: f64, r23: f64) -> Result<(bool, (f64, f64))> {
    let d = threshold_3d_interval(
        &ThresholdInputs::new(sigma2, n, w[0], w[1], rho).with_third_feature(w[2], r13, r23, sx3),
    )?;
    Ok((d.aggregate, bounds(&d.threshold)))
}

/// Three features; the candidate merge is features 1 and 2.
pub fn run_experiment_3d(spec: &GeneratorSpec, cfg: &ExperimentConfig) -> Result<(Row3d, MonteCarloReport, MonteCarloReport)> {
    cfg.validate()?;
    let truth = truth_for(spec, 0)?;
    if truth.dim() != 3 {
        return Err(LabError::Experiment("the three-feature runner needs a trivariate spec".into()));
    }
    let ws = truth.standardized_weights();
    let (r13, r23) = (truth.pop_corr(0, 2), truth.pop_corr(1, 2));
    let test = truth.draw(cfg.test_size, &mut substream(cfg.seed, 0, 0, Purpose::Test))?;
    let reps: Vec<Rep3d> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| -> Result<Rep3d> {
            let train = truth.draw(cfg.n, &mut substream(cfg.seed, 0, r, Purpose::Train))?;
            let eps = truth.noise(cfg.test_size, &mut substream(cfg.seed, 0, r, Purpose::TestNoise));
            let x = &train.x;
            let rho = sample_correlation(x.column(0), x.column(1))?;
            let (theo, _) = interval(cfg.n, &ws, 1.0, truth.sigma2, rho, r13, r23)?;
            let (raw, _) = interval(cfg.n, &truth.weights, 1.0, truth.sigma2, rho, r13, r23)?;
            let full = GroupedModel::full(x, &train.y)?;
            let e13 = sample_correlation(x.column(0), x.column(2))?;
            let e23 = sample_correlation(x.column(1), x.column(2))?;
            let (emp_agg, emp) = interval(
                cfg.n,
                &full.fit.weights,
                1.0,
                full.fit.residual_variance,
                rho,
                e13,
                e23,
            )?;
            let aggr = GroupedModel::fit(x, &train.y, &pair_partition(x.names(), 0, 1))?;
            Ok(Rep3d {
                rho,
                theo,
                raw,
                emp,
                emp_agg,
                full: full.predict(&test.x)?,
                aggr: aggr.predict(&test.x)?,
                eps,
            })
        })
        .collect::<Result<_>>()?;
    let f = &test.f;
    let eps: Vec<Vec<f64>> = reps.iter().map(|r| r.eps.clone()).collect();
    let pf: Vec<Vec<f64>> = reps.iter().map(|r| r.full.clone()).collect();
    let pa: Vec<Vec<f64>> = reps.iter().map(|r| r.aggr.clone()).collect();
    let full = analyze("full", &pf, f, &eps);
    let aggr = analyze("aggregated", &pa, f, &eps);
    let (mse_f, r2_f) = scores(&pf, f, &eps);
    let (mse_a, r2_a) = scores(&pa, f, &eps);
    let (mf, mfc) = mean_ci(&mse_f);
    let (ma, mac) = mean_ci(&mse_a);
    let (rf, rfc) = mean_ci(&r2_f);
    let (ra, rac) = mean_ci(&r2_a);
    let rho12 = truth.pop_corr(0, 1);
    let (_, (tl, tu)) = interval(cfg.n, &ws, 1.0, truth.sigma2, rho12, r13, r23)?;
    let (_, (rl, ru)) = interval(cfg.n, &truth.weights, 1.0, truth.sigma2, rho12, r13, r23)?;
    let row = Row3d {
        n: cfg.n,
        reps: cfg.reps,
        sigma: spec.sigma,
        w1: truth.weights[0],
        w2: truth.weights[1],
        w3: truth.weights[2],
        rho12_pop: rho12,
        rho13_pop: r13,
        rho23_pop: r23,
        theo_lower: tl,
        theo_upper: tu,
        agg_theo: reps.iter().filter(|r| r.theo).count(),
        raw_lower: rl,
        raw_upper: ru,
        agg_theo_raw: reps.iter().filter(|r| r.raw).count(),
        emp_lower_median: median(&reps.iter().map(|r| r.emp.0).collect::<Vec<_>>()),
        emp_upper_median: median(&reps.iter().map(|r| r.emp.1).collect::<Vec<_>>()),
        agg_emp: reps.iter().filter(|r| r.emp_agg).count(),
        rho_hat_mean: mean(&reps.iter().map(|r| r.rho).collect::<Vec<_>>()),
        mse_full: mf,
        mse_full_ci: mfc,
        mse_aggr: ma,
        mse_aggr_ci: mac,
        r2_full: rf,
        r2_full_ci: rfc,
        r2_aggr: ra,
        r2_aggr_ci: rac,
        var_full: full.variance.value,
        var_full_se: full.variance.se,
        var_aggr: aggr.variance.value,
        var_aggr_se: aggr.variance.se,
        bias2_full: full.bias2.value,
        bias2_full_se: full.bias2.se,
        bias2_aggr: aggr.bias2.value,
        bias2_aggr_se: aggr.bias2.se,
        decomposition_ok: full.decomposition_ok && aggr.decomposition_ok,
    };
    Ok((row, full, aggr))
}

report_row! {
    /// Many features at one training size. `d_*` are medians over
    /// repetitions, scores are means with 95% half-widths.
    pub struct RowDdim {
        pub n: usize,
        pub d_theo: f64,
        pub d_emp: f64,
        pub r2_full: f64,
        pub r2_theo: f64,
        pub r2_emp: f64,
        pub mse_full: f64,
        pub mse_theo: f64,
        pub mse_emp: f64,
        pub reps: usize,
        pub dim: usize,
        pub sigma: f64,
        pub d_theo_mean: f64,
        pub d_emp_mean: f64,
        pub r2_full_ci: f64,
        pub r2_theo_ci: f64,
        pub r2_emp_ci: f64,
        pub mse_full_ci: f64,
        pub mse_theo_ci: f64,
        pub mse_emp_ci: f64,
    }
}

pub const FIGURE1_HEADER: [&str; 9] = [
    "n", "d_theo", "d_emp", "r2_full", "r2_theo", "r2_emp", "mse_full", "mse_theo", "mse_emp",
];

#[derive(Debug, Clone, PartialEq)]
pub struct DdimResult {
    pub row: RowDdim,
    pub d_theo: Vec<usize>,
    pub d_emp: Vec<usize>,
}

/// LinCFA on the random-parent generator for each training size in
/// `sizes`. Repetition `r` uses the same structure and weights at every
/// size.
pub fn run_experiment_ddim(
    dim: usize,
    sigma: f64,
    sizes: &[usize],
    reps: usize,
    test_size: usize,
    seed: u64,
) -> Result<Vec<DdimResult>> {
    if reps < 2 || test_size < 2 {
        return Err(LabError::Experiment(format!("need reps >= 2 and test_size >= 2, got {reps} and {test_size}")));
    }
    sizes
        .iter()
        .map(|&n| {
            let spec = GeneratorSpec::ddim(n, dim, sigma, seed);
            spec.validate()?;
            if n <= dim + 1 {
                return Err(LabError::Experiment(format!("n = {n} leaves no residual degrees of freedom for {dim} features")));
            }
            let arm = n as u64;
            let per: Vec<[f64; 8]> = (0..reps as u64)
                .into_par_iter()
                .map(|r| -> Result<[f64; 8]> {
                    let truth = truth_for(&spec, r)?;
                    let train = truth.draw(n, &mut substream(seed, arm, r, Purpose::Train))?;
                    let test = truth.draw(test_size, &mut substream(seed, arm, r, Purpose::Test))?;
                    let theo_cfg = ReducerConfig::theoretical(ThresholdKind::Asymptotic, truth.weights.clone(), truth.sigma2);
                    let emp_cfg = ReducerConfig::empirical(ThresholdKind::Asymptotic);
                    let pt = fit_reducer(&train.x, &train.y, &theo_cfg)?.partition;
                    let pe = fit_reducer(&train.x, &train.y, &emp_cfg)?.partition;
                    let full = GroupedModel::full(&train.x, &train.y)?.predict(&test.x)?;
                    let theo = GroupedModel::fit(&train.x, &train.y, &pt)?.predict(&test.x)?;
                    let emp = GroupedModel::fit(&train.x, &train.y, &pe)?.predict(&test.x)?;
                    Ok([
                        pt.d() as f64,
                        pe.d() as f64,
                        r2(&full, &test.y),
                        r2(&theo, &test.y),
                        r2(&emp, &test.y),
                        mse(&full, &test.y),
                        mse(&theo, &test.y),
                        mse(&emp, &test.y),
                    ])
                })
                .collect::<Result<_>>()?;
            let col = |k: usize| per.iter().map(|v| v[k]).collect::<Vec<f64>>();
            let ci = |k: usize| mean_ci(&col(k));
            let row = RowDdim {
                n,
                d_theo: median(&col(0)),
                d_emp: median(&col(1)),
                r2_full: ci(2).0,
                r2_theo: ci(3).0,
                r2_emp: ci(4).0,
                mse_full: ci(5).0,
                mse_theo: ci(6).0,
                mse_emp: ci(7).0,
                reps,
                dim,
                sigma,
                d_theo_mean: mean(&col(0)),
                d_emp_mean: mean(&col(1)),
                r2_full_ci: ci(2).1,
                r2_theo_ci: ci(3).1,
                r2_emp_ci: ci(4).1,
                mse_full_ci: ci(5).1,
                mse_theo_ci: ci(6).1,
                mse_emp_ci: ci(7).1,
            };
            Ok(DdimResult {
                row,
                d_theo: col(0).iter().map(|&v| v as usize).collect(),
                d_emp: col(1).iter().map(|&v| v as usize).collect(),
            })
        })
        .collect()
}

/// The nine-column curve of reduced size and test score against `n`.
pub fn write_figure1_csv(path: &Path, rows: &[RowDdim]) -> Result<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            use crate::report::Cell;
            vec![
                r.n.cell(),
                r.d_theo.cell(),
                r.d_emp.cell(),
                r.r2_full.cell(),
                r.r2_theo.cell(),
                r.r2_emp.cell(),
                r.mse_full.cell(),
                r.mse_theo.cell(),
                r.mse_emp.cell(),
            ]
        })
        .collect();
    lincfa::io::write_table(path, &FIGURE1_HEADER, &body)?;
    Ok(())
}

pub fn write_2d_csv(path: &Path, results: &[Arm2dResult]) -> Result<()> {
    write_rows(path, &results.iter().map(|r| r.row.clone()).collect::<Vec<_>>())
}

pub fn write_ddim_csv(path: &Path, results: &[DdimResult]) -> Result<()> {
    write_rows(path, &results.iter().map(|r| r.row.clone()).collect::<Vec<_>>())
}
