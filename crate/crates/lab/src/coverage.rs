//! Repeated checks of the confidence-interval thresholds and the
//! covariance concentration bounds on the two-feature model.

use lincfa::stats::sample_covariance;
use lincfa::threshold::{hoeffding_cov_bounds, threshold_conf_empirical, threshold_conf_theoretical};
use lincfa::{sample_correlation, standardize};
use rayon::prelude::*;
use serde::Serialize;

use crate::generators::{truth_for, GeneratorSpec};
use crate::model::GroupedModel;
use crate::rng::{substream, Purpose};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub runs: usize,
    pub delta: f64,
    /// Runs where the sample correlation clears the empirical confidence threshold.
    pub empirical_events: usize,
    /// Runs where that event implies the plug-in inequality with true `σ²`, `w`.
    pub implication_holds: usize,
    /// Runs with both the event and the true inequality.
    pub event_and_truth: usize,
    /// Runs where the theoretical confidence threshold exceeds the asymptotic one.
    pub conservative: usize,
    pub cov_above_bound: usize,
    pub cov_below_bound: usize,
    pub upper_bound: f64,
    pub lower_bound: f64,
}

impl CoverageReport {
    fn binomial_se(p: f64, runs: usize) -> f64 {
        (p * (1.0 - p) / runs as f64).sqrt()
    }

    pub fn implication_fraction(&self) -> (f64, f64) {
        let p = self.implication_holds as f64 / self.runs as f64;
        (p, Self::binomial_se(p, self.runs))
    }

    /// Exceedance fractions of the upper and lower covariance bounds, each
    /// with its binomial standard error.
    pub fn exceedance(&self) -> [(f64, f64); 2] {
        [self.cov_above_bound, self.cov_below_bound].map(|c| {
            let p = c as f64 / self.runs as f64;
            (p, Self::binomial_se(p, self.runs))
        })
    }
}

struct Run {
    event: bool,
    truth: bool,
    conservative: bool,
    above: bool,
    below: bool,
}

/// Weights are the generator's, rescaled by each training feature's sample
/// standard deviation so they live in the standardized frame the
/// thresholds are computed in.
pub fn run_coverage(spec: &GeneratorSpec, runs: usize, delta: f64) -> Result<CoverageReport> {
    let truth = truth_for(spec, 0)?;
    let n = spec.n;
    let cov_pop = truth.pop_cov[(0, 1)];
    let (upper, lower) = hoeffding_cov_bounds(n, delta)?;
    let out: Vec<Run> = (0..runs as u64)
        .into_par_iter()
        .map(|r| -> Result<Run> {
            let s = truth.draw(n, &mut substream(spec.seed, 0, r, Purpose::Train))?;
            let (x1, x2) = (s.x.column(0), s.x.column(1));
            let rho = sample_correlation(x1, x2)?;
            let (_, state) = standardize(&s.x)?;
            let wt = [truth.weights[0] * state.stds[0], truth.weights[1] * state.stds[1]];
            let dw = wt[0] - wt[1];
            let asymptotic = 1.0 - 2.0 * truth.sigma2 / ((n - 1) as f64 * dw * dw);
            let fit = GroupedModel::full(&s.x, &s.y)?.fit;
            let t13 = threshold_conf_empirical(&fit, 1.0, n, delta)?;
            let t14 = threshold_conf_theoretical(truth.sigma2, 1.0, wt[0], wt[1], n, delta)?;
            let c = sample_covariance(x1, x2)?;
            Ok(Run {
                event: rho >= t13,
                truth: rho >= asymptotic,
                conservative: t14 > asymptotic,
                above: c - cov_pop > upper,
                below: cov_pop - c > lower,
            })
        })
        .collect::<Result<_>>()?;
    let count = |f: fn(&Run) -> bool| out.iter().filter(|r| f(r)).count();
    Ok(CoverageReport {
        runs,
        delta,
        empirical_events: count(|r| r.event),
        implication_holds: count(|r| !r.event || r.truth),
        event_and_truth: count(|r| r.event && r.truth),
        conservative: count(|r| r.conservative),
        cov_above_bound: count(|r| r.above),
        cov_below_bound: count(|r| r.below),
        upper_bound: upper,
        lower_bound: lower,
    })
}
