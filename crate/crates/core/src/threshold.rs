//! Aggregation thresholds: when does replacing two features by their mean
//! lower the expected squared error of a linear model?
//!
//! All rules compare a variance reduction (`delta_var`) with a bias
//! increase (`delta_bias`) and express the break-even point as a bound on
//! the pair's correlation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linreg::LinearFit;
use crate::quantile::{chi2_upper_quantile, f_upper_quantile};
use crate::scalar::{clamp_nonnegative, Scalar};
use crate::{Error, Result};

/// Squared weight gaps below this are treated as equal weights.
pub const EQUAL_WEIGHTS_EPS: f64 = 1e-12;

/// What a correlation is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Threshold<T> {
    /// Aggregate iff `rho >= value`.
    Scalar { value: T },
    /// Aggregate iff `rho² >= value` (unequal feature variances).
    Squared { value: T },
    /// Aggregate iff `lower <= rho <= upper`.
    Interval { lower: T, upper: T },
    /// No correlation qualifies.
    Empty,
    /// Equal weights or perfectly correlated features: always aggregate.
    Always,
    /// Aggregate iff a polynomial test statistic is nonnegative.
    Sign { value: T },
}

impl<T: Scalar> Threshold<T> {
    pub fn admits(&self, rho: T) -> bool {
        match *self {
            Threshold::Scalar { value } => rho >= value,
            Threshold::Squared { value } => rho * rho >= value,
            Threshold::Interval { lower, upper } => lower <= rho && rho <= upper,
            Threshold::Empty => false,
            Threshold::Always => true,
            Threshold::Sign { value } => value >= T::zero(),
        }
    }

    /// The scalar cut-off, when there is one.
    pub fn scalar(&self) -> Option<T> {
        match *self {
            Threshold::Scalar { value } => Some(value),
            _ => None,
        }
    }
}

impl<T: Scalar> fmt::Display for Threshold<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Scalar { value } => write!(f, "rho >= {value:.6}"),
            Threshold::Squared { value } => write!(f, "rho^2 >= {value:.6}"),
            Threshold::Interval { lower, upper } => write!(f, "rho in [{lower:.6}, {upper:.6}]"),
            Threshold::Empty => f.write_str("never"),
            Threshold::Always => f.write_str("always"),
            Threshold::Sign { value } => write!(f, "test statistic {:.6e} >= 0", value.as_f64()),
        }
    }
}

/// Which rule produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionMode {
    Asymptotic,
    FiniteEqual,
    Empirical,
    General,
    Interval3d,
    ConfEmpirical,
    ConfTheoretical,
    /// `|rho| > 1 - 1e-10`: merged without fitting.
    PerfectCorrelation,
}

impl fmt::Display for DecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecisionMode::Asymptotic => "asymptotic",
            DecisionMode::FiniteEqual => "finite-equal",
            DecisionMode::Empirical => "empirical",
            DecisionMode::General => "general",
            DecisionMode::Interval3d => "interval-3d",
            DecisionMode::ConfEmpirical => "conf-empirical",
            DecisionMode::ConfTheoretical => "conf-theoretical",
            DecisionMode::PerfectCorrelation => "perfect-correlation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationDecision<T> {
    pub correlation: T,
    pub threshold: Threshold<T>,
    pub aggregate: bool,
    pub delta_var: Option<T>,
    pub delta_bias: Option<T>,
    pub mode: DecisionMode,
}

impl<T: Scalar> AggregationDecision<T> {
    fn new(correlation: T, threshold: Threshold<T>, mode: DecisionMode) -> Self {
        Self {
            correlation,
            aggregate: threshold.admits(correlation),
            threshold,
            delta_var: None,
            delta_bias: None,
            mode,
        }
    }

    fn with_deltas(mut self, delta_var: Option<T>, delta_bias: Option<T>) -> Self {
        self.delta_var = delta_var;
        self.delta_bias = delta_bias;
        self
    }
}

/// Everything a threshold rule may need. Unused fields stay `None`.
///
/// `correlation` is the sample correlation being tested. `sigma2`, `w1` and
/// `w2` are either the true values or their estimates, depending on mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdInputs<T> {
    pub sigma2: T,
    pub n: usize,
    pub w1: T,
    pub w2: T,
    pub correlation: T,
    pub samp_var1: Option<T>,
    pub samp_var2: Option<T>,
    pub samp_cov: Option<T>,
    pub pop_var1: Option<T>,
    pub pop_var2: Option<T>,
    pub pop_cov: Option<T>,
    pub w3: Option<T>,
    pub rho13: Option<T>,
    pub rho23: Option<T>,
    pub sigma_x3: Option<T>,
    pub delta: Option<T>,
}

impl<T: Scalar> ThresholdInputs<T> {
    pub fn new(sigma2: T, n: usize, w1: T, w2: T, correlation: T) -> Self {
        Self {
            sigma2,
            n,
            w1,
            w2,
            correlation,
            samp_var1: None,
            samp_var2: None,
            samp_cov: None,
            pop_var1: None,
            pop_var2: None,
            pop_cov: None,
            w3: None,
            rho13: None,
            rho23: None,
            sigma_x3: None,
            delta: None,
        }
    }

    pub fn with_sample_moments(mut self, var1: T, var2: T, cov: T) -> Self {
        self.samp_var1 = Some(var1);
        self.samp_var2 = Some(var2);
        self.samp_cov = Some(cov);
        self
    }

    pub fn with_population_moments(mut self, var1: T, var2: T, cov: T) -> Self {
        self.pop_var1 = Some(var1);
        self.pop_var2 = Some(var2);
        self.pop_cov = Some(cov);
        self
    }

    pub fn with_third_feature(mut self, w3: T, rho13: T, rho23: T, sigma_x3: T) -> Self {
        self.w3 = Some(w3);
        self.rho13 = Some(rho13);
        self.rho23 = Some(rho23);
        self.sigma_x3 = Some(sigma_x3);
        self
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = Some(delta);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma2 >= T::zero()) || !self.sigma2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "noise variance must be finite and nonnegative, got {}",
                self.sigma2
            )));
        }
        if self.n < 4 {
            return Err(Error::InsufficientSamples { n: self.n, p: 2 });
        }
        if let Some(d) = self.delta {
            check_delta(d)?;
        }
        let finite = [self.w1, self.w2, self.correlation]
            .into_iter()
            .chain(
                [
                    self.samp_var1,
                    self.samp_var2,
                    self.samp_cov,
                    self.pop_var1,
                    self.pop_var2,
                    self.pop_cov,
                    self.w3,
                    self.rho13,
                    self.rho23,
                    self.sigma_x3,
                ]
                .into_iter()
                .flatten(),
            )
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite threshold input".into()));
        }
        for v in [self.samp_var1, self.samp_var2, self.pop_var1, self.pop_var2]
            .into_iter()
            .flatten()
        {
            if !(v > T::zero()) {
                return Err(Error::NonPositiveVariance {
                    what: "feature variance",
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }

    fn dw2(&self) -> T {
        let d = self.w1 - self.w2;
        d * d
    }

    fn nm1(&self) -> T {
        T::count(self.n - 1)
    }
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if delta > T::zero() && delta < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "confidence parameter delta must lie in (0, 1), got {delta}"
        )))
    }
}

fn require<T>(v: Option<T>, mode: &'static str, field: &'static str) -> Result<T> {
    v.ok_or(Error::MissingMoment { mode, field })
}

fn equal_weights<T: Scalar>(dw2: T) -> bool {
    dw2 < T::lit(EQUAL_WEIGHTS_EPS)
}

// ---- variance and bias differences ------------------------------------

/// Variance saved by aggregating, large-sample form: `σ²/(n-1)`.
pub fn delta_var_asymptotic<T: Scalar>(sigma2: T, n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    clamp_nonnegative(sigma2 / T::count(n - 1), "variance reduction")
}

/// Variance saved by aggregating when both features share a population
/// variance and a sample variance.
pub fn delta_var_finite_equal<T: Scalar>(
    sigma2: T,
    n: usize,
    pop_var: T,
    samp_var: T,
    pop_rho: T,
    samp_rho: T,
) -> Result<T> {
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    if !(samp_var > T::zero()) {
        return Err(Error::NonPositiveVariance {
            what: "sample variance",
            value: samp_var.as_f64(),
        });
    }
    if samp_rho >= T::one() {
        return Err(Error::Degenerate("sample correlation equals 1"));
    }
    let v = sigma2 / T::count(n - 1) * (pop_var * (T::one() - pop_rho))
        / (samp_var * (T::one() - samp_rho));
    clamp_nonnegative(v, "variance reduction")
}

/// Bias added by aggregating, large-sample form.
pub fn delta_bias_asymptotic<T: Scalar>(w1: T, w2: T, pop_var1: T, pop_var2: T, pop_rho: T) -> Result<T> {
    let cov = pop_rho * (pop_var1 * pop_var2).sqrt();
    let sum = pop_var1 + pop_var2 + cov + cov;
    if !(sum > T::zero()) {
        return Err(Error::DegenerateSum {
            value: sum.as_f64(),
        });
    }
    let dw = w1 - w2;
    let b = pop_var1 * pop_var2 * (T::one() - pop_rho * pop_rho) * dw * dw / sum;
    clamp_nonnegative(b, "bias increase")
}

/// Bias added by aggregating under equal variances.
pub fn delta_bias_finite_equal<T: Scalar>(w1: T, w2: T, pop_var: T, pop_rho: T) -> Result<T> {
    if !(pop_var > T::zero()) {
        return Err(Error::NonPositiveVariance {
            what: "population variance",
            value: pop_var.as_f64(),
        });
    }
    let dw = w1 - w2;
    clamp_nonnegative(
        pop_var * (T::one() - pop_rho) * dw * dw * T::lit(0.5),
        "bias increase",
    )
}

/// Variance saved by aggregating, unit population variances and arbitrary
/// sample moments.
pub fn delta_var_general<T: Scalar>(
    sigma2: T,
    n: usize,
    pop_rho: T,
    samp_var1: T,
    samp_var2: T,
    samp_cov: T,
) -> Result<T> {
    let (v1, v2, c) = (samp_var1, samp_var2, samp_cov);
    let det = v1 * v2 - c * c;
    if !(det > T::zero()) {
        return Err(Error::Collinear {
            determinant: det.as_f64(),
        });
    }
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    let s = v1 + v2 + c + c;
    let num = (v1 - v2) * (v1 - v2) + T::lit(2.0) * (T::one() - pop_rho) * (v1 + c) * (v2 + c);
    clamp_nonnegative(
        sigma2 / T::count(n - 1) * num / (det * s),
        "variance reduction",
    )
}

/// Bias added by aggregating, unit population variances and arbitrary
/// sample moments.
pub fn delta_bias_general<T: Scalar>(
    w1: T,
    w2: T,
    pop_rho: T,
    samp_var1: T,
    samp_var2: T,
    samp_cov: T,
) -> Result<T> {
    let (v1, v2, c) = (samp_var1, samp_var2, samp_cov);
    let s = v1 + v2 + c + c;
    if !(s > T::zero()) {
        return Err(Error::DegenerateSum { value: s.as_f64() });
    }
    let dw = w1 - w2;
    let num = T::lit(2.0) * (T::one() - pop_rho) * (v1 + v2 + c) * c + v1 * v1 + v2 * v2
        - T::lit(2.0) * pop_rho * v1 * v2;
    clamp_nonnegative(num * dw * dw / (s * s), "bias increase")
}

/// Bias added by merging features 1 and 2 when a third feature stays in
/// the model.
pub fn delta_bias_3d<T: Scalar>(w1: T, w2: T, w3: T, rho12: T, rho13: T, rho23: T, sigma_x3: T) -> Result<T> {
    let dw = w1 - w2;
    let dr = rho13 - rho23;
    let u = T::one() - rho12;
    if u <= T::zero() {
        if dr == T::zero() {
            return Ok(T::zero());
        }
        return Err(Error::Degenerate(
            "rho12 = 1 with rho13 != rho23 makes the bias unbounded",
        ));
    }
    let b = T::lit(0.5) * u * dw * dw
        + sigma_x3 * w3 * dw * dr
        + w3 * w3 * sigma_x3 * sigma_x3 * dr * dr / (T::lit(2.0) * u);
    // a perfect square in disguise: ½u(dw + k/u)² with k = σ₃w₃Δρ
    let scale = T::lit(0.5) * u * dw * dw + (sigma_x3 * w3 * dw * dr).abs();
    if b < T::zero() && b >= -(T::lit(64.0) * T::epsilon() * scale) {
        return Ok(T::zero());
    }
    clamp_nonnegative(b, "bias increase")
}

// ---- two-feature thresholds -------------------------------------------

/// How `threshold_2d` reads its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoFeatureRule {
    /// Population moments (unit variances when absent), true `w` and `σ²`.
    Asymptotic,
    /// Equal population and sample variances; the sample variance scales
    /// the threshold.
    FiniteEqual,
    /// Estimates only: `s²`, `ŵ` and sample moments.
    Empirical,
}

/// Correlation threshold for a feature pair.
///
/// Equal variances give the scalar form `1 - 2σ²/((n-1) v (w1-w2)²)`;
/// unequal variances give the squared-correlation form.
pub fn threshold_2d<T: Scalar>(inputs: &ThresholdInputs<T>, rule: TwoFeatureRule) -> Result<AggregationDecision<T>> {
    inputs.validate()?;
    let rho = inputs.correlation;
    let (mode, name) = match rule {
        TwoFeatureRule::Asymptotic => (DecisionMode::Asymptotic, "asymptotic"),
        TwoFeatureRule::FiniteEqual => (DecisionMode::FiniteEqual, "finite-equal"),
        TwoFeatureRule::Empirical => (DecisionMode::Empirical, "empirical"),
    };
    let (v1, v2) = match rule {
        TwoFeatureRule::Asymptotic => (
            inputs.pop_var1.unwrap_or(T::one()),
            inputs.pop_var2.unwrap_or(T::one()),
        ),
        TwoFeatureRule::FiniteEqual => {
            let v1 = require(inputs.samp_var1, name, "samp_var1")?;
            let v2 = inputs.samp_var2.unwrap_or(v1);
            let v = (v1 + v2) * T::lit(0.5);
            (v, v)
        }
        TwoFeatureRule::Empirical => (
            require(inputs.samp_var1, name, "samp_var1")?,
            require(inputs.samp_var2, name, "samp_var2")?,
        ),
    };
    let dw2 = inputs.dw2();
    let dvar = delta_var_asymptotic(inputs.sigma2, inputs.n)?;
    if equal_weights(dw2) {
        return Ok(AggregationDecision::new(rho, Threshold::Always, mode)
            .with_deltas(Some(dvar), Some(T::zero())));
    }
    let nm1 = inputs.nm1();
    let equal = (v1 - v2).abs() <= T::lit(1e-12) * v1.max(v2);
    let threshold = if equal {
        Threshold::Scalar {
            value: T::one() - T::lit(2.0) * inputs.sigma2 / (nm1 * v1 * dw2),
        }
    } else {
        let cov = match rule {
            TwoFeatureRule::Asymptotic => inputs.pop_cov.unwrap_or(rho * (v1 * v2).sqrt()),
            _ => inputs.samp_cov.unwrap_or(rho * (v1 * v2).sqrt()),
        };
        let sum = v1 + v2 + cov + cov;
        Threshold::Squared {
            value: T::one() - inputs.sigma2 * sum / (nm1 * v1 * v2 * dw2),
        }
    };
    let dbias = if equal {
        match rule {
            TwoFeatureRule::FiniteEqual => {
                let pv = inputs.pop_var1.unwrap_or(v1);
                delta_bias_finite_equal(inputs.w1, inputs.w2, pv, rho).ok()
            }
            _ => delta_bias_finite_equal(inputs.w1, inputs.w2, v1, rho).ok(),
        }
    } else {
        delta_bias_asymptotic(inputs.w1, inputs.w2, v1, v2, rho).ok()
    };
    Ok(AggregationDecision::new(rho, threshold, mode).with_deltas(Some(dvar), dbias))
}

/// Exact finite-sample test for unit population variances and arbitrary
/// sample moments. `pop_cov` is the population correlation.
pub fn aggregation_test_general<T: Scalar>(inputs: &ThresholdInputs<T>) -> Result<AggregationDecision<T>> {
    inputs.validate()?;
    const MODE: &str = "general";
    let v1 = require(inputs.samp_var1, MODE, "samp_var1")?;
    let v2 = require(inputs.samp_var2, MODE, "samp_var2")?;
    let c = require(inputs.samp_cov, MODE, "samp_cov")?;
    let rho = require(inputs.pop_cov, MODE, "pop_cov")?;
    let det = v1 * v2 - c * c;
    if !(det > T::zero()) {
        return Err(Error::Collinear {
            determinant: det.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let s = v1 + v2 + two * c;
    let var_num = (v1 - v2) * (v1 - v2) + two * (T::one() - rho) * (v1 + c) * (v2 + c);
    let bias_num =
        two * (T::one() - rho) * (v1 + v2 + c) * c + v1 * v1 + v2 * v2 - two * rho * v1 * v2;
    let stat = inputs.sigma2 * var_num * s - bias_num * inputs.dw2() * inputs.nm1() * det;
    let dvar = delta_var_general(inputs.sigma2, inputs.n, rho, v1, v2, c)?;
    let dbias = delta_bias_general(inputs.w1, inputs.w2, rho, v1, v2, c)?;
    Ok(
        AggregationDecision::new(inputs.correlation, Threshold::Sign { value: stat }, DecisionMode::General)
            .with_deltas(Some(dvar), Some(dbias)),
    )
}

/// Break-even interval for merging features 1 and 2 of a three-feature
/// model. The third feature enters through `w3`, `rho13`, `rho23` and its
/// standard deviation.
pub fn threshold_3d_interval<T: Scalar>(inputs: &ThresholdInputs<T>) -> Result<AggregationDecision<T>> {
    inputs.validate()?;
    const MODE: &str = "interval-3d";
    let w3 = require(inputs.w3, MODE, "w3")?;
    let rho13 = require(inputs.rho13, MODE, "rho13")?;
    let rho23 = require(inputs.rho23, MODE, "rho23")?;
    let sx3 = require(inputs.sigma_x3, MODE, "sigma_x3")?;
    let rho = inputs.correlation;
    let dvar = delta_var_asymptotic(inputs.sigma2, inputs.n)?;
    let dbias = delta_bias_3d(inputs.w1, inputs.w2, w3, rho, rho13, rho23, sx3).ok();
    let dw2 = inputs.dw2();
    if equal_weights(dw2) {
        return Ok(AggregationDecision::new(rho, Threshold::Always, DecisionMode::Interval3d)
            .with_deltas(Some(dvar), dbias));
    }
    let (lower, upper) = match interval_3d_bounds(
        inputs.sigma2 / (inputs.nm1() * dw2),
        sx3 * (rho13 - rho23) * w3 / (inputs.w1 - inputs.w2),
    ) {
        Some(b) => b,
        None => {
            return Ok(AggregationDecision::new(rho, Threshold::Empty, DecisionMode::Interval3d)
                .with_deltas(Some(dvar), dbias))
        }
    };
    Ok(AggregationDecision::new(rho, Threshold::Interval { lower, upper }, DecisionMode::Interval3d)
        .with_deltas(Some(dvar), dbias))
}

/// `1 - (a - b) ± sqrt(a(a - 2b))`, clipped to [-1, 1]; `None` when the
/// discriminant is negative or the clipped interval is empty.
pub fn interval_3d_bounds<T: Scalar>(a: T, b: T) -> Option<(T, T)> {
    let disc = a * (a - b - b);
    if disc < T::zero() {
        return None;
    }
    let r = disc.sqrt();
    let centre = T::one() - (a - b);
    let lower = (centre - r).max(-T::one());
    let upper = (centre + r).min(T::one());
    (lower <= upper).then_some((lower, upper))
}

// ---- confidence-interval thresholds ------------------------------------

/// Threshold built only from data that holds with probability `1 - δ`.
///
/// Uses the bivariate fit's `s²`, `ŵ` and weight standard deviations, with
/// upper-tail chi-squared and F critical values at `δ/2`.
pub fn threshold_conf_empirical<T: Scalar>(fit: &LinearFit<T>, samp_var_x: T, n: usize, delta: T) -> Result<T> {
    ConfEmpiricalQuantiles::new(n, delta.as_f64())?.threshold(fit, samp_var_x)
}

/// The two critical values the empirical confidence threshold needs.
/// They depend only on `n` and `δ`, so a reducer computes them once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfEmpiricalQuantiles {
    pub n: usize,
    pub chi2: f64,
    pub f3: f64,
}

impl ConfEmpiricalQuantiles {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if n < 5 {
            return Err(Error::InsufficientSamples { n, p: 3 });
        }
        Ok(Self {
            n,
            chi2: chi2_upper_quantile(n - 3, delta / 2.0)?,
            f3: f_upper_quantile(3, n - 3, delta / 2.0)?,
        })
    }

    pub fn threshold<T: Scalar>(&self, fit: &LinearFit<T>, samp_var_x: T) -> Result<T> {
        if fit.p != 2 {
            return Err(Error::InvalidInput(format!(
                "confidence threshold needs a two-feature fit, got {} features",
                fit.p
            )));
        }
        if !(samp_var_x > T::zero()) {
            return Err(Error::NonPositiveVariance {
                what: "sample variance",
                value: samp_var_x.as_f64(),
            });
        }
        let n = self.n;
        let sigma2_low = T::count(n - 3) * fit.residual_variance / T::lit(self.chi2);
        let gap = (fit.weights[0] - fit.weights[1]).abs()
            + T::lit((3.0 * self.f3).sqrt()) * (fit.weight_sd(0) + fit.weight_sd(1));
        Ok(T::one() - T::lit(2.0) * sigma2_low / (T::count(n - 1) * samp_var_x * gap * gap))
    }
}

/// Threshold from true quantities only, valid with probability `1 - δ`.
/// Returns negative infinity for equal weights.
pub fn threshold_conf_theoretical<T: Scalar>(sigma2: T, pop_var_x: T, w1: T, w2: T, n: usize, delta: T) -> Result<T> {
    if !(pop_var_x > T::zero()) {
        return Err(Error::NonPositiveVariance {
            what: "population variance",
            value: pop_var_x.as_f64(),
        });
    }
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    check_delta(delta)?;
    let dw = w1 - w2;
    if equal_weights(dw * dw) {
        return Ok(T::neg_infinity());
    }
    let nm1 = T::count(n - 1);
    let two = T::lit(2.0);
    let l2 = (two / delta).ln();
    let l8 = (T::lit(8.0) / delta).ln();
    let correction = two * l2 / nm1
        + two * pop_var_x.sqrt() * (two * l2 / nm1).sqrt()
        + T::lit(4.0) * (l8 / nm1).sqrt();
    Ok(T::one() - two * sigma2 / (nm1 * pop_var_x * dw * dw) + correction / pop_var_x)
}

/// Deviation bounds `(upper, lower)` on `ĉov - cov` and `cov - ĉov`, each
/// holding with probability `1 - δ` for features bounded in [0, 1].
pub fn hoeffding_cov_bounds<T: Scalar>(n: usize, delta: T) -> Result<(T, T)> {
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    check_delta(delta)?;
    let root = ((T::lit(4.0) / delta).ln() / T::count(n - 1)).sqrt();
    Ok((T::lit(3.0) * root, T::lit(4.0) * root))
}
