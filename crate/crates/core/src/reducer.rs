//! Greedy feature partitioning and aggregation by group means.

use serde::{Deserialize, Serialize};

use crate::linreg::{ols_fit_pair, PairMoments};
use crate::scalar::{dot, Scalar};
use crate::stats::{center, clamp_unit, mean, Dataset, StandardizationState};
use crate::threshold::{
    threshold_2d, threshold_conf_theoretical, AggregationDecision, ConfEmpiricalQuantiles,
    DecisionMode, Threshold, ThresholdInputs, TwoFeatureRule,
};
use crate::{Error, Result};

/// Pairs with `|rho| > 1 - PERFECT_CORRELATION_EPS` merge without a fit.
pub const PERFECT_CORRELATION_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReducerMode {
    /// Thresholds use caller-supplied true weights and noise variance.
    Theoretical,
    /// Thresholds use per-pair least-squares estimates.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    Asymptotic,
    FiniteEqual,
    ConfEmpirical,
    ConfTheoretical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducerConfig<T> {
    pub mode: ReducerMode,
    pub threshold_kind: ThresholdKind,
    pub delta: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_weights: Option<Vec<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_sigma2: Option<T>,
    pub standardize: bool,
}

impl<T: Scalar> ReducerConfig<T> {
    pub fn empirical(threshold_kind: ThresholdKind) -> Self {
        Self {
            mode: ReducerMode::Empirical,
            threshold_kind,
            delta: T::lit(0.05),
            known_weights: None,
            known_sigma2: None,
            standardize: true,
        }
    }

    pub fn theoretical(threshold_kind: ThresholdKind, weights: Vec<T>, sigma2: T) -> Self {
        Self {
            mode: ReducerMode::Theoretical,
            threshold_kind,
            delta: T::lit(0.05),
            known_weights: Some(weights),
            known_sigma2: Some(sigma2),
            standardize: true,
        }
    }

    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        use ReducerMode::*;
        use ThresholdKind::*;
        match (self.mode, self.threshold_kind) {
            (Theoretical, ConfEmpirical) => {
                return Err(Error::Config(
                    "conf-empirical thresholds need empirical mode".into(),
                ))
            }
            (Empirical, ConfTheoretical) => {
                return Err(Error::Config(
                    "conf-theoretical thresholds need theoretical mode".into(),
                ))
            }
            _ => {}
        }
        match self.mode {
            Theoretical => {
                let w = self.known_weights.as_ref().ok_or_else(|| {
                    Error::Config("theoretical mode needs known weights".into())
                })?;
                let s2 = self.known_sigma2.ok_or_else(|| {
                    Error::Config("theoretical mode needs the noise variance".into())
                })?;
                if !(s2 >= T::zero()) || !s2.is_finite() {
                    return Err(Error::Config(format!("noise variance must be nonnegative, got {s2}")));
                }
                if w.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("known weights must be finite".into()));
                }
                if let Some(d) = dim {
                    if w.len() != d {
                        return Err(Error::Config(format!(
                            "{} known weights for {d} features",
                            w.len()
                        )));
                    }
                }
            }
            Empirical => {
                if self.known_weights.is_some() || self.known_sigma2.is_some() {
                    return Err(Error::Config(
                        "empirical mode estimates weights and noise; do not pass known values".into(),
                    ));
                }
            }
        }
        if matches!(self.threshold_kind, ConfEmpirical | ConfTheoretical)
            && !(self.delta > T::zero() && self.delta < T::one())
        {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }
}

/// Ordered disjoint groups of column indices covering every column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub groups: Vec<Vec<usize>>,
    pub source_columns: Vec<String>,
}

impl Partition {
    pub fn singletons(source_columns: Vec<String>) -> Self {
        Self {
            groups: (0..source_columns.len()).map(|i| vec![i]).collect(),
            source_columns,
        }
    }

    /// Number of reduced features.
    pub fn d(&self) -> usize {
        self.groups.len()
    }

    /// Check that the groups are nonempty, disjoint and cover every column.
    pub fn validate(&self) -> Result<()> {
        let len = self.source_columns.len();
        let mut seen = vec![false; len];
        for g in &self.groups {
            if g.is_empty() {
                return Err(Error::InvalidInput("empty group in partition".into()));
            }
            for &i in g {
                if i >= len {
                    return Err(Error::IndexOutOfRange { index: i, len });
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidInput(format!(
                        "column `{}` appears in more than one group",
                        self.source_columns[i]
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!(
                "column `{}` is in no group",
                self.source_columns[i]
            )));
        }
        Ok(())
    }

    pub fn group_name(&self, k: usize) -> String {
        let members: Vec<&str> = self.groups[k]
            .iter()
            .map(|&i| self.source_columns[i].as_str())
            .collect();
        members.join("+")
    }

    pub fn group_names(&self) -> Vec<String> {
        (0..self.d()).map(|k| self.group_name(k)).collect()
    }
}

/// One evaluated pair of the greedy sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDecision<T> {
    pub i: usize,
    pub j: usize,
    pub left: String,
    pub right: String,
    /// Weights and noise variance the threshold was evaluated with.
    pub w: Option<[T; 2]>,
    pub sigma2: Option<T>,
    pub decision: AggregationDecision<T>,
}

/// Cached per-column quantities shared by every pair test.
struct PairContext<'a, T> {
    cols: Vec<Vec<T>>,
    norms: Vec<T>,
    xy: Vec<T>,
    yy: T,
    n: usize,
    cfg: &'a ReducerConfig<T>,
    conf_quantiles: Option<ConfEmpiricalQuantiles>,
}

impl<'a, T: Scalar> PairContext<'a, T> {
    fn new(d: &Dataset<T>, y: &[T], cfg: &'a ReducerConfig<T>) -> Result<Self> {
        let n = d.n();
        if y.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: y.len(),
            });
        }
        if n < 5 {
            return Err(Error::InsufficientSamples { n, p: 3 });
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                column: "target".into(),
                row,
            });
        }
        let yc = center(y);
        let cols: Vec<Vec<T>> = d.columns().iter().map(|c| center(c)).collect();
        let norms: Vec<T> = cols.iter().map(|c| dot(c, c)).collect();
        for (k, &nrm) in norms.iter().enumerate() {
            if !(nrm > T::zero()) {
                return Err(Error::ZeroVariance {
                    column: d.names()[k].clone(),
                });
            }
        }
        let xy = cols.iter().map(|c| dot(c, &yc)).collect();
        let conf_quantiles = match cfg.threshold_kind {
            ThresholdKind::ConfEmpirical => Some(ConfEmpiricalQuantiles::new(n, cfg.delta.as_f64())?),
            _ => None,
        };
        Ok(Self {
            yy: dot(&yc, &yc),
            cols,
            norms,
            xy,
            n,
            cfg,
            conf_quantiles,
        })
    }

    fn decide(&self, i: usize, j: usize) -> Result<(AggregationDecision<T>, Option<[T; 2]>, Option<T>)> {
        let xij = dot(&self.cols[i], &self.cols[j]);
        let rho = clamp_unit(xij / (self.norms[i].sqrt() * self.norms[j].sqrt()));
        if rho.abs() > T::one() - T::lit(PERFECT_CORRELATION_EPS) {
            let d = AggregationDecision {
                correlation: rho,
                threshold: Threshold::Always,
                aggregate: true,
                delta_var: None,
                delta_bias: None,
                mode: DecisionMode::PerfectCorrelation,
            };
            return Ok((d, None, None));
        }
        let nm1 = T::count(self.n - 1);
        let (v1, v2, c) = (self.norms[i] / nm1, self.norms[j] / nm1, xij / nm1);
        let cfg = self.cfg;
        let (w1, w2, sigma2, fit) = match cfg.mode {
            ReducerMode::Empirical => {
                let fit = ols_fit_pair(&PairMoments {
                    x1x1: self.norms[i],
                    x2x2: self.norms[j],
                    x1x2: xij,
                    x1y: self.xy[i],
                    x2y: self.xy[j],
                    yy: self.yy,
                    n: self.n,
                })?;
                (fit.weights[0], fit.weights[1], fit.residual_variance, Some(fit))
            }
            ReducerMode::Theoretical => {
                let w = cfg.known_weights.as_ref().expect("validated");
                (w[i], w[j], cfg.known_sigma2.expect("validated"), None)
            }
        };
        let inputs = ThresholdInputs::new(sigma2, self.n, w1, w2, rho).with_sample_moments(v1, v2, c);
        let decision = match (cfg.mode, cfg.threshold_kind) {
            (ReducerMode::Empirical, ThresholdKind::Asymptotic) => {
                threshold_2d(&inputs, TwoFeatureRule::Empirical)?
            }
            (ReducerMode::Theoretical, ThresholdKind::Asymptotic) => {
                threshold_2d(&inputs, TwoFeatureRule::Asymptotic)?
            }
            (_, ThresholdKind::FiniteEqual) => threshold_2d(&inputs, TwoFeatureRule::FiniteEqual)?,
            (_, ThresholdKind::ConfEmpirical) => {
                let q = self.conf_quantiles.as_ref().expect("computed for this kind");
                let t = q.threshold(fit.as_ref().expect("empirical fit"), (v1 + v2) * T::lit(0.5))?;
                scalar_decision(rho, t, DecisionMode::ConfEmpirical)
            }
            (_, ThresholdKind::ConfTheoretical) => {
                let t = threshold_conf_theoretical(sigma2, T::one(), w1, w2, self.n, cfg.delta)?;
                scalar_decision(rho, t, DecisionMode::ConfTheoretical)
            }
        };
        Ok((decision, Some([w1, w2]), Some(sigma2)))
    }
}

fn scalar_decision<T: Scalar>(rho: T, t: T, mode: DecisionMode) -> AggregationDecision<T> {
    let threshold = if t == T::neg_infinity() {
        Threshold::Always
    } else {
        Threshold::Scalar { value: t }
    };
    AggregationDecision {
        correlation: rho,
        aggregate: threshold.admits(rho),
        threshold,
        delta_var: None,
        delta_bias: None,
        mode,
    }
}

/// The greedy sweep, with the pair test supplied by the caller.
///
/// Column `i` seeds a group unless an earlier group consumed it; every
/// later unconsumed `j` joins when `decide(i, j)` says so. Membership is
/// tested against the seed only.
pub fn greedy_partition<T, F>(names: &[String], mut decide: F) -> Result<(Partition, Vec<PairDecision<T>>)>
where
    T: Scalar,
    F: FnMut(usize, usize) -> Result<(AggregationDecision<T>, Option<[T; 2]>, Option<T>)>,
{
    let dim = names.len();
    let mut consumed = vec![false; dim];
    let mut groups = Vec::new();
    let mut log = Vec::new();
    for i in 0..dim {
        if consumed[i] {
            continue;
        }
        consumed[i] = true;
        let mut group = vec![i];
        for j in i + 1..dim {
            if consumed[j] {
                continue;
            }
            let (decision, w, sigma2) = decide(i, j).map_err(|e| Error::Pair {
                left: names[i].clone(),
                right: names[j].clone(),
                source: Box::new(e),
            })?;
            if decision.aggregate {
                consumed[j] = true;
                group.push(j);
            }
            log.push(PairDecision {
                i,
                j,
                left: names[i].clone(),
                right: names[j].clone(),
                w,
                sigma2,
                decision,
            });
        }
        groups.push(group);
    }
    Ok((
        Partition {
            groups,
            source_columns: names.to_vec(),
        },
        log,
    ))
}

/// Partition the (already standardized) columns of `d`.
pub fn build_partition<T: Scalar>(
    d: &Dataset<T>,
    y: &[T],
    cfg: &ReducerConfig<T>,
) -> Result<(Partition, Vec<PairDecision<T>>)> {
    cfg.validate(Some(d.dim()))?;
    let ctx = PairContext::new(d, y, cfg)?;
    greedy_partition(d.names(), |i, j| ctx.decide(i, j))
}

/// Test a single pair with the configured rule.
pub fn pairwise_decision<T: Scalar>(
    x_i: &[T],
    x_j: &[T],
    y: &[T],
    cfg: &ReducerConfig<T>,
) -> Result<AggregationDecision<T>> {
    let names = vec!["x_i".to_string(), "x_j".to_string()];
    let d = Dataset::from_columns(names, vec![x_i.to_vec(), x_j.to_vec()])?;
    cfg.validate(None)?;
    let mut cfg = cfg.clone();
    if let Some(w) = cfg.known_weights.as_mut() {
        if w.len() != 2 {
            return Err(Error::Config(format!(
                "pairwise decision needs 2 known weights, got {}",
                w.len()
            )));
        }
    }
    cfg.standardize = false;
    let ctx = PairContext::new(&d, y, &cfg)?;
    ctx.decide(0, 1).map(|(d, _, _)| d)
}

/// Replace each group by the arithmetic mean of its columns.
pub fn aggregate_partition<T: Scalar>(d: &Dataset<T>, p: &Partition) -> Result<Dataset<T>> {
    for g in &p.groups {
        for &i in g {
            if i >= d.dim() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: d.dim(),
                });
            }
        }
    }
    let n = d.n();
    let columns = p
        .groups
        .iter()
        .map(|g| {
            if g.len() == 1 {
                return d.column(g[0]).to_vec();
            }
            let k = T::count(g.len());
            (0..n)
                .map(|r| g.iter().fold(T::zero(), |acc, &i| acc + d.get(r, i)) / k)
                .collect()
        })
        .collect();
    Dataset::from_columns(p.group_names(), columns)
}

/// A fitted partition plus the training standardization it applies.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedReducer<T> {
    pub partition: Partition,
    pub standardization: StandardizationState<T>,
    pub decisions: Vec<PairDecision<T>>,
}

impl<T: Scalar> FittedReducer<T> {
    /// Standardize with training statistics, then average each group.
    pub fn transform(&self, d_new: &Dataset<T>) -> Result<Dataset<T>> {
        let z = self.standardization.apply(d_new)?;
        aggregate_partition(&z, &self.partition)
    }

    pub fn d(&self) -> usize {
        self.partition.d()
    }
}

pub fn fit<T: Scalar>(d: &Dataset<T>, y: &[T], cfg: &ReducerConfig<T>) -> Result<FittedReducer<T>> {
    fit_transform(d, y, cfg).map(|(r, _)| r)
}

pub fn fit_transform<T: Scalar>(
    d: &Dataset<T>,
    y: &[T],
    cfg: &ReducerConfig<T>,
) -> Result<(FittedReducer<T>, Dataset<T>)> {
    cfg.validate(Some(d.dim()))?;
    let standardization = if cfg.standardize {
        StandardizationState::fit(d)?
    } else {
        StandardizationState::identity(d.names().to_vec())
    };
    let z = standardization.apply(d)?;
    let (partition, decisions) = build_partition(&z, y, cfg)?;
    let out = aggregate_partition(&z, &partition)?;
    Ok((
        FittedReducer {
            partition,
            standardization,
            decisions,
        },
        out,
    ))
}

pub fn transform<T: Scalar>(r: &FittedReducer<T>, d_new: &Dataset<T>) -> Result<Dataset<T>> {
    r.transform(d_new)
}

/// Average pairwise sample correlation inside a group.
pub fn mean_pairwise_correlation<T: Scalar>(d: &Dataset<T>, group: &[usize]) -> Result<T> {
    let mut rs = Vec::new();
    for (a, &i) in group.iter().enumerate() {
        for &j in &group[a + 1..] {
            rs.push(crate::stats::sample_correlation(d.column(i), d.column(j))?);
        }
    }
    if rs.is_empty() {
        return Ok(T::one());
    }
    Ok(mean(&rs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Dataset<f64>, Vec<f64>) {
        let a = vec![0.1, 0.9, 0.4, 0.7, 0.2, 0.5, 0.8, 0.3];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = vec![0.6, 0.1, 0.9, 0.2, 0.4, 0.8, 0.3, 0.7];
        let y: Vec<f64> = (0..8).map(|r| a[r] + c[r] + 0.01 * r as f64).collect();
        (Dataset::from_unnamed(vec![a, b, c]).unwrap(), y)
    }

    #[test]
    fn config_rules() {
        let cfg = ReducerConfig::<f64>::empirical(ThresholdKind::ConfTheoretical);
        assert!(matches!(cfg.validate(None), Err(Error::Config(_))));
        let mut cfg = ReducerConfig::<f64>::empirical(ThresholdKind::Asymptotic);
        cfg.known_sigma2 = Some(1.0);
        assert!(cfg.validate(None).is_err());
        let cfg = ReducerConfig::theoretical(ThresholdKind::ConfEmpirical, vec![1.0], 1.0);
        assert!(cfg.validate(None).is_err());
        let cfg = ReducerConfig::theoretical(ThresholdKind::Asymptotic, vec![1.0], 1.0);
        assert!(cfg.validate(Some(2)).is_err());
        assert!(cfg.validate(Some(1)).is_ok());
    }

    #[test]
    fn duplicate_columns_merge_via_guard() {
        let (d, y) = toy();
        let cfg = ReducerConfig::empirical(ThresholdKind::Asymptotic);
        let (fitted, out) = fit_transform(&d, &y, &cfg).unwrap();
        assert!(fitted.partition.groups[0].starts_with(&[0, 1]));
        assert_eq!(fitted.decisions[0].decision.mode, DecisionMode::PerfectCorrelation);
        assert!(out.names()[0].starts_with("x1+x2"));
        assert_eq!(fitted.transform(&d).unwrap(), out);
    }

    #[test]
    fn group_mean_by_hand() {
        let d = Dataset::from_unnamed(vec![vec![1.0, 3.0], vec![3.0, 5.0]]).unwrap();
        let p = Partition {
            groups: vec![vec![0, 1]],
            source_columns: d.names().to_vec(),
        };
        let out = aggregate_partition(&d, &p).unwrap();
        assert_eq!(out.column(0), &[2.0, 4.0]);
        let id = Partition::singletons(d.names().to_vec());
        assert_eq!(aggregate_partition(&d, &id).unwrap(), d);
        let bad = Partition {
            groups: vec![vec![0, 5]],
            source_columns: d.names().to_vec(),
        };
        assert!(matches!(
            aggregate_partition(&d, &bad),
            Err(Error::IndexOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn forced_extremes() {
        let (d, y) = toy();
        let cols: Vec<Vec<f64>> = vec![
            d.column(0).to_vec(),
            d.column(2).to_vec(),
            d.column(0).iter().zip(d.column(2)).map(|(a, c)| a - c).collect(),
        ];
        let d = Dataset::from_unnamed(cols).unwrap();
        let never = ReducerConfig::theoretical(ThresholdKind::Asymptotic, vec![0.1, 0.5, 0.9], 0.0);
        let (r, _) = fit_transform(&d, &y, &never).unwrap();
        assert_eq!(r.d(), 3);
        let always = ReducerConfig::theoretical(ThresholdKind::Asymptotic, vec![0.4; 3], 1.0);
        let (r, _) = fit_transform(&d, &y, &always).unwrap();
        assert_eq!(r.partition.groups, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn pair_errors_name_the_pair() {
        let d = Dataset::from_unnamed(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![5.0, 1.0, 4.0, 2.0, 3.0]]).unwrap();
        let y = vec![1.0; 4];
        assert!(matches!(
            build_partition(&d, &y, &ReducerConfig::empirical(ThresholdKind::Asymptotic)),
            Err(Error::LengthMismatch { .. })
        ));
        let e = greedy_partition::<f64, _>(d.names(), |_, _| Err(Error::Degenerate("boom"))).unwrap_err();
        match e {
            Error::Pair { left, right, .. } => assert_eq!((left.as_str(), right.as_str()), ("x1", "x2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn partition_validation() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let ok = Partition {
            groups: vec![vec![0, 2], vec![1]],
            source_columns: names.clone(),
        };
        assert!(ok.validate().is_ok());
        assert_eq!(ok.group_names(), vec!["a+c", "b"]);
        let overlap = Partition {
            groups: vec![vec![0, 1], vec![1, 2]],
            source_columns: names.clone(),
        };
        assert!(overlap.validate().is_err());
        let gap = Partition {
            groups: vec![vec![0, 1]],
            source_columns: names,
        };
        assert!(gap.validate().is_err());
    }
}
