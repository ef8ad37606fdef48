//! Named pass/fail checks over the standard experiment arms.

use lincfa::threshold::threshold_2d;
use lincfa::{ThresholdInputs, TwoFeatureRule};
use serde::Serialize;

use crate::experiment::{Arm2d, Arm2dResult, DdimResult, Row3d};
use crate::montecarlo::{Estimate, MonteCarloReport};

/// Large weight gap: aggregation should only pay off under heavy noise.
pub const ARMS_WIDE: [Arm2d; 3] = [
    Arm2d { sigma: 0.5, w: [0.2, 0.8] },
    Arm2d { sigma: 1.0, w: [0.2, 0.8] },
    Arm2d { sigma: 10.0, w: [0.2, 0.8] },
];

/// Nearly equal weights: aggregation should pay off at every noise level.
pub const ARMS_CLOSE: [Arm2d; 3] = [
    Arm2d { sigma: 0.5, w: [0.47, 0.52] },
    Arm2d { sigma: 1.0, w: [0.47, 0.52] },
    Arm2d { sigma: 10.0, w: [0.47, 0.52] },
];

/// `(w1, w2, σ², threshold)` reference values for `n = 500`.
pub const REFERENCE_THRESHOLDS: [(f64, f64, f64, f64); 5] = [
    (0.2, 0.8, 0.25, 0.997217),
    (0.2, 0.8, 1.0, 0.988867),
    (0.2, 0.8, 100.0, -0.113338),
    (0.47, 0.52, 0.25, 0.599198),
    (0.47, 0.52, 1.0, -0.603206),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// `|got - want| <= 3 se`.
pub fn within_se(name: impl Into<String>, got: f64, want: f64, se: f64) -> Check {
    Check::new(
        name,
        (got - want).abs() <= 3.0 * se,
        format!("{got:.6e} vs {want:.6e}, 3 SE = {:.3e}", 3.0 * se),
    )
}

/// Monte Carlo estimates of a full/merged pair against the closed forms:
/// the full model is unbiased, merging saves `delta_var` of variance and
/// costs `delta_bias` of squared bias.
pub fn check_closed_form(
    label: &str,
    delta_var: f64,
    delta_bias: f64,
    full: &MonteCarloReport,
    aggr: &MonteCarloReport,
    variance_gap: Estimate,
) -> Vec<Check> {
    vec![
        within_se(format!("{label}: bias² of the full model"), full.bias2.value, 0.0, full.bias2.se),
        within_se(format!("{label}: variance saved by merging"), variance_gap.value, delta_var, variance_gap.se),
        within_se(format!("{label}: bias² of the merged model"), aggr.bias2.value, delta_bias, aggr.bias2.se),
        Check::new(
            format!("{label}: decomposition adds up"),
            full.decomposition_ok && aggr.decomposition_ok,
            format!("gaps {:.2e}, {:.2e}", full.decomposition_gap, aggr.decomposition_gap),
        ),
    ]
}

/// Closed-form checks for every arm of a two-feature run.
pub fn check_closed_form_arms(res: &[Arm2dResult]) -> Vec<Check> {
    res.iter()
        .flat_map(|r| {
            let row = &r.row;
            check_closed_form(
                &format!("w=({},{}) sigma={}", row.w1, row.w2, row.sigma),
                row.delta_var_theory,
                row.delta_bias_theory,
                &r.full,
                &r.aggr,
                Estimate {
                    value: row.var_diff,
                    se: row.var_diff_se,
                },
            )
        })
        .collect()
}

pub fn check_reference_thresholds() -> Vec<Check> {
    REFERENCE_THRESHOLDS
        .iter()
        .map(|&(w1, w2, s2, want)| {
            let got = threshold_2d(&ThresholdInputs::new(s2, 500, w1, w2, 0.0), TwoFeatureRule::Asymptotic)
                .ok()
                .and_then(|d| d.threshold.scalar());
            let passed = got.is_some_and(|g| (g - want).abs() <= 5e-7);
            Check::new(
                format!("threshold w=({w1},{w2}) s2={s2}"),
                passed,
                format!("got {got:?}, want {want}"),
            )
        })
        .collect()
}

/// 95% intervals of the merged model's MSE overlap or lie below the full
/// model's.
pub fn mse_not_worse(mse_aggr: f64, ci_aggr: f64, mse_full: f64, ci_full: f64) -> bool {
    mse_aggr - ci_aggr <= mse_full + ci_full
}

/// Decision counts and error comparisons for the wide-gap arms (in order
/// σ = 0.5, 1, 10).
pub fn check_wide_arms(res: &[Arm2dResult]) -> Vec<Check> {
    let mut out = Vec::new();
    for (k, r) in res.iter().enumerate() {
        let want = if k < 2 { 0 } else { r.row.reps };
        out.push(Check::new(
            format!("wide sigma={} theoretical aggregations", r.row.sigma),
            r.row.agg_theo == want,
            format!("{} of {}, want {want}", r.row.agg_theo, r.row.reps),
        ));
    }
    if let Some(r) = res.get(2) {
        let frac = r.row.agg_emp as f64 / r.row.reps as f64;
        out.push(Check::new(
            "wide sigma=10 empirical aggregation rate",
            (0.55..=0.80).contains(&frac),
            format!("{frac:.3}, want [0.55, 0.80]"),
        ));
    }
    out
}

pub fn check_close_arms(res: &[Arm2dResult]) -> Vec<Check> {
    let mut out = Vec::new();
    for r in res {
        let frac = r.row.agg_emp as f64 / r.row.reps as f64;
        out.push(Check::new(
            format!("close sigma={} theoretical aggregations", r.row.sigma),
            r.row.agg_theo == r.row.reps,
            format!("{} of {}", r.row.agg_theo, r.row.reps),
        ));
        out.push(Check::new(
            format!("close sigma={} empirical aggregation rate", r.row.sigma),
            (0.50..=0.85).contains(&frac),
            format!("{frac:.3}, want [0.50, 0.85]"),
        ));
    }
    out
}

/// MSE comparison on the arms where every theoretical decision merged
/// the pair.
pub fn check_mse_arms(res: &[Arm2dResult]) -> Vec<Check> {
    res.iter()
        .filter(|r| r.row.agg_theo == r.row.reps)
        .map(|r| {
            let row = &r.row;
            Check::new(
                format!("w=({},{}) sigma={} merged MSE not worse", row.w1, row.w2, row.sigma),
                mse_not_worse(row.mse_aggr, row.mse_aggr_ci, row.mse_full, row.mse_full_ci),
                format!(
                    "{:.6} ± {:.6} vs {:.6} ± {:.6}",
                    row.mse_aggr, row.mse_aggr_ci, row.mse_full, row.mse_full_ci
                ),
            )
        })
        .collect()
}

pub fn check_3d(row: &Row3d) -> Vec<Check> {
    vec![
        Check::new(
            "three features: theoretical aggregations",
            row.agg_theo == row.reps,
            format!("{} of {}", row.agg_theo, row.reps),
        ),
        Check::new(
            "three features: merged MSE not worse",
            mse_not_worse(row.mse_aggr, row.mse_aggr_ci, row.mse_full, row.mse_full_ci),
            format!(
                "{:.6} ± {:.6} vs {:.6} ± {:.6}",
                row.mse_aggr, row.mse_aggr_ci, row.mse_full, row.mse_full_ci
            ),
        ),
    ]
}

/// `main` is the `n = 500` run; `curve` holds the sizes in increasing order.
pub fn check_ddim(main: &DdimResult, curve: &[DdimResult]) -> Vec<Check> {
    let r = &main.row;
    let mut out = vec![
        Check::new(
            "many features: median theoretical d",
            (2.0..=8.0).contains(&r.d_theo),
            format!("{}, want [2, 8]", r.d_theo),
        ),
        Check::new(
            "many features: median empirical d",
            (8.0..=30.0).contains(&r.d_emp),
            format!("{}, want [8, 30]", r.d_emp),
        ),
        Check::new(
            "many features: R² gain of empirical reduction",
            r.r2_emp - r.r2_full >= 0.02,
            format!("{:.4} vs {:.4}", r.r2_emp, r.r2_full),
        ),
    ];
    let mono = |f: fn(&DdimResult) -> f64| curve.windows(2).all(|w| f(&w[1]) >= f(&w[0]));
    out.push(Check::new(
        "many features: d nondecreasing in n",
        mono(|c| c.row.d_theo) && mono(|c| c.row.d_emp),
        curve
            .iter()
            .map(|c| format!("n={} d_theo={} d_emp={}", c.row.n, c.row.d_theo, c.row.d_emp))
            .collect::<Vec<_>>()
            .join("; "),
    ));
    if let Some(first) = curve.first() {
        let c = &first.row;
        out.push(Check::new(
            format!("many features: reduced R² >= full R² at n={}", c.n),
            c.r2_emp >= c.r2_full && c.r2_theo >= c.r2_full,
            format!("theo {:.4}, emp {:.4}, full {:.4}", c.r2_theo, c.r2_emp, c.r2_full),
        ));
    }
    out
}

/// `STATUS=<ok|fail> CHECKS=<passed>/<total>`.
pub fn status_line(checks: &[Check]) -> String {
    let passed = checks.iter().filter(|c| c.passed).count();
    let status = if passed == checks.len() { "ok" } else { "fail" };
    format!("STATUS={status} CHECKS={passed}/{}", checks.len())
}
