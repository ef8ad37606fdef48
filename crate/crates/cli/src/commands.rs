use std::fs;
use std::path::{Path, PathBuf};

use lincfa::io::{
    format_number,
    load_csv, load_features, load_partition, save_csv, save_csv_with_target, save_partition, write_table,
    PartitionDocument,
};
use lincfa::reducer::fit_transform;
use lincfa::threshold::Threshold;
use lincfa::{ReducerConfig, ThresholdKind};
use lincfa_lab::compare::{compare as compare_models, split_rows, Reducer};
use lincfa_lab::experiment::{write_2d_csv, write_ddim_csv, write_figure1_csv, Arm2dResult};
use lincfa_lab::generators::truth_for;
use lincfa_lab::montecarlo::MonteCarloRow;
use lincfa_lab::report::write_rows;
use lincfa_lab::validate::{
    check_3d, check_close_arms, check_closed_form, check_closed_form_arms, check_ddim, check_mse_arms,
    check_reference_thresholds, check_wide_arms, Check, ARMS_CLOSE, ARMS_WIDE, REFERENCE_THRESHOLDS,
};
use lincfa_lab::{
    gen_bivariate, gen_ddim, gen_trivariate, monte_carlo_bias_variance, run_experiment_2d, run_experiment_3d,
    run_experiment_ddim, ExperimentConfig, GeneratorSpec, ModelKind,
};

use crate::args::{
    ArmSet, CompareArgs, Mode, ReduceArgs, ReducerArgs, ScenarioArg, SynthArgs, ThresholdArg, TransformArgs,
    ValidateArgs, ValidateScenario,
};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Outputs must not overwrite the input file.
fn distinct_outputs(input: &Path, outputs: &[&Path]) -> Result<()> {
    for out in outputs {
        if *out == input {
            return Err(usage(format!("output {} would overwrite the input", out.display())));
        }
    }
    for (k, a) in outputs.iter().enumerate() {
        if outputs[k + 1..].contains(a) {
            return Err(usage(format!("{} is named as two different outputs", a.display())));
        }
    }
    Ok(())
}

fn kind(t: ThresholdArg) -> ThresholdKind {
    match t {
        ThresholdArg::Asymptotic => ThresholdKind::Asymptotic,
        ThresholdArg::FiniteEqual => ThresholdKind::FiniteEqual,
        ThresholdArg::ConfEmpirical => ThresholdKind::ConfEmpirical,
        ThresholdArg::ConfTheoretical => ThresholdKind::ConfTheoretical,
    }
}

/// Flag-level checks; nothing is read yet.
fn check_reducer_flags(a: &ReducerArgs) -> Result<()> {
    match a.mode {
        Mode::Theoretical => {
            if a.sigma2.is_none() || a.weights_file.is_none() {
                return Err(usage("--mode theoretical needs --sigma2 and --weights-file"));
            }
        }
        Mode::Empirical => {
            if a.sigma2.is_some() || a.weights_file.is_some() {
                return Err(usage("--sigma2 and --weights-file only apply to --mode theoretical"));
            }
        }
    }
    let cfg = reducer_config(a, None)?;
    cfg.validate(None)?;
    Ok(())
}

fn reducer_config(a: &ReducerArgs, weights: Option<Vec<f64>>) -> Result<ReducerConfig<f64>> {
    let mut cfg = match a.mode {
        Mode::Empirical => ReducerConfig::empirical(kind(a.threshold)),
        Mode::Theoretical => ReducerConfig::theoretical(
            kind(a.threshold),
            weights.unwrap_or_default(),
            a.sigma2.unwrap_or(f64::NAN),
        ),
    };
    cfg.delta = a.delta;
    cfg.standardize = !a.no_standardize;
    Ok(cfg)
}

fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(lincfa::Error::from)?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| lincfa::Error::InvalidInput(format!("weights file {}: bad value `{t}`", path.display())).into())
        })
        .collect()
}

fn load_config(a: &ReducerArgs) -> Result<ReducerConfig<f64>> {
    let weights = a.weights_file.as_deref().map(read_weights).transpose()?;
    reducer_config(a, weights)
}

/// Same wording as the threshold's Display, at full precision.
fn threshold_text(t: &Threshold<f64>) -> String {
    match *t {
        Threshold::Scalar { value } => format!("rho >= {}", format_number(value)),
        Threshold::Squared { value } => format!("rho^2 >= {}", format_number(value)),
        Threshold::Interval { lower, upper } => format!("rho in [{}, {}]", format_number(lower), format_number(upper)),
        Threshold::Sign { value } => format!("test statistic {} >= 0", format_number(value)),
        Threshold::Empty | Threshold::Always => t.to_string(),
    }
}

fn default_log(partition: &Path) -> PathBuf {
    let stem = partition.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "partition".into());
    partition.with_file_name(format!("{stem}.decisions.csv"))
}

pub fn reduce(a: &ReduceArgs) -> Result<Vec<Check>> {
    check_reducer_flags(&a.reducer)?;
    let log = a.log.clone().unwrap_or_else(|| default_log(&a.partition));
    distinct_outputs(&a.input, &[&a.output, &a.partition, &log])?;

    let cfg = load_config(&a.reducer)?;
    let (x, y) = load_csv::<f64>(&a.input, &a.target)?;
    let (fitted, reduced) = fit_transform(&x, &y, &cfg)?;
    save_csv_with_target(&a.output, &reduced, Some((&a.target, &y)))?;
    save_partition(&a.partition, &PartitionDocument::from_fitted(&fitted, &cfg))?;

    let rows: Vec<Vec<String>> = fitted
        .decisions
        .iter()
        .map(|p| {
            let d = &p.decision;
            vec![
                p.left.clone(),
                p.right.clone(),
                format_number(d.correlation),
                threshold_text(&d.threshold),
                if d.aggregate { "merge" } else { "keep" }.to_string(),
                d.mode.to_string(),
            ]
        })
        .collect();
    write_table(&log, &["left", "right", "correlation", "threshold", "verdict", "rule"], &rows)?;

    println!("reduced {} features to {}", x.dim(), fitted.d());
    for g in fitted.partition.group_names() {
        println!("  {g}");
    }
    Ok(vec![Check::new(
        "partition covers every feature once",
        fitted.partition.validate().is_ok(),
        format!("{} groups", fitted.d()),
    )])
}

pub fn transform(a: &TransformArgs) -> Result<Vec<Check>> {
    distinct_outputs(&a.input, &[&a.output, &a.partition])?;
    let doc: PartitionDocument<f64> = load_partition(&a.partition)?;
    let fitted = doc.to_fitted()?;
    match &a.target {
        Some(t) => {
            let (x, y) = load_csv::<f64>(&a.input, t)?;
            save_csv_with_target(&a.output, &fitted.transform(&x)?, Some((t, &y)))?;
        }
        None => {
            let x = load_features::<f64>(&a.input)?;
            save_csv(&a.output, &fitted.transform(&x)?)?;
        }
    }
    println!("applied {} groups", fitted.d());
    Ok(Vec::new())
}

pub fn synth(a: &SynthArgs) -> Result<Vec<Check>> {
    let weights = |default: &[f64]| if a.w.is_empty() { default.to_vec() } else { a.w.clone() };
    let mut spec = match a.scenario {
        ScenarioArg::TwoD => {
            let w = weights(&[0.2, 0.8]);
            if w.len() != 2 {
                return Err(usage(format!("--w needs 2 weights for 2d, got {}", w.len())));
            }
            GeneratorSpec::bivariate(a.n, a.sigma.unwrap_or(1.0), [w[0], w[1]], a.seed)
        }
        ScenarioArg::ThreeD => {
            let mut s = GeneratorSpec::trivariate(a.n, a.seed);
            s.sigma = a.sigma.unwrap_or(0.5);
            s.weights = weights(&s.weights);
            s
        }
        ScenarioArg::Ddim => {
            let mut s = GeneratorSpec::ddim(a.n, a.dim, a.sigma.unwrap_or(10.0), a.seed);
            s.weights = a.w.clone();
            s
        }
    };
    spec.mix = a.mix;
    spec.validate()?;
    let (x, y, _) = match a.scenario {
        ScenarioArg::TwoD => gen_bivariate(&spec)?,
        ScenarioArg::ThreeD => gen_trivariate(&spec)?,
        ScenarioArg::Ddim => gen_ddim(&spec)?,
    };
    if x.names().iter().any(|n| n == &a.target_name) {
        return Err(usage(format!("target name `{}` clashes with a feature", a.target_name)));
    }
    save_csv_with_target(&a.output, &x, Some((&a.target_name, &y)))?;
    println!("wrote {} rows of {} features", x.n(), x.dim());
    Ok(Vec::new())
}

fn mc_rows(results: &[Arm2dResult]) -> Vec<MonteCarloRow> {
    results
        .iter()
        .flat_map(|r| {
            let label = format!("w=({},{}) sigma={}", r.row.w1, r.row.w2, r.row.sigma);
            [r.full.row(label.clone()), r.aggr.row(label)]
        })
        .collect()
}

fn validate_2d(a: &ValidateArgs, reps: usize) -> Result<Vec<Check>> {
    let cfg = ExperimentConfig::new(a.n, reps, a.seed);
    let mut checks = Vec::new();
    let mut all = Vec::new();
    let want_wide = matches!(a.arms, ArmSet::Wide | ArmSet::Both);
    let want_close = matches!(a.arms, ArmSet::Close | ArmSet::Both);
    if a.n == 500 {
        let keep = |w1: f64| (w1 == 0.2 && want_wide) || (w1 == 0.47 && want_close);
        checks.extend(
            check_reference_thresholds()
                .into_iter()
                .zip(REFERENCE_THRESHOLDS)
                .filter(|(_, r)| keep(r.0))
                .map(|(c, _)| c),
        );
    }
    if want_wide {
        let res = run_experiment_2d(&ARMS_WIDE, &cfg, a.mix)?;
        checks.extend(check_wide_arms(&res));
        all.extend(res);
    }
    if want_close {
        let res = run_experiment_2d(&ARMS_CLOSE, &cfg, a.mix)?;
        checks.extend(check_close_arms(&res));
        all.extend(res);
    }
    checks.extend(check_mse_arms(&all));
    checks.extend(check_closed_form_arms(&all));
    write_2d_csv(&a.out_dir.join("two_feature.csv"), &all)?;
    write_rows(&a.out_dir.join("two_feature_mc.csv"), &mc_rows(&all))?;
    Ok(checks)
}

fn validate_3d(a: &ValidateArgs, reps: usize) -> Result<Vec<Check>> {
    let cfg = ExperimentConfig::new(a.n, reps, a.seed);
    let (row, full, aggr) = run_experiment_3d(&GeneratorSpec::trivariate(a.n, a.seed), &cfg)?;
    write_rows(&a.out_dir.join("three_feature.csv"), std::slice::from_ref(&row))?;
    write_rows(&a.out_dir.join("three_feature_mc.csv"), &[full.row("three"), aggr.row("three")])?;
    let mut checks = check_3d(&row);
    checks.push(Check::new(
        "three features: decomposition adds up",
        row.decomposition_ok,
        format!("gaps {:.2e}, {:.2e}", full.decomposition_gap, aggr.decomposition_gap),
    ));
    Ok(checks)
}

fn validate_ddim(a: &ValidateArgs, reps: usize) -> Result<Vec<Check>> {
    let mut sizes = vec![150, 300, 500, 1000, 2000];
    if !sizes.contains(&a.n) {
        sizes.push(a.n);
        sizes.sort_unstable();
    }
    let res = run_experiment_ddim(100, 10.0, &sizes, reps, 500, a.seed)?;
    let rows: Vec<_> = res.iter().map(|r| r.row.clone()).collect();
    write_figure1_csv(&a.out_dir.join("figure1.csv"), &rows)?;
    write_ddim_csv(&a.out_dir.join("many_features.csv"), &res)?;
    let main = res.iter().find(|r| r.row.n == a.n).expect("size included");
    let curve: Vec<_> = res.iter().filter(|r| [150, 300, 500, 1000, 2000].contains(&r.row.n)).cloned().collect();
    Ok(check_ddim(main, &curve))
}

fn validate_closed_form(a: &ValidateArgs, reps: usize) -> Result<Vec<Check>> {
    let mut spec = GeneratorSpec::bivariate(a.n, 1.0, [0.2, 0.8], a.seed);
    spec.mix = a.mix;
    let run = monte_carlo_bias_variance(&spec, &[ModelKind::Full, ModelKind::AggregatedPair(0, 1)], reps, 500)?;
    let truth = truth_for(&spec, 0)?;
    let ws = truth.standardized_weights();
    let rho = truth.pop_corr(0, 1);
    let dbias = lincfa::threshold::delta_bias_finite_equal(ws[0], ws[1], 1.0, rho)?;
    let dvar = lincfa::threshold::delta_var_asymptotic(truth.sigma2, a.n)?;
    write_rows(
        &a.out_dir.join("closed_form_mc.csv"),
        &[run.reports[0].row("sigma=1"), run.reports[1].row("sigma=1")],
    )?;
    Ok(check_closed_form("closed form sigma=1", dvar, dbias, &run.reports[0], &run.reports[1], run.variance_difference(0, 1)))
}

pub fn validate(a: &ValidateArgs) -> Result<Vec<Check>> {
    if a.reps.is_some_and(|r| r < 2) {
        return Err(usage("--reps must be at least 2"));
    }
    if !(0.0..=1.0).contains(&a.mix) {
        return Err(usage(format!("--mix must lie in [0, 1], got {}", a.mix)));
    }
    fs::create_dir_all(&a.out_dir).map_err(lincfa::Error::from)?;
    let reps = |default: usize| a.reps.unwrap_or(default);
    let mut checks = Vec::new();
    use ValidateScenario::*;
    if matches!(a.scenario, TwoD | All) {
        checks.extend(validate_2d(a, reps(500))?);
    }
    if matches!(a.scenario, ThreeD | All) {
        checks.extend(validate_3d(a, reps(500))?);
    }
    if matches!(a.scenario, ClosedForm | All) {
        checks.extend(validate_closed_form(a, reps(1000))?);
    }
    if matches!(a.scenario, Ddim | All) {
        checks.extend(validate_ddim(a, reps(50))?);
    }
    Ok(checks)
}

pub fn compare(a: &CompareArgs) -> Result<Vec<Check>> {
    check_reducer_flags(&a.reducer)?;
    if !(a.variance_fraction > 0.0 && a.variance_fraction <= 1.0) {
        return Err(usage(format!("--variance-fraction must lie in (0, 1], got {}", a.variance_fraction)));
    }
    if !(a.test_fraction > 0.0 && a.test_fraction < 1.0) {
        return Err(usage(format!("--test-fraction must lie in (0, 1), got {}", a.test_fraction)));
    }
    distinct_outputs(&a.input, &[&a.output])?;
    let cfg = load_config(&a.reducer)?;
    let (x, y) = load_csv::<f64>(&a.input, &a.target)?;
    let (tr, te) = split_rows(x.n(), a.test_fraction, a.seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| y[i]).collect::<Vec<f64>>();
    let (x_tr, x_te) = (x.select_rows(&tr)?, x.select_rows(&te)?);
    let (y_tr, y_te) = (pick(&tr), pick(&te));
    let reducers = [Reducer::Identity, Reducer::LinCfa(cfg), Reducer::Pca(a.variance_fraction)];
    let rows = compare_models(&reducers, (&x_tr, &y_tr), (&x_te, &y_te))?;
    write_rows(&a.output, &rows)?;
    for r in &rows {
        println!("{:<18} d={:<4} r2={:.4} mse={:.6}", r.method, r.d, r.r2, r.mse);
    }
    Ok(Vec::new())
}
