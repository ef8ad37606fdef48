use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lincfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lincfa")).args(args).output().expect("binary runs")
}

fn last_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().last().unwrap_or_default().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn duplicate_columns_collapse_to_one_group() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("dup.csv");
    let mut text = String::from("a,b,y\n");
    for i in 0..40 {
        let v = (i as f64 * 0.37).sin();
        text.push_str(&format!("{v},{v},{}\n", 2.0 * v + 0.01 * (i % 3) as f64));
    }
    write(&input, &text);
    let (out, part) = (dir.path().join("r.csv"), dir.path().join("p.json"));
    let res = lincfa(&["reduce", "--input", p(&input), "--target", "y", "--output", p(&out), "--partition", p(&part)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(last_line(&res), "STATUS=ok CHECKS=1/1");
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 2, "one group plus target: {header}");
    let log = fs::read_to_string(dir.path().join("p.decisions.csv")).unwrap();
    assert!(log.lines().nth(1).unwrap().contains("merge"), "{log}");
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let res = lincfa(&["synth", "--scenario", "ddim", "--n", "60", "--dim", "8", "--seed", "11", "--output", p(&path)]);
        assert!(res.status.success());
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn reduce_then_transform_reproduces_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert!(lincfa(&["synth", "--scenario", "3d", "--n", "400", "--seed", "5", "--output", p(&data)]).status.success());
    let before = fs::read(&data).unwrap();
    let (r, part, t) = (dir.path().join("r.csv"), dir.path().join("p.json"), dir.path().join("t.csv"));
    let res = lincfa(&["reduce", "--input", p(&data), "--target", "y", "--output", p(&r), "--partition", p(&part)]);
    assert!(res.status.success());
    let part_before = fs::read(&part).unwrap();
    let res = lincfa(&["transform", "--input", p(&data), "--partition", p(&part), "--target", "y", "--output", p(&t)]);
    assert!(res.status.success());
    assert_eq!(fs::read(&r).unwrap(), fs::read(&t).unwrap());
    assert_eq!(fs::read(&data).unwrap(), before, "input untouched");
    assert_eq!(fs::read(&part).unwrap(), part_before, "partition untouched");
}

#[test]
fn compare_writes_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert!(lincfa(&["synth", "--scenario", "2d", "--n", "300", "--output", p(&data)]).status.success());
    let out = dir.path().join("c.csv");
    let res = lincfa(&["compare", "--input", p(&data), "--target", "y", "--output", p(&out)]);
    assert!(res.status.success());
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "method,d,r2,mse");
    assert_eq!(lines.len(), 4);
}

#[test]
fn missing_theoretical_inputs_fail_before_reading() {
    let dir = tempfile::tempdir().unwrap();
    // the input does not exist: a usage error proves flags were checked first
    let res = lincfa(&[
        "reduce", "--input", p(&dir.path().join("absent.csv")), "--target", "y",
        "--output", p(&dir.path().join("o.csv")), "--partition", p(&dir.path().join("p.json")),
        "--mode", "theoretical",
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(last_line(&res), "STATUS=fail CHECKS=0/0");
}

#[test]
fn overwriting_the_input_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert!(lincfa(&["synth", "--scenario", "2d", "--n", "50", "--output", p(&data)]).status.success());
    let before = fs::read(&data).unwrap();
    let res = lincfa(&["reduce", "--input", p(&data), "--target", "y", "--output", p(&data), "--partition", p(&dir.path().join("p.json"))]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(fs::read(&data).unwrap(), before);
}

#[test]
fn errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let nan = dir.path().join("nan.csv");
    write(&nan, "a,b,y\n1,2,3\nNaN,1,2\n2,2,1\n3,1,0\n");
    let clean = dir.path().join("clean.csv");
    write(&clean, "a,b,y\n1,2,3\n0,1,2\n2,2,1\n3,1,0\n");
    let out = |n: &str| dir.path().join(n);
    let red = |input: &Path| {
        lincfa(&["reduce", "--input", p(input), "--target", "y", "--output", p(&out("o.csv")), "--partition", p(&out("p.json"))])
    };
    let missing = red(&out("absent.csv")).status.code().unwrap();
    let bad_cell = red(&nan).status.code().unwrap();
    let no_target = lincfa(&["reduce", "--input", p(&clean), "--target", "zz", "--output", p(&out("o.csv")), "--partition", p(&out("p.json"))])
        .status
        .code()
        .unwrap();
    let few_reps = lincfa(&["validate", "--scenario", "3d", "--reps", "10", "--out-dir", p(&out("v"))]).status.code().unwrap();
    let codes = [2, missing, bad_cell, no_target, few_reps];
    for (k, c) in codes.iter().enumerate() {
        assert!(*c > 1, "code {c}");
        assert!(!codes[..k].contains(c), "duplicate exit code {c} in {codes:?}");
    }
    assert!(!out("o.csv").exists() && !out("p.json").exists(), "failed runs leave no outputs");
}

#[test]
fn validate_three_features_passes() {
    let dir = tempfile::tempdir().unwrap();
    let res = lincfa(&["validate", "--scenario", "3d", "--reps", "100", "--out-dir", p(dir.path())]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    assert!(last_line(&res).starts_with("STATUS=ok CHECKS="));
    assert!(dir.path().join("three_feature.csv").exists());
}
