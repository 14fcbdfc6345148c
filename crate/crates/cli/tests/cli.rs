use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// A short copy of the micro city with absolute file references.
fn small_config(name: &str, methods: &str, threshold: f64) -> PathBuf {
    let dir = scenarios();
    let base = std::fs::read_to_string(dir.join("micro_city.toml")).unwrap();
    let mut text = String::new();
    for line in base.lines() {
        let line = match line.split_once(" = ") {
            Some(("methods", _)) => format!("methods = {methods}"),
            Some(("budgets", _)) => "budgets = [10, 30]".into(),
            Some(("seeds", _)) => "seeds = [1, 2]".into(),
            Some(("threshold", _)) => format!("threshold = {threshold}"),
            Some((k @ ("constraints" | "contrast_constraints" | "features"), v)) => {
                format!("{k} = {:?}", dir.join(v.trim_matches('"')).display().to_string())
            }
            _ => line.to_string(),
        };
        text.push_str(&line);
        text.push('\n');
    }
    let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("{name}.toml"));
    std::fs::write(&path, text).unwrap();
    path
}

fn kipg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kipg")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_prints_a_summary_and_csv_rows() {
    let cfg = small_config("run", r#"["NoKI", "Bayes"]"#, 0.75);
    let cfg = cfg.to_str().unwrap();
    let text = kipg(&["run", cfg]);
    assert_eq!(text.status.code(), Some(0), "{}", String::from_utf8_lossy(&text.stderr));
    let text = stdout(&text);
    assert_eq!(text.matches("micro-city").count(), 1);
    assert!(text.contains("NoKI") && text.contains("Bayes"));

    let csv = kipg(&["run", cfg, "--csv", "--rows"]);
    assert_eq!(csv.status.code(), Some(0));
    let csv = stdout(&csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,arm,budget,seed,pass_rate,time_to_threshold,wall_clock_s"));
    // two methods, two budgets, two seeds
    assert_eq!(lines.count(), 8);
}

#[test]
fn strict_run_exits_three_when_the_threshold_is_missed() {
    let cfg = small_config("strict", r#"["NoKI"]"#, 1.0);
    let cfg = cfg.to_str().unwrap();
    assert_eq!(kipg(&["run", cfg]).status.code(), Some(0));
    assert_eq!(kipg(&["run", cfg, "--strict"]).status.code(), Some(3));
}

#[test]
fn config_errors_exit_two() {
    let missing = kipg(&["run", "/nonexistent/kipg.toml"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read"));

    let bad = Path::new(env!("CARGO_TARGET_TMPDIR")).join("bad.toml");
    std::fs::write(&bad, "name = \n").unwrap();
    assert_eq!(kipg(&["run", bad.to_str().unwrap()]).status.code(), Some(2));

    // the plain micro city has no events to study
    let no_events = scenarios().join("micro_city.toml");
    assert_eq!(kipg(&["events", no_events.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn saved_models_can_be_explained() {
    let cfg = small_config("explain", r#"["CFG"]"#, 0.75);
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("models");
    let out = kipg(&["run", cfg.to_str().unwrap(), "--save-models", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let model = dir.join("cfg-seed1.model");
    assert!(model.exists());

    let out = kipg(&["explain", model.to_str().unwrap(), "--action", "lockshop", "--top", "2", "--csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3, "{text}");

    let out = kipg(&["explain", model.to_str().unwrap(), "--action", "closeschool"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn features_lists_the_clause_file() {
    let cfg = scenarios().join("micro_city.toml");
    let out = kipg(&["features", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("sopen(State,Shop)"));
    assert!(text.contains("hospitalized(State,Person)"));
}
