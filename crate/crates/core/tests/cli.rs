use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aoristic"));
    cmd.env_remove("AORISTIC_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn example_args(sub: &str) -> Vec<String> {
    vec![
        sub.into(),
        "--finds".into(),
        data("finds.csv").display().to_string(),
        "--contexts".into(),
        data("contexts.csv").display().to_string(),
        "--config".into(),
        data("config.json").display().to_string(),
    ]
}

fn run_owned(args: &[String]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Field `n` of every CSV data row on stdout.
fn column(o: &Output, n: usize) -> Vec<String> {
    stdout(o).lines().skip(1).map(|l| l.split(',').nth(n).unwrap().to_owned()).collect()
}

#[test]
fn normalize_to_stdout() {
    let o = run_owned(&example_args("normalize"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("context_id,interval_index,interval_label,evidence_rate,"));
    assert!(out.contains("SiteB,0,1..25,2,4,6,3,26,10,2.6000000000000001,"));
    assert_eq!(out.lines().count(), 9);
}

#[test]
fn flags_override_config() {
    let mut args = example_args("normalize");
    args.extend(["--prior".into(), "zero".into(), "--format".into(), "json".into()]);
    let o = run_owned(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r["prior"] == 0.0));
    // SiteB interval 0 under a zero prior: Gamma(8, 10).
    assert_eq!(rows[4]["posterior_mean"], 0.8);
}

#[test]
fn fixed_prior_per_interval() {
    let mut args = example_args("normalize");
    args.extend(["--fixed-prior".into(), "1,2,3,4".into()]);
    let o = run_owned(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let priors = column(&o, 6);
    assert_eq!(priors, ["1", "2", "3", "4", "1", "2", "3", "4"]);

    let mut args = example_args("normalize");
    args.extend(["--fixed-prior".into(), "1,2".into()]);
    assert_eq!(run_owned(&args).status.code(), Some(2));
}

#[test]
fn grid_from_flags_only() {
    let finds = data("finds.csv");
    let o = run(&[
        "aoristic",
        "--finds",
        finds.to_str().unwrap(),
        "--grid-start",
        "1",
        "--grid-end",
        "101",
        "--interval-width",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("context_id,interval_index,interval_label,evidence_rate,clipped_mass\r\n"));
    assert!(out.contains("SiteA,0,1..50,5.5999999999999996,"));
}

#[test]
fn negative_years_parse() {
    let dir = tempfile::tempdir().unwrap();
    let finds = dir.path().join("finds.csv");
    fs::write(&finds, "find_id,context_id,count,use_start,use_end\nF1,A,2,-99,0\n").unwrap();
    let o = run(&[
        "aoristic",
        "--finds",
        finds.to_str().unwrap(),
        "--grid-start",
        "-99",
        "--grid-end",
        "1",
        "--interval-width",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("A,0,-99..-50,1,0"));
}

#[test]
fn compare_writes_ranking_and_results() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    let ranking = dir.path().join("ranking.csv");
    let mut args = example_args("compare");
    args.extend([
        "--results-output".into(),
        results.display().to_string(),
        "--output".into(),
        ranking.display().to_string(),
    ]);
    let o = run_owned(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&results).unwrap().lines().count(), 9);
    let ranking = fs::read_to_string(&ranking).unwrap();
    let mut lines = ranking.lines();
    assert_eq!(
        lines.next(),
        Some("interval_index,interval_label,rank,context_id,posterior_mean,ci_low,ci_high")
    );
    assert!(lines.next().unwrap().starts_with("0,1..25,1,SiteA,4,"));
}

#[test]
fn plots_written_per_context() {
    let dir = tempfile::tempdir().unwrap();
    let plots = dir.path().join("svg");
    let mut args = example_args("normalize");
    args.extend(["--plots".into(), "--plot-dir".into(), plots.display().to_string()]);
    let o = run_owned(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut names: Vec<_> = fs::read_dir(&plots)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["SiteA.svg", "SiteB.svg"]);
}

#[test]
fn missing_input_is_io_failure() {
    let (contexts, config) = (data("contexts.csv"), data("config.json"));
    let o = run(&[
        "normalize",
        "--finds",
        "/nonexistent/finds.csv",
        "--contexts",
        contexts.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/finds.csv"));
}

#[test]
fn unwritable_output_is_io_failure() {
    let mut args = example_args("normalize");
    args.extend(["--output".into(), "/nonexistent/dir/out.csv".into()]);
    assert_eq!(run_owned(&args).status.code(), Some(3));
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_header = dir.path().join("bad.csv");
    fs::write(&bad_header, "id,context,count,start,end\nF1,SiteA,1,1,10\n").unwrap();
    let mut args = example_args("normalize");
    args[2] = bad_header.display().to_string();
    let o = run_owned(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));

    let dangling = dir.path().join("dangling.csv");
    fs::write(
        &dangling,
        "find_id,context_id,count,use_start,use_end\nF1,SiteZ,1,1,10\nF2,SiteA,1,1,10\n",
    )
    .unwrap();
    let mut args = example_args("normalize");
    args[2] = dangling.display().to_string();
    let o = run_owned(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SiteZ"));

    let mut args = example_args("normalize");
    args.extend(["--prior".into(), "fixed".into()]);
    assert_eq!(run_owned(&args).status.code(), Some(2));

    let mut args = example_args("normalize");
    args.extend(["--level".into(), "1.5".into()]);
    assert_eq!(run_owned(&args).status.code(), Some(2));

    let mut args = example_args("normalize");
    args.extend(["--baseline".into(), "3".into()]);
    assert_eq!(run_owned(&args).status.code(), Some(2));
}

#[test]
fn baseline_override_raises_deficits() {
    let mut args = example_args("normalize");
    args.extend(["--baseline".into(), "12".into()]);
    let o = run_owned(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let deficits = column(&o, 5);
    assert_eq!(deficits, ["2", "2", "2", "2", "8", "8", "8", "8"]);
}

fn simulate(extra: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(["simulate", "--rates", "2,5", "--exposures", "10,4", "--replicates", "200"]);
    cmd.args(extra);
    if let Some(s) = seed_env {
        cmd.env("AORISTIC_SEED", s);
    }
    cmd.output().unwrap()
}

#[test]
fn simulate_is_seeded() {
    let a = simulate(&["--seed", "7"], None);
    let b = simulate(&["--seed", "7"], None);
    let c = simulate(&["--seed", "8"], None);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("context_id,interval_index,true_rate,exposure,deficit,replicates,coverage,"));
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn seed_env_overrides_flag() {
    let from_env = simulate(&["--seed", "1"], Some("7"));
    let from_flag = simulate(&["--seed", "7"], None);
    assert_eq!(from_env.stdout, from_flag.stdout);
    assert_eq!(simulate(&[], Some("not-a-seed")).status.code(), Some(2));
}

#[test]
fn simulate_rows_carry_truth() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    let o = simulate(
        &[
            "--rows",
            rows.to_str().unwrap(),
            "--emit-replicates",
            "3",
            "--grid-start",
            "1",
            "--grid-end",
            "51",
            "--interval-width",
            "25",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&rows).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("replicate,context_id,"));
    assert!(lines.next().unwrap().starts_with("0,C1,0,1..25,"));
    assert_eq!(text.lines().count(), 1 + 3 * 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",2") || l.ends_with(",5")));

    let o = simulate(&["--grid-start", "1", "--grid-end", "101", "--interval-width", "25"], None);
    assert_eq!(o.status.code(), Some(2));
}
