//! End-to-end behavior of the `heavytail` binary: exit codes, output
//! formats, determinism, and the documented pipeline flows.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use heavytail::distributions::sample_student_t;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_heavytail"));
    // Keep tests hermetic regardless of the ambient environment.
    c.env_remove("HEAVYTAIL_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("heavytail-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn write_returns_file(path: &Path, values: &[f64]) {
    let mut body = String::from("# instrument: synthetic\n# interval_seconds: 300\n");
    for v in values {
        body.push_str(&format!("{v}\n"));
    }
    fs::write(path, body).unwrap();
}

fn report_value(report: &str, key: &str) -> String {
    for line in report.lines() {
        let line = line.trim().trim_end_matches(',');
        if let Some(rest) = line.strip_prefix(&format!("\"{key}\": ")) {
            return rest.trim_matches('"').to_string();
        }
    }
    panic!("key {key} not found in report:\n{report}");
}

fn report_f64(report: &str, key: &str) -> f64 {
    report_value(report, key).parse().unwrap()
}

#[test]
fn returns_unit_normalization_round_trips_through_the_file() {
    let dir = tmp_dir("returns-unit");
    let out = dir.join("fdax.returns");
    let status = run(&[
        "returns",
        "-i",
        fixture("fdax_like.csv").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--interval",
        "300",
        "--normalize",
        "unit",
    ]);
    assert!(status.status.success(), "{status:?}");
    // Re-read and recompute: the written values must have sd = 1.
    let text = fs::read_to_string(&out).unwrap();
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 20_000);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((sd - 1.0).abs() < 1e-6, "sd = {sd}");
    assert!(text.contains("# interval_seconds: 300"));
    assert!(text.contains("# raw_volatility:"));
}

#[test]
fn missing_input_is_exit_2_and_names_the_path() {
    let out = run(&["returns", "-i", "/nonexistent/prices.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/prices.csv"), "{stderr}");
}

#[test]
fn zero_interval_is_a_usage_error_before_reading_files() {
    let out = run(&["returns", "-i", "/nonexistent/prices.csv", "--interval", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    // clap rejects the value; the missing file is never touched.
    assert!(stderr.contains("--interval"), "{stderr}");
    assert!(!stderr.contains("/nonexistent"), "{stderr}");
}

#[test]
fn simulate_same_seed_gives_identical_files() {
    let dir = tmp_dir("sim-determinism");
    let a = dir.join("a.dat");
    let b = dir.join("b.dat");
    for out in [&a, &b] {
        let status = run(&[
            "simulate",
            "--model",
            "canonical-t",
            "--nu",
            "3",
            "--d",
            "1",
            "--dt",
            "1e-3",
            "--steps",
            "2e4",
            "--seed",
            "42",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn env_seed_is_the_default_and_flag_overrides_it() {
    let dir = tmp_dir("sim-envseed");
    let base = ["simulate", "--model", "case-gaussian", "--steps", "1e3", "--burn-in", "0"];
    let with_env = |seed: &str, out: &Path| {
        let mut c = bin();
        c.args(base)
            .args(["-o", out.to_str().unwrap()])
            .env("HEAVYTAIL_SEED", seed);
        c.output().unwrap()
    };
    let e1 = dir.join("env1.dat");
    let e2 = dir.join("env2.dat");
    let e3 = dir.join("env3.dat");
    assert!(with_env("7", &e1).status.success());
    assert!(with_env("8", &e2).status.success());
    assert_ne!(fs::read(&e1).unwrap(), fs::read(&e2).unwrap());
    // --seed wins over the environment.
    let mut c = bin();
    c.args(base)
        .args(["--seed", "7", "-o", e3.to_str().unwrap()])
        .env("HEAVYTAIL_SEED", "8");
    assert!(c.output().unwrap().status.success());
    let strip_header = |p: &Path| -> Vec<String> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(strip_header(&e1), strip_header(&e3));
}

#[test]
fn compare_recovers_nu_and_q_on_synthetic_t3_input() {
    let dir = tmp_dir("compare-t3");
    let input = dir.join("t3.returns");
    write_returns_file(&input, &sample_student_t(3, 1.0, 100_000, 909));
    let out = run(&["compare", "-i", input.to_str().unwrap()]);
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout).to_string();
    assert_eq!(report_value(&report, "preferred"), "student_t");
    let nu = report_f64(&report, "nu_hat");
    let q = report_f64(&report, "q_hat");
    assert!((2.85..=3.15).contains(&nu), "nu_hat = {nu}");
    assert!((1.48..=1.52).contains(&q), "q_hat = {q}");
}

#[test]
fn compare_reports_gaussian_input_honestly() {
    let dir = tmp_dir("compare-gauss");
    let input = dir.join("g.returns");
    write_returns_file(
        &input,
        &heavytail::distributions::sample_gaussian(1.0, 100_000, 910),
    );
    let out = run(&["compare", "-i", input.to_str().unwrap()]);
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout).to_string();
    // No preference-flip assertion: both KS values are simply reported,
    // and the t fit must have run into the Gaussian limit.
    let nu = report_f64(&report, "nu_hat");
    assert!(nu >= 50.0, "nu_hat = {nu}");
    assert!(report_f64(&report, "ks_gaussian") < 0.01);
    assert!(report_f64(&report, "ks_student_t") < 0.01);
}

#[test]
fn empty_returns_file_is_a_clean_error() {
    let dir = tmp_dir("empty-returns");
    let input = dir.join("empty.returns");
    fs::write(&input, "# instrument: nothing\n").unwrap();
    let out = run(&["compare", "-i", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no return values"), "{stderr}");
}

#[test]
fn naive_t_simulation_aborts_with_stiffness_diagnostic() {
    // The naive pair's cubic drift pushes away from the origin; the runaway
    // trips the |f| dt guard and the CLI surfaces the step index.
    let out = run(&[
        "simulate", "--model", "naive-t", "--nu", "3", "--dt", "1e-3", "--steps", "1e6",
        "--burn-in", "0", "--seed", "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("stiffness"), "{stderr}");
    assert!(stderr.contains("step"), "{stderr}");
}

#[test]
fn stationary_output_reintegrates_to_one() {
    let dir = tmp_dir("stationary");
    let out_path = dir.join("stat.dat");
    let status = run(&[
        "stationary",
        "--model",
        "case-gaussian",
        "--d",
        "1",
        "--grid-lo",
        "-8",
        "--grid-hi",
        "8",
        "--grid-n",
        "2001",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let text = fs::read_to_string(&out_path).unwrap();
    let pts: Vec<(f64, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(pts.len(), 2001);
    let h = pts[1].0 - pts[0].0;
    let integral: f64 = h
        * (0.5 * pts[0].1
            + pts[1..pts.len() - 1].iter().map(|p| p.1).sum::<f64>()
            + 0.5 * pts[pts.len() - 1].1);
    assert!((integral - 1.0).abs() < 1e-6, "integral = {integral}");
    // And the peak is the Gaussian peak 1/sqrt(pi).
    let peak = pts.iter().map(|p| p.1).fold(0.0f64, f64::max);
    assert!((peak - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-8);
}

#[test]
fn density_log_points_reintegrate_to_one() {
    let dir = tmp_dir("density");
    let input = dir.join("t3.returns");
    write_returns_file(&input, &sample_student_t(3, 1.0, 50_000, 11));
    let out_path = dir.join("density.dat");
    let status = run(&[
        "density",
        "-i",
        input.to_str().unwrap(),
        "--bins",
        "101",
        "--range",
        "-20,20",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = fs::read_to_string(&out_path).unwrap();
    // Zero-count bins are dropped from the log points but carry no mass, so
    // summing 10^y * bin_width over the emitted points recovers the full
    // in-range integral.
    let width = 40.0 / 101.0;
    let mass: f64 = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let y: f64 = l.split_whitespace().nth(1).unwrap().parse().unwrap();
            10f64.powf(y) * width
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
}

#[test]
fn compare_plot_has_three_blocks_on_a_shared_grid() {
    let dir = tmp_dir("plot");
    let input = dir.join("t3.returns");
    write_returns_file(&input, &sample_student_t(3, 1.0, 50_000, 12));
    let plot = dir.join("plot.dat");
    let report = dir.join("report.json");
    let status = run(&[
        "compare",
        "-i",
        input.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
        "-o",
        report.to_str().unwrap(),
        "--bins",
        "51",
        "--range",
        "-10,10",
    ]);
    assert!(status.status.success());
    let text = fs::read_to_string(&plot).unwrap();
    let blocks: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("# block:"))
        .collect();
    assert_eq!(blocks.len(), 3, "{blocks:?}");
    assert!(blocks[0].contains("empirical"));
    assert!(blocks[1].contains("student-t"));
    assert!(blocks[2].contains("gaussian"));
    // The two fitted curves sample the same 51 bin centers.
    let sections: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(sections.len(), 3);
    for section in &sections[1..] {
        let rows = section
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .count();
        assert_eq!(rows, 51);
    }
    let report_text = fs::read_to_string(&report).unwrap();
    assert!(report_text.trim_start().starts_with('{'));
}

#[test]
fn reconcile_cli_reports_the_verdict() {
    let out = run(&["reconcile", "--nu", "3", "--d", "1"]);
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout).to_string();
    assert_eq!(report_value(&report, "agrees"), "false");
    assert!(report_f64(&report, "exponent_measured").abs() < 0.01);
    assert_eq!(report_f64(&report, "exponent_claimed"), 2.0);

    let out = run(&["reconcile", "--nu", "3", "--d", "100"]);
    let report = String::from_utf8_lossy(&out.stdout).to_string();
    assert_eq!(report_value(&report, "agrees"), "true");
}

#[test]
fn iso8601_input_is_accepted_with_the_flag() {
    let dir = tmp_dir("iso");
    let csv = dir.join("iso.csv");
    let mut body = String::from("time,price\n");
    for i in 0..150 {
        let minutes = i * 5;
        body.push_str(&format!(
            "2024-01-02T{:02}:{:02}:00Z,{}\n",
            9 + minutes / 60,
            minutes % 60,
            100.0 + (i as f64 * 0.37).sin()
        ));
    }
    fs::write(&csv, body).unwrap();
    let out = run(&[
        "returns",
        "-i",
        csv.to_str().unwrap(),
        "--time-format",
        "iso8601",
        "--normalize",
        "raw",
    ]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("# interval_seconds: 300"), "{stdout}");
}

#[test]
fn multiple_paths_concatenate_in_seed_order() {
    let dir = tmp_dir("paths");
    let merged = dir.join("merged.dat");
    let p1 = dir.join("p1.dat");
    let p2 = dir.join("p2.dat");
    let base = [
        "simulate", "--model", "case-gaussian", "--steps", "500", "--burn-in", "100",
    ];
    assert!(bin()
        .args(base)
        .args(["--seed", "11", "--paths", "2", "-o", merged.to_str().unwrap()])
        .output()
        .unwrap()
        .status
        .success());
    for (seed, out) in [("11", &p1), ("12", &p2)] {
        assert!(bin()
            .args(base)
            .args(["--seed", seed, "-o", out.to_str().unwrap()])
            .output()
            .unwrap()
            .status
            .success());
    }
    let data = |p: &Path| -> Vec<String> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };
    let mut expected = data(&p1);
    expected.extend(data(&p2));
    assert_eq!(data(&merged), expected);
}

#[test]
fn negative_dt_is_a_usage_error() {
    let out = run(&[
        "simulate", "--model", "case-gaussian", "--steps", "10", "--dt", "-0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_gaussian_family_reports_d_hat() {
    let dir = tmp_dir("fit-gauss");
    let input = dir.join("g.returns");
    write_returns_file(
        &input,
        &heavytail::distributions::sample_gaussian(1.0, 20_000, 3),
    );
    let out = run(&["fit", "-i", input.to_str().unwrap(), "--family", "gaussian"]);
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout).to_string();
    assert_eq!(report_value(&report, "family"), "gaussian");
    let d = report_f64(&report, "d_hat");
    assert!((d - 2.0).abs() < 0.1, "d_hat = {d}");
}
