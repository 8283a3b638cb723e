use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const REFERENCE: &str = r#"model = "deterministic"
generations = 29

[params]
sample_size = 9
p_plus_e = 0.2
p_minus_e = 0.7

[deterministic]
alpha0 = 0.9
"#;

fn tpdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpdyn")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn reference_config_writes_thirty_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "reference.toml", REFERENCE);
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let json = dir.path().join("out.json");
    let out = tpdyn(&["simulate", s(&cfg), "--csv", s(&csv), "--svg", s(&svg), "--json", s(&json)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "generation,alpha,variant_frequency");
    let alphas = column(&text, 1);
    assert_eq!(alphas.len(), 30);
    assert_eq!(alphas[0], 0.9);
    assert!((alphas[29] - alphas[28]).abs() < 1e-6 && (alphas[28] - alphas[27]).abs() < 1e-6);
    assert!((alphas[29] - 0.974_678_480_136_933_9).abs() < 1e-9);
    let freqs = column(&text, 2);
    assert!(freqs.iter().all(|v| (0.0..=1.0).contains(v)));
    let first = text.lines().nth(1).unwrap();
    assert_eq!(first, "0,0.90000000000000002,0.75000000000000011");

    let summary = stdout(&out);
    assert!(summary.contains("fixed points:") && summary.contains("stable"), "{summary}");
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["fixed_points"][0]["stability"], "stable");
    assert_eq!(v["params"]["cutoff"], 4);
}

#[test]
fn zero_generations_gives_initial_row_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "z.toml", &REFERENCE.replace("generations = 29", "generations = 0"));
    let out = tpdyn(&["simulate", s(&cfg)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "generation,alpha,variant_frequency\n0,0.90000000000000002,0.75000000000000011\n");
}

const STOCH: &str = r#"model = "stochastic"
generations = 40

[params]
sample_size = 9
p_plus_e = 0.0
p_minus_e = 0.7

[stochastic]
pop_size = 50
count0 = 50
seed = 99
"#;

#[test]
fn absorbing_all_productive_population_stays_put() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.toml", STOCH);
    let out = tpdyn(&["simulate", s(&cfg)]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "generation,count,fraction");
    let counts = column(&text, 1);
    assert_eq!(counts.len(), 41);
    assert!(counts.iter().all(|&c| c == 50.0));

    let markov = tpdyn(&["markov", s(&cfg), "--csv", s(&dir.path().join("pi.csv"))]);
    assert!(markov.status.success());
    assert!(stdout(&markov).contains("absorbing states: 50"), "{}", stdout(&markov));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write(&dir, "s.toml", &STOCH.replace("p_plus_e = 0.0", "p_plus_e = 0.2").replace("count0 = 50", "count0 = 25"));
    let a = tpdyn(&["simulate", s(&cfg)]);
    let b = tpdyn(&["simulate", s(&cfg)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = write(&dir, "t.toml", &std::fs::read_to_string(&cfg).unwrap().replace("seed = 99", "seed = 100"));
    assert_ne!(a.stdout, tpdyn(&["simulate", s(&other)]).stdout);
}

fn sweep_config(axes: &str) -> String {
    format!("{}\n[sweep]\nworkers = 3\n{axes}", REFERENCE.replace("generations = 29", "generations = 300"))
}

#[test]
fn alpha0_sweep_has_constant_fixed_point() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write(&dir, "sw.toml", &sweep_config("[[sweep.axes]]\nname = \"alpha0\"\nmin = 0.0\nmax = 1.0\nsteps = 11\n"));
    let out = tpdyn(&["sweep", s(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "alpha0,endpoint,fixed_point,stability,fixed_point_count");
    let fps = column(&text, 2);
    assert_eq!(fps.len(), 11);
    assert!(fps.iter().all(|&f| f == fps[0]));
    assert_eq!(column(&text, 0), (0..=10).map(|i| i as f64 / 10.0).collect::<Vec<_>>());
}

#[test]
fn two_axis_sweep_recovers_single_run() {
    let dir = TempDir::new().unwrap();
    let axes = "[[sweep.axes]]\nname = \"p_plus_e\"\nmin = 0.0\nmax = 0.4\nsteps = 5\n\
                [[sweep.axes]]\nname = \"p_minus_e\"\nmin = 0.5\nmax = 0.9\nsteps = 5\n";
    let cfg = write(&dir, "sw.toml", &sweep_config(axes));
    let out = tpdyn(&["sweep", s(&cfg)]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    let cell = rows
        .iter()
        .find(|r| {
            (r[0].parse::<f64>().unwrap() - 0.2).abs() < 1e-12 && (r[1].parse::<f64>().unwrap() - 0.7).abs() < 1e-12
        })
        .unwrap();
    assert_eq!(rows[12], *cell, "row-major position of (0.2, 0.7)");

    let single = tpdyn(&["fixed-points", s(&write(&dir, "f.toml", REFERENCE))]);
    let fp: f64 = column(&stdout(&single), 0)[0];
    let swept: f64 = cell[3].parse().unwrap();
    assert!((fp - swept).abs() <= 1e-9);

    let serial = tpdyn(&["sweep", s(&cfg), "--workers", "1"]);
    assert_eq!(serial.stdout, out.stdout);
}

#[test]
fn degenerate_axis_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write(&dir, "sw.toml", &sweep_config("[[sweep.axes]]\nname = \"p_plus_e\"\nmin = 0.2\nmax = 0.2\nsteps = 4\n"));
    let out = tpdyn(&["sweep", s(&cfg)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn malformed_sweeps_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let axis =
        |n: &str, steps: usize| format!("[[sweep.axes]]\nname = \"{n}\"\nmin = 0.1\nmax = 0.3\nsteps = {steps}\n");
    for (name, axes) in [
        ("three", format!("{}{}{}", axis("p_plus_e", 2), axis("p_minus_e", 2), axis("alpha0", 2))),
        ("steps", axis("p_plus_e", 1)),
        ("pop", axis("pop_size", 3)),
        ("none", String::new()),
    ] {
        let cfg = write(&dir, &format!("{name}.toml"), &sweep_config(&axes));
        let out = tpdyn(&["sweep", s(&cfg)]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

fn validate_config(p_plus: f64, p_minus: f64, alpha: f64, trials: u64) -> String {
    format!(
        "model = \"deterministic\"\ngenerations = 1\n[params]\nsample_size = 9\np_plus_e = {p_plus}\np_minus_e = {p_minus}\n\
         [deterministic]\nalpha0 = {alpha}\n[validate]\ntrials = {trials}\nseed = 5\nalphas = [{alpha}]\n"
    )
}

#[test]
fn validate_cases() {
    let dir = TempDir::new().unwrap();
    let exact = tpdyn(&["validate", s(&write(&dir, "a.toml", &validate_config(0.0, 0.7, 1.0, 1000)))]);
    assert!(exact.status.success());
    assert!(stdout(&exact).contains("analytic 1.0000000000000000 estimate 1.0000000000000000"), "{}", stdout(&exact));

    let reference_run = tpdyn(&["validate", s(&write(&dir, "b.toml", &validate_config(0.2, 0.7, 0.9, 100_000)))]);
    assert!(reference_run.status.success(), "{}", stdout(&reference_run));
    assert!(stdout(&reference_run).contains("1 of 1 checks passed"));

    let constant = tpdyn(&["validate", s(&write(&dir, "c.toml", &validate_config(0.4, 0.4, 0.3, 20_000)))]);
    assert!(constant.status.success(), "{}", stdout(&constant));

    let json = dir.path().join("v.json");
    let multi = "model = \"multigen\"\ngenerations = 5\n[params]\nsample_size = 9\np_plus_e = 0.2\np_minus_e = 0.7\n\
                 [multigen]\nhistory = [0.1, 0.5, 0.9]\nweights = [0.2, 0.3, 0.5]\n[validate]\ntrials = 20000\nseed = 3\n";
    let out = tpdyn(&["validate", s(&write(&dir, "m.toml", multi)), "--json", s(&json)]);
    assert!(out.status.success(), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(stdout(&out).contains("history mixture"));
}

#[test]
fn validate_requires_seed() {
    let dir = TempDir::new().unwrap();
    let text = validate_config(0.2, 0.7, 0.9, 100).replace("seed = 5\n", "");
    let out = tpdyn(&["validate", s(&write(&dir, "v.toml", &text))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    let out = tpdyn(&["validate", s(&write(&dir, "f.toml", REFERENCE))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let unknown = write(&dir, "u.toml", &REFERENCE.replace("alpha0 = 0.9", "alpha0 = 0.9\ncolour = 1"));
    let out = tpdyn(&["simulate", s(&unknown)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("line 11"), "{err}");

    let bad_prob = write(&dir, "p.toml", &REFERENCE.replace("p_minus_e = 0.7", "p_minus_e = 1.7"));
    let out = tpdyn(&["simulate", s(&bad_prob)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.p_minus_e"));

    let big = write(
        &dir,
        "big.toml",
        &STOCH.replace("pop_size = 50", "pop_size = 6000").replace("count0 = 50", "count0 = 10"),
    );
    assert_eq!(tpdyn(&["markov", s(&big)]).status.code(), Some(3));
    assert!(tpdyn(&["simulate", s(&big)]).status.success());
    let capped = write(&dir, "cap.toml", &format!("{STOCH}matrix_cap = 10\n"));
    assert_eq!(tpdyn(&["markov", s(&capped)]).status.code(), Some(3));

    assert_eq!(tpdyn(&["markov", s(&write(&dir, "d.toml", REFERENCE))]).status.code(), Some(2));
    assert_eq!(tpdyn(&["simulate", s(&dir.path().join("missing.toml"))]).status.code(), Some(2));
    assert_eq!(tpdyn(&["decide", "--n", "9", "--e", "10"]).status.code(), Some(2));
    assert_eq!(tpdyn(&["bogus"]).status.code(), Some(2));
    let unwritable = dir.path().join("no-such-dir").join("x.csv");
    assert_eq!(
        tpdyn(&["simulate", s(&write(&dir, "f.toml", REFERENCE)), "--csv", s(&unwritable)]).status.code(),
        Some(3)
    );
}

#[test]
fn scalar_commands() {
    let out = tpdyn(&["decide", "--n", "9", "--e", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("threshold criterion (e <= N / ln N): productive"));
    assert!(text.contains("cost criterion: productive"));
    let text = stdout(&tpdyn(&["decide", "--n", "9", "--e", "9"]));
    assert!(text.contains("cost criterion: unproductive"));

    let text = stdout(&tpdyn(&["cost", "--n", "50", "--e", "10"]));
    assert!(text.contains("exceptions-first cost: 8.68283430429481"), "{text}");
    assert!(text.contains("ranked listing cost: 11.1130735852489"), "{text}");

    let text = stdout(&tpdyn(&["threshold", "--from", "2", "--to", "100"]));
    assert_eq!(text.lines().count(), 100);
    assert!(text.lines().nth(1).unwrap().starts_with("2,2.8853900817779268,2,1,"), "{text}");
}

#[test]
fn multigen_report() {
    let dir = TempDir::new().unwrap();
    let text = REFERENCE.replace("model = \"deterministic\"", "model = \"multigen\"").replace(
        "[deterministic]\nalpha0 = 0.9\n",
        "[multigen]\nhistory = [0.9, 0.9, 0.9]\nweights = [0.3333333333333333, 0.3333333333333333, 0.3333333333333334]\n",
    );
    let cfg = write(&dir, "m.toml", &text);
    let json = dir.path().join("m.json");
    let out = tpdyn(&["multigen", s(&cfg), "--csv", s(&dir.path().join("m.csv")), "--json", s(&json)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let fp = v["comparison"]["fixed_point"].as_f64().unwrap();
    let last = v["comparison"]["multigen"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    assert!((fp - 0.974_678_480_136_933_9).abs() < 1e-9);
    assert!((last - fp).abs() < 1e-6);
    assert!(v["comparison"]["lag"].as_i64().unwrap() > 0);

    let nine = text.replace("[0.9, 0.9, 0.9]", "[0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9]").replace(
        "[0.3333333333333333, 0.3333333333333333, 0.3333333333333334]",
        "[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]",
    );
    assert_eq!(tpdyn(&["simulate", s(&write(&dir, "n.toml", &nine))]).status.code(), Some(2));
}
