use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const GOLDEN_N: [f64; 3] = [2.0 / 15.0, 41.0 / 105.0, 10.0 / 21.0];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accessalloc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn golden_file(dir: &Path) -> PathBuf {
    write(dir, "golden.csv", "id,population,beta\nA,1000,0.2\nB,1000,0.5\nC,1000,0.8\n")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(path: &Path) -> HashMap<String, String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(map: &HashMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap_or_else(|_| panic!("{key} = {}", map[key]))
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let idx = reader.headers().unwrap().iter().position(|h| h == name).unwrap();
    reader
        .records()
        .map(|r| r.unwrap()[idx].to_string())
        .collect()
}

fn floats(path: &Path, name: &str) -> Vec<f64> {
    column(path, name).iter().map(|v| v.parse().unwrap()).collect()
}

fn allocate_golden(dir: &Path, out: &Path, epsilon: &str) {
    let loc = golden_file(dir);
    ok(&[
        "allocate", "--locations", s(&loc), "--alpha", "0.7", "--epsilon", epsilon,
        "--distance", "l1", "--eta", "0.5", "--out", s(out),
    ]);
}

#[test]
fn allocate_reproduces_the_golden_allocation() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    allocate_golden(tmp.path(), &out, "0.4");
    let n = floats(&out.join("allocation.csv"), "n");
    for (got, want) in n.iter().zip(GOLDEN_N) {
        assert!((got - want).abs() < 1e-9, "{n:?}");
    }
    let rep = report(&out.join("report.txt"));
    assert!((num(&rep, "d1") - 0.4).abs() < 1e-9);
    assert!(num(&rep, "rd_access_aware") < num(&rep, "rd_proportional"));
    assert_eq!(rep["converged"], "true");
}

#[test]
fn zero_budget_returns_proportional() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    allocate_golden(tmp.path(), &out, "0");
    let alloc = out.join("allocation.csv");
    for (n, p) in floats(&alloc, "n").iter().zip(floats(&alloc, "p")) {
        assert!((n - p).abs() < 1e-9);
    }
    let rep = report(&out.join("report.txt"));
    assert_eq!(rep["rd_access_aware"], rep["rd_proportional"]);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let synth = tmp.path().join("synth");
    ok(&["synth", "--k", "6", "--seed", "11", "--profile", "clustered", "--out", s(&synth)]);
    let loc = synth.join("locations.csv");
    let runs: Vec<PathBuf> = (0..2).map(|i| tmp.path().join(format!("run{i}"))).collect();
    for dir in &runs {
        ok(&[
            "allocate", "--locations", s(&loc), "--alpha", "0.5", "--eta", "0.3",
            "--restarts", "8", "--seed", "42", "--out", s(dir),
        ]);
        ok(&[
            "simulate", "--resources", "30", "--population", "90", "--beta", "0.4",
            "--eta", "0.6", "--trials", "500", "--seed", "9", "--out", s(dir),
        ]);
    }
    for file in ["allocation.csv", "report.txt", "trajectory.csv", "simulate.txt"] {
        assert_eq!(
            fs::read(runs[0].join(file)).unwrap(),
            fs::read(runs[1].join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn emitted_csvs_round_trip() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    allocate_golden(tmp.path(), &out, "0.4");
    let loc = golden_file(tmp.path());
    ok(&[
        "sweep", "--locations", s(&loc), "--alpha", "0.7", "--epsilon", "0.4",
        "--eta", "0.1,0.5,0.9", "--out", s(&out),
    ]);
    for file in ["allocation.csv", "sweep.csv", "plot_rd.csv", "plot_shape.csv"] {
        let original = fs::read(out.join(file)).unwrap();
        let mut reader = csv::Reader::from_reader(original.as_slice());
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(reader.headers().unwrap()).unwrap();
        for record in reader.records() {
            let record = record.unwrap();
            // parse numbers and re-format them the same way
            let fields: Vec<String> = record
                .iter()
                .map(|f| match f.parse::<f64>() {
                    Ok(v) => accessalloc_cli::format::fmt_num(v),
                    Err(_) => f.to_string(),
                })
                .collect();
            writer.write_record(&fields).unwrap();
        }
        assert_eq!(writer.into_inner().unwrap(), original, "{file}");
    }
}

#[test]
fn malformed_csv_exits_with_data_error() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.csv", "id,population,beta\nA,1000,0.2\nB,ten,0.5\n");
    let out = run(&["allocate", "--locations", s(&bad), "--alpha", "0.5", "--eta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3") && msg.contains("population"), "{msg}");

    let dup = write(tmp.path(), "dup.csv", "id,population,beta\nA,10,0.2\nA,10,0.5\n");
    let out = run(&["allocate", "--locations", s(&dup), "--alpha", "0.5", "--eta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_with_config_error() {
    let tmp = TempDir::new().unwrap();
    let loc = golden_file(tmp.path());
    let o = tmp.path().join("o");
    for args in [
        vec!["--alpha", "1.5", "--eta", "0.5"],
        vec!["--alpha", "0.5", "--eta", "0"],
        vec!["--alpha", "0.5", "--eta", "dist:0.2:0.3,0.8:0.3"],
        vec!["--alpha", "0.5", "--eta", "0.5", "--epsilon", "-1"],
        vec!["--alpha", "0.5", "--eta", "0.5", "--distance", "l2"],
        vec!["--alpha", "0.5", "--eta", "0.2,0.4", "--model", "naive"],
    ] {
        let mut full = vec!["allocate", "--locations", s(&loc), "--out", s(&o)];
        full.extend(args.iter().copied());
        assert_eq!(run(&full).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn verify_refuses_large_instances() {
    let tmp = TempDir::new().unwrap();
    let synth = tmp.path().join("synth");
    ok(&["synth", "--k", "13", "--seed", "1", "--out", s(&synth)]);
    let out = run(&[
        "verify", "--locations", s(&synth.join("locations.csv")), "--alpha", "0.5",
        "--eta", "0.5", "--out", s(&tmp.path().join("v")),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_with_zero_budget_has_one_vertex() {
    let tmp = TempDir::new().unwrap();
    let loc = golden_file(tmp.path());
    let out = tmp.path().join("v");
    ok(&[
        "verify", "--locations", s(&loc), "--alpha", "0.7", "--epsilon", "0",
        "--eta", "0.5", "--out", s(&out),
    ]);
    let rep = report(&out.join("verify.txt"));
    assert_eq!(rep["vertices"], "1");
    assert_eq!(rep["verdict"], "optimal");
    assert_eq!(column(&out.join("vertices.csv"), "marker"), ["proportional+heuristic"]);
}

#[test]
fn verify_finds_restarted_heuristic_optimal() {
    let tmp = TempDir::new().unwrap();
    let synth = tmp.path().join("synth");
    ok(&["synth", "--k", "5", "--seed", "7", "--out", s(&synth)]);
    let out = tmp.path().join("v");
    ok(&[
        "verify", "--locations", s(&synth.join("locations.csv")), "--alpha", "0.5",
        "--epsilon", "0.1", "--eta", "0.3", "--restarts", "100", "--out", s(&out),
    ]);
    let rep = report(&out.join("verify.txt"));
    assert_eq!(rep["verdict"], "optimal", "{rep:?}");
    assert!(num(&rep, "gap").abs() <= 1e-6);
    assert_eq!(rep["heuristic_improves_on_proportional"], "true");
    let rd = floats(&out.join("vertices.csv"), "rd");
    assert!(rd.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn sweep_is_stable_on_the_golden_scenario() {
    let tmp = TempDir::new().unwrap();
    let loc = golden_file(tmp.path());
    let out = tmp.path().join("sw");
    ok(&[
        "sweep", "--locations", s(&loc), "--alpha", "0.7", "--epsilon", "0.4",
        "--eta", "0.05,0.25,0.45,0.65,0.85,0.95", "--svg", "--out", s(&out),
    ]);
    let sweep = out.join("sweep.csv");
    assert!(column(&sweep, "allocation_stable").iter().all(|v| v == "true"));
    assert!(floats(&sweep, "improvement").iter().all(|&v| v >= -1e-9));
    assert_eq!(report(&out.join("sweep_report.txt"))["allocation_stable"], "true");
    assert!(fs::read_to_string(out.join("sweep.svg")).unwrap().starts_with("<svg"));
    assert_eq!(column(&out.join("plot_rd.csv"), "series").len(), 12);
}

#[test]
fn simulate_with_full_supply_is_exact() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sim");
    ok(&[
        "simulate", "--resources", "50", "--population", "50", "--beta", "0.3",
        "--eta", "0.4", "--trials", "200", "--out", s(&out),
    ]);
    let rep = report(&out.join("simulate.txt"));
    assert!((num(&rep, "rho_estimate") - 0.3).abs() < 1e-12);
    assert!((num(&rep, "rho_exact") - 0.3).abs() < 1e-12);
    assert_eq!(num(&rep, "std_error"), 0.0);
}

#[test]
fn simulate_agrees_with_exact_share() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sim");
    ok(&[
        "simulate", "--resources", "3", "--population", "4", "--beta", "0.5",
        "--eta", "0.5", "--trials", "20000", "--seed", "3", "--out", s(&out),
    ]);
    let rep = report(&out.join("simulate.txt"));
    assert!((num(&rep, "rho_exact") - 34.0 / 81.0).abs() < 1e-12);
    assert!(num(&rep, "z_score").abs() < 4.0);
}

#[test]
fn synth_is_seeded_and_bounded() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    ok(&["synth", "--k", "1000", "--seed", "5", "--out", s(&a)]);
    ok(&["synth", "--k", "1000", "--seed", "5", "--out", s(&b)]);
    ok(&["synth", "--k", "1000", "--seed", "6", "--out", s(&c)]);
    let read = |d: &Path| fs::read(d.join("locations.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let beta = floats(&a.join("locations.csv"), "beta");
    assert!(beta.iter().all(|b| (0.0..=1.0).contains(b)));
    let mean = beta.iter().sum::<f64>() / beta.len() as f64;
    assert!((mean - 0.5).abs() < 0.05, "{mean}");
    let pops = floats(&a.join("locations.csv"), "population");
    assert!(pops.iter().all(|&p| (1e3..=1e6).contains(&p)));
}

#[test]
fn impact_reports_the_slope_threshold() {
    let tmp = TempDir::new().unwrap();
    let loc = golden_file(tmp.path());
    let out = tmp.path().join("imp");
    let (q, qp) = (18.0 / 99.0, 78.0 / 415.0);
    let (q_s, qp_s) = (q.to_string(), qp.to_string());
    ok(&[
        "impact", "--locations", s(&loc), "--alpha", "0.7", "--epsilon", "0.4",
        "--eta", "0.5", "--x", "0.001", "--delta", "3.19", "--q", &q_s,
        "--q-prime", &qp_s, "--out", s(&out),
    ]);
    let rep = report(&out.join("impact.txt"));
    let threshold = (qp - q) / (1.0 - qp);
    assert!((num(&rep, "threshold") - threshold).abs() < 1e-10);
    assert!((num(&rep, "threshold") - 0.007).abs() < 1e-3);
    assert_eq!(rep["positive_slope"], "true");
    assert!(num(&rep, "adverse_reduction") > 0.0);
    assert!(num(&rep, "linearity_residual") < 1e-9);
}

#[test]
fn interpolate_a_single_point_is_constant() {
    let tmp = TempDir::new().unwrap();
    let obs = write(tmp.path(), "obs.csv", "beta,y,weight\n0.4,2.5,3\n");
    let out = tmp.path().join("int");
    ok(&["interpolate", "--observations", s(&obs), "--grid", "0:1:11", "--out", s(&out)]);
    let y = floats(&out.join("interpolation.csv"), "y_hat");
    assert_eq!(y.len(), 11);
    assert!(y.iter().all(|v| (v - 2.5).abs() < 1e-12));
}

#[test]
fn composed_beta_columns_are_accepted() {
    let tmp = TempDir::new().unwrap();
    let loc = write(
        tmp.path(),
        "comp.csv",
        "id,population,beta_low,beta_moderate,beta_high,beta_very_high\n\
         A,1000,0.5,0.1,0.05,0.1\nB,1000,0.2,0.2,0.2,0.2\nC,1000,0,0.4,0.4,0.6\n",
    );
    let out = tmp.path().join("o");
    ok(&[
        "allocate", "--locations", s(&loc), "--alpha", "0.7", "--epsilon", "0.4",
        "--eta", "0.5", "--out", s(&out),
    ]);
    let n = floats(&out.join("allocation.csv"), "n");
    for (got, want) in n.iter().zip(GOLDEN_N) {
        assert!((got - want).abs() < 1e-9, "{n:?}");
    }
}

#[test]
fn help_exits_cleanly() {
    assert!(run(&["--help"]).status.success());
    assert_eq!(run(&["allocate"]).status.code(), Some(3));
}
