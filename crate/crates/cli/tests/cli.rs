use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slope-lab"))
        .current_dir(dir)
        .env("SLOPE_LAB_THREADS", "1")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let o = run(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

/// Schema line, header, rows.
fn read_csv(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let (schema, body) = text.split_once('\n').unwrap();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (schema.to_string(), header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn table1_rows_and_values() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["table1", "--out", "t1.csv"]);
    let (schema, header, rows) = read_csv(&d.path().join("t1.csv"));
    assert_eq!(schema, "#schema=slope-lab/table1/v1");
    assert_eq!(header[0], "n");
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[0][8], "1");
    assert_eq!(rows[1][8], "1");
    assert_eq!(rows[2][8], "0");
    // n = 7
    assert!((num(&rows[3][1]) - 1.63377).abs() < 1e-3, "{}", rows[3][1]);
    assert!((num(&rows[3][2]) - 2.44042).abs() < 1e-3, "{}", rows[3][2]);
    for r in &rows {
        let n = num(&r[0]);
        assert!((num(&r[6]) - n * num(&r[4]) / 100.0).abs() < 0.05);
        assert!((num(&r[7]) - n * num(&r[5]) / 100.0).abs() < 0.05);
    }
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("t1.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "table1");
    assert_eq!(m["outputs"][0], "t1.csv");
    assert_eq!(m["flags"]["n_max"], 31);
}

#[test]
fn bernoulli_eff_columns() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["bernoulli-eff", "--grid", "9"]);
    let (_, header, rows) = read_csv(&d.path().join("bernoulli_eff.csv"));
    assert_eq!(header, ["p", "eff_y", "eff_y_y1", "eff_y2"]);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert!((num(&r[1]) - 1.0).abs() < 1e-12);
        assert!(num(&r[2]) <= 1.0 && num(&r[3]) <= 1.0);
    }
}

#[test]
fn curves_are_standardized_scores() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["curves", "--grid", "9"]);
    let (_, header, rows) = read_csv(&d.path().join("curves.csv"));
    assert_eq!(header.len(), 12);
    // p = 0.5 is the middle grid point
    let mid = &rows[4];
    assert_eq!(num(&mid[0]), 0.5);
    let s: Vec<f64> = mid[1..].iter().map(|v| num(v)).collect();
    let w: Vec<f64> = (0..=10u64)
        .map(|y| (1..=10u64).product::<u64>() as f64 / ((1..=y).product::<u64>() * (1..=10 - y).product::<u64>()) as f64 / 1024.0)
        .collect();
    let mean: f64 = s.iter().zip(&w).map(|(a, b)| a * b).sum();
    let var: f64 = s.iter().zip(&w).map(|(a, b)| a * a * b).sum();
    assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
    // each curve decreases through zero at p = y/n
    for y in 2..9 {
        let col: Vec<f64> = rows.iter().map(|r| num(&r[y + 1])).collect();
        assert!(col.windows(2).all(|c| c[1] < c[0]));
        assert!(col[0] > 0.0 && col[8] < 0.0);
    }
}

#[test]
fn curves_reject_continuous_families() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(d.path(), &["curves", "--family", "cauchy"]).status.code(), Some(3));
}

#[test]
fn cauchy_sim_is_reproducible() {
    let d = TempDir::new().unwrap();
    let args = ["cauchy-sim", "--reps", "300", "--bins", "3", "--out-prefix"];
    ok(d.path(), &[&args[..], &["a/run"]].concat());
    ok(d.path(), &[&args[..], &["b/run"]].concat());
    for f in ["summary", "bins", "qq", "replicates"] {
        let a = std::fs::read(d.path().join(format!("a/run_{f}.csv"))).unwrap();
        let b = std::fs::read(d.path().join(format!("b/run_{f}.csv"))).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let (_, header, rows) = read_csv(&d.path().join("a/run_replicates.csv"));
    assert_eq!(header, ["rep", "theta_hat", "i_obs", "hit_we", "hit_wo", "hit_lrt", "kl_we", "kl_wo", "kl_lrt"]);
    assert_eq!(rows.len(), 300);
    assert!(rows.iter().all(|r| r[3] == "0" || r[3] == "1"));
    let (_, _, bins) = read_csv(&d.path().join("a/run_bins.csv"));
    assert_eq!(bins.len(), 3);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("a/run_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], slope_lab::mc::DEFAULT_SEED);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn raw_and_adjusted_differ_only_in_the_wald_margins() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["cauchy-sim", "--reps", "200", "--bins", "2", "--raw", "--out-prefix", "raw"]);
    ok(d.path(), &["cauchy-sim", "--reps", "200", "--bins", "2", "--out-prefix", "adj"]);
    let (_, _, raw) = read_csv(&d.path().join("raw_summary.csv"));
    let (_, _, adj) = read_csv(&d.path().join("adj_summary.csv"));
    assert_eq!(num(&raw[0][1]), 1.0);
    assert_eq!(num(&adj[0][1]), 1.08555);
    assert_eq!(raw[2], adj[2]);
}

#[test]
fn check_passes_for_every_family() {
    let d = TempDir::new().unwrap();
    for fam in ["bernoulli", "normal", "cauchy", "median"] {
        let o = run(d.path(), &["check", "--family", fam, "--grid", "7", "--n", "5"]);
        assert_eq!(o.status.code(), Some(0), "{fam}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("identity"));
    }
    let (_, header, rows) = read_csv(&d.path().join("check.csv"));
    assert_eq!(header.last().unwrap(), "pass");
    assert!(rows.iter().all(|r| r[5] == "1"));
}

#[test]
fn usage_errors_exit_with_three() {
    let d = TempDir::new().unwrap();
    for args in [&["frobnicate"][..], &["table1", "--n-max", "4"], &["cauchy-sim", "--reps", "0"], &["check", "--bogus"]] {
        assert_eq!(run(d.path(), args).status.code(), Some(3), "{args:?}");
    }
    assert_eq!(run(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_supplies_defaults_that_flags_override() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("run.cfg"), "# desk run\nn_max = 5\nout = cfg.csv\n").unwrap();
    ok(d.path(), &["table1", "--config", "run.cfg"]);
    assert_eq!(read_csv(&d.path().join("cfg.csv")).2.len(), 3);
    ok(d.path(), &["table1", "--config", "run.cfg", "--n-max", "9"]);
    assert_eq!(read_csv(&d.path().join("cfg.csv")).2.len(), 5);
    let o = run(d.path(), &["table1", "--config", "missing.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}
