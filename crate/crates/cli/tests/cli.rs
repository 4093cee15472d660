use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use turing_rd::kinetics::find_equilibrium;
use turing_rd::turing::{classify, critical_eigenvector, d1_window, d2_critical, DiffusionParams};
use turing_rd::KineticParams;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turing-rd"))
        .args(args)
        .current_dir(dir)
        .env_remove("TURING_RD_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn analyze_reports_critical_d2() {
    let tmp = TempDir::new().unwrap();
    let o = bin(&["analyze", "--out", "a"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("d2crit:")).unwrap();
    let d2c = num(line.trim_start_matches("d2crit:").trim());
    assert!((d2c - 0.271).abs() < 2e-3, "{d2c}");

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a/analysis.json")).unwrap())
            .unwrap();
    let eq = find_equilibrium(&KineticParams::default()).unwrap();
    let (lo, hi) = d1_window(&eq, 1.0).unwrap();
    assert_eq!(json["d1_window"][0].as_f64().unwrap(), lo);
    assert_eq!(json["d1_window"][1].as_f64().unwrap(), hi);
    assert_eq!(json["classification"]["verdict"], "stable");
    assert_eq!(json["classification"]["transversality_checked"], false);
    let ratio = json["eta_ratio"].as_f64().unwrap();
    let (e1, e2) = critical_eigenvector(&eq, 0.005, d2c, 1.0).unwrap();
    assert!((ratio - e1 / e2).abs() < 1e-6);
}

#[test]
fn analyze_outside_window_has_no_bifurcation() {
    let tmp = TempDir::new().unwrap();
    let o = bin(&["analyze", "--d1", "0.01", "--out", "a"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no Turing bifurcation in d2 exists"));
}

#[test]
fn exit_code_contract() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();

    // analysis-domain error
    fs::write(dir.join("g.cfg"), "gamma = 1.5\n").unwrap();
    let o = bin(&["analyze", "--config", "g.cfg", "--out", "a"], dir);
    assert_eq!(o.status.code(), Some(2));
    // gamma >= 1 even when gamma <= delta holds
    fs::write(dir.join("g2.cfg"), "gamma = 1.5\ndelta = 2\n").unwrap();
    let o = bin(&["analyze", "--config", "g2.cfg", "--out", "a"], dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));

    // usage / config errors
    fs::write(dir.join("f.cfg"), "alpha = frog\n").unwrap();
    let o = bin(&["analyze", "--config", "f.cfg"], dir);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(bin(&["analyze", "--bogus"], dir).status.code(), Some(1));
    assert_eq!(
        bin(&["analyze", "--config", "missing.cfg"], dir)
            .status
            .code(),
        Some(1)
    );
    let o = bin(&["simulate", "--h", "0.01", "--dt", "1", "--out", "s"], dir);
    assert_eq!(o.status.code(), Some(1));

    // numerical failure: the logistic term overflows on huge prey data
    let mut csv = String::from("x,N,P\n");
    for j in 0..=10 {
        csv.push_str(&format!(
            "{},{},0.5\n",
            j as f64 * 0.1,
            if j == 5 { 1e300 } else { 0.5 }
        ));
    }
    fs::write(dir.join("bad.csv"), csv).unwrap();
    fs::write(
        dir.join("bad.cfg"),
        "initial = file\ninitial_file = bad.csv\nh = 0.1\nt_end = 1\n",
    )
    .unwrap();
    let o = bin(&["simulate", "--config", "bad.cfg", "--out", "s"], dir);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn sweep_two_by_two() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("s.cfg"), "d1_count = 2\nd2_count = 2\n").unwrap();
    let o = bin(&["sweep", "--config", "s.cfg", "--out", "w"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("w/sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().next(), Some("d1,d2,verdict,det_b1,d2_crit"));
}

#[test]
fn sweep_verdict_flips_across_critical_d2() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("s.cfg"),
        "d1_min = 0.005\nd1_max = 0.006\nd1_count = 2\nd2_min = 0.2\nd2_max = 0.32\nd2_count = 13\n",
    )
    .unwrap();
    let o = bin(&["sweep", "--config", "s.cfg", "--out", "w"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_csv(&tmp.path().join("w/sweep.csv"));
    let at_005: Vec<&str> = rows
        .iter()
        .filter(|r| num(&r[0]) == 0.005)
        .map(|r| r[2].as_str())
        .collect();
    assert_eq!(at_005.first(), Some(&"stable"));
    assert_eq!(at_005.last(), Some(&"turing_unstable"));
    let flips = at_005.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1);
}

#[test]
fn sweep_above_window_is_all_stable() {
    let eq = find_equilibrium(&KineticParams::default()).unwrap();
    let (_, hi) = d1_window(&eq, 1.0).unwrap();
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("s.cfg"),
        format!("d1_min = {hi}\nd1_max = 0.05\nd1_count = 6\nd2_min = 0.01\nd2_max = 50\nd2_count = 9\n"),
    )
    .unwrap();
    bin(&["sweep", "--config", "s.cfg", "--out", "w"], tmp.path());
    let (_, rows) = read_csv(&tmp.path().join("w/sweep.csv"));
    assert_eq!(rows.len(), 54);
    for r in &rows {
        let dp = DiffusionParams::new(num(&r[0]), num(&r[1]), 1.0).unwrap();
        assert_eq!(classify(&eq, &dp).kind.as_str(), "stable");
        assert_eq!(r[2], "stable");
    }
}

#[test]
fn analyze_and_sweep_agree_on_critical_d2() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("s.cfg"),
        "d1_min = 0.002\nd1_max = 0.005\nd1_count = 4\nd2_count = 2\n",
    )
    .unwrap();
    bin(&["sweep", "--config", "s.cfg", "--out", "w"], tmp.path());
    let (_, rows) = read_csv(&tmp.path().join("w/sweep.csv"));
    for d1 in ["0.002", "0.003", "0.004", "0.005"] {
        let o = bin(&["analyze", "--d1", d1, "--out", "a"], tmp.path());
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(tmp.path().join("a/analysis.json")).unwrap())
                .unwrap();
        assert_eq!(o.status.code(), Some(0));
        let from_analyze = json["d2_crit"].as_f64().unwrap();
        let row = rows.iter().find(|r| num(&r[0]) == num(d1)).unwrap();
        let from_sweep = num(&row[4]);
        assert!((from_analyze - from_sweep).abs() <= 1e-12);
    }
    let eq = find_equilibrium(&KineticParams::default()).unwrap();
    assert!((num(&rows[4][4]) - d2_critical(&eq, num(&rows[4][0]), 1.0).unwrap()).abs() <= 1e-12);
}

#[test]
fn outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("c.cfg"),
        "h = 0.02\nt_end = 5\nd1_count = 7\nd2_count = 9\n",
    )
    .unwrap();
    for out in ["x", "y"] {
        for cmd in ["analyze", "simulate", "sweep", "pattern"] {
            let o = bin(
                &[cmd, "--config", "c.cfg", "--out", &format!("{out}/{cmd}")],
                dir,
            );
            assert_eq!(o.status.code(), Some(0), "{cmd}");
        }
    }
    for file in [
        "analyze/analysis.json",
        "simulate/norms.csv",
        "simulate/manifest.csv",
        "simulate/snapshot_00003.csv",
        "simulate/run.json",
        "sweep/sweep.csv",
        "pattern/pattern.csv",
    ] {
        let a = fs::read(dir.join("x").join(file)).unwrap();
        let b = fs::read(dir.join("y").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn env_var_sets_output_root() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_turing-rd"))
        .args(["pattern", "--h", "0.05"])
        .current_dir(tmp.path())
        .env("TURING_RD_OUT", tmp.path().join("root"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("root/pattern/pattern.csv").exists());

    let o = bin(&["pattern", "--h", "0.05"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp
        .path()
        .join("turing-rd-out/pattern/pattern.csv")
        .exists());
}

fn pattern_rows(s: &str, tmp: &TempDir) -> Vec<(f64, f64, f64)> {
    let out = format!("p{s}");
    let o = bin(&["pattern", "--s", s, "--out", &out], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&tmp.path().join(out).join("pattern.csv"));
    assert_eq!(header, "x,N,P");
    rows.iter()
        .map(|r| (num(&r[0]), num(&r[1]), num(&r[2])))
        .collect()
}

#[test]
fn pattern_file_matches_formula() {
    let tmp = TempDir::new().unwrap();
    let eq = find_equilibrium(&KineticParams::default()).unwrap();
    let d2c = d2_critical(&eq, 0.005, 1.0).unwrap();
    let (e1, e2) = critical_eigenvector(&eq, 0.005, d2c, 1.0).unwrap();

    let flat = pattern_rows("0", &tmp);
    assert_eq!(flat.len(), 201);
    assert!(flat.iter().all(|&(_, n, p)| n == eq.n_bar && p == eq.p_bar));

    let small = pattern_rows("0.1", &tmp);
    assert_eq!(small[0].0, 0.0);
    assert!((small[0].1 - (eq.n_bar + 0.1 * e1)).abs() < 1e-15);
    assert!((small[0].2 - (eq.p_bar + 0.1 * e2)).abs() < 1e-15);

    let big = pattern_rows("0.4", &tmp);
    let max = big.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let min = big.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    assert!(((max - min) - 0.8 * e1).abs() < 1e-14);
}

#[test]
fn pattern_outside_window_fails_with_domain_code() {
    let tmp = TempDir::new().unwrap();
    let o = bin(&["pattern", "--d1", "0.01", "--out", "p"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_consistent_files() {
    let tmp = TempDir::new().unwrap();
    let o = bin(
        &[
            "simulate", "--h", "0.02", "--t-end", "10", "--d2", "0.32", "--out", "s",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("diverged"));
    let dir = tmp.path().join("s");
    let (header, manifest) = read_csv(&dir.join("manifest.csv"));
    assert_eq!(header, "index,step,t,file");
    let (header, norms) = read_csv(&dir.join("norms.csv"));
    assert_eq!(header, "t,l2,linf,N_probe,P_probe");
    assert_eq!(manifest.len(), norms.len());
    for (m, n) in manifest.iter().zip(&norms) {
        assert_eq!(m[2], n[0]);
        let (h, rows) = read_csv(&dir.join(&m[3]));
        assert_eq!(h, "x,N,P");
        assert_eq!(rows.len(), 51);
        // every value carries 17 significant digits
        assert!(rows[1]
            .iter()
            .all(|v| v.split('e').next().unwrap().len() == 18 || v.starts_with('-')));
    }
}

#[test]
fn simulate_from_equilibrium_converges_immediately() {
    let tmp = TempDir::new().unwrap();
    let o = bin(
        &[
            "simulate", "--s", "0", "--h", "0.02", "--t-end", "100", "--out", "s",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("converged"));
    let run: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("s/run.json")).unwrap()).unwrap();
    assert_eq!(run["snapshots"], 2);
    assert_eq!(run["converged"], true);
}

#[test]
fn simulate_round_trips_its_own_snapshot() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let o = bin(
        &["simulate", "--h", "0.02", "--t-end", "1", "--out", "a"],
        dir,
    );
    assert_eq!(o.status.code(), Some(0));
    fs::write(
        dir.join("c.cfg"),
        "initial = file\ninitial_file = a/snapshot_00000.csv\nh = 0.02\nt_end = 1\n",
    )
    .unwrap();
    let o = bin(&["simulate", "--config", "c.cfg", "--out", "b"], dir);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        fs::read(dir.join("a/norms.csv")).unwrap(),
        fs::read(dir.join("b/norms.csv")).unwrap()
    );
}
