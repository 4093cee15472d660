//! Implementations of the `analyze`, `simulate`, `sweep` and `pattern`
//! subcommands. Each writes into its own output directory and returns the
//! text printed to stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use turing_rd::kinetics::{find_equilibrium, kinetic_stability, Equilibrium, KineticVerdict};
use turing_rd::solver::{grid_points, pattern_state, run, GridState, Reference, SolverConfig};
use turing_rd::turing::{
    classify, critical_eigenvector, d1_window, d2_critical, det_b, mode_eigenvalue,
    small_amplitude_pattern, DiffusionParams, PatternSpec,
};
use turing_rd::Error as ModelError;

use crate::config::{ExperimentConfig, InitialKind, ReferenceKind, Resolved};
use crate::error::CliError;

/// Fixed-width float text with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn profile_csv(xs: &[f64], n: &[f64], p: &[f64]) -> String {
    let mut out = String::from("x,N,P\n");
    for ((x, n), p) in xs.iter().zip(n).zip(p) {
        let _ = writeln!(out, "{},{},{}", fmt_float(*x), fmt_float(*n), fmt_float(*p));
    }
    out
}

fn diffusion(r: &Resolved) -> Result<DiffusionParams, CliError> {
    Ok(DiffusionParams::new(r.d1, r.d2, r.l)?)
}

fn equilibrium(r: &Resolved) -> Result<Equilibrium, CliError> {
    r.params.validate()?;
    Ok(find_equilibrium(&r.params)?)
}

#[derive(Debug, Serialize)]
struct ParamsJson {
    alpha: f64,
    gamma: f64,
    delta: f64,
    epsilon: f64,
    beta: f64,
    d1: f64,
    d2: f64,
    l: f64,
}

#[derive(Debug, Serialize)]
struct EquilibriumJson {
    n: f64,
    p: f64,
    roots_found: usize,
    theta: [f64; 4],
    trace_a: f64,
    det_a: f64,
    kinetically_stable: bool,
}

#[derive(Debug, Serialize)]
struct ClassificationJson {
    verdict: &'static str,
    unstable_modes: Vec<u64>,
    margin: f64,
    continuum_unstable: bool,
    transversality_checked: bool,
}

#[derive(Debug, Serialize)]
struct AnalysisJson {
    params: ParamsJson,
    equilibrium: EquilibriumJson,
    d1_window: Option<[f64; 2]>,
    /// Where `d1` sits relative to the window.
    d1_position: &'static str,
    d2_crit: Option<f64>,
    /// Critical eigenvector (eta1, eta2) and its ratio, when `d2_crit` exists.
    eigenvector: Option<[f64; 2]>,
    eta_ratio: Option<f64>,
    classification: ClassificationJson,
}

/// Equilibrium, mode analysis and critical diffusivity at the configured
/// `(d1, d2)`. Writes `analysis.json` and `analysis.txt`.
pub fn cmd_analyze(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let r = cfg.resolve()?;
    let dp = diffusion(&r)?;
    let eq = equilibrium(&r)?;
    let stable = kinetic_stability(&eq.thetas()) == KineticVerdict::Stable;

    let window = d1_window(&eq, r.l).ok();
    let position = match window {
        None => "empty",
        Some((lo, _)) if r.d1 <= lo => "below",
        Some((_, hi)) if r.d1 >= hi => "above",
        Some(_) => "inside",
    };
    let (d2_crit, eigenvector) = if stable && position == "inside" {
        let d2c = d2_critical(&eq, r.d1, r.l)?;
        let eta = critical_eigenvector(&eq, r.d1, d2c, r.l)?;
        (Some(d2c), Some([eta.0, eta.1]))
    } else {
        (None, None)
    };
    let verdict = classify(&eq, &dp);

    let report = AnalysisJson {
        params: ParamsJson {
            alpha: r.params.alpha,
            gamma: r.params.gamma,
            delta: r.params.delta,
            epsilon: r.params.epsilon,
            beta: r.params.beta,
            d1: r.d1,
            d2: r.d2,
            l: r.l,
        },
        equilibrium: EquilibriumJson {
            n: eq.n_bar,
            p: eq.p_bar,
            roots_found: eq.multiplicity,
            theta: [eq.theta1, eq.theta2, eq.theta3, eq.theta4],
            trace_a: eq.trace_a,
            det_a: eq.det_a,
            kinetically_stable: stable,
        },
        d1_window: window.map(|(a, b)| [a, b]),
        d1_position: position,
        d2_crit,
        eigenvector,
        eta_ratio: eigenvector.map(|e| e[0] / e[1]),
        classification: ClassificationJson {
            verdict: verdict.kind.as_str(),
            unstable_modes: verdict.unstable_modes.clone(),
            margin: verdict.margin,
            continuum_unstable: verdict.continuum_unstable,
            transversality_checked: verdict.transversality_checked,
        },
    };

    let mut t = String::new();
    let _ = writeln!(
        t,
        "parameters: alpha={} gamma={} delta={} epsilon={} beta={}",
        r.params.alpha, r.params.gamma, r.params.delta, r.params.epsilon, r.params.beta
    );
    let _ = writeln!(t, "diffusion: d1={} d2={} l={}", r.d1, r.d2, r.l);
    let _ = writeln!(t, "equilibrium: N={:.10} P={:.10}", eq.n_bar, eq.p_bar);
    if eq.has_multiple_roots() {
        let _ = writeln!(
            t,
            "  note: {} interior null-cline crossings; reporting the one with det A > 0",
            eq.multiplicity
        );
    }
    let _ = writeln!(
        t,
        "theta: {:.10} {:.10} {:.10} {:.10}",
        eq.theta1, eq.theta2, eq.theta3, eq.theta4
    );
    let _ = writeln!(t, "trace A={:.10} det A={:.10}", eq.trace_a, eq.det_a);
    let _ = writeln!(
        t,
        "kinetic verdict: {}",
        if stable { "stable" } else { "unstable" }
    );
    match window {
        Some((lo, hi)) => {
            let _ = writeln!(t, "d1 window: ({lo:.9e}, {hi:.9e})");
        }
        None => {
            let _ = writeln!(t, "d1 window: empty (theta1 <= 0)");
        }
    }
    match (position, d2_crit) {
        (_, Some(d2c)) => {
            let [e1, e2] = eigenvector.unwrap_or([f64::NAN; 2]);
            let _ = writeln!(t, "d2crit: {d2c:.10}");
            let _ = writeln!(
                t,
                "critical eigenvector: ({e1:.10}, {e2:.10}), eta1/eta2 = {:.10}",
                e1 / e2
            );
        }
        ("above", None) if stable => {
            let _ = writeln!(
                t,
                "no Turing bifurcation in d2 exists: d1 >= theta1/zeta1, \
                 the equilibrium is asymptotically stable for all d2 > 0"
            );
        }
        ("below", None) if stable => {
            let _ = writeln!(
                t,
                "d1 below the window: the first mode to destabilize is not j=1, \
                 d2crit for mode 1 is not defined"
            );
        }
        ("empty", None) if stable => {
            let _ = writeln!(t, "no Turing bifurcation in d2 exists: theta1 <= 0");
        }
        _ => {
            let _ = writeln!(t, "d2crit: not applicable (kinetically unstable)");
        }
    }
    let _ = writeln!(
        t,
        "classification at (d1, d2): {} unstable modes {:?} margin {:.6e}",
        verdict.kind, verdict.unstable_modes, verdict.margin
    );

    prepare_dir(out)?;
    let json = serde_json::to_string_pretty(&report).expect("analysis report serializes");
    write_file(out, "analysis.json", &(json + "\n"))?;
    write_file(out, "analysis.txt", &t)?;
    Ok(t)
}

fn read_profile(path: &Path, h: f64, l: f64) -> Result<GridState, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize, reason: String| {
        CliError::Usage(format!("{}:{line}: {reason}", path.display()))
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "x,N,P" => {}
        _ => return Err(bad(1, "expected header `x,N,P`".into())),
    }
    let xs = grid_points(l, h)?;
    let (mut n, mut p) = (Vec::new(), Vec::new());
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(idx + 1, format!("bad row `{line}`")))?;
        let [x, nv, pv] = cols[..] else {
            return Err(bad(idx + 1, "expected three columns".into()));
        };
        let j = n.len();
        if j >= xs.len() || (x - xs[j]).abs() > 1e-9 * l.max(1.0) {
            return Err(bad(
                idx + 1,
                format!("x = {x} does not match grid node {j}"),
            ));
        }
        n.push(nv);
        p.push(pv);
    }
    if n.len() != xs.len() {
        return Err(bad(
            text.lines().count(),
            format!("{} rows, grid has {} nodes", n.len(), xs.len()),
        ));
    }
    Ok(GridState::new(h, n, p)?)
}

fn solver_config(cfg: &ExperimentConfig) -> SolverConfig {
    SolverConfig {
        h: cfg.h,
        dt: cfg.dt,
        dt_safety: cfg.dt_safety,
        t_end: cfg.t_end,
        snapshot_stride: cfg.snapshot_stride,
        probe_x: cfg.probe_x,
        steady_tol: cfg.steady_tol,
        reference: match cfg.reference {
            ReferenceKind::Equilibrium => Reference::Equilibrium,
            ReferenceKind::Pattern => Reference::Pattern(cfg.s),
            ReferenceKind::None => Reference::None,
        },
    }
}

#[derive(Debug, Serialize)]
struct RunJson {
    converged: bool,
    steps: u64,
    dt: f64,
    t_final: f64,
    snapshots: usize,
    linf_initial: f64,
    linf_final: f64,
    linear_verdict: &'static str,
}

/// Integrates the PDE and writes `manifest.csv`, one `snapshot_NNNNN.csv`
/// per recorded profile, `norms.csv` and `run.json`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let r = cfg.resolve()?;
    let dp = diffusion(&r)?;
    let eq = equilibrium(&r)?;
    let initial = match cfg.initial {
        InitialKind::Equilibrium => GridState::uniform(r.l, cfg.h, eq.n_bar, eq.p_bar)?,
        InitialKind::Pattern => pattern_state(&r.params, &dp, cfg.h, cfg.s)?,
        InitialKind::File => {
            let path = cfg
                .initial_file
                .as_deref()
                .ok_or_else(|| CliError::Usage("initial = file needs initial_file".into()))?;
            read_profile(path, cfg.h, r.l)?
        }
    };
    let report = run(&initial, &r.params, &dp, &solver_config(cfg))?;

    prepare_dir(out)?;
    let mut manifest = String::from("index,step,t,file\n");
    for snap in &report.snapshots {
        let name = format!("snapshot_{:05}.csv", snap.index);
        let xs: Vec<f64> = (0..snap.n_values.len()).map(|j| j as f64 * cfg.h).collect();
        write_file(
            out,
            &name,
            &profile_csv(&xs, &snap.n_values, &snap.p_values),
        )?;
        let _ = writeln!(
            manifest,
            "{},{},{},{name}",
            snap.index,
            snap.step,
            fmt_float(snap.t)
        );
    }
    write_file(out, "manifest.csv", &manifest)?;

    let mut norms = String::from("t,l2,linf,N_probe,P_probe\n");
    for i in 0..report.times.len() {
        let _ = writeln!(
            norms,
            "{},{},{},{},{}",
            fmt_float(report.times[i]),
            fmt_float(report.l2_series[i]),
            fmt_float(report.linf_series[i]),
            fmt_float(report.probe_n[i]),
            fmt_float(report.probe_p[i]),
        );
    }
    write_file(out, "norms.csv", &norms)?;

    let verdict = classify(&eq, &dp);
    let summary = RunJson {
        converged: report.converged,
        steps: report.steps,
        dt: report.dt,
        t_final: report.t_final,
        snapshots: report.snapshots.len(),
        linf_initial: report.linf_series[0],
        linf_final: *report.linf_series.last().expect("at least one snapshot"),
        linear_verdict: verdict.kind.as_str(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("run summary serializes");
    write_file(out, "run.json", &(json + "\n"))?;

    let mut t = String::new();
    if report.converged {
        let _ = writeln!(
            t,
            "converged: L-inf <= {} at t = {} after {} steps (dt = {:.6e})",
            cfg.steady_tol, report.t_final, report.steps, report.dt
        );
    } else {
        let _ = writeln!(
            t,
            "diverged: not within steady_tol = {} by t = {} ({} steps, dt = {:.6e})",
            cfg.steady_tol, report.t_final, report.steps, report.dt
        );
    }
    let _ = writeln!(
        t,
        "L-inf deviation: initial {:.6e}, final {:.6e}; linear analysis: {}",
        summary.linf_initial, summary.linf_final, summary.linear_verdict
    );
    let _ = writeln!(
        t,
        "{} snapshots written to {}",
        report.snapshots.len(),
        out.display()
    );
    Ok(t)
}

/// One cell of the stability map.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub d1: f64,
    pub d2: f64,
    pub verdict: String,
    pub det_b1: Option<f64>,
    pub d2_crit: Option<f64>,
}

fn sweep_cell(eq: &Result<Equilibrium, ModelError>, l: f64, d1: f64, d2: f64) -> SweepCell {
    let error = || SweepCell {
        d1,
        d2,
        verdict: "error".into(),
        det_b1: None,
        d2_crit: None,
    };
    let Ok(eq) = eq else { return error() };
    let Ok(dp) = DiffusionParams::new(d1, d2, l) else {
        return error();
    };
    let verdict = classify(eq, &dp);
    SweepCell {
        d1,
        d2,
        verdict: verdict.kind.as_str().into(),
        det_b1: Some(det_b(eq, d1, d2, mode_eigenvalue(1, l))),
        d2_crit: d2_critical(eq, d1, l).ok(),
    }
}

/// Classifies every `(d1, d2)` cell in parallel; rows come back in
/// row-major order with `d1` outer.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Result<Vec<SweepCell>, CliError> {
    let r = cfg.resolve()?;
    let eq = r
        .params
        .validate()
        .and_then(|_| find_equilibrium(&r.params));
    let d1s = cfg.sweep_d1.values();
    let d2s = cfg.sweep_d2.values();
    let cells: Vec<(f64, f64)> = d1s
        .iter()
        .flat_map(|&d1| d2s.iter().map(move |&d2| (d1, d2)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(d1, d2)| sweep_cell(&eq, r.l, d1, d2))
        .collect())
}

/// Writes `sweep.csv` with columns `d1,d2,verdict,det_b1,d2_crit`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let cells = sweep_cells(cfg)?;
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    let mut csv = String::from("d1,d2,verdict,det_b1,d2_crit\n");
    let (mut stable, mut turing, mut kinetic, mut errors) = (0, 0, 0, 0);
    for c in &cells {
        match c.verdict.as_str() {
            "stable" => stable += 1,
            "turing_unstable" => turing += 1,
            "kinetic_unstable" => kinetic += 1,
            _ => errors += 1,
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_float(c.d1),
            fmt_float(c.d2),
            c.verdict,
            opt(c.det_b1),
            opt(c.d2_crit)
        );
    }
    prepare_dir(out)?;
    write_file(out, "sweep.csv", &csv)?;
    Ok(format!(
        "{} cells: {stable} stable, {turing} turing_unstable, {kinetic} kinetic_unstable, \
         {errors} error\nwritten to {}\n",
        cells.len(),
        out.join("sweep.csv").display()
    ))
}

/// Writes `pattern.csv`, the first-order pattern at amplitude `s` sampled on
/// the solver grid.
pub fn export_pattern(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let r = cfg.resolve()?;
    let eq = equilibrium(&r)?;
    let spec = PatternSpec::at_critical(&eq, r.d1, r.l, cfg.s)?;
    let xs = grid_points(r.l, cfg.h)?;
    let prof = small_amplitude_pattern(&eq, &spec, &xs, r.l)?;
    prepare_dir(out)?;
    write_file(out, "pattern.csv", &profile_csv(&xs, &prof.n, &prof.p))?;
    let mut t = format!(
        "pattern: s = {}, eta = ({:.10}, {:.10}), d2crit = {:.10}, {} nodes\n",
        cfg.s,
        spec.eta1,
        spec.eta2,
        spec.d2_crit,
        xs.len()
    );
    if prof.clipped {
        t.push_str("warning: profile leaves 0 <= N <= 1, P >= 0 (amplitude too large)\n");
    }
    Ok(t)
}

/// `--out`, then the config's `out`, then `$TURING_RD_OUT/<command>`, then
/// `./turing-rd-out/<command>`.
pub fn output_dir(cli_out: Option<&Path>, cfg: &ExperimentConfig, command: &str) -> PathBuf {
    if let Some(dir) = cli_out.or(cfg.out.as_deref()) {
        return dir.to_path_buf();
    }
    match std::env::var_os("TURING_RD_OUT") {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(command),
        _ => PathBuf::from("turing-rd-out").join(command),
    }
}
