//! Explicit finite-difference integrator on a uniform 1-D grid.
//!
//! Forward Euler in time, centered second differences in space. The Neumann
//! condition is imposed by the second-order one-sided closure
//! `u_0 = (4 u_1 - u_2) / 3` (and its mirror at the right end), so boundary
//! values are derived after each update rather than time-stepped.
//!
//! With `dt` at or below [`max_timestep`] the interior nodes satisfy
//! `0 <= N <= 1` and `P >= 0` for all time, given valid initial data.

use crate::error::{Error, Result};
use crate::kinetics::{find_equilibrium, reaction_unchecked, KineticParams};
use crate::turing::{small_amplitude_pattern, DiffusionParams, PatternSpec};

/// Tolerance on `N_h * h` reproducing the domain length.
const GRID_FIT_TOL: f64 = 1e-12;

/// Node values of both species at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub h: f64,
    pub n_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub t: f64,
}

/// Number of intervals `round(l / h)`, rejecting meshes that do not tile `l`.
pub fn interval_count(l: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) || !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("need positive finite h and l, got h = {h}, l = {l}"),
        });
    }
    let n_h = (l / h).round();
    if (n_h * h - l).abs() > GRID_FIT_TOL * l.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "h = {h} does not divide l = {l} (round(l/h) * h = {})",
            n_h * h
        )));
    }
    Ok(n_h as usize)
}

/// Node positions `x_j = j h`, `j = 0..=N_h`.
pub fn grid_points(l: f64, h: f64) -> Result<Vec<f64>> {
    let n_h = interval_count(l, h)?;
    Ok((0..=n_h).map(|j| j as f64 * h).collect())
}

impl GridState {
    pub fn new(h: f64, n_values: Vec<f64>, p_values: Vec<f64>) -> Result<Self> {
        if n_values.len() != p_values.len() {
            return Err(Error::GridMismatch(format!(
                "{} prey nodes vs {} predator nodes",
                n_values.len(),
                p_values.len()
            )));
        }
        if n_values.len() < 4 {
            return Err(Error::GridTooSmall {
                n_h: n_values.len().saturating_sub(1),
            });
        }
        Ok(Self {
            h,
            n_values,
            p_values,
            t: 0.0,
        })
    }

    /// Spatially constant state on `[0, l]`.
    pub fn uniform(l: f64, h: f64, n: f64, p: f64) -> Result<Self> {
        let nodes = interval_count(l, h)? + 1;
        Self::new(h, vec![n; nodes], vec![p; nodes])
    }

    /// Samples `f(x) -> (n, p)` at every node of `[0, l]`.
    pub fn from_fn(l: f64, h: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (n, p) = grid_points(l, h)?.into_iter().map(f).unzip();
        Self::new(h, n, p)
    }

    pub fn n_intervals(&self) -> usize {
        self.n_values.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.n_intervals() as f64 * self.h
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// Linear interpolation of both species at `x`, clamped to the domain.
    pub fn probe(&self, x: f64) -> (f64, f64) {
        let last = self.n_intervals();
        let s = (x / self.h).clamp(0.0, last as f64);
        let j = (s.floor() as usize).min(last - 1);
        let w = s - j as f64;
        let lerp = |v: &[f64]| (1.0 - w) * v[j] + w * v[j + 1];
        (lerp(&self.n_values), lerp(&self.p_values))
    }

    pub fn is_finite(&self) -> bool {
        self.n_values
            .iter()
            .chain(&self.p_values)
            .all(|v| v.is_finite())
    }
}

/// Positivity-preserving step bound
/// `min(h^2/(alpha h^2 + 2 d1), h^2/(h^2 + 2 d1), h^2/(epsilon delta h^2 + 2 d2))`.
pub fn max_timestep(params: &KineticParams, dp: &DiffusionParams, h: f64) -> f64 {
    let h2 = h * h;
    let prey_lower = h2 / (params.alpha * h2 + 2.0 * dp.d1);
    let prey_upper = h2 / (h2 + 2.0 * dp.d1);
    let predator = h2 / (params.epsilon * params.delta * h2 + 2.0 * dp.d2);
    prey_lower.min(prey_upper).min(predator)
}

/// Overwrites both endpoints of `values` with the three-point Neumann closure.
fn close_ends(values: &mut [f64]) {
    let last = values.len() - 1;
    values[0] = (4.0 * values[1] - values[2]) / 3.0;
    values[last] = (4.0 * values[last - 1] - values[last - 2]) / 3.0;
}

pub fn apply_boundary(state: &mut GridState) -> Result<()> {
    if state.n_intervals() < 3 {
        return Err(Error::GridTooSmall {
            n_h: state.n_intervals(),
        });
    }
    close_ends(&mut state.n_values);
    close_ends(&mut state.p_values);
    Ok(())
}

/// Scratch space reused across steps.
#[derive(Debug, Default)]
struct Buffers {
    n: Vec<f64>,
    p: Vec<f64>,
}

fn advance(
    state: &mut GridState,
    dp: &DiffusionParams,
    dt: f64,
    buf: &mut Buffers,
    reaction: impl Fn(f64, f64) -> (f64, f64),
) {
    let n_old = &state.n_values;
    let p_old = &state.p_values;
    let last = n_old.len() - 1;
    let (c1, c2) = (
        dt * dp.d1 / (state.h * state.h),
        dt * dp.d2 / (state.h * state.h),
    );

    buf.n.clear();
    buf.p.clear();
    buf.n.resize(n_old.len(), 0.0);
    buf.p.resize(p_old.len(), 0.0);
    for j in 1..last {
        let (n, p) = (n_old[j], p_old[j]);
        let (f1, f2) = reaction(n, p);
        buf.n[j] = n + dt * f1 + c1 * (n_old[j - 1] - 2.0 * n + n_old[j + 1]);
        buf.p[j] = p + dt * f2 + c2 * (p_old[j - 1] - 2.0 * p + p_old[j + 1]);
    }
    close_ends(&mut buf.n);
    close_ends(&mut buf.p);
    std::mem::swap(&mut state.n_values, &mut buf.n);
    std::mem::swap(&mut state.p_values, &mut buf.p);
    state.t += dt;
}

fn check_step(
    state: &GridState,
    params: &KineticParams,
    dp: &DiffusionParams,
    dt: f64,
) -> Result<()> {
    if state.n_intervals() < 3 {
        return Err(Error::GridTooSmall {
            n_h: state.n_intervals(),
        });
    }
    let bound = max_timestep(params, dp, state.h);
    if !(dt > 0.0 && dt <= bound) {
        return Err(Error::StepRejected { dt, bound });
    }
    Ok(())
}

/// One explicit step of the full reaction-diffusion system.
///
/// All interior nodes are computed from the level-k state, then the boundary
/// closure fixes the endpoints of level k+1.
pub fn step(
    state: &GridState,
    params: &KineticParams,
    dp: &DiffusionParams,
    dt: f64,
) -> Result<GridState> {
    check_step(state, params, dp, dt)?;
    let mut next = state.clone();
    advance(&mut next, dp, dt, &mut Buffers::default(), |n, p| {
        reaction_unchecked(n, p, params)
    });
    Ok(next)
}

/// One explicit step with the reaction terms switched off.
///
/// Exists to verify the discrete Laplacian and boundary closure against the
/// exact decay of Neumann cosine modes.
pub fn diffusion_step(state: &GridState, dp: &DiffusionParams, dt: f64) -> Result<GridState> {
    if state.n_intervals() < 3 {
        return Err(Error::GridTooSmall {
            n_h: state.n_intervals(),
        });
    }
    let mut next = state.clone();
    advance(&mut next, dp, dt, &mut Buffers::default(), |_, _| {
        (0.0, 0.0)
    });
    Ok(next)
}

/// Distances `(l2, linf)` between a state and reference profiles.
///
/// `linf` is the largest nodal deviation of either species; `l2` integrates
/// the squared Euclidean deviation of `(N, P)` with the trapezoidal rule.
pub fn norms(state: &GridState, n_ref: &[f64], p_ref: &[f64]) -> Result<(f64, f64)> {
    let nodes = state.n_values.len();
    if n_ref.len() != nodes || p_ref.len() != nodes {
        return Err(Error::GridMismatch(format!(
            "state has {nodes} nodes, reference has {} / {}",
            n_ref.len(),
            p_ref.len()
        )));
    }
    let mut linf: f64 = 0.0;
    let mut integral = 0.0;
    for j in 0..nodes {
        let dn = state.n_values[j] - n_ref[j];
        let dpp = state.p_values[j] - p_ref[j];
        linf = linf.max(dn.abs()).max(dpp.abs());
        let w = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
        integral += w * (dn * dn + dpp * dpp);
    }
    Ok(((integral * state.h).sqrt(), linf))
}

/// Target profile that the norm series are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// The homogeneous equilibrium.
    Equilibrium,
    /// The first-order pattern with amplitude `s` at the current `d1`.
    Pattern(f64),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    /// Fixed step; `None` selects `dt_safety * max_timestep`.
    pub dt: Option<f64>,
    pub dt_safety: f64,
    pub t_end: f64,
    /// Steps between recorded snapshots; `None` picks a stride giving about
    /// [`DEFAULT_SNAPSHOTS`] snapshots.
    pub snapshot_stride: Option<u64>,
    pub probe_x: f64,
    pub steady_tol: f64,
    pub reference: Reference,
}

pub const DEFAULT_SNAPSHOTS: u64 = 200;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.005,
            dt: None,
            dt_safety: 0.95,
            t_end: 1000.0,
            snapshot_stride: None,
            probe_x: 0.25,
            steady_tol: 1e-6,
            reference: Reference::Equilibrium,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad("h", format!("must be positive, got {}", self.h));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad(
                "dt_safety",
                format!("must lie in (0, 1], got {}", self.dt_safety),
            );
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end", format!("must be nonnegative, got {}", self.t_end));
        }
        if self.snapshot_stride == Some(0) {
            return bad("snapshot_stride", "must be at least 1".into());
        }
        if !(self.steady_tol >= 0.0) {
            return bad(
                "steady_tol",
                format!("must be nonnegative, got {}", self.steady_tol),
            );
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("dt", format!("must be positive, got {dt}"));
            }
        }
        Ok(())
    }

    /// The step actually used: the supplied `dt`, or the safety-scaled bound.
    pub fn resolve_dt(&self, params: &KineticParams, dp: &DiffusionParams) -> Result<f64> {
        let bound = max_timestep(params, dp, self.h);
        match self.dt {
            Some(dt) if dt > bound => Err(Error::StepRejected { dt, bound }),
            Some(dt) => Ok(dt),
            None => Ok(self.dt_safety * bound),
        }
    }
}

/// Recorded profile at one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub index: usize,
    pub step: u64,
    pub t: f64,
    pub n_values: Vec<f64>,
    pub p_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub converged: bool,
    pub t_final: f64,
    pub steps: u64,
    pub dt: f64,
    /// Snapshot times; the norm and probe series share this indexing.
    pub times: Vec<f64>,
    pub l2_series: Vec<f64>,
    pub linf_series: Vec<f64>,
    pub probe_n: Vec<f64>,
    pub probe_p: Vec<f64>,
    pub final_state: GridState,
    pub snapshots: Vec<Snapshot>,
}

/// Resolves a [`Reference`] into nodal profiles for a grid of length `l`.
pub fn reference_profiles(
    reference: Reference,
    params: &KineticParams,
    dp: &DiffusionParams,
    h: f64,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    match reference {
        Reference::None => Ok(None),
        Reference::Equilibrium => {
            let eq = find_equilibrium(params)?;
            let nodes = interval_count(dp.l, h)? + 1;
            Ok(Some((vec![eq.n_bar; nodes], vec![eq.p_bar; nodes])))
        }
        Reference::Pattern(s) => {
            let eq = find_equilibrium(params)?;
            let spec = PatternSpec::at_critical(&eq, dp.d1, dp.l, s)?;
            let xs = grid_points(dp.l, h)?;
            let prof = small_amplitude_pattern(&eq, &spec, &xs, dp.l)?;
            Ok(Some((prof.n, prof.p)))
        }
    }
}

/// Initial state sampled from the first-order pattern with amplitude `s`.
pub fn pattern_state(
    params: &KineticParams,
    dp: &DiffusionParams,
    h: f64,
    s: f64,
) -> Result<GridState> {
    let eq = find_equilibrium(params)?;
    let spec = PatternSpec::at_critical(&eq, dp.d1, dp.l, s)?;
    let xs = grid_points(dp.l, h)?;
    let prof = small_amplitude_pattern(&eq, &spec, &xs, dp.l)?;
    GridState::new(h, prof.n, prof.p)
}

/// Integrates from `initial` to `config.t_end`, or until the state sits
/// within `steady_tol` (L-infinity) of the reference at two consecutive
/// snapshots. Snapshot 0 is the initial state.
pub fn run(
    initial: &GridState,
    params: &KineticParams,
    dp: &DiffusionParams,
    config: &SolverConfig,
) -> Result<RunReport> {
    config.validate()?;
    params.validate()?;
    dp.validate()?;
    let n_h = interval_count(dp.l, config.h)?;
    if initial.n_intervals() != n_h || (initial.h - config.h).abs() > GRID_FIT_TOL {
        return Err(Error::GridMismatch(format!(
            "initial state has {} intervals of {}, config wants {} of {}",
            initial.n_intervals(),
            initial.h,
            n_h,
            config.h
        )));
    }
    if n_h < 3 {
        return Err(Error::GridTooSmall { n_h });
    }
    let dt = config.resolve_dt(params, dp)?;
    let reference = reference_profiles(config.reference, params, dp, config.h)?;
    let total_steps = (config.t_end / dt - 1e-9).ceil().max(0.0) as u64;
    let stride = config
        .snapshot_stride
        .unwrap_or_else(|| (total_steps / DEFAULT_SNAPSHOTS).max(1));

    let mut report = RunReport {
        converged: false,
        t_final: initial.t,
        steps: 0,
        dt,
        times: Vec::new(),
        l2_series: Vec::new(),
        linf_series: Vec::new(),
        probe_n: Vec::new(),
        probe_p: Vec::new(),
        final_state: initial.clone(),
        snapshots: Vec::new(),
    };
    let mut state = initial.clone();
    let t0 = initial.t;
    let mut below_tol = 0u32;
    let mut buf = Buffers::default();

    let mut record = |state: &GridState, step: u64, report: &mut RunReport| -> Result<bool> {
        let (l2, linf) = match &reference {
            Some((n_ref, p_ref)) => norms(state, n_ref, p_ref)?,
            None => (f64::NAN, f64::NAN),
        };
        let (pn, pp) = state.probe(config.probe_x);
        report.snapshots.push(Snapshot {
            index: report.snapshots.len(),
            step,
            t: state.t,
            n_values: state.n_values.clone(),
            p_values: state.p_values.clone(),
        });
        report.times.push(state.t);
        report.l2_series.push(l2);
        report.linf_series.push(linf);
        report.probe_n.push(pn);
        report.probe_p.push(pp);
        if reference.is_some() && linf <= config.steady_tol {
            below_tol += 1;
        } else {
            below_tol = 0;
        }
        Ok(below_tol >= 2)
    };

    let mut converged = record(&state, 0, &mut report)?;
    let mut k = 0u64;
    while !converged && k < total_steps {
        advance(&mut state, dp, dt, &mut buf, |n, p| {
            reaction_unchecked(n, p, params)
        });
        k += 1;
        state.t = t0 + k as f64 * dt;
        if !state.is_finite() {
            return Err(Error::NonFiniteState {
                step: k,
                t: state.t,
            });
        }
        if k.is_multiple_of(stride) || k == total_steps {
            converged = record(&state, k, &mut report)?;
        }
    }

    report.converged = converged;
    report.t_final = state.t;
    report.steps = k;
    report.final_state = state;
    Ok(report)
}
