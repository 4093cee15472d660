//! Linear stability of the homogeneous equilibrium under diffusion.
//!
//! Perturbations proportional to `cos(j*pi*x/l)` evolve under the mode
//! matrix `B_j = A - zeta_j D`, with `zeta_j = (j*pi/l)^2` the Neumann
//! eigenvalues of `-d^2/dx^2` on `[0, l]`. Since `trace B_j < 0` whenever
//! the kinetics are stable, a mode destabilizes exactly when `det B_j < 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinetics::{kinetic_stability, Equilibrium, KineticVerdict};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub d1: f64,
    pub d2: f64,
    pub l: f64,
}

impl DiffusionParams {
    pub fn new(d1: f64, d2: f64, l: f64) -> Result<Self> {
        let dp = Self { d1, d2, l };
        dp.validate()?;
        Ok(dp)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("d1", self.d1), ("d2", self.d2), ("l", self.l)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be strictly positive and finite, got {value}"),
                });
            }
        }
        Ok(())
    }
}

/// `zeta_j = (j*pi/l)^2`.
pub fn mode_eigenvalue(j: u64, l: f64) -> f64 {
    let k = j as f64 * PI / l;
    k * k
}

/// `det B(zeta)` as a quadratic in `zeta`.
pub fn det_b(eq: &Equilibrium, d1: f64, d2: f64, zeta: f64) -> f64 {
    eq.det_a + zeta * (d1 * eq.theta4 - d2 * eq.theta1) + zeta * zeta * d1 * d2
}

pub fn trace_b(eq: &Equilibrium, d1: f64, d2: f64, zeta: f64) -> f64 {
    eq.trace_a - zeta * (d1 + d2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMode {
    pub j: u64,
    pub zeta: f64,
    pub trace_b: f64,
    pub det_b: f64,
    /// Roots of `lambda^2 - trace_b*lambda + det_b`, larger real part first.
    pub eigenvalues: [Complex64; 2],
}

impl LinearMode {
    /// Entries of `B_j` in row-major order.
    pub fn matrix(eq: &Equilibrium, dp: &DiffusionParams, j: u64) -> [[f64; 2]; 2] {
        let zeta = mode_eigenvalue(j, dp.l);
        [
            [eq.theta1 - zeta * dp.d1, -eq.theta2],
            [eq.theta3, -eq.theta4 - zeta * dp.d2],
        ]
    }

    pub fn is_growing(&self) -> bool {
        self.eigenvalues[0].re > 0.0
    }
}

pub fn mode_matrix(eq: &Equilibrium, dp: &DiffusionParams, j: u64) -> LinearMode {
    let zeta = mode_eigenvalue(j, dp.l);
    let tr = trace_b(eq, dp.d1, dp.d2, zeta);
    let det = det_b(eq, dp.d1, dp.d2, zeta);
    LinearMode {
        j,
        zeta,
        trace_b: tr,
        det_b: det,
        eigenvalues: quadratic_eigenvalues(tr, det),
    }
}

fn quadratic_eigenvalues(trace: f64, det: f64) -> [Complex64; 2] {
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // larger-magnitude root first, the other from the product to avoid cancellation
        let big = if half >= 0.0 {
            half + root
        } else {
            half - root
        };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (hi, lo) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, im), Complex64::new(half, -im)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    KineticUnstable,
    AsymptoticallyStable,
    TuringUnstable,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::KineticUnstable => "kinetic_unstable",
            VerdictKind::AsymptoticallyStable => "stable",
            VerdictKind::TuringUnstable => "turing_unstable",
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub kind: VerdictKind,
    /// Indices `j >= 1` with `det B_j < 0`; empty unless Turing unstable.
    pub unstable_modes: Vec<u64>,
    /// Minimum of `det B_j` over `j >= 0`.
    pub margin: f64,
    /// Continuous-wavenumber sufficient condition for instability:
    /// `d1*theta4 < d2*theta1` with positive discriminant. Informational only,
    /// it ignores the discreteness of `zeta_j`.
    pub continuum_unstable: bool,
    /// The transversality hypothesis needed for the nonlinear bifurcation
    /// (`(0, eta2)` not parallel to the second eigenvector of `B_1`) is not
    /// checked; always `false`.
    pub transversality_checked: bool,
}

/// How far a brute-force mode scan must go so that `zeta_j * d1 > theta1`
/// beyond it, which forces `det B_j > 0`.
pub fn brute_force_j_max(eq: &Equilibrium, d1: f64, l: f64) -> u64 {
    let reach = if eq.theta1 > 0.0 {
        (l * (eq.theta1 / d1).sqrt() / PI).ceil() as u64 + 2
    } else {
        0
    };
    reach.max(1000)
}

/// Real roots of `det B(zeta) = 0`, ascending, when they exist.
pub fn unstable_zeta_interval(eq: &Equilibrium, d1: f64, d2: f64) -> Option<(f64, f64)> {
    let a = d1 * d2;
    let b = d1 * eq.theta4 - d2 * eq.theta1;
    let c = eq.det_a;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = (q / a, c / q);
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if hi <= 0.0 {
        None
    } else {
        Some((lo, hi))
    }
}

/// Classifies `(d1, d2)` for the equilibrium.
///
/// Unstable modes come from the root interval of `det B(zeta)`: only integers
/// whose `zeta_j` falls inside it can have `det B_j < 0`, and each candidate
/// is confirmed by direct evaluation.
pub fn classify(eq: &Equilibrium, dp: &DiffusionParams) -> StabilityVerdict {
    let (d1, d2, l) = (dp.d1, dp.d2, dp.l);
    let interval = unstable_zeta_interval(eq, d1, d2);
    let b = d1 * eq.theta4 - d2 * eq.theta1;
    let continuum_unstable = b < 0.0 && interval.is_some();

    let mut unstable_modes = Vec::new();
    let mut margin = eq.det_a;
    if let Some((lo, hi)) = interval {
        let to_index = |zeta: f64| l * zeta.max(0.0).sqrt() / PI;
        let first = (to_index(lo).floor() as u64).saturating_sub(1).max(1);
        let last = to_index(hi).ceil() as u64 + 1;
        for j in first..=last {
            let det = det_b(eq, d1, d2, mode_eigenvalue(j, l));
            margin = margin.min(det);
            if det < 0.0 {
                unstable_modes.push(j);
            }
        }
    }
    // the vertex of the parabola bounds the minimum over all j
    let vertex = -b / (2.0 * d1 * d2);
    if vertex > 0.0 {
        let jv = l * vertex.sqrt() / PI;
        for j in [jv.floor() as u64, jv.ceil() as u64] {
            margin = margin.min(det_b(eq, d1, d2, mode_eigenvalue(j, l)));
        }
    } else {
        margin = margin.min(det_b(eq, d1, d2, mode_eigenvalue(1, l)));
    }

    let kind = if kinetic_stability(&eq.thetas()) == KineticVerdict::Unstable {
        unstable_modes.clear();
        VerdictKind::KineticUnstable
    } else if unstable_modes.is_empty() {
        VerdictKind::AsymptoticallyStable
    } else {
        VerdictKind::TuringUnstable
    };

    StabilityVerdict {
        kind,
        unstable_modes,
        margin,
        continuum_unstable,
        transversality_checked: false,
    }
}

/// Range of prey diffusivities `[theta1/zeta_2, theta1/zeta_1)` for which
/// mode 1 is the first to destabilize as `d2` grows.
pub fn d1_window(eq: &Equilibrium, l: f64) -> Result<(f64, f64)> {
    if !(eq.theta1 > 0.0) {
        return Err(Error::EmptyWindow { theta1: eq.theta1 });
    }
    Ok((
        eq.theta1 / mode_eigenvalue(2, l),
        eq.theta1 / mode_eigenvalue(1, l),
    ))
}

/// Relative tolerance for `det B_1 = 0` at the critical diffusivity.
pub const D2_CRIT_TOL: f64 = 1e-8;

/// Scale used to judge `det B_1` relative to its individual terms.
pub fn det_b_scale(eq: &Equilibrium, d1: f64, d2: f64, zeta: f64) -> f64 {
    (eq.theta2 * eq.theta3).abs()
        + (eq.theta1 * eq.theta4).abs()
        + zeta * (d1 * eq.theta4).abs()
        + zeta * (d2 * eq.theta1).abs()
        + zeta * zeta * d1 * d2
}

/// Predator diffusivity at which `det B_1` vanishes.
pub fn d2_critical(eq: &Equilibrium, d1: f64, l: f64) -> Result<f64> {
    if kinetic_stability(&eq.thetas()) == KineticVerdict::Unstable {
        return Err(Error::KineticallyUnstable {
            trace_a: eq.trace_a,
            det_a: eq.det_a,
        });
    }
    let (lower, upper) = d1_window(eq, l)?;
    if !(d1 >= lower && d1 < upper) {
        return Err(Error::WindowViolation { d1, lower, upper });
    }
    let z1 = mode_eigenvalue(1, l);
    let d2 = (eq.det_a + z1 * d1 * eq.theta4) / (z1 * (eq.theta1 - z1 * d1));

    let residual = det_b(eq, d1, d2, z1);
    let scale = det_b_scale(eq, d1, d2, z1);
    if !(residual.abs() <= D2_CRIT_TOL * scale) {
        return Err(Error::Postcondition(format!(
            "det B1 = {residual:e} at d2_crit = {d2}, scale {scale:e}"
        )));
    }
    Ok(d2)
}

/// Default relative tolerance for accepting a matrix as singular.
pub const SINGULAR_TOL: f64 = 1e-6;

fn inf_norm(m: &[[f64; 2]; 2]) -> f64 {
    (m[0][0].abs() + m[0][1].abs()).max(m[1][0].abs() + m[1][1].abs())
}

/// Unit kernel vector of a (numerically) singular 2x2 matrix, oriented so
/// the second component is positive (or the first, when the second is 0).
pub fn kernel_vector(m: &[[f64; 2]; 2]) -> Result<(f64, f64)> {
    kernel_vector_with_tol(m, SINGULAR_TOL)
}

pub fn kernel_vector_with_tol(m: &[[f64; 2]; 2], tol: f64) -> Result<(f64, f64)> {
    let norm = inf_norm(m);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let tolerance = tol * norm * norm;
    if !(det.abs() <= tolerance) || norm == 0.0 {
        return Err(Error::NotSingular { det, tolerance });
    }
    // Smallest right singular vector: eigenvector of M^T M for its smaller
    // eigenvalue, built from the row of (M^T M - sigma I) with more weight.
    let g11 = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let g12 = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let g22 = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let half_tr = 0.5 * (g11 + g22);
    let gap = (0.25 * (g11 - g22).powi(2) + g12 * g12).sqrt();
    let sigma_min = (g11 * g22 - g12 * g12) / (half_tr + gap);
    let (r1, r2) = ((g11 - sigma_min, g12), (g12, g22 - sigma_min));
    let row = if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) {
        r1
    } else {
        r2
    };
    let (mut e1, mut e2) = (-row.1, row.0);
    let len = e1.hypot(e2);
    e1 /= len;
    e2 /= len;
    if e2 < 0.0 || (e2 == 0.0 && e1 < 0.0) {
        e1 = -e1;
        e2 = -e2;
    }
    Ok((e1, e2))
}

/// Kernel vector of `B_1` at `(d1, d2)`, normally with `d2 = d2_crit`.
pub fn critical_eigenvector(eq: &Equilibrium, d1: f64, d2: f64, l: f64) -> Result<(f64, f64)> {
    let dp = DiffusionParams { d1, d2, l };
    kernel_vector(&LinearMode::matrix(eq, &dp, 1))
}

/// First-order description of the bifurcating pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSpec {
    pub s: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub d2_crit: f64,
}

impl PatternSpec {
    /// Critical diffusivity and eigenvector at `d1`, with amplitude `s`.
    pub fn at_critical(eq: &Equilibrium, d1: f64, l: f64, s: f64) -> Result<Self> {
        let d2_crit = d2_critical(eq, d1, l)?;
        let (eta1, eta2) = critical_eigenvector(eq, d1, d2_crit, l)?;
        Ok(Self {
            s,
            eta1,
            eta2,
            d2_crit,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternProfile {
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    /// Set when a value left `[0, 1] x [0, inf)`; the first-order formula
    /// is no longer physically meaningful there.
    pub clipped: bool,
}

/// `u(x) = u_bar + s * eta * cos(pi x / l)` sampled at `xs`.
pub fn small_amplitude_pattern(
    eq: &Equilibrium,
    ps: &PatternSpec,
    xs: &[f64],
    l: f64,
) -> Result<PatternProfile> {
    let mut n = Vec::with_capacity(xs.len());
    let mut p = Vec::with_capacity(xs.len());
    let slack = 1e-12 * l;
    for &x in xs {
        if !(x >= -slack && x <= l + slack) {
            return Err(Error::Domain(format!("grid point {x} outside [0, {l}]")));
        }
        let c = (PI * x / l).cos();
        n.push(eq.n_bar + ps.s * ps.eta1 * c);
        p.push(eq.p_bar + ps.s * ps.eta2 * c);
    }
    let clipped = n.iter().any(|&v| !(0.0..=1.0).contains(&v)) || p.iter().any(|&v| v < 0.0);
    Ok(PatternProfile { n, p, clipped })
}
