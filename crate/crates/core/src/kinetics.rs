//! Dimensionless reaction model of the ratio-dependent predator-prey system.
//!
//! Prey `n` grows logistically and is consumed through the ratio-dependent
//! response `alpha * n * p / (p + n)`. Predator mortality rises from
//! `gamma` toward `delta` as predators become abundant.

use crate::error::{Error, Result};

/// Dimensionless reaction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams {
    /// Predation rate.
    pub alpha: f64,
    /// Minimal predator mortality.
    pub gamma: f64,
    /// Limiting predator mortality.
    pub delta: f64,
    /// Predator time-scale.
    pub epsilon: f64,
    /// Carrying capacity over interference constant.
    pub beta: f64,
}

impl Default for KineticParams {
    /// The parameter set used in the reference experiments.
    fn default() -> Self {
        Self {
            alpha: 1.1,
            gamma: 0.05,
            delta: 0.5,
            epsilon: 1.0,
            beta: 1.0,
        }
    }
}

impl KineticParams {
    pub fn new(alpha: f64, gamma: f64, delta: f64, epsilon: f64, beta: f64) -> Result<Self> {
        let params = Self {
            alpha,
            gamma,
            delta,
            epsilon,
            beta,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks strict positivity of every field and `gamma <= delta`.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("beta", self.beta),
        ] {
            positive(name, value)?;
        }
        if self.gamma > self.delta {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("gamma = {} exceeds delta = {}", self.gamma, self.delta),
            });
        }
        Ok(())
    }
}

/// Parameters of the model in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalParams {
    /// Intrinsic prey growth rate.
    pub r: f64,
    /// Prey carrying capacity.
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    /// Minimal predator mortality.
    pub gamma_dim: f64,
    /// Limiting predator mortality.
    pub delta_dim: f64,
    /// Prey diffusivity.
    pub d1_dim: f64,
    /// Predator diffusivity.
    pub d2_dim: f64,
    /// Habitat length.
    pub l_dim: f64,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("r", self.r),
            ("K", self.k),
            ("a", self.a),
            ("b", self.b),
            ("m", self.m),
            ("gamma_dim", self.gamma_dim),
            ("delta_dim", self.delta_dim),
            ("D1", self.d1_dim),
            ("D2", self.d2_dim),
            ("l_dim", self.l_dim),
        ] {
            positive(name, value)?;
        }
        if self.gamma_dim > self.delta_dim {
            return Err(Error::InvalidParameter {
                name: "gamma_dim",
                reason: format!(
                    "gamma_dim = {} exceeds delta_dim = {}",
                    self.gamma_dim, self.delta_dim
                ),
            });
        }
        Ok(())
    }
}

/// Result of [`nondimensionalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondimensional {
    pub kinetic: KineticParams,
    pub d1: f64,
    pub d2: f64,
    pub l: f64,
}

/// Rescales time by `r`, prey by `K` and predators by `K / m`.
pub fn nondimensionalize(dp: &DimensionalParams) -> Result<Nondimensional> {
    dp.validate()?;
    let kinetic = KineticParams {
        alpha: dp.a / (dp.m * dp.r),
        gamma: dp.gamma_dim / dp.b,
        delta: dp.delta_dim / dp.b,
        epsilon: dp.b / dp.r,
        beta: dp.k / dp.m,
    };
    Ok(Nondimensional {
        kinetic,
        d1: dp.d1_dim / dp.r,
        d2: dp.d2_dim / dp.r,
        l: dp.l_dim,
    })
}

/// Predator mortality `(gamma + delta*beta*p) / (1 + beta*p)`.
pub fn mortality(p: f64, params: &KineticParams) -> f64 {
    (params.gamma + params.delta * params.beta * p) / (1.0 + params.beta * p)
}

/// Reaction rates `(F1, F2)` at `(n, p)`. Both vanish at the origin.
pub fn reaction_terms(n: f64, p: f64, params: &KineticParams) -> Result<(f64, f64)> {
    if !(n >= 0.0) || !(p >= 0.0) {
        return Err(Error::Domain(format!(
            "densities must be nonnegative, got n = {n}, p = {p}"
        )));
    }
    Ok(reaction_unchecked(n, p, params))
}

/// [`reaction_terms`] without the sign check, for the solver's inner loop.
#[inline]
pub(crate) fn reaction_unchecked(n: f64, p: f64, params: &KineticParams) -> (f64, f64) {
    let total = n + p;
    if total == 0.0 {
        return (0.0, 0.0);
    }
    let f1 = n * (1.0 - n) - params.alpha * n * p / total;
    let f2 = params.epsilon * p * (n / total - mortality(p, params));
    (f1, f2)
}

/// Prey null-cline `H1(n) = (1 - n) n / (alpha - (1 - n))`.
pub fn prey_nullcline(n: f64, params: &KineticParams) -> Result<f64> {
    let denom = params.alpha - (1.0 - n);
    if denom == 0.0 {
        return Err(Error::Singularity { n });
    }
    Ok((1.0 - n) * n / denom)
}

/// Predator null-cline: nonnegative root of
/// `delta*beta*P^2 + (gamma - beta(1-delta)n) P - (1-gamma) n = 0`.
pub fn predator_nullcline(n: f64, params: &KineticParams) -> Result<f64> {
    if params.gamma >= 1.0 {
        return Err(Error::Domain(format!(
            "gamma = {} >= 1 leaves no positive predator null-cline",
            params.gamma
        )));
    }
    if !(n >= 0.0) {
        return Err(Error::Domain(format!(
            "prey density must be nonnegative, got {n}"
        )));
    }
    Ok(predator_nullcline_unchecked(n, params))
}

fn predator_nullcline_unchecked(n: f64, params: &KineticParams) -> f64 {
    let KineticParams {
        gamma, delta, beta, ..
    } = *params;
    let lin = gamma - beta * (1.0 - delta) * n;
    let c = (1.0 - gamma) * n;
    let disc = (lin * lin + 4.0 * beta * delta * c).sqrt();
    // Avoid cancellation when lin > 0 by using the product of roots.
    if lin > 0.0 {
        2.0 * c / (lin + disc)
    } else {
        (disc - lin) / (2.0 * beta * delta)
    }
}

/// Entries of the kinetic Jacobian at an interior point, written as
/// `A = [[theta1, -theta2], [theta3, -theta4]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thetas {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub trace_a: f64,
    pub det_a: f64,
}

pub fn jacobian_thetas(n_bar: f64, p_bar: f64, params: &KineticParams) -> Result<Thetas> {
    if !(n_bar > 0.0) || !(p_bar > 0.0) {
        return Err(Error::Domain(format!(
            "Jacobian needs an interior point, got ({n_bar}, {p_bar})"
        )));
    }
    let KineticParams {
        alpha,
        gamma,
        delta,
        epsilon,
        beta,
    } = *params;
    let s2 = (p_bar + n_bar).powi(2);
    let theta1 = -n_bar + alpha * n_bar * p_bar / s2;
    let theta2 = alpha * n_bar * n_bar / s2;
    let theta3 = epsilon * p_bar * p_bar / s2;
    let theta4 = epsilon * beta * p_bar * (delta - gamma) / (1.0 + beta * p_bar).powi(2)
        + epsilon * n_bar * p_bar / s2;
    Ok(Thetas {
        theta1,
        theta2,
        theta3,
        theta4,
        trace_a: theta1 - theta4,
        det_a: theta2 * theta3 - theta1 * theta4,
    })
}

/// Positive steady state of the kinetic system with its Jacobian summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub n_bar: f64,
    pub p_bar: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub trace_a: f64,
    pub det_a: f64,
    /// Number of interior roots found by the bracketing scan. Values above
    /// one mean the returned point was selected among several.
    pub multiplicity: usize,
}

impl Equilibrium {
    /// Builds an equilibrium record from a point and its Jacobian entries.
    pub fn from_thetas(n_bar: f64, p_bar: f64, t: Thetas, multiplicity: usize) -> Self {
        Self {
            n_bar,
            p_bar,
            theta1: t.theta1,
            theta2: t.theta2,
            theta3: t.theta3,
            theta4: t.theta4,
            trace_a: t.trace_a,
            det_a: t.det_a,
            multiplicity,
        }
    }

    pub fn thetas(&self) -> Thetas {
        Thetas {
            theta1: self.theta1,
            theta2: self.theta2,
            theta3: self.theta3,
            theta4: self.theta4,
            trace_a: self.trace_a,
            det_a: self.det_a,
        }
    }

    pub fn has_multiple_roots(&self) -> bool {
        self.multiplicity > 1
    }
}

/// Default residual tolerance on `|H1 - H2|` for the equilibrium bisection.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;
const MAX_BISECTION_ITERS: usize = 200;
const SCAN_CELLS: usize = 4000;
const EDGE: f64 = 1e-9;

fn check_equilibrium_params(params: &KineticParams) -> Result<()> {
    if params.gamma >= 1.0 {
        return Err(Error::Domain(format!(
            "gamma = {} >= 1: no interior equilibrium can exist",
            params.gamma
        )));
    }
    params.validate()
}

fn search_bracket(params: &KineticParams) -> (f64, f64) {
    (EDGE.max(1.0 - params.alpha) + EDGE, 1.0 - EDGE)
}

fn nullcline_gap(n: f64, params: &KineticParams) -> f64 {
    (1.0 - n) * n / (params.alpha - (1.0 - n)) - predator_nullcline_unchecked(n, params)
}

/// Every interior root `(n, p)` of `H1 - H2` found by the bracketing scan,
/// in increasing `n`.
pub fn interior_roots(params: &KineticParams) -> Result<Vec<(f64, f64)>> {
    interior_roots_with_tol(params, EQUILIBRIUM_TOL)
}

pub fn interior_roots_with_tol(params: &KineticParams, tol: f64) -> Result<Vec<(f64, f64)>> {
    check_equilibrium_params(params)?;
    let (lower, upper) = search_bracket(params);
    let g = |n: f64| nullcline_gap(n, params);
    let width = (upper - lower) / SCAN_CELLS as f64;

    let mut roots = Vec::new();
    let mut a = lower;
    let mut ga = g(a);
    for i in 1..=SCAN_CELLS {
        let b = if i == SCAN_CELLS {
            upper
        } else {
            lower + width * i as f64
        };
        let gb = g(b);
        if ga == 0.0 {
            roots.push(a);
        } else if ga.signum() != gb.signum() && gb != 0.0 {
            roots.push(bisect(&g, a, b, ga, tol));
        }
        a = b;
        ga = gb;
    }
    Ok(roots
        .into_iter()
        .map(|n| (n, (1.0 - n) * n / (params.alpha - (1.0 - n))))
        .collect())
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut g_lo: f64, tol: f64) -> f64 {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTION_ITERS {
        mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        // a small residual alone is not enough where the gap is flat
        let narrow = hi - lo <= 4.0 * f64::EPSILON * mid;
        if g_mid == 0.0 || (g_mid.abs() <= tol && narrow) || mid <= lo || mid >= hi {
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Finds the positive equilibrium.
///
/// When the null-clines cross more than once, non-saddle roots (`det A > 0`)
/// are preferred and the smallest such `n` is returned; `multiplicity`
/// records how many crossings were seen.
pub fn find_equilibrium(params: &KineticParams) -> Result<Equilibrium> {
    find_equilibrium_with_tol(params, EQUILIBRIUM_TOL)
}

pub fn find_equilibrium_with_tol(params: &KineticParams, tol: f64) -> Result<Equilibrium> {
    let roots = interior_roots_with_tol(params, tol)?;
    let candidates: Vec<Equilibrium> = roots
        .iter()
        .filter(|&&(n, p)| n > 0.0 && n < 1.0 && p > 0.0)
        .map(|&(n, p)| {
            jacobian_thetas(n, p, params).map(|t| Equilibrium::from_thetas(n, p, t, roots.len()))
        })
        .collect::<Result<_>>()?;

    candidates
        .iter()
        .find(|eq| eq.det_a > 0.0)
        .or_else(|| candidates.first())
        .copied()
        .ok_or_else(|| {
            let (lower, upper) = search_bracket(params);
            Error::NoInteriorEquilibrium { lower, upper }
        })
}

/// Kinetic (diffusion-free) stability of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KineticVerdict {
    Stable,
    Unstable,
}

pub fn kinetic_stability(thetas: &Thetas) -> KineticVerdict {
    if thetas.trace_a < 0.0 && thetas.det_a > 0.0 {
        KineticVerdict::Stable
    } else {
        KineticVerdict::Unstable
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be strictly positive and finite, got {value}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference_set() -> KineticParams {
        KineticParams::default()
    }

    /// Central-difference Jacobian of the reaction terms, mapped onto the
    /// sign convention of [`Thetas`].
    fn fd_thetas(n: f64, p: f64, params: &KineticParams) -> [f64; 4] {
        // steps scale with the state so tiny equilibria stay resolved
        let (hn, hp) = (1e-4 * n.min(1.0), 1e-4 * p.min(1.0));
        let f = |n, p| reaction_terms(n, p, params).unwrap();
        let (f1_np, f2_np) = f(n + hn, p);
        let (f1_nm, f2_nm) = f(n - hn, p);
        let (f1_pp, f2_pp) = f(n, p + hp);
        let (f1_pm, f2_pm) = f(n, p - hp);
        [
            (f1_np - f1_nm) / (2.0 * hn),
            -(f1_pp - f1_pm) / (2.0 * hp),
            (f2_np - f2_nm) / (2.0 * hn),
            -(f2_pp - f2_pm) / (2.0 * hp),
        ]
    }

    /// Plain bisection on `H1 - H2` over a caller-supplied bracket.
    fn bisection_oracle(params: &KineticParams, mut lo: f64, mut hi: f64) -> f64 {
        let g = |n: f64| {
            let h1 = (1.0 - n) * n / (params.alpha - (1.0 - n));
            let b = params.gamma - params.beta * (1.0 - params.delta) * n;
            let h2 = (-b
                + (b * b + 4.0 * params.beta * params.delta * (1.0 - params.gamma) * n).sqrt())
                / (2.0 * params.beta * params.delta);
            h1 - h2
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn reaction_terms_examples() {
        let p = reference_set();
        assert_eq!(reaction_terms(0.0, 0.0, &p).unwrap(), (0.0, 0.0));
        assert_eq!(reaction_terms(1.0, 0.0, &p).unwrap(), (0.0, 0.0));
        let (f1, f2) = reaction_terms(0.5, 0.5, &p).unwrap();
        assert!((f1 + 0.025).abs() < 1e-15);
        assert!((f2 - 0.15).abs() < 1e-15);
        let (f1, f2) = reaction_terms(0.113585, 0.471397, &p).unwrap();
        assert!(f1.abs() < 1e-5 && f2.abs() < 1e-5, "{f1} {f2}");
    }

    #[test]
    fn reaction_terms_rejects_negative_densities() {
        assert!(matches!(
            reaction_terms(-0.1, 0.2, &reference_set()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            reaction_terms(0.1, -1e-300, &reference_set()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn mortality_examples() {
        let p = reference_set();
        assert_eq!(mortality(0.0, &p), p.gamma);
        assert!((mortality(1.0, &p) - 0.275).abs() < 1e-15);
        assert!((mortality(1e12, &p) - p.delta).abs() < 1e-9);
    }

    #[test]
    fn prey_nullcline_examples() {
        let p = reference_set();
        assert_eq!(prey_nullcline(1.0, &p).unwrap(), 0.0);
        assert!((prey_nullcline(0.113585, &p).unwrap() - 0.471397).abs() < 1e-5);
        assert!((prey_nullcline(0.5, &p).unwrap() - 0.25 / 0.6).abs() < 1e-15);
        let sub = KineticParams { alpha: 0.5, ..p };
        assert!(matches!(
            prey_nullcline(0.5, &sub),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn predator_nullcline_examples() {
        let p = reference_set();
        assert_eq!(predator_nullcline(0.0, &p).unwrap(), 0.0);
        assert!((predator_nullcline(0.113585, &p).unwrap() - 0.471397).abs() < 1e-5);
        // 0.5 P^2 - 0.2 P - 0.475 = 0
        let oracle = (0.2 + (0.04f64 + 4.0 * 0.5 * 0.475).sqrt()) / 1.0;
        assert!((predator_nullcline(0.5, &p).unwrap() - oracle).abs() < 1e-14);
        assert!((oracle - 1.19499).abs() < 1e-5);
        let bad = KineticParams {
            gamma: 1.0,
            delta: 2.0,
            ..p
        };
        assert!(matches!(
            predator_nullcline(0.5, &bad),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn equilibrium_matches_reference_values() {
        let eq = find_equilibrium(&reference_set()).unwrap();
        assert!((eq.n_bar - 0.113585).abs() < 1e-5);
        assert!((eq.p_bar - 0.471397).abs() < 1e-5);
        let gap = prey_nullcline(eq.n_bar, &reference_set()).unwrap()
            - predator_nullcline(eq.n_bar, &reference_set()).unwrap();
        assert!(gap.abs() <= 1e-12);
        // the saddle crossing near n = 0.017 is also reported
        assert_eq!(eq.multiplicity, 2);
        let roots = interior_roots(&reference_set()).unwrap();
        assert!((roots[0].0 - 0.0170816).abs() < 1e-6);
        let saddle = jacobian_thetas(roots[0].0, roots[0].1, &reference_set()).unwrap();
        assert!(saddle.det_a < 0.0);
    }

    #[test]
    fn equilibrium_against_bisection_oracle() {
        // alpha < 1: the bracket starts just right of the prey null-cline asymptote
        let params = KineticParams::new(0.9, 0.1, 0.6, 1.0, 1.0).unwrap();
        let eq = find_equilibrium(&params).unwrap();
        let oracle = bisection_oracle(&params, 0.1 + 1e-6, 1.0 - 1e-9);
        assert!(
            (eq.n_bar - oracle).abs() < 1e-10,
            "{} vs {oracle}",
            eq.n_bar
        );
        assert_eq!(eq.multiplicity, 1);
        assert!((eq.n_bar - 0.39205).abs() < 1e-3);
    }

    #[test]
    fn no_crossing_means_no_interior_equilibrium() {
        // H1 - H2 stays negative on (0, 1) for this set
        let params = KineticParams::new(1.2, 0.1, 0.6, 1.0, 1.0).unwrap();
        let negative_everywhere = (1..1000).all(|i| {
            let n = i as f64 / 1000.0;
            prey_nullcline(n, &params).unwrap() < predator_nullcline(n, &params).unwrap()
        });
        assert!(negative_everywhere);
        assert!(matches!(
            find_equilibrium(&params),
            Err(Error::NoInteriorEquilibrium { .. })
        ));
    }

    #[test]
    fn equilibrium_rejects_gamma_at_or_above_one() {
        let p = KineticParams {
            gamma: 1.0,
            delta: 1.5,
            ..reference_set()
        };
        assert!(matches!(find_equilibrium(&p), Err(Error::Domain(_))));
        let p = KineticParams {
            gamma: 0.999_999,
            delta: 1.5,
            ..reference_set()
        };
        assert!(!matches!(find_equilibrium(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn thetas_match_finite_differences_at_reference_equilibrium() {
        let eq = find_equilibrium(&reference_set()).unwrap();
        let fd = fd_thetas(eq.n_bar, eq.p_bar, &reference_set());
        let got = [eq.theta1, eq.theta2, eq.theta3, eq.theta4];
        for (g, f) in got.iter().zip(fd) {
            assert!(((g - f) / f).abs() < 1e-6, "{g} vs {f}");
        }
        let expected = [0.05853, 0.04147, 0.64937, 0.25445];
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-5);
        }
        assert!((eq.trace_a + 0.19592).abs() < 1e-5);
        assert!((eq.det_a - 0.012037).abs() < 2e-6);
        assert_eq!(kinetic_stability(&eq.thetas()), KineticVerdict::Stable);
    }

    #[test]
    fn theta4_without_mortality_slope() {
        let p = KineticParams {
            delta: 0.05,
            ..reference_set()
        };
        let t = jacobian_thetas(0.3, 0.4, &p).unwrap();
        assert_eq!(t.theta4, p.epsilon * 0.3 * 0.4 / 0.7f64.powi(2));
    }

    #[test]
    fn kinetic_stability_sign_checks() {
        let t = Thetas {
            theta1: 1.0,
            theta2: 0.1,
            theta3: 0.1,
            theta4: 0.5,
            trace_a: 0.5,
            det_a: 0.01 - 0.5,
        };
        assert_eq!(kinetic_stability(&t), KineticVerdict::Unstable);
        let t = jacobian_thetas(0.8, 0.05, &reference_set()).unwrap();
        assert!(t.theta1 <= 0.0);
        assert_eq!(kinetic_stability(&t), KineticVerdict::Stable);
    }

    #[test]
    fn nondimensionalize_examples() {
        let dp = DimensionalParams {
            r: 1.0,
            k: 1.0,
            a: 1.1,
            b: 1.0,
            m: 1.0,
            gamma_dim: 0.3,
            delta_dim: 0.3,
            d1_dim: 0.005,
            d2_dim: 0.2,
            l_dim: 1.0,
        };
        let nd = nondimensionalize(&dp).unwrap();
        assert_eq!(nd.kinetic.alpha, 1.1);
        assert_eq!(nd.kinetic.epsilon, 1.0);
        assert_eq!(nd.kinetic.beta, 1.0);
        assert_eq!(nd.kinetic.gamma, nd.kinetic.delta);
        let nd = nondimensionalize(&DimensionalParams {
            r: 2.0,
            m: 0.5,
            ..dp
        })
        .unwrap();
        assert!((nd.kinetic.alpha - 1.1).abs() < 1e-15);
        assert_eq!(nd.d1, 0.0025);
        let bad = DimensionalParams {
            gamma_dim: 0.4,
            ..dp
        };
        assert!(nondimensionalize(&bad).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(KineticParams::new(1.1, 0.6, 0.5, 1.0, 1.0).is_err());
        assert!(KineticParams::new(1.1, 0.05, 0.5, 0.0, 1.0).is_err());
        assert!(KineticParams::new(1.1, 0.05, 0.05, 1.0, 1.0).is_ok());
    }

    fn params_strategy() -> impl Strategy<Value = KineticParams> {
        (
            1.0f64..3.0,
            0.01f64..0.9,
            0.0f64..1.0,
            0.1f64..5.0,
            0.1f64..5.0,
        )
            .prop_map(|(alpha, gamma, extra, epsilon, beta)| KineticParams {
                alpha,
                gamma,
                delta: gamma + extra,
                epsilon,
                beta,
            })
    }

    proptest! {
        #[test]
        fn prey_nullcline_zeroes_f1(params in params_strategy(), n in 0.01f64..0.99) {
            let p = prey_nullcline(n, &params).unwrap();
            prop_assume!(p >= 0.0);
            let (f1, _) = reaction_terms(n, p, &params).unwrap();
            prop_assert!(f1.abs() < 1e-12, "f1 = {}", f1);
        }

        #[test]
        fn predator_nullcline_zeroes_f2(params in params_strategy(), n in 1e-3f64..10.0) {
            let p = predator_nullcline(n, &params).unwrap();
            let (_, f2) = reaction_terms(n, p, &params).unwrap();
            prop_assert!(f2.abs() < 1e-10, "f2 = {}", f2);
        }

        #[test]
        fn thetas_agree_with_finite_differences(params in params_strategy()) {
            // the closed forms use the equilibrium relations, so compare there
            let Ok(eq) = find_equilibrium(&params) else { return Ok(()) };
            let fd = fd_thetas(eq.n_bar, eq.p_bar, &params);
            for (g, f) in [eq.theta1, eq.theta2, eq.theta3, eq.theta4].iter().zip(fd) {
                let scale = f.abs().max(1e-3);
                prop_assert!((g - f).abs() / scale < 1e-6, "{} vs {}", g, f);
            }
            prop_assert!(eq.theta2 > 0.0 && eq.theta3 > 0.0 && eq.theta4 > 0.0);
        }

        #[test]
        fn mortality_is_monotone_and_bounded(params in params_strategy()) {
            let mut last = f64::NEG_INFINITY;
            for i in 0..500 {
                let q = mortality(i as f64 * 0.05, &params);
                prop_assert!(q >= last);
                prop_assert!(q >= params.gamma && q <= params.delta);
                last = q;
            }
        }

        #[test]
        fn equilibrium_is_stable_under_tighter_tolerance(params in params_strategy()) {
            if let Ok(eq) = find_equilibrium(&params) {
                let tight = find_equilibrium_with_tol(&params, EQUILIBRIUM_TOL / 10.0).unwrap();
                prop_assert!((eq.n_bar - tight.n_bar).abs() <= 1e-10);
                prop_assert!((eq.p_bar - tight.p_bar).abs() <= 1e-10);
            }
        }

        #[test]
        fn equilibrium_ignores_epsilon(params in params_strategy(), eps in 0.1f64..10.0) {
            if let Ok(eq) = find_equilibrium(&params) {
                let other = find_equilibrium(&KineticParams { epsilon: eps, ..params }).unwrap();
                prop_assert_eq!(eq.n_bar, other.n_bar);
                prop_assert_eq!(eq.p_bar, other.p_bar);
            }
        }
    }
}
