//! Line-oriented `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;
use turing_rd::kinetics::{nondimensionalize, DimensionalParams, KineticParams};

/// Every recognised key with its default, shown by `--help`.
pub const CONFIG_HELP: &str = "\
Configuration file: one `key = value` per line, `#` starts a comment.

Kinetic parameters (default block):
  alpha = 1.1   gamma = 0.05   delta = 0.5   epsilon = 1   beta = 1
Dimensional block (replaces the kinetic block; all ten keys required):
  r  K  a  b  m  gamma_dim  delta_dim  D1  D2  l_dim
Diffusion and domain:
  d1 = 0.005   d2 = 0.2   l = 1
Solver:
  h = 0.005   dt = auto   dt_safety = 0.95   t_end = 1000
  snapshot_stride = auto   steady_tol = 1e-6   probe_x = 0.25
Run setup:
  s = 0.1   initial = pattern|equilibrium|file   initial_file = PATH
  reference = equilibrium|pattern|none   out = DIR
Sweep:
  d1_min = 0.001   d1_max = 0.008   d1_count = 50
  d2_min = 0.05    d2_max = 0.5     d2_count = 50";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: missing key `{key}`{context}")]
    MissingKey {
        line: usize,
        key: &'static str,
        context: String,
    },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    TypeError {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: invalid `{key}`: {reason}")]
    Invalid {
        line: usize,
        key: &'static str,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamBlock {
    Kinetic(KineticParams),
    Dimensional(DimensionalParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Equilibrium,
    Pattern,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Equilibrium,
    Pattern,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepRange {
    /// `count` evenly spaced values from `min` to `max` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + i as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ParamBlock,
    /// Explicit diffusivities and length. `None` falls back to the
    /// dimensional block, then to the defaults.
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub l: Option<f64>,
    pub h: f64,
    pub dt: Option<f64>,
    pub dt_safety: f64,
    pub t_end: f64,
    pub snapshot_stride: Option<u64>,
    pub steady_tol: f64,
    pub probe_x: f64,
    pub s: f64,
    pub initial: InitialKind,
    pub initial_file: Option<PathBuf>,
    pub reference: ReferenceKind,
    pub out: Option<PathBuf>,
    pub sweep_d1: SweepRange,
    pub sweep_d2: SweepRange,
}

pub const DEFAULT_D1: f64 = 0.005;
pub const DEFAULT_D2: f64 = 0.2;
pub const DEFAULT_L: f64 = 1.0;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: ParamBlock::Kinetic(KineticParams::default()),
            d1: None,
            d2: None,
            l: None,
            h: 0.005,
            dt: None,
            dt_safety: 0.95,
            t_end: 1000.0,
            snapshot_stride: None,
            steady_tol: 1e-6,
            probe_x: 0.25,
            s: 0.1,
            initial: InitialKind::Pattern,
            initial_file: None,
            reference: ReferenceKind::Equilibrium,
            out: None,
            sweep_d1: SweepRange {
                min: 0.001,
                max: 0.008,
                count: 50,
            },
            sweep_d2: SweepRange {
                min: 0.05,
                max: 0.5,
                count: 50,
            },
        }
    }
}

/// Dimensionless parameters after resolving the parameter block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub params: KineticParams,
    pub d1: f64,
    pub d2: f64,
    pub l: f64,
}

impl ExperimentConfig {
    /// Nondimensionalizes when needed and fills unset diffusion values.
    pub fn resolve(&self) -> turing_rd::Result<Resolved> {
        let (params, d1, d2, l) = match self.params {
            ParamBlock::Kinetic(k) => (k, DEFAULT_D1, DEFAULT_D2, DEFAULT_L),
            ParamBlock::Dimensional(d) => {
                let nd = nondimensionalize(&d)?;
                (nd.kinetic, nd.d1, nd.d2, nd.l)
            }
        };
        Ok(Resolved {
            params,
            d1: self.d1.unwrap_or(d1),
            d2: self.d2.unwrap_or(d2),
            l: self.l.unwrap_or(l),
        })
    }
}

const KINETIC_KEYS: [&str; 5] = ["alpha", "gamma", "delta", "epsilon", "beta"];
const DIMENSIONAL_KEYS: [&str; 10] = [
    "r",
    "K",
    "a",
    "b",
    "m",
    "gamma_dim",
    "delta_dim",
    "D1",
    "D2",
    "l_dim",
];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn type_error(&self, expected: &'static str) -> ConfigError {
        ConfigError::TypeError {
            line: self.line,
            key: self.key.to_string(),
            expected,
            value: self.value.to_string(),
        }
    }

    fn float(&self) -> Result<f64, ConfigError> {
        match self.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.type_error("a finite number")),
        }
    }

    fn count(&self) -> Result<usize, ConfigError> {
        self.value
            .parse::<usize>()
            .map_err(|_| self.type_error("a nonnegative integer"))
    }

    fn auto_or<T>(
        &self,
        parse: impl Fn(&Self) -> Result<T, ConfigError>,
    ) -> Result<Option<T>, ConfigError> {
        if self.value == "auto" {
            Ok(None)
        } else {
            parse(self).map(Some)
        }
    }
}

/// Parses a configuration document, applying defaults for absent keys.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                reason: format!("expected `key = value`, got `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(ConfigError::Syntax {
                line,
                reason: format!("`{key}` already set on line {}", prev.line),
            });
        }
        entries.push(Entry { line, key, value });
    }

    let mut cfg = ExperimentConfig::default();
    let mut kinetic = KineticParams::default();
    let mut dimensional = [f64::NAN; 10];
    let mut first_kinetic: Option<usize> = None;
    let mut first_dimensional: Option<usize> = None;
    let mut initial_line = 0;

    for e in &entries {
        if let Some(i) = DIMENSIONAL_KEYS.iter().position(|k| *k == e.key) {
            dimensional[i] = e.float()?;
            first_dimensional.get_or_insert(e.line);
            continue;
        }
        if KINETIC_KEYS.contains(&e.key) {
            first_kinetic.get_or_insert(e.line);
        }
        match e.key {
            "alpha" => kinetic.alpha = e.float()?,
            "gamma" => kinetic.gamma = e.float()?,
            "delta" => kinetic.delta = e.float()?,
            "epsilon" => kinetic.epsilon = e.float()?,
            "beta" => kinetic.beta = e.float()?,
            "d1" => cfg.d1 = Some(e.float()?),
            "d2" => cfg.d2 = Some(e.float()?),
            "l" => cfg.l = Some(e.float()?),
            "h" => cfg.h = e.float()?,
            "dt" => cfg.dt = e.auto_or(Entry::float)?,
            "dt_safety" => cfg.dt_safety = e.float()?,
            "t_end" => cfg.t_end = e.float()?,
            "snapshot_stride" => {
                cfg.snapshot_stride = e.auto_or(|e| e.count().map(|c| c as u64))?
            }
            "steady_tol" => cfg.steady_tol = e.float()?,
            "probe_x" => cfg.probe_x = e.float()?,
            "s" => cfg.s = e.float()?,
            "initial" => {
                initial_line = e.line;
                cfg.initial = match e.value {
                    "equilibrium" => InitialKind::Equilibrium,
                    "pattern" => InitialKind::Pattern,
                    "file" => InitialKind::File,
                    _ => return Err(e.type_error("one of equilibrium, pattern, file")),
                }
            }
            "initial_file" => cfg.initial_file = Some(PathBuf::from(e.value)),
            "reference" => {
                cfg.reference = match e.value {
                    "equilibrium" => ReferenceKind::Equilibrium,
                    "pattern" => ReferenceKind::Pattern,
                    "none" => ReferenceKind::None,
                    _ => return Err(e.type_error("one of equilibrium, pattern, none")),
                }
            }
            "out" => cfg.out = Some(PathBuf::from(e.value)),
            "d1_min" => cfg.sweep_d1.min = e.float()?,
            "d1_max" => cfg.sweep_d1.max = e.float()?,
            "d1_count" => cfg.sweep_d1.count = e.count()?,
            "d2_min" => cfg.sweep_d2.min = e.float()?,
            "d2_max" => cfg.sweep_d2.max = e.float()?,
            "d2_count" => cfg.sweep_d2.count = e.count()?,
            other => {
                return Err(ConfigError::UnknownKey {
                    line: e.line,
                    key: other.to_string(),
                })
            }
        }
    }

    cfg.params = match first_dimensional {
        None => ParamBlock::Kinetic(kinetic),
        Some(dline) => {
            if let Some(kline) = first_kinetic {
                return Err(ConfigError::Syntax {
                    line: kline.max(dline),
                    reason: "kinetic and dimensional parameter blocks are mutually exclusive"
                        .into(),
                });
            }
            if let Some(i) = dimensional.iter().position(|v| v.is_nan()) {
                return Err(ConfigError::MissingKey {
                    line: dline,
                    key: DIMENSIONAL_KEYS[i],
                    context: " (dimensional block started here)".into(),
                });
            }
            let [r, k, a, b, m, gamma_dim, delta_dim, d1_dim, d2_dim, l_dim] = dimensional;
            ParamBlock::Dimensional(DimensionalParams {
                r,
                k,
                a,
                b,
                m,
                gamma_dim,
                delta_dim,
                d1_dim,
                d2_dim,
                l_dim,
            })
        }
    };

    if cfg.initial == InitialKind::File && cfg.initial_file.is_none() {
        return Err(ConfigError::MissingKey {
            line: initial_line,
            key: "initial_file",
            context: " (required by `initial = file`)".into(),
        });
    }

    let line_of = |key: &str| entries.iter().find(|e| e.key == key).map_or(0, |e| e.line);
    validate(&cfg, line_of)?;
    Ok(cfg)
}

/// Structural checks. Kinetic domain checks happen at analysis time.
fn validate(cfg: &ExperimentConfig, line_of: impl Fn(&str) -> usize) -> Result<(), ConfigError> {
    let fail = |key: &'static str, reason: String| {
        Err(ConfigError::Invalid {
            line: line_of(key),
            key,
            reason,
        })
    };
    let positive: [(&'static str, Option<f64>); 7] = [
        ("d1", cfg.d1),
        ("d2", cfg.d2),
        ("l", cfg.l),
        ("h", Some(cfg.h)),
        ("dt", cfg.dt),
        ("d1_min", Some(cfg.sweep_d1.min)),
        ("d2_min", Some(cfg.sweep_d2.min)),
    ];
    for (key, value) in positive {
        if let Some(v) = value {
            if v <= 0.0 {
                return fail(key, format!("must be positive, got {v}"));
            }
        }
    }
    if !(cfg.dt_safety > 0.0 && cfg.dt_safety <= 1.0) {
        return fail(
            "dt_safety",
            format!("must lie in (0, 1], got {}", cfg.dt_safety),
        );
    }
    if cfg.t_end < 0.0 {
        return fail("t_end", format!("must be nonnegative, got {}", cfg.t_end));
    }
    if cfg.snapshot_stride == Some(0) {
        return fail("snapshot_stride", "must be at least 1".into());
    }
    if cfg.steady_tol < 0.0 {
        return fail(
            "steady_tol",
            format!("must be nonnegative, got {}", cfg.steady_tol),
        );
    }
    if cfg.s < 0.0 {
        return fail("s", format!("must be nonnegative, got {}", cfg.s));
    }
    for (name, range) in [("d1", &cfg.sweep_d1), ("d2", &cfg.sweep_d2)] {
        let (count_key, max_key) = if name == "d1" {
            ("d1_count", "d1_max")
        } else {
            ("d2_count", "d2_max")
        };
        if range.count < 2 {
            return fail(
                count_key,
                format!("must be at least 2, got {}", range.count),
            );
        }
        if range.max <= range.min {
            return fail(
                max_key,
                format!("must exceed the minimum {}, got {}", range.min, range.max),
            );
        }
    }
    Ok(())
}

/// Writes every setting back as a document that [`parse_config`] accepts.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut put = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    match cfg.params {
        ParamBlock::Kinetic(k) => {
            for (key, v) in KINETIC_KEYS
                .iter()
                .zip([k.alpha, k.gamma, k.delta, k.epsilon, k.beta])
            {
                put(key, v.to_string());
            }
        }
        ParamBlock::Dimensional(d) => {
            let values = [
                d.r,
                d.k,
                d.a,
                d.b,
                d.m,
                d.gamma_dim,
                d.delta_dim,
                d.d1_dim,
                d.d2_dim,
                d.l_dim,
            ];
            for (key, v) in DIMENSIONAL_KEYS.iter().zip(values) {
                put(key, v.to_string());
            }
        }
    }
    for (key, v) in [("d1", cfg.d1), ("d2", cfg.d2), ("l", cfg.l)] {
        if let Some(v) = v {
            put(key, v.to_string());
        }
    }
    put("h", cfg.h.to_string());
    put("dt", cfg.dt.map_or("auto".into(), |v| v.to_string()));
    put("dt_safety", cfg.dt_safety.to_string());
    put("t_end", cfg.t_end.to_string());
    put(
        "snapshot_stride",
        cfg.snapshot_stride.map_or("auto".into(), |v| v.to_string()),
    );
    put("steady_tol", cfg.steady_tol.to_string());
    put("probe_x", cfg.probe_x.to_string());
    put("s", cfg.s.to_string());
    put(
        "initial",
        match cfg.initial {
            InitialKind::Equilibrium => "equilibrium",
            InitialKind::Pattern => "pattern",
            InitialKind::File => "file",
        }
        .into(),
    );
    if let Some(path) = &cfg.initial_file {
        put("initial_file", path.display().to_string());
    }
    put(
        "reference",
        match cfg.reference {
            ReferenceKind::Equilibrium => "equilibrium",
            ReferenceKind::Pattern => "pattern",
            ReferenceKind::None => "none",
        }
        .into(),
    );
    if let Some(path) = &cfg.out {
        put("out", path.display().to_string());
    }
    put("d1_min", cfg.sweep_d1.min.to_string());
    put("d1_max", cfg.sweep_d1.max.to_string());
    put("d1_count", cfg.sweep_d1.count.to_string());
    put("d2_min", cfg.sweep_d2.min.to_string());
    put("d2_max", cfg.sweep_d2.max.to_string());
    put("d2_count", cfg.sweep_d2.count.to_string());
    out
}
