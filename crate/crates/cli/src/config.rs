//! Flat key-value configuration format.
//!
//! One `key = value` per line, full-line `#` comments, no sections. The
//! format is deliberately trivial: diff-friendly, identically parseable from
//! any language, no schema library. Coefficients use dotted keys:
//!
//! ```text
//! a1.value = 1                       # constant
//! b2.kind = sinusoidal
//! b2.mean = 1.0
//! b2.amplitude = 0.25
//! b2.period = 10
//! c1.kind = piecewise
//! c1.breakpoints = 5, 10
//! c1.values = 0.5, 0.7, 0.4
//! ```
//!
//! Unknown keys are errors. Missing keys take the documented defaults
//! (`dt = 1e-3`, `save_every = 100`, `scheme = EULER_MARUYAMA_LOG`,
//! `mode = FULL`, `blowup_guard = 400`); the noise coefficients default to
//! constant zero, everything else is required.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

use rdpp::integrate::{Scheme, SimConfig, SimMode, DEFAULT_BLOWUP_GUARD, DEFAULT_SAVE_EVERY};
use rdpp::model::{validate_coefficients, CoefficientFn, CoefficientSet};

use crate::fmt::fmt_f64;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_PATHS: u64 = 1000;
pub const DEFAULT_DT_COARSE: f64 = 0.015625; // 2^-6
pub const DEFAULT_ORDER_LEVELS: usize = 4;

const COEFF_NAMES: [&str; 11] = [
    "a1", "a2", "b1", "b2", "c1", "c2", "e", "sigma1", "sigma2", "rho1", "rho2",
];
const COEFF_SUBKEYS: [&str; 8] = [
    "kind",
    "value",
    "mean",
    "amplitude",
    "period",
    "phase",
    "breakpoints",
    "values",
];
const SCALAR_KEYS: [&str; 18] = [
    "t_end",
    "dt",
    "save_every",
    "x0",
    "y0",
    "scheme",
    "mode",
    "blowup_guard",
    "seed",
    "paths",
    "theta1",
    "theta2",
    "varsigma1",
    "varsigma2",
    "varrho1",
    "varrho2",
    "dt_coarse",
    "order_levels",
];

/// Parameters consumed by the verification harnesses and the convergence
/// study.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessParams {
    pub n_paths: u64,
    pub theta1: f64,
    pub theta2: f64,
    pub varsigma1: f64,
    pub varsigma2: f64,
    pub varrho1: f64,
    pub varrho2: f64,
    pub dt_coarse: f64,
    pub order_levels: usize,
}

/// Fully resolved configuration (defaults applied).
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub sim: SimConfig,
    pub coefficients: CoefficientSet,
    pub harness: HarnessParams,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {second}: duplicate key {key:?} (first set on line {first})")]
    DuplicateKey {
        key: String,
        first: usize,
        second: usize,
    },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: invalid value for {key}: {msg}")]
    InvalidValue {
        key: String,
        line: usize,
        msg: String,
    },
    #[error("missing required key {0:?}")]
    MissingKey(String),
    #[error("coefficient validation failed:\n{0}")]
    Semantic(String),
}

struct Entry {
    line: usize,
    value: String,
}

struct Pairs(BTreeMap<String, Entry>);

impl Pairs {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.get(key).map(|e| (e.line, e.value.clone()))
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|e| ConfigError::InvalidValue {
                    key: key.into(),
                    line,
                    msg: e.to_string(),
                })
                .and_then(|v| match v {
                    Some(x) if x.is_finite() => Ok(Some(x)),
                    Some(x) => Err(ConfigError::InvalidValue {
                        key: key.into(),
                        line,
                        msg: format!("{x} is not finite"),
                    }),
                    None => Ok(None),
                }),
        }
    }

    fn f64_required(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?
            .ok_or_else(|| ConfigError::MissingKey(key.into()))
    }

    fn u64(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|e| ConfigError::InvalidValue {
                    key: key.into(),
                    line,
                    msg: e.to_string(),
                }),
        }
    }

    fn f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                let v = v.trim();
                if v.is_empty() {
                    return Ok(Some(Vec::new()));
                }
                v.split(',')
                    .map(|item| item.trim().parse::<f64>())
                    .collect::<Result<Vec<f64>, _>>()
                    .map(Some)
                    .map_err(|e| ConfigError::InvalidValue {
                        key: key.into(),
                        line,
                        msg: e.to_string(),
                    })
            }
        }
    }
}

fn tokenize(text: &str) -> Result<Pairs, ConfigError> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got {line:?}"),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                msg: "empty key".into(),
            });
        }
        if let Some(prev) = map.get(&key) {
            return Err(ConfigError::DuplicateKey {
                key,
                first: prev.line,
                second: line_no,
            });
        }
        check_known(&key, line_no)?;
        map.insert(
            key,
            Entry {
                line: line_no,
                value,
            },
        );
    }
    Ok(Pairs(map))
}

fn check_known(key: &str, line: usize) -> Result<(), ConfigError> {
    if let Some((prefix, sub)) = key.split_once('.') {
        if COEFF_NAMES.contains(&prefix) && COEFF_SUBKEYS.contains(&sub) {
            return Ok(());
        }
    } else if SCALAR_KEYS.contains(&key) {
        return Ok(());
    }
    Err(ConfigError::UnknownKey {
        key: key.into(),
        line,
    })
}

fn coefficient(
    pairs: &mut Pairs,
    name: &str,
    default_zero: bool,
) -> Result<CoefficientFn, ConfigError> {
    let key = |sub: &str| format!("{name}.{sub}");
    let kind = pairs.take(&key("kind"));
    let value = pairs.f64(&key("value"))?;
    let mean = pairs.f64(&key("mean"))?;
    let amplitude = pairs.f64(&key("amplitude"))?;
    let period = pairs.f64(&key("period"))?;
    let phase = pairs.f64(&key("phase"))?;
    let breakpoints = pairs.f64_list(&key("breakpoints"))?;
    let values = pairs.f64_list(&key("values"))?;

    let kind_name: &str = match &kind {
        Some((line, k)) => match k.as_str() {
            "constant" => "constant",
            "piecewise" | "piecewise-constant" => "piecewise-constant",
            "sinusoidal" => "sinusoidal",
            other => {
                return Err(ConfigError::InvalidValue {
                    key: key("kind"),
                    line: *line,
                    msg: format!(
                        "{other:?} is not a coefficient kind (constant | piecewise-constant | sinusoidal)"
                    ),
                })
            }
        },
        // Infer the kind from whichever parameter family is present.
        None if value.is_some() => "constant",
        None if mean.is_some() || amplitude.is_some() || period.is_some() || phase.is_some() => {
            "sinusoidal"
        }
        None if values.is_some() || breakpoints.is_some() => "piecewise-constant",
        None if default_zero => return Ok(CoefficientFn::constant(0.0)),
        None => return Err(ConfigError::MissingKey(key("value"))),
    };

    // Reject parameters belonging to a different kind instead of silently
    // ignoring them.
    let foreign: &[(&str, bool)] = match kind_name {
        "constant" => &[
            ("mean", mean.is_some()),
            ("amplitude", amplitude.is_some()),
            ("period", period.is_some()),
            ("phase", phase.is_some()),
            ("breakpoints", breakpoints.is_some()),
            ("values", values.is_some()),
        ],
        "sinusoidal" => &[
            ("value", value.is_some()),
            ("breakpoints", breakpoints.is_some()),
            ("values", values.is_some()),
        ],
        _ => &[
            ("value", value.is_some()),
            ("mean", mean.is_some()),
            ("amplitude", amplitude.is_some()),
            ("period", period.is_some()),
            ("phase", phase.is_some()),
        ],
    };
    if let Some((sub, _)) = foreign.iter().find(|(_, present)| *present) {
        return Err(ConfigError::Semantic(format!(
            "{name}: key {} does not apply to kind {kind_name}",
            key(sub)
        )));
    }

    let semantic = |msg: String| ConfigError::Semantic(format!("{name}: {msg}"));
    match kind_name {
        "constant" => {
            let v = value.ok_or_else(|| ConfigError::MissingKey(key("value")))?;
            Ok(CoefficientFn::constant(v))
        }
        "sinusoidal" => {
            let mean = mean.ok_or_else(|| ConfigError::MissingKey(key("mean")))?;
            let amplitude = amplitude.ok_or_else(|| ConfigError::MissingKey(key("amplitude")))?;
            let period = period.ok_or_else(|| ConfigError::MissingKey(key("period")))?;
            CoefficientFn::sinusoidal(mean, amplitude, period, phase.unwrap_or(0.0))
                .map_err(|e| semantic(e.to_string()))
        }
        _ => {
            let values = values.ok_or_else(|| ConfigError::MissingKey(key("values")))?;
            CoefficientFn::piecewise(breakpoints.unwrap_or_default(), values)
                .map_err(|e| semantic(e.to_string()))
        }
    }
}

/// Parses the configuration text, applying defaults and running coefficient
/// validation.
pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    let mut pairs = tokenize(text)?;

    let coefficients = CoefficientSet {
        a1: coefficient(&mut pairs, "a1", false)?,
        a2: coefficient(&mut pairs, "a2", false)?,
        b1: coefficient(&mut pairs, "b1", false)?,
        b2: coefficient(&mut pairs, "b2", false)?,
        c1: coefficient(&mut pairs, "c1", false)?,
        c2: coefficient(&mut pairs, "c2", false)?,
        e: coefficient(&mut pairs, "e", false)?,
        sigma1: coefficient(&mut pairs, "sigma1", true)?,
        sigma2: coefficient(&mut pairs, "sigma2", true)?,
        rho1: coefficient(&mut pairs, "rho1", true)?,
        rho2: coefficient(&mut pairs, "rho2", true)?,
    };

    let scheme = match pairs.take("scheme") {
        None => Scheme::EulerMaruyamaLog,
        Some((line, v)) => match v.as_str() {
            "EULER_MARUYAMA_LOG" => Scheme::EulerMaruyamaLog,
            "MILSTEIN_LOG" => Scheme::MilsteinLog,
            "RK4_DETERMINISTIC" => Scheme::Rk4Deterministic,
            other => {
                return Err(ConfigError::InvalidValue {
                    key: "scheme".into(),
                    line,
                    msg: format!("{other:?} is not a scheme (EULER_MARUYAMA_LOG | MILSTEIN_LOG | RK4_DETERMINISTIC)"),
                })
            }
        },
    };
    let mode = match pairs.take("mode") {
        None => SimMode::Full,
        Some((line, v)) => match v.as_str() {
            "FULL" => SimMode::Full,
            "PREY_ABSENT" => SimMode::PreyAbsent,
            "PREDATOR_ABSENT" => SimMode::PredatorAbsent,
            other => {
                return Err(ConfigError::InvalidValue {
                    key: "mode".into(),
                    line,
                    msg: format!("{other:?} is not a mode (FULL | PREY_ABSENT | PREDATOR_ABSENT)"),
                })
            }
        },
    };

    let sim = SimConfig {
        t_end: pairs.f64_required("t_end")?,
        dt: pairs.f64("dt")?.unwrap_or(DEFAULT_DT),
        save_every: pairs.u64("save_every")?.unwrap_or(DEFAULT_SAVE_EVERY),
        x0: pairs.f64_required("x0")?,
        y0: pairs.f64_required("y0")?,
        scheme,
        mode,
        blowup_guard: pairs.f64("blowup_guard")?.unwrap_or(DEFAULT_BLOWUP_GUARD),
    };

    let harness = HarnessParams {
        n_paths: pairs.u64("paths")?.unwrap_or(DEFAULT_PATHS),
        theta1: pairs.f64("theta1")?.unwrap_or(1.0),
        theta2: pairs.f64("theta2")?.unwrap_or(1.0),
        varsigma1: pairs.f64("varsigma1")?.unwrap_or(1.0),
        varsigma2: pairs.f64("varsigma2")?.unwrap_or(1.0),
        varrho1: pairs.f64("varrho1")?.unwrap_or(1.0),
        varrho2: pairs.f64("varrho2")?.unwrap_or(1.0),
        dt_coarse: pairs.f64("dt_coarse")?.unwrap_or(DEFAULT_DT_COARSE),
        order_levels: pairs
            .u64("order_levels")?
            .unwrap_or(DEFAULT_ORDER_LEVELS as u64) as usize,
    };
    let seed = pairs.u64("seed")?.unwrap_or(0);

    let report = validate_coefficients(&coefficients);
    if !report.is_ok() {
        return Err(ConfigError::Semantic(report.to_string()));
    }

    Ok(ParsedConfig {
        sim,
        coefficients,
        harness,
        seed,
    })
}

fn emit_coefficient(out: &mut String, name: &str, f: &CoefficientFn) {
    match f {
        CoefficientFn::Constant { value } => {
            let _ = writeln!(out, "{name}.kind = constant");
            let _ = writeln!(out, "{name}.value = {}", fmt_f64(*value));
        }
        CoefficientFn::Sinusoidal {
            mean,
            amplitude,
            period,
            phase,
        } => {
            let _ = writeln!(out, "{name}.kind = sinusoidal");
            let _ = writeln!(out, "{name}.mean = {}", fmt_f64(*mean));
            let _ = writeln!(out, "{name}.amplitude = {}", fmt_f64(*amplitude));
            let _ = writeln!(out, "{name}.period = {}", fmt_f64(*period));
            let _ = writeln!(out, "{name}.phase = {}", fmt_f64(*phase));
        }
        CoefficientFn::PiecewiseConstant {
            breakpoints,
            values,
        } => {
            let _ = writeln!(out, "{name}.kind = piecewise-constant");
            let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "{name}.breakpoints = {}", join(breakpoints));
            let _ = writeln!(out, "{name}.values = {}", join(values));
        }
    }
}

/// Canonical emission: every resolved setting in a fixed order. Feeding the
/// result back through [`parse_config`] reproduces an identical manifest
/// fingerprint.
pub fn emit_config(cfg: &ParsedConfig) -> String {
    let mut out = String::new();
    let scheme = match cfg.sim.scheme {
        Scheme::EulerMaruyamaLog => "EULER_MARUYAMA_LOG",
        Scheme::MilsteinLog => "MILSTEIN_LOG",
        Scheme::Rk4Deterministic => "RK4_DETERMINISTIC",
    };
    let mode = match cfg.sim.mode {
        SimMode::Full => "FULL",
        SimMode::PreyAbsent => "PREY_ABSENT",
        SimMode::PredatorAbsent => "PREDATOR_ABSENT",
    };
    let _ = writeln!(out, "t_end = {}", fmt_f64(cfg.sim.t_end));
    let _ = writeln!(out, "dt = {}", fmt_f64(cfg.sim.dt));
    let _ = writeln!(out, "save_every = {}", cfg.sim.save_every);
    let _ = writeln!(out, "x0 = {}", fmt_f64(cfg.sim.x0));
    let _ = writeln!(out, "y0 = {}", fmt_f64(cfg.sim.y0));
    let _ = writeln!(out, "scheme = {scheme}");
    let _ = writeln!(out, "mode = {mode}");
    let _ = writeln!(out, "blowup_guard = {}", fmt_f64(cfg.sim.blowup_guard));
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "paths = {}", cfg.harness.n_paths);
    let _ = writeln!(out, "theta1 = {}", fmt_f64(cfg.harness.theta1));
    let _ = writeln!(out, "theta2 = {}", fmt_f64(cfg.harness.theta2));
    let _ = writeln!(out, "varsigma1 = {}", fmt_f64(cfg.harness.varsigma1));
    let _ = writeln!(out, "varsigma2 = {}", fmt_f64(cfg.harness.varsigma2));
    let _ = writeln!(out, "varrho1 = {}", fmt_f64(cfg.harness.varrho1));
    let _ = writeln!(out, "varrho2 = {}", fmt_f64(cfg.harness.varrho2));
    let _ = writeln!(out, "dt_coarse = {}", fmt_f64(cfg.harness.dt_coarse));
    let _ = writeln!(out, "order_levels = {}", cfg.harness.order_levels);
    for (name, f) in cfg.coefficients.all() {
        emit_coefficient(&mut out, name, f);
    }
    out
}

/// First 16 hex characters of the SHA-256 of the canonical config text.
pub fn fingerprint(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// A resolved run: configuration, its fingerprint, and where outputs go.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ParsedConfig,
    pub fingerprint: String,
    pub out_dir: PathBuf,
}

impl RunManifest {
    pub fn new(config: ParsedConfig, out_dir: PathBuf) -> Self {
        let fingerprint = fingerprint(&emit_config(&config));
        Self {
            config,
            fingerprint,
            out_dir,
        }
    }
}
