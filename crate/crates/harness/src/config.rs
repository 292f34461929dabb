//! Flat `key = value` configuration, CLI overrides and validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use starkqfi::dynamic::InitialState;
use starkqfi::equilibrium::{FieldSign, PeakRule, QfiMethod};
use starkqfi::grid::{int_range, linear_grid, log_grid};
use starkqfi::model::ProbeClass;
use starkqfi::spectral::StateSelector;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

fn bad(key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

/// Every recognised key with a short description. CLI flags use the same names.
pub const KEYS: &[(&str, &str)] = &[
    ("probe", "probe class: sp | mb"),
    ("a", "potential rates, comma list or start:stop:step"),
    ("L", "chain lengths, comma list or start:stop:step"),
    ("h", "explicit field list; overrides the h_* grid keys"),
    ("h_scale", "field grid spacing: log | linear"),
    ("h_min", "smallest field of the grid"),
    ("h_max", "largest field of the grid"),
    ("h_count", "number of grid points"),
    ("h_zero", "field used for h -> 0 quantities"),
    ("state", "eigenstate: ground | mid | index:k"),
    ("field_sign", "orientation of the field: +1 | -1"),
    ("method", "auto | eigen-sum | fidelity-fd"),
    ("fd_dh", "finite-difference step; default max(1e-6, 1e-4 h)"),
    ("initial", "initial state for dynamics: center-site | neel"),
    ("t_grid", "series times: int:start:stop | log:start:stop:count | comma list"),
    ("avg_t_min", "first integer time of the time average"),
    ("avg_t_max", "last integer time of the time average"),
    ("t2_lo", "start of the late window for F/t^2"),
    ("t2_hi", "end of the late window for F/t^2"),
    ("peak_h_min", "lower end of the peak-search grid"),
    ("peak_h_max", "upper end of the peak-search grid"),
    ("peak_count", "points in the peak-search grid"),
    ("bound", "bound variant for bound-check: printed | k2"),
    ("output", "output directory"),
    ("workers", "worker threads; default STARKQFI_WORKERS or logical cores"),
    ("figure", "preset id for reproduce"),
    ("input", "input CSV for fit"),
    ("fit_kind", "exp-l | power | hmax"),
    ("x", "abscissa column for fit"),
    ("y", "ordinate column for fit"),
    ("group", "grouping column for fit"),
    ("select", "row choice per (group, x): unique | min-h | max"),
    ("peak_rule", "global | interior | none"),
    ("peak_tol", "golden-section bracket width in ln h"),
];

pub fn is_key(k: &str) -> bool {
    KEYS.iter().any(|(name, _)| *name == k)
}

/// Unvalidated key/value pairs in insertion-independent order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                });
            };
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !is_key(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Later values win.
    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| bad(key, e)))
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    EqSweep,
    DynSweep,
    BoundCheck,
    GapScan,
    Fit,
    Reproduce,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::EqSweep => "eq-sweep",
            Self::DynSweep => "dyn-sweep",
            Self::BoundCheck => "bound-check",
            Self::GapScan => "gap-scan",
            Self::Fit => "fit",
            Self::Reproduce => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Fixed(QfiMethod),
}

impl MethodChoice {
    pub fn resolve(self, dim: usize) -> QfiMethod {
        match self {
            Self::Fixed(m) => m,
            Self::Auto if dim > starkqfi::equilibrium::DENSE_LIMIT => QfiMethod::FidelityFd,
            Self::Auto => QfiMethod::EigenSum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    Printed,
    K2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    ExpL,
    Power,
    Hmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Select {
    Unique,
    MinH,
    Max,
}

/// Validated parameters for one run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: Experiment,
    pub probe: ProbeClass,
    pub rates: Vec<f64>,
    pub lens: Vec<usize>,
    pub h_grid: Vec<f64>,
    pub h_zero: f64,
    pub state: StateSelector,
    pub field_sign: FieldSign,
    pub method: MethodChoice,
    pub fd_dh: Option<f64>,
    pub initial: InitialState,
    pub times: Vec<f64>,
    pub avg_window: (u32, u32),
    pub t2_window: (f64, f64),
    pub peak_grid: Vec<f64>,
    pub bound: BoundVariant,
    pub output: PathBuf,
    pub workers: usize,
    pub figure: Option<String>,
    pub input: Option<PathBuf>,
    pub fit_kind: FitKind,
    pub x: String,
    pub y: String,
    pub group: String,
    pub select: Select,
    pub peak_rule: Option<PeakRule>,
    pub peak_tol: f64,
    pub raw: RawConfig,
}

pub fn parse_f64_list(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(bad(key, "list is empty"));
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 && !s.contains(',') {
        let p: Vec<f64> = parts
            .iter()
            .map(|x| x.trim().parse::<f64>().map_err(|e| bad(key, e)))
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (p[0], p[1], p[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad(key, format!("bad range `{s}`")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // round to 12 decimals so 0.02:0.05:0.01 gives 0.03, not 0.030000000000000002
        return Ok((0..=n)
            .map(|i| ((start + step * i as f64) * 1e12).round() / 1e12)
            .collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| bad(key, format!("`{x}`: {e}"))))
        .collect()
}

pub fn parse_usize_list(key: &str, s: &str) -> Result<Vec<usize>, ConfigError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(bad(key, "list is empty"));
    }
    if s.contains(':') && !s.contains(',') {
        let p: Vec<usize> = s
            .split(':')
            .map(|x| x.trim().parse::<usize>().map_err(|e| bad(key, e)))
            .collect::<Result<_, _>>()?;
        return match p.as_slice() {
            [a, b] => int_range(*a, *b, 1).map_err(|e| bad(key, e)),
            [a, b, c] => int_range(*a, *b, *c).map_err(|e| bad(key, e)),
            _ => Err(bad(key, format!("bad range `{s}`"))),
        };
    }
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| bad(key, format!("`{x}`: {e}"))))
        .collect()
}

pub fn parse_times(s: &str) -> Result<Vec<f64>, ConfigError> {
    let key = "t_grid";
    if let Some(rest) = s.strip_prefix("int:") {
        let p = parse_usize_list(key, rest)?;
        return Ok(p.into_iter().map(|t| t as f64).collect());
    }
    if let Some(rest) = s.strip_prefix("log:") {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            return Err(bad(key, "expected log:start:stop:count"));
        }
        let lo: f64 = p[0].parse().map_err(|e| bad(key, e))?;
        let hi: f64 = p[1].parse().map_err(|e| bad(key, e))?;
        let n: usize = p[2].parse().map_err(|e| bad(key, e))?;
        return log_grid(lo, hi, n).map_err(|e| bad(key, e));
    }
    let t = parse_f64_list(key, s)?;
    if t.windows(2).any(|w| w[1] <= w[0]) || t.iter().any(|x| *x < 0.0) {
        return Err(bad(key, "times must be non-negative and ascending"));
    }
    Ok(t)
}

pub fn default_workers() -> usize {
    std::env::var("STARKQFI_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

impl ExperimentConfig {
    pub fn from_raw(kind: Experiment, raw: RawConfig) -> Result<Self, ConfigError> {
        let probe: ProbeClass = raw.parse_as("probe")?.unwrap_or(ProbeClass::SingleParticle);
        let rates = match raw.get("a") {
            Some(s) => parse_f64_list("a", s)?,
            None => vec![0.04],
        };
        if rates.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(bad("a", "rates must be finite and non-negative"));
        }
        let lens = match raw.get("L") {
            Some(s) => parse_usize_list("L", s)?,
            None => vec![if probe == ProbeClass::ManyBody { 10 } else { 100 }],
        };
        if lens.is_empty() {
            return Err(bad("L", "list is empty"));
        }
        for &l in &lens {
            if l < 2 || (probe == ProbeClass::ManyBody && (l % 2 != 0 || l > 24)) {
                return Err(bad("L", format!("L = {l} is not valid for a {} probe", probe.label())));
            }
        }
        let h_grid = match raw.get("h") {
            Some(s) => parse_f64_list("h", s)?,
            None => {
                let min = raw.parse_as("h_min")?.unwrap_or(1e-12);
                let max = raw.parse_as("h_max")?.unwrap_or(1e2);
                let count = raw.parse_as("h_count")?.unwrap_or(57usize);
                match raw.get("h_scale").unwrap_or("log") {
                    "log" => log_grid(min, max, count),
                    "linear" => linear_grid(min, max, count),
                    other => return Err(bad("h_scale", format!("expected log or linear, got `{other}`"))),
                }
                .map_err(|e| bad("h_min", e))?
            }
        };
        if h_grid.is_empty() {
            return Err(bad("h", "grid is empty"));
        }
        if h_grid.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(bad("h", "field magnitudes must be finite and non-negative"));
        }
        let initial = raw
            .parse_as("initial")?
            .unwrap_or_else(|| InitialState::default_for(probe));
        let h_zero = raw
            .parse_as("h_zero")?
            .unwrap_or(if probe == ProbeClass::ManyBody && kind == Experiment::DynSweep { 0.01 } else { 0.0 });
        let method = match raw.get("method").unwrap_or("auto") {
            "auto" => MethodChoice::Auto,
            m => MethodChoice::Fixed(m.parse().map_err(|e| bad("method", e))?),
        };
        let times = parse_times(raw.get("t_grid").unwrap_or("int:0:1000"))?;
        let avg_window = (
            raw.parse_as("avg_t_min")?.unwrap_or(100u32),
            raw.parse_as("avg_t_max")?.unwrap_or(1000u32),
        );
        if avg_window.1 <= avg_window.0 {
            return Err(bad("avg_t_max", "averaging window is empty"));
        }
        let t2_window = (
            raw.parse_as("t2_lo")?.unwrap_or(900.0),
            raw.parse_as("t2_hi")?.unwrap_or(1000.0),
        );
        if !(t2_window.0 > 0.0 && t2_window.1 >= t2_window.0) {
            return Err(bad("t2_lo", "late window must satisfy 0 < t2_lo <= t2_hi"));
        }
        let peak_grid = log_grid(
            raw.parse_as("peak_h_min")?.unwrap_or(1e-12),
            raw.parse_as("peak_h_max")?.unwrap_or(10.0),
            raw.parse_as("peak_count")?.unwrap_or(80usize),
        )
        .map_err(|e| bad("peak_h_min", e))?;
        let bound = match raw.get("bound").unwrap_or("printed") {
            "printed" => BoundVariant::Printed,
            "k2" => BoundVariant::K2,
            other => return Err(bad("bound", format!("expected printed or k2, got `{other}`"))),
        };
        let workers = match raw.parse_as::<usize>("workers")? {
            Some(0) => return Err(bad("workers", "must be at least 1")),
            Some(n) => n,
            None => default_workers(),
        };
        let fit_kind = match raw.get("fit_kind").unwrap_or("exp-l") {
            "exp-l" => FitKind::ExpL,
            "power" => FitKind::Power,
            "hmax" => FitKind::Hmax,
            other => return Err(bad("fit_kind", format!("unknown fit kind `{other}`"))),
        };
        let select = match raw.get("select").unwrap_or("unique") {
            "unique" => Select::Unique,
            "min-h" => Select::MinH,
            "max" => Select::Max,
            other => return Err(bad("select", format!("unknown selection `{other}`"))),
        };
        let peak_rule = match raw.get("peak_rule").unwrap_or("global") {
            "global" => Some(PeakRule::GlobalMax),
            "interior" => Some(PeakRule::HighestInterior),
            "none" => None,
            other => return Err(bad("peak_rule", format!("unknown rule `{other}`"))),
        };
        let peak_tol = raw.parse_as("peak_tol")?.unwrap_or(1e-3);
        if !(peak_tol > 0.0) {
            return Err(bad("peak_tol", "must be positive"));
        }
        if kind == Experiment::Fit && raw.get("input").is_none() {
            return Err(ConfigError::Missing("input"));
        }
        if kind == Experiment::Reproduce && raw.get("figure").is_none() {
            return Err(ConfigError::Missing("figure"));
        }
        Ok(Self {
            kind,
            probe,
            rates,
            lens,
            h_grid,
            h_zero,
            state: raw.parse_as("state")?.unwrap_or(StateSelector::Ground),
            field_sign: raw.parse_as("field_sign")?.unwrap_or_default(),
            method,
            fd_dh: raw.parse_as("fd_dh")?,
            initial,
            times,
            avg_window,
            t2_window,
            peak_grid,
            bound,
            output: PathBuf::from(raw.get("output").unwrap_or("out")),
            workers,
            figure: raw.get("figure").map(str::to_string),
            input: raw.get("input").map(PathBuf::from),
            fit_kind,
            x: raw.get("x").unwrap_or("L").to_string(),
            y: raw.get("y").unwrap_or("qfi").to_string(),
            group: raw.get("group").unwrap_or("a").to_string(),
            select,
            peak_rule,
            peak_tol,
            raw,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_and_comments() {
        let raw = RawConfig::parse("# sweep\nprobe = sp\na = 0.02, 0.04  # two rates\n\nL=50:70:10\n").unwrap();
        let cfg = ExperimentConfig::from_raw(Experiment::EqSweep, raw).unwrap();
        assert_eq!(cfg.rates, vec![0.02, 0.04]);
        assert_eq!(cfg.lens, vec![50, 60, 70]);
        assert_eq!(cfg.h_grid.len(), 57);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RawConfig::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(RawConfig::parse("probe sp"), Err(ConfigError::Syntax { line: 1, .. })));
        let empty = RawConfig::parse("h = ").unwrap();
        assert!(ExperimentConfig::from_raw(Experiment::EqSweep, empty).is_err());
        let odd = RawConfig::parse("probe = mb\nL = 7").unwrap();
        assert!(ExperimentConfig::from_raw(Experiment::EqSweep, odd).is_err());
        let fit = RawConfig::default();
        assert!(matches!(
            ExperimentConfig::from_raw(Experiment::Fit, fit),
            Err(ConfigError::Missing("input"))
        ));
    }

    #[test]
    fn float_ranges_are_clean() {
        assert_eq!(parse_f64_list("a", "0.02:0.05:0.01").unwrap(), vec![0.02, 0.03, 0.04, 0.05]);
        assert_eq!(parse_times("int:0:3").unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(parse_times("log:1:100:3").unwrap().len(), 3);
    }
}
