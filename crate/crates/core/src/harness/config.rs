//! Experiment configuration: flat key-value file plus command-line overrides.
//!
//! ```toml
//! eta = 0.67
//! axes = "trine"                 # or [[x, y, z], [x, y, z], [x, y, z]]
//! state = "phi0"                 # phi0 | H | V | D | R, or [[re, im], [re, im]]
//! shots = 100000
//! seed = 5002071
//! format = "table"               # table | object
//! shards = 1
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::trine_axes;
use crate::qubit::{NamedState, QubitState, Vec3, C64};

pub const DEFAULT_ETA: f64 = 0.67;
pub const DEFAULT_SHOTS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 0x4C_5357;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AxesSpec {
    Trine,
    Explicit([Vec3; 3]),
}

impl AxesSpec {
    pub fn vectors(&self) -> [Vec3; 3] {
        match self {
            AxesSpec::Trine => trine_axes(),
            AxesSpec::Explicit(v) => *v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StateSpec {
    Named(NamedState),
    Amplitudes([C64; 2]),
}

impl StateSpec {
    pub fn state(&self) -> Result<QubitState> {
        match self {
            StateSpec::Named(n) => Ok(n.state()),
            StateSpec::Amplitudes([a0, a1]) => QubitState::from_amplitudes(*a0, *a1),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateSpec::Named(n) => n.name().to_string(),
            StateSpec::Amplitudes([a0, a1]) => {
                format!("({}{:+}i, {}{:+}i)", a0.re, a0.im, a1.re, a1.im)
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    /// A state name, or four comma-separated numbers `re0,im0,re1,im1`.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(n) = s.parse::<NamedState>() {
            return Ok(StateSpec::Named(n));
        }
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("unrecognized state {s:?}")))?;
        match parts[..] {
            [r0, i0, r1, i1] => Ok(StateSpec::Amplitudes([C64::new(r0, i0), C64::new(r1, i1)])),
            _ => Err(Error::Config(format!("state needs four amplitude components, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Object,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "object" => Ok(OutputFormat::Object),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub eta: f64,
    pub axes: AxesSpec,
    pub state: StateSpec,
    pub shots: u64,
    pub seed: u64,
    pub format: OutputFormat,
    pub shards: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            eta: DEFAULT_ETA,
            axes: AxesSpec::Trine,
            state: StateSpec::Named(NamedState::Phi0),
            shots: DEFAULT_SHOTS,
            seed: DEFAULT_SEED,
            format: OutputFormat::Table,
            shards: 1,
        }
    }
}

/// Values that replace whatever the file (or the defaults) supplied.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub state: Option<StateSpec>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub shards: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    eta: Option<f64>,
    axes: Option<toml::Value>,
    state: Option<toml::Value>,
    shots: Option<u64>,
    seed: Option<u64>,
    format: Option<String>,
    shards: Option<u32>,
}

fn as_f64(v: &toml::Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

fn parse_axes(v: &toml::Value) -> Result<AxesSpec> {
    if v.as_str() == Some("trine") {
        return Ok(AxesSpec::Trine);
    }
    let bad = || Error::Config("axes must be \"trine\" or three [x, y, z] vectors".into());
    let rows = v.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
    let mut axes = [[0.0; 3]; 3];
    for (axis, row) in axes.iter_mut().zip(rows) {
        let comps = row.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
        for (dst, c) in axis.iter_mut().zip(comps) {
            *dst = as_f64(c).ok_or_else(bad)?;
        }
    }
    Ok(AxesSpec::Explicit(axes))
}

fn parse_state(v: &toml::Value) -> Result<StateSpec> {
    if let Some(s) = v.as_str() {
        return s.parse();
    }
    let bad = || Error::Config("state must be a name or [[re, im], [re, im]]".into());
    let rows = v.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
    let mut amps = [C64::new(0.0, 0.0); 2];
    for (dst, row) in amps.iter_mut().zip(rows) {
        let c = row.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
        *dst = C64::new(as_f64(&c[0]).ok_or_else(bad)?, as_f64(&c[1]).ok_or_else(bad)?);
    }
    Ok(StateSpec::Amplitudes(amps))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = ExperimentConfig::default();
        if let Some(eta) = raw.eta {
            cfg.eta = eta;
        }
        if let Some(a) = &raw.axes {
            cfg.axes = parse_axes(a)?;
        }
        if let Some(s) = &raw.state {
            cfg.state = parse_state(s)?;
        }
        if let Some(n) = raw.shots {
            cfg.shots = n;
        }
        if let Some(s) = raw.seed {
            cfg.seed = s;
        }
        if let Some(f) = raw.format {
            cfg.format = f.parse()?;
        }
        if let Some(s) = raw.shards {
            cfg.shards = s;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(v) = o.eta {
            self.eta = v;
        }
        if let Some(v) = o.state {
            self.state = v;
        }
        if let Some(v) = o.shots {
            self.shots = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.format {
            self.format = v;
        }
        if let Some(v) = o.shards {
            self.shards = v;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!(c.eta, 0.67);
        assert_eq!(c.axes, AxesSpec::Trine);
        assert_eq!(c.state, StateSpec::Named(NamedState::Phi0));
        assert_eq!(c.shots, 100_000);
    }

    #[test]
    fn parses_file_and_overrides() {
        let text = r#"
            eta = 0.7
            axes = [[0, 0, 1], [0.8660254037844386, 0, -0.5], [-0.8660254037844386, 0, -0.5]]
            state = [[0.6, 0], [0, 0.8]]
            shots = 5000
            seed = 11
            format = "object"
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.eta, 0.7);
        assert!(matches!(c.axes, AxesSpec::Explicit(_)));
        assert_eq!(c.state, StateSpec::Amplitudes([C64::new(0.6, 0.0), C64::new(0.0, 0.8)]));
        assert_eq!((c.shots, c.seed, c.format), (5000, 11, OutputFormat::Object));

        let o = Overrides { eta: Some(0.67), state: Some("H".parse().unwrap()), ..Default::default() };
        let c = c.apply(&o);
        assert_eq!(c.eta, 0.67);
        assert_eq!(c.state, StateSpec::Named(NamedState::H));
        assert_eq!(c.shots, 5000);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ExperimentConfig::from_toml_str("etaa = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("axes = \"square\"").is_err());
        assert!(ExperimentConfig::from_toml_str("state = \"Q\"").is_err());
        assert!(ExperimentConfig::from_toml_str("format = \"xml\"").is_err());
        assert!(ExperimentConfig::from_toml_str("axes = [[0, 0, 1]]").is_err());
    }

    #[test]
    fn state_strings() {
        assert_eq!("phi0".parse::<StateSpec>().unwrap(), StateSpec::Named(NamedState::Phi0));
        let s: StateSpec = "1,0,0,1".parse().unwrap();
        let b = s.state().unwrap().bloch();
        assert!((b[1] - 1.0).abs() < 1e-15);
        assert!("1,0,0".parse::<StateSpec>().is_err());
    }
}
