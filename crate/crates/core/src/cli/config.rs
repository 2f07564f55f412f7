//! TOML run configuration.
//!
//! ```toml
//! model = "hd-qubits"          # hd-qubits | ht-qubits | hd-oms | ht-oms
//! filter = "fig2c"             # none | fig2c | fig4c | fig6c
//! solver = "full"              # full | rate | both
//!
//! [params]
//! omega_L = 1.0                # alias omega_a
//! omega_R = 0.1                # alias omega_b
//! g = 0.35
//! # n_max = 6                  # oscillator models only
//!
//! [baths.L]
//! temperature = 2.0
//! kappa = 0.001                # shorthand for density = { kind = "power-law", kappa = 0.001 }
//!
//! [baths.R]
//! temperature = 0.5
//! density = { kind = "power-law", kappa = 0.001, exponent = 1.0 }
//!
//! [sweep]
//! parameter = "g"
//! start = 0.01
//! stop = 0.5
//! points = 30
//! scale = "linear"             # linear | log
//!
//! [output]
//! csv = "out.csv"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::analysis::HeatManager;
use crate::baths::{BathLabel, BathSpec, SpectralDensity};
use crate::lindblad::SolverKind;
use crate::models::{Device, FilterPreset, OmsParams, SystemParams, TwoQubitParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    HdQubits,
    HtQubits,
    HdOms,
    HtOms,
}

impl ModelKind {
    pub fn device(self) -> Device {
        match self {
            ModelKind::HdQubits | ModelKind::HdOms => Device::Diode,
            ModelKind::HtQubits | ModelKind::HtOms => Device::Transistor,
        }
    }

    pub fn is_oms(self) -> bool {
        matches!(self, ModelKind::HdOms | ModelKind::HtOms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    Full,
    Rate,
    Both,
}

impl SolverChoice {
    /// Solver used for the reported values; `both` reports the full solution.
    pub fn primary(self) -> SolverKind {
        match self {
            SolverChoice::Rate => SolverKind::Rate,
            _ => SolverKind::Full,
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Full => "full",
            SolverChoice::Rate => "rate",
            SolverChoice::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(alias = "omega_L", skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<f64>,
    #[serde(alias = "omega_R", skip_serializing_if = "Option::is_none")]
    pub omega_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<SpectralDensity>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default = "default_filter")]
    pub filter: FilterPreset,
    #[serde(default)]
    pub solver: SolverChoice,
    pub params: ParamsConfig,
    pub baths: BTreeMap<String, BathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_filter() -> FilterPreset {
    FilterPreset::Unfiltered
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.system()?;
        cfg.bath_specs()?;
        if let Some(axis) = &cfg.sweep {
            cfg.check_axis(axis)?;
        }
        Ok(cfg)
    }
}

fn missing(key: &str, alias: &str) -> CliError {
    CliError::Config(format!("missing key `params.{key}` (alias `{alias}`)"))
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    pub fn device(&self) -> Device {
        self.model.device()
    }

    pub fn system(&self) -> Result<SystemParams, CliError> {
        let p = &self.params;
        let diode = self.device() == Device::Diode;
        let (a_key, b_key) = if diode { ("omega_L", "omega_R") } else { ("omega_a", "omega_b") };
        let (a_alias, b_alias) = if diode { ("omega_a", "omega_b") } else { ("omega_L", "omega_R") };
        let omega_a = p.omega_a.ok_or_else(|| missing(a_key, a_alias))?;
        let omega_b = p.omega_b.ok_or_else(|| missing(b_key, b_alias))?;
        let g = p.g.ok_or_else(|| CliError::Config("missing key `params.g`".into()))?;
        let sys = if self.model.is_oms() {
            let n_max = p.n_max.ok_or_else(|| CliError::Config("missing key `params.n_max` (oscillator models)".into()))?;
            SystemParams::Oms(OmsParams::new(omega_a, omega_b, g, n_max).map_err(|e| CliError::Config(format!("params: {e}")))?)
        } else {
            if p.n_max.is_some() {
                return Err(CliError::Config("key `params.n_max` only applies to oscillator models".into()));
            }
            SystemParams::Qubits(TwoQubitParams::new(omega_a, omega_b, g).map_err(|e| CliError::Config(format!("params: {e}")))?)
        };
        Ok(sys)
    }

    pub fn bath_specs(&self) -> Result<Vec<BathSpec>, CliError> {
        let device = self.device();
        for key in self.baths.keys() {
            let known = key.parse::<BathLabel>().map(|l| device.labels().contains(&l)).unwrap_or(false);
            if !known {
                let expected: Vec<&str> = device.labels().iter().map(|l| l.as_str()).collect();
                return Err(CliError::Config(format!("unexpected bath `baths.{key}` (expected {})", expected.join(", "))));
            }
        }
        device
            .labels()
            .iter()
            .map(|&label| {
                let b = self
                    .baths
                    .get(label.as_str())
                    .ok_or_else(|| CliError::Config(format!("missing bath section `baths.{label}`")))?;
                let density = match (&b.kappa, &b.density) {
                    (Some(k), None) => SpectralDensity::ohmic(*k),
                    (None, Some(d)) => d.clone(),
                    (Some(_), Some(_)) => return Err(CliError::Config(format!("`baths.{label}`: give either `kappa` or `density`, not both"))),
                    (None, None) => return Err(CliError::Config(format!("missing key `baths.{label}.kappa` or `baths.{label}.density`"))),
                };
                BathSpec::new(label, b.temperature, density).map_err(|e| CliError::Config(format!("`baths.{label}`: {e}")))
            })
            .collect()
    }

    fn check_axis(&self, axis: &SweepAxis) -> Result<(), CliError> {
        if axis.points < 2 {
            return Err(CliError::Config("`sweep.points` must be at least 2".into()));
        }
        if !(axis.start < axis.stop) {
            return Err(CliError::Config("`sweep.start` must be below `sweep.stop`".into()));
        }
        if axis.scale == Scale::Log && axis.start <= 0.0 {
            return Err(CliError::Config("log sweep needs `sweep.start` > 0".into()));
        }
        let hm = self.manager(SolverKind::Full)?;
        for x in [axis.start, axis.stop] {
            hm.with_parameter(&axis.parameter, x).map_err(|e| CliError::Config(format!("`sweep.parameter`: {e}")))?;
        }
        Ok(())
    }

    pub fn manager(&self, solver: SolverKind) -> Result<HeatManager, CliError> {
        Ok(HeatManager::new(self.system()?, self.device(), self.bath_specs()?, self.filter, solver))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HD: &str = r#"
model = "hd-qubits"
filter = "fig2c"

[params]
omega_L = 1.0
omega_R = 0.1
g = 0.35

[baths.L]
temperature = 2.0
kappa = 0.001

[baths.R]
temperature = 0.5
density = { kind = "power-law", kappa = 0.001, exponent = 1.0 }
"#;

    #[test]
    fn parses_documented_layout() {
        let cfg: RunConfig = HD.parse().unwrap();
        assert_eq!(cfg.model, ModelKind::HdQubits);
        assert_eq!(cfg.bath_specs().unwrap().len(), 2);
    }

    #[test]
    fn missing_key_is_named() {
        let err = HD.replace("omega_R = 0.1\n", "").parse::<RunConfig>().unwrap_err();
        assert!(err.to_string().contains("omega_R"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = HD.replace("g = 0.35", "g = 0.35\ngamma = 1").parse::<RunConfig>().unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn sweep_grid_endpoints() {
        let axis = SweepAxis {
            parameter: "g".into(),
            start: 0.1,
            stop: 1.0,
            points: 3,
            scale: Scale::Log,
        };
        let g = axis.grid();
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[2] - 1.0).abs() < 1e-15);
        assert!((g[1] - 0.1f64.sqrt()).abs() < 1e-14);
    }
}
