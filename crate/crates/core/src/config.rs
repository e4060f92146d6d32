//! TOML configuration shared by the command-line subcommands.
//!
//! ```toml
//! seed = 7
//!
//! [scenario]
//! p_d_dbm = 24.0
//! num_subcarriers = 4
//!
//! [solver]
//! sic_strategy = "subgradient"
//! init = { kind = "random", seed = 3 }
//!
//! [sweep]
//! swept_parameter = "num_users"
//! values = [1, 2, 3, 4]
//! trials_per_point = 50
//! algorithms = ["wmmse", "oma_hd_waterfill"]
//!
//! [trace]
//! subcarrier = 2
//!
//! [oracle]
//! grid_points = 200
//! ```
//!
//! Every key is optional; missing keys take the defaults of the corresponding
//! Rust type, and unknown keys are rejected. Powers are given in dBm here and
//! converted to watts by [`ScenarioConfig::budgets`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::HdSplit;
use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::montecarlo::{Algorithm, SweepSpec, SweptParameter};
use crate::wmmse::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub swept_parameter: SweptParameter,
    pub values: Vec<f64>,
    pub trials_per_point: usize,
    pub seed0: u64,
    pub algorithms: Vec<Algorithm>,
    pub hd_split: HdSplit,
    pub oracle_grid_points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = SweepSpec::default();
        Self {
            swept_parameter: d.swept_parameter,
            values: d.values,
            trials_per_point: d.trials_per_point,
            seed0: d.seed0,
            algorithms: d.algorithms,
            hd_split: d.hd_split,
            oracle_grid_points: d.oracle_grid_points,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSection {
    pub subcarrier: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub grid_points: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { grid_points: 200 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    /// Scenario seed for `solve`, `trace` and `oracle`.
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub sweep: SweepSection,
    pub trace: TraceSection,
    pub oracle: OracleSection,
}

impl CliConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: CliConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Defaults when `path` is `None`.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.solver.validate()?;
        self.sweep_spec().validate()
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let s = &self.sweep;
        SweepSpec {
            swept_parameter: s.swept_parameter,
            values: s.values.clone(),
            trials_per_point: s.trials_per_point,
            seed0: s.seed0,
            algorithms: s.algorithms.clone(),
            scenario: self.scenario.clone(),
            solver: self.solver.clone(),
            hd_split: s.hd_split,
            oracle_grid_points: s.oracle_grid_points,
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
