//! Scenario files.
//!
//! A scenario is a TOML document with a top-level `model`, `generations` and a
//! `[params]` table, plus the table for the chosen model. Unknown keys are
//! rejected. Example:
//!
//! ```toml
//! model = "deterministic"
//! generations = 29
//!
//! [params]
//! sample_size = 9
//! p_plus_e = 0.2
//! p_minus_e = 0.7
//!
//! [deterministic]
//! alpha0 = 0.9
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tpdyn::stochastic::DEFAULT_MATRIX_CAP;
use tpdyn::{ChainSpec, ChainState, CohortWeights, EnvParams, HistoryState, PopulationState};

use crate::error::{CliError, CliResult};

/// Largest accepted number of contributing generations.
pub const MAX_COHORTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Deterministic,
    Stochastic,
    Multigen,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Deterministic => "deterministic",
            Model::Stochastic => "stochastic",
            Model::Multigen => "multigen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: Model,
    pub generations: usize,
    pub params: ParamsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<DeterministicSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<StochasticSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multigen: Option<MultigenSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub sample_size: u64,
    pub p_plus_e: f64,
    pub p_minus_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterministicSection {
    pub alpha0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticSection {
    pub pop_size: u64,
    pub count0: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultigenSection {
    /// Oldest first.
    pub history: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub trials: u64,
    pub seed: u64,
    /// Proportions to check; defaults to the initial state and a coarse grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// Learner draws in the generation histogram of the stochastic check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_draws: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    PPlusE,
    PMinusE,
    SampleSize,
    Alpha0,
    PopSize,
    WeightNewest,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::PPlusE => "p_plus_e",
            AxisName::PMinusE => "p_minus_e",
            AxisName::SampleSize => "sample_size",
            AxisName::Alpha0 => "alpha0",
            AxisName::PopSize => "pop_size",
            AxisName::WeightNewest => "weight_newest",
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, AxisName::SampleSize | AxisName::PopSize)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

/// A checked scenario with every value converted to its core type.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: EnvParams,
    pub generations: usize,
    pub initial: Initial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Deterministic(PopulationState),
    Stochastic { spec: ChainSpec, state: ChainState, seed: u64, matrix_cap: u64 },
    Multigen { history: HistoryState, weights: CohortWeights },
}

impl Scenario {
    pub fn model(&self) -> Model {
        match self.initial {
            Initial::Deterministic(_) => Model::Deterministic,
            Initial::Stochastic { .. } => Model::Stochastic,
            Initial::Multigen { .. } => Model::Multigen,
        }
    }

    /// Proportion of productive speakers in the starting generation (the
    /// newest entry of a history).
    pub fn initial_alpha(&self) -> f64 {
        match &self.initial {
            Initial::Deterministic(s) => s.alpha(),
            Initial::Stochastic { state, .. } => state.fraction(),
            Initial::Multigen { history, .. } => history.newest(),
        }
    }
}

fn missing(section: &str, model: Model) -> CliError {
    CliError::Config(format!("model = \"{}\" requires a [{section}] table", model.as_str()))
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("serializing config: {e}")))
    }

    pub fn env_params(&self) -> CliResult<EnvParams> {
        let p = &self.params;
        if p.sample_size < 2 {
            return Err(CliError::Config(format!("params.sample_size: must be at least 2, got {}", p.sample_size)));
        }
        for (name, v) in [("params.p_plus_e", p.p_plus_e), ("params.p_minus_e", p.p_minus_e)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::Config(format!("{name}: must be a probability in [0, 1], got {v}")));
            }
        }
        EnvParams::new(p.sample_size, p.p_plus_e, p.p_minus_e).map_err(|e| CliError::field("params", e))
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        let params = self.env_params()?;
        let initial = match self.model {
            Model::Deterministic => {
                let d = self.deterministic.ok_or_else(|| missing("deterministic", self.model))?;
                Initial::Deterministic(
                    PopulationState::new(d.alpha0).map_err(|e| CliError::field("deterministic.alpha0", e))?,
                )
            }
            Model::Stochastic => {
                let s = self.stochastic.ok_or_else(|| missing("stochastic", self.model))?;
                let spec = ChainSpec::new(s.pop_size, params).map_err(|e| CliError::field("stochastic.pop_size", e))?;
                let state = spec.state(s.count0).map_err(|e| CliError::field("stochastic.count0", e))?;
                let matrix_cap = s.matrix_cap.unwrap_or(DEFAULT_MATRIX_CAP);
                Initial::Stochastic { spec, state, seed: s.seed, matrix_cap }
            }
            Model::Multigen => {
                let m = self.multigen.as_ref().ok_or_else(|| missing("multigen", self.model))?;
                if m.weights.len() > MAX_COHORTS {
                    return Err(CliError::Config(format!(
                        "multigen.weights: at most {MAX_COHORTS} generations are supported, got {}",
                        m.weights.len()
                    )));
                }
                let weights =
                    CohortWeights::new(m.weights.clone()).map_err(|e| CliError::field("multigen.weights", e))?;
                let history =
                    HistoryState::new(m.history.clone()).map_err(|e| CliError::field("multigen.history", e))?;
                if history.len() != weights.len() {
                    return Err(CliError::Config(format!(
                        "multigen.history: needs one entry per weight ({}), got {}",
                        weights.len(),
                        history.len()
                    )));
                }
                Initial::Multigen { history, weights }
            }
        };
        Ok(Scenario { params, generations: self.generations, initial })
    }

    pub fn validate_section(&self) -> CliResult<&ValidateSection> {
        let v = self
            .validate
            .as_ref()
            .ok_or_else(|| CliError::Config("validate requires a [validate] table with `trials` and `seed`".into()))?;
        if v.trials == 0 {
            return Err(CliError::Config("validate.trials: must be positive".into()));
        }
        if let Some(alphas) = &v.alphas {
            for &a in alphas {
                PopulationState::new(a).map_err(|e| CliError::field("validate.alphas", e))?;
            }
        }
        if v.histogram_draws == Some(0) {
            return Err(CliError::Config("validate.histogram_draws: must be positive".into()));
        }
        Ok(v)
    }

    pub fn sweep_section(&self) -> CliResult<&SweepSection> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("sweep requires a [sweep] table with [[sweep.axes]] entries".into()))?;
        if s.axes.is_empty() || s.axes.len() > 2 {
            return Err(CliError::Config(format!("sweep.axes: expected 1 or 2 axes, got {}", s.axes.len())));
        }
        if s.axes.len() == 2 && s.axes[0].name == s.axes[1].name {
            return Err(CliError::Config(format!("sweep.axes: axis {} given twice", s.axes[0].name.as_str())));
        }
        if s.workers == Some(0) {
            return Err(CliError::Config("sweep.workers: must be positive".into()));
        }
        for axis in &s.axes {
            let name = axis.name.as_str();
            if axis.steps < 2 {
                return Err(CliError::Config(format!(
                    "sweep.axes.{name}.steps: must be at least 2, got {}",
                    axis.steps
                )));
            }
            if !axis.min.is_finite() || !axis.max.is_finite() || axis.min > axis.max {
                return Err(CliError::Config(format!(
                    "sweep.axes.{name}: need finite min <= max, got [{}, {}]",
                    axis.min, axis.max
                )));
            }
            let applies = match axis.name {
                AxisName::PopSize => self.model == Model::Stochastic,
                AxisName::WeightNewest => self.model == Model::Multigen,
                _ => true,
            };
            if !applies {
                return Err(CliError::Config(format!(
                    "sweep.axes.{name}: not applicable to model \"{}\"",
                    self.model.as_str()
                )));
            }
        }
        Ok(s)
    }

    pub fn output(&self) -> OutputSection {
        self.output.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"
model = "deterministic"
generations = 29

[params]
sample_size = 9
p_plus_e = 0.2
p_minus_e = 0.7

[deterministic]
alpha0 = 0.9
"#;

    #[test]
    fn parses_and_checks() {
        let cfg = ScenarioConfig::parse(REFERENCE).unwrap();
        let s = cfg.scenario().unwrap();
        assert_eq!(s.model(), Model::Deterministic);
        assert_eq!(s.initial_alpha(), 0.9);
        assert_eq!(s.params.cutoff(), 4);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = REFERENCE.replace("alpha0 = 0.9", "alpha0 = 0.9\nalpha1 = 0.3");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        let msg = err.to_string();
        assert_eq!(err.exit_code(), 2);
        assert!(msg.contains("alpha1") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn field_diagnostics() {
        let bad = REFERENCE.replace("p_plus_e = 0.2", "p_plus_e = 1.2");
        let msg = ScenarioConfig::parse(&bad).unwrap().scenario().unwrap_err().to_string();
        assert!(msg.contains("params.p_plus_e"), "{msg}");
        let no_section = REFERENCE.replace("model = \"deterministic\"", "model = \"stochastic\"");
        let msg = ScenarioConfig::parse(&no_section).unwrap().scenario().unwrap_err().to_string();
        assert!(msg.contains("[stochastic]"), "{msg}");
    }

    #[test]
    fn multigen_limits() {
        let base = REFERENCE.replace("model = \"deterministic\"", "model = \"multigen\"");
        let nine = format!(
            "{base}\n[multigen]\nhistory = [{h}]\nweights = [{w}]\n",
            h = ["0.5"; 9].join(","),
            w = ["0.0", "0.0", "0.0", "0.0", "0.0", "0.0", "0.0", "0.0", "1.0"].join(",")
        );
        let msg = ScenarioConfig::parse(&nine).unwrap().scenario().unwrap_err().to_string();
        assert!(msg.contains("at most 8"), "{msg}");
        let short = format!("{base}\n[multigen]\nhistory = [0.9]\nweights = [0.5, 0.5]\n");
        let msg = ScenarioConfig::parse(&short).unwrap().scenario().unwrap_err().to_string();
        assert!(msg.contains("multigen.history"), "{msg}");
    }

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::parse(REFERENCE).unwrap();
        assert_eq!(ScenarioConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }
}
