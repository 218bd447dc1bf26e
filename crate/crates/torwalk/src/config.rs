//! Run configuration: a TOML table, patched by `key=value` overrides, then
//! deserialized with unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use torwalk_core::saw::{PseudocriticalPoint, Sampler};
use torwalk_core::WalkLengthLaw;

use crate::error::{Result, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Rlrw,
    Rllerw,
    Saw,
    Ising,
    ExactRlrw,
    Verify,
    Analyze,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Rlrw => "rlrw",
            Model::Rllerw => "rllerw",
            Model::Saw => "saw",
            Model::Ising => "ising",
            Model::ExactRlrw => "exact-rlrw",
            Model::Verify => "verify",
            Model::Analyze => "analyze",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sides {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawVariant {
    Geometric,
    HalfNormal,
    DiscretizedExponential,
    CompleteGraphSaw,
    Deterministic,
}

/// Walk-length law; the mean is either `mean` or `L^mu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub variant: LawVariant,
    pub mean: Option<f64>,
    pub mu: Option<f64>,
    pub n0: Option<u64>,
    pub sites: Option<u64>,
    pub fugacity: Option<f64>,
}

impl LawConfig {
    pub fn build(&self, l: usize) -> Result<WalkLengthLaw> {
        let scale = |what: &str| -> Result<f64> {
            match (self.mean, self.mu) {
                (Some(m), None) => Ok(m),
                (None, Some(mu)) => Ok((l as f64).powf(mu)),
                _ => Err(RunError::config(format!("law.{what}: give exactly one of `law.mean` and `law.mu`"))),
            }
        };
        let law = match self.variant {
            LawVariant::Geometric => WalkLengthLaw::geometric(scale("mean")?)?,
            LawVariant::HalfNormal => WalkLengthLaw::half_normal(scale("mean")?)?,
            LawVariant::DiscretizedExponential => WalkLengthLaw::discretized_exponential(scale("mean")?)?,
            LawVariant::Deterministic => match (self.n0, self.mu) {
                (Some(n), None) => WalkLengthLaw::deterministic(n),
                (None, Some(mu)) => WalkLengthLaw::deterministic((l as f64).powf(mu).round() as u64),
                _ => return Err(RunError::config("law.n0: give exactly one of `law.n0` and `law.mu`")),
            },
            LawVariant::CompleteGraphSaw => {
                let n = self.sites.ok_or_else(|| RunError::config("law.sites is required for complete-graph-saw"))?;
                let z = self.fugacity.ok_or_else(|| RunError::config("law.fugacity is required for complete-graph-saw"))?;
                WalkLengthLaw::complete_graph_saw(n, z)?
            }
        };
        Ok(law)
    }
}

/// Either a fixed `z`, or `z_L = z_c - a L^{-λ}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FugacityConfig {
    pub z: Option<f64>,
    pub z_c: Option<f64>,
    pub a: Option<f64>,
    pub lambda: Option<f64>,
}

impl FugacityConfig {
    pub fn at(&self, l: usize) -> Result<f64> {
        match (self.z, self.z_c) {
            (Some(z), None) => {
                if self.a.is_some() || self.lambda.is_some() {
                    return Err(RunError::config("fugacity.z cannot be combined with fugacity.a or fugacity.lambda"));
                }
                Ok(z)
            }
            (None, Some(z_c)) => {
                let a = self.a.unwrap_or(0.0);
                let lambda = match self.lambda {
                    Some(v) => v,
                    None if a == 0.0 => f64::INFINITY,
                    None => return Err(RunError::config("fugacity.lambda is required when fugacity.a is nonzero")),
                };
                PseudocriticalPoint::new(z_c, a, lambda, l)?
                    .z()
                    .map_err(|e| RunError::config(format!("fugacity: {e}")))
            }
            _ => Err(RunError::config("fugacity: give exactly one of `fugacity.z` and `fugacity.z_c`")),
        }
    }

    /// Exponent reported in the `lambda` column (`nan` for a fixed `z`).
    pub fn lambda_column(&self) -> f64 {
        match (self.z_c, self.lambda) {
            (Some(_), Some(l)) => l,
            _ => f64::NAN,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerChoice {
    Reversible,
    #[default]
    Lifted,
}

impl From<SamplerChoice> for Sampler {
    fn from(s: SamplerChoice) -> Self {
        match s {
            SamplerChoice::Reversible => Sampler::Reversible,
            SamplerChoice::Lifted => Sampler::Lifted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    #[serde(default = "default_tail_cut")]
    pub tail_cut: f64,
    #[serde(default = "default_max_states")]
    pub max_states: usize,
    /// Orbit-reduced DP (otherwise one state per site).
    #[serde(default = "yes")]
    pub symmetric: bool,
    /// Also evaluate `Z^d` on an absorbing box and write the plateau discrepancy.
    #[serde(default)]
    pub infinite: bool,
    pub box_radius: Option<usize>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            tail_cut: default_tail_cut(),
            max_states: default_max_states(),
            symmetric: true,
            infinite: false,
            box_radius: None,
        }
    }
}

fn default_tail_cut() -> f64 {
    1e-12
}
fn default_max_states() -> usize {
    torwalk_core::stencil::DEFAULT_MAX_STATES
}
fn yes() -> bool {
    true
}
fn default_seed() -> u64 {
    1
}
fn default_replicas() -> u32 {
    1
}
fn default_batches() -> usize {
    20
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(rename = "L", default)]
    pub l: Option<Sides>,
    #[serde(default)]
    pub law: Option<LawConfig>,
    #[serde(default)]
    pub fugacity: Option<FugacityConfig>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: u32,
    /// Walks per replica (rlrw, rllerw) or Markov-chain steps per replica (saw, ising).
    #[serde(default)]
    pub steps: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default)]
    pub sampler: SamplerChoice,
    /// Spacing of the stored series for `τ_int` (saw).
    #[serde(default)]
    pub series_stride: Option<u64>,
    /// Steps between trail measurements (ising); defaults to one sweep.
    #[serde(default)]
    pub measure_every: Option<u64>,
    #[serde(default)]
    pub exact: ExactConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

impl RunConfig {
    pub fn dim(&self) -> Result<usize> {
        match self.d {
            Some(d) if d >= 1 => Ok(d),
            Some(_) => Err(RunError::config("d: must be at least 1")),
            None => Err(RunError::config(format!("d: required for model {}", self.model.name()))),
        }
    }

    pub fn sides(&self) -> Result<Vec<usize>> {
        let v = match &self.l {
            Some(Sides::One(l)) => vec![*l],
            Some(Sides::Many(v)) if !v.is_empty() => v.clone(),
            _ => return Err(RunError::config(format!("L: required for model {}", self.model.name()))),
        };
        if v.contains(&0) {
            return Err(RunError::config("L: sides must be positive"));
        }
        Ok(v)
    }

    pub fn law(&self) -> Result<&LawConfig> {
        self.law.as_ref().ok_or_else(|| RunError::config(format!("law: required for model {}", self.model.name())))
    }

    pub fn fugacity(&self) -> Result<&FugacityConfig> {
        self.fugacity
            .as_ref()
            .ok_or_else(|| RunError::config(format!("fugacity: required for model {}", self.model.name())))
    }

    pub fn require_steps(&self) -> Result<u64> {
        if self.steps == 0 {
            return Err(RunError::config("steps: must be positive"));
        }
        Ok(self.steps)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| RunError::config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Read a TOML file (or start empty) and apply `key=value` overrides.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| RunError::io(p, e))?;
            text.parse::<toml::Table>().map_err(|e| RunError::Parse { path: p.into(), msg: e.to_string() })?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    RunConfig::from_table(table)
}

/// `a.b=value`; the value is parsed as TOML, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| RunError::config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(RunError::config(format!("override `{assignment}` has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| RunError::config(format!("{key}: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
