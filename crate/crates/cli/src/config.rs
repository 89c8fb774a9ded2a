//! Sweep configuration. Precedence: command-line flags, then the JSON
//! config file, then built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lipkin_core::hull::HullOptions;
use lipkin_core::lmg::{LmgParams, Source};
use lipkin_core::sim::{GateKind, NoiseModel};
use lipkin_core::tomography::TomographyPlan;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Range { min: f64, max: f64, steps: usize },
    List(Vec<f64>),
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            LambdaGrid::Range { min, max, steps } => {
                let last = (*steps - 1) as f64;
                (0..*steps)
                    .map(|k| if k + 1 == *steps { *max } else { min + (max - min) * k as f64 / last })
                    .collect()
            }
            LambdaGrid::List(v) => v.clone(),
        }
    }

    fn validate(&self) -> CliResult<()> {
        match self {
            LambdaGrid::Range { min, max, steps } => {
                if *steps < 2 {
                    return Err(CliError::Config(format!("lambda_grid.steps must be >= 2, got {steps}")));
                }
                if !(min.is_finite() && max.is_finite() && max > min) {
                    return Err(CliError::Config("lambda_grid needs finite min < max".into()));
                }
            }
            LambdaGrid::List(v) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::Config("lambda_grid list must be non-empty and finite".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub n_particles: u32,
    pub epsilon_values: Vec<f64>,
    pub lambda_grid: LambdaGrid,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_particles: 3,
            epsilon_values: vec![1.0, -1.0],
            lambda_grid: LambdaGrid::Range {
                min: -25.0,
                max: 25.0,
                steps: 101,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    SimIdeal,
    SimNoisy,
}

impl Mode {
    /// Accepts the flag spellings `exact|ideal|noisy` and the CSV spellings.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Mode::Exact),
            "ideal" | "sim_ideal" => Some(Mode::SimIdeal),
            "noisy" | "sim_noisy" => Some(Mode::SimNoisy),
            _ => None,
        }
    }

    pub fn source(&self) -> Source {
        match self {
            Mode::Exact => Source::Exact,
            Mode::SimIdeal => Source::SimIdeal,
            Mode::SimNoisy => Source::SimNoisy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-qubit T1, same time unit as `gate_durations`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_durations: Option<BTreeMap<GateKind, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_gate_p: Option<f64>,
}

impl NoiseConfig {
    pub fn model(&self) -> NoiseModel {
        NoiseModel {
            t1_per_qubit: self.t1.clone().unwrap_or_default(),
            gate_durations: self.gate_durations.clone().unwrap_or_default(),
            extra_damping_per_gate: self.per_gate_p,
        }
    }

    fn is_empty(&self) -> bool {
        self.per_gate_p.is_none() && self.t1.as_ref().is_none_or(|t| t.is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullConfig {
    /// Absolute tolerance; defaults to 1e-9 times the coordinate scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_tol: Option<f64>,
}

impl HullConfig {
    pub fn resolve(&self, scale: f64) -> HullOptions {
        let base = HullOptions::exact();
        HullOptions {
            eps: self.eps.unwrap_or(base.eps * scale.max(1.0)),
            angle_tol: self.angle_tol.unwrap_or(base.angle_tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Subset of csv, jsonl, json, obj, svg.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: ["csv", "jsonl", "json", "obj", "svg"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Shots per basis group and repetition; defaults by register size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<u32>,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub hull: HullConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_mode() -> Mode {
    Mode::Exact
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            mode: Mode::Exact,
            shots: None,
            repetitions: None,
            root_seed: 0,
            noise: NoiseConfig::default(),
            hull: HullConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Flag values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub mode: Option<Mode>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(path: Option<&Path>, o: &Overrides) -> CliResult<Self> {
        let mut c = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        c.apply(o);
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.out {
            self.output.directory = d.clone();
        }
        if let Some(s) = o.seed {
            self.root_seed = s;
        }
        if let Some(s) = o.shots {
            self.shots = Some(s);
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let m = &self.model;
        if m.n_particles == 0 {
            return Err(CliError::Config("n_particles must be >= 1".into()));
        }
        if m.epsilon_values.is_empty() || m.epsilon_values.iter().any(|e| !e.is_finite()) {
            return Err(CliError::Config("epsilon_values must be non-empty and finite".into()));
        }
        m.lambda_grid.validate()?;
        for f in &self.output.formats {
            if !["csv", "jsonl", "json", "obj", "svg"].contains(&f.as_str()) {
                return Err(CliError::Config(format!("unknown output format {f:?}")));
            }
        }
        if self.mode != Mode::Exact {
            if !(3..=4).contains(&m.n_particles) {
                return Err(CliError::Config(format!(
                    "simulation supports 3 or 4 particles, got {}",
                    m.n_particles
                )));
            }
            if self.shots == Some(0) || self.repetitions == Some(0) {
                return Err(CliError::Config("shots and repetitions must be >= 1".into()));
            }
        }
        if self.mode == Mode::SimNoisy {
            if self.noise.is_empty() {
                return Err(CliError::Config("sim_noisy needs noise.per_gate_p or noise.t1".into()));
            }
            self.noise.model().validate()?;
        }
        Ok(())
    }

    /// Grid in output order: epsilon outer, lambda inner.
    pub fn grid(&self) -> CliResult<Vec<LmgParams>> {
        let lambdas = self.model.lambda_grid.values();
        let mut out = Vec::with_capacity(lambdas.len() * self.model.epsilon_values.len());
        for &e in &self.model.epsilon_values {
            for &l in &lambdas {
                out.push(LmgParams::new(e, l, self.model.n_particles)?);
            }
        }
        Ok(out)
    }

    pub fn plan(&self) -> TomographyPlan {
        let n = self.model.n_particles as usize;
        let (shots, reps) = TomographyPlan::default_shots(n);
        TomographyPlan::lmg(n, self.shots.unwrap_or(shots), self.repetitions.unwrap_or(reps))
    }

    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
