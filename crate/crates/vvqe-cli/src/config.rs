//! Declarative experiment configuration (TOML) and its validation. Every
//! field that a mode requires is checked before any computation starts.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use vvqe_core::solve::OptimizerConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Mode {
    /// Full and particle-filtered exact spectra.
    Spectrum,
    /// Multi-start single-ansatz variance minimization.
    Survey,
    /// Equal-weight variance cost over orthogonal references.
    Ortho,
    /// Weighted-energy subspace-search cost.
    Ssvqe,
    /// Energy sum plus weighted variance sum.
    Mixed,
    /// Variance cost minimized by Hamiltonian-sampling SGD.
    Sgd,
    /// Classical MDS embedding of survey solutions.
    Mds,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::Survey => "survey",
            Mode::Ortho => "ortho",
            Mode::Ssvqe => "ssvqe",
            Mode::Mixed => "mixed",
            Mode::Sgd => "sgd",
            Mode::Mds => "mds",
        }
    }
}

/// Excitation lists: a named default enumeration or explicit tuples.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SinglesSpec {
    /// `"all"`: every orbital pair p < q.
    Named(String),
    Explicit(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DoublesSpec {
    /// `"disjoint"`: every pairing of two disjoint orbital pairs;
    /// `"occ-virt"`: occupied pairs of the reference into virtual pairs;
    /// `"none"`: no double excitations.
    Named(String),
    Explicit(Vec<(usize, usize, usize, usize)>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    #[serde(default = "default_singles")]
    pub singles: SinglesSpec,
    #[serde(default = "default_doubles")]
    pub doubles: DoublesSpec,
    #[serde(default = "one")]
    pub trotter_steps: usize,
}

fn default_singles() -> SinglesSpec {
    SinglesSpec::Named("all".into())
}

fn default_doubles() -> DoublesSpec {
    DoublesSpec::Named("disjoint".into())
}

fn one() -> usize {
    1
}

impl Default for AnsatzSection {
    fn default() -> Self {
        AnsatzSection {
            singles: default_singles(),
            doubles: default_doubles(),
            trotter_steps: 1,
        }
    }
}

/// Initial parameter vector: drawn or explicit.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Theta0 {
    /// `"zero"`, `"random"` (uniform on [0, 2*pi)), or `"random:LO:HI"`.
    Named(String),
    Explicit(Vec<f64>),
}

impl Default for Theta0 {
    fn default() -> Self {
        Theta0::Named("random".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_eta_v")]
    pub eta_v: f64,
    #[serde(default = "default_max_iter")]
    pub max_iterations: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tolerance: f64,
    #[serde(default = "default_stall_tol")]
    pub cost_stall_tolerance: f64,
    #[serde(default = "default_stall_window")]
    pub cost_stall_window: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Sampling schedule string like `"0:0.1,1000:1.0"`.
    #[serde(default)]
    pub schedule: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theta_snapshot_every: usize,
    #[serde(default)]
    pub theta0: Theta0,
}

fn default_lr() -> f64 {
    0.05
}
fn default_eta_v() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    5000
}
fn default_grad_tol() -> f64 {
    1e-8
}
fn default_stall_tol() -> f64 {
    1e-12
}
fn default_stall_window() -> usize {
    10
}
fn default_fd_step() -> f64 {
    1e-5
}

impl Default for OptimizerSection {
    fn default() -> Self {
        toml::from_str("").expect("empty optimizer section deserializes")
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SurveySection {
    #[serde(default = "default_n_starts")]
    pub n_starts: usize,
    #[serde(default = "default_accept")]
    pub accept_threshold: f64,
}

fn default_n_starts() -> usize {
    50
}
fn default_accept() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Restrict a second listing to this particle number.
    pub particle_sector: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MdsSection {
    /// summary.json of a survey run to embed.
    pub input: Option<PathBuf>,
    /// `"periodic-cosine"` (default) or `"euclidean"`.
    pub metric: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must match the subcommand when present.
    pub mode: Option<Mode>,
    pub hamiltonian: Option<PathBuf>,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    /// Reference bitstrings for the set modes (ortho/ssvqe/mixed/sgd).
    #[serde(default)]
    pub references: Vec<String>,
    /// Single reference for survey mode; defaults to the fixture's
    /// hf_reference metadata when absent.
    pub reference: Option<String>,
    /// Subspace-search weights; defaults to k, k-1, .., 1 scaled by 1/k.
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub survey: SurveySection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub mds: MdsSection,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Mode-specific presence checks; run before touching any input data.
    pub fn validate(&self, mode: Mode) -> Result<(), ConfigError> {
        if let Some(declared) = self.mode {
            if declared != mode {
                return Err(ConfigError::Invalid(format!(
                    "config declares mode `{}` but the `{}` subcommand was invoked",
                    declared.as_str(),
                    mode.as_str()
                )));
            }
        }
        match mode {
            Mode::Mds => {
                if self.mds.input.is_none() {
                    return Err(ConfigError::Invalid(
                        "mds mode requires [mds] input = <survey summary.json>".into(),
                    ));
                }
                if let Some(m) = &self.mds.metric {
                    if m != "periodic-cosine" && m != "euclidean" {
                        return Err(ConfigError::Invalid(format!(
                            "unknown mds metric `{m}`"
                        )));
                    }
                }
            }
            Mode::Spectrum => {
                if self.hamiltonian.is_none() {
                    return Err(ConfigError::Invalid(
                        "spectrum mode requires a hamiltonian path".into(),
                    ));
                }
            }
            Mode::Survey => {
                if self.hamiltonian.is_none() {
                    return Err(ConfigError::Invalid(
                        "survey mode requires a hamiltonian path".into(),
                    ));
                }
                if self.survey.n_starts == 0 {
                    return Err(ConfigError::Invalid("survey.n_starts must be >= 1".into()));
                }
            }
            Mode::Ortho | Mode::Ssvqe | Mode::Mixed | Mode::Sgd => {
                if self.hamiltonian.is_none() {
                    return Err(ConfigError::Invalid(format!(
                        "{} mode requires a hamiltonian path",
                        mode.as_str()
                    )));
                }
                if self.references.is_empty() {
                    return Err(ConfigError::Invalid(format!(
                        "{} mode requires a non-empty `references` list",
                        mode.as_str()
                    )));
                }
                if mode == Mode::Sgd && self.optimizer.schedule.is_none() {
                    return Err(ConfigError::Invalid(
                        "sgd mode requires optimizer.schedule (e.g. \"0:0.1,1000:1.0\")".into(),
                    ));
                }
                if mode == Mode::Mixed && self.optimizer.eta_v < 0.0 {
                    return Err(ConfigError::Invalid(
                        "optimizer.eta_v must be nonnegative".into(),
                    ));
                }
            }
        }
        if self.ansatz.trotter_steps == 0 {
            return Err(ConfigError::Invalid("ansatz.trotter_steps must be >= 1".into()));
        }
        if let Some(s) = &self.optimizer.schedule {
            parse_schedule(s)?;
        }
        Ok(())
    }

    /// Optimizer settings with the schedule string expanded.
    pub fn optimizer_config(&self, seed_override: Option<u64>) -> Result<OptimizerConfig, ConfigError> {
        let schedule = match &self.optimizer.schedule {
            Some(s) => parse_schedule(s)?,
            None => vec![(0, 1.0)],
        };
        Ok(OptimizerConfig {
            learning_rate: self.optimizer.learning_rate,
            eta_v: self.optimizer.eta_v,
            max_iterations: self.optimizer.max_iterations,
            grad_tolerance: self.optimizer.grad_tolerance,
            cost_stall_tolerance: self.optimizer.cost_stall_tolerance,
            cost_stall_window: self.optimizer.cost_stall_window,
            fd_step: self.optimizer.fd_step,
            schedule,
            seed: seed_override.unwrap_or(self.optimizer.seed),
            theta_snapshot_every: self.optimizer.theta_snapshot_every,
        })
    }
}

/// Parse a schedule string `"0:0.1,1000:1.0"` into (iteration, rate) pairs.
pub fn parse_schedule(text: &str) -> Result<Vec<(usize, f64)>, ConfigError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (iter_s, rate_s) = part.split_once(':').ok_or_else(|| {
            ConfigError::Invalid(format!("schedule entry `{part}` is not ITER:RATE"))
        })?;
        let iter: usize = iter_s.trim().parse().map_err(|_| {
            ConfigError::Invalid(format!("schedule iteration `{iter_s}` is not an integer"))
        })?;
        let rate: f64 = rate_s.trim().parse().map_err(|_| {
            ConfigError::Invalid(format!("schedule rate `{rate_s}` is not a number"))
        })?;
        out.push((iter, rate));
    }
    if out.is_empty() {
        return Err(ConfigError::Invalid("schedule is empty".into()));
    }
    if out[0].0 != 0 {
        return Err(ConfigError::Invalid(
            "schedule must start at iteration 0".into(),
        ));
    }
    for w in out.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(ConfigError::Invalid(
                "schedule iterations must be strictly increasing".into(),
            ));
        }
    }
    for &(_, r) in &out {
        if !(r > 0.0 && r <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "schedule rate {r} outside (0, 1]"
            )));
        }
    }
    Ok(out)
}
