//! Experiment configuration files.
//!
//! A config is a flat TOML table. `model` names one of the [presets](crate::presets);
//! every other key overrides a preset default. Omitted keys keep the preset
//! value, so `model = "gl1d"` alone is a complete config.

use std::path::{Path, PathBuf};

use ensemble_ais::kernels::{GlauberConfig, LangevinConfig, StretchConfig};
use ensemble_ais::{AnnealingSchedule, SamplerSpec, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::presets::{preset, ModelSpec};

/// Output files a run may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Metrics,
    Samples,
    Summary,
    Timings,
    Config,
}

impl Emit {
    pub const ALL: [Emit; 5] = [Emit::Metrics, Emit::Samples, Emit::Summary, Emit::Timings, Emit::Config];
}

/// The file as written, before defaults are filled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    pub variant: Option<Variant>,
    #[serde(alias = "N")]
    pub particles: Option<usize>,
    #[serde(alias = "L")]
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub output: Option<PathBuf>,
    pub emit: Option<Vec<Emit>>,

    pub record_every: Option<usize>,
    pub rates_per_sweep: Option<bool>,
    pub step_size: Option<f64>,
    pub adjusted: Option<bool>,
    pub langevin_sub_steps: Option<usize>,
    pub stretch_bound: Option<f64>,
    pub stretch_sub_steps: Option<usize>,
    pub glauber_sub_steps: Option<usize>,
    pub mh_proposal_scale: Option<f64>,
    pub mh_sub_steps: Option<usize>,

    pub beta: Option<f64>,
    pub lambda_gl: Option<f64>,
    pub size: Option<usize>,
    pub length: Option<f64>,
    pub initial_variance: Option<f64>,
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    pub coupling: Option<f64>,
    pub target_variance: Option<f64>,
    pub mode_radius: Option<f64>,
}

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Preset the model came from.
    pub model_name: String,
    pub model: ModelSpec,
    pub variant: Variant,
    pub particles: usize,
    pub steps: usize,
    pub seed: u64,
    pub replicates: usize,
    pub output: PathBuf,
    pub emit: Vec<Emit>,
    pub record_every: usize,
    pub rates_per_sweep: bool,
    pub langevin: LangevinConfig,
    pub stretch: StretchConfig,
    pub glauber: GlauberConfig,
    pub mh_proposal_scale: f64,
    pub mh_sub_steps: usize,
    /// Ball radius for mode occupancy on the Gaussian mixture.
    pub mode_radius: f64,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_REPLICATES: usize = 1;
pub const DEFAULT_MODE_RADIUS: f64 = 2.0;
pub const DEFAULT_OUTPUT: &str = "results";

/// Snapshots per run when `record_every` is omitted.
pub const DEFAULT_SNAPSHOTS: usize = 10;

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    read_config_file(path)?.resolve().map_err(|e| match e {
        HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn load_config_str(text: &str) -> Result<ExperimentConfig> {
    parse_config(text)?.resolve()
}

/// Parses without resolving, for callers that apply overrides first.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| HarnessError::config(e.to_string()))
}

pub fn read_config_file(path: impl AsRef<Path>) -> Result<ConfigFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text).map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))
}

fn reject(present: &[(&str, bool)], model: &str) -> Result<()> {
    match present.iter().find(|(_, set)| *set) {
        Some((key, _)) => Err(HarnessError::config(format!("key '{key}' does not apply to model '{model}'"))),
        None => Ok(()),
    }
}

impl ConfigFile {
    /// Fills defaults from the named preset and validates the result.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let name = self.model.as_deref().ok_or_else(|| HarnessError::config("missing required key 'model'"))?;
        let p = preset(name).ok_or_else(|| HarnessError::config(format!("unknown model '{name}'")))?;

        let model = self.resolve_model(name, p.model)?;
        let particles = self.particles.unwrap_or(p.particles);
        let steps = self.steps.unwrap_or(p.steps);
        if steps == 0 {
            return Err(HarnessError::config("'steps' must be at least 1"));
        }
        let dt = 1.0 / steps as f64;
        let replicates = self.replicates.unwrap_or(DEFAULT_REPLICATES);
        if replicates == 0 {
            return Err(HarnessError::config("'replicates' must be at least 1"));
        }
        let mode_radius = self.mode_radius.unwrap_or(DEFAULT_MODE_RADIUS);
        if !(mode_radius > 0.0) {
            return Err(HarnessError::config("'mode_radius' must be positive"));
        }
        let mut emit = self.emit.clone().unwrap_or_else(|| Emit::ALL.to_vec());
        emit.sort();
        emit.dedup();

        let cfg = ExperimentConfig {
            model_name: name.to_string(),
            model,
            variant: self.variant.unwrap_or(Variant::EnsembleExplore),
            particles,
            steps,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            replicates,
            output: self.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
            emit,
            record_every: self.record_every.unwrap_or(steps.div_ceil(DEFAULT_SNAPSHOTS)),
            rates_per_sweep: self.rates_per_sweep.unwrap_or(false),
            langevin: LangevinConfig {
                step_size: self.step_size.or(p.step_size).unwrap_or(dt),
                adjusted: self.adjusted.unwrap_or(true),
                sub_steps: self.langevin_sub_steps.unwrap_or(p.langevin_sub_steps),
            },
            stretch: StretchConfig {
                support_bound: self.stretch_bound.unwrap_or(StretchConfig::default().support_bound),
                sub_steps: self.stretch_sub_steps.unwrap_or(p.stretch_sub_steps),
            },
            glauber: GlauberConfig { sub_steps: self.glauber_sub_steps.unwrap_or(p.glauber_sub_steps) },
            mh_proposal_scale: self.mh_proposal_scale.unwrap_or(p.mh_proposal_scale),
            mh_sub_steps: self.mh_sub_steps.unwrap_or(1),
            mode_radius,
        };
        cfg.sampler_spec()?;
        if model.is_discrete() && cfg.variant == Variant::StandardAisGaussianMh {
            return Err(HarnessError::config(format!("variant '{}' needs a continuous model", cfg.variant)));
        }
        Ok(cfg)
    }

    fn resolve_model(&self, name: &str, base: ModelSpec) -> Result<ModelSpec> {
        let s = self;
        let radius = s.mode_radius.is_some();
        let spec = match base {
            ModelSpec::GaussianMixture => {
                reject(
                    &[
                        ("beta", s.beta.is_some()),
                        ("lambda_gl", s.lambda_gl.is_some()),
                        ("size", s.size.is_some()),
                        ("length", s.length.is_some()),
                        ("initial_variance", s.initial_variance.is_some()),
                        ("j1", s.j1.is_some()),
                        ("j2", s.j2.is_some()),
                        ("coupling", s.coupling.is_some()),
                        ("target_variance", s.target_variance.is_some()),
                    ],
                    name,
                )?;
                base
            }
            ModelSpec::GinzburgLandau1D { lambda_gl, size, beta, length, initial_variance }
            | ModelSpec::GinzburgLandau2D { lambda_gl, size, beta, length, initial_variance } => {
                reject(
                    &[
                        ("j1", s.j1.is_some()),
                        ("j2", s.j2.is_some()),
                        ("coupling", s.coupling.is_some()),
                        ("target_variance", s.target_variance.is_some()),
                        ("mode_radius", radius),
                    ],
                    name,
                )?;
                let lambda_gl = s.lambda_gl.unwrap_or(lambda_gl);
                let size = s.size.unwrap_or(size);
                let beta = s.beta.unwrap_or(beta);
                let length = s.length.unwrap_or(length);
                let initial_variance = s.initial_variance.unwrap_or(initial_variance);
                if matches!(base, ModelSpec::GinzburgLandau1D { .. }) {
                    ModelSpec::GinzburgLandau1D { lambda_gl, size, beta, length, initial_variance }
                } else {
                    ModelSpec::GinzburgLandau2D { lambda_gl, size, beta, length, initial_variance }
                }
            }
            ModelSpec::DoubleWell { beta } => {
                reject(
                    &[
                        ("lambda_gl", s.lambda_gl.is_some()),
                        ("size", s.size.is_some()),
                        ("length", s.length.is_some()),
                        ("initial_variance", s.initial_variance.is_some()),
                        ("j1", s.j1.is_some()),
                        ("j2", s.j2.is_some()),
                        ("coupling", s.coupling.is_some()),
                        ("target_variance", s.target_variance.is_some()),
                        ("mode_radius", radius),
                    ],
                    name,
                )?;
                ModelSpec::DoubleWell { beta: s.beta.unwrap_or(beta) }
            }
            ModelSpec::Ising1D { size, j1, j2, beta } => {
                reject(
                    &[
                        ("lambda_gl", s.lambda_gl.is_some()),
                        ("length", s.length.is_some()),
                        ("initial_variance", s.initial_variance.is_some()),
                        ("coupling", s.coupling.is_some()),
                        ("target_variance", s.target_variance.is_some()),
                        ("mode_radius", radius),
                    ],
                    name,
                )?;
                ModelSpec::Ising1D {
                    size: s.size.unwrap_or(size),
                    j1: s.j1.unwrap_or(j1),
                    j2: s.j2.unwrap_or(j2),
                    beta: s.beta.unwrap_or(beta),
                }
            }
            ModelSpec::Ising2D { size, coupling, beta } => {
                reject(
                    &[
                        ("lambda_gl", s.lambda_gl.is_some()),
                        ("length", s.length.is_some()),
                        ("initial_variance", s.initial_variance.is_some()),
                        ("j1", s.j1.is_some()),
                        ("j2", s.j2.is_some()),
                        ("target_variance", s.target_variance.is_some()),
                        ("mode_radius", radius),
                    ],
                    name,
                )?;
                ModelSpec::Ising2D {
                    size: s.size.unwrap_or(size),
                    coupling: s.coupling.unwrap_or(coupling),
                    beta: s.beta.unwrap_or(beta),
                }
            }
            ModelSpec::GaussianAnneal { size, initial_variance, target_variance } => {
                reject(
                    &[
                        ("beta", s.beta.is_some()),
                        ("lambda_gl", s.lambda_gl.is_some()),
                        ("length", s.length.is_some()),
                        ("j1", s.j1.is_some()),
                        ("j2", s.j2.is_some()),
                        ("coupling", s.coupling.is_some()),
                        ("mode_radius", radius),
                    ],
                    name,
                )?;
                ModelSpec::GaussianAnneal {
                    size: s.size.unwrap_or(size),
                    initial_variance: s.initial_variance.unwrap_or(initial_variance),
                    target_variance: s.target_variance.unwrap_or(target_variance),
                }
            }
        };
        // constructors do the range checks
        crate::experiment::check_model(&spec).map_err(|e| HarnessError::config(e.to_string()))?;
        Ok(spec)
    }
}

impl ExperimentConfig {
    pub fn from_preset(name: &str) -> Result<Self> {
        ConfigFile { model: Some(name.to_string()), ..Default::default() }.resolve()
    }

    pub fn sampler_spec(&self) -> Result<SamplerSpec> {
        let spec = SamplerSpec {
            variant: self.variant,
            particles: self.particles,
            schedule: AnnealingSchedule::linear(self.steps)?,
            langevin: self.langevin,
            stretch: self.stretch,
            glauber: self.glauber,
            mh_proposal_scale: self.mh_proposal_scale,
            mh_sub_steps: self.mh_sub_steps,
            record_every: self.record_every,
            rates_per_sweep: self.rates_per_sweep,
        };
        spec.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        Ok(spec)
    }

    /// Every knob written out explicitly.
    pub fn to_file(&self) -> ConfigFile {
        let mut f = ConfigFile {
            model: Some(self.model_name.clone()),
            variant: Some(self.variant),
            particles: Some(self.particles),
            steps: Some(self.steps),
            seed: Some(self.seed),
            replicates: Some(self.replicates),
            output: Some(self.output.clone()),
            emit: Some(self.emit.clone()),
            record_every: Some(self.record_every),
            rates_per_sweep: Some(self.rates_per_sweep),
            step_size: Some(self.langevin.step_size),
            adjusted: Some(self.langevin.adjusted),
            langevin_sub_steps: Some(self.langevin.sub_steps),
            stretch_bound: Some(self.stretch.support_bound),
            stretch_sub_steps: Some(self.stretch.sub_steps),
            glauber_sub_steps: Some(self.glauber.sub_steps),
            mh_proposal_scale: Some(self.mh_proposal_scale),
            mh_sub_steps: Some(self.mh_sub_steps),
            ..Default::default()
        };
        match self.model {
            ModelSpec::GaussianMixture => f.mode_radius = Some(self.mode_radius),
            ModelSpec::GinzburgLandau1D { lambda_gl, size, beta, length, initial_variance }
            | ModelSpec::GinzburgLandau2D { lambda_gl, size, beta, length, initial_variance } => {
                f.lambda_gl = Some(lambda_gl);
                f.size = Some(size);
                f.beta = Some(beta);
                f.length = Some(length);
                f.initial_variance = Some(initial_variance);
            }
            ModelSpec::DoubleWell { beta } => f.beta = Some(beta),
            ModelSpec::Ising1D { size, j1, j2, beta } => {
                f.size = Some(size);
                f.j1 = Some(j1);
                f.j2 = Some(j2);
                f.beta = Some(beta);
            }
            ModelSpec::Ising2D { size, coupling, beta } => {
                f.size = Some(size);
                f.coupling = Some(coupling);
                f.beta = Some(beta);
            }
            ModelSpec::GaussianAnneal { size, initial_variance, target_variance } => {
                f.size = Some(size);
                f.initial_variance = Some(initial_variance);
                f.target_variance = Some(target_variance);
            }
        }
        f
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes to TOML")
    }
}
