//! Annealing drivers.

mod ensemble;
mod standard;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    GaussianRandomWalk, GeneticCrossover, Glauber, GlauberConfig, Langevin, LangevinConfig, LocalKernel,
    StretchConfig, StretchMove,
};
use crate::model::TargetModel;
use crate::schedule::AnnealingSchedule;
use crate::state::{ContinuousState, DiscreteState, State, WeightedSampleSet};

pub use ensemble::{run_ensemble_ais, run_ensemble_with, EnsembleRun};
pub use standard::{run_standard_ais, run_standard_ais_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    StandardAisMala,
    StandardAisGaussianMh,
    EnsembleNoExplore,
    EnsembleExplore,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::StandardAisMala, Variant::StandardAisGaussianMh, Variant::EnsembleNoExplore, Variant::EnsembleExplore];

    pub fn name(self) -> &'static str {
        match self {
            Variant::StandardAisMala => "standard_ais_mala",
            Variant::StandardAisGaussianMh => "standard_ais_gaussian_mh",
            Variant::EnsembleNoExplore => "ensemble_no_explore",
            Variant::EnsembleExplore => "ensemble_explore",
        }
    }

    pub fn is_ensemble(self) -> bool {
        matches!(self, Variant::EnsembleNoExplore | Variant::EnsembleExplore)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown sampler variant '{s}'")))
    }
}

/// Everything a driver needs besides the model and the random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    pub variant: Variant,
    pub particles: usize,
    pub schedule: AnnealingSchedule,
    pub langevin: LangevinConfig,
    pub stretch: StretchConfig,
    pub glauber: GlauberConfig,
    /// Variance of each coordinate of the random-walk proposal.
    pub mh_proposal_scale: f64,
    pub mh_sub_steps: usize,
    /// Snapshot interval, in annealing levels.
    pub record_every: usize,
    /// Compute birth-death rates once per level instead of before every
    /// particle's birth-death step.
    pub rates_per_sweep: bool,
}

impl SamplerSpec {
    /// Linear schedule with `steps` levels, MALA with step `Δt`, default
    /// exploration settings and a random-walk variance of 0.01.
    pub fn new(variant: Variant, particles: usize, steps: usize) -> Result<Self> {
        let schedule = AnnealingSchedule::linear(steps)?;
        let dt = schedule.dt();
        Ok(Self {
            variant,
            particles,
            schedule,
            langevin: LangevinConfig::mala(dt),
            stretch: StretchConfig::default(),
            glauber: GlauberConfig::default(),
            mh_proposal_scale: 0.01,
            mh_sub_steps: 1,
            record_every: steps,
            rates_per_sweep: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let required = if self.variant.is_ensemble() { 2 } else { 1 };
        if self.particles < required {
            return Err(Error::TooFewParticles { required, found: self.particles });
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        if !(self.mh_proposal_scale > 0.0) || !self.mh_proposal_scale.is_finite() {
            return Err(Error::invalid(format!("mh_proposal_scale must be positive, got {}", self.mh_proposal_scale)));
        }
        if self.mh_sub_steps == 0 {
            return Err(Error::invalid("mh_sub_steps must be at least 1"));
        }
        self.langevin.validate()?;
        self.stretch.validate()?;
        self.glauber.validate()
    }

    pub(crate) fn records(&self, level: usize) -> bool {
        level % self.record_every == 0 || level == self.schedule.steps()
    }
}

/// Receives snapshots at level 0, every `record_every` levels and at the last level.
pub trait Recorder<S> {
    fn record(&mut self, level: usize, samples: &WeightedSampleSet<S>) -> Result<()>;

    /// Drivers skip building snapshots when this is `false`.
    fn is_active(&self) -> bool {
        true
    }
}

/// Discards every snapshot.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoRecorder;

impl<S> Recorder<S> for NoRecorder {
    fn record(&mut self, _level: usize, _samples: &WeightedSampleSet<S>) -> Result<()> {
        Ok(())
    }

    fn is_active(&self) -> bool {
        false
    }
}

impl<S, F> Recorder<S> for F
where
    F: FnMut(usize, &WeightedSampleSet<S>) -> Result<()>,
{
    fn record(&mut self, level: usize, samples: &WeightedSampleSet<S>) -> Result<()> {
        self(level, samples)
    }
}

/// Local kernel used on continuous targets.
#[derive(Debug, Clone, Copy)]
pub enum ContinuousLocal {
    Langevin(Langevin),
    RandomWalk(GaussianRandomWalk),
}

impl<M: TargetModel<State = ContinuousState>> LocalKernel<M> for ContinuousLocal {
    fn step<R: Rng + ?Sized>(
        &self,
        x: &mut ContinuousState,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<()> {
        match self {
            ContinuousLocal::Langevin(k) => k.step(x, t, schedule, model, rng),
            ContinuousLocal::RandomWalk(k) => k.step(x, t, schedule, model, rng),
        }
    }
}

/// Picks the kernels a variant uses on a given state space.
pub trait StateSpace: State {
    type Local;
    type Explore;

    fn local_kernel(spec: &SamplerSpec) -> Result<Self::Local>;

    fn exploration(spec: &SamplerSpec) -> Self::Explore;
}

impl StateSpace for ContinuousState {
    type Local = ContinuousLocal;
    type Explore = StretchMove;

    fn local_kernel(spec: &SamplerSpec) -> Result<ContinuousLocal> {
        Ok(match spec.variant {
            Variant::StandardAisGaussianMh => ContinuousLocal::RandomWalk(GaussianRandomWalk {
                variance: spec.mh_proposal_scale,
                sub_steps: spec.mh_sub_steps,
            }),
            Variant::StandardAisMala => ContinuousLocal::Langevin(Langevin(LangevinConfig { adjusted: true, ..spec.langevin })),
            Variant::EnsembleNoExplore | Variant::EnsembleExplore => ContinuousLocal::Langevin(Langevin(spec.langevin)),
        })
    }

    fn exploration(spec: &SamplerSpec) -> StretchMove {
        StretchMove(spec.stretch)
    }
}

impl StateSpace for DiscreteState {
    type Local = Glauber;
    type Explore = GeneticCrossover;

    /// Glauber dynamics for every variant except the random-walk baseline,
    /// which has no meaning on spins.
    fn local_kernel(spec: &SamplerSpec) -> Result<Glauber> {
        if spec.variant == Variant::StandardAisGaussianMh {
            return Err(Error::invalid("standard_ais_gaussian_mh needs a continuous target"));
        }
        Ok(Glauber(spec.glauber))
    }

    fn exploration(_spec: &SamplerSpec) -> GeneticCrossover {
        GeneticCrossover
    }
}

/// Runs the driver matching `spec.variant`. Ensemble variants come back with
/// uniform weights.
pub fn run<M, Rec>(
    spec: &SamplerSpec,
    model: &M,
    stream: &crate::rng::RandomStream,
    recorder: &mut Rec,
) -> Result<WeightedSampleSet<M::State>>
where
    M: TargetModel,
    M::State: StateSpace,
    <M::State as StateSpace>::Local: LocalKernel<M>,
    <M::State as StateSpace>::Explore: crate::kernels::ExplorationMove<M>,
    Rec: Recorder<M::State>,
{
    if spec.variant.is_ensemble() {
        Ok(run_ensemble_ais(spec, model, stream, recorder)?.ensemble.to_weighted())
    } else {
        run_standard_ais(spec, model, stream, recorder)
    }
}

#[cfg(test)]
mod tests;
