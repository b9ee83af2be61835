//! Transition kernels, split into local (single-particle) kernels and
//! exploration moves that act on the ensemble.

pub mod continuous;
pub mod discrete;

use rand::Rng;

use crate::error::Result;
use crate::model::TargetModel;
use crate::schedule::AnnealingSchedule;
use crate::state::Ensemble;

pub use continuous::{
    gaussian_mh_step, langevin_proposal, langevin_step, mala_log_acceptance, sample_stretch_scalar,
    snooker_move, stretch_acceptance, stretch_cdf, stretch_density, stretch_scalar_from_uniform,
    GaussianRandomWalk, Langevin, LangevinConfig, StretchConfig, StretchMove,
};
pub use discrete::{
    crossover_log_acceptance, crossover_offspring, genetic_crossover, genetic_crossover_with_mask,
    glauber_flip_probability, glauber_step, CrossoverMask, Glauber, GlauberConfig, GeneticCrossover,
};

/// Slots of an ensemble touched by a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Updated {
    Unchanged,
    One(usize),
    Pair(usize, usize),
}

impl Updated {
    pub fn slots(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            Updated::Unchanged => (None, None),
            Updated::One(i) => (Some(i), None),
            Updated::Pair(i, j) => (Some(i), Some(j)),
        };
        a.into_iter().chain(b)
    }
}

/// A Markov kernel on one particle that leaves `p_t ∝ exp(-U_t)` invariant
/// (or approximately so, for ULA).
pub trait LocalKernel<M: TargetModel>: Sync {
    fn step<R: Rng + ?Sized>(
        &self,
        x: &mut M::State,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<()>;
}

/// A move that updates particle `i` using the rest of the ensemble.
pub trait ExplorationMove<M: TargetModel> {
    fn apply<R: Rng + ?Sized>(
        &self,
        i: usize,
        ensemble: &mut Ensemble<M::State>,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<Updated>;
}

/// The identity move; used by the ensemble sampler without exploration.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoExploration;

impl<M: TargetModel> ExplorationMove<M> for NoExploration {
    fn apply<R: Rng + ?Sized>(
        &self,
        _i: usize,
        _ensemble: &mut Ensemble<M::State>,
        _t: f64,
        _schedule: &AnnealingSchedule,
        _model: &M,
        _rng: &mut R,
    ) -> Result<Updated> {
        Ok(Updated::Unchanged)
    }
}

/// Uniform index in `0..n` excluding `i`. Requires `n >= 2`.
pub(crate) fn partner_index<R: Rng + ?Sized>(i: usize, n: usize, rng: &mut R) -> usize {
    debug_assert!(n >= 2 && i < n);
    let j = rng.random_range(0..n - 1);
    if j >= i {
        j + 1
    } else {
        j
    }
}
