//! Kernels for binary targets: single-site Glauber (heat-bath) updates and the
//! uniform genetic crossover pair move.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{partner_index, ExplorationMove, LocalKernel, Updated};
use crate::error::{Error, Result};
use crate::model::{interpolate_energy, TargetModel};
use crate::schedule::AnnealingSchedule;
use crate::state::{DiscreteState, Ensemble};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlauberConfig {
    /// Site updates per particle per annealing level.
    pub sub_steps: usize,
}

impl Default for GlauberConfig {
    fn default() -> Self {
        Self { sub_steps: 1 }
    }
}

impl GlauberConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sub_steps == 0 {
            return Err(Error::invalid("Glauber sub_steps must be at least 1"));
        }
        Ok(())
    }
}

/// `1 / (1 + exp(delta))`, evaluated without overflow.
#[inline]
pub(crate) fn logistic_of_negative(delta: f64) -> f64 {
    if delta >= 0.0 {
        let e = (-delta).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + delta.exp())
    }
}

/// Heat-bath probability of flipping `site`:
/// `e^{-U_t(y)} / (e^{-U_t(x)} + e^{-U_t(y)})` with `y` the flipped state.
pub fn glauber_flip_probability<M: TargetModel<State = DiscreteState>>(
    x: &DiscreteState,
    site: usize,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
) -> Result<f64> {
    let ex = interpolate_energy(schedule, model, t, x)?;
    let ey = interpolate_energy(schedule, model, t, &x.flipped(site))?;
    Ok(logistic_of_negative(ey - ex))
}

/// One heat-bath update at a uniformly chosen site.
pub fn glauber_step<M, R>(
    x: &DiscreteState,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
    rng: &mut R,
) -> Result<DiscreteState>
where
    M: TargetModel<State = DiscreteState>,
    R: Rng + ?Sized,
{
    let site = rng.random_range(0..x.len());
    let r = glauber_flip_probability(x, site, t, schedule, model)?;
    let u: f64 = rng.random();
    Ok(if u < r { x.flipped(site) } else { x.clone() })
}

/// Per-site crossover mask; a set bit takes the coordinate from the partner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossoverMask {
    words: Vec<u64>,
    len: usize,
}

impl CrossoverMask {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut m = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            if b {
                m.words[k / 64] |= 1 << (k % 64);
            }
        }
        m
    }

    /// `len` independent fair bits.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect();
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Offspring `(y_i, y_j)`: `y_i` keeps `x_i` where the mask is 0 and takes
/// `x_j` where it is 1; `y_j` gets the complementary coordinates.
pub fn crossover_offspring(
    xi: &DiscreteState,
    xj: &DiscreteState,
    mask: &CrossoverMask,
) -> Result<(DiscreteState, DiscreteState)> {
    if xi.len() != xj.len() || mask.len() != xi.len() {
        return Err(Error::LengthMismatch { expected: xi.len(), found: xj.len().max(mask.len()) });
    }
    let mut yi = Vec::with_capacity(mask.words.len());
    let mut yj = Vec::with_capacity(mask.words.len());
    for ((a, b), m) in xi.words().iter().zip(xj.words()).zip(&mask.words) {
        yi.push((a & !m) | (b & m));
        yj.push((b & !m) | (a & m));
    }
    Ok((DiscreteState::from_words(yi, xi.len())?, DiscreteState::from_words(yj, xi.len())?))
}

/// `U_t(x_i) + U_t(x_j) - U_t(y_i) - U_t(y_j)`.
pub fn crossover_log_acceptance<M: TargetModel<State = DiscreteState>>(
    parents: (&DiscreteState, &DiscreteState),
    offspring: (&DiscreteState, &DiscreteState),
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
) -> Result<f64> {
    let e = |x: &DiscreteState| interpolate_energy(schedule, model, t, x);
    Ok(e(parents.0)? + e(parents.1)? - e(offspring.0)? - e(offspring.1)?)
}

/// Crossover of slots `i` and `j` with a given mask, accepted iff
/// `u < min{1, exp(log acceptance)}`.
#[allow(clippy::too_many_arguments)]
pub fn genetic_crossover_with_mask<M: TargetModel<State = DiscreteState>>(
    i: usize,
    j: usize,
    mask: &CrossoverMask,
    ensemble: &mut Ensemble<DiscreteState>,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
    u: f64,
) -> Result<Updated> {
    let (xi, xj) = (&ensemble.particles[i], &ensemble.particles[j]);
    let (yi, yj) = crossover_offspring(xi, xj, mask)?;
    if &yi == xi && &yj == xj {
        return Ok(Updated::Unchanged);
    }
    let log_alpha = crossover_log_acceptance((xi, xj), (&yi, &yj), t, schedule, model)?;
    if u < log_alpha.min(0.0).exp() {
        ensemble.particles[i] = yi;
        ensemble.particles[j] = yj;
        Ok(Updated::Pair(i, j))
    } else {
        Ok(Updated::Unchanged)
    }
}

/// Uniform crossover between particle `i` and a uniformly chosen partner.
pub fn genetic_crossover<M, R>(
    i: usize,
    ensemble: &mut Ensemble<DiscreteState>,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
    rng: &mut R,
) -> Result<Updated>
where
    M: TargetModel<State = DiscreteState>,
    R: Rng + ?Sized,
{
    ensemble.require_at_least(2)?;
    let j = partner_index(i, ensemble.len(), rng);
    let mask = CrossoverMask::random(ensemble.particles[i].len(), rng);
    let u: f64 = rng.random();
    genetic_crossover_with_mask(i, j, &mask, ensemble, t, schedule, model, u)
}

/// Glauber dynamics as a [`LocalKernel`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Glauber(pub GlauberConfig);

impl<M: TargetModel<State = DiscreteState>> LocalKernel<M> for Glauber {
    fn step<R: Rng + ?Sized>(
        &self,
        x: &mut DiscreteState,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<()> {
        for _ in 0..self.0.sub_steps {
            *x = glauber_step(x, t, schedule, model, rng)?;
        }
        Ok(())
    }
}

/// Genetic crossover as an [`ExplorationMove`].
#[derive(Debug, Clone, Copy, Default)]
pub struct GeneticCrossover;

impl<M: TargetModel<State = DiscreteState>> ExplorationMove<M> for GeneticCrossover {
    fn apply<R: Rng + ?Sized>(
        &self,
        i: usize,
        ensemble: &mut Ensemble<DiscreteState>,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<Updated> {
        genetic_crossover(i, ensemble, t, schedule, model, rng)
    }
}
