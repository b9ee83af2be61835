use rand::Rng;

use super::{Recorder, SamplerSpec, StateSpace, Variant};
use crate::birthdeath::{birth_death_step, BirthDeathEvent, BirthDeathRates};
use crate::error::{Error, Result};
use crate::kernels::{ExplorationMove, LocalKernel, NoExploration, Updated};
use crate::model::{check_dimension, non_finite, TargetModel};
use crate::rng::RandomStream;
use crate::state::{Ensemble, State, WeightedSampleSet};

/// Final ensemble of an ensemble-based run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun<S> {
    pub ensemble: Ensemble<S>,
    /// `U(x_i) - U_0(x_i)` for the final particles.
    pub energy_differences: Vec<f64>,
}

/// Ensemble AIS with the kernels the state space provides. The whole run
/// consumes the single generator `stream.rng()`.
pub fn run_ensemble_ais<M, Rec>(
    spec: &SamplerSpec,
    model: &M,
    stream: &RandomStream,
    recorder: &mut Rec,
) -> Result<EnsembleRun<M::State>>
where
    M: TargetModel,
    M::State: StateSpace,
    <M::State as StateSpace>::Local: LocalKernel<M>,
    <M::State as StateSpace>::Explore: ExplorationMove<M>,
    Rec: Recorder<M::State>,
{
    let local = <M::State as StateSpace>::local_kernel(spec)?;
    let mut rng = stream.rng();
    match spec.variant {
        Variant::EnsembleExplore => {
            let explore = <M::State as StateSpace>::exploration(spec);
            run_ensemble_with(spec, model, &local, &explore, &mut rng, recorder)
        }
        Variant::EnsembleNoExplore => run_ensemble_with(spec, model, &local, &NoExploration, &mut rng, recorder),
        other => Err(Error::invalid(format!("{other} is not an ensemble variant"))),
    }
}

/// Ensemble AIS with explicit kernels and generator.
///
/// For every level `l` and particle `i`, in order: the local kernel moves
/// `x_i`, the exploration move acts on `i`, then `i` takes one birth-death
/// step, all at `t_l`.
pub fn run_ensemble_with<M, K, E, R, Rec>(
    spec: &SamplerSpec,
    model: &M,
    local: &K,
    explore: &E,
    rng: &mut R,
    recorder: &mut Rec,
) -> Result<EnsembleRun<M::State>>
where
    M: TargetModel,
    K: LocalKernel<M>,
    E: ExplorationMove<M>,
    R: Rng + ?Sized,
    Rec: Recorder<M::State>,
{
    spec.validate()?;
    let n = spec.particles;
    if n < 2 {
        return Err(Error::TooFewParticles { required: 2, found: n });
    }
    let schedule = &spec.schedule;
    let particles: Vec<M::State> = (0..n).map(|_| model.sample_initial(rng)).collect();
    let mut ensemble = Ensemble::new(particles, 0.0);
    // U - U_0 per particle, refreshed whenever a slot changes
    let mut diffs = ensemble
        .particles
        .iter()
        .enumerate()
        .map(|(i, x)| difference(model, x, i, 0))
        .collect::<Result<Vec<f64>>>()?;
    snapshot(&ensemble, 0, spec, recorder)?;

    for level in 1..=schedule.steps() {
        let t = schedule.time(level);
        let c_prime = schedule.c_prime(t);
        let dt = schedule.dt();
        ensemble.time = t;
        let mut sweep_rates = None;
        if spec.rates_per_sweep {
            sweep_rates = Some(BirthDeathRates::from_differences(&diffs, c_prime, dt)?);
        }
        for i in 0..n {
            local.step(&mut ensemble.particles[i], t, schedule, model, rng)?;
            diffs[i] = difference(model, &ensemble.particles[i], i, level)?;

            let moved = explore.apply(i, &mut ensemble, t, schedule, model, rng)?;
            if moved != Updated::Unchanged {
                for slot in moved.slots() {
                    diffs[slot] = difference(model, &ensemble.particles[slot], slot, level)?;
                }
            }

            let fresh;
            let rates = match &sweep_rates {
                Some(r) => r,
                None => {
                    fresh = BirthDeathRates::from_differences(&diffs, c_prime, dt)?;
                    &fresh
                }
            };
            match birth_death_step(i, &mut ensemble, rates, rng)? {
                BirthDeathEvent::None => {}
                BirthDeathEvent::Killed { killed, source } => diffs[killed] = diffs[source],
                BirthDeathEvent::Duplicated { source, replaced } => diffs[replaced] = diffs[source],
            }
        }
        snapshot(&ensemble, level, spec, recorder)?;
    }
    Ok(EnsembleRun { ensemble, energy_differences: diffs })
}

fn difference<M: TargetModel>(model: &M, x: &M::State, particle: usize, level: usize) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFiniteState { particle, level });
    }
    check_dimension(model, x)?;
    let d = model.target_energy(x) - model.initial_energy(x);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(non_finite(d, x))
    }
}

fn snapshot<S: State, Rec: Recorder<S>>(
    ensemble: &Ensemble<S>,
    level: usize,
    spec: &SamplerSpec,
    recorder: &mut Rec,
) -> Result<()> {
    if !recorder.is_active() || !spec.records(level) {
        return Ok(());
    }
    recorder.record(level, &WeightedSampleSet::uniform(ensemble.particles.clone()))
}
