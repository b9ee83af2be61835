use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Recorder, SamplerSpec, StateSpace};
use crate::error::{Error, Result};
use crate::kernels::LocalKernel;
use crate::model::{check_dimension, non_finite, TargetModel};
use crate::rng::RandomStream;
use crate::state::{State, WeightedSampleSet};

struct Walker<S> {
    state: S,
    log_weight: f64,
    rng: ChaCha8Rng,
}

/// Standard AIS with the kernel the variant selects. Particle `i` draws from
/// `stream.substream(i)`, so results do not depend on the thread count.
pub fn run_standard_ais<M, Rec>(
    spec: &SamplerSpec,
    model: &M,
    stream: &RandomStream,
    recorder: &mut Rec,
) -> Result<WeightedSampleSet<M::State>>
where
    M: TargetModel,
    M::State: StateSpace,
    <M::State as StateSpace>::Local: LocalKernel<M>,
    Rec: Recorder<M::State>,
{
    if spec.variant.is_ensemble() {
        return Err(Error::invalid(format!("{} is not a standard AIS variant", spec.variant)));
    }
    let kernel = <M::State as StateSpace>::local_kernel(spec)?;
    run_standard_ais_with(spec, model, &kernel, stream, recorder)
}

/// Standard AIS with an explicit transition kernel.
///
/// At level `l` each particle first gains `U_{l-1}(s) - U_l(s)` in log-weight
/// and then takes one kernel step at `t_l`.
pub fn run_standard_ais_with<M, K, Rec>(
    spec: &SamplerSpec,
    model: &M,
    kernel: &K,
    stream: &RandomStream,
    recorder: &mut Rec,
) -> Result<WeightedSampleSet<M::State>>
where
    M: TargetModel,
    K: LocalKernel<M>,
    Rec: Recorder<M::State>,
{
    spec.validate()?;
    let schedule = &spec.schedule;
    let mut walkers: Vec<Walker<M::State>> = (0..spec.particles)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64).rng();
            let state = model.sample_initial(&mut rng);
            Walker { state, log_weight: 0.0, rng }
        })
        .collect();
    snapshot(&walkers, 0, spec, recorder)?;

    for level in 1..=schedule.steps() {
        let c_prev = schedule.c(schedule.time(level - 1));
        let t = schedule.time(level);
        let c = schedule.c(t);
        let outcome: Vec<Result<()>> = walkers
            .par_iter_mut()
            .enumerate()
            .map(|(i, w)| advance(w, i, level, c_prev, c, t, spec, model, kernel))
            .collect();
        // report the lowest failing particle so errors are reproducible
        outcome.into_iter().collect::<Result<Vec<()>>>()?;
        snapshot(&walkers, level, spec, recorder)?;
    }

    let (particles, log_weights) = walkers.into_iter().map(|w| (w.state, w.log_weight)).unzip();
    WeightedSampleSet::new(particles, log_weights)
}

#[allow(clippy::too_many_arguments)]
fn advance<M: TargetModel, K: LocalKernel<M>>(
    w: &mut Walker<M::State>,
    particle: usize,
    level: usize,
    c_prev: f64,
    c: f64,
    t: f64,
    spec: &SamplerSpec,
    model: &M,
    kernel: &K,
) -> Result<()> {
    check_dimension(model, &w.state)?;
    let diff = model.target_energy(&w.state) - model.initial_energy(&w.state);
    if !diff.is_finite() {
        return Err(non_finite(diff, &w.state));
    }
    // U_{l-1}(s) - U_l(s) = (c_{l-1} - c_l)·(U(s) - U_0(s))
    w.log_weight += (c_prev - c) * diff;
    if !w.log_weight.is_finite() {
        return Err(Error::NonFiniteWeight { particle, level });
    }
    kernel.step(&mut w.state, t, &spec.schedule, model, &mut w.rng)?;
    if !w.state.is_finite() {
        return Err(Error::NonFiniteState { particle, level });
    }
    Ok(())
}

fn snapshot<S: State, Rec: Recorder<S>>(
    walkers: &[Walker<S>],
    level: usize,
    spec: &SamplerSpec,
    recorder: &mut Rec,
) -> Result<()> {
    if !recorder.is_active() || !spec.records(level) {
        return Ok(());
    }
    let set = WeightedSampleSet::new(
        walkers.iter().map(|w| w.state.clone()).collect(),
        walkers.iter().map(|w| w.log_weight).collect(),
    )?;
    recorder.record(level, &set)
}
