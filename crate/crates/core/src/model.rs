//! The target-model interface and the interpolated energies `U_t`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::schedule::AnnealingSchedule;
use crate::state::{ContinuousState, State};

/// A target `p ∝ exp(-U)` paired with an easy initial distribution `p_0 ∝ exp(-U_0)`.
pub trait TargetModel: Send + Sync {
    type State: State;

    fn dimension(&self) -> usize;

    fn initial_energy(&self, x: &Self::State) -> f64;

    fn target_energy(&self, x: &Self::State) -> f64;

    /// Writes `∇U_0(x)` into `out`.
    fn initial_gradient(&self, _x: &Self::State, _out: &mut [f64]) -> Result<()> {
        Err(Error::NotDifferentiable)
    }

    /// Writes `∇U(x)` into `out`.
    fn target_gradient(&self, _x: &Self::State, _out: &mut [f64]) -> Result<()> {
        Err(Error::NotDifferentiable)
    }

    /// Draws one state from `p_0`.
    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;
}

/// `(1 - c)·u0 + c·u`, exact at the endpoints.
#[inline]
pub fn blend(c: f64, initial: f64, target: f64) -> f64 {
    if c == 0.0 {
        initial
    } else if c == 1.0 {
        target
    } else {
        (1.0 - c) * initial + c * target
    }
}

pub(crate) fn check_dimension<M: TargetModel>(model: &M, x: &M::State) -> Result<()> {
    if x.dimension() != model.dimension() {
        Err(Error::DimensionMismatch { expected: model.dimension(), found: x.dimension() })
    } else {
        Ok(())
    }
}

pub(crate) fn non_finite<S: State>(value: f64, x: &S) -> Error {
    Error::NonFiniteEnergy { value, state: format!("{x:?}") }
}

/// `U_t(x) = (1 - c(t))·U_0(x) + c(t)·U(x)`.
pub fn interpolate_energy<M: TargetModel>(
    schedule: &AnnealingSchedule,
    model: &M,
    t: f64,
    x: &M::State,
) -> Result<f64> {
    check_dimension(model, x)?;
    let c = schedule.c(t);
    let u0 = if c == 1.0 { 0.0 } else { model.initial_energy(x) };
    let u = if c == 0.0 { 0.0 } else { model.target_energy(x) };
    let value = blend(c, u0, u);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(non_finite(value, x))
    }
}

/// `∇U_t(x) = (1 - c(t))·∇U_0(x) + c(t)·∇U(x)`.
pub fn interpolate_gradient<M: TargetModel>(
    schedule: &AnnealingSchedule,
    model: &M,
    t: f64,
    x: &M::State,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; model.dimension()];
    interpolate_gradient_into(schedule, model, t, x, &mut out)?;
    Ok(out)
}

pub fn interpolate_gradient_into<M: TargetModel>(
    schedule: &AnnealingSchedule,
    model: &M,
    t: f64,
    x: &M::State,
    out: &mut [f64],
) -> Result<()> {
    check_dimension(model, x)?;
    if out.len() != model.dimension() {
        return Err(Error::LengthMismatch { expected: model.dimension(), found: out.len() });
    }
    let c = schedule.c(t);
    if c == 0.0 {
        return model.initial_gradient(x, out);
    }
    if c == 1.0 {
        return model.target_gradient(x, out);
    }
    let mut target = vec![0.0; out.len()];
    model.initial_gradient(x, out)?;
    model.target_gradient(x, &mut target)?;
    for (o, g) in out.iter_mut().zip(&target) {
        *o = (1.0 - c) * *o + c * g;
    }
    Ok(())
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn finite_difference_gradient(
    f: impl Fn(&ContinuousState) -> f64,
    x: &ContinuousState,
    h: f64,
) -> Vec<f64> {
    let mut probe = x.clone();
    (0..x.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let plus = f(&probe);
            probe[k] = orig - h;
            let minus = f(&probe);
            probe[k] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}
