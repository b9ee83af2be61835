//! Kernels for targets on `R^d`: Langevin steps (ULA / MALA), a Gaussian
//! random-walk Metropolis baseline, and the snooker move realised as an
//! affine-invariant stretch move.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{partner_index, ExplorationMove, LocalKernel, Updated};
use crate::error::{Error, Result};
use crate::model::{check_dimension, interpolate_energy, interpolate_gradient_into, TargetModel};
use crate::schedule::AnnealingSchedule;
use crate::state::{ContinuousState, Ensemble};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    /// Langevin step `Δτ`.
    pub step_size: f64,
    /// `true` for MALA, `false` for ULA.
    pub adjusted: bool,
    /// Langevin steps per particle per annealing level.
    pub sub_steps: usize,
}

impl LangevinConfig {
    pub fn mala(step_size: f64) -> Self {
        Self { step_size, adjusted: true, sub_steps: 1 }
    }

    pub fn ula(step_size: f64) -> Self {
        Self { step_size, adjusted: false, sub_steps: 1 }
    }

    pub fn with_sub_steps(mut self, sub_steps: usize) -> Self {
        self.sub_steps = sub_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size >= 0.0) || !self.step_size.is_finite() {
            return Err(Error::invalid(format!("Langevin step size must be non-negative, got {}", self.step_size)));
        }
        if self.sub_steps == 0 {
            return Err(Error::invalid("Langevin sub_steps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchConfig {
    /// Support `[1/a, a]` of the stretch density; must exceed 1.
    pub support_bound: f64,
    /// Stretch attempts per particle per annealing level.
    pub sub_steps: usize,
}

impl Default for StretchConfig {
    fn default() -> Self {
        Self { support_bound: 2.0, sub_steps: 1 }
    }
}

impl StretchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.support_bound > 1.0) || !self.support_bound.is_finite() {
            return Err(Error::invalid(format!("stretch bound a must exceed 1, got {}", self.support_bound)));
        }
        if self.sub_steps == 0 {
            return Err(Error::invalid("stretch sub_steps must be at least 1"));
        }
        Ok(())
    }
}

/// `x - Δτ·∇U_t(x) + sqrt(2Δτ)·ξ`.
pub fn langevin_proposal(x: &[f64], gradient: &[f64], step_size: f64, noise: &[f64]) -> ContinuousState {
    let scale = (2.0 * step_size).sqrt();
    x.iter()
        .zip(gradient)
        .zip(noise)
        .map(|((xi, gi), ni)| xi - step_size * gi + scale * ni)
        .collect::<Vec<_>>()
        .into()
}

/// Log of the MALA acceptance ratio for the move `x -> y` at time `t`.
///
/// Returns `-inf` when the proposal energy is not finite.
pub fn mala_log_acceptance<M: TargetModel<State = ContinuousState>>(
    x: &ContinuousState,
    y: &ContinuousState,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
    step_size: f64,
) -> Result<f64> {
    let ex = interpolate_energy(schedule, model, t, x)?;
    let gx = {
        let mut g = vec![0.0; x.len()];
        interpolate_gradient_into(schedule, model, t, x, &mut g)?;
        g
    };
    let Ok(ey) = interpolate_energy(schedule, model, t, y) else {
        return Ok(f64::NEG_INFINITY);
    };
    let mut gy = vec![0.0; y.len()];
    interpolate_gradient_into(schedule, model, t, y, &mut gy)?;
    Ok(mala_log_ratio(x, ex, &gx, y, ey, &gy, step_size))
}

fn mala_log_ratio(x: &[f64], ex: f64, gx: &[f64], y: &[f64], ey: f64, gy: &[f64], tau: f64) -> f64 {
    // log q(a -> b) = -|b - a + τ∇U(a)|² / (4τ)
    let forward: f64 = y.iter().zip(x).zip(gx).map(|((b, a), g)| (b - a + tau * g).powi(2)).sum();
    let backward: f64 = x.iter().zip(y).zip(gy).map(|((b, a), g)| (b - a + tau * g).powi(2)).sum();
    let r = ex - ey + (forward - backward) / (4.0 * tau);
    if r.is_nan() {
        f64::NEG_INFINITY
    } else {
        r
    }
}

/// One ULA or MALA step at annealing time `t`.
pub fn langevin_step<M, R>(
    x: &ContinuousState,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
    cfg: &LangevinConfig,
    rng: &mut R,
) -> Result<ContinuousState>
where
    M: TargetModel<State = ContinuousState>,
    R: Rng + ?Sized,
{
    check_dimension(model, x)?;
    let tau = cfg.step_size;
    if tau == 0.0 {
        return Ok(x.clone());
    }
    let mut gx = vec![0.0; x.len()];
    interpolate_gradient_into(schedule, model, t, x, &mut gx)?;
    let noise: Vec<f64> = (0..x.len()).map(|_| rng.sample(StandardNormal)).collect();
    let y = langevin_proposal(x, &gx, tau, &noise);

    if !cfg.adjusted {
        // ULA has no rejection step, so a blown-up proposal is an error.
        interpolate_energy(schedule, model, t, &y)?;
        return Ok(y);
    }

    let ex = interpolate_energy(schedule, model, t, x)?;
    let ey = match interpolate_energy(schedule, model, t, &y) {
        Ok(e) => e,
        Err(_) => return Ok(x.clone()),
    };
    let mut gy = vec![0.0; y.len()];
    interpolate_gradient_into(schedule, model, t, &y, &mut gy)?;
    let log_alpha = mala_log_ratio(x, ex, &gx, &y, ey, &gy, tau);
    let u: f64 = rng.random();
    if u < log_alpha.min(0.0).exp() {
        Ok(y)
    } else {
        Ok(x.clone())
    }
}

/// Gaussian random-walk Metropolis step with isotropic proposal variance.
pub fn gaussian_mh_step<M, R>(
    x: &ContinuousState,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
    variance: f64,
    rng: &mut R,
) -> Result<ContinuousState>
where
    M: TargetModel<State = ContinuousState>,
    R: Rng + ?Sized,
{
    let ex = interpolate_energy(schedule, model, t, x)?;
    let sd = variance.sqrt();
    let y: ContinuousState = x
        .iter()
        .map(|xi| xi + sd * rng.sample::<f64, _>(StandardNormal))
        .collect::<Vec<_>>()
        .into();
    let u: f64 = rng.random();
    match interpolate_energy(schedule, model, t, &y) {
        Ok(ey) if u < (ex - ey).min(0.0).exp() => Ok(y),
        _ => Ok(x.clone()),
    }
}

/// Normalised stretch density `g(z) ∝ 1/sqrt(z)` on `[1/a, a]`.
pub fn stretch_density(a: f64, z: f64) -> f64 {
    if z < 1.0 / a || z > a {
        return 0.0;
    }
    let norm = 2.0 * (a.sqrt() - 1.0 / a.sqrt());
    1.0 / (norm * z.sqrt())
}

/// CDF of the stretch density.
pub fn stretch_cdf(a: f64, z: f64) -> f64 {
    let lo = 1.0 / a.sqrt();
    let hi = a.sqrt();
    if z <= 1.0 / a {
        0.0
    } else if z >= a {
        1.0
    } else {
        (z.sqrt() - lo) / (hi - lo)
    }
}

/// Inverse CDF: `λ = (u·(√a - 1/√a) + 1/√a)²`.
pub fn stretch_scalar_from_uniform(a: f64, u: f64) -> f64 {
    let lo = 1.0 / a.sqrt();
    let v = u * (a.sqrt() - lo) + lo;
    v * v
}

pub fn sample_stretch_scalar<R: Rng + ?Sized>(cfg: &StretchConfig, rng: &mut R) -> f64 {
    stretch_scalar_from_uniform(cfg.support_bound, rng.random())
}

/// `A_t(u, v, λ) = min{1, |λ|^(d-1) · exp(U_t(u) - U_t(λu + (1-λ)v))}`.
///
/// Coincident `u` and `v` give 1 (the move is a no-op); a non-finite energy at
/// the proposal gives 0.
pub fn stretch_acceptance<M: TargetModel<State = ContinuousState>>(
    u: &ContinuousState,
    v: &ContinuousState,
    lambda: f64,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
) -> Result<f64> {
    if u == v {
        return Ok(1.0);
    }
    let eu = interpolate_energy(schedule, model, t, u)?;
    let w = stretch_point(u, v, lambda);
    Ok(stretch_log_ratio(eu, &w, lambda, t, schedule, model).min(0.0).exp())
}

fn stretch_point(u: &[f64], v: &[f64], lambda: f64) -> ContinuousState {
    u.iter()
        .zip(v)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect::<Vec<_>>()
        .into()
}

fn stretch_log_ratio<M: TargetModel<State = ContinuousState>>(
    energy_u: f64,
    w: &ContinuousState,
    lambda: f64,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
) -> f64 {
    match interpolate_energy(schedule, model, t, w) {
        Ok(ew) => (w.len() as f64 - 1.0) * lambda.abs().ln() + energy_u - ew,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Snooker update of particle `i` through the stretch proposal
/// `y = λ·x_i + (1 - λ)·x_j`, repeated `cfg.sub_steps` times.
pub fn snooker_move<M, R>(
    i: usize,
    ensemble: &mut Ensemble<ContinuousState>,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
    cfg: &StretchConfig,
    rng: &mut R,
) -> Result<Updated>
where
    M: TargetModel<State = ContinuousState>,
    R: Rng + ?Sized,
{
    ensemble.require_at_least(2)?;
    let n = ensemble.len();
    let mut changed = false;
    let mut energy_i = interpolate_energy(schedule, model, t, &ensemble.particles[i])?;
    for _ in 0..cfg.sub_steps {
        let j = partner_index(i, n, rng);
        let lambda = sample_stretch_scalar(cfg, rng);
        let u: f64 = rng.random();
        let (xi, xj) = (&ensemble.particles[i], &ensemble.particles[j]);
        if xi == xj {
            continue;
        }
        let y = stretch_point(xi, xj, lambda);
        let log_ratio = stretch_log_ratio(energy_i, &y, lambda, t, schedule, model);
        if u < log_ratio.min(0.0).exp() {
            energy_i = interpolate_energy(schedule, model, t, &y)?;
            ensemble.particles[i] = y;
            changed = true;
        }
    }
    Ok(if changed { Updated::One(i) } else { Updated::Unchanged })
}

/// ULA / MALA as a [`LocalKernel`].
#[derive(Debug, Clone, Copy)]
pub struct Langevin(pub LangevinConfig);

impl<M: TargetModel<State = ContinuousState>> LocalKernel<M> for Langevin {
    fn step<R: Rng + ?Sized>(
        &self,
        x: &mut ContinuousState,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<()> {
        for _ in 0..self.0.sub_steps {
            *x = langevin_step(x, t, schedule, model, &self.0, rng)?;
        }
        Ok(())
    }
}

/// Gaussian random-walk Metropolis as a [`LocalKernel`].
#[derive(Debug, Clone, Copy)]
pub struct GaussianRandomWalk {
    pub variance: f64,
    pub sub_steps: usize,
}

impl<M: TargetModel<State = ContinuousState>> LocalKernel<M> for GaussianRandomWalk {
    fn step<R: Rng + ?Sized>(
        &self,
        x: &mut ContinuousState,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<()> {
        for _ in 0..self.sub_steps {
            *x = gaussian_mh_step(x, t, schedule, model, self.variance, rng)?;
        }
        Ok(())
    }
}

/// Snooker / stretch move as an [`ExplorationMove`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StretchMove(pub StretchConfig);

impl<M: TargetModel<State = ContinuousState>> ExplorationMove<M> for StretchMove {
    fn apply<R: Rng + ?Sized>(
        &self,
        i: usize,
        ensemble: &mut Ensemble<ContinuousState>,
        t: f64,
        schedule: &AnnealingSchedule,
        model: &M,
        rng: &mut R,
    ) -> Result<Updated> {
        snooker_move(i, ensemble, t, schedule, model, &self.0, rng)
    }
}
