use rand::Rng;

use super::gaussian::IsotropicGaussian;
use crate::error::{Error, Result};
use crate::model::TargetModel;
use crate::state::ContinuousState;

/// Product of `active` double wells `q(x) ∝ exp(-β(x⁴ - 100x²))` and
/// `passive` standard normal coordinates. Wells sit at `x = ±5√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleWellProduct {
    pub beta: f64,
    pub active: usize,
    pub passive: usize,
    initial: IsotropicGaussian,
}

impl DoubleWellProduct {
    pub fn new(beta: f64, active: usize, passive: usize) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::invalid(format!("double-well beta must be positive, got {beta}")));
        }
        if active + passive == 0 {
            return Err(Error::invalid("double-well product needs at least one coordinate"));
        }
        Ok(Self { beta, active, passive, initial: IsotropicGaussian::new(1.0)? })
    }

    /// Ten double wells, ten Gaussian coordinates, started from `N(0, I_20)`.
    pub fn benchmark(beta: f64) -> Result<Self> {
        Self::new(beta, 10, 10)
    }

    /// Per-coordinate well potential `β(x⁴ - 100x²)`.
    pub fn well_potential(&self, x: f64) -> f64 {
        self.beta * (x.powi(4) - 100.0 * x * x)
    }

    pub fn well_potential_derivative(&self, x: f64) -> f64 {
        self.beta * (4.0 * x.powi(3) - 200.0 * x)
    }

    pub fn well_minimum() -> f64 {
        50f64.sqrt()
    }
}

impl TargetModel for DoubleWellProduct {
    type State = ContinuousState;

    fn dimension(&self) -> usize {
        self.active + self.passive
    }

    fn initial_energy(&self, x: &ContinuousState) -> f64 {
        self.initial.energy(x)
    }

    fn target_energy(&self, x: &ContinuousState) -> f64 {
        let (wells, normals) = x.split_at(self.active);
        wells.iter().map(|&v| self.well_potential(v)).sum::<f64>() + 0.5 * normals.iter().map(|v| v * v).sum::<f64>()
    }

    fn initial_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        self.initial.gradient(x, out);
        Ok(())
    }

    fn target_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        for (k, (o, &v)) in out.iter_mut().zip(x.iter()).enumerate() {
            *o = if k < self.active { self.well_potential_derivative(v) } else { v };
        }
        Ok(())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousState {
        self.initial.sample(self.dimension(), rng)
    }
}
