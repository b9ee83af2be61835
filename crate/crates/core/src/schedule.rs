//! Annealing schedules: the interpolator `c(t)` and the number of levels.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A monotone ramp `c: [0,1] -> [0,1]` with `c(0) = 0` and `c(1) = 1`.
pub trait Interpolation: Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    fn name(&self) -> &str;
}

/// `c(t) = t`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Linear;

impl Interpolation for Linear {
    fn value(&self, t: f64) -> f64 {
        t
    }

    fn derivative(&self, _t: f64) -> f64 {
        1.0
    }

    fn name(&self) -> &str {
        "linear"
    }
}

/// `L` annealing levels with step `Δt = 1/L` and a pluggable interpolator.
#[derive(Clone)]
pub struct AnnealingSchedule {
    steps: usize,
    interpolator: Arc<dyn Interpolation>,
}

impl fmt::Debug for AnnealingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnnealingSchedule")
            .field("steps", &self.steps)
            .field("interpolator", &self.interpolator.name())
            .finish()
    }
}

impl PartialEq for AnnealingSchedule {
    fn eq(&self, other: &Self) -> bool {
        self.steps == other.steps && self.interpolator.name() == other.interpolator.name()
    }
}

impl AnnealingSchedule {
    pub fn linear(steps: usize) -> Result<Self> {
        Self::new(steps, Arc::new(Linear))
    }

    /// Builds a schedule, checking the endpoint and monotonicity contract of the
    /// interpolator on a 128-point grid.
    pub fn new(steps: usize, interpolator: Arc<dyn Interpolation>) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("annealing step count must be positive"));
        }
        if interpolator.value(0.0) != 0.0 || interpolator.value(1.0) != 1.0 {
            return Err(Error::invalid("interpolator must satisfy c(0) = 0 and c(1) = 1"));
        }
        const GRID: usize = 128;
        let mut prev = interpolator.value(0.0);
        for k in 1..=GRID {
            let cur = interpolator.value(k as f64 / GRID as f64);
            if !(cur > prev) {
                return Err(Error::invalid("interpolator must be strictly increasing"));
            }
            prev = cur;
        }
        Ok(Self { steps, interpolator })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.steps as f64
    }

    /// Annealing time of level `l`, i.e. `l·Δt`. Level `L` maps to exactly 1.
    pub fn time(&self, level: usize) -> f64 {
        if level == self.steps {
            1.0
        } else {
            level as f64 / self.steps as f64
        }
    }

    pub fn c(&self, t: f64) -> f64 {
        self.interpolator.value(t)
    }

    pub fn c_prime(&self, t: f64) -> f64 {
        self.interpolator.derivative(t)
    }

    pub fn interpolator_name(&self) -> &str {
        self.interpolator.name()
    }
}
