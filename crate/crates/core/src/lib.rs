//! Annealed importance sampling with interacting particle ensembles.
//!
//! Two driver families anneal from an easy distribution `p_0 ∝ exp(-U_0)` to a
//! target `p ∝ exp(-U)` through `U_t = (1 - c(t))·U_0 + c(t)·U`:
//!
//! * standard AIS moves independent particles and accumulates importance weights;
//! * ensemble AIS keeps equal weights and rebalances mass with birth-death steps,
//!   optionally mixing particles with stretch moves (continuous targets) or
//!   genetic crossover (spin systems).

pub mod birthdeath;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod model;
pub mod models;
pub mod rng;
pub mod samplers;
pub mod schedule;
pub mod state;

pub use error::{Error, Result};
pub use model::{interpolate_energy, interpolate_gradient, TargetModel};
pub use rng::RandomStream;
pub use samplers::{run, run_ensemble_ais, run_standard_ais, NoRecorder, Recorder, SamplerSpec, Variant};
pub use schedule::AnnealingSchedule;
pub use state::{ContinuousState, DiscreteState, Ensemble, State, WeightedSampleSet};
