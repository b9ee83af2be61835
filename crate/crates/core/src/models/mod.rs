//! Benchmark targets.

mod double_well;
mod enumerate;
mod gaussian;
mod ginzburg_landau;
mod ising;

pub use double_well::DoubleWellProduct;
pub use enumerate::{enumerate_discrete, log_partition, ENUMERATION_LIMIT};
pub use gaussian::{GaussianAnneal, GaussianMixture, IsotropicGaussian, MixtureComponent};
pub use ginzburg_landau::{GinzburgLandau1D, GinzburgLandau2D};
pub use ising::{Ising1D, Ising2D};
