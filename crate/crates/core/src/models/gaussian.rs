use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::TargetModel;
use crate::state::{log_sum_exp, ContinuousState};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Isotropic Gaussian `N(0, σ²·I)`, used as the initial distribution of every
/// continuous benchmark. The energy drops the normalising constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicGaussian {
    pub variance: f64,
}

impl IsotropicGaussian {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::invalid(format!("Gaussian variance must be positive, got {variance}")));
        }
        Ok(Self { variance })
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>() / (2.0 * self.variance)
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = v / self.variance;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> ContinuousState {
        let sd = self.variance.sqrt();
        (0..dim).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>().into()
    }
}

/// Anneal between two centred isotropic Gaussians:
/// `U_0 = |x|²/(2σ_0²)` and `U = |x|²/(2σ_1²)`.
///
/// With `σ_0 = σ_1` the target equals the initial distribution, which makes
/// every annealing level stationary.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianAnneal {
    dim: usize,
    initial: IsotropicGaussian,
    target: IsotropicGaussian,
}

impl GaussianAnneal {
    pub fn new(dim: usize, initial_variance: f64, target_variance: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(Self {
            dim,
            initial: IsotropicGaussian::new(initial_variance)?,
            target: IsotropicGaussian::new(target_variance)?,
        })
    }

    /// `Z_1/Z_0 = (σ_1/σ_0)^d` for the unnormalised energies above.
    pub fn partition_ratio(&self) -> f64 {
        (self.target.variance / self.initial.variance).powf(self.dim as f64 / 2.0)
    }
}

impl TargetModel for GaussianAnneal {
    type State = ContinuousState;

    fn dimension(&self) -> usize {
        self.dim
    }

    fn initial_energy(&self, x: &ContinuousState) -> f64 {
        self.initial.energy(x)
    }

    fn target_energy(&self, x: &ContinuousState) -> f64 {
        self.target.energy(x)
    }

    fn initial_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        self.initial.gradient(x, out);
        Ok(())
    }

    fn target_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        self.target.gradient(x, out);
        Ok(())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousState {
        self.initial.sample(self.dim, rng)
    }
}

/// One axis-aligned Gaussian component.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Diagonal of the covariance matrix.
    pub variances: Vec<f64>,
}

/// Mixture of axis-aligned Gaussians with energy `-log Σ_k w_k N(x; μ_k, Σ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<MixtureComponent>,
    // log w_k - ½ Σ log(2π σ²)
    log_norms: Vec<f64>,
    initial: IsotropicGaussian,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>, initial_variance: f64) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::invalid("mixture needs at least one component"));
        };
        let dim = first.mean.len();
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("mixture weights sum to {total}, expected 1")));
        }
        for (k, c) in components.iter().enumerate() {
            if c.mean.len() != dim || c.variances.len() != dim {
                return Err(Error::invalid(format!("component {k} has the wrong dimension")));
            }
            if !(c.weight > 0.0) || c.variances.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::invalid(format!("component {k} needs a positive weight and covariance")));
            }
        }
        let log_norms = components
            .iter()
            .map(|c| c.weight.ln() - 0.5 * c.variances.iter().map(|v| LN_2PI + v.ln()).sum::<f64>())
            .collect();
        Ok(Self { dim, components, log_norms, initial: IsotropicGaussian::new(initial_variance)? })
    }

    /// The four-mode planar mixture: equal weights, means `(0,-3)`, `(0,8)`,
    /// `(-4,4)`, `(4,4)` and diagonal covariances `(1.2, 0.01)`, `(0.01, 2)`,
    /// `(0.2, 0.2)`, `(0.2, 0.2)`; started from `N(0, I_2)`.
    pub fn four_mode_benchmark() -> Self {
        let comp = |mean: [f64; 2], var: [f64; 2]| MixtureComponent {
            weight: 0.25,
            mean: mean.to_vec(),
            variances: var.to_vec(),
        };
        Self::new(
            vec![
                comp([0.0, -3.0], [1.2, 0.01]),
                comp([0.0, 8.0], [0.01, 2.0]),
                comp([-4.0, 4.0], [0.2, 0.2]),
                comp([4.0, 4.0], [0.2, 0.2]),
            ],
            1.0,
        )
        .expect("benchmark parameters are valid")
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn means(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| c.mean.clone()).collect()
    }

    fn component_log_densities(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .zip(&self.log_norms)
            .map(|(c, ln)| {
                let q: f64 = x
                    .iter()
                    .zip(&c.mean)
                    .zip(&c.variances)
                    .map(|((xi, m), v)| (xi - m) * (xi - m) / v)
                    .sum();
                ln - 0.5 * q
            })
            .collect()
    }

    /// Draws an exact sample from the mixture.
    pub fn sample_target<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousState {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.components.len() - 1;
        for (k, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                chosen = k;
                break;
            }
        }
        let c = &self.components[chosen];
        c.mean
            .iter()
            .zip(&c.variances)
            .map(|(m, v)| m + v.sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect::<Vec<_>>()
            .into()
    }
}

impl TargetModel for GaussianMixture {
    type State = ContinuousState;

    fn dimension(&self) -> usize {
        self.dim
    }

    fn initial_energy(&self, x: &ContinuousState) -> f64 {
        self.initial.energy(x)
    }

    fn target_energy(&self, x: &ContinuousState) -> f64 {
        -log_sum_exp(&self.component_log_densities(x))
    }

    fn initial_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        self.initial.gradient(x, out);
        Ok(())
    }

    fn target_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        let logs = self.component_log_densities(x);
        let lse = log_sum_exp(&logs);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (c, l) in self.components.iter().zip(&logs) {
            let r = (l - lse).exp();
            for ((o, xi), (m, v)) in out.iter_mut().zip(x.iter()).zip(c.mean.iter().zip(&c.variances)) {
                *o += r * (xi - m) / v;
            }
        }
        Ok(())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousState {
        self.initial.sample(self.dim, rng)
    }
}
