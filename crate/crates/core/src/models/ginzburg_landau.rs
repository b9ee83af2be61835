//! Lattice discretisations of the Ginzburg-Landau free energy with zero
//! Dirichlet boundary values. Boundary sites are implicit: the state vector
//! only holds interior sites.

use rand::Rng;

use super::gaussian::IsotropicGaussian;
use crate::error::{Error, Result};
use crate::model::TargetModel;
use crate::state::ContinuousState;

/// `V(x) = (1 - x²)² / 4`.
#[inline]
fn potential(x: f64) -> f64 {
    let s = 1.0 - x * x;
    0.25 * s * s
}

#[inline]
fn potential_derivative(x: f64) -> f64 {
    -x * (1.0 - x * x)
}

fn check(lambda: f64, sites: usize, beta: f64, length: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("Ginzburg-Landau coupling must be positive, got {lambda}")));
    }
    if sites == 0 {
        return Err(Error::invalid("grid size must be positive"));
    }
    if !(beta >= 0.0) || !(length > 0.0) {
        return Err(Error::invalid("beta must be non-negative and the domain length positive"));
    }
    Ok(())
}

/// `β·Σ_{i=1}^{d+1} [ (λ/2)·((x_i - x_{i-1})/h)² + V(x_i)/λ ]`, `h = L/(d+1)`,
/// `x_0 = x_{d+1} = 0`.
///
/// The sum runs to `i = d+1`, so the boundary site contributes the constant
/// `V(0)/λ = 1/(4λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GinzburgLandau1D {
    pub lambda: f64,
    pub sites: usize,
    pub beta: f64,
    pub length: f64,
    initial: IsotropicGaussian,
}

impl GinzburgLandau1D {
    pub fn new(lambda: f64, sites: usize, beta: f64, length: f64, initial_variance: f64) -> Result<Self> {
        check(lambda, sites, beta, length)?;
        Ok(Self { lambda, sites, beta, length, initial: IsotropicGaussian::new(initial_variance)? })
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.sites as f64 + 1.0)
    }

    /// The energy before scaling by `β`.
    pub fn lattice_energy(&self, x: &[f64]) -> f64 {
        let h = self.spacing();
        let grad_coeff = 0.5 * self.lambda / (h * h);
        let mut total = 0.0;
        let mut prev = 0.0;
        for i in 0..=self.sites {
            let cur = if i < self.sites { x[i] } else { 0.0 };
            total += grad_coeff * (cur - prev) * (cur - prev) + potential(cur) / self.lambda;
            prev = cur;
        }
        total
    }
}

impl TargetModel for GinzburgLandau1D {
    type State = ContinuousState;

    fn dimension(&self) -> usize {
        self.sites
    }

    fn initial_energy(&self, x: &ContinuousState) -> f64 {
        self.initial.energy(x)
    }

    fn target_energy(&self, x: &ContinuousState) -> f64 {
        self.beta * self.lattice_energy(x)
    }

    fn initial_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        self.initial.gradient(x, out);
        Ok(())
    }

    fn target_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        let h = self.spacing();
        let k = self.lambda / (h * h);
        let d = self.sites;
        for i in 0..d {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < d { x[i + 1] } else { 0.0 };
            out[i] = self.beta * (k * (2.0 * x[i] - left - right) + potential_derivative(x[i]) / self.lambda);
        }
        Ok(())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousState {
        self.initial.sample(self.sites, rng)
    }
}

/// Square-lattice version on a `d × d` interior grid, row-major
/// (`x[(i-1)·d + (j-1)] = x_{i,j}`):
///
/// `β·Σ_{i,j} [ (λ/4)·Σ_{nb} ((x_{i,j} - x_nb)/h)² + V(x_{i,j})/λ ]`
///
/// with the four lattice neighbours `nb` and zero boundary values. Each
/// interior link is counted once from each endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct GinzburgLandau2D {
    pub lambda: f64,
    pub side: usize,
    pub beta: f64,
    pub length: f64,
    initial: IsotropicGaussian,
}

impl GinzburgLandau2D {
    pub fn new(lambda: f64, side: usize, beta: f64, length: f64, initial_variance: f64) -> Result<Self> {
        check(lambda, side, beta, length)?;
        Ok(Self { lambda, side, beta, length, initial: IsotropicGaussian::new(initial_variance)? })
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.side as f64 + 1.0)
    }

    #[inline]
    fn at(&self, x: &[f64], i: isize, j: isize) -> f64 {
        let d = self.side as isize;
        if i < 0 || j < 0 || i >= d || j >= d {
            0.0
        } else {
            x[(i * d + j) as usize]
        }
    }

    pub fn lattice_energy(&self, x: &[f64]) -> f64 {
        let h = self.spacing();
        let c = 0.25 * self.lambda / (h * h);
        let d = self.side as isize;
        let mut total = 0.0;
        for i in 0..d {
            for j in 0..d {
                let v = self.at(x, i, j);
                let mut links = 0.0;
                for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    let nb = self.at(x, i + di, j + dj);
                    links += (v - nb) * (v - nb);
                }
                total += c * links + potential(v) / self.lambda;
            }
        }
        total
    }
}

impl TargetModel for GinzburgLandau2D {
    type State = ContinuousState;

    fn dimension(&self) -> usize {
        self.side * self.side
    }

    fn initial_energy(&self, x: &ContinuousState) -> f64 {
        self.initial.energy(x)
    }

    fn target_energy(&self, x: &ContinuousState) -> f64 {
        self.beta * self.lattice_energy(x)
    }

    fn initial_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        self.initial.gradient(x, out);
        Ok(())
    }

    fn target_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> Result<()> {
        let h = self.spacing();
        let k = self.lambda / (h * h);
        let d = self.side as isize;
        for i in 0..d {
            for j in 0..d {
                let v = self.at(x, i, j);
                let mut g = 0.0;
                for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    let (ni, nj) = (i + di, j + dj);
                    let interior = ni >= 0 && nj >= 0 && ni < d && nj < d;
                    // interior links appear in both endpoints' terms
                    let weight = if interior { 1.0 } else { 0.5 };
                    g += weight * k * (v - self.at(x, ni, nj));
                }
                out[(i * d + j) as usize] = self.beta * (g + potential_derivative(v) / self.lambda);
            }
        }
        Ok(())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousState {
        self.initial.sample(self.side * self.side, rng)
    }
}
