//! Named experiment setups.

use serde::{Deserialize, Serialize};

/// Model family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    /// The fixed four-mode planar mixture.
    GaussianMixture,
    GinzburgLandau1D { lambda_gl: f64, size: usize, beta: f64, length: f64, initial_variance: f64 },
    GinzburgLandau2D { lambda_gl: f64, size: usize, beta: f64, length: f64, initial_variance: f64 },
    DoubleWell { beta: f64 },
    Ising1D { size: usize, j1: f64, j2: f64, beta: f64 },
    Ising2D { size: usize, coupling: f64, beta: f64 },
    GaussianAnneal { size: usize, initial_variance: f64, target_variance: f64 },
}

impl ModelSpec {
    pub fn is_discrete(&self) -> bool {
        matches!(self, ModelSpec::Ising1D { .. } | ModelSpec::Ising2D { .. })
    }

    /// Number of coordinates or spins.
    pub fn dimension(&self) -> usize {
        match *self {
            ModelSpec::GaussianMixture => 2,
            ModelSpec::GinzburgLandau1D { size, .. } | ModelSpec::Ising1D { size, .. } => size,
            ModelSpec::GinzburgLandau2D { size, .. } | ModelSpec::Ising2D { size, .. } => size * size,
            ModelSpec::DoubleWell { .. } => 20,
            ModelSpec::GaussianAnneal { size, .. } => size,
        }
    }
}

/// Default sampler knobs that come with a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub model: ModelSpec,
    pub particles: usize,
    pub steps: usize,
    pub mh_proposal_scale: f64,
    /// `None` means the annealing step `1/L`.
    pub step_size: Option<f64>,
    pub langevin_sub_steps: usize,
    pub stretch_sub_steps: usize,
    pub glauber_sub_steps: usize,
}

const GL1D: ModelSpec =
    ModelSpec::GinzburgLandau1D { lambda_gl: 0.05, size: 16, beta: 3.0, length: 1.0, initial_variance: 0.01 };
const GL2D: ModelSpec =
    ModelSpec::GinzburgLandau2D { lambda_gl: 0.125, size: 4, beta: 10.0, length: 1.0, initial_variance: 0.01 };

fn base(name: &'static str, summary: &'static str, model: ModelSpec, particles: usize, steps: usize) -> Preset {
    Preset {
        name,
        summary,
        model,
        particles,
        steps,
        mh_proposal_scale: 0.01,
        step_size: None,
        langevin_sub_steps: 1,
        stretch_sub_steps: 1,
        glauber_sub_steps: 1,
    }
}

pub fn presets() -> Vec<Preset> {
    let ising = |name, summary, model, glauber_sub_steps| Preset { glauber_sub_steps, ..base(name, summary, model, 512, 64) };
    vec![
        Preset {
            stretch_sub_steps: 5,
            ..base("gmm2d", "four-mode 2D Gaussian mixture, N(0, I) start", ModelSpec::GaussianMixture, 1000, 300)
        },
        base("gl1d", "1D Ginzburg-Landau, d=16, lambda=0.05, beta=3", GL1D, 1000, 100),
        Preset { mh_proposal_scale: 0.001, ..base("gl2d", "2D Ginzburg-Landau, 4x4, lambda=0.125, beta=10", GL2D, 1000, 150) },
        Preset {
            mh_proposal_scale: 1.0,
            step_size: Some(0.05),
            stretch_sub_steps: 5,
            ..base("doublewell20", "10 double wells x 10 Gaussians, beta=0.001", ModelSpec::DoubleWell { beta: 0.001 }, 3000, 3000)
        },
        ising(
            "ising1d_ferro",
            "open Ising chain, d=20, J1=-1, J2=-1/3, beta=0.8",
            ModelSpec::Ising1D { size: 20, j1: -1.0, j2: -1.0 / 3.0, beta: 0.8 },
            3,
        ),
        ising(
            "ising1d_antiferro",
            "open Ising chain, d=20, J1=1, J2=1/3, beta=0.8",
            ModelSpec::Ising1D { size: 20, j1: 1.0, j2: 1.0 / 3.0, beta: 0.8 },
            3,
        ),
        ising("ising2d_ferro", "periodic 4x4 Ising, J=-1, beta=0.3", ModelSpec::Ising2D { size: 4, coupling: -1.0, beta: 0.3 }, 1),
        ising("ising2d_antiferro", "periodic 4x4 Ising, J=1, beta=0.3", ModelSpec::Ising2D { size: 4, coupling: 1.0, beta: 0.3 }, 1),
        Preset {
            step_size: Some(0.05),
            langevin_sub_steps: 5,
            ..base(
                "gaussian_anneal",
                "1D Gaussian anneal x^2/2 -> 2x^2 (Z1/Z0 = 1/2)",
                ModelSpec::GaussianAnneal { size: 1, initial_variance: 1.0, target_variance: 0.25 },
                10_000,
                100,
            )
        },
        Preset {
            step_size: Some(0.1),
            ..base(
                "gaussian_stationary",
                "2D standard Gaussian with target equal to start",
                ModelSpec::GaussianAnneal { size: 2, initial_variance: 1.0, target_variance: 1.0 },
                2000,
                20,
            )
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}
