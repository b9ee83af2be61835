//! Exact and quadrature transition-matrix oracles for the kernels.
//!
//! Each function builds the transition matrix `P` of one kernel on a finite
//! (or discretised) state space and returns `‖πP - π‖_∞` for the kernel's
//! intended invariant distribution `π`.

#![allow(dead_code)]

use ensemble_ais::kernels::{
    crossover_log_acceptance, crossover_offspring, genetic_crossover_with_mask, glauber_flip_probability,
    mala_log_acceptance, stretch_acceptance, stretch_density, CrossoverMask, Updated,
};
use ensemble_ais::{interpolate_energy, AnnealingSchedule, ContinuousState, DiscreteState, Ensemble, TargetModel};

/// `U_0 = x²/2`, `U = 2(x² - 1)²`: a smooth bimodal 1D target.
pub struct Bimodal1D;

impl TargetModel for Bimodal1D {
    type State = ContinuousState;
    fn dimension(&self) -> usize {
        1
    }
    fn initial_energy(&self, x: &ContinuousState) -> f64 {
        0.5 * x[0] * x[0]
    }
    fn target_energy(&self, x: &ContinuousState) -> f64 {
        2.0 * (x[0] * x[0] - 1.0).powi(2)
    }
    fn initial_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> ensemble_ais::Result<()> {
        out[0] = x[0];
        Ok(())
    }
    fn target_gradient(&self, x: &ContinuousState, out: &mut [f64]) -> ensemble_ais::Result<()> {
        out[0] = 8.0 * x[0] * (x[0] * x[0] - 1.0);
        Ok(())
    }
    fn sample_initial<R: rand::Rng + ?Sized>(&self, _rng: &mut R) -> ContinuousState {
        vec![0.0].into()
    }
}

fn residual(pi: &[f64], p: &[Vec<f64>]) -> f64 {
    let n = pi.len();
    (0..n)
        .map(|col| {
            let flow: f64 = (0..n).map(|row| pi[row] * p[row][col]).sum();
            (flow - pi[col]).abs()
        })
        .fold(0.0, f64::max)
}

fn normalise(mut v: Vec<f64>) -> Vec<f64> {
    let z: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= z);
    v
}

/// Boltzmann weights of `U_t` over all `2^d` spin states, by direct evaluation.
fn spin_target<M: TargetModel<State = DiscreteState>>(model: &M, t: f64) -> Vec<f64> {
    let d = model.dimension();
    normalise(
        (0..1u64 << d)
            .map(|k| {
                let x = DiscreteState::from_index(k, d);
                (-((1.0 - t) * model.initial_energy(&x) + t * model.target_energy(&x))).exp()
            })
            .collect(),
    )
}

/// Single-site heat-bath update: uniform site, flip with the kernel's probability.
pub fn glauber_residual<M: TargetModel<State = DiscreteState>>(model: &M, t: f64, schedule: &AnnealingSchedule) -> f64 {
    glauber_residual_against(model, t, t, schedule)
}

/// Glauber at `kernel_t` checked against the target at `target_t`.
pub fn glauber_residual_against<M: TargetModel<State = DiscreteState>>(
    model: &M,
    kernel_t: f64,
    target_t: f64,
    schedule: &AnnealingSchedule,
) -> f64 {
    let t = kernel_t;
    let d = model.dimension();
    let n = 1usize << d;
    let mut p = vec![vec![0.0; n]; n];
    for (k, row) in p.iter_mut().enumerate() {
        let x = DiscreteState::from_index(k as u64, d);
        for site in 0..d {
            let r = glauber_flip_probability(&x, site, t, schedule, model).unwrap();
            let y = x.flipped(site).canonical_index().unwrap() as usize;
            row[y] += r / d as f64;
            row[k] += (1.0 - r) / d as f64;
        }
    }
    residual(&spin_target(model, target_t), &p)
}

/// Crossover on an `N = 2` ensemble of `d`-spin particles. The chain state is
/// the ordered pair `(x_0, x_1)`; the invariant law is `p_t(x_0)·p_t(x_1)`.
/// The acting particle is 0 or 1 with probability ½ each, the partner is the
/// other one and all `2^d` masks are equally likely.
pub fn crossover_residual<M: TargetModel<State = DiscreteState>>(model: &M, t: f64, schedule: &AnnealingSchedule) -> f64 {
    let d = model.dimension();
    let s = 1usize << d;
    let n = s * s;
    let single = spin_target(model, t);
    let rho: Vec<f64> = (0..n).map(|c| single[c / s] * single[c % s]).collect();
    let masks: Vec<CrossoverMask> = (0..s)
        .map(|m| CrossoverMask::from_bits(&(0..d).map(|b| m >> b & 1 == 1).collect::<Vec<_>>()))
        .collect();
    let mut p = vec![vec![0.0; n]; n];
    for (c, row) in p.iter_mut().enumerate() {
        let x0 = DiscreteState::from_index((c / s) as u64, d);
        let x1 = DiscreteState::from_index((c % s) as u64, d);
        for (i, j) in [(0usize, 1usize), (1, 0)] {
            for mask in &masks {
                let weight = 0.5 / masks.len() as f64;
                let parents = [x0.clone(), x1.clone()];
                let (yi, yj) = crossover_offspring(&parents[i], &parents[j], mask).unwrap();
                let alpha = crossover_log_acceptance((&parents[i], &parents[j]), (&yi, &yj), t, schedule, model)
                    .unwrap()
                    .min(0.0)
                    .exp();
                // the kernel itself decides where an accepted move lands
                let mut ens = Ensemble::new(parents.to_vec(), t);
                let moved = genetic_crossover_with_mask(i, j, mask, &mut ens, t, schedule, model, 0.0).unwrap();
                let target = if moved == Updated::Unchanged {
                    c
                } else {
                    let a = ens.particles[0].canonical_index().unwrap() as usize;
                    let b = ens.particles[1].canonical_index().unwrap() as usize;
                    a * s + b
                };
                row[target] += weight * alpha;
                row[c] += weight * (1.0 - alpha);
            }
        }
    }
    residual(&rho, &p)
}

/// Midpoint grid over `[-2.1, 2.1]`: 21 cells of width 0.2, `per_cell` nodes each.
fn grid(per_cell: usize) -> (Vec<f64>, f64) {
    let h = 0.2 / per_cell as f64;
    let nodes = (0..21 * per_cell).map(|k| -2.1 + (k as f64 + 0.5) * h).collect();
    (nodes, h)
}

/// Aggregates a node-level kernel with transition density `density(x, y)` into
/// cell probabilities. Mass leaving the grid or rejected stays at the node.
fn cell_residual(
    per_cell: usize,
    energy: impl Fn(f64) -> f64,
    density: impl Fn(f64, f64) -> f64,
) -> f64 {
    let (nodes, h) = grid(per_cell);
    let m = nodes.len();
    let pi_nodes: Vec<f64> = nodes.iter().map(|&x| (-energy(x)).exp() * h).collect();
    let mut pi_cells = vec![0.0; 21];
    for (a, w) in pi_nodes.iter().enumerate() {
        pi_cells[a / per_cell] += w;
    }
    let total: f64 = pi_cells.iter().sum();
    let pi_cells: Vec<f64> = pi_cells.iter().map(|w| w / total).collect();

    let mut p = vec![vec![0.0; 21]; 21];
    for a in 0..m {
        let mut moved = 0.0;
        let mut row = vec![0.0; 21];
        for b in 0..m {
            if a == b {
                continue;
            }
            let k = density(nodes[a], nodes[b]) * h;
            row[b / per_cell] += k;
            moved += k;
        }
        row[a / per_cell] += 1.0 - moved;
        let w = pi_nodes[a] / total;
        for (n, v) in row.iter().enumerate() {
            p[a / per_cell][n] += w * v;
        }
    }
    for (row, pi) in p.iter_mut().zip(&pi_cells) {
        row.iter_mut().for_each(|v| *v /= pi);
    }
    residual(&pi_cells, &p)
}

fn energy_1d(schedule: &AnnealingSchedule, t: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x| interpolate_energy(schedule, &Bimodal1D, t, &vec![x].into()).unwrap()
}

/// MALA on the bimodal target with step `tau`: proposal density
/// `N(y; x - τU_t'(x), 2τ)` times the kernel's acceptance probability.
pub fn mala_residual(tau: f64, t: f64, per_cell: usize) -> f64 {
    let schedule = AnnealingSchedule::linear(10).unwrap();
    let grad = |x: f64| {
        let c = schedule.c(t);
        (1.0 - c) * x + c * 8.0 * x * (x * x - 1.0)
    };
    cell_residual(per_cell, energy_1d(&schedule, t), |x, y| {
        let mean = x - tau * grad(x);
        let q = (-(y - mean).powi(2) / (4.0 * tau)).exp() / (4.0 * std::f64::consts::PI * tau).sqrt();
        let log_alpha = mala_log_acceptance(&vec![x].into(), &vec![y].into(), t, &schedule, &Bimodal1D, tau).unwrap();
        q * log_alpha.min(0.0).exp()
    })
}

/// Stretch move of one coordinate against a fixed partner `v`:
/// `y = v + λ(x - v)` with `λ ~ g_a`, so `y` has density `g_a(λ)/|x - v|`.
pub fn stretch_residual(partner: f64, a: f64, t: f64, per_cell: usize) -> f64 {
    stretch_residual_with_bias(partner, a, t, per_cell, 0.0)
}

/// As [`stretch_residual`] with the acceptance multiplied by `λ^bias`
/// (capped at 1); any nonzero bias breaks invariance.
pub fn stretch_residual_with_bias(partner: f64, a: f64, t: f64, per_cell: usize, bias: f64) -> f64 {
    let schedule = AnnealingSchedule::linear(10).unwrap();
    cell_residual(per_cell, energy_1d(&schedule, t), |x, y| {
        let lambda = (y - partner) / (x - partner);
        if !(lambda > 0.0) {
            return 0.0;
        }
        let g = stretch_density(a, lambda);
        if g == 0.0 {
            return 0.0;
        }
        let alpha = stretch_acceptance(&vec![x].into(), &vec![partner].into(), lambda, t, &schedule, &Bimodal1D).unwrap();
        g / (x - partner).abs() * (alpha * lambda.powf(bias)).min(1.0)
    })
}
