//! Birth-death rebalancing of ensemble mass.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::partner_index;
use crate::model::{non_finite, TargetModel};
use crate::schedule::AnnealingSchedule;
use crate::state::{Ensemble, State};

/// Per-particle rates `β_j = c'(t)·(U(x_j) - U_0(x_j))` and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathRates {
    pub raw: Vec<f64>,
    pub mean: f64,
    pub dt: f64,
}

impl BirthDeathRates {
    /// Builds rates from `U - U_0` differences already evaluated per particle.
    pub fn from_differences(differences: &[f64], c_prime: f64, dt: f64) -> Result<Self> {
        if differences.is_empty() {
            return Err(Error::TooFewParticles { required: 1, found: 0 });
        }
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be non-negative, got {dt}")));
        }
        let raw: Vec<f64> = differences.iter().map(|d| c_prime * d).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        Ok(Self { raw, mean, dt })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// `β_i - β̄`.
    pub fn centered(&self, i: usize) -> f64 {
        self.raw[i] - self.mean
    }

    /// Probability that particle `i` is killed (positive centred rate) or
    /// duplicated (negative centred rate) in one step.
    pub fn trigger_probability(&self, i: usize) -> f64 {
        -(-self.centered(i).abs() * self.dt).exp_m1()
    }
}

/// Evaluates the rates on the current ensemble at time `t`.
pub fn compute_rates<M: TargetModel>(
    ensemble: &Ensemble<M::State>,
    t: f64,
    schedule: &AnnealingSchedule,
    model: &M,
) -> Result<BirthDeathRates> {
    let differences = ensemble
        .particles
        .iter()
        .map(|x| {
            crate::model::check_dimension(model, x)?;
            let d = model.target_energy(x) - model.initial_energy(x);
            if d.is_finite() {
                Ok(d)
            } else {
                Err(non_finite(d, x))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    BirthDeathRates::from_differences(&differences, schedule.c_prime(t), schedule.dt())
}

/// What a birth-death step did to the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BirthDeathEvent {
    None,
    /// Particle `killed` was overwritten by a copy of `source`.
    Killed { killed: usize, source: usize },
    /// Particle `source` was copied over slot `replaced`.
    Duplicated { source: usize, replaced: usize },
}

/// One birth-death decision for particle `i`. Draws one uniform, then a
/// partner index only when the event fires.
pub fn birth_death_step<S: State, R: Rng + ?Sized>(
    i: usize,
    ensemble: &mut Ensemble<S>,
    rates: &BirthDeathRates,
    rng: &mut R,
) -> Result<BirthDeathEvent> {
    let n = ensemble.len();
    ensemble.require_at_least(2)?;
    if rates.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: rates.len() });
    }
    let delta = rates.centered(i);
    let p = rates.trigger_probability(i);
    let u: f64 = rng.random();
    if !(u < p) {
        return Ok(BirthDeathEvent::None);
    }
    let j = partner_index(i, n, rng);
    if delta > 0.0 {
        ensemble.particles[i] = ensemble.particles[j].clone();
        Ok(BirthDeathEvent::Killed { killed: i, source: j })
    } else {
        ensemble.particles[j] = ensemble.particles[i].clone();
        Ok(BirthDeathEvent::Duplicated { source: i, replaced: j })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GaussianAnneal, GaussianMixture};
    use crate::state::ContinuousState;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_ensemble(values: &[f64]) -> Ensemble<ContinuousState> {
        Ensemble::new(values.iter().map(|&v| vec![v].into()).collect(), 0.5)
    }

    #[test]
    fn two_particle_rates() {
        let r = BirthDeathRates::from_differences(&[2.0, 4.0], 1.0, 0.1).unwrap();
        assert_eq!(r.mean, 3.0);
        assert_eq!((r.centered(0), r.centered(1)), (-1.0, 1.0));
    }

    #[test]
    fn rates_match_independent_evaluation() {
        let m = GaussianMixture::four_mode_benchmark();
        let s = AnnealingSchedule::linear(300).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ens = Ensemble::new((0..5).map(|_| m.sample_initial(&mut rng)).collect(), 0.3);
        let r = compute_rates(&ens, 0.3, &s, &m).unwrap();
        for (x, b) in ens.particles.iter().zip(&r.raw) {
            // second path: U via the exact density, U_0 via the squared norm
            let (px, py) = (x[0], x[1]);
            let comps = [(0.0, -3.0, 1.2, 0.01), (0.0, 8.0, 0.01, 2.0), (-4.0, 4.0, 0.2, 0.2), (4.0, 4.0, 0.2, 0.2)];
            let dens: f64 = comps
                .iter()
                .map(|&(mx, my, vx, vy)| {
                    let q: f64 = (px - mx).powi(2) / vx + (py - my).powi(2) / vy;
                    0.25 * (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * (vx * vy as f64).sqrt())
                })
                .sum();
            let expected = -dens.ln() - 0.5 * (px * px + py * py);
            assert!((b - expected).abs() < 1e-9 * expected.abs().max(1.0));
        }
        let mean = r.raw.iter().sum::<f64>() / 5.0;
        assert!((r.mean - mean).abs() < 1e-12);
    }

    #[test]
    fn equal_rates_never_fire() {
        let m = GaussianAnneal::new(1, 1.0, 1.0).unwrap();
        let s = AnnealingSchedule::linear(10).unwrap();
        let mut ens = scalar_ensemble(&[0.1, -2.0, 3.0, 0.7]);
        let before = ens.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in [0.1, 0.5, 1.0] {
            let r = compute_rates(&ens, t, &s, &m).unwrap();
            for i in 0..4 {
                assert_eq!(r.centered(i), 0.0);
                assert_eq!(birth_death_step(i, &mut ens, &r, &mut rng).unwrap(), BirthDeathEvent::None);
            }
        }
        assert_eq!(ens, before);
    }

    #[test]
    fn zero_time_step_is_identity() {
        let r = BirthDeathRates::from_differences(&[0.0, 100.0, -50.0], 1.0, 0.0).unwrap();
        let mut ens = scalar_ensemble(&[1.0, 2.0, 3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            for i in 0..3 {
                birth_death_step(i, &mut ens, &r, &mut rng).unwrap();
            }
        }
        assert_eq!(ens, scalar_ensemble(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn kill_probability_at_ln2_is_half() {
        let ln2 = std::f64::consts::LN_2;
        let r = BirthDeathRates::from_differences(&[ln2, -ln2], 1.0, 1.0).unwrap();
        assert_eq!(r.centered(0), ln2);
        assert!((r.trigger_probability(0) - 0.5).abs() < 1e-15);
        assert!((r.trigger_probability(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_particle_is_an_error() {
        let r = BirthDeathRates::from_differences(&[1.0], 1.0, 0.1).unwrap();
        let mut ens = scalar_ensemble(&[0.0]);
        let err = birth_death_step(0, &mut ens, &r, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert_eq!(err, Error::TooFewParticles { required: 2, found: 1 });
    }

    #[test]
    fn two_state_expected_occupancy() {
        // N = 6: three particles at a (high rate), three at b (low rate)
        let values = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let diffs = [0.9, 0.9, 0.9, -0.3, -0.3, -0.3];
        let dt = 0.5;
        let rates = BirthDeathRates::from_differences(&diffs, 1.0, dt).unwrap();
        let n = values.len() as f64;
        let n_a = 3.0;

        // Step on an a-particle: killed and replaced by one of 2 other a's or 3 b's.
        let p_kill = rates.trigger_probability(0);
        let expected_a = n_a - p_kill * 3.0 / (n - 1.0);
        // Step on a b-particle: duplicated over one of 3 a's or 2 other b's.
        let p_dup = rates.trigger_probability(3);
        let expected_a_b = n_a - p_dup * 3.0 / (n - 1.0);

        for (i, expected) in [(0, expected_a), (3, expected_a_b)] {
            let reps = 200_000;
            let mut rng = ChaCha8Rng::seed_from_u64(6 + i as u64);
            let counts: Vec<f64> = (0..reps)
                .map(|_| {
                    let mut ens = scalar_ensemble(&values);
                    birth_death_step(i, &mut ens, &rates, &mut rng).unwrap();
                    ens.particles.iter().filter(|x| x[0] == 0.0).count() as f64
                })
                .collect();
            let mean = counts.iter().sum::<f64>() / reps as f64;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
            let se = (var / reps as f64).sqrt();
            assert!((mean - expected).abs() < 3.0 * se, "slot {i}: {mean} vs {expected} (se {se})");
        }
    }

    proptest! {
        #[test]
        fn centred_rates_sum_to_zero(diffs in prop::collection::vec(-50.0f64..50.0, 1..64), cp in 0.0f64..4.0) {
            let r = BirthDeathRates::from_differences(&diffs, cp, 0.01).unwrap();
            let total: f64 = (0..r.len()).map(|i| r.centered(i)).sum();
            prop_assert!(total.abs() < 1e-10);
        }

        #[test]
        fn ensemble_size_is_invariant(
            diffs in prop::collection::vec(-5.0f64..5.0, 2..20),
            seed in any::<u64>(),
        ) {
            let values: Vec<f64> = (0..diffs.len()).map(|k| k as f64).collect();
            let mut ens = scalar_ensemble(&values);
            let r = BirthDeathRates::from_differences(&diffs, 1.0, 0.7).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..diffs.len() {
                birth_death_step(i, &mut ens, &r, &mut rng).unwrap();
                prop_assert_eq!(ens.len(), diffs.len());
            }
            // every surviving value is one of the originals
            prop_assert!(ens.particles.iter().all(|x| values.contains(&x[0])));
        }
    }
}
