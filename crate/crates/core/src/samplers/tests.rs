use std::sync::Mutex;

use rand::{Rng, RngCore};

use super::*;
use crate::birthdeath::compute_rates;
use crate::kernels::NoExploration;
use crate::models::{GaussianAnneal, GaussianMixture, Ising1D};
use crate::rng::RandomStream;

/// Generator that always returns all-ones bits, so every `u < α` test with
/// `α < 1` rejects.
struct SaturatedRng;

impl RngCore for SaturatedRng {
    fn next_u32(&mut self) -> u32 {
        u32::MAX
    }
    fn next_u64(&mut self) -> u64 {
        u64::MAX
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        dst.fill(0xff);
    }
}

/// Local kernel that only records the times it is called with.
#[derive(Default)]
struct TimeSpy(Mutex<Vec<f64>>);

impl<M: TargetModel<State = ContinuousState>> LocalKernel<M> for TimeSpy {
    fn step<R: Rng + ?Sized>(
        &self,
        _x: &mut ContinuousState,
        t: f64,
        _schedule: &AnnealingSchedule,
        _model: &M,
        _rng: &mut R,
    ) -> Result<()> {
        self.0.lock().unwrap().push(t);
        Ok(())
    }
}

fn spec(variant: Variant, n: usize, steps: usize) -> SamplerSpec {
    SamplerSpec::new(variant, n, steps).unwrap()
}

#[test]
fn variant_names_round_trip() {
    for v in Variant::ALL {
        assert_eq!(v.name().parse::<Variant>().unwrap(), v);
    }
    assert!("ensemble".parse::<Variant>().is_err());
}

#[test]
fn spec_validation() {
    let mut s = spec(Variant::EnsembleExplore, 1, 10);
    assert_eq!(s.validate().unwrap_err(), Error::TooFewParticles { required: 2, found: 1 });
    s.variant = Variant::StandardAisMala;
    assert!(s.validate().is_ok());
    s.record_every = 0;
    assert!(s.validate().is_err());
    let mut s = spec(Variant::StandardAisGaussianMh, 4, 10);
    s.mh_proposal_scale = 0.0;
    assert!(s.validate().is_err());
}

#[test]
fn random_walk_baseline_refuses_spin_models() {
    let m = Ising1D::new(4, -1.0, 0.0, 0.5).unwrap();
    let err = run_standard_ais(&spec(Variant::StandardAisGaussianMh, 4, 3), &m, &RandomStream::new(0, 0), &mut NoRecorder)
        .unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
}

#[test]
fn drivers_reject_the_other_family() {
    let m = GaussianAnneal::new(1, 1.0, 1.0).unwrap();
    let st = RandomStream::new(0, 0);
    assert!(run_standard_ais(&spec(Variant::EnsembleExplore, 4, 3), &m, &st, &mut NoRecorder).is_err());
    assert!(run_ensemble_ais(&spec(Variant::StandardAisMala, 4, 3), &m, &st, &mut NoRecorder).is_err());
}

#[test]
fn identical_energies_give_zero_weights() {
    let m = GaussianAnneal::new(2, 1.0, 1.0).unwrap();
    for v in [Variant::StandardAisMala, Variant::StandardAisGaussianMh] {
        let out = run_standard_ais(&spec(v, 50, 20), &m, &RandomStream::new(1, 0), &mut NoRecorder).unwrap();
        assert!(out.log_weights.iter().all(|&w| w == 0.0));
    }
}

#[test]
fn single_level_weight_is_energy_gap_at_the_start() {
    let m = GaussianAnneal::new(1, 1.0, 0.25).unwrap();
    let mut start = None;
    let mut rec = |level: usize, s: &WeightedSampleSet<ContinuousState>| {
        if level == 0 {
            start = Some(s.particles[0].clone());
        }
        Ok(())
    };
    let out = run_standard_ais(&spec(Variant::StandardAisMala, 1, 1), &m, &RandomStream::new(2, 0), &mut rec).unwrap();
    let s = start.unwrap();
    assert_eq!(out.log_weights[0], m.initial_energy(&s) - m.target_energy(&s));
}

#[test]
fn standard_ais_estimates_partition_ratio() {
    // x²/2 → 2x²: Z_1/Z_0 = √(π/2)/√(2π) = 1/2
    let m = GaussianAnneal::new(1, 1.0, 0.25).unwrap();
    assert!((m.partition_ratio() - 0.5).abs() < 1e-15);
    let mut s = spec(Variant::StandardAisMala, 10_000, 100);
    s.langevin = s.langevin.with_sub_steps(5);
    let out = run_standard_ais(&s, &m, &RandomStream::new(3, 0), &mut NoRecorder).unwrap();
    let w: Vec<f64> = out.log_weights.iter().map(|l| l.exp()).collect();
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let se = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((mean - 0.5).abs() < 3.0 * se, "estimate {mean} ± {se}");
}

#[test]
fn standard_ais_ignores_thread_count() {
    let m = GaussianMixture::four_mode_benchmark();
    let s = spec(Variant::StandardAisMala, 64, 15);
    let run_in = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_standard_ais(&s, &m, &RandomStream::new(4, 2), &mut NoRecorder).unwrap())
    };
    assert_eq!(run_in(1), run_in(4));
}

#[test]
fn ensemble_is_stationary_when_target_equals_start() {
    let m = GaussianAnneal::new(2, 1.0, 1.0).unwrap();
    let n = 2000;
    let out = run_ensemble_ais(&spec(Variant::EnsembleNoExplore, n, 20), &m, &RandomStream::new(5, 0), &mut NoRecorder)
        .unwrap();
    let nf = n as f64;
    for k in 0..2 {
        let xs: Vec<f64> = out.ensemble.particles.iter().map(|p| p[k]).collect();
        let mean = xs.iter().sum::<f64>() / nf;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        assert!(mean.abs() < 3.0 * (1.0 / nf).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 3.0 * (2.0 / nf).sqrt(), "variance {var}");
    }
    let cov = out.ensemble.particles.iter().map(|p| p[0] * p[1]).sum::<f64>() / nf;
    assert!(cov.abs() < 3.0 / nf.sqrt(), "covariance {cov}");
}

#[test]
fn forced_rejection_returns_the_initial_ensemble() {
    let m = Ising1D::new(6, -1.0, -1.0 / 3.0, 0.8).unwrap();
    for variant in [Variant::EnsembleExplore, Variant::EnsembleNoExplore] {
        let s = spec(variant, 2, 1);
        let mut initial = None;
        let mut rec = |level: usize, set: &WeightedSampleSet<DiscreteState>| {
            if level == 0 {
                initial = Some(set.particles.clone());
            }
            Ok(())
        };
        let local = Glauber(s.glauber);
        let out = if variant == Variant::EnsembleExplore {
            run_ensemble_with(&s, &m, &local, &GeneticCrossover, &mut SaturatedRng, &mut rec)
        } else {
            run_ensemble_with(&s, &m, &local, &NoExploration, &mut SaturatedRng, &mut rec)
        }
        .unwrap();
        assert_eq!(Some(out.ensemble.particles), initial);
    }
}

#[test]
fn no_explore_is_explore_with_identity_move() {
    let m = GaussianMixture::four_mode_benchmark();
    let stream = RandomStream::new(6, 1);
    let plain = run_ensemble_ais(&spec(Variant::EnsembleNoExplore, 30, 12), &m, &stream, &mut NoRecorder).unwrap();
    let s = spec(Variant::EnsembleExplore, 30, 12);
    let local = <ContinuousState as StateSpace>::local_kernel(&s).unwrap();
    let stubbed = run_ensemble_with(&s, &m, &local, &NoExploration, &mut stream.rng(), &mut NoRecorder).unwrap();
    assert_eq!(plain, stubbed);
}

#[test]
fn kernels_see_strictly_increasing_times() {
    let m = GaussianAnneal::new(1, 1.0, 0.5).unwrap();
    let s = spec(Variant::EnsembleNoExplore, 3, 8);
    let spy = TimeSpy::default();
    run_ensemble_with(&s, &m, &spy, &NoExploration, &mut RandomStream::new(7, 0).rng(), &mut NoRecorder).unwrap();
    let ts = spy.0.into_inner().unwrap();
    assert_eq!(ts.len(), 24);
    let mut levels: Vec<f64> = ts.chunks(3).map(|c| {
        assert!(c.iter().all(|&t| t == c[0]));
        c[0]
    }).collect();
    assert_eq!(levels[0], 0.125);
    assert_eq!(levels.pop(), Some(1.0));
    assert!(levels.windows(2).all(|w| w[0] < w[1]));

    let spy = TimeSpy::default();
    let s = spec(Variant::StandardAisMala, 1, 8);
    run_standard_ais_with(&s, &m, &spy, &RandomStream::new(7, 0), &mut NoRecorder).unwrap();
    let ts = spy.0.into_inner().unwrap();
    assert_eq!(ts.len(), 8);
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(ts[7], 1.0);
}

#[test]
fn cached_differences_match_direct_rates() {
    let m = GaussianMixture::four_mode_benchmark();
    for rates_per_sweep in [false, true] {
        let mut s = spec(Variant::EnsembleExplore, 40, 25);
        s.rates_per_sweep = rates_per_sweep;
        let out = run_ensemble_ais(&s, &m, &RandomStream::new(8, 0), &mut NoRecorder).unwrap();
        let direct = compute_rates(&out.ensemble, 1.0, &s.schedule, &m).unwrap();
        let cached = crate::birthdeath::BirthDeathRates::from_differences(&out.energy_differences, 1.0, s.schedule.dt())
            .unwrap();
        assert_eq!(direct, cached);
    }
}

#[test]
fn runs_are_deterministic() {
    let m = GaussianMixture::four_mode_benchmark();
    for v in Variant::ALL {
        let s = spec(v, 20, 10);
        let a = run(&s, &m, &RandomStream::new(9, 3), &mut NoRecorder).unwrap();
        let b = run(&s, &m, &RandomStream::new(9, 3), &mut NoRecorder).unwrap();
        let c = run(&s, &m, &RandomStream::new(9, 4), &mut NoRecorder).unwrap();
        assert_eq!(a, b, "{v}");
        assert_ne!(a, c, "{v}");
    }
    let ising = Ising1D::new(10, -1.0, -1.0 / 3.0, 0.8).unwrap();
    for v in [Variant::StandardAisMala, Variant::EnsembleNoExplore, Variant::EnsembleExplore] {
        let s = spec(v, 20, 10);
        let a = run(&s, &ising, &RandomStream::new(9, 3), &mut NoRecorder).unwrap();
        assert_eq!(a, run(&s, &ising, &RandomStream::new(9, 3), &mut NoRecorder).unwrap());
    }
}

#[test]
fn weight_conventions() {
    let m = GaussianAnneal::new(1, 1.0, 0.3).unwrap();
    for v in Variant::ALL {
        let out = run(&spec(v, 25, 6), &m, &RandomStream::new(10, 0), &mut NoRecorder).unwrap();
        assert_eq!(out.len(), 25);
        if v.is_ensemble() {
            assert!(out.is_uniform());
        }
        assert!((out.normalized_weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn snapshots_follow_the_record_interval() {
    let m = GaussianAnneal::new(1, 1.0, 0.3).unwrap();
    for v in Variant::ALL {
        let mut s = spec(v, 4, 10);
        s.record_every = 3;
        let mut levels = Vec::new();
        let mut rec = |level: usize, set: &WeightedSampleSet<ContinuousState>| {
            assert_eq!(set.len(), 4);
            levels.push(level);
            Ok(())
        };
        run(&s, &m, &RandomStream::new(11, 0), &mut rec).unwrap();
        assert_eq!(levels, vec![0, 3, 6, 9, 10], "{v}");
    }
}

#[test]
fn birth_death_tracks_a_narrowing_target() {
    // N(0,1) → N(0,1/4); without weights the ensemble itself must narrow
    let m = GaussianAnneal::new(1, 1.0, 0.25).unwrap();
    for v in [Variant::EnsembleNoExplore, Variant::EnsembleExplore] {
        let out = run_ensemble_ais(&spec(v, 2000, 50), &m, &RandomStream::new(12, 0), &mut NoRecorder).unwrap();
        let n = out.ensemble.len() as f64;
        let var = out.ensemble.particles.iter().map(|p| p[0] * p[0]).sum::<f64>() / n;
        assert!((var - 0.25).abs() < 0.03, "{v}: variance {var}");
    }
}

#[test]
fn exploration_move_alone_is_unbiased() {
    // only stretch moves and birth-death act; the local kernel is a no-op
    struct Frozen;
    impl<M: TargetModel<State = ContinuousState>> LocalKernel<M> for Frozen {
        fn step<R: Rng + ?Sized>(&self, _: &mut ContinuousState, _: f64, _: &AnnealingSchedule, _: &M, _: &mut R) -> Result<()> {
            Ok(())
        }
    }
    let m = GaussianAnneal::new(2, 1.0, 1.0).unwrap();
    let s = spec(Variant::EnsembleExplore, 400, 200);
    let out = run_ensemble_with(&s, &m, &Frozen, &StretchMove(s.stretch), &mut RandomStream::new(13, 0).rng(), &mut NoRecorder)
        .unwrap();
    let var = out.ensemble.particles.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / 800.0;
    assert!((var - 1.0).abs() < 0.2, "variance {var}");
}
