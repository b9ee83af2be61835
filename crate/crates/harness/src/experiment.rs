//! Replicate orchestration.
//!
//! Replicate `r` of an experiment with base seed `s` draws from
//! `RandomStream::new(s, r)`. Replicates share nothing else, so results do not
//! depend on `--jobs` or on the order in which replicates finish.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use ensemble_ais::kernels::{ExplorationMove, LocalKernel};
use ensemble_ais::metrics::{empirical_kl_loss, mode_occupancy, weighted_expectation, L2Reference, MetricTrace};
use ensemble_ais::models::{
    enumerate_discrete, DoubleWellProduct, GaussianAnneal, GaussianMixture, GinzburgLandau1D, GinzburgLandau2D,
    Ising1D, Ising2D, ENUMERATION_LIMIT,
};
use ensemble_ais::samplers::StateSpace;
use ensemble_ais::{ContinuousState, DiscreteState, RandomStream, SamplerSpec, TargetModel, WeightedSampleSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::presets::ModelSpec;

/// Final particles of one replicate, in the form written to `samples.csv`.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalSamples {
    /// One row per particle with its normalised weight.
    Continuous { points: Vec<Vec<f64>>, weights: Vec<f64> },
    /// Distinct states, most frequent first.
    Discrete(Vec<StateCount>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateCount {
    /// Canonical index, or the `+`/`-` spin string above 64 spins.
    pub key: String,
    pub count: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub replicate: u64,
    pub trace: MetricTrace,
    pub samples: FinalSamples,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub replicate: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub replicates: Vec<ReplicateResult>,
    pub failures: Vec<ReplicateFailure>,
    /// Wall-clock seconds for the whole experiment.
    pub elapsed: f64,
    pub version: &'static str,
}

impl ExperimentResult {
    /// Last recorded value of every metric, per successful replicate.
    pub fn final_values(&self) -> BTreeMap<String, Vec<f64>> {
        let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &self.replicates {
            let mut last: BTreeMap<&str, f64> = BTreeMap::new();
            for e in &r.trace.entries {
                last.insert(&e.metric, e.value);
            }
            for (k, v) in last {
                out.entry(k.to_string()).or_default().push(v);
            }
        }
        out
    }

    pub fn median_final(&self, metric: &str) -> Option<f64> {
        self.final_values().get(metric).map(|v| Quartiles::of(v).median)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// Linear interpolation between order statistics. NaN for an empty slice.
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |p: f64| {
            if v.is_empty() {
                return f64::NAN;
            }
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        };
        Self { q1: at(0.25), median: at(0.5), q3: at(0.75) }
    }
}

pub fn median(values: &[f64]) -> f64 {
    Quartiles::of(values).median
}

/// Builds the model to surface parameter errors early.
pub fn check_model(spec: &ModelSpec) -> ensemble_ais::Result<()> {
    match *spec {
        ModelSpec::GaussianMixture => {}
        ModelSpec::GinzburgLandau1D { lambda_gl, size, beta, length, initial_variance } => {
            GinzburgLandau1D::new(lambda_gl, size, beta, length, initial_variance)?;
        }
        ModelSpec::GinzburgLandau2D { lambda_gl, size, beta, length, initial_variance } => {
            GinzburgLandau2D::new(lambda_gl, size, beta, length, initial_variance)?;
        }
        ModelSpec::DoubleWell { beta } => {
            DoubleWellProduct::benchmark(beta)?;
        }
        ModelSpec::Ising1D { size, j1, j2, beta } => {
            Ising1D::new(size, j1, j2, beta)?;
        }
        ModelSpec::Ising2D { size, coupling, beta } => {
            Ising2D::new(size, coupling, beta)?;
        }
        ModelSpec::GaussianAnneal { size, initial_variance, target_variance } => {
            GaussianAnneal::new(size, initial_variance, target_variance)?;
        }
    }
    Ok(())
}

/// Exact probabilities of a spin model, indexed canonically.
pub fn exact_probabilities(spec: &ModelSpec) -> Result<Vec<f64>> {
    Ok(match *spec {
        ModelSpec::Ising1D { size, j1, j2, beta } => enumerate_discrete(&Ising1D::new(size, j1, j2, beta)?)?,
        ModelSpec::Ising2D { size, coupling, beta } => enumerate_discrete(&Ising2D::new(size, coupling, beta)?)?,
        _ => return Err(HarnessError::config("only spin models can be enumerated")),
    })
}

type MetricFn<S> = dyn Fn(&WeightedSampleSet<S>) -> ensemble_ais::Result<Vec<(&'static str, f64)>> + Sync;

/// Runs every replicate of `config` on at most `jobs` threads (0 = rayon default).
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    let spec = config.sampler_spec()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::config(format!("cannot build thread pool: {e}")))?;
    let start = Instant::now();
    let outcomes = pool.install(|| dispatch(config, &spec))?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(res) => replicates.push(res),
            Err(e) => failures.push(ReplicateFailure { replicate: r as u64, message: e.to_string() }),
        }
    }
    Ok(ExperimentResult { config: config.clone(), replicates, failures, elapsed, version: env!("CARGO_PKG_VERSION") })
}

/// Median final `metric` at each particle count, all else fixed.
pub fn sweep_particles(
    config: &ExperimentConfig,
    counts: &[usize],
    metric: &str,
    jobs: usize,
) -> Result<Vec<(usize, f64)>> {
    counts
        .iter()
        .map(|&n| {
            let cfg = ExperimentConfig { particles: n, ..config.clone() };
            let res = run_experiment(&cfg, jobs)?;
            if let Some(f) = res.failures.first() {
                return Err(HarnessError::config(format!("N={n}: replicate {} failed: {}", f.replicate, f.message)));
            }
            let m = res
                .median_final(metric)
                .ok_or_else(|| HarnessError::config(format!("metric '{metric}' was not recorded")))?;
            Ok((n, m))
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

type Outcomes = Vec<ensemble_ais::Result<ReplicateResult>>;

fn dispatch(config: &ExperimentConfig, spec: &SamplerSpec) -> Result<Outcomes> {
    let standard = !spec.variant.is_ensemble();
    Ok(match config.model {
        ModelSpec::GaussianMixture => {
            let model = GaussianMixture::four_mode_benchmark();
            let centers = model.means();
            let radius = config.mode_radius;
            let m = model.clone();
            let metrics = move |s: &WeightedSampleSet<ContinuousState>| {
                let mut out = common(s, &m, standard)?;
                out.push(("mean_y", weighted_expectation(s, |x| x[1])));
                out.push(("mean_f2", weighted_expectation(s, |x| x[0] * x[0] / 3.0 + x[1] * x[1] / 5.0)));
                let occ = mode_occupancy(s, &centers, radius)?;
                const NAMES: [&str; 4] = ["mode_1", "mode_2", "mode_3", "mode_4"];
                out.extend(NAMES.iter().copied().zip(occ.fractions));
                out.push(("unassigned", occ.unassigned));
                Ok(out)
            };
            replicates(config, spec, &model, &metrics, continuous_samples)
        }
        ModelSpec::GinzburgLandau1D { lambda_gl, size, beta, length, initial_variance } => {
            let model = GinzburgLandau1D::new(lambda_gl, size, beta, length, initial_variance)?;
            let m = model.clone();
            let metrics = move |s: &WeightedSampleSet<ContinuousState>| field_metrics(s, &m, standard);
            replicates(config, spec, &model, &metrics, continuous_samples)
        }
        ModelSpec::GinzburgLandau2D { lambda_gl, size, beta, length, initial_variance } => {
            let model = GinzburgLandau2D::new(lambda_gl, size, beta, length, initial_variance)?;
            let m = model.clone();
            let metrics = move |s: &WeightedSampleSet<ContinuousState>| field_metrics(s, &m, standard);
            replicates(config, spec, &model, &metrics, continuous_samples)
        }
        ModelSpec::DoubleWell { beta } => {
            let model = DoubleWellProduct::benchmark(beta)?;
            let m = model.clone();
            let metrics = move |s: &WeightedSampleSet<ContinuousState>| {
                let mut out = common(s, &m, standard)?;
                // sign pattern of (x1, x2); m = negative, p = positive
                for (name, sx, sy) in
                    [("orthant_mm", -1.0, -1.0), ("orthant_pm", 1.0, -1.0), ("orthant_mp", -1.0, 1.0), ("orthant_pp", 1.0, 1.0)]
                {
                    let f = weighted_expectation(s, |x| if x[0] * sx > 0.0 && x[1] * sy > 0.0 { 1.0 } else { 0.0 });
                    out.push((name, f));
                }
                Ok(out)
            };
            replicates(config, spec, &model, &metrics, continuous_samples)
        }
        ModelSpec::Ising1D { size, j1, j2, beta } => {
            let model = Ising1D::new(size, j1, j2, beta)?;
            let metrics = spin_metrics(&config.model, &model, standard)?;
            replicates(config, spec, &model, &*metrics, discrete_samples)
        }
        ModelSpec::Ising2D { size, coupling, beta } => {
            let model = Ising2D::new(size, coupling, beta)?;
            let metrics = spin_metrics(&config.model, &model, standard)?;
            replicates(config, spec, &model, &*metrics, discrete_samples)
        }
        ModelSpec::GaussianAnneal { size, initial_variance, target_variance } => {
            let model = GaussianAnneal::new(size, initial_variance, target_variance)?;
            let m = model.clone();
            let metrics = move |s: &WeightedSampleSet<ContinuousState>| {
                let mut out = common(s, &m, standard)?;
                out.push(("second_moment", weighted_expectation(s, |x| x.iter().map(|v| v * v).sum::<f64>() / size as f64)));
                Ok(out)
            };
            replicates(config, spec, &model, &metrics, continuous_samples)
        }
    })
}

/// KL loss for every run; log-partition estimate and effective sample size
/// when the run carries importance weights.
fn common<M: TargetModel>(
    s: &WeightedSampleSet<M::State>,
    model: &M,
    standard: bool,
) -> ensemble_ais::Result<Vec<(&'static str, f64)>> {
    let mut out = vec![("kl", empirical_kl_loss(s, model)?)];
    if standard {
        out.push(("log_z", s.log_normalizer() - (s.len() as f64).ln()));
        let w = s.normalized_weights();
        out.push(("ess", 1.0 / w.iter().map(|v| v * v).sum::<f64>()));
    }
    Ok(out)
}

fn field_metrics<M: TargetModel<State = ContinuousState>>(
    s: &WeightedSampleSet<ContinuousState>,
    model: &M,
    standard: bool,
) -> ensemble_ais::Result<Vec<(&'static str, f64)>> {
    let mut out = common(s, model, standard)?;
    let d = model.dimension() as f64;
    out.push(("positive_fraction", weighted_expectation(s, |x| if x.iter().sum::<f64>() / d > 0.0 { 1.0 } else { 0.0 })));
    Ok(out)
}

fn spin_metrics<M>(spec: &ModelSpec, model: &M, standard: bool) -> Result<Box<MetricFn<DiscreteState>>>
where
    M: TargetModel<State = DiscreteState> + Clone + Sync + 'static,
{
    // enumeration happens once per experiment, not per replicate
    let reference = if model.dimension() <= ENUMERATION_LIMIT {
        Some(Arc::new(L2Reference::new(exact_probabilities(spec)?)?))
    } else {
        None
    };
    let m = model.clone();
    let d = model.dimension() as f64;
    Ok(Box::new(move |s: &WeightedSampleSet<DiscreteState>| {
        let mut out = common(s, &m, standard)?;
        if let Some(r) = &reference {
            out.push(("l2", r.loss(s)?));
        }
        out.push((
            "abs_magnetization",
            weighted_expectation(s, |x| (x.spins().map(f64::from).sum::<f64>() / d).abs()),
        ));
        Ok(out)
    }))
}

fn continuous_samples(s: &WeightedSampleSet<ContinuousState>) -> FinalSamples {
    FinalSamples::Continuous {
        points: s.particles.iter().map(|x| x.to_vec()).collect(),
        weights: s.normalized_weights(),
    }
}

/// Groups identical states, most frequent first; ties by key.
pub fn discrete_samples(s: &WeightedSampleSet<DiscreteState>) -> FinalSamples {
    let mut groups: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    let mut order: BTreeMap<String, u64> = BTreeMap::new();
    for (x, w) in s.iter() {
        let key = match x.canonical_index() {
            Some(k) => {
                let key = k.to_string();
                order.insert(key.clone(), k);
                key
            }
            None => x.spins().map(|v| if v > 0 { '+' } else { '-' }).collect(),
        };
        let g = groups.entry(key).or_insert((0, 0.0));
        g.0 += 1;
        g.1 += w;
    }
    let mut rows: Vec<StateCount> =
        groups.into_iter().map(|(key, (count, weight))| StateCount { key, count, weight }).collect();
    rows.sort_by(|a, b| {
        b.count.cmp(&a.count).then_with(|| match (order.get(&a.key), order.get(&b.key)) {
            (Some(x), Some(y)) => x.cmp(y),
            _ => a.key.cmp(&b.key),
        })
    });
    FinalSamples::Discrete(rows)
}

fn replicates<M>(
    config: &ExperimentConfig,
    spec: &SamplerSpec,
    model: &M,
    metrics: &MetricFn<M::State>,
    summarize: fn(&WeightedSampleSet<M::State>) -> FinalSamples,
) -> Outcomes
where
    M: TargetModel + Sync,
    M::State: StateSpace + Send + Sync,
    <M::State as StateSpace>::Local: LocalKernel<M>,
    <M::State as StateSpace>::Explore: ExplorationMove<M>,
{
    (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let start = Instant::now();
            let mut trace = MetricTrace::new(r);
            let mut recorder = |level: usize, s: &WeightedSampleSet<M::State>| {
                let elapsed = start.elapsed().as_secs_f64();
                for (name, value) in metrics(s)? {
                    trace.push(level, name, value, elapsed)?;
                }
                Ok(())
            };
            let stream = RandomStream::new(config.seed, r);
            let samples = ensemble_ais::run(spec, model, &stream, &mut recorder)?;
            Ok(ReplicateResult { replicate: r, trace, samples: summarize(&samples), elapsed: start.elapsed().as_secs_f64() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_config_str;

    #[test]
    fn quartiles_interpolate() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((q.q1, q.median, q.q3), (2.0, 3.0, 4.0));
        assert_eq!(median(&[1.0, 2.0]), 1.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(usize, f64)> = [64, 128, 256, 512].iter().map(|&n| (n, 3.0 * (n as f64).powf(-0.5))).collect();
        assert!((log_log_slope(&pts) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn discrete_rows_follow_canonical_encoding() {
        let up = DiscreteState::from_spins(&[1, 1]).unwrap();
        let down = DiscreteState::from_spins(&[-1, -1]).unwrap();
        let s = WeightedSampleSet::uniform(vec![up.clone(), down, up.clone(), up]);
        let FinalSamples::Discrete(rows) = discrete_samples(&s) else { panic!() };
        let got: Vec<_> = rows.iter().map(|r| (r.key.as_str(), r.count)).collect();
        assert_eq!(got, vec![("3", 3), ("0", 1)]);
        assert!((rows[0].weight - 0.75).abs() < 1e-15);
    }

    #[test]
    fn discrete_ties_sort_by_index() {
        let states: Vec<_> =
            [[1, -1], [-1, 1], [1, 1], [-1, -1]].iter().map(|s| DiscreteState::from_spins(s).unwrap()).collect();
        let FinalSamples::Discrete(rows) = discrete_samples(&WeightedSampleSet::uniform(states)) else { panic!() };
        let keys: Vec<_> = rows.iter().map(|r| r.key.as_str()).collect();
        assert_eq!(keys, ["0", "1", "2", "3"]);
    }

    #[test]
    fn replicate_streams_do_not_depend_on_jobs() {
        let cfg = load_config_str("model = \"gl1d\"\nN = 64\nL = 10\nreplicates = 3\nvariant = \"standard_ais_mala\"\n")
            .unwrap();
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&cfg, 3).unwrap();
        assert_eq!(a.final_values(), b.final_values());
        assert_eq!(a.replicates.len(), 3);
        assert!(a.failures.is_empty());
    }

    #[test]
    fn snapshots_follow_record_every() {
        let cfg = load_config_str("model = \"ising2d_ferro\"\nsize = 2\nN = 16\nL = 10\nrecord_every = 4\n").unwrap();
        let res = run_experiment(&cfg, 1).unwrap();
        let mut steps: Vec<usize> = res.replicates[0].trace.entries.iter().map(|e| e.step).collect();
        steps.dedup();
        assert_eq!(steps, vec![0, 4, 8, 10]);
        let metrics: Vec<&str> = res.replicates[0].trace.entries.iter().take(3).map(|e| e.metric.as_str()).collect();
        assert_eq!(metrics, vec!["kl", "l2", "abs_magnetization"]);
    }

    #[test]
    fn failures_are_kept_per_replicate() {
        // balls this wide overlap, so every snapshot fails
        let cfg = load_config_str("model = \"gmm2d\"\nN = 8\nL = 3\nreplicates = 2\nmode_radius = 5.0\n").unwrap();
        let res = run_experiment(&cfg, 1).unwrap();
        assert!(res.replicates.is_empty());
        assert_eq!(res.failures.len(), 2);
        assert_eq!(res.failures[1].replicate, 1);
        assert!(res.failures[0].message.contains("overlap"), "{}", res.failures[0].message);
    }
}
