//! Sample-quality metrics.
//!
//! The KL loss drops `-log Z`, so its values are only comparable between runs
//! on the same target.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{non_finite, TargetModel};
use crate::state::{DiscreteState, WeightedSampleSet};

/// `Σ w_i U(s_i) + Σ w_i log w_i` with `0·log 0 = 0`, against the target energy `U`.
pub fn empirical_kl_loss<M: TargetModel>(samples: &WeightedSampleSet<M::State>, model: &M) -> Result<f64> {
    let mut total = 0.0;
    for (x, w) in samples.iter() {
        if w == 0.0 {
            continue;
        }
        crate::model::check_dimension(model, x)?;
        let u = model.target_energy(x);
        if !u.is_finite() {
            return Err(non_finite(u, x));
        }
        total += w * (u + w.ln());
    }
    Ok(total)
}

/// `Σ w_i f(s_i)` under normalised weights.
pub fn weighted_expectation<S>(samples: &WeightedSampleSet<S>, f: impl Fn(&S) -> f64) -> f64 {
    samples.iter().filter(|(_, w)| *w > 0.0).map(|(x, w)| w * f(x)).sum()
}

/// Weighted histogram over canonical indices, ordered by index.
pub fn empirical_histogram(samples: &WeightedSampleSet<DiscreteState>) -> Result<BTreeMap<u64, f64>> {
    let mut hist = BTreeMap::new();
    for (x, w) in samples.iter() {
        let k = x
            .canonical_index()
            .ok_or_else(|| Error::invalid(format!("state with {} spins has no 64-bit index", x.len())))?;
        *hist.entry(k).or_insert(0.0) += w;
    }
    Ok(hist)
}

/// Euclidean distance between two dense probability vectors.
pub fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Exact distribution prepared for repeated L2 comparisons against sparse
/// empirical histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Reference {
    probabilities: Vec<f64>,
    spins: usize,
    sum_of_squares: f64,
}

impl L2Reference {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let n = probabilities.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("exact distribution length {n} is not a power of two")));
        }
        let sum_of_squares = probabilities.iter().map(|p| p * p).sum();
        Ok(Self { spins: n.trailing_zeros() as usize, probabilities, sum_of_squares })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    /// `‖p̂ - p*‖₂`, touching only the states that carry sample mass.
    pub fn loss(&self, samples: &WeightedSampleSet<DiscreteState>) -> Result<f64> {
        if let Some(x) = samples.particles.iter().find(|x| x.len() != self.spins) {
            return Err(Error::LengthMismatch { expected: self.probabilities.len(), found: 1usize << x.len().min(63) });
        }
        let hist = empirical_histogram(samples)?;
        let mut covered = 0.0;
        let mut diff = 0.0;
        for (&k, &q) in &hist {
            let p = self.probabilities[k as usize];
            covered += p * p;
            diff += (q - p) * (q - p);
        }
        Ok((diff + (self.sum_of_squares - covered).max(0.0)).sqrt())
    }
}

/// `‖p̂ - p*‖₂` for the weighted empirical histogram `p̂` of `samples`.
pub fn l2_loss(samples: &WeightedSampleSet<DiscreteState>, exact: &[f64]) -> Result<f64> {
    if !exact.len().is_power_of_two() {
        return Err(Error::invalid(format!("exact distribution length {} is not a power of two", exact.len())));
    }
    let spins = exact.len().trailing_zeros() as usize;
    if let Some(x) = samples.particles.iter().find(|x| x.len() != spins) {
        return Err(Error::LengthMismatch { expected: exact.len(), found: 1usize << x.len().min(63) });
    }
    let mut dense = vec![0.0; exact.len()];
    for (k, w) in empirical_histogram(samples)? {
        dense[k as usize] = w;
    }
    l2_distance(&dense, exact)
}

/// Weight fractions inside balls around each center, plus what falls in none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeOccupancy {
    pub fractions: Vec<f64>,
    pub unassigned: f64,
}

pub fn mode_occupancy<S>(samples: &WeightedSampleSet<S>, centers: &[Vec<f64>], radius: f64) -> Result<ModeOccupancy>
where
    S: std::ops::Deref<Target = [f64]>,
{
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("mode radius must be positive, got {radius}")));
    }
    for a in 0..centers.len() {
        for b in a + 1..centers.len() {
            if squared_distance(&centers[a], &centers[b]) <= 4.0 * radius * radius {
                return Err(Error::OverlappingModes { first: a, second: b });
            }
        }
    }
    let mut fractions = vec![0.0; centers.len()];
    let mut unassigned = 0.0;
    let r2 = radius * radius;
    for (x, w) in samples.iter() {
        match centers.iter().position(|c| c.len() == x.len() && squared_distance(c, x) <= r2) {
            Some(k) => fractions[k] += w,
            None => unassigned += w,
        }
    }
    Ok(ModeOccupancy { fractions, unassigned })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One recorded metric value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub metric: String,
    pub value: f64,
    /// Seconds since the run started; excluded from deterministic outputs.
    pub elapsed: f64,
}

/// Metric snapshots of one replicate, in step order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricTrace {
    pub replicate: u64,
    pub entries: Vec<TraceEntry>,
}

impl MetricTrace {
    pub fn new(replicate: u64) -> Self {
        Self { replicate, entries: Vec::new() }
    }

    pub fn push(&mut self, step: usize, metric: impl Into<String>, value: f64, elapsed: f64) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if step < last.step {
                return Err(Error::invalid(format!("trace step {step} recorded after step {}", last.step)));
            }
        }
        self.entries.push(TraceEntry { step, metric: metric.into(), value, elapsed });
        Ok(())
    }

    /// Last value recorded for `metric`.
    pub fn last(&self, metric: &str) -> Option<f64> {
        self.entries.iter().rev().find(|e| e.metric == metric).map(|e| e.value)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
