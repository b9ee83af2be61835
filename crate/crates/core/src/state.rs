//! Particle states and the containers that hold them.

use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Continuous,
    Binary,
}

/// Common behaviour of particle states.
pub trait State: Clone + PartialEq + fmt::Debug + Send + Sync {
    const SPACE: Space;

    fn dimension(&self) -> usize;

    /// `false` if the state holds NaN or infinite coordinates.
    fn is_finite(&self) -> bool;
}

/// A point of `R^d`.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContinuousState(Vec<f64>);

impl ContinuousState {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl fmt::Debug for ContinuousState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Deref for ContinuousState {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ContinuousState {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ContinuousState {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl State for ContinuousState {
    const SPACE: Space = Space::Continuous;

    fn dimension(&self) -> usize {
        self.0.len()
    }

    fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// A spin configuration in `{-1, +1}^d`, packed one bit per site.
///
/// Bit `k` of the packed words is site `k`; a set bit is spin `+1`. For
/// `d <= 64` the packed word is the canonical state index used by enumeration
/// and histograms (spin -1 is bit 0, the first site is the least significant bit).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DiscreteState {
    words: Vec<u64>,
    len: usize,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl DiscreteState {
    /// All spins equal to `+1` (`up = true`) or `-1`.
    pub fn uniform(len: usize, up: bool) -> Self {
        let mut words = vec![if up { u64::MAX } else { 0 }; word_count(len)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { words, len }
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut s = Self::uniform(spins.len(), false);
        for (k, &v) in spins.iter().enumerate() {
            match v {
                1 => s.words[k / 64] |= 1 << (k % 64),
                -1 => {}
                other => return Err(Error::invalid(format!("spin {other} at site {k} is not ±1"))),
            }
        }
        Ok(s)
    }

    /// Builds a state from packed words, clearing bits past `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != word_count(len) {
            return Err(Error::LengthMismatch { expected: word_count(len), found: words.len() });
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { words, len })
    }

    /// Inverse of [`DiscreteState::canonical_index`].
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64, "canonical index only defined for at most 64 spins");
        let mut s = Self::uniform(len, false);
        if len > 0 {
            s.words[0] = index & tail_mask(len);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn spin(&self, site: usize) -> i8 {
        if (self.words[site / 64] >> (site % 64)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn flip(&mut self, site: usize) {
        debug_assert!(site < self.len);
        self.words[site / 64] ^= 1 << (site % 64);
    }

    pub fn flipped(&self, site: usize) -> Self {
        let mut s = self.clone();
        s.flip(site);
        s
    }

    /// Global spin flip `x -> -x`.
    pub fn negated(&self) -> Self {
        let words = self.words.iter().map(|w| !w).collect();
        Self::from_words(words, self.len).expect("same word count")
    }

    pub fn spins(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(move |k| self.spin(k))
    }

    pub fn to_spins(&self) -> Vec<i8> {
        self.spins().collect()
    }

    /// Index of this configuration in the canonical ordering, if `d <= 64`.
    pub fn canonical_index(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            1..=64 => Some(self.words[0]),
            _ => None,
        }
    }
}

impl fmt::Debug for DiscreteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.spins().map(|v| if v > 0 { '+' } else { '-' }).collect();
        write!(f, "DiscreteState({s})")
    }
}

impl State for DiscreteState {
    const SPACE: Space = Space::Binary;

    fn dimension(&self) -> usize {
        self.len
    }

    fn is_finite(&self) -> bool {
        true
    }
}

/// `N` particles sharing one annealing time.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<S> {
    pub particles: Vec<S>,
    pub time: f64,
}

impl<S: State> Ensemble<S> {
    pub fn new(particles: Vec<S>, time: f64) -> Self {
        Self { particles, time }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn require_at_least(&self, required: usize) -> Result<()> {
        if self.particles.len() < required {
            Err(Error::TooFewParticles { required, found: self.particles.len() })
        } else {
            Ok(())
        }
    }

    /// Equal-weight view of the ensemble.
    pub fn to_weighted(&self) -> WeightedSampleSet<S> {
        WeightedSampleSet::uniform(self.particles.clone())
    }
}

/// Particles with unnormalised log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampleSet<S> {
    pub particles: Vec<S>,
    pub log_weights: Vec<f64>,
}

impl<S> WeightedSampleSet<S> {
    pub fn new(particles: Vec<S>, log_weights: Vec<f64>) -> Result<Self> {
        if particles.len() != log_weights.len() {
            return Err(Error::LengthMismatch { expected: particles.len(), found: log_weights.len() });
        }
        Ok(Self { particles, log_weights })
    }

    pub fn uniform(particles: Vec<S>) -> Self {
        let log_weights = vec![0.0; particles.len()];
        Self { particles, log_weights }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn log_normalizer(&self) -> f64 {
        log_sum_exp(&self.log_weights)
    }

    /// `w_i = exp(log_w_i - logsumexp(log_w))`.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let lse = self.log_normalizer();
        self.log_weights.iter().map(|&lw| (lw - lse).exp()).collect()
    }

    pub fn is_uniform(&self) -> bool {
        self.log_weights.iter().all(|&w| w == self.log_weights[0])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> + '_ {
        self.particles.iter().zip(self.normalized_weights())
    }
}

/// Stable `log Σ exp(v_i)`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}
