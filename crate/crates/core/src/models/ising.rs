use rand::Rng;

use crate::error::{Error, Result};
use crate::model::TargetModel;
use crate::state::DiscreteState;

fn random_spins<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DiscreteState {
    let words = (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect();
    DiscreteState::from_words(words, len).expect("word count matches")
}

/// Open chain with nearest and next-nearest couplings:
/// `U(x) = β·Σ_i J1·x_i·x_{i+1} + β·Σ_i J2·x_i·x_{i+2}`.
///
/// `J1 < 0` is ferromagnetic. The initial distribution is uniform (`U_0 ≡ 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Ising1D {
    pub sites: usize,
    pub j1: f64,
    pub j2: f64,
    pub beta: f64,
}

impl Ising1D {
    pub fn new(sites: usize, j1: f64, j2: f64, beta: f64) -> Result<Self> {
        if sites == 0 {
            return Err(Error::invalid("Ising chain needs at least one site"));
        }
        if !beta.is_finite() || !j1.is_finite() || !j2.is_finite() {
            return Err(Error::invalid("Ising parameters must be finite"));
        }
        Ok(Self { sites, j1, j2, beta })
    }

    /// `Σ_i x_i x_{i+lag}` via popcount when the chain fits in one word.
    fn correlation(&self, x: &DiscreteState, lag: usize) -> f64 {
        let d = self.sites;
        if d <= lag {
            return 0.0;
        }
        let pairs = d - lag;
        if d <= 64 {
            let w = x.words()[0];
            let mask = if pairs == 64 { u64::MAX } else { (1u64 << pairs) - 1 };
            let disagree = ((w ^ (w >> lag)) & mask).count_ones() as f64;
            pairs as f64 - 2.0 * disagree
        } else {
            (0..pairs).map(|i| (x.spin(i) * x.spin(i + lag)) as f64).sum()
        }
    }
}

impl TargetModel for Ising1D {
    type State = DiscreteState;

    fn dimension(&self) -> usize {
        self.sites
    }

    fn initial_energy(&self, _x: &DiscreteState) -> f64 {
        0.0
    }

    fn target_energy(&self, x: &DiscreteState) -> f64 {
        self.beta * (self.j1 * self.correlation(x, 1) + self.j2 * self.correlation(x, 2))
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> DiscreteState {
        random_spins(self.sites, rng)
    }
}

/// Periodic `d × d` lattice, row-major, with
/// `U(x) = β·Σ_{i,j} J·(x_{i,j}·x_{i+1,j} + x_{i,j}·x_{i,j+1})`, indices mod `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ising2D {
    pub side: usize,
    pub coupling: f64,
    pub beta: f64,
}

impl Ising2D {
    pub fn new(side: usize, coupling: f64, beta: f64) -> Result<Self> {
        if side == 0 {
            return Err(Error::invalid("Ising lattice side must be positive"));
        }
        if !beta.is_finite() || !coupling.is_finite() {
            return Err(Error::invalid("Ising parameters must be finite"));
        }
        Ok(Self { side, coupling, beta })
    }
}

impl TargetModel for Ising2D {
    type State = DiscreteState;

    fn dimension(&self) -> usize {
        self.side * self.side
    }

    fn initial_energy(&self, _x: &DiscreteState) -> f64 {
        0.0
    }

    fn target_energy(&self, x: &DiscreteState) -> f64 {
        let d = self.side;
        let mut sum = 0i64;
        for i in 0..d {
            for j in 0..d {
                let s = x.spin(i * d + j) as i64;
                let down = x.spin(((i + 1) % d) * d + j) as i64;
                let right = x.spin(i * d + (j + 1) % d) as i64;
                sum += s * (down + right);
            }
        }
        self.beta * self.coupling * sum as f64
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> DiscreteState {
        random_spins(self.dimension(), rng)
    }
}
