use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::TargetModel;
use crate::state::DiscreteState;

/// Largest spin count accepted by [`enumerate_discrete`].
pub const ENUMERATION_LIMIT: usize = 24;

/// Exact target probabilities `p(x) = exp(-U(x))/Z` over all `2^d` states,
/// indexed by [`DiscreteState::canonical_index`].
///
/// Energies are shifted by their minimum before exponentiating, so the result
/// does not depend on the absolute energy scale.
pub fn enumerate_discrete<M>(model: &M) -> Result<Vec<f64>>
where
    M: TargetModel<State = DiscreteState>,
{
    let (log_p, _) = log_probabilities(model)?;
    Ok(log_p.into_iter().map(f64::exp).collect())
}

/// `log Z` of the target, computed by full enumeration.
pub fn log_partition<M>(model: &M) -> Result<f64>
where
    M: TargetModel<State = DiscreteState>,
{
    Ok(log_probabilities(model)?.1)
}

fn log_probabilities<M>(model: &M) -> Result<(Vec<f64>, f64)>
where
    M: TargetModel<State = DiscreteState>,
{
    let d = model.dimension();
    if d > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { spins: d, limit: ENUMERATION_LIMIT });
    }
    let energies: Vec<f64> = (0..1u64 << d)
        .into_par_iter()
        .map(|k| model.target_energy(&DiscreteState::from_index(k, d)))
        .collect();
    if let Some((k, &u)) = energies.iter().enumerate().find(|(_, u)| !u.is_finite()) {
        return Err(crate::model::non_finite(u, &DiscreteState::from_index(k as u64, d)));
    }
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    // sequential sum keeps the result independent of the thread count
    let shifted_z: f64 = energies.iter().map(|u| (min - u).exp()).sum();
    let log_z = shifted_z.ln() - min;
    Ok((energies.into_iter().map(|u| -u - log_z).collect(), log_z))
}
