use rand::seq::SliceRandom;
use rand::Rng;

use super::ExperimentError;
use crate::engine::AgentProfile;
use crate::rng::seeded;

/// Draws monetary preferences with an exact half/half split: a random half
/// of the node ids get `M ~ U[0, 0.5)`, the rest `M ~ U[0.5, 1]`.
pub fn assign_profiles(n: usize, seed: u64) -> Result<Vec<AgentProfile>, ExperimentError> {
    if !n.is_multiple_of(2) {
        return Err(ExperimentError::OddAgentCount(n));
    }
    let mut rng = seeded(seed);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    let mut m = vec![0.0; n];
    for (rank, &id) in ids.iter().enumerate() {
        m[id] = if rank < n / 2 {
            rng.random_range(0.0..0.5)
        } else {
            rng.random_range(0.5..=1.0)
        };
    }
    Ok(m.into_iter()
        .enumerate()
        .map(|(id, m)| AgentProfile::new(id, m).expect("sampled preference lies in [0, 1]"))
        .collect())
}
