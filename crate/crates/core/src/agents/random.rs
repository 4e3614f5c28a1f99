use rand::seq::IteratorRandom;

use super::{AgentMemory, Decision};
use crate::maze::Observation;

/// Uniform choice among open neighbors.
pub fn random_act(obs: &Observation, mem: &mut AgentMemory) -> Decision {
    obs.open_neighbors()
        .map(|(_, c)| c)
        .choose_stable(&mut mem.rng)
        .map_or(Decision::Done, Decision::MoveTo)
}
