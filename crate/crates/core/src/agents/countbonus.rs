use rand::seq::SliceRandom;

use super::{AgentConfig, AgentMemory, Decision};
use crate::maze::{Cell, Observation};

/// Exploration bonus `beta / sqrt(count + 1)` for a cell entered `count` times.
pub fn visit_bonus(beta: f64, count: u32) -> f64 {
    beta / (count as f64 + 1.0).sqrt()
}

/// Greedy on the visit-count bonus of each open neighbor. Neighbors are
/// scored in N, E, S, W order; ties go to a seeded uniform pick.
pub fn countbonus_act(obs: &Observation, mem: &mut AgentMemory, cfg: &AgentConfig) -> Decision {
    let scored: Vec<(Cell, f64)> = obs
        .open_neighbors()
        .map(|(_, n)| (n, visit_bonus(cfg.beta, mem.visit_counts.get(&n).copied().unwrap_or(0))))
        .collect();
    let best = scored.iter().map(|&(_, b)| b).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Cell> = scored.iter().filter(|&&(_, b)| b == best).map(|&(c, _)| c).collect();
    tied.choose(&mut mem.rng).map_or(Decision::Done, |&c| Decision::MoveTo(c))
}
