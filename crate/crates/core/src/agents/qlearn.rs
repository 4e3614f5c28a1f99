use rand::seq::SliceRandom;
use rand::Rng;

use super::{AgentConfig, AgentMemory, Decision};
use crate::maze::{Cell, Heading, Observation};

/// Q-table key: the agent's cell and heading, and the direction it moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QKey {
    pub cell: Cell,
    pub heading: Heading,
    pub action: Heading,
}

/// One cell transition with its reward.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: (Cell, Heading),
    pub action: Heading,
    pub reward: f64,
    pub next_state: (Cell, Heading),
    /// Open directions at the next state; the bootstrap maximum runs over these.
    pub next_actions: Vec<Heading>,
    pub terminal: bool,
}

fn q_value(mem: &AgentMemory, cfg: &AgentConfig, key: QKey) -> f64 {
    mem.q_table.get(&key).copied().unwrap_or(cfg.optimistic_init)
}

/// Epsilon-greedy over the open directions. Ties among greedy actions are
/// broken by the seeded RNG.
pub fn qlearn_act(obs: &Observation, mem: &mut AgentMemory, cfg: &AgentConfig) -> Decision {
    let actions: Vec<Heading> = obs.open_neighbors().map(|(h, _)| h).collect();
    if actions.is_empty() {
        return Decision::Done;
    }
    let explore = mem.rng.gen::<f64>() < cfg.epsilon;
    let chosen = if explore {
        *actions.choose(&mut mem.rng).expect("non-empty")
    } else {
        let values: Vec<f64> = actions
            .iter()
            .map(|&action| q_value(mem, cfg, QKey { cell: obs.current_cell, heading: obs.heading, action }))
            .collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<Heading> = actions.iter().zip(&values).filter(|(_, &v)| v == best).map(|(&a, _)| a).collect();
        *tied.choose(&mut mem.rng).expect("non-empty")
    };
    Decision::MoveTo(obs.current_cell.neighbor(chosen))
}

/// One-step Q-learning backup toward `reward + gamma * max Q(next, .)`.
pub fn qlearn_update(mem: &mut AgentMemory, t: &Transition, cfg: &AgentConfig) {
    let bootstrap = if t.terminal {
        0.0
    } else {
        t.next_actions
            .iter()
            .map(|&action| q_value(mem, cfg, QKey { cell: t.next_state.0, heading: t.next_state.1, action }))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
            .unwrap_or(0.0)
    };
    let key = QKey { cell: t.state.0, heading: t.state.1, action: t.action };
    let old = q_value(mem, cfg, key);
    let target = t.reward + cfg.gamma * bootstrap;
    mem.q_table.insert(key, old + cfg.alpha * (target - old));
}

/// Greedy direction with a fixed N, E, S, W tie-break. Used to read out the
/// learned policy without touching the RNG.
pub fn greedy_direction(mem: &AgentMemory, cfg: &AgentConfig, cell: Cell, heading: Heading, actions: &[Heading]) -> Option<Heading> {
    let mut best: Option<(Heading, f64)> = None;
    for &action in actions {
        let v = q_value(mem, cfg, QKey { cell, heading, action });
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((action, v));
        }
    }
    best.map(|(a, _)| a)
}
