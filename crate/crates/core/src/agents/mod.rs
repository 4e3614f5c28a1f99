//! Exploration agents.
//!
//! Agents decide at cell granularity: given an [`Observation`] they pick a
//! neighboring cell (or report that they are done), and the [`motor`] layer
//! expands that choice into primitive actions. All randomness comes from a
//! seeded ChaCha stream held in [`AgentMemory`], so a run is a pure function
//! of maze, configuration and seed.

mod config;
mod countbonus;
mod dfs;
pub mod motor;
mod qlearn;
mod random;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::maze::{Cell, Heading, Observation, Passage};

pub use config::{AgentConfig, AgentKind, ConfigError};
pub use countbonus::{countbonus_act, visit_bonus};
pub use dfs::dfs_act;
pub use qlearn::{greedy_direction, qlearn_act, qlearn_update, QKey, Transition};
pub use random::random_act;

/// An agent's choice for its next cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    MoveTo(Cell),
    /// Nothing left to explore.
    Done,
}

/// Everything an agent remembers.
#[derive(Debug, Clone)]
pub struct AgentMemory {
    /// Cells entered during the current episode.
    pub visited: BTreeSet<Cell>,
    /// Visited cells in first-visit order, pruned from the top once they have
    /// no unvisited neighbors left.
    pub branch_stack: Vec<Cell>,
    /// Open directions seen at each visited cell.
    pub passages: BTreeMap<Cell, [Passage; 4]>,
    pub q_table: HashMap<QKey, f64>,
    pub visit_counts: BTreeMap<Cell, u32>,
    pub rng: ChaCha8Rng,
}

impl AgentMemory {
    pub fn new(seed: u64) -> Self {
        AgentMemory {
            visited: BTreeSet::new(),
            branch_stack: Vec::new(),
            passages: BTreeMap::new(),
            q_table: HashMap::new(),
            visit_counts: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Bookkeeping on entering a cell. Call once per arrival.
    pub fn record_arrival(&mut self, obs: &Observation) {
        let here = obs.current_cell;
        self.passages.insert(here, obs.local_walls);
        if self.visited.insert(here) {
            self.branch_stack.push(here);
        }
        *self.visit_counts.entry(here).or_insert(0) += 1;
    }

    /// Known open neighbors of a visited cell, N, E, S, W order.
    pub fn known_neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let walls = self.passages.get(&cell);
        Heading::ALL.into_iter().filter_map(move |h| {
            walls.filter(|w| w[h.index()] == Passage::Open).map(|_| cell.neighbor(h))
        })
    }

    pub fn has_unvisited_neighbor(&self, cell: Cell) -> bool {
        self.known_neighbors(cell).any(|n| !self.visited.contains(&n))
    }

    /// Forget the current episode; learned values and visit counts stay.
    pub fn begin_episode(&mut self) {
        self.visited.clear();
        self.branch_stack.clear();
        self.passages.clear();
    }

    /// Wipe everything except the Q-table. The RNG stream continues.
    pub fn reset_for_new_maze(&mut self) {
        self.begin_episode();
        self.visit_counts.clear();
    }
}

/// A configured agent with its memory.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    memory: AgentMemory,
}

impl Agent {
    pub fn new(config: AgentConfig) -> Self {
        let memory = AgentMemory::new(config.seed);
        Agent { config, memory }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn memory(&self) -> &AgentMemory {
        &self.memory
    }

    pub fn memory_mut(&mut self) -> &mut AgentMemory {
        &mut self.memory
    }

    /// Called once each time the avatar arrives in a cell (including the
    /// start cell).
    pub fn act(&mut self, obs: &Observation) -> Decision {
        self.memory.record_arrival(obs);
        match self.config.kind {
            AgentKind::Dfs => dfs_act(obs, &mut self.memory),
            AgentKind::Random => random_act(obs, &mut self.memory),
            AgentKind::QLearn => qlearn_act(obs, &mut self.memory, &self.config),
            AgentKind::CountBonus => countbonus_act(obs, &mut self.memory, &self.config),
        }
    }

    /// Reward feedback for a completed cell transition. Only the Q-learner
    /// uses it.
    pub fn learn(&mut self, transition: &Transition) {
        if self.config.kind == AgentKind::QLearn {
            qlearn_update(&mut self.memory, transition, &self.config);
        }
    }

    pub fn begin_episode(&mut self) {
        self.memory.begin_episode();
    }

    pub fn reset_for_new_maze(&mut self) {
        self.memory.reset_for_new_maze();
    }
}
