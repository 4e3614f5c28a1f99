use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::maze::{Cell, MazeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Experiment 1: free exploration, then goal, then blocked.
    Standard,
    /// Experiment 2 with an apple trail in the first phase of each maze.
    Dense,
    /// Experiment 2 with free exploration in the first phase of each maze.
    Sparse,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Standard => "standard",
            Condition::Dense => "dense",
            Condition::Sparse => "sparse",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Condition::Standard),
            "dense" => Ok(Condition::Dense),
            "sparse" => Ok(Condition::Sparse),
            other => Err(ProtocolError::UnknownCondition(other.to_string())),
        }
    }
}

/// Goal, apple and per-transition rewards. The step cost is charged only in
/// phases with an active goal, so free exploration earns exactly nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSchedule {
    pub goal: f64,
    pub apple: f64,
    pub step_cost: f64,
}

impl Default for RewardSchedule {
    fn default() -> Self {
        RewardSchedule { goal: 1.0, apple: 0.1, step_cost: 0.001 }
    }
}

/// A maze design as shipped: the ASCII text carries start, goal, apple trail
/// and the `B` cells that are sealed only in blocked phases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeDesign {
    pub id: String,
    pub text: String,
}

impl MazeDesign {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        MazeDesign { id: id.into(), text: text.into() }
    }

    pub fn parse(&self) -> Result<MazeSpec, ProtocolError> {
        MazeSpec::parse(self.id.clone(), &self.text).map_err(|source| ProtocolError::Maze { id: self.id.clone(), source })
    }
}

const EXP1: &str = include_str!("../../mazes/exp1.txt");
const EXP2A: &str = include_str!("../../mazes/exp2a.txt");
const EXP2B: &str = include_str!("../../mazes/exp2b.txt");

/// Ids of the mazes compiled into the library.
pub const BUILTIN_MAZES: [&str; 3] = ["exp1", "exp2a", "exp2b"];

pub fn builtin_maze(id: &str) -> Option<MazeDesign> {
    let text = match id {
        "exp1" => EXP1,
        "exp2a" => EXP2A,
        "exp2b" => EXP2B,
        _ => return None,
    };
    Some(MazeDesign::new(id, text))
}

/// How one phase derives its maze from a design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub label: String,
    /// Index into the plan's maze list.
    pub maze: usize,
    pub goal: bool,
    pub apples: bool,
    pub blocked: bool,
}

impl PhaseSpec {
    pub fn new(label: &str, maze: usize, goal: bool, apples: bool, blocked: bool) -> Self {
        PhaseSpec { label: label.to_string(), maze, goal, apples, blocked }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub experiment: u8,
    pub condition: Condition,
    pub mazes: Vec<MazeDesign>,
    pub phases: Vec<PhaseSpec>,
    /// Maximum cell transitions, one entry per phase.
    pub phase_budgets: Vec<usize>,
    pub reward: RewardSchedule,
}

impl ExperimentPlan {
    /// Three phases on one layout: `A` explores with the goal hidden, `B`
    /// searches for the goal, `C` searches with the `B` cells sealed.
    pub fn experiment1(maze: MazeDesign) -> Result<Self, ProtocolError> {
        Self::build(1, Condition::Standard, vec![maze])
    }

    /// Three phases on each of two layouts, labelled `1` to `6`.
    pub fn experiment2(condition: Condition, mazes: [MazeDesign; 2]) -> Result<Self, ProtocolError> {
        Self::build(2, condition, mazes.into())
    }

    /// Builds the phase list for `experiment` and `condition`, fills default
    /// budgets and validates.
    pub fn build(experiment: u8, condition: Condition, mazes: Vec<MazeDesign>) -> Result<Self, ProtocolError> {
        let phases = match (experiment, condition) {
            (1, Condition::Standard) => vec![
                PhaseSpec::new("A", 0, false, false, false),
                PhaseSpec::new("B", 0, true, false, false),
                PhaseSpec::new("C", 0, true, false, true),
            ],
            (2, Condition::Dense | Condition::Sparse) => {
                let dense = condition == Condition::Dense;
                let mut phases = Vec::new();
                for m in 0..2 {
                    let base = 3 * m;
                    phases.push(PhaseSpec::new(&(base + 1).to_string(), m, dense, dense, false));
                    phases.push(PhaseSpec::new(&(base + 2).to_string(), m, true, false, false));
                    phases.push(PhaseSpec::new(&(base + 3).to_string(), m, true, false, true));
                }
                phases
            }
            (1 | 2, c) => return Err(ProtocolError::BadCondition { experiment, condition: c }),
            (e, _) => return Err(ProtocolError::UnknownExperiment(e.to_string())),
        };
        let expected = if experiment == 1 { 1 } else { 2 };
        if mazes.len() != expected {
            return Err(ProtocolError::WrongMazeCount { experiment, expected, found: mazes.len() });
        }
        let mut plan = ExperimentPlan {
            experiment,
            condition,
            mazes,
            phases,
            phase_budgets: Vec::new(),
            reward: RewardSchedule::default(),
        };
        plan.phase_budgets = (0..plan.phases.len())
            .map(|i| plan.phase_maze(i).map(|m| 10 * m.reachable_cells().len()))
            .collect::<Result<_, _>>()?;
        plan.validate()?;
        Ok(plan)
    }

    /// Builtin plan: experiment 1 on `exp1`, experiment 2 on `exp2a` then `exp2b`.
    pub fn builtin(experiment: u8, condition: Condition) -> Result<Self, ProtocolError> {
        let get = |id: &str| builtin_maze(id).expect("builtin maze");
        match experiment {
            1 => Self::build(1, condition, vec![get("exp1")]),
            2 => Self::build(2, condition, vec![get("exp2a"), get("exp2b")]),
            e => Err(ProtocolError::UnknownExperiment(e.to_string())),
        }
    }

    /// Same cap for every phase.
    pub fn with_budget(mut self, budget: usize) -> Result<Self, ProtocolError> {
        if budget == 0 {
            return Err(ProtocolError::ZeroBudget);
        }
        self.phase_budgets = vec![budget; self.phases.len()];
        Ok(self)
    }

    pub fn with_reward(mut self, reward: RewardSchedule) -> Self {
        self.reward = reward;
        self
    }

    pub fn phase_index(&self, label: &str) -> Option<usize> {
        self.phases.iter().position(|p| p.label == label)
    }

    /// Maze variant played in phase `index`.
    pub fn phase_maze(&self, index: usize) -> Result<MazeSpec, ProtocolError> {
        let spec = self.phases.get(index).ok_or(ProtocolError::NoSuchPhase(index))?;
        let design_doc = &self.mazes[spec.maze];
        let design = design_doc.parse()?;
        let mut maze = design.without_blocks();
        if !spec.goal {
            maze = maze.without_goal();
        }
        if !spec.apples {
            maze = maze.without_apples();
        }
        if spec.blocked {
            maze = maze
                .apply_blocked_variant(design.blocked_edges())
                .map_err(|source| ProtocolError::BadBlockedVariant { id: design_doc.id.clone(), source })?;
        }
        Ok(maze.with_id(format!("{}:{}", design_doc.id, spec.label)))
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.phase_budgets.len() != self.phases.len() {
            return Err(ProtocolError::BudgetCount { phases: self.phases.len(), budgets: self.phase_budgets.len() });
        }
        if self.phase_budgets.contains(&0) {
            return Err(ProtocolError::ZeroBudget);
        }
        for design_doc in &self.mazes {
            let design = design_doc.parse()?;
            let id = design_doc.id.clone();
            let Some(goal) = design.goal() else {
                return Err(ProtocolError::NoGoal(id));
            };
            if design.blocked_edges().is_empty() {
                return Err(ProtocolError::NoBlockedEdges(id));
            }
            if self.condition == Condition::Dense {
                if design.apples().is_empty() {
                    return Err(ProtocolError::NoApples(id));
                }
                if !apples_on_one_shortest_path(&design.without_blocks(), goal) {
                    return Err(ProtocolError::AppleTrail(id));
                }
            }
        }
        for i in 0..self.phases.len() {
            self.phase_maze(i)?;
        }
        Ok(())
    }
}

/// True when some shortest start-to-goal route passes through every apple.
/// The trail may have gaps, for instance where a sealed cell interrupts it.
fn apples_on_one_shortest_path(maze: &MazeSpec, goal: Cell) -> bool {
    let start = maze.start_cell();
    let Some(total) = maze.shortest_path_len(start, goal) else {
        return false;
    };
    let mut chain: Vec<(usize, Cell)> = Vec::new();
    for &a in maze.apples() {
        match (maze.shortest_path_len(start, a), maze.shortest_path_len(a, goal)) {
            (Some(da), Some(dg)) if da + dg == total => chain.push((da, a)),
            _ => return false,
        }
    }
    chain.sort();
    let distinct: BTreeSet<usize> = chain.iter().map(|&(d, _)| d).collect();
    if distinct.len() != chain.len() {
        return false;
    }
    chain.windows(2).all(|w| maze.shortest_path_len(w[0].1, w[1].1) == Some(w[1].0 - w[0].0))
}
