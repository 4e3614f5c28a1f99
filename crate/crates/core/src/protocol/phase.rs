use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{PhaseSpec, RewardSchedule};
use crate::analysis::{LogAction, TrajectoryLog, TrajectoryRecord};
use crate::maze::{step, Action, AvatarState, Cell, MazeSpec};

/// How a phase ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOutcome {
    GoalReached,
    BudgetExhausted,
    /// The agent reported nothing left to explore.
    Done,
}

impl PhaseOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseOutcome::GoalReached => "goal_reached",
            PhaseOutcome::BudgetExhausted => "budget_exhausted",
            PhaseOutcome::Done => "done",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [PhaseOutcome::GoalReached, PhaseOutcome::BudgetExhausted, PhaseOutcome::Done]
            .into_iter()
            .find(|o| o.as_str() == s)
    }
}

/// An apple consumed on first entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppleEvent {
    pub phase: String,
    pub cell_x: i32,
    pub cell_y: i32,
    pub t_ms: u64,
}

/// What a single primitive action did.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    /// Cell entered, if the action crossed a cell boundary.
    pub entered: Option<Cell>,
    pub reward: f64,
    pub apple: Option<Cell>,
    pub reached_goal: bool,
}

/// One phase in progress: the maze variant, the avatar, the growing log and
/// reward bookkeeping. Agents and human sessions drive the same machine.
#[derive(Debug, Clone)]
pub struct PhaseState {
    spec: PhaseSpec,
    maze: MazeSpec,
    budget: usize,
    reward: RewardSchedule,
    pose: AvatarState,
    transitions: usize,
    reward_total: f64,
    consumed: BTreeSet<Cell>,
    apple_events: Vec<AppleEvent>,
    log: TrajectoryLog,
    outcome: Option<PhaseOutcome>,
}

impl PhaseState {
    /// Spawns at the start pose and logs the `start` record at `t_ms`. A
    /// goal phase that spawns on the goal is over at once.
    pub fn start(spec: PhaseSpec, maze: MazeSpec, budget: usize, reward: RewardSchedule, t_ms: u64) -> Self {
        let pose = AvatarState::spawn(&maze);
        let mut log = TrajectoryLog::default();
        log.push(TrajectoryRecord::new(t_ms, LogAction::Start, pose));
        let outcome = (maze.goal() == Some(pose.cell)).then_some(PhaseOutcome::GoalReached);
        PhaseState {
            spec,
            maze,
            budget,
            reward,
            pose,
            transitions: 0,
            reward_total: 0.0,
            consumed: BTreeSet::new(),
            apple_events: Vec::new(),
            log,
            outcome,
        }
    }

    pub fn spec(&self) -> &PhaseSpec {
        &self.spec
    }

    pub fn maze(&self) -> &MazeSpec {
        &self.maze
    }

    pub fn pose(&self) -> AvatarState {
        self.pose
    }

    pub fn transitions(&self) -> usize {
        self.transitions
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn reward_total(&self) -> f64 {
        self.reward_total
    }

    pub fn log(&self) -> &TrajectoryLog {
        &self.log
    }

    pub fn apple_events(&self) -> &[AppleEvent] {
        &self.apple_events
    }

    pub fn consumed(&self) -> &BTreeSet<Cell> {
        &self.consumed
    }

    pub fn outcome(&self) -> Option<PhaseOutcome> {
        self.outcome
    }

    pub fn is_over(&self) -> bool {
        self.outcome.is_some()
    }

    /// Ends the phase early. Ignored once an outcome is set.
    pub fn finish(&mut self, outcome: PhaseOutcome) {
        self.outcome.get_or_insert(outcome);
    }

    /// Applies one primitive action and logs the resulting pose. Returns
    /// `None` without logging when the phase is already over.
    pub fn apply(&mut self, action: Action, t_ms: u64) -> Option<StepReport> {
        if self.outcome.is_some() {
            return None;
        }
        let before = self.pose.cell;
        self.pose = step(&self.maze, self.pose, action);
        self.log.push(TrajectoryRecord::new(t_ms, action.into(), self.pose));

        let mut report = StepReport::default();
        if self.pose.cell == before {
            return Some(report);
        }
        let here = self.pose.cell;
        report.entered = Some(here);
        self.transitions += 1;
        if self.spec.goal {
            report.reward -= self.reward.step_cost;
        }
        if self.spec.apples && self.maze.apples().contains(&here) && self.consumed.insert(here) {
            report.reward += self.reward.apple;
            report.apple = Some(here);
            self.apple_events.push(AppleEvent { phase: self.spec.label.clone(), cell_x: here.x, cell_y: here.y, t_ms });
        }
        if self.maze.goal() == Some(here) {
            report.reward += self.reward.goal;
            report.reached_goal = true;
            self.outcome = Some(PhaseOutcome::GoalReached);
        } else if self.transitions >= self.budget {
            self.outcome = Some(PhaseOutcome::BudgetExhausted);
        }
        self.reward_total += report.reward;
        Some(report)
    }
}
