use super::{
    Condition, ExperimentPlan, MazeDesign, PhaseLog, PhaseOutcome, PhaseSpec, PhaseState, ProtocolError, RewardSchedule,
    SessionLog, Subject,
};
use crate::agents::{greedy_direction, motor::plan_move, Agent, AgentConfig, Decision, Transition};
use crate::analysis::{discretize, CellTrajectory};
use crate::maze::{observe, Action, Cell, Heading, Kinematics, MazeSpec};

/// Simulated duration of one primitive action.
pub const AGENT_ACTION_MS: u64 = 33;

/// Deterministic id for a simulated session.
pub fn default_session_id(cfg: &AgentConfig, plan: &ExperimentPlan) -> String {
    format!("{}-e{}-{}-s{}", cfg.kind, plan.experiment, plan.condition, cfg.seed)
}

/// Drives `agent` until the phase ends. `clock` is the session clock in
/// milliseconds; each primitive action advances it by [`AGENT_ACTION_MS`].
pub fn run_phase(agent: &mut Agent, phase: &mut PhaseState, clock: &mut u64) -> Result<(), ProtocolError> {
    let kin = Kinematics::default();
    while !phase.is_over() {
        let obs = observe(phase.maze(), &phase.pose());
        let target = match agent.act(&obs) {
            Decision::Done => {
                phase.finish(PhaseOutcome::Done);
                break;
            }
            Decision::MoveTo(target) => target,
        };
        let direction = obs.current_cell.direction_to(target);
        let primitives = plan_move(phase.pose(), target, kin);
        let (Some(direction), Some(primitives)) = (direction, primitives) else {
            return Err(ProtocolError::Stalled { from: obs.current_cell, to: target });
        };
        let mut crossing = None;
        for action in primitives {
            *clock += AGENT_ACTION_MS;
            if let Some(report) = phase.apply(action, *clock) {
                if report.entered.is_some() {
                    crossing = Some(report);
                }
            }
        }
        let report = crossing.filter(|r| r.entered == Some(target));
        let Some(report) = report else {
            return Err(ProtocolError::Stalled { from: obs.current_cell, to: target });
        };
        let next = observe(phase.maze(), &phase.pose());
        agent.learn(&Transition {
            state: (obs.current_cell, obs.heading),
            action: direction,
            reward: report.reward,
            next_state: (next.current_cell, next.heading),
            next_actions: next.open_neighbors().map(|(h, _)| h).collect(),
            terminal: report.reached_goal,
        });
    }
    Ok(())
}

/// Runs every phase of `plan` with one agent. Memory carries over between
/// phases on the same maze, except the per-episode visit record; moving to
/// a new maze also forgets visit counts but keeps learned values.
pub fn run_session(cfg: &AgentConfig, plan: &ExperimentPlan, session_id: &str) -> Result<SessionLog, ProtocolError> {
    cfg.validate()?;
    plan.validate()?;
    let mut agent = Agent::new(cfg.clone());
    let mut clock = 0u64;
    let mut phases = Vec::new();
    let mut apple_events = Vec::new();
    for (i, spec) in plan.phases.iter().enumerate() {
        if i > 0 {
            clock += AGENT_ACTION_MS;
            if plan.phases[i - 1].maze != spec.maze {
                agent.reset_for_new_maze();
            } else {
                agent.begin_episode();
            }
        }
        let maze = plan.phase_maze(i)?;
        let maze_id = maze.id().to_string();
        let mut phase = PhaseState::start(spec.clone(), maze, plan.phase_budgets[i], plan.reward, clock);
        run_phase(&mut agent, &mut phase, &mut clock)?;
        apple_events.extend_from_slice(phase.apple_events());
        phases.push(PhaseLog {
            label: spec.label.clone(),
            maze_id,
            outcome: phase.outcome(),
            reward_total: phase.reward_total(),
            log: phase.log().clone(),
        });
    }
    Ok(SessionLog {
        session_id: session_id.to_string(),
        subject: Subject::Agent(cfg.clone()),
        plan: plan.clone(),
        created_unix_ms: None,
        phases,
        apple_events,
    })
}

/// Experiment 1 on one layout. `budget` overrides the default per-phase cap.
pub fn run_experiment1(cfg: &AgentConfig, maze: MazeDesign, budget: Option<usize>) -> Result<SessionLog, ProtocolError> {
    let mut plan = ExperimentPlan::experiment1(maze)?;
    if let Some(b) = budget {
        plan = plan.with_budget(b)?;
    }
    run_session(cfg, &plan, &default_session_id(cfg, &plan))
}

/// Experiment 2 on a pair of layouts.
pub fn run_experiment2(
    cfg: &AgentConfig,
    condition: Condition,
    mazes: [MazeDesign; 2],
    budget: Option<usize>,
) -> Result<SessionLog, ProtocolError> {
    let mut plan = ExperimentPlan::experiment2(condition, mazes)?;
    if let Some(b) = budget {
        plan = plan.with_budget(b)?;
    }
    run_session(cfg, &plan, &default_session_id(cfg, &plan))
}

/// Re-simulates `actions` from the start pose of phase `index`, with no
/// agent in the loop.
pub fn replay_phase(
    plan: &ExperimentPlan,
    index: usize,
    actions: impl IntoIterator<Item = Action>,
) -> Result<PhaseState, ProtocolError> {
    let spec = plan.phases.get(index).ok_or(ProtocolError::NoSuchPhase(index))?.clone();
    let mut phase = PhaseState::start(spec, plan.phase_maze(index)?, plan.phase_budgets[index], plan.reward, 0);
    for (t, action) in actions.into_iter().enumerate() {
        phase.apply(action, t as u64 + 1);
    }
    Ok(phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeSummary {
    pub outcome: PhaseOutcome,
    pub transitions: usize,
}

/// Repeated goal-seeking episodes on one maze, each from the spawn pose and
/// capped at `budget` transitions. Learned values carry over from episode
/// to episode.
pub fn train_episodes(
    agent: &mut Agent,
    maze: &MazeSpec,
    episodes: usize,
    budget: usize,
    reward: RewardSchedule,
) -> Result<Vec<EpisodeSummary>, ProtocolError> {
    if maze.goal().is_none() {
        return Err(ProtocolError::NoGoal(maze.id().to_string()));
    }
    if budget == 0 {
        return Err(ProtocolError::ZeroBudget);
    }
    let spec = PhaseSpec::new("train", 0, true, !maze.apples().is_empty(), false);
    let mut summaries = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        agent.begin_episode();
        let mut phase = PhaseState::start(spec.clone(), maze.clone(), budget, reward, 0);
        let mut clock = 0;
        run_phase(agent, &mut phase, &mut clock)?;
        let outcome = phase.outcome().expect("run_phase ends the phase");
        summaries.push(EpisodeSummary { outcome, transitions: phase.transitions() });
    }
    Ok(summaries)
}

/// Follows the learned values greedily from the spawn pose, without
/// exploration and with a fixed N, E, S, W tie-break. Returns the visited
/// cells, start included. Stops at the goal, at a cell with no exits, or
/// after `max_moves` moves.
pub fn greedy_path(agent: &Agent, maze: &MazeSpec, max_moves: usize) -> Vec<Cell> {
    let mut cell = maze.start_cell();
    let mut heading = maze.start_heading();
    let mut path = vec![cell];
    while Some(cell) != maze.goal() && path.len() <= max_moves {
        let open: Vec<_> = Heading::ALL.into_iter().filter(|&h| maze.passable_neighbor(cell, h).is_some()).collect();
        let Some(dir) = greedy_direction(agent.memory(), agent.config(), cell, heading, &open) else {
            break;
        };
        cell = cell.neighbor(dir);
        heading = dir;
        path.push(cell);
    }
    path
}

/// Replays each recorded phase of `log` and discretizes the result.
pub fn replay_session(log: &SessionLog) -> Result<Vec<CellTrajectory>, ProtocolError> {
    log.phases
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let phase = replay_phase(&log.plan, i, p.log.actions())?;
            Ok(discretize(phase.log(), phase.maze())?)
        })
        .collect()
}
