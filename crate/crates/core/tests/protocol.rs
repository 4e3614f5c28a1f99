use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use explab::agents::{AgentConfig, AgentKind};
use explab::analysis::{coverage, discretize, median, steps_to_goal, GoalOutcome};
use explab::maze::{Edge, MazeSpec};
use explab::protocol::{
    batch_run, builtin_maze, run_experiment1, run_session, Condition, ExperimentPlan, PhaseOutcome, PhaseSpec, PhaseState,
    RewardSchedule,
};
use tempfile::TempDir;

const KINDS: [&str; 4] = ["dfs", "random", "qlearn", "countbonus"];

fn manifest_with_one_bad_maze() -> String {
    let mut lines = vec!["# fifty sessions, one pointing at a maze that does not exist".to_string()];
    for i in 0..50 {
        let kind = KINDS[i % 4];
        let line = match i {
            17 => format!("kind={kind} seed={i} experiment=1 maze=missing-maze.txt"),
            i if i % 3 == 0 => format!("kind={kind} seed={i} experiment=2 condition=dense"),
            i if i % 3 == 1 => format!("kind={kind} seed={i} experiment=2 condition=sparse mazes=exp2a,exp2b budget=200"),
            _ => format!("kind={kind} seed={i} experiment=1 maze=exp1"),
        };
        lines.push(line);
    }
    lines.join("\n")
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for session in fs::read_dir(root).unwrap() {
        let session = session.unwrap().path();
        for f in fs::read_dir(&session).unwrap() {
            let f = f.unwrap().path();
            let key = f.strip_prefix(root).unwrap().display().to_string();
            out.insert(key, fs::read(&f).unwrap());
        }
    }
    out
}

#[test]
fn batch_reports_bad_rows_and_reruns_identically() {
    let manifest = manifest_with_one_bad_maze();
    let base = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let results = batch_run(&manifest, base.path(), out.path()).unwrap();
    assert_eq!(results.len(), 50);
    let failed: Vec<_> = results.iter().filter(|r| r.result.is_err()).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].line, 19);
    assert_eq!(fs::read_dir(out.path()).unwrap().count(), 49);

    let again = TempDir::new().unwrap();
    batch_run(&manifest, base.path(), again.path()).unwrap();
    let (first, second) = (read_tree(out.path()), read_tree(again.path()));
    assert_eq!(first.len(), second.len());
    assert!(first == second, "batch output differs between runs");
}

#[test]
fn empty_manifest_is_an_error() {
    let dir = TempDir::new().unwrap();
    assert!(batch_run("# nothing\n\n", dir.path(), dir.path()).is_err());
}

#[test]
fn apples_are_consumed_once_and_only_from_the_plan() {
    let plan = ExperimentPlan::builtin(2, Condition::Dense).unwrap();
    for kind in [AgentKind::Random, AgentKind::QLearn, AgentKind::CountBonus] {
        for seed in 0..5 {
            let log = run_session(&AgentConfig::new(kind, seed), &plan, "s").unwrap();
            let mut seen = BTreeSet::new();
            for e in &log.apple_events {
                assert!(seen.insert((e.phase.clone(), e.cell_x, e.cell_y)), "apple eaten twice");
                let i = plan.phase_index(&e.phase).unwrap();
                assert!(plan.phases[i].apples);
                let maze = plan.phase_maze(i).unwrap();
                assert!(maze.apples().iter().any(|c| (c.x, c.y) == (e.cell_x, e.cell_y)));
            }
        }
    }
}

#[test]
fn sparse_first_phase_pays_nothing() {
    let plan = ExperimentPlan::builtin(2, Condition::Sparse).unwrap();
    for seed in 0..10 {
        let log = run_session(&AgentConfig::new(AgentKind::QLearn, seed), &plan, "s").unwrap();
        assert_eq!(log.phases[0].reward_total, 0.0);
        assert_eq!(log.phases[3].reward_total, 0.0);
        assert!(log.apple_events.is_empty());
    }
}

#[test]
fn blocked_phase_seals_exactly_the_marked_edges() {
    let design = builtin_maze("exp1").unwrap();
    let marked = design.parse().unwrap();
    let plan = ExperimentPlan::experiment1(design).unwrap();
    let open = plan.phase_maze(1).unwrap();
    let blocked = plan.phase_maze(2).unwrap();
    let sealed: BTreeSet<Edge> = open.passable_edges().difference(&blocked.passable_edges()).copied().collect();
    assert_eq!(&sealed, marked.blocked_edges());
    assert!(blocked.passable_edges().is_subset(&open.passable_edges()));
    let goal = blocked.goal().unwrap();
    let (before, after) = (
        open.shortest_path_len(open.start_cell(), goal).unwrap(),
        blocked.shortest_path_len(blocked.start_cell(), goal).unwrap(),
    );
    assert!(after > before, "the block must cut the direct route ({before} -> {after})");
}

#[test]
fn goal_phase_starting_on_the_goal_ends_at_once() {
    let open = MazeSpec::parse("m", "#####\n#S..#\n#####").unwrap();
    let start = open.start_cell();
    let maze = MazeSpec::new(
        "on-goal",
        open.width(),
        open.height(),
        open.floor().clone(),
        start,
        open.start_heading(),
        Some(start),
        BTreeSet::new(),
        BTreeSet::new(),
    )
    .unwrap();
    let spec = PhaseSpec::new("B", 0, true, false, false);
    let phase = PhaseState::start(spec, maze.clone(), 10, RewardSchedule::default(), 0);
    assert!(phase.is_over());
    assert_eq!(phase.outcome(), Some(PhaseOutcome::GoalReached));
    let traj = discretize(phase.log(), &maze).unwrap();
    assert_eq!(steps_to_goal(&traj, &maze).unwrap(), GoalOutcome::Reached(0));
}

#[test]
fn random_agent_runs_out_of_a_tiny_budget() {
    let cfg = AgentConfig::new(AgentKind::Random, 4);
    let log = run_experiment1(&cfg, builtin_maze("exp1").unwrap(), Some(10)).unwrap();
    for p in &log.phases {
        assert!(matches!(p.outcome, Some(PhaseOutcome::BudgetExhausted) | Some(PhaseOutcome::GoalReached)));
    }
    assert_eq!(log.phases[0].outcome, Some(PhaseOutcome::BudgetExhausted));
}

#[test]
fn dense_agents_explore_less_in_the_first_phase() {
    let mut by_condition = BTreeMap::new();
    for condition in [Condition::Dense, Condition::Sparse] {
        let plan = ExperimentPlan::builtin(2, condition).unwrap();
        let maze = plan.phase_maze(0).unwrap();
        let covs: Vec<f64> = (0..20)
            .map(|seed| {
                let log = run_session(&AgentConfig::new(AgentKind::QLearn, seed), &plan, "s").unwrap();
                coverage(&log.cell_trajectory(0).unwrap(), &maze)
            })
            .collect();
        by_condition.insert(condition.to_string(), median(&covs).unwrap());
    }
    assert!(by_condition["dense"] < by_condition["sparse"], "{by_condition:?}");
}
