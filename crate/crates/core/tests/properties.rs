mod common;

use std::collections::BTreeSet;

use explab::agents::{Agent, AgentConfig, AgentKind};
use explab::analysis::{cells_crossed, coverage, dfs_consistency, discretize, re_exploration, CellTrajectory};
use explab::maze::{generate_maze, MazeSpec, MazeStyle};
use explab::protocol::{
    replay_session, run_phase, run_session, ExperimentPlan, PhaseOutcome, PhaseSpec, PhaseState, RewardSchedule,
};
use proptest::prelude::*;

use common::{oracle_consistency, random_walk};

fn style() -> impl Strategy<Value = MazeStyle> {
    prop_oneof![Just(MazeStyle::Perfect), Just(MazeStyle::Braided)]
}

fn odd(lo: usize, hi: usize) -> impl Strategy<Value = usize> {
    (lo / 2..=hi / 2).prop_map(|k| 2 * k + 1)
}

fn eccentricity(maze: &MazeSpec, from: explab::maze::Cell) -> usize {
    maze.reachable_cells().iter().map(|&c| maze.shortest_path_len(from, c).unwrap()).max().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_postconditions(w in odd(5, 11), h in odd(5, 11), style in style(), seed in 0u64..10_000) {
        let maze = generate_maze(w, h, style, seed).unwrap();
        let edges = maze.passable_edges().len();
        let floor = maze.floor().len();
        match style {
            MazeStyle::Perfect => prop_assert_eq!(edges, floor - 1),
            MazeStyle::Braided => prop_assert!(edges > floor - 1),
        }
        prop_assert_eq!(maze.reachable_cells().len(), floor);
        let goal = maze.goal().unwrap();
        let d = maze.shortest_path_len(maze.start_cell(), goal).unwrap();
        prop_assert_eq!(d, eccentricity(&maze, maze.start_cell()));
        prop_assert_eq!(generate_maze(w, h, style, seed).unwrap(), maze.clone());
        let reparsed = MazeSpec::parse(maze.id(), &maze.render()).unwrap();
        prop_assert_eq!(reparsed, maze);
    }

    #[test]
    fn consistency_matches_the_oracle(seed in 0u64..10_000, style in style(), len in 0usize..80) {
        let maze = generate_maze(7, 7, style, seed).unwrap();
        let cells = random_walk(&maze, len, seed ^ 0xA5A5);
        let traj = CellTrajectory::new(cells.clone(), &maze).unwrap();
        let got: Vec<bool> = dfs_consistency(&traj, &maze).unwrap().decisions.iter().map(|d| d.consistent).collect();
        prop_assert_eq!(got, oracle_consistency(&maze, &cells));
    }

    #[test]
    fn metric_ranges(seed in 0u64..10_000, style in style(), len in 0usize..100) {
        let maze = generate_maze(9, 9, style, seed).unwrap();
        let cells = random_walk(&maze, len, seed);
        let traj = CellTrajectory::new(cells.clone(), &maze).unwrap();
        let cov = coverage(&traj, &maze);
        prop_assert!(cov > 0.0 && cov <= 1.0);
        let distinct: BTreeSet<_> = cells.iter().collect();
        prop_assert!((cov - distinct.len() as f64 / maze.reachable_cells().len() as f64).abs() < 1e-12);
        let re = re_exploration(&traj);
        prop_assert!((0.0..=1.0).contains(&re));
        prop_assert_eq!(cells_crossed(&traj), cells.len() - 1);
        let f = dfs_consistency(&traj, &maze).unwrap().fraction;
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn dfs_is_self_consistent_on_generated_mazes(seed in 0u64..10_000, style in style(), w in odd(5, 9), h in odd(5, 9)) {
        let maze = generate_maze(w, h, style, seed).unwrap().without_goal();
        let budget = 2 * maze.passable_edges().len();
        let mut agent = Agent::new(AgentConfig::new(AgentKind::Dfs, seed));
        let mut phase = PhaseState::start(PhaseSpec::new("A", 0, false, false, false), maze.clone(), budget, RewardSchedule::default(), 0);
        run_phase(&mut agent, &mut phase, &mut 0).unwrap();
        prop_assert_eq!(phase.outcome(), Some(PhaseOutcome::Done));
        let traj = discretize(phase.log(), &maze).unwrap();
        prop_assert_eq!(coverage(&traj, &maze), 1.0);
        prop_assert_eq!(dfs_consistency(&traj, &maze).unwrap().fraction, 1.0);
        prop_assert!(phase.transitions() <= budget);
    }

    #[test]
    fn replay_reproduces_agent_sessions(seed in 0u64..1_000, kind in 0usize..4, exp in 1u8..=2, dense: bool) {
        let kind = [AgentKind::Dfs, AgentKind::Random, AgentKind::QLearn, AgentKind::CountBonus][kind];
        let condition = match (exp, dense) {
            (1, _) => explab::protocol::Condition::Standard,
            (_, true) => explab::protocol::Condition::Dense,
            (_, false) => explab::protocol::Condition::Sparse,
        };
        let plan = ExperimentPlan::builtin(exp, condition).unwrap().with_budget(120).unwrap();
        let log = run_session(&AgentConfig::new(kind, seed), &plan, "p").unwrap();
        let replayed = replay_session(&log).unwrap();
        for (i, r) in replayed.iter().enumerate() {
            prop_assert_eq!(r, &log.cell_trajectory(i).unwrap());
        }
    }

    #[test]
    fn validate_maze_accepts_exactly_what_parse_accepts(
        rows in prop::collection::vec(prop::collection::vec(prop::sample::select(vec!['#', '#', '.', '.', '.', 'S', 'G', 'a', 'B', 'x']), 5), 3..6),
        ragged: bool,
    ) {
        let mut lines: Vec<String> = rows.iter().map(|r| r.iter().collect()).collect();
        if ragged {
            lines[1].push('#');
        }
        let text = lines.join("\n");
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("m.txt");
        std::fs::write(&path, &text).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = explab::cli::run(["explab", "validate-maze", path.to_str().unwrap()], &mut out, &mut err);
        prop_assert_eq!(code == 0, MazeSpec::parse("m", &text).is_ok(), "{}", String::from_utf8_lossy(&err));
    }
}
