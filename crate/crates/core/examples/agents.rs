//! Let every agent kind explore the same maze for one phase and compare how
//! much of it they cover.

use explab::agents::{Agent, AgentConfig, AgentKind};
use explab::analysis::{coverage, dfs_consistency, discretize};
use explab::maze::{generate_maze, MazeStyle};
use explab::protocol::{run_phase, PhaseSpec, PhaseState, RewardSchedule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let maze = generate_maze(13, 11, MazeStyle::Braided, 3)?.without_goal();
    let budget = 10 * maze.reachable_cells().len();
    println!("maze: {} cells, budget {budget} transitions", maze.reachable_cells().len());
    for kind in [AgentKind::Dfs, AgentKind::Random, AgentKind::QLearn, AgentKind::CountBonus] {
        let mut agent = Agent::new(AgentConfig::new(kind, 11));
        let spec = PhaseSpec::new("A", 0, false, false, false);
        let mut phase = PhaseState::start(spec, maze.clone(), budget, RewardSchedule::default(), 0);
        run_phase(&mut agent, &mut phase, &mut 0)?;
        let traj = discretize(phase.log(), &maze)?;
        println!(
            "{:>10}: {:?} after {} transitions, coverage {:.3}, consistency {:.3}",
            kind.to_string(),
            phase.outcome().unwrap(),
            phase.transitions(),
            coverage(&traj, &maze),
            dfs_consistency(&traj, &maze)?.fraction
        );
    }
    Ok(())
}
