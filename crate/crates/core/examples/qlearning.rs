//! Train a tabular Q-learner on a small open room for a number of episodes,
//! then print the greedy route it has learned.

use explab::agents::{Agent, AgentConfig, AgentKind};
use explab::maze::MazeSpec;
use explab::protocol::{greedy_path, train_episodes, RewardSchedule};

const ROOM: &str = "\
######
#S...#
#....#
#....#
#...G#
######
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let maze = MazeSpec::parse("room", ROOM)?;
    let mut agent = Agent::new(AgentConfig::new(AgentKind::QLearn, 5));
    let episodes = train_episodes(&mut agent, &maze, 300, 200, RewardSchedule::default())?;
    for (i, e) in episodes.iter().enumerate().filter(|(i, _)| i % 50 == 0 || *i == episodes.len() - 1) {
        println!("episode {i:>3}: {:?} after {} transitions", e.outcome, e.transitions);
    }
    let path = greedy_path(&agent, &maze, 50);
    println!("greedy route ({} moves): {:?}", path.len() - 1, path.iter().map(ToString::to_string).collect::<Vec<_>>());
    println!("shortest possible: {} moves", maze.shortest_path_len(maze.start_cell(), maze.goal().unwrap()).unwrap());
    Ok(())
}
