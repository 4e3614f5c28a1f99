//! Parse a hand-drawn maze, generate two random ones, and walk an avatar
//! through a few primitive actions while printing what it can see.

use explab::maze::{generate_maze, observe, step, Action, AvatarState, MazeSpec, MazeStyle};

const DRAWN: &str = "\
#########
#S..#...#
#.#.#.#.#
#.#...#G#
#########
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let maze = MazeSpec::parse("drawn", DRAWN)?;
    println!(
        "drawn: {}x{} cells, {} floor, start {} facing {}, goal {}",
        maze.width(),
        maze.height(),
        maze.floor().len(),
        maze.start_cell(),
        maze.start_heading().as_str(),
        maze.goal().map_or("none".to_string(), |g| g.to_string())
    );
    println!("shortest route: {} moves", maze.shortest_path_len(maze.start_cell(), maze.goal().unwrap()).unwrap());

    for style in [MazeStyle::Perfect, MazeStyle::Braided] {
        let g = generate_maze(11, 9, style, 7)?;
        println!("\n{style:?} 11x9, seed 7: {} edges over {} cells", g.passable_edges().len(), g.floor().len());
        print!("{}", g.render());
    }

    println!();
    let mut pose = AvatarState::spawn(&maze);
    for action in [Action::TurnRight, Action::Forward, Action::Forward, Action::Forward, Action::Forward, Action::Forward] {
        pose = step(&maze, pose, action);
        let seen = observe(&maze, &pose);
        println!("{action:?}: cell {} heading {} sees {} cells", pose.cell, pose.heading.as_str(), seen.visible_cells.len());
    }
    Ok(())
}
