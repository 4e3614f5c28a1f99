//! Score a hand-written cell path decision by decision.

use explab::analysis::{dfs_consistency, CellTrajectory};
use explab::maze::{Cell, MazeSpec};

// A T-junction at (3,1) with dead ends west, east and south.
const T_MAZE: &str = "\
#######
#S....#
###.###
###.###
#######
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let maze = MazeSpec::parse("t", T_MAZE)?;
    let c = |x, y| Cell::new(x, y);
    let walks = [
        ("systematic", vec![c(1, 1), c(2, 1), c(3, 1), c(4, 1), c(5, 1), c(4, 1), c(3, 1), c(3, 2), c(3, 3)]),
        ("turns back at the junction", vec![c(1, 1), c(2, 1), c(3, 1), c(2, 1), c(3, 1), c(4, 1), c(5, 1), c(4, 1), c(3, 1), c(3, 2), c(3, 3)]),
    ];
    for (name, cells) in walks {
        let result = dfs_consistency(&CellTrajectory::new(cells, &maze)?, &maze)?;
        println!("{name}: fraction {:.3}", result.fraction);
        for d in &result.decisions {
            println!("  step {:>2} at {} -> {}: {} ({:?})", d.index, d.cell, d.chosen_next, d.consistent, d.rule_applied);
        }
    }
    Ok(())
}
