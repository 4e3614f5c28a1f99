use std::collections::{HashMap, VecDeque};

use super::{AgentMemory, Decision};
use crate::maze::{Cell, Observation};

/// Depth-first exploration.
///
/// Takes the first unvisited open neighbor in N, E, S, W order. At a dead end
/// it heads back toward the most recently first-visited cell that still has
/// an unvisited neighbor, stepping along a shortest path through visited
/// cells. Reports [`Decision::Done`] once no such cell remains.
pub fn dfs_act(obs: &Observation, mem: &mut AgentMemory) -> Decision {
    let here = obs.current_cell;
    if let Some((_, next)) = obs.open_neighbors().find(|(_, n)| !mem.visited.contains(n)) {
        return Decision::MoveTo(next);
    }

    while let Some(&top) = mem.branch_stack.last() {
        if mem.has_unvisited_neighbor(top) {
            break;
        }
        mem.branch_stack.pop();
    }
    let Some(&branch) = mem.branch_stack.last() else {
        return Decision::Done;
    };

    let dist = visited_distances(mem, branch);
    let d_here = dist[&here];
    let next = mem
        .known_neighbors(here)
        .find(|n| dist.get(n).is_some_and(|&d| d + 1 == d_here))
        .expect("visited subgraph is connected");
    Decision::MoveTo(next)
}

/// BFS distances from `origin` restricted to visited cells.
fn visited_distances(mem: &AgentMemory, origin: Cell) -> HashMap<Cell, usize> {
    let mut dist = HashMap::from([(origin, 0)]);
    let mut queue = VecDeque::from([origin]);
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for n in mem.known_neighbors(c) {
            if mem.visited.contains(&n) && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}
