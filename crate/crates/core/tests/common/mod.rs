#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use explab::agents::motor::plan_move;
use explab::maze::{step, Action, AvatarState, Cell, Kinematics, MazeSpec};
use explab::service::Clock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Starts at a fixed instant and moves forward by `tick` on every read.
pub struct ManualClock {
    now: AtomicU64,
    tick: u64,
}

impl ManualClock {
    pub fn new(start: u64, tick: u64) -> Self {
        ManualClock { now: AtomicU64::new(start), tick }
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.now.fetch_add(self.tick, Ordering::SeqCst)
    }
}

/// Brute-force DFS-consistency verdicts, one per decision-point departure,
/// recomputed from scratch for every prefix of the trajectory.
///
/// The rules, written directly: entering a never-seen cell is consistent.
/// Leaving toward a seen cell while an unseen neighbor is available is not.
/// Otherwise take the latest-first-seen cell that still has an unseen
/// neighbor; the move is consistent if it lowers the distance (through
/// seen cells) to that cell by one, or if no such cell exists.
pub fn oracle_consistency(maze: &MazeSpec, cells: &[Cell]) -> Vec<bool> {
    let mut verdicts = Vec::new();
    for i in 0..cells.len().saturating_sub(1) {
        let (here, next) = (cells[i], cells[i + 1]);
        let neighbors: Vec<Cell> = maze.passable_neighbors(here).collect();
        if neighbors.len() == 2 {
            continue;
        }
        let seen: BTreeSet<Cell> = cells[..=i].iter().copied().collect();
        if !seen.contains(&next) {
            verdicts.push(true);
            continue;
        }
        let open = |c: Cell| maze.passable_neighbors(c).any(|n| !seen.contains(&n));
        if open(here) {
            verdicts.push(false);
            continue;
        }
        let mut first_seen: Vec<Cell> = Vec::new();
        for &c in &cells[..=i] {
            if !first_seen.contains(&c) {
                first_seen.push(c);
            }
        }
        let Some(&branch) = first_seen.iter().rev().find(|&&c| open(c)) else {
            verdicts.push(true);
            continue;
        };
        let d = distances_within(maze, &seen, branch);
        verdicts.push(matches!((d.get(&here), d.get(&next)), (Some(&x), Some(&y)) if y + 1 == x));
    }
    verdicts
}

/// Breadth-first distances from `origin`, moving only through `cells`.
fn distances_within(maze: &MazeSpec, cells: &BTreeSet<Cell>, origin: Cell) -> BTreeMap<Cell, usize> {
    let mut dist = BTreeMap::from([(origin, 0)]);
    let mut frontier = vec![origin];
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for c in frontier {
            for n in cells.iter().copied().filter(|&n| maze.is_passable(c, n)) {
                if !dist.contains_key(&n) {
                    dist.insert(n, d);
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// A seeded random walk over passable neighbors, starting at the maze start.
pub fn random_walk(maze: &MazeSpec, len: usize, seed: u64) -> Vec<Cell> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![maze.start_cell()];
    for _ in 0..len {
        let here = *cells.last().unwrap();
        let options: Vec<Cell> = maze.passable_neighbors(here).collect();
        if options.is_empty() {
            break;
        }
        cells.push(options[rng.gen_range(0..options.len())]);
    }
    cells
}

/// Shortest cell path between two cells, both ends included.
pub fn bfs_path(maze: &MazeSpec, from: Cell, to: Cell) -> Option<Vec<Cell>> {
    let mut parent = BTreeMap::from([(from, from)]);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        if c == to {
            let mut path = vec![to];
            while *path.last().unwrap() != from {
                path.push(parent[path.last().unwrap()]);
            }
            path.reverse();
            return Some(path);
        }
        for n in maze.passable_neighbors(c) {
            if !parent.contains_key(&n) {
                parent.insert(n, c);
                queue.push_back(n);
            }
        }
    }
    None
}

/// Primitive actions that walk the cell path from `pose`, assuming every
/// step succeeds on `maze`.
pub fn actions_for_path(maze: &MazeSpec, mut pose: AvatarState, path: &[Cell]) -> Vec<Action> {
    let mut all = Vec::new();
    for &target in path.iter().skip(1) {
        for a in plan_move(pose, target, Kinematics::default()).expect("adjacent cells") {
            pose = step(maze, pose, a);
            all.push(a);
        }
        assert_eq!(pose.cell, target, "path blocked at {target}");
    }
    all
}
