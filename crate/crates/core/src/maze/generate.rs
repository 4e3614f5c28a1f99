use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Cell, Heading, MazeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MazeStyle {
    /// Spanning tree: exactly one path between any two cells.
    Perfect,
    /// Spanning tree plus extra openings that create loops.
    Braided,
}

impl fmt::Display for MazeStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MazeStyle::Perfect => "perfect",
            MazeStyle::Braided => "braided",
        })
    }
}

impl FromStr for MazeStyle {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perfect" => Ok(MazeStyle::Perfect),
            "braided" => Ok(MazeStyle::Braided),
            other => Err(GenerateError::UnknownStyle(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("maze dimensions must be odd and at least 5, got {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("unknown maze style {0:?}; expected perfect or braided")]
    UnknownStyle(String),
}

/// Chance that a dead end gets an extra opening in a braided maze.
const BRAID_PROBABILITY: f64 = 0.5;

/// Seeded recursive-backtracker maze on an odd grid. Rooms sit at odd
/// coordinates and the cells between them are passages. Start and goal are
/// placed at the two ends of a longest shortest path.
pub fn generate_maze(width: usize, height: usize, style: MazeStyle, seed: u64) -> Result<MazeSpec, GenerateError> {
    if width < 5 || height < 5 || width % 2 == 0 || height % 2 == 0 {
        return Err(GenerateError::BadDimensions { width, height });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rooms_x = (width as i32 - 1) / 2;
    let rooms_y = (height as i32 - 1) / 2;
    let room = |i: i32, j: i32| Cell::new(2 * i + 1, 2 * j + 1);
    let in_grid = |c: Cell| c.x >= 1 && c.y >= 1 && c.x < 2 * rooms_x && c.y < 2 * rooms_y;
    let room_step = |c: Cell, h: Heading| c.neighbor(h).neighbor(h);

    let mut floor: BTreeSet<Cell> = BTreeSet::new();
    let origin = room(rng.gen_range(0..rooms_x), rng.gen_range(0..rooms_y));
    floor.insert(origin);
    let mut stack = vec![origin];
    while let Some(&current) = stack.last() {
        let options: Vec<Heading> = Heading::ALL
            .into_iter()
            .filter(|&h| {
                let n = room_step(current, h);
                in_grid(n) && !floor.contains(&n)
            })
            .collect();
        match options.choose(&mut rng) {
            Some(&h) => {
                let next = room_step(current, h);
                floor.insert(current.neighbor(h));
                floor.insert(next);
                stack.push(next);
            }
            None => {
                stack.pop();
            }
        }
    }

    if style == MazeStyle::Braided {
        let closed_walls = |floor: &BTreeSet<Cell>, c: Cell| -> Vec<Heading> {
            Heading::ALL
                .into_iter()
                .filter(|&h| in_grid(room_step(c, h)) && !floor.contains(&c.neighbor(h)))
                .collect()
        };
        let mut rooms: Vec<Cell> = (0..rooms_y).flat_map(|j| (0..rooms_x).map(move |i| room(i, j))).collect();
        rooms.shuffle(&mut rng);
        let mut opened = 0;
        for &c in &rooms {
            let open = Heading::ALL.into_iter().filter(|&h| floor.contains(&c.neighbor(h))).count();
            if open == 1 && rng.gen_bool(BRAID_PROBABILITY) {
                if let Some(&h) = closed_walls(&floor, c).choose(&mut rng) {
                    floor.insert(c.neighbor(h));
                    opened += 1;
                }
            }
        }
        if opened == 0 {
            // guarantee at least one loop
            if let Some((c, h)) = rooms.iter().find_map(|&c| closed_walls(&floor, c).first().map(|&h| (c, h))) {
                floor.insert(c.neighbor(h));
            }
        }
    }

    let distances = |from: Cell| -> BTreeMap<Cell, usize> {
        let mut dist = BTreeMap::from([(from, 0usize)]);
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[&c];
            for h in Heading::ALL {
                let n = c.neighbor(h);
                if floor.contains(&n) && !dist.contains_key(&n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    };
    let farthest = |from: Cell| -> (usize, Cell) {
        distances(from)
            .into_iter()
            .fold((0, from), |best, (c, d)| if d > best.0 { (d, c) } else { best })
    };
    // Double sweep is exact on trees; loops need the full scan.
    let (start, goal) = match style {
        MazeStyle::Perfect => {
            let start = farthest(origin).1;
            (start, farthest(start).1)
        }
        MazeStyle::Braided => {
            let mut best = (0, origin, origin);
            for &a in &floor {
                let (d, b) = farthest(a);
                if d > best.0 {
                    best = (d, a, b);
                }
            }
            (best.1, best.2)
        }
    };
    let goal = (goal != start).then_some(goal);

    let id = format!("gen-{style}-{width}x{height}-s{seed}");
    let maze = MazeSpec::new(
        id,
        width,
        height,
        floor,
        start,
        Heading::N,
        goal,
        BTreeSet::new(),
        BTreeSet::new(),
    )
    .expect("generated maze is valid by construction");
    Ok(maze)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_maze_is_a_spanning_tree() {
        let m = generate_maze(9, 9, MazeStyle::Perfect, 1).unwrap();
        assert_eq!(m.passable_edges().len(), m.floor().len() - 1);
        assert_eq!(m.reachable_cells(), m.floor().clone());
    }

    #[test]
    fn braided_maze_has_loops() {
        let m = generate_maze(9, 9, MazeStyle::Braided, 1).unwrap();
        assert!(m.passable_edges().len() > m.floor().len() - 1);
        assert_eq!(m.reachable_cells(), m.floor().clone());
    }

    #[test]
    fn same_seed_same_text() {
        for style in [MazeStyle::Perfect, MazeStyle::Braided] {
            let a = generate_maze(11, 7, style, 42).unwrap().render();
            let b = generate_maze(11, 7, style, 42).unwrap().render();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn start_and_goal_are_maximally_distant() {
        for (seed, style) in (0..20).flat_map(|s| [(s, MazeStyle::Perfect), (s, MazeStyle::Braided)]) {
            let m = generate_maze(9, 9, style, seed).unwrap();
            let d = m.shortest_path_len(m.start_cell(), m.goal().unwrap()).unwrap();
            let diameter = m
                .floor()
                .iter()
                .flat_map(|&a| m.floor().iter().map(move |&b| (a, b)))
                .filter_map(|(a, b)| m.shortest_path_len(a, b))
                .max()
                .unwrap();
            assert_eq!(d, diameter, "seed {seed} {style}");
        }
    }

    #[test]
    fn smallest_braided_maze_closes_its_loop() {
        for seed in 0..10 {
            let m = generate_maze(5, 5, MazeStyle::Braided, seed).unwrap();
            assert_eq!(m.floor().len(), 8);
            assert_eq!(m.passable_edges().len(), 8);
        }
    }

    #[test]
    fn bad_dimensions() {
        assert!(generate_maze(8, 9, MazeStyle::Perfect, 0).is_err());
        assert!(generate_maze(3, 9, MazeStyle::Perfect, 0).is_err());
        assert!("woven".parse::<MazeStyle>().is_err());
    }
}
