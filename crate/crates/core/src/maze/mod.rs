//! Grid mazes: layout, validation, ASCII encoding, avatar movement and
//! line-of-sight observations.
//!
//! Coordinates are `(x, y)` with `x` growing east and `y` growing south, so
//! north is `y - 1`. The outer ring of the grid is always wall.

mod generate;
mod movement;
mod observe;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_maze, GenerateError, MazeStyle};
pub use movement::{step, step_with, Action, AvatarState, Kinematics, UnknownAction, DEFAULT_SUB_STEPS};
pub use observe::{observe, Observation, Passage};

/// A grid cell coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn neighbor(self, heading: Heading) -> Cell {
        let (dx, dy) = heading.delta();
        Cell::new(self.x + dx, self.y + dy)
    }

    /// Direction from `self` to an orthogonally adjacent cell.
    pub fn direction_to(self, other: Cell) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| self.neighbor(*h) == other)
    }

    pub fn is_adjacent(self, other: Cell) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Compass heading. Quantized to 90 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    /// Fixed enumeration order, also used as the tie-break order by agents.
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::N => (0, -1),
            Heading::E => (1, 0),
            Heading::S => (0, 1),
            Heading::W => (-1, 0),
        }
    }

    pub fn right(self) -> Heading {
        match self {
            Heading::N => Heading::E,
            Heading::E => Heading::S,
            Heading::S => Heading::W,
            Heading::W => Heading::N,
        }
    }

    pub fn left(self) -> Heading {
        self.right().right().right()
    }

    pub fn opposite(self) -> Heading {
        self.right().right()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Heading::N => "N",
            Heading::E => "E",
            Heading::S => "S",
            Heading::W => "W",
        }
    }

    pub fn parse(s: &str) -> Option<Heading> {
        match s {
            "N" => Some(Heading::N),
            "E" => Some(Heading::E),
            "S" => Some(Heading::S),
            "W" => Some(Heading::W),
            _ => None,
        }
    }
}

/// Unordered pair of adjacent cells. The smaller cell is always stored first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(Cell, Cell);

impl Edge {
    pub fn new(a: Cell, b: Cell) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn cells(self) -> (Cell, Cell) {
        (self.0, self.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MazeError {
    #[error("empty maze document")]
    Empty,
    #[error("malformed grid: line {line} has width {found}, expected {expected}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("malformed grid: unexpected character {ch:?} at line {line}, column {column}")]
    BadChar { line: usize, column: usize, ch: char },
    #[error("no start cell")]
    NoStart,
    #[error("multiple starts")]
    MultipleStarts,
    #[error("multiple goals")]
    MultipleGoals,
    #[error("floor on border at {0}")]
    FloorOnBorder(Cell),
    #[error("{what} at {cell} is not a floor cell")]
    NotFloor { what: &'static str, cell: Cell },
    #[error("blocked edge {0} does not join two adjacent floor cells")]
    InvalidBlockedEdge(Edge),
    #[error("goal unreachable from start")]
    GoalUnreachable,
}

/// Immutable maze layout. Construct through [`MazeSpec::parse`] or
/// [`MazeSpec::new`]; both validate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeSpec {
    id: String,
    width: usize,
    height: usize,
    floor: BTreeSet<Cell>,
    start_cell: Cell,
    start_heading: Heading,
    goal: Option<Cell>,
    apples: BTreeSet<Cell>,
    blocked_edges: BTreeSet<Edge>,
}

impl MazeSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        width: usize,
        height: usize,
        floor: BTreeSet<Cell>,
        start_cell: Cell,
        start_heading: Heading,
        goal: Option<Cell>,
        apples: BTreeSet<Cell>,
        blocked_edges: BTreeSet<Edge>,
    ) -> Result<Self, MazeError> {
        let maze = MazeSpec {
            id: id.into(),
            width,
            height,
            floor,
            start_cell,
            start_heading,
            goal,
            apples,
            blocked_edges,
        };
        maze.validate()?;
        Ok(maze)
    }

    /// Parses the ASCII maze format: `#` wall, `.` floor, `S` start (facing
    /// north), `G` goal, `a` apple, `B` floor cell sealed off in the blocked
    /// variant. Lines must have equal length; a trailing newline is optional.
    pub fn parse(id: impl Into<String>, text: &str) -> Result<Self, MazeError> {
        let text = text.strip_suffix('\n').unwrap_or(text);
        let text = text.strip_suffix('\r').unwrap_or(text);
        if text.is_empty() {
            return Err(MazeError::Empty);
        }
        let lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        let width = lines[0].chars().count();
        if width == 0 {
            return Err(MazeError::Empty);
        }

        let mut floor = BTreeSet::new();
        let mut start = None;
        let mut goal = None;
        let mut apples = BTreeSet::new();
        let mut sealed = Vec::new();
        for (y, line) in lines.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(MazeError::Ragged { line: y + 1, expected: width, found });
            }
            for (x, ch) in line.chars().enumerate() {
                let cell = Cell::new(x as i32, y as i32);
                match ch {
                    '#' => continue,
                    '.' => {}
                    'S' => {
                        if start.replace(cell).is_some() {
                            return Err(MazeError::MultipleStarts);
                        }
                    }
                    'G' => {
                        if goal.replace(cell).is_some() {
                            return Err(MazeError::MultipleGoals);
                        }
                    }
                    'a' => {
                        apples.insert(cell);
                    }
                    'B' => sealed.push(cell),
                    _ => return Err(MazeError::BadChar { line: y + 1, column: x + 1, ch }),
                }
                floor.insert(cell);
            }
        }
        let start_cell = start.ok_or(MazeError::NoStart)?;

        let mut blocked_edges = BTreeSet::new();
        for cell in sealed {
            for h in Heading::ALL {
                let n = cell.neighbor(h);
                if floor.contains(&n) {
                    blocked_edges.insert(Edge::new(cell, n));
                }
            }
        }

        MazeSpec::new(
            id,
            width,
            lines.len(),
            floor,
            start_cell,
            Heading::N,
            goal,
            apples,
            blocked_edges,
        )
    }

    fn validate(&self) -> Result<(), MazeError> {
        if self.width == 0 || self.height == 0 {
            return Err(MazeError::Empty);
        }
        for &c in &self.floor {
            if c.x <= 0 || c.y <= 0 || c.x >= self.width as i32 - 1 || c.y >= self.height as i32 - 1 {
                return Err(MazeError::FloorOnBorder(c));
            }
        }
        if !self.floor.contains(&self.start_cell) {
            return Err(MazeError::NotFloor { what: "start", cell: self.start_cell });
        }
        if let Some(g) = self.goal {
            if !self.floor.contains(&g) {
                return Err(MazeError::NotFloor { what: "goal", cell: g });
            }
        }
        if let Some(&a) = self.apples.iter().find(|a| !self.floor.contains(a)) {
            return Err(MazeError::NotFloor { what: "apple", cell: a });
        }
        for &e in &self.blocked_edges {
            let (a, b) = e.cells();
            if !a.is_adjacent(b) || !self.floor.contains(&a) || !self.floor.contains(&b) {
                return Err(MazeError::InvalidBlockedEdge(e));
            }
        }
        if let Some(g) = self.goal {
            if !self.reachable_cells().contains(&g) {
                return Err(MazeError::GoalUnreachable);
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn floor(&self) -> &BTreeSet<Cell> {
        &self.floor
    }

    pub fn start_cell(&self) -> Cell {
        self.start_cell
    }

    pub fn start_heading(&self) -> Heading {
        self.start_heading
    }

    pub fn goal(&self) -> Option<Cell> {
        self.goal
    }

    pub fn apples(&self) -> &BTreeSet<Cell> {
        &self.apples
    }

    pub fn blocked_edges(&self) -> &BTreeSet<Edge> {
        &self.blocked_edges
    }

    pub fn is_floor(&self, cell: Cell) -> bool {
        self.floor.contains(&cell)
    }

    /// Neighbor of `cell` in direction `heading` if it is floor and the
    /// shared edge is not sealed.
    pub fn passable_neighbor(&self, cell: Cell, heading: Heading) -> Option<Cell> {
        let n = cell.neighbor(heading);
        (self.floor.contains(&n) && !self.blocked_edges.contains(&Edge::new(cell, n))).then_some(n)
    }

    /// Passable neighbors in N, E, S, W order.
    pub fn passable_neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        Heading::ALL.into_iter().filter_map(move |h| self.passable_neighbor(cell, h))
    }

    pub fn is_passable(&self, a: Cell, b: Cell) -> bool {
        a.is_adjacent(b)
            && self.floor.contains(&a)
            && self.floor.contains(&b)
            && !self.blocked_edges.contains(&Edge::new(a, b))
    }

    pub fn degree(&self, cell: Cell) -> usize {
        self.passable_neighbors(cell).count()
    }

    /// All passable adjacencies, each listed once.
    pub fn passable_edges(&self) -> BTreeSet<Edge> {
        let mut edges = BTreeSet::new();
        for &c in &self.floor {
            for n in [c.neighbor(Heading::E), c.neighbor(Heading::S)] {
                if self.is_passable(c, n) {
                    edges.insert(Edge::new(c, n));
                }
            }
        }
        edges
    }

    /// Flood fill from the start cell respecting sealed edges.
    pub fn reachable_cells(&self) -> BTreeSet<Cell> {
        self.reachable_from(self.start_cell)
    }

    pub fn reachable_from(&self, origin: Cell) -> BTreeSet<Cell> {
        let mut seen = BTreeSet::new();
        if !self.floor.contains(&origin) {
            return seen;
        }
        let mut queue = VecDeque::from([origin]);
        seen.insert(origin);
        while let Some(c) = queue.pop_front() {
            for n in self.passable_neighbors(c) {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Breadth-first distance in cell transitions, `None` if disconnected.
    pub fn shortest_path_len(&self, from: Cell, to: Cell) -> Option<usize> {
        let mut dist = std::collections::BTreeMap::from([(from, 0usize)]);
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[&c];
            if c == to {
                return Some(d);
            }
            for n in self.passable_neighbors(c) {
                if !dist.contains_key(&n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// Adds `edits` to the sealed edges and re-validates. An edit that cuts
    /// the goal off from the start is rejected.
    pub fn apply_blocked_variant(&self, edits: &BTreeSet<Edge>) -> Result<MazeSpec, MazeError> {
        let mut next = self.clone();
        next.blocked_edges.extend(edits.iter().copied());
        next.validate()?;
        Ok(next)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> MazeSpec {
        self.id = id.into();
        self
    }

    /// Same layout with every sealed edge reopened.
    pub fn without_blocks(&self) -> MazeSpec {
        MazeSpec { blocked_edges: BTreeSet::new(), ..self.clone() }
    }

    pub fn without_goal(&self) -> MazeSpec {
        MazeSpec { goal: None, ..self.clone() }
    }

    pub fn without_apples(&self) -> MazeSpec {
        MazeSpec { apples: BTreeSet::new(), ..self.clone() }
    }

    /// True when every sealed edge can be written with `B` cells, i.e. the
    /// ASCII rendering is lossless.
    pub fn is_ascii_representable(&self) -> bool {
        self.start_heading == Heading::N
            && self.goal != Some(self.start_cell)
            && !self.apples.contains(&self.start_cell)
            && self.goal.is_none_or(|g| !self.apples.contains(&g))
            && self.sealed_cells_closure() == self.blocked_edges
    }

    fn sealed_cells(&self) -> BTreeSet<Cell> {
        self.floor
            .iter()
            .copied()
            .filter(|&c| {
                c != self.start_cell
                    && Some(c) != self.goal
                    && !self.apples.contains(&c)
                    && Heading::ALL.into_iter().any(|h| self.floor.contains(&c.neighbor(h)))
                    && Heading::ALL.into_iter().all(|h| {
                        let n = c.neighbor(h);
                        !self.floor.contains(&n) || self.blocked_edges.contains(&Edge::new(c, n))
                    })
            })
            .collect()
    }

    fn sealed_cells_closure(&self) -> BTreeSet<Edge> {
        let mut edges = BTreeSet::new();
        for c in self.sealed_cells() {
            for h in Heading::ALL {
                let n = c.neighbor(h);
                if self.floor.contains(&n) {
                    edges.insert(Edge::new(c, n));
                }
            }
        }
        edges
    }

    /// Renders the ASCII format. Sealed edges that cannot be expressed as
    /// fully sealed `B` cells are dropped; see [`MazeSpec::is_ascii_representable`].
    pub fn render(&self) -> String {
        let sealed = self.sealed_cells();
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height as i32 {
            for x in 0..self.width as i32 {
                let c = Cell::new(x, y);
                let ch = if !self.floor.contains(&c) {
                    '#'
                } else if c == self.start_cell {
                    'S'
                } else if Some(c) == self.goal {
                    'G'
                } else if self.apples.contains(&c) {
                    'a'
                } else if sealed.contains(&c) {
                    'B'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}
