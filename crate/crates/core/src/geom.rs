//! Mesh coordinates and directions shared by both machines.

use serde::{Deserialize, Serialize};

/// Row or column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Row,
    Col,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::Row, Axis::Col];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Direction of increasing position along this axis.
    pub fn forward(self) -> Dir {
        match self {
            Axis::Row => Dir::East,
            Axis::Col => Dir::South,
        }
    }

    pub fn backward(self) -> Dir {
        self.forward().opposite()
    }
}

/// Local-link direction. `North` is towards row 0, `West` towards column 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    North,
    South,
    East,
    West,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::North, Dir::South, Dir::East, Dir::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::North => Dir::South,
            Dir::South => Dir::North,
            Dir::East => Dir::West,
            Dir::West => Dir::East,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub fn new(row: usize, col: usize) -> Self {
        Coord { row, col }
    }

    /// Neighbor in `dir` on a `rows × cols` grid, if any.
    pub fn step(self, dir: Dir, rows: usize, cols: usize) -> Option<Coord> {
        let Coord { row, col } = self;
        match dir {
            Dir::North if row > 0 => Some(Coord::new(row - 1, col)),
            Dir::South if row + 1 < rows => Some(Coord::new(row + 1, col)),
            Dir::West if col > 0 => Some(Coord::new(row, col - 1)),
            Dir::East if col + 1 < cols => Some(Coord::new(row, col + 1)),
            _ => None,
        }
    }
}
