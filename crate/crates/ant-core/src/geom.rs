//! Grid geometry: cells, the four axis directions, and quarter-turn rotations.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Sub};

/// A cell of the unbounded square grid.
///
/// Ordering is row-major by `(y, x)`, which is also the order used by every
/// serialised cell list in the project.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i64,
    pub y: i64,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Cell { x, y }
    }

    /// Rotate a quarter turn counterclockwise about the origin.
    pub fn rotate_ccw(self) -> Self {
        Cell::new(-self.y, self.x)
    }

    /// Rotate `quarters` quarter turns counterclockwise about the origin.
    pub fn rotate_ccw_by(self, quarters: u8) -> Self {
        (0..quarters % 4).fold(self, |c, _| c.rotate_ccw())
    }

    /// Parity class `(x + y) mod 2`. Invariant under quarter-turn rotation.
    pub fn parity(self) -> u8 {
        (self.x + self.y).rem_euclid(2) as u8
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<(i64, i64)> for Cell {
    type Output = Cell;
    fn add(self, (dx, dy): (i64, i64)) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }
}

impl Sub<(i64, i64)> for Cell {
    type Output = Cell;
    fn sub(self, (dx, dy): (i64, i64)) -> Cell {
        Cell::new(self.x - dx, self.y - dy)
    }
}

impl Sub for Cell {
    type Output = (i64, i64);
    fn sub(self, other: Cell) -> (i64, i64) {
        (self.x - other.x, self.y - other.y)
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// One of the four unit vectors, `y` growing northwards.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Direction {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::North,
        Direction::West,
        Direction::South,
    ];

    pub fn vector(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::North => (0, 1),
            Direction::West => (-1, 0),
            Direction::South => (0, -1),
        }
    }

    fn from_index(i: u8) -> Direction {
        match i % 4 {
            0 => Direction::East,
            1 => Direction::North,
            2 => Direction::West,
            _ => Direction::South,
        }
    }

    /// Quarter turn counterclockwise.
    pub fn left(self) -> Direction {
        Direction::from_index(self as u8 + 1)
    }

    /// Quarter turn clockwise.
    pub fn right(self) -> Direction {
        Direction::from_index(self as u8 + 3)
    }

    pub fn opposite(self) -> Direction {
        Direction::from_index(self as u8 + 2)
    }

    pub fn rotate_ccw_by(self, quarters: u8) -> Direction {
        Direction::from_index(self as u8 + quarters % 4)
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::East | Direction::West)
    }

    pub fn letter(self) -> char {
        match self {
            Direction::East => 'E',
            Direction::North => 'N',
            Direction::West => 'W',
            Direction::South => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Direction> {
        match c {
            'E' => Some(Direction::East),
            'N' => Some(Direction::North),
            'W' => Some(Direction::West),
            'S' => Some(Direction::South),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotate_left_four_times_is_identity() {
        for d in Direction::ALL {
            assert_eq!(d.left().left().left().left(), d);
            assert_eq!(d.left().right(), d);
        }
    }

    #[test]
    fn left_is_counterclockwise() {
        assert_eq!(Direction::East.left(), Direction::North);
        assert_eq!(Direction::North.left(), Direction::West);
        assert_eq!(Direction::South.left(), Direction::East);
        assert_eq!(Direction::East.right(), Direction::South);
    }

    #[test]
    fn cell_rotation_matches_direction_rotation() {
        for d in Direction::ALL {
            let v = d.vector();
            let rotated = Cell::new(v.0, v.1).rotate_ccw();
            assert_eq!((rotated.x, rotated.y), d.left().vector());
        }
    }

    #[test]
    fn cell_order_is_row_major() {
        let mut cells = vec![Cell::new(1, 0), Cell::new(0, 1), Cell::new(0, 0)];
        cells.sort();
        assert_eq!(cells, vec![Cell::new(0, 0), Cell::new(1, 0), Cell::new(0, 1)]);
    }
}
