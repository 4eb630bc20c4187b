//! Finite patterns: symbol assignments on a finite support.
//!
//! Unlike a `Picture`, a pattern distinguishes "symbol 0 inside the support"
//! from "outside the support". The transition function applies to a pattern
//! only while the ant stays on the support.

use crate::geom::{Cell, Direction};
use crate::picture::Picture;
use crate::rule::{Letter, RuleWord};
use std::collections::BTreeMap;

/// A function from a finite set of cells to symbols. `0` values are kept.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Pattern {
    cells: BTreeMap<Cell, u8>,
}

impl Pattern {
    pub fn new() -> Self {
        Pattern::default()
    }

    pub fn from_cells<I: IntoIterator<Item = (Cell, u8)>>(cells: I) -> Self {
        Pattern {
            cells: cells.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.contains_key(&c)
    }

    /// Value at `c`, or `None` when `c` is outside the support.
    pub fn get(&self, c: Cell) -> Option<u8> {
        self.cells.get(&c).copied()
    }

    pub fn set(&mut self, c: Cell, v: u8) {
        self.cells.insert(c, v);
    }

    /// Support cells with values, sorted by `(y, x)` (the map order).
    pub fn iter(&self) -> impl Iterator<Item = (Cell, u8)> + '_ {
        self.cells.iter().map(|(&c, &v)| (c, v))
    }

    pub fn support(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.keys().copied()
    }

    /// Translate every cell by `(dx, dy)`.
    pub fn translate(&self, delta: (i64, i64)) -> Pattern {
        Pattern {
            cells: self.cells.iter().map(|(&c, &v)| (c + delta, v)).collect(),
        }
    }

    /// Rotate a quarter turn counterclockwise about the origin.
    pub fn rotate_ccw(&self) -> Pattern {
        Pattern {
            cells: self
                .cells
                .iter()
                .map(|(&c, &v)| (c.rotate_ccw(), v))
                .collect(),
        }
    }

    /// Restriction of a picture to `support`, keeping 0 values.
    pub fn restrict(picture: &Picture, support: impl IntoIterator<Item = Cell>) -> Pattern {
        Pattern {
            cells: support
                .into_iter()
                .map(|c| (c, picture.get(c)))
                .collect(),
        }
    }

    /// Place the pattern over an all-zero background.
    pub fn to_picture(&self) -> Picture {
        Picture::from_cells(self.iter().filter(|&(_, v)| v != 0))
    }

    /// Largest symbol present, 0 for an empty pattern.
    pub fn max_symbol(&self) -> u8 {
        self.cells.values().copied().max().unwrap_or(0)
    }
}

impl FromIterator<(Cell, u8)> for Pattern {
    fn from_iter<I: IntoIterator<Item = (Cell, u8)>>(iter: I) -> Self {
        Pattern::from_cells(iter)
    }
}

/// The ant left the support (or started outside it).
///
/// `step_index` is the 1-based step whose move landed outside; 0 means the
/// starting position was already outside the support.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("ant left the pattern support at step {step_index} (cell {cell:?})")]
pub struct OutOfSupport {
    pub step_index: u64,
    pub cell: Cell,
}

/// Result of stepping a pattern: the transformed pattern, the final ant pose,
/// and the trace read along the way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternRun {
    pub pattern: Pattern,
    pub position: Cell,
    pub direction: Direction,
    pub trace: Vec<u8>,
}

/// Step the ant over the pattern only, failing the moment it leaves the
/// support. Every position the ant occupies, including the one it lands on
/// after the final step, must lie in the support.
pub fn apply_pattern_steps(
    rule: &RuleWord,
    pattern: &Pattern,
    position: Cell,
    direction: Direction,
    steps: u64,
) -> Result<PatternRun, OutOfSupport> {
    if !pattern.contains(position) {
        return Err(OutOfSupport {
            step_index: 0,
            cell: position,
        });
    }
    let modulus = rule.alphabet_size() as u16;
    let mut cells = pattern.cells.clone();
    let mut pos = position;
    let mut dir = direction;
    let mut trace = Vec::with_capacity(steps.min(1 << 20) as usize);
    for i in 1..=steps {
        let slot = cells.get_mut(&pos).expect("position stays in support");
        let symbol = *slot;
        *slot = ((symbol as u16 + 1) % modulus) as u8;
        trace.push(symbol);
        dir = match rule.turn(symbol) {
            Letter::L => dir.left(),
            Letter::R => dir.right(),
        };
        pos = pos + dir.vector();
        if !cells.contains_key(&pos) {
            return Err(OutOfSupport {
                step_index: i,
                cell: pos,
            });
        }
    }
    Ok(PatternRun {
        pattern: Pattern { cells },
        position: pos,
        direction: dir,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_support_exits_at_step_one() {
        let p = Pattern::from_cells([(Cell::ORIGIN, 0)]);
        let rule: RuleWord = "LR".parse().unwrap();
        let err =
            apply_pattern_steps(&rule, &p, Cell::ORIGIN, Direction::North, 1).unwrap_err();
        assert_eq!(err.step_index, 1);
    }

    #[test]
    fn starting_outside_support_is_step_zero() {
        let p = Pattern::from_cells([(Cell::new(5, 5), 0)]);
        let rule: RuleWord = "LR".parse().unwrap();
        let err =
            apply_pattern_steps(&rule, &p, Cell::ORIGIN, Direction::North, 1).unwrap_err();
        assert_eq!(err.step_index, 0);
    }

    #[test]
    fn pattern_keeps_explicit_zeros() {
        let p = Pattern::from_cells([(Cell::ORIGIN, 0), (Cell::new(1, 0), 2)]);
        assert_eq!(p.get(Cell::ORIGIN), Some(0));
        assert_eq!(p.get(Cell::new(0, 1)), None);
        assert_eq!(p.to_picture().nonzero_count(), 1);
    }

    #[test]
    fn pattern_steps_match_full_simulation() {
        use crate::engine::{step, Configuration};
        let rule: RuleWord = "LLR".parse().unwrap();
        // A 4x4 block of zeros is enough for a couple of left cycles.
        let support = (0..4).flat_map(|y| (0..4).map(move |x| (Cell::new(x, y), 0)));
        let p = Pattern::from_cells(support);
        let run =
            apply_pattern_steps(&rule, &p, Cell::new(1, 1), Direction::South, 8).unwrap();

        let mut full = Configuration::new(p.to_picture(), Cell::new(1, 1), Direction::South);
        for _ in 0..8 {
            step(&rule, &mut full);
        }
        assert_eq!(run.position, full.position);
        assert_eq!(run.direction, full.direction);
        for (c, v) in run.pattern.iter() {
            assert_eq!(full.picture.get(c), v);
        }
    }
}
