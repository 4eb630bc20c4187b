//! Forward and backward simulation of a generalised ant on the unbounded grid.
//!
//! One step: read the symbol under the ant, increment it cyclically, turn
//! left or right as the rule word dictates for the symbol read, then move one
//! cell in the new direction. The transition is a bijection, so `unstep`
//! inverts it exactly.

use crate::geom::{Cell, Direction};
use crate::picture::Picture;
use crate::rule::{Letter, RuleWord};
use std::io::Write;

/// Full state of a simulation: picture, ant position, ant direction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Configuration {
    pub picture: Picture,
    pub position: Cell,
    pub direction: Direction,
}

impl Configuration {
    pub fn new(picture: Picture, position: Cell, direction: Direction) -> Self {
        Configuration {
            picture,
            position,
            direction,
        }
    }

    /// All-zero picture with the ant at the origin facing north.
    pub fn white() -> Self {
        Configuration::new(Picture::new(), Cell::ORIGIN, Direction::North)
    }
}

/// Advance one step in place. Trivial rule words are allowed.
pub fn step(rule: &RuleWord, c: &mut Configuration) {
    let max_symbol = (rule.alphabet_size() - 1) as u8;
    let symbol = c.picture.read_increment(c.position, max_symbol);
    c.direction = match rule.turn(symbol) {
        Letter::L => c.direction.left(),
        Letter::R => c.direction.right(),
    };
    c.position = c.position + c.direction.vector();
}

/// Undo one step in place: `unstep(step(c)) == c` for every configuration.
pub fn unstep(rule: &RuleWord, c: &mut Configuration) {
    let max_symbol = (rule.alphabet_size() - 1) as u8;
    let prev_pos = c.position - c.direction.vector();
    let stored = c.picture.get(prev_pos);
    let prev_symbol = if stored == 0 { max_symbol } else { stored - 1 };
    c.picture.set(prev_pos, prev_symbol);
    c.direction = match rule.turn(prev_symbol) {
        // The forward step turned left onto the current direction.
        Letter::L => c.direction.right(),
        Letter::R => c.direction.left(),
    };
    c.position = prev_pos;
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("nonzero cell count {cells} exceeded the configured cap {cap} at step {step}")]
    CellCapExceeded { cells: u64, cap: u64, step: u64 },
    #[error("trace spill write failed: {0}")]
    SpillIo(String),
}

/// Caller-supplied resource limits and trace sizing.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Abort when the picture holds more nonzero cells than this.
    pub max_nonzero_cells: u64,
    /// Trace ring capacity in symbols; rounded up to a power of two.
    pub trace_capacity: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_nonzero_cells: 100_000_000,
            trace_capacity: 1 << 20,
        }
    }
}

/// Default step budget for long probes when the caller gives none.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Ring buffer over the most recent trace symbols, indexed by absolute step.
#[derive(Clone, Debug)]
pub struct TraceRing {
    buf: Vec<u8>,
    mask: u64,
    total: u64,
}

impl TraceRing {
    pub fn new(capacity: usize) -> Self {
        let cap = capacity.next_power_of_two().max(8);
        TraceRing {
            buf: vec![0; cap],
            mask: (cap - 1) as u64,
            total: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, symbol: u8) {
        self.buf[(self.total & self.mask) as usize] = symbol;
        self.total += 1;
    }

    /// Total symbols ever recorded (= steps executed).
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn capacity(&self) -> usize {
        self.buf.len()
    }

    /// Earliest absolute index still held.
    pub fn start(&self) -> u64 {
        self.total.saturating_sub(self.buf.len() as u64)
    }

    /// Symbol at absolute step index `t`; `t` must be in `[start, total)`.
    #[inline]
    pub fn at(&self, t: u64) -> u8 {
        debug_assert!(t >= self.start() && t < self.total);
        self.buf[(t & self.mask) as usize]
    }

    /// Copy the last `len` symbols (oldest first) into a vector.
    pub fn suffix(&self, len: usize) -> Vec<u8> {
        let len = len.min((self.total - self.start()) as usize);
        (self.total - len as u64..self.total)
            .map(|t| self.at(t))
            .collect()
    }
}

/// A simulation run with trace recording and resource limits.
pub struct Simulator {
    rule: RuleWord,
    config: Configuration,
    engine: EngineConfig,
    trace: TraceRing,
    steps: u64,
    max_symbol: u8,
    turn_right: [bool; 256],
    spill: Option<Box<dyn Write + Send>>,
}

impl Simulator {
    pub fn new(rule: RuleWord, config: Configuration, engine: EngineConfig) -> Self {
        let mut turn_right = [false; 256];
        for (s, &l) in rule.letters().iter().enumerate() {
            turn_right[s] = l == Letter::R;
        }
        let trace = TraceRing::new(engine.trace_capacity);
        Simulator {
            max_symbol: (rule.alphabet_size() - 1) as u8,
            rule,
            config,
            engine,
            trace,
            steps: 0,
            turn_right,
            spill: None,
        }
    }

    /// Also append every trace symbol to `sink` (full-trace archival mode).
    pub fn spill_trace_to(&mut self, sink: Box<dyn Write + Send>) {
        self.spill = Some(sink);
    }

    pub fn rule(&self) -> &RuleWord {
        &self.rule
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn into_config(self) -> Configuration {
        self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn trace(&self) -> &TraceRing {
        &self.trace
    }

    /// Run `steps` forward steps, recording the trace.
    pub fn run(&mut self, steps: u64) -> Result<(), EngineError> {
        let cap = self.engine.max_nonzero_cells;
        for _ in 0..steps {
            let c = &mut self.config;
            let symbol = c.picture.read_increment(c.position, self.max_symbol);
            c.direction = if self.turn_right[symbol as usize] {
                c.direction.right()
            } else {
                c.direction.left()
            };
            c.position = c.position + c.direction.vector();
            self.trace.push(symbol);
            if let Some(sink) = &mut self.spill {
                sink.write_all(&[symbol])
                    .map_err(|e| EngineError::SpillIo(e.to_string()))?;
            }
            self.steps += 1;
            if c.picture.nonzero_count() > cap {
                return Err(EngineError::CellCapExceeded {
                    cells: c.picture.nonzero_count(),
                    cap,
                    step: self.steps,
                });
            }
        }
        Ok(())
    }

    /// Undo `steps` steps. The trace ring is not rewound; backward stepping is
    /// meant for reversibility checks, not trace analysis.
    pub fn run_back(&mut self, steps: u64) {
        for _ in 0..steps {
            unstep(&self.rule, &mut self.config);
            self.steps = self.steps.saturating_sub(1);
        }
    }
}

/// Convenience: run `steps` steps from `config` and return the final
/// configuration plus the full trace (so `steps` must fit in memory).
pub fn run_traced(
    rule: &RuleWord,
    config: Configuration,
    steps: u64,
    engine: &EngineConfig,
) -> Result<(Configuration, Vec<u8>), EngineError> {
    let mut cfg = engine.clone();
    cfg.trace_capacity = (steps as usize).next_power_of_two().max(8);
    let mut sim = Simulator::new(rule.clone(), config, cfg);
    sim.run(steps)?;
    let trace = sim.trace.suffix(steps as usize);
    Ok((sim.into_config(), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Direction::*;

    fn rule(s: &str) -> RuleWord {
        s.parse().unwrap()
    }

    #[test]
    fn step_from_white_turns_left_to_west() {
        // LR, all-white, ant at origin facing north: symbol 0 is L, so the
        // ant turns west and the origin cell becomes 1.
        let mut c = Configuration::white();
        step(&rule("LR"), &mut c);
        assert_eq!(c.picture.sorted_cells(), vec![(Cell::ORIGIN, 1)]);
        assert_eq!(c.position, Cell::new(-1, 0));
        assert_eq!(c.direction, West);
    }

    #[test]
    fn step_wraps_symbol_to_zero() {
        // LR over a cell holding 1: symbol 1 is R, right of north is east,
        // and the cell wraps back to 0.
        let mut c = Configuration::white();
        c.picture.set(Cell::ORIGIN, 1);
        step(&rule("LR"), &mut c);
        assert!(c.picture.is_white());
        assert_eq!(c.position, Cell::new(1, 0));
        assert_eq!(c.direction, East);
    }

    #[test]
    fn step_llr_right_of_east_is_south() {
        let mut c = Configuration::white();
        c.picture.set(Cell::ORIGIN, 2);
        c.direction = East;
        step(&rule("LLR"), &mut c);
        assert!(c.picture.is_white(), "2 + 1 mod 3 = 0 removes the entry");
        assert_eq!(c.position, Cell::new(0, -1));
        assert_eq!(c.direction, South);
    }

    #[test]
    fn unstep_inverts_the_first_example() {
        let mut c = Configuration::new(
            Picture::from_cells([(Cell::ORIGIN, 1)]),
            Cell::new(-1, 0),
            West,
        );
        unstep(&rule("LR"), &mut c);
        assert!(c.picture.is_white());
        assert_eq!(c.position, Cell::ORIGIN);
        assert_eq!(c.direction, North);
    }

    #[test]
    fn unstep_of_step_is_identity_on_a_long_run() {
        let w = rule("LR");
        let start = Configuration::white();
        let mut c = start.clone();
        for _ in 0..10_000 {
            step(&w, &mut c);
        }
        assert_ne!(c, start);
        for _ in 0..10_000 {
            unstep(&w, &mut c);
        }
        assert_eq!(c, start);
    }

    #[test]
    fn run_records_trace() {
        let mut sim = Simulator::new(rule("LR"), Configuration::white(), EngineConfig::default());
        sim.run(1).unwrap();
        assert_eq!(sim.trace().suffix(8), vec![0]);
        sim.run(103).unwrap();
        assert_eq!(sim.steps(), 104);
        assert_eq!(sim.trace().total(), 104);
        assert_ne!(sim.config().position, Cell::ORIGIN);
    }

    #[test]
    fn cell_cap_reports_resource_error() {
        let engine = EngineConfig {
            max_nonzero_cells: 4,
            ..EngineConfig::default()
        };
        let mut sim = Simulator::new(rule("LR"), Configuration::white(), engine);
        let err = sim.run(1000).unwrap_err();
        match err {
            EngineError::CellCapExceeded { cap: 4, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn trace_ring_absolute_indexing() {
        let mut ring = TraceRing::new(8);
        for i in 0..20u8 {
            ring.push(i);
        }
        assert_eq!(ring.total(), 20);
        assert_eq!(ring.start(), 12);
        assert_eq!(ring.at(12), 12);
        assert_eq!(ring.at(19), 19);
        assert_eq!(ring.suffix(4), vec![16, 17, 18, 19]);
    }
}
