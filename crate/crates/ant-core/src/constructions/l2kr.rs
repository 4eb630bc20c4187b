//! The `L^(2k)R` ant family: elementary cycles, almost highways, and the
//! fundamental/harmonic highway constructions; plus the mined `L^(2k+1)R`
//! highway of period `32k + 20`.
//!
//! While every symbol under the ant is below `2k`, the `L^(2k)R` ant turns
//! left and loops around a 2x2 block, incrementing all four cells once per
//! round; a `2k` symbol turns it right and hands it to the next block. Those
//! left cycles are the building blocks of the whole family.

use crate::engine::{step, Configuration};
use crate::geom::{Cell, Direction};
use crate::highway::{extract_candidate, verify_highway, Highway, Provenance};
use crate::montecarlo::{mine, ExperimentSpec};
use crate::pattern::Pattern;
use crate::picture::Picture;
use crate::rule::RuleWord;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("parameter out of range: {0}")]
pub struct ParamError(pub String);

fn require(cond: bool, msg: impl Into<String>) -> Result<(), ParamError> {
    if cond {
        Ok(())
    } else {
        Err(ParamError(msg.into()))
    }
}

/// `L^(2k)R` with alphabet `{0, …, 2k}`.
fn l2kr_rule(k: u32) -> RuleWord {
    RuleWord::l_pow_r(2 * k as usize).expect("k <= 127 keeps the word within 256 symbols")
}

fn check_k(k: u32) -> Result<(), ParamError> {
    require(k >= 1, "k must be at least 1")?;
    require(2 * k < 256, "alphabet 2k+1 exceeds 256 symbols")
}

/// A 2x2 elementary cycle instance: stepping `start` for `steps` yields `end`
/// with the ant back at its starting pose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryCycle {
    pub start: Pattern,
    pub end: Pattern,
    pub position: Cell,
    pub direction: Direction,
    pub steps: u64,
}

/// The 2x2 patterns of the elementary cycle, ant on the `a` cell. The ant
/// loops the block counterclockwise `2k - a` times, reading the corners in
/// the order `a`-cell, then clockwise-adjacent, then diagonal, then the
/// remaining corner, so the lower-left/lower-right/upper-right/upper-left
/// corners hold `a`, `b`, `c`, `d` with the ant entering southwards.
pub fn elementary_cycle_pattern(
    k: u32,
    a: u32,
    b: u32,
    c: u32,
    d: u32,
) -> Result<ElementaryCycle, ParamError> {
    check_k(k)?;
    require(a <= 2 * k, "need a <= 2k")?;
    require(b <= a && c <= a && d <= a, "need a >= b, c, d")?;
    let bump = 2 * k - a;
    let corner = |v: u32| v as u8;
    let start = Pattern::from_cells([
        (Cell::new(0, 0), corner(a)),
        (Cell::new(1, 0), corner(b)),
        (Cell::new(1, 1), corner(c)),
        (Cell::new(0, 1), corner(d)),
    ]);
    let end = Pattern::from_cells([
        (Cell::new(0, 0), corner(2 * k)),
        (Cell::new(1, 0), corner(b + bump)),
        (Cell::new(1, 1), corner(c + bump)),
        (Cell::new(0, 1), corner(d + bump)),
    ]);
    Ok(ElementaryCycle {
        start,
        end,
        position: Cell::ORIGIN,
        direction: Direction::South,
        steps: 4 * bump as u64,
    })
}

/// Trace of the elementary cycle: `a.b.c.d.(a+1).(b+1)...` for `2k - a`
/// rounds, one increment of every corner per round.
pub fn cycle_trace(k: u32, a: u32, b: u32, c: u32, d: u32) -> Result<Vec<u8>, ParamError> {
    check_k(k)?;
    require(a <= 2 * k, "need a <= 2k")?;
    require(b <= a && c <= a && d <= a, "need a >= b, c, d")?;
    let mut out = Vec::with_capacity(4 * (2 * k - a) as usize);
    for j in 0..2 * k - a {
        for v in [a + j, b + j, c + j, d + j] {
            out.push(v as u8);
        }
    }
    Ok(out)
}

/// The trace of one almost highway: three elementary cycles and six single
/// moves, `24k - 8i + 2` symbols in total.
pub fn almost_highway_trace(k: u32, i: u32) -> Result<Vec<u8>, ParamError> {
    check_k(k)?;
    require(i >= 1 && i < 2 * k, "need 0 < i < 2k")?;
    let top = (2 * k) as u8;
    let mut t = cycle_trace(k, 0, 0, 0, 0)?;
    t.push(top);
    t.extend(cycle_trace(k, i, 0, 0, 0)?);
    t.push(top);
    t.extend(cycle_trace(k, i + 1, i - 1, i, 0)?);
    t.extend([top, top, (2 * k - i) as u8, top]);
    debug_assert_eq!(t.len() as u64, 24 * k as u64 - 8 * i as u64 + 2);
    Ok(t)
}

/// The seed picture `C(k, i, n)`: a four-cell head at height `n` (two `i`
/// cells over `i+1`, `i-1`) plus the three print diagonals of symbols `2k`,
/// `2k-1`, `2k-2` grown to length `n`. Ant at `(-n, n)` facing north.
///
/// All three diagonals grow at the head end: the `2k` print pair extends
/// toward `x = -n`, and the `2k-1` / `2k-2` pairs extend from their fixed
/// tip at `x = 2` down to `x = 3 - n`, one pair per head advance. Stepping
/// `C(k, i, n)` for `24k - 8i + 2` steps yields exactly `C(k, 2k-i, n+1)`.
pub fn l2kr_picture(k: u32, i: u32, n: u32) -> Result<Configuration, ParamError> {
    check_k(k)?;
    require(i >= 1 && i < 2 * k, "need 0 < i < 2k")?;
    let n = n as i64;
    let mut picture = Picture::new();
    picture.set(Cell::new(1 - n, n), i as u8);
    picture.set(Cell::new(2 - n, n), i as u8);
    picture.set(Cell::new(1 - n, n - 1), (i + 1) as u8);
    picture.set(Cell::new(2 - n, n - 1), (i - 1) as u8);
    for x in -n..=-1 {
        picture.set(Cell::new(x, -x - 2), (2 * k) as u8);
    }
    for x in 3 - n..=2 {
        picture.set(Cell::new(x, -x + 2), (2 * k - 1) as u8);
        picture.set(Cell::new(x, -x + 1), (2 * k - 2) as u8);
    }
    Ok(Configuration::new(
        picture,
        Cell::new(-n, n),
        Direction::North,
    ))
}

/// One half-step of the `L^(2k)R` highway: `start` maps to `end` in `steps`
/// steps with trace `trace`, moving the head one cell along the diagonal.
#[derive(Clone, Debug)]
pub struct AlmostHighway {
    pub start: Pattern,
    pub end: Pattern,
    pub position: Cell,
    pub direction: Direction,
    pub end_position: Cell,
    pub end_direction: Direction,
    pub steps: u64,
    pub trace: Vec<u8>,
}

/// Build the almost highway for variant `i` and check it by simulation: the
/// seed with head `i` evolves into the seed with head `2k - i`, one diagonal
/// step up-left, in `24k - 8i + 2` steps.
pub fn almost_highway(k: u32, i: u32) -> Result<AlmostHighway, ParamError> {
    check_k(k)?;
    require(i >= 1 && i < 2 * k, "need 0 < i < 2k")?;
    let rule = l2kr_rule(k);
    let steps = 24 * k as u64 - 8 * i as u64 + 2;

    let start_config = l2kr_picture(k, i, 0)?;
    let mut probe = start_config.clone();
    let mut support: BTreeSet<Cell> = BTreeSet::new();
    start_config.picture.for_each_nonzero(|c, _| {
        support.insert(c);
    });
    let mut trace = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        support.insert(probe.position);
        trace.push(probe.picture.get(probe.position));
        step(&rule, &mut probe);
    }
    support.insert(probe.position);

    let expected_end = l2kr_picture(k, 2 * k - i, 1)?;
    assert_eq!(
        (&probe.picture, probe.position, probe.direction),
        (
            &expected_end.picture,
            expected_end.position,
            expected_end.direction
        ),
        "almost highway simulation left the predicted end picture"
    );
    assert_eq!(
        trace,
        almost_highway_trace(k, i)?,
        "almost highway trace mismatch"
    );

    Ok(AlmostHighway {
        start: Pattern::restrict(&start_config.picture, support.iter().copied()),
        end: Pattern::restrict(&probe.picture, support.iter().copied()),
        position: start_config.position,
        direction: start_config.direction,
        end_position: probe.position,
        end_direction: probe.direction,
        steps,
        trace,
    })
}

/// Warm a seed configuration up for `warmup` steps, then extract and verify a
/// highway of period `period`. Construction-time failures mean corrupt
/// family data, so they panic.
fn extract_verified(
    rule: &RuleWord,
    seed: Configuration,
    warmup: u64,
    period: u64,
    provenance: Provenance,
) -> Highway {
    let mut config = seed;
    for _ in 0..warmup {
        step(rule, &mut config);
    }
    let cand = extract_candidate(rule, &config, period)
        .expect("constructed highway must have nonzero drift");
    let highway = Highway {
        rule: rule.clone(),
        pattern: cand.pattern,
        position: cand.position,
        direction: cand.direction,
        period,
        drift: cand.drift,
        trace_cycle: cand.trace,
        provenance,
    };
    if let Err(reject) = verify_highway(&highway) {
        panic!("constructed highway failed verification: {reject}");
    }
    assert!(highway.is_minimal(), "constructed period is not minimal");
    highway
}

/// The fundamental highway of `L^(2k)R`: period `16k + 2`, drift `(-1, 1)`,
/// trace `t(k, k)`.
pub fn fundamental_highway(k: u32) -> Result<Highway, ParamError> {
    check_k(k)?;
    let rule = l2kr_rule(k);
    let period = 16 * k as u64 + 2;
    let seed = l2kr_picture(k, k, 0)?;
    // Two periods of warmup lay down the print diagonals the recurrence
    // window reaches back into.
    let h = extract_verified(
        &rule,
        seed,
        2 * period,
        period,
        Provenance::constructed(format!("l2kr-fundamental-k{k}")),
    );
    assert_eq!(h.drift, (-1, 1));
    assert_eq!(h.trace_cycle, almost_highway_trace(k, k)?);
    Ok(h)
}

/// The `k - 1` harmonic highways of `L^(2k)R`: period `32k + 4`, drift
/// `(-2, 2)`, traces `t(k, i) . t(k, 2k - i)` for `0 < i < k`. Empty for
/// `k = 1`.
pub fn harmonic_highways(k: u32) -> Result<Vec<Highway>, ParamError> {
    check_k(k)?;
    let rule = l2kr_rule(k);
    let period = 32 * k as u64 + 4;
    let mut out = Vec::new();
    for i in 1..k {
        let seed = l2kr_picture(k, i, 0)?;
        let h = extract_verified(
            &rule,
            seed,
            2 * period,
            period,
            Provenance::constructed(format!("l2kr-harmonic-k{k}-i{i}")),
        );
        assert_eq!(h.drift, (-2, 2));
        let mut expected = almost_highway_trace(k, i)?;
        expected.extend(almost_highway_trace(k, 2 * k - i)?);
        assert_eq!(h.trace_cycle, expected);
        out.push(h);
    }
    Ok(out)
}

/// The factor `i+1 . i-1 . i . 0` that occurs in `t(k, i)` and in no other
/// harmonic variant's trace, witnessing pairwise distinctness.
pub fn harmonic_trace_witness(i: u32) -> Vec<u8> {
    vec![(i + 1) as u8, (i - 1) as u8, i as u8, 0]
}

/// The `L^(2k+1)R` highway of period `32k + 20`, found by seeded mining over
/// random perturbations (the family reaches it from almost every start) and
/// then verified. Deterministic for fixed `k`.
pub fn l2k1r_highway(k: u32) -> Result<Highway, ParamError> {
    require(k >= 1, "k must be at least 1")?;
    require(2 * k + 2 <= 256, "alphabet 2k+2 exceeds 256 symbols")?;
    let rule = RuleWord::l_pow_r(2 * k as usize + 1).expect("length checked");
    let period = 32 * k as u64 + 20;
    let spec = ExperimentSpec {
        // The detection window must cover the family's period for every k.
        max_period: period.max(2_048),
        ..ExperimentSpec::new(rule, 4096, 0x1a2b3c4d5e6f)
    };
    let found = mine(&spec, |h| h.period == period, Some(1), 2)
        .expect("spec is valid")
        .highways;
    found
        .into_iter()
        .next()
        .ok_or_else(|| ParamError(format!("mining budget exhausted without a period-{period} hit")))
}
