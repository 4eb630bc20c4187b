//! The `LLRLRL` ant's infinite highway family: one highway of period
//! `220 + 24n` for every `n >= 0`, assembled from three widgets — a main
//! block, a corridor link repeated `n` times, and a bounce-back block.
//!
//! The widget cell data ships as checked-in fixtures. The authority for that
//! data is `recover_widgets_by_mining`: it mines highways of consecutive
//! periods from random starts, isolates the corridor link as the unique slab
//! whose deletion and duplication move the period down and up by 24, and
//! cross-checks the reassembled family against independently mined instances.

use crate::antpat::AntpatDoc;
use crate::engine::{step, Configuration};
use crate::geom::{Cell, Direction};
use crate::highway::{canonicalise, extract_candidate, verify_highway, Highway, Provenance};
use crate::montecarlo::{mine, ExperimentSpec};
use crate::pattern::Pattern;
use crate::picture::Picture;
use crate::rule::RuleWord;
use serde::{Deserialize, Serialize};

pub const RULE: &str = "LLRLRL";
pub const BASE_PERIOD: u64 = 220;
pub const PERIOD_STEP: u64 = 24;
pub const DRIFT: (i64, i64) = (-2, -2);

pub fn family_period(n: u32) -> u64 {
    BASE_PERIOD + PERIOD_STEP * n as u64
}

fn rule() -> RuleWord {
    RULE.parse().expect("constant rule word parses")
}

#[derive(Debug, thiserror::Error)]
pub enum WidgetError {
    #[error("widget fixtures are corrupt: {0}")]
    Fixture(String),
    #[error("mining budget exhausted before periods {0:?} were all found")]
    MiningBudget(Vec<u64>),
    #[error("recovery failed: {0}")]
    RecoveryFailed(String),
}

/// A named pattern with the pose at which the ant enters it and the step
/// budget it spends inside on the corresponding stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Widget {
    pub name: String,
    /// Nonzero cells only; the zero background is implicit.
    pub pattern: Pattern,
    pub entry: Option<(Cell, Direction)>,
    pub budget: Option<u64>,
}

/// The recovered widget data plus the corridor geometry needed to assemble
/// `c_n = M1 . L1^n . B1`.
///
/// Cells are banded along `axis`: band index `floor((dot(cell, axis) - q0) /
/// dot(axis, axis))`. The main widget occupies bands below 0, link copy `j`
/// occupies band `j`, and the bounce widget (stored in its `n = 0` place)
/// occupies the bands at and above `n`. `axis` is perpendicular to the drift,
/// so band indices are stable across whole periods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidgetSet {
    pub m1: Widget,
    pub l1: Widget,
    pub b1: Widget,
    pub m2: Widget,
    pub l2: Widget,
    pub l2_last: Widget,
    pub l3: Widget,
    pub l4: Widget,
    pub l4_last: Widget,
    pub b2: Widget,
    pub axis: (i64, i64),
    pub q0: i64,
    /// Ant pose starting a period on `c_n` (inside the main widget).
    pub start: (Cell, Direction),
}

fn dot(c: Cell, v: (i64, i64)) -> i64 {
    c.x * v.0 + c.y * v.1
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

impl WidgetSet {
    pub fn band(&self, c: Cell) -> i64 {
        floor_div(dot(c, self.axis) - self.q0, dot(Cell::new(self.axis.0, self.axis.1), self.axis))
    }

    /// Assemble the start configuration `c_n`: main widget, `n` link copies,
    /// bounce widget shifted `n` bands out.
    pub fn assemble(&self, n: u32) -> Configuration {
        let mut picture = Picture::new();
        for (c, v) in self.m1.pattern.iter() {
            picture.set(c, v);
        }
        for j in 0..n as i64 {
            let delta = (self.axis.0 * j, self.axis.1 * j);
            for (c, v) in self.l1.pattern.iter() {
                picture.set(c + delta, v);
            }
        }
        let delta = (self.axis.0 * n as i64, self.axis.1 * n as i64);
        for (c, v) in self.b1.pattern.iter() {
            picture.set(c + delta, v);
        }
        Configuration::new(picture, self.start.0, self.start.1)
    }
}

/// Region of the corridor a cell (or the ant) is in at some instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Main,
    Link(i64),
    Bounce,
}

/// Run one period over `c_n` and label every step by the region the ant is
/// in, run-length encoded. Raw band occupancy; `observed_stage_budgets` is
/// the boundary-tolerant reading of the pass budgets.
pub fn stage_segmentation(ws: &WidgetSet, n: u32) -> Vec<(Stage, u64)> {
    let rule = rule();
    let mut config = ws.assemble(n);
    let period = family_period(n);
    let mut out: Vec<(Stage, u64)> = Vec::new();
    for _ in 0..period {
        step(&rule, &mut config);
        let band = ws.band(config.position);
        let stage = if band < 0 {
            Stage::Main
        } else if band >= n as i64 {
            Stage::Bounce
        } else {
            Stage::Link(band)
        };
        match out.last_mut() {
            Some((s, count)) if *s == stage => *count += 1,
            _ => out.push((stage, 1)),
        }
    }
    out
}

/// Build the period-`220 + 24n` highway from the widget fixtures: assemble
/// `c_n`, warm up two periods to lay the prints, then extract and verify.
/// A verification failure means mistranscribed widget data and panics.
pub fn llrlrl_highway(n: u32) -> Result<Highway, WidgetError> {
    let ws = recover_widgets()?;
    Ok(highway_from_widgets(&ws, n))
}

fn highway_from_widgets(ws: &WidgetSet, n: u32) -> Highway {
    let rule = rule();
    let period = family_period(n);
    let mut config = ws.assemble(n);
    for _ in 0..2 * period {
        step(&rule, &mut config);
    }
    let cand = extract_candidate(&rule, &config, period)
        .expect("assembled highway must drift");
    let highway = Highway {
        rule,
        pattern: cand.pattern,
        position: cand.position,
        direction: cand.direction,
        period,
        drift: cand.drift,
        trace_cycle: cand.trace,
        provenance: Provenance::constructed(format!("llrlrl-n{n}")),
    };
    if let Err(reject) = verify_highway(&highway) {
        panic!("assembled LLRLRL highway (n = {n}) failed verification: {reject}");
    }
    assert_eq!(
        highway.drift, DRIFT,
        "assembled LLRLRL highway has the wrong drift"
    );
    assert!(highway.is_minimal(), "assembled period is not minimal");
    highway
}

// --- fixture loading ----------------------------------------------------------

const FIXTURE_MANIFEST: &str = include_str!("../../fixtures/llrlrl_widgets.json");

/// Checked-in widget cell data, one antpat document per widget, produced by
/// `recover_widgets_by_mining` and regenerated whenever recovery changes.
const FIXTURE_FILES: [(&str, &str); 10] = [
    ("M1.antpat", include_str!("../../fixtures/llrlrl/M1.antpat")),
    ("L1.antpat", include_str!("../../fixtures/llrlrl/L1.antpat")),
    ("B1.antpat", include_str!("../../fixtures/llrlrl/B1.antpat")),
    ("M2.antpat", include_str!("../../fixtures/llrlrl/M2.antpat")),
    ("L2.antpat", include_str!("../../fixtures/llrlrl/L2.antpat")),
    ("L2p.antpat", include_str!("../../fixtures/llrlrl/L2p.antpat")),
    ("L3.antpat", include_str!("../../fixtures/llrlrl/L3.antpat")),
    ("L4.antpat", include_str!("../../fixtures/llrlrl/L4.antpat")),
    ("L4p.antpat", include_str!("../../fixtures/llrlrl/L4p.antpat")),
    ("B2.antpat", include_str!("../../fixtures/llrlrl/B2.antpat")),
];

#[derive(Serialize, Deserialize)]
struct ManifestWidget {
    name: String,
    file: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    budget: Option<u64>,
    /// Whether the antpat's ant line is a real entry pose.
    #[serde(default)]
    has_entry: bool,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    rule: String,
    axis: [i64; 2],
    q0: i64,
    start: ManifestPose,
    widgets: Vec<ManifestWidget>,
}

#[derive(Serialize, Deserialize)]
struct ManifestPose {
    x: i64,
    y: i64,
    dir: char,
}

fn fixture_widget(manifest: &Manifest, name: &str) -> Result<Widget, WidgetError> {
    let entry = manifest
        .widgets
        .iter()
        .find(|w| w.name == name)
        .ok_or_else(|| WidgetError::Fixture(format!("widget {name} missing from manifest")))?;
    let text = FIXTURE_FILES
        .iter()
        .find(|(file, _)| *file == entry.file)
        .map(|(_, text)| *text)
        .ok_or_else(|| WidgetError::Fixture(format!("no fixture file {}", entry.file)))?;
    let doc = AntpatDoc::parse(text)
        .map_err(|e| WidgetError::Fixture(format!("widget {name}: {e}")))?;
    if doc.rule.to_string() != manifest.rule {
        return Err(WidgetError::Fixture(format!(
            "widget {name} rule {} does not match manifest rule {}",
            doc.rule, manifest.rule
        )));
    }
    Ok(Widget {
        name: name.to_string(),
        pattern: doc.to_pattern(),
        entry: entry.has_entry.then_some((doc.position, doc.direction)),
        budget: entry.budget,
    })
}

/// Load the widget set from the checked-in fixtures.
pub fn recover_widgets() -> Result<WidgetSet, WidgetError> {
    let manifest: Manifest = serde_json::from_str(FIXTURE_MANIFEST)
        .map_err(|e| WidgetError::Fixture(e.to_string()))?;
    let dir = Direction::from_letter(manifest.start.dir)
        .ok_or_else(|| WidgetError::Fixture("bad start direction".into()))?;
    Ok(WidgetSet {
        m1: fixture_widget(&manifest, "M1")?,
        l1: fixture_widget(&manifest, "L1")?,
        b1: fixture_widget(&manifest, "B1")?,
        m2: fixture_widget(&manifest, "M2")?,
        l2: fixture_widget(&manifest, "L2")?,
        l2_last: fixture_widget(&manifest, "L2'")?,
        l3: fixture_widget(&manifest, "L3")?,
        l4: fixture_widget(&manifest, "L4")?,
        l4_last: fixture_widget(&manifest, "L4'")?,
        b2: fixture_widget(&manifest, "B2")?,
        axis: (manifest.axis[0], manifest.axis[1]),
        q0: manifest.q0,
        start: (Cell::new(manifest.start.x, manifest.start.y), dir),
    })
}

// --- mining-based recovery (the fixture authority) -----------------------------

/// Rotate a highway so its drift matches the family convention.
fn orient_to_drift(mut h: Highway, drift: (i64, i64)) -> Highway {
    for _ in 0..4 {
        if h.drift == drift {
            return h;
        }
        h = h.rotate_ccw();
    }
    panic!("no rotation reaches drift {drift:?}");
}

/// Edit the corridor at `cut`: `insert < 0` deletes that many slabs and
/// pulls the far side back in, `insert > 0` replicates the first slab and
/// pushes the far side out. `cut` and slabs are measured in projection units
/// along `axis`.
fn edit_slabs(
    picture: &Picture,
    pose: (Cell, Direction),
    axis: (i64, i64),
    cut: i64,
    insert: i64,
) -> Option<Configuration> {
    let norm = axis.0 * axis.0 + axis.1 * axis.1;
    let band_of = |c: Cell| floor_div(dot(c, axis) - cut, norm);
    if band_of(pose.0) >= 0 {
        // The ant must stay on the near side of the edit.
        return None;
    }
    let mut out = Picture::new();
    let mut ok = true;
    picture.for_each_nonzero(|c, v| {
        let band = band_of(c);
        if band < 0 {
            out.set(c, v);
        } else if insert >= 0 {
            // Shift the far side out and replicate the first slab.
            let shifted = c + (axis.0 * insert, axis.1 * insert);
            if out.get(shifted) != 0 && out.get(shifted) != v {
                ok = false;
            }
            out.set(shifted, v);
            if band == 0 {
                for j in 0..insert {
                    let copy = c + (axis.0 * j, axis.1 * j);
                    if out.get(copy) != 0 && out.get(copy) != v {
                        ok = false;
                    }
                    out.set(copy, v);
                }
            }
        } else {
            // Delete the first `-insert` slabs, pull the rest back in.
            let del = -insert;
            if band < del {
                return;
            }
            let shifted = c - (axis.0 * del, axis.1 * del);
            if out.get(shifted) != 0 && out.get(shifted) != v {
                ok = false;
            }
            out.set(shifted, v);
        }
    });
    ok.then(|| Configuration::new(out, pose.0, pose.1))
}

/// Extract-and-verify a highway of `period` from `config` after two periods
/// of warmup; `None` when the configuration is not on that highway.
fn verified_at(rule: &RuleWord, config: &Configuration, period: u64) -> Option<Highway> {
    let mut warm = config.clone();
    for _ in 0..2 * period {
        step(rule, &mut warm);
    }
    let cand = extract_candidate(rule, &warm, period).ok()?;
    let highway = Highway {
        rule: rule.clone(),
        pattern: cand.pattern,
        position: cand.position,
        direction: cand.direction,
        period,
        drift: cand.drift,
        trace_cycle: cand.trace,
        provenance: Provenance::constructed("llrlrl-recovery-probe"),
    };
    (highway.drift == DRIFT && verify_highway(&highway).is_ok()).then_some(highway)
}

/// A corridor generator: a base configuration whose slabs at `cut` can be
/// deleted and replicated along `axis` to move through the whole family.
struct Generator {
    base: Configuration,
    base_n: u32,
    axis: (i64, i64),
    cut: i64,
}

impl Generator {
    fn configuration(&self, n: u32) -> Option<Configuration> {
        let insert = n as i64 - self.base_n as i64;
        edit_slabs(
            &self.base.picture,
            (self.base.position, self.base.direction),
            self.axis,
            self.cut,
            insert,
        )
    }
}

/// Search one mined instance for the corridor geometry: a phase, axis and cut
/// where deleting one slab verifies one period down and inserting one slab
/// verifies one period up.
fn find_generator(rule: &RuleWord, mined: &Highway, n_base: u32) -> Option<Generator> {
    let axes = [
        (2i64, 0i64),
        (-2, 0),
        (0, 2),
        (0, -2),
        (2, -2),
        (-2, 2),
        (2, 2),
        (-2, -2),
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, -1),
        (-1, 1),
        (1, 1),
        (-1, -1),
    ];
    let period = mined.period;
    let mut config = mined.to_configuration();
    for _phase in 0..period {
        for axis in axes {
            let norm = axis.0 * axis.0 + axis.1 * axis.1;
            let (lo, hi) = proj_range(&config.picture, axis);
            // Slab boundaries can sit at any projection offset, so scan them
            // all; verification rejects misaligned cuts.
            for cut in lo..=(hi + 1 - norm) {
                let candidate = Generator {
                    base: config.clone(),
                    base_n: n_base,
                    axis,
                    cut,
                };
                let down = candidate
                    .configuration(n_base - 1)
                    .and_then(|c| verified_at(rule, &c, period - PERIOD_STEP));
                if down.is_some() {
                    let up = candidate
                        .configuration(n_base + 1)
                        .and_then(|c| verified_at(rule, &c, period + PERIOD_STEP));
                    if up.is_some() {
                        return Some(candidate);
                    }
                }
            }
        }
        step(rule, &mut config);
    }
    None
}

fn proj_range(picture: &Picture, axis: (i64, i64)) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    picture.for_each_nonzero(|c, _| {
        let q = dot(c, axis);
        lo = lo.min(q);
        hi = hi.max(q);
    });
    (lo, hi)
}

/// Mine the family from random starts and rebuild the widget set from the
/// recovered corridor generator. The reassembled family must verify for
/// `n = 0..=8` and reproduce an independently mined neighbour instance, else
/// the mined instances are inconsistent and recovery fails.
pub fn recover_widgets_by_mining(seed: u64, budget: u64) -> Result<WidgetSet, WidgetError> {
    let rule = rule();
    let targets = [family_period(0), family_period(1)];
    let spec = ExperimentSpec {
        runs: budget,
        ..ExperimentSpec::new(rule.clone(), budget, seed)
    };
    let mined = mine(&spec, |h| targets.contains(&h.period), Some(targets.len()), 2)
        .map_err(|e| WidgetError::RecoveryFailed(e.to_string()))?
        .highways;
    let take = |p: u64| -> Result<Highway, WidgetError> {
        mined
            .iter()
            .find(|h| h.period == p)
            .cloned()
            .map(|h| orient_to_drift(h, DRIFT))
            .ok_or_else(|| WidgetError::MiningBudget(targets.to_vec()))
    };
    let h220 = take(family_period(0))?;
    let h244 = take(family_period(1))?;

    let generator = find_generator(&rule, &h244, 1).ok_or_else(|| {
        WidgetError::RecoveryFailed("no slab edit of the period-244 instance works".into())
    })?;

    widgets_from_generator(&rule, &generator, Some(&h220))
}

/// Cut the named widgets out of a working generator and validate the family.
fn widgets_from_generator(
    rule: &RuleWord,
    generator: &Generator,
    cross_check: Option<&Highway>,
) -> Result<WidgetSet, WidgetError> {
    // The family must verify well past the mined instances.
    let mut verified: Vec<Highway> = Vec::new();
    for n in 0..=8u32 {
        let config = generator.configuration(n).ok_or_else(|| {
            WidgetError::RecoveryFailed(format!("generator cannot produce n = {n}"))
        })?;
        let h = verified_at(rule, &config, family_period(n)).ok_or_else(|| {
            WidgetError::RecoveryFailed(format!("generator instance n = {n} does not verify"))
        })?;
        verified.push(h);
    }
    if let Some(other) = cross_check {
        let ours = canonicalise(&verified[0]);
        let theirs = canonicalise(other);
        if ours.trace_cycle != theirs.trace_cycle || ours.pattern != theirs.pattern {
            return Err(WidgetError::RecoveryFailed(
                "independently mined base instance disagrees with the reassembled one".into(),
            ));
        }
    }
    let ws = named_widgets(rule, generator)?;
    for n in 0..=8u32 {
        if verified_at(rule, &ws.assemble(n), family_period(n)).is_none() {
            return Err(WidgetError::RecoveryFailed(format!(
                "widget assembly for n = {n} does not verify"
            )));
        }
    }
    Ok(ws)
}

/// Stage budgets stated by the family's construction: steps spent inside
/// each widget on its stage.
pub const BUDGET_M1: u64 = 84;
pub const BUDGET_L1: u64 = 12;
pub const BUDGET_B1: u64 = 4;
pub const BUDGET_L2: u64 = 4;
pub const BUDGET_M2: u64 = 100;
pub const BUDGET_L3: u64 = 4;
pub const BUDGET_B2: u64 = 30;
pub const BUDGET_L4: u64 = 4;

/// One period decomposed into the four corridor passes: the slow outbound
/// sweep (12 steps per link), the first rebound (4 per link), the fast
/// outbound sweep (4 per link), and the second rebound (4 per link).
#[derive(Clone, Debug, PartialEq, Eq)]
struct PassDecomposition {
    /// Pose after each step over one period, starting at the period anchor.
    poses: Vec<(Cell, Direction)>,
    /// First-entry step (1-based) into each link band on the slow sweep.
    slow_entries: Vec<usize>,
    /// First-entry steps of the fast outbound sweep.
    fast_entries: Vec<usize>,
    /// First-entry steps (descending bands) of the two rebounds.
    rebound1_entries: Vec<usize>,
    rebound2_entries: Vec<usize>,
    /// 1-based step at which each bounce-side visit begins.
    bounce1_start: usize,
    bounce2_start: usize,
}

/// Walk one period from `config` and split it into the four corridor passes.
///
/// After the first rebound the bounce widget absorbs the adjacent link
/// column, so the second half of the period runs on a link lattice shifted
/// half a slab toward the main widget; the second rebound hands the column
/// back.
///
/// Returns `None` when the walk does not have the expected
/// main/out/back/out/back shape against this band origin, or when the
/// traversal times differ from the stage budgets (12 steps per link on the
/// first pass, 4 on the other three) on the unambiguous mid-corridor bands.
fn decompose_passes(
    rule: &RuleWord,
    config: &Configuration,
    axis: (i64, i64),
    q0: i64,
    n: u32,
    period: u64,
) -> Option<PassDecomposition> {
    let norm = axis.0 * axis.0 + axis.1 * axis.1;
    let half = norm / 2;
    let n = n as i64;
    let mut probe = config.clone();
    let mut lanes = Vec::with_capacity(period as usize);
    let mut shifted = Vec::with_capacity(period as usize);
    let mut poses = Vec::with_capacity(period as usize);
    for _ in 0..period {
        step(rule, &mut probe);
        poses.push((probe.position, probe.direction));
        let q = dot(probe.position, axis) - q0;
        lanes.push(floor_div(q, norm));
        shifted.push(floor_div(q + half, norm));
    }
    // The anchor requires 84 main-side steps with the slow sweep entering
    // the corridor at step 85 (indices below are 0-based into `lanes`).
    if lanes[..84].iter().any(|&b| b >= 0) || lanes[84] != 0 {
        return None;
    }

    // First entry into each band within a window, ascending or descending.
    let entries = |window: std::ops::Range<usize>,
                   bands: Vec<i64>,
                   lattice: &[i64]|
     -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(bands.len());
        let mut from = window.start;
        for band in bands {
            let i = (from..window.end).find(|&i| lattice[i] == band)?;
            out.push(i + 1);
            from = i;
        }
        Some(out)
    };
    let len = lanes.len();
    let ascending: Vec<i64> = (0..n).collect();
    let descending: Vec<i64> = (0..n).rev().collect();
    let descending_inner: Vec<i64> = (0..n - 1).rev().collect();

    let first_b = lanes.iter().position(|&b| b >= n)?;
    let slow_entries = entries(84..first_b + 1, ascending.clone(), &lanes)?;
    let back_main1 = lanes[first_b..].iter().position(|&b| b < 0)? + first_b;
    let last_b1 = (0..back_main1).rev().find(|&i| lanes[i] >= n)?;
    let rebound1_entries = entries(last_b1..back_main1 + 1, descending, &lanes)?;

    // Wait until the ant is on the main side of the shifted lattice as well,
    // so the rebound tail is not mistaken for the fast sweep.
    let deep_main = shifted[back_main1..].iter().position(|&b| b < 0)? + back_main1;
    let corridor2 = shifted[deep_main..].iter().position(|&b| b >= 0)? + deep_main;
    let fast_entries = entries(corridor2..len, ascending, &shifted)?;
    let bounce2_start = fast_entries[n as usize - 1] + BUDGET_L3 as usize;
    let rebound2_entries = entries(bounce2_start - 1..len, descending_inner, &shifted)?;

    // Outbound sweeps are unambiguous on every link-to-link interval; on the
    // rebounds the first entry happens amid the bounce, so skip that pair.
    let paced = |entries: &[usize], budget: u64| -> bool {
        entries.windows(2).all(|w| (w[1] - w[0]) as u64 == budget)
    };
    if !(paced(&slow_entries, BUDGET_L1)
        && paced(&fast_entries, BUDGET_L3)
        && paced(&rebound1_entries[1..], BUDGET_L2)
        && paced(&rebound2_entries[1..], BUDGET_L4))
    {
        return None;
    }
    Some(PassDecomposition {
        poses,
        slow_entries,
        fast_entries,
        rebound1_entries,
        rebound2_entries,
        bounce1_start: first_b + 1,
        bounce2_start,
    })
}

/// Locate the period anchor (84 main-side steps, then the slow sweep with 12
/// steps per link band) and cut out every named widget with its entry pose.
fn named_widgets(rule: &RuleWord, generator: &Generator) -> Result<WidgetSet, WidgetError> {
    let n = 8u32;
    let period = family_period(n);
    let config = generator.configuration(n).ok_or_else(|| {
        WidgetError::RecoveryFailed("generator cannot produce the extraction instance".into())
    })?;
    let h = verified_at(rule, &config, period).ok_or_else(|| {
        WidgetError::RecoveryFailed("extraction instance does not verify".into())
    })?;
    let axis = generator.axis;
    let norm = axis.0 * axis.0 + axis.1 * axis.1;

    let mut anchor = h.to_configuration();
    for _ in 0..period {
        let mut probe = anchor.clone();
        let mut path = Vec::with_capacity(85);
        for _ in 0..=84 {
            step(rule, &mut probe);
            path.push(probe.position);
        }
        let main_max = path[..84].iter().map(|&c| dot(c, axis)).max().unwrap();
        let entry = dot(path[84], axis);
        for q0 in (main_max + 1)..=entry.min(main_max + norm) {
            if entry - q0 >= norm {
                continue;
            }
            if let Some(d) = decompose_passes(rule, &anchor, axis, q0, n, period) {
                return extract_named(rule, &anchor, &d, axis, q0, n);
            }
        }
        step(rule, &mut anchor);
    }
    Err(WidgetError::RecoveryFailed(
        "no phase matches the stage budgets".into(),
    ))
}

/// Cut the ten named widgets out of an anchored period.
fn extract_named(
    rule: &RuleWord,
    anchor: &Configuration,
    d: &PassDecomposition,
    axis: (i64, i64),
    q0: i64,
    n: u32,
) -> Result<WidgetSet, WidgetError> {
    let norm = axis.0 * axis.0 + axis.1 * axis.1;
    let band_of = |c: Cell| floor_div(dot(c, axis) - q0, norm);
    // Link lattice of the second half-period, half a slab toward the main
    // widget (the bounce widget owns the donated column there).
    let band_shifted = |c: Cell| floor_div(dot(c, axis) - q0 + norm / 2, norm);
    let shift_bands = |p: &Pattern, bands: i64| -> Pattern {
        p.translate((-axis.0 * bands, -axis.1 * bands))
    };
    // Region cut of the nonzero cells at a given phase (0 = anchor).
    let at_phase = |phase: usize| -> Configuration {
        let mut c = anchor.clone();
        for _ in 0..phase {
            step(rule, &mut c);
        }
        c
    };
    // The widgets are the active structure: cells the ant touches within one
    // period. Older print cells lie underneath the corridor and are not part
    // of any widget.
    let active = |config: &Configuration| -> std::collections::HashSet<Cell> {
        let mut probe = config.clone();
        let mut cells = std::collections::HashSet::new();
        cells.insert(probe.position);
        for _ in 0..d.poses.len() {
            step(rule, &mut probe);
            cells.insert(probe.position);
        }
        cells
    };
    let cut_by = |config: &Configuration,
                  lattice: &dyn Fn(Cell) -> i64,
                  pick: &dyn Fn(i64) -> bool|
     -> Pattern {
        let live = active(config);
        let mut cells = Vec::new();
        config.picture.for_each_nonzero(|c, v| {
            if live.contains(&c) && pick(lattice(c)) {
                cells.push((c, v));
            }
        });
        Pattern::from_cells(cells)
    };
    let cut = |config: &Configuration, pick: &dyn Fn(i64) -> bool| -> Pattern {
        cut_by(config, &band_of, pick)
    };
    let cut_shifted = |config: &Configuration, pick: &dyn Fn(i64) -> bool| -> Pattern {
        cut_by(config, &band_shifted, pick)
    };
    // Poses are translated into the stored widget's frame: widgets cut from
    // band `j` (or from the bounce side at `n` bands out) are stored at their
    // band-0 / n-0 place.
    let pose_at = |step_1based: usize, bands_back: i64| {
        let (c, dir) = d.poses[step_1based - 1];
        (c - (axis.0 * bands_back, axis.1 * bands_back), dir)
    };

    let n_i = n as i64;
    let widget = |name: &str, pattern: Pattern, entry: Option<(Cell, Direction)>, budget: u64| {
        Widget {
            name: name.to_string(),
            pattern,
            entry,
            budget: Some(budget),
        }
    };

    // Start stage: the anchored configuration is M1 . L1^n . B1.
    let start_cfg = anchor.clone();
    let band1_ref = shift_bands(&cut(&start_cfg, &|b| b == 1), 1);
    for j in 0..n_i {
        let translated = shift_bands(&cut(&start_cfg, &|b| b == j), j);
        if translated != band1_ref {
            return Err(WidgetError::RecoveryFailed(format!(
                "link band {j} is not a translate of its neighbours"
            )));
        }
    }
    let m1 = widget("M1", cut(&start_cfg, &|b| b < 0), Some(pose_at(1, 0)), BUDGET_M1);
    let l1 = widget(
        "L1",
        shift_bands(&cut(&start_cfg, &|b| b == 0), 0),
        Some(pose_at(d.slow_entries[0], 0)),
        BUDGET_L1,
    );
    let b1 = widget(
        "B1",
        shift_bands(&cut(&start_cfg, &|b| b >= n_i), n_i),
        Some(pose_at(d.bounce1_start, n_i)),
        BUDGET_B1,
    );

    // Rebound 1: the corridor now holds L2 copies; the one adjacent to the
    // bounce widget differs slightly.
    let rb1_cfg = at_phase(d.rebound1_entries[0] - 1);
    let l2 = widget(
        "L2",
        shift_bands(&cut(&rb1_cfg, &|b| b == 0), 0),
        None,
        BUDGET_L2,
    );
    let l2_last = widget(
        "L2'",
        shift_bands(&cut(&rb1_cfg, &|b| b == n_i - 1), n_i - 1),
        Some(pose_at(d.rebound1_entries[0], n_i - 1)),
        BUDGET_L2,
    );

    // New start: M2 . L3^n . B2 at the fast sweep, on the shifted lattice.
    let ns_cfg = at_phase(d.fast_entries[0] - 1);
    let m2 = widget("M2", cut_shifted(&ns_cfg, &|b| b < 0), None, BUDGET_M2);
    let l3 = widget(
        "L3",
        shift_bands(&cut_shifted(&ns_cfg, &|b| b == 0), 0),
        Some(pose_at(d.fast_entries[0], 0)),
        BUDGET_L3,
    );
    let b2 = widget(
        "B2",
        shift_bands(&cut_shifted(&ns_cfg, &|b| b >= n_i), n_i),
        Some(pose_at(d.bounce2_start, n_i)),
        BUDGET_B2,
    );

    // Rebound 2: the corridor holds L4 copies and hands back to L1s.
    let rb2_cfg = at_phase(d.rebound2_entries[0] - 1);
    let l4 = widget(
        "L4",
        shift_bands(&cut_shifted(&rb2_cfg, &|b| b == 0), 0),
        None,
        BUDGET_L4,
    );
    let l4_last = widget(
        "L4'",
        shift_bands(&cut_shifted(&rb2_cfg, &|b| b == n_i - 1), n_i - 1),
        Some(pose_at(d.rebound2_entries[0], n_i - 1)),
        BUDGET_L4,
    );

    // Mid-corridor link bands must be translates of each other at each stage.
    let lattices: [(&Configuration, bool, bool, &str); 3] = [
        (&rb1_cfg, false, true, "rebound-1 links"),
        (&ns_cfg, true, false, "fast-sweep links"),
        (&rb2_cfg, true, true, "rebound-2 links"),
    ];
    for (cfg, use_shifted, last_differs, what) in lattices {
        let hi = if last_differs { n_i - 1 } else { n_i };
        let slab = |j: i64| -> Pattern {
            let p = if use_shifted {
                cut_shifted(cfg, &|b| b == j)
            } else {
                cut(cfg, &|b| b == j)
            };
            shift_bands(&p, j)
        };
        let reference = slab(0);
        for j in 1..hi {
            if slab(j) != reference {
                return Err(WidgetError::RecoveryFailed(format!(
                    "{what}: band {j} is not a translate of band 0"
                )));
            }
        }
    }

    Ok(WidgetSet {
        m1,
        l1,
        b1,
        m2,
        l2,
        l2_last,
        l3,
        l4,
        l4_last,
        b2,
        axis,
        q0,
        start: (anchor.position, anchor.direction),
    })
}

/// The stage budgets as observed on an assembled instance: the main-widget
/// prefix and the per-link traversal times of the four corridor passes.
/// `None` when the instance does not decompose (mistranscribed widgets).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageBudgets {
    pub main_prefix: u64,
    pub slow_per_link: u64,
    pub rebound1_per_link: u64,
    pub fast_per_link: u64,
    pub rebound2_per_link: u64,
}

pub fn observed_stage_budgets(ws: &WidgetSet, n: u32) -> Option<StageBudgets> {
    // On the rebounds the first link entry happens amid the bounce, so the
    // clean gap needs a third entry.
    assert!(n >= 4, "per-link pacing needs at least four links");
    let rule = rule();
    let config = ws.assemble(n);
    let d = decompose_passes(&rule, &config, ws.axis, ws.q0, n, family_period(n))?;
    Some(StageBudgets {
        main_prefix: (d.slow_entries[0] - 1) as u64,
        slow_per_link: (d.slow_entries[1] - d.slow_entries[0]) as u64,
        rebound1_per_link: (d.rebound1_entries[2] - d.rebound1_entries[1]) as u64,
        fast_per_link: (d.fast_entries[1] - d.fast_entries[0]) as u64,
        rebound2_per_link: (d.rebound2_entries[2] - d.rebound2_entries[1]) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load_with_expected_shapes() {
        let ws = recover_widgets().unwrap();
        assert_eq!(ws.axis, (2, 0));
        assert_eq!(ws.l1.pattern.len(), 6, "link widget is a column pair");
        assert_eq!(ws.l1.budget, Some(BUDGET_L1));
        assert_eq!(ws.m1.budget, Some(BUDGET_M1));
        assert_eq!(ws.b2.budget, Some(BUDGET_B2));
        assert!(ws.m1.entry.is_some() && ws.l1.entry.is_some() && ws.b1.entry.is_some());
        assert!(ws.l2.entry.is_none() && ws.l4.entry.is_none() && ws.m2.entry.is_none());
    }

    #[test]
    fn assembled_family_verifies_at_base_periods() {
        for (n, period) in [(0u32, 220u64), (1, 244), (5, 340)] {
            let h = llrlrl_highway(n).unwrap();
            assert_eq!(h.period, period);
            assert_eq!(h.drift, DRIFT);
            verify_highway(&h).unwrap();
        }
    }

    #[test]
    fn stage_budgets_observed_on_assembled_instances() {
        let ws = recover_widgets().unwrap();
        for n in [4u32, 8] {
            let budgets = observed_stage_budgets(&ws, n).expect("decomposes");
            assert_eq!(
                budgets,
                StageBudgets {
                    main_prefix: BUDGET_M1,
                    slow_per_link: BUDGET_L1,
                    rebound1_per_link: BUDGET_L2,
                    fast_per_link: BUDGET_L3,
                    rebound2_per_link: BUDGET_L4,
                },
                "n = {n}"
            );
        }
    }

    #[test]
    fn segmentation_starts_with_the_main_widget_stay() {
        let ws = recover_widgets().unwrap();
        let seg = stage_segmentation(&ws, 3);
        assert_eq!(seg.first(), Some(&(Stage::Main, 84)));
        let total: u64 = seg.iter().map(|(_, c)| c).sum();
        assert_eq!(total, family_period(3));
    }

    #[test]
    #[ignore = "regenerates the widget fixtures under target/; copy them over by hand"]
    fn regenerate_widget_fixtures() {
        let rule = rule();
        let ws = recover_widgets_by_mining(0xA11CE, 8192).unwrap();
        let dir = std::env::temp_dir().join("llrlrl-fixtures");
        std::fs::create_dir_all(dir.join("llrlrl")).unwrap();
        let mut widgets = Vec::new();
        for w in [
            &ws.m1, &ws.l1, &ws.b1, &ws.m2, &ws.l2, &ws.l2_last, &ws.l3, &ws.l4, &ws.l4_last,
            &ws.b2,
        ] {
            let (pos, d) = w.entry.unwrap_or((Cell::ORIGIN, Direction::North));
            let doc = AntpatDoc::for_pattern(&rule, &w.pattern, pos, d);
            let file = format!("{}.antpat", w.name.replace('\'', "p"));
            std::fs::write(dir.join("llrlrl").join(&file), doc.to_text()).unwrap();
            widgets.push(serde_json::json!({
                "name": w.name,
                "file": file,
                "budget": w.budget,
                "has_entry": w.entry.is_some(),
            }));
        }
        let manifest = serde_json::json!({
            "rule": RULE,
            "axis": [ws.axis.0, ws.axis.1],
            "q0": ws.q0,
            "start": {"x": ws.start.0.x, "y": ws.start.0.y, "dir": ws.start.1.letter()},
            "provenance": {"seed": 0xA11CE_u64, "budget_runs": 8192},
            "widgets": widgets,
        });
        std::fs::write(
            dir.join("llrlrl_widgets.json"),
            serde_json::to_string_pretty(&manifest).unwrap() + "\n",
        )
        .unwrap();
        println!("fixtures written under {}", dir.display());
    }
}
