//! Seeded Monte-Carlo census of highway frequencies over random initial
//! perturbations, plus a miner that keeps the verified highway records.
//!
//! Runs are keyed by `(seed, run_index)` through a counter-based generator,
//! so any run reproduces in isolation and the aggregate is independent of the
//! worker schedule. Work is split into fixed blocks; completed blocks are the
//! checkpoint unit, and the final report is a fold over blocks in index
//! order, which makes interrupted-and-resumed censuses bit-identical to
//! uninterrupted ones.

use crate::engine::{Configuration, EngineConfig};
use crate::geom::Cell;
use crate::highway::{canonicalise, detect, CanonicalForm, DetectionOutcome, Highway};
use crate::picture::Picture;
use crate::rule::RuleWord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

// --- counter-based splittable generator --------------------------------------

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream derived from `(seed, run_index)`.
#[derive(Clone, Debug)]
pub struct RunRng {
    state: u64,
}

impl RunRng {
    pub fn for_run(seed: u64, run_index: u64) -> Self {
        let state = mix64(mix64(seed) ^ mix64(run_index.wrapping_add(GOLDEN)));
        RunRng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw from `[0, n)` by rejection, exactly unbiased.
    pub fn uniform(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

// --- experiment specification -------------------------------------------------

/// Shape of the random initial perturbation around the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternShape {
    /// `side x side` square centred at the origin.
    Square(u32),
    /// Plus sign: two crossed arms of length `side` and width `2*(side/6)+1`.
    Cross(u32),
}

impl PatternShape {
    /// Cells of the shape, sorted by `(y, x)`; the random fill consumes the
    /// stream in this order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        match *self {
            PatternShape::Square(side) => {
                let half = side as i64 / 2;
                let lo = half - side as i64 + 1;
                for y in lo..=half {
                    for x in lo..=half {
                        out.push(Cell::new(x, y));
                    }
                }
            }
            PatternShape::Cross(side) => {
                let half = side as i64 / 2;
                let lo = half - side as i64 + 1;
                let arm = side as i64 / 6;
                for y in lo..=half {
                    for x in lo..=half {
                        if (x >= -arm && x <= arm) || (y >= -arm && y <= arm) {
                            out.push(Cell::new(x, y));
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentSpec {
    pub ruleword: RuleWord,
    pub runs: u64,
    pub steps_per_run: u64,
    pub shape: PatternShape,
    pub seed: u64,
    pub max_period: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("steps_per_run ({steps}) must be at least 3 * max_period ({max_period})")]
    WindowTooLarge { steps: u64, max_period: u64 },
    #[error("max_period must be at least 1")]
    ZeroPeriod,
    #[error("rule word {0} is trivial; the census needs a nontrivial word")]
    TrivialRule(String),
}

impl ExperimentSpec {
    /// Census defaults: 1e5-step probes of a random 11x11 square, periods up
    /// to 2048.
    pub fn new(ruleword: RuleWord, runs: u64, seed: u64) -> Self {
        ExperimentSpec {
            ruleword,
            runs,
            steps_per_run: 100_000,
            shape: PatternShape::Square(11),
            seed,
            max_period: 2048,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.max_period == 0 {
            return Err(SpecError::ZeroPeriod);
        }
        if self.steps_per_run < 3 * self.max_period {
            return Err(SpecError::WindowTooLarge {
                steps: self.steps_per_run,
                max_period: self.max_period,
            });
        }
        if self.ruleword.is_trivial() {
            return Err(SpecError::TrivialRule(self.ruleword.to_string()));
        }
        Ok(())
    }

    fn engine(&self) -> EngineConfig {
        EngineConfig {
            trace_capacity: (3 * self.max_period as usize).next_power_of_two(),
            ..EngineConfig::default()
        }
    }
}

/// Fill the shape i.i.d. uniform over the alphabet from the `(seed,
/// run_index)` stream; ant at the centre cell facing north over a zero
/// background.
pub fn random_initial(spec: &ExperimentSpec, run_index: u64) -> Configuration {
    let mut rng = RunRng::for_run(spec.seed, run_index);
    let n = spec.ruleword.alphabet_size() as u64;
    let mut picture = Picture::new();
    for cell in spec.shape.cells() {
        picture.set(cell, rng.uniform(n) as u8);
    }
    Configuration::new(picture, Cell::ORIGIN, crate::geom::Direction::North)
}

// --- census -------------------------------------------------------------------

/// Runs per scheduling block; also the checkpoint granularity. The final
/// report does not depend on this value, only scheduling does.
pub const BLOCK_SIZE: u64 = 64;

/// How many reproducing run indices to keep per period.
const EXAMPLES_PER_PERIOD: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodStats {
    pub count: u64,
    /// Smallest run indices that reached this period, ascending.
    pub example_runs: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    pub periods: BTreeMap<u64, PeriodStats>,
    pub no_highway: u64,
    /// Runs aborted by the engine's resource cap; also counted in `no_highway`.
    pub resource_errors: u64,
    pub runs: u64,
}

impl BlockStats {
    fn absorb(&mut self, other: &BlockStats) {
        for (&period, stats) in &other.periods {
            let slot = self.periods.entry(period).or_default();
            slot.count += stats.count;
            slot.example_runs.extend(&stats.example_runs);
            slot.example_runs.sort_unstable();
            slot.example_runs.dedup();
            slot.example_runs.truncate(EXAMPLES_PER_PERIOD);
        }
        self.no_highway += other.no_highway;
        self.resource_errors += other.resource_errors;
        self.runs += other.runs;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallMeta {
    pub seconds: f64,
    pub workers: usize,
}

/// Aggregated census result. Period counts plus `no_highway` sum to
/// `total_runs`; every period keeps reproducing run indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub ruleword: String,
    pub seed: u64,
    pub total_runs: u64,
    pub steps_per_run: u64,
    pub max_period: u64,
    pub shape: PatternShape,
    pub periods: BTreeMap<u64, PeriodStats>,
    pub no_highway: u64,
    pub resource_errors: u64,
    /// Wall-clock metadata; not part of the deterministic payload, stripped
    /// for schedule-independence comparisons.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall: Option<WallMeta>,
}

impl CensusReport {
    pub fn highway_hits(&self) -> u64 {
        self.periods.values().map(|s| s.count).sum()
    }

    pub fn strip_wall(mut self) -> Self {
        self.wall = None;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// `period,count,frequency` rows, frequency relative to total runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,count,frequency\n");
        for (period, stats) in &self.periods {
            out.push_str(&format!(
                "{},{},{}\n",
                period,
                stats.count,
                stats.count as f64 / self.total_runs as f64
            ));
        }
        out
    }
}

fn classify_run(spec: &ExperimentSpec, run_index: u64) -> (Option<u64>, bool, Option<Highway>) {
    let config = random_initial(spec, run_index);
    match detect(
        &spec.ruleword,
        config,
        spec.steps_per_run,
        spec.max_period,
        &spec.engine(),
    ) {
        Ok(report) => match report.outcome {
            DetectionOutcome::Highway { period, .. } => {
                let mut hw = report.highway;
                if let Some(h) = &mut hw {
                    h.provenance = crate::highway::Provenance::mined(
                        spec.seed,
                        run_index,
                        report.steps_simulated,
                    );
                }
                (Some(period), false, hw)
            }
            DetectionOutcome::NoHighwayWithinBudget => (None, false, None),
        },
        // Resource caps signal runaway memory, not a logic error; the run
        // counts as no-highway and is tallied separately.
        Err(_) => (None, true, None),
    }
}

fn run_block(spec: &ExperimentSpec, block: u64) -> BlockStats {
    let lo = block * BLOCK_SIZE;
    let hi = (lo + BLOCK_SIZE).min(spec.runs);
    let mut stats = BlockStats::default();
    for run_index in lo..hi {
        let (period, resource_error, _) = classify_run(spec, run_index);
        match period {
            Some(p) => {
                let slot = stats.periods.entry(p).or_default();
                slot.count += 1;
                if slot.example_runs.len() < EXAMPLES_PER_PERIOD {
                    slot.example_runs.push(run_index);
                }
            }
            None => {
                stats.no_highway += 1;
                if resource_error {
                    stats.resource_errors += 1;
                }
            }
        }
        stats.runs += 1;
    }
    stats
}

/// A census in progress; completed blocks form the checkpoint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Census {
    pub spec: ExperimentSpec,
    blocks: Vec<Option<BlockStats>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("checkpoint is corrupt: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Census {
    pub fn new(spec: ExperimentSpec) -> Result<Self, CensusError> {
        spec.validate()?;
        let n_blocks = spec.runs.div_ceil(BLOCK_SIZE) as usize;
        Ok(Census {
            spec,
            blocks: vec![None; n_blocks],
        })
    }

    pub fn checkpoint_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("census serialises");
        s.push('\n');
        s
    }

    pub fn from_checkpoint_json(json: &str) -> Result<Self, CensusError> {
        let census: Census = serde_json::from_str(json)?;
        census.spec.validate()?;
        let expected = census.spec.runs.div_ceil(BLOCK_SIZE) as usize;
        if census.blocks.len() != expected {
            return Err(CensusError::Checkpoint(format!(
                "expected {expected} blocks, found {}",
                census.blocks.len()
            )));
        }
        Ok(census)
    }

    pub fn total_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn completed_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| b.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.blocks.iter().all(|b| b.is_some())
    }

    /// Run up to `limit` missing blocks on `workers` threads. Returns the
    /// number of blocks completed by this call.
    pub fn run_blocks(&mut self, workers: usize, limit: Option<usize>) -> usize {
        let todo: Vec<u64> = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_none())
            .map(|(i, _)| i as u64)
            .take(limit.unwrap_or(usize::MAX))
            .collect();
        if todo.is_empty() {
            return 0;
        }
        let spec = &self.spec;
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<(u64, BlockStats)>> = Mutex::new(Vec::with_capacity(todo.len()));
        std::thread::scope(|scope| {
            for _ in 0..workers.max(1) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&block) = todo.get(i) else { break };
                    let stats = run_block(spec, block);
                    results.lock().unwrap().push((block, stats));
                });
            }
        });
        let results = results.into_inner().unwrap();
        let done = results.len();
        for (block, stats) in results {
            self.blocks[block as usize] = Some(stats);
        }
        done
    }

    /// Fold the completed blocks, in index order, into a report. `None` until
    /// every block is done.
    pub fn report(&self) -> Option<CensusReport> {
        if !self.is_complete() {
            return None;
        }
        let mut total = BlockStats::default();
        for block in self.blocks.iter().flatten() {
            total.absorb(block);
        }
        Some(CensusReport {
            ruleword: self.spec.ruleword.to_string(),
            seed: self.spec.seed,
            total_runs: total.runs,
            steps_per_run: self.spec.steps_per_run,
            max_period: self.spec.max_period,
            shape: self.spec.shape,
            periods: total.periods,
            no_highway: total.no_highway,
            resource_errors: total.resource_errors,
            wall: None,
        })
    }
}

/// Run a full census. The report is identical for any worker count.
pub fn run_census(spec: &ExperimentSpec, workers: usize) -> Result<CensusReport, CensusError> {
    let started = Instant::now();
    let mut census = Census::new(spec.clone())?;
    census.run_blocks(workers, None);
    let mut report = census.report().expect("all blocks ran");
    report.wall = Some(WallMeta {
        seconds: started.elapsed().as_secs_f64(),
        workers,
    });
    Ok(report)
}

// --- mining -------------------------------------------------------------------

/// Result of a mining sweep: canonical highways matching the predicate, with
/// reproducing provenance, deduplicated by canonical form.
#[derive(Debug, Default)]
pub struct MineOutcome {
    pub highways: Vec<Highway>,
    pub runs_used: u64,
    pub raw_hits: u64,
}

/// Census loop that retains full verified highway records matching
/// `predicate`. Stops early once `distinct_periods` (if given) distinct
/// periods have been kept, at a stripe boundary so the result is
/// deterministic for any worker count. An exhausted budget with an empty
/// result is a normal outcome.
pub fn mine<F>(
    spec: &ExperimentSpec,
    predicate: F,
    distinct_periods: Option<usize>,
    workers: usize,
) -> Result<MineOutcome, CensusError>
where
    F: Fn(&Highway) -> bool + Sync,
{
    spec.validate()?;
    let n_blocks = spec.runs.div_ceil(BLOCK_SIZE);
    let workers = workers.max(1);
    let mut kept: BTreeMap<CanonicalForm, Highway> = BTreeMap::new();
    let mut outcome = MineOutcome::default();
    let mut next_block = 0u64;
    while next_block < n_blocks {
        let stripe: Vec<u64> = (next_block..(next_block + workers as u64).min(n_blocks)).collect();
        next_block += stripe.len() as u64;
        let hits: Mutex<Vec<(u64, Highway)>> = Mutex::new(Vec::new());
        let counter = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = counter.fetch_add(1, Ordering::Relaxed);
                    let Some(&block) = stripe.get(i) else { break };
                    let lo = block * BLOCK_SIZE;
                    let hi = (lo + BLOCK_SIZE).min(spec.runs);
                    for run_index in lo..hi {
                        let (_, _, highway) = classify_run(spec, run_index);
                        if let Some(h) = highway {
                            if predicate(&h) {
                                hits.lock().unwrap().push((run_index, h));
                            }
                        }
                    }
                });
            }
        });
        let mut hits = hits.into_inner().unwrap();
        hits.sort_by_key(|(run_index, _)| *run_index);
        outcome.runs_used = (next_block * BLOCK_SIZE).min(spec.runs);
        for (_, h) in hits {
            outcome.raw_hits += 1;
            let canonical = canonicalise(&h);
            let key = CanonicalForm {
                trace_cycle: canonical.trace_cycle.clone(),
                drift: canonical.drift,
                direction: canonical.direction,
                cells: canonical
                    .pattern
                    .iter()
                    .map(|(c, v)| (c.x, c.y, v))
                    .collect(),
            };
            let mut keyed = canonical;
            keyed.provenance = h.provenance.clone();
            kept.entry(key).or_insert(keyed);
        }
        if let Some(target) = distinct_periods {
            let distinct: std::collections::BTreeSet<u64> =
                kept.values().map(|h| h.period).collect();
            if distinct.len() >= target {
                break;
            }
        }
    }
    outcome.highways = kept.into_values().collect();
    outcome
        .highways
        .sort_by_key(|h| (h.period, h.provenance.run_index));
    Ok(outcome)
}
