//! Searching for optimal sequences of the shape "all wastes first, then only
//! improves".
//!
//! A candidate is a waste prefix (full flip, one split per clan boundary in
//! some order, full flip) followed by the greedy improve-only completion. The
//! exhaustive search walks every cut order in lexicographic rank order; the
//! randomized search samples orders; the extension search grows a known
//! waste prefix from `n` to `n + 12`.
//!
//! All three split their index space into fixed contiguous ranges that are
//! evaluated in parallel and merged back in range order, so results do not
//! depend on the worker count. With `stop_after`, workers stop cooperatively
//! once enough successes are known and may overshoot the limit.

pub mod checkpoint;
mod cuts;
mod extension;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cuts::{cuts_from_waste_prefix, waste_prefix_from_cuts, CutPermutation};
pub use extension::{extension_search, ExtensionSpec, OffsetRule};

use crate::stack::StackError;
use crate::verify::{complete_in_place, greedy_improve_completion, CompletionResult, RawOutcome};
use cuts::{build_prefix, check_size, cut_count, PrefixFault};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search needs an odd n ≥ 5, got {n}")]
    UnsupportedSize { n: usize },
    #[error("{count}! cut orders do not fit the enumeration range")]
    TooLarge { count: usize },
    #[error("{order:?} is not a permutation of the {} cut indices for n = {n}", (n - 1) / 2)]
    NotACutPermutation { n: usize, order: Vec<usize> },
    #[error("split flip #{index} is an improve")]
    SplitWasImprove { index: usize },
    #[error("clan boundary for cut {cut} not found")]
    BoundaryNotFound { cut: usize },
    #[error("flip #{index} is not a clan split of the expected waste prefix")]
    NotAWastePrefix { index: usize },
    #[error("invalid search configuration: {0}")]
    BadConfig(String),
    #[error("invalid extension base: {0}")]
    BadExtension(String),
    #[error("checkpoint {}: {msg}", path.display())]
    Checkpoint { path: PathBuf, msg: String },
    #[error(transparent)]
    Stack(#[from] StackError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    Exhaustive,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub mode: SearchMode,
    /// Randomized mode only.
    pub seed: u64,
    /// Randomized mode only.
    pub sample_count: u64,
    pub worker_count: usize,
    pub stop_after: Option<usize>,
    pub checkpoint_dir: Option<PathBuf>,
}

impl SearchConfig {
    pub fn exhaustive(worker_count: usize) -> Self {
        Self {
            mode: SearchMode::Exhaustive,
            seed: 0,
            sample_count: 0,
            worker_count,
            stop_after: None,
            checkpoint_dir: None,
        }
    }

    pub fn randomized(seed: u64, sample_count: u64, worker_count: usize) -> Self {
        Self { mode: SearchMode::Randomized, seed, sample_count, ..Self::exhaustive(worker_count) }
    }

    fn validate(&self, mode: SearchMode) -> Result<(), SearchError> {
        if self.worker_count == 0 {
            return Err(SearchError::BadConfig("worker_count must be at least 1".into()));
        }
        if self.mode != mode {
            return Err(SearchError::BadConfig(format!("expected {mode:?} mode, got {:?}", self.mode)));
        }
        if mode == SearchMode::Randomized && self.sample_count == 0 {
            return Err(SearchError::BadConfig("sample_count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Lexicographic rank, sample number or extension index.
    pub index: u64,
    pub sigma: Option<CutPermutation>,
    pub waste_prefix: Vec<usize>,
    pub completion: CompletionResult,
}

impl Candidate {
    /// Waste prefix followed by the completion flips.
    pub fn flips(&self) -> Vec<usize> {
        let mut out = self.waste_prefix.clone();
        match &self.completion {
            CompletionResult::Sorted(f) | CompletionResult::BudgetExceeded { applied: f } => out.extend(f),
            CompletionResult::Stuck { applied, .. } => out.extend(applied),
        }
        out
    }

    pub fn record(&self, n: usize) -> SearchRecord {
        SearchRecord {
            n,
            index: self.index,
            sigma: self.sigma.as_ref().map(|s| s.order().to_vec()),
            waste_prefix: self.waste_prefix.clone(),
            flips: self.flips(),
        }
    }

    fn success(index: u64, sigma: Option<CutPermutation>, waste_prefix: Vec<usize>, completion: Vec<usize>) -> Self {
        Self { index, sigma, waste_prefix, completion: CompletionResult::Sorted(completion) }
    }
}

/// Serialized form of a successful candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub n: usize,
    pub index: u64,
    #[serde(default)]
    pub sigma: Option<Vec<usize>>,
    pub waste_prefix: Vec<usize>,
    pub flips: Vec<usize>,
}

impl SearchRecord {
    fn into_candidate(self) -> Candidate {
        let completion = self.flips[self.waste_prefix.len()..].to_vec();
        Candidate::success(self.index, self.sigma.map(CutPermutation::from_order_unchecked), self.waste_prefix, completion)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Size of the index space.
    pub total: u64,
    pub evaluated: u64,
    pub split_rejected: u64,
    pub resumed_ranges: u64,
    /// Set when `stop_after` cut the run short.
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub n: usize,
    pub successes: Vec<Candidate>,
    pub stats: SearchStats,
}

/// Builds the waste prefix for `sigma` and completes it greedily within `n` improves.
pub fn evaluate(n: usize, sigma: &CutPermutation) -> Result<Candidate, SearchError> {
    let (stack, prefix) = waste_prefix_from_cuts(n, sigma)?;
    let completion = greedy_improve_completion(&stack, n);
    Ok(Candidate { index: 0, sigma: Some(sigma.clone()), waste_prefix: prefix, completion })
}

/// Per-range counters and finds.
#[derive(Default)]
struct RangeResult {
    successes: Vec<Candidate>,
    evaluated: u64,
    split_rejected: u64,
    complete: bool,
    resumed: bool,
}

struct Scratch {
    e: Vec<i32>,
    prefix: Vec<usize>,
    completion: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { e: Vec::with_capacity(n), prefix: Vec::new(), completion: Vec::new() }
    }

    /// Evaluates one cut order; `Ok(true)` on a sorted completion.
    fn run_cuts(&mut self, n: usize, order: &[usize]) -> Result<Option<bool>, SearchError> {
        self.e.clear();
        self.e.extend((1..=n as i32).map(|v| -v));
        match build_prefix(&mut self.e, order, &mut self.prefix) {
            Ok(()) => {}
            Err(PrefixFault::SplitWasImprove { .. }) => return Ok(None),
            Err(PrefixFault::BoundaryNotFound { cut }) => return Err(SearchError::BoundaryNotFound { cut }),
        }
        self.completion.clear();
        Ok(Some(complete_in_place(&mut self.e, n, &mut self.completion) == RawOutcome::Sorted))
    }
}

const MAX_RANGES: u64 = 256;
const MAX_RANGE_LEN: u64 = 1 << 24;

/// Fixed range layout for an index space; depends only on `total`.
fn ranges(total: u64) -> Vec<(u64, u64)> {
    let len = total.div_ceil(MAX_RANGES).clamp(1, MAX_RANGE_LEN);
    (0..total.div_ceil(len)).map(|i| (i * len, ((i + 1) * len).min(total))).collect()
}

/// Evaluates every range in parallel, resuming from and writing checkpoints.
fn run_ranges<F>(n: usize, total: u64, tag: &str, cfg: &SearchConfig, eval: F) -> Result<SearchOutcome, SearchError>
where
    F: Fn(u64, u64, &dyn Fn() -> bool) -> Result<RangeResult, SearchError> + Sync,
{
    let found = AtomicUsize::new(0);
    let limit = cfg.stop_after.unwrap_or(usize::MAX);
    let should_stop = || found.load(Ordering::Relaxed) >= limit;
    let checkpoint_dir = cfg.checkpoint_dir.as_ref().map(|d| d.join(tag));

    let run_one = |&(start, end): &(u64, u64)| -> Result<RangeResult, SearchError> {
        if let Some(dir) = &checkpoint_dir {
            if let Some(cp) = checkpoint::read(dir, n, start, end)? {
                found.fetch_add(cp.successes.len(), Ordering::Relaxed);
                let successes = cp.successes.into_iter().map(SearchRecord::into_candidate).collect();
                return Ok(RangeResult { successes, complete: true, resumed: true, ..Default::default() });
            }
        }
        if should_stop() {
            return Ok(RangeResult::default());
        }
        let result = eval(start, end, &|| should_stop())?;
        found.fetch_add(result.successes.len(), Ordering::Relaxed);
        if let (Some(dir), true) = (&checkpoint_dir, result.complete) {
            let successes = result.successes.iter().map(|c| c.record(n)).collect();
            checkpoint::write(dir, &checkpoint::Checkpoint { n, range_start: start, range_end: end, successes })?;
        }
        Ok(result)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| SearchError::BadConfig(e.to_string()))?;
    let layout = ranges(total);
    let results: Vec<RangeResult> = pool.install(|| layout.par_iter().map(run_one).collect::<Result<_, _>>())?;

    let mut stats = SearchStats { total, ..Default::default() };
    let mut successes = Vec::new();
    for r in results {
        stats.evaluated += r.evaluated;
        stats.split_rejected += r.split_rejected;
        stats.resumed_ranges += r.resumed as u64;
        stats.stopped_early |= !r.complete;
        successes.extend(r.successes);
    }
    Ok(SearchOutcome { n, successes, stats })
}

fn factorial(k: usize) -> Option<u64> {
    (1..=k as u64).try_fold(1u64, |acc, v| acc.checked_mul(v))
}

/// The `rank`-th permutation of `0..count` in lexicographic order.
pub(crate) fn unrank(count: usize, mut rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..count).collect();
    let mut out = Vec::with_capacity(count);
    for i in (0..count).rev() {
        let f = factorial(i).expect("caller checked the range");
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Advances to the next lexicographic permutation; false after the last one.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("v[i + 1] > v[i]");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Tries every cut order for `n`.
pub fn exhaustive_search(n: usize, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    check_size(n)?;
    cfg.validate(SearchMode::Exhaustive)?;
    let count = cut_count(n);
    let total = factorial(count).ok_or(SearchError::TooLarge { count })?;

    run_ranges(n, total, "exhaustive", cfg, |start, end, stop| {
        let mut scratch = Scratch::new(n);
        let mut order = unrank(count, start);
        let mut out = RangeResult { complete: true, ..Default::default() };
        for rank in start..end {
            if stop() {
                out.complete = false;
                break;
            }
            out.evaluated += 1;
            match scratch.run_cuts(n, &order)? {
                None => out.split_rejected += 1,
                Some(true) => out.successes.push(Candidate::success(
                    rank,
                    Some(CutPermutation::from_order_unchecked(order.clone())),
                    scratch.prefix.clone(),
                    scratch.completion.clone(),
                )),
                Some(false) => {}
            }
            if rank + 1 < end {
                next_permutation(&mut order);
            }
        }
        Ok(out)
    })
}

/// The cut order tried by sample `index`: a Fisher–Yates shuffle driven by
/// ChaCha8 seeded with `seed`, on stream `index`.
pub fn sample_cut_order(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut order: Vec<usize> = (0..cut_count(n)).collect();
    order.shuffle(&mut rng);
    order
}

/// Tries `cfg.sample_count` uniformly random cut orders.
pub fn randomized_search(n: usize, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    check_size(n)?;
    cfg.validate(SearchMode::Randomized)?;
    let tag = format!("randomized-seed{}", cfg.seed);

    run_ranges(n, cfg.sample_count, &tag, cfg, |start, end, stop| {
        let mut scratch = Scratch::new(n);
        let mut out = RangeResult { complete: true, ..Default::default() };
        for index in start..end {
            if stop() {
                out.complete = false;
                break;
            }
            let order = sample_cut_order(n, cfg.seed, index);
            out.evaluated += 1;
            match scratch.run_cuts(n, &order)? {
                None => out.split_rejected += 1,
                Some(true) => out.successes.push(Candidate::success(
                    index,
                    Some(CutPermutation::from_order_unchecked(order)),
                    scratch.prefix.clone(),
                    scratch.completion.clone(),
                )),
                Some(false) => {}
            }
        }
        Ok(out)
    })
}
