//! Exact distances in the burnt pancake graph for small `n`.
//!
//! The graph has `2^n · n!` vertices (signed permutations) and is `n`-regular;
//! every flip is an involution, so it is undirected. Three independent
//! routes compute `T(n)`, the distance from `-I_n` to `I_n`:
//!
//! - a full BFS from `I_n` over a dense rank-indexed distance table, which
//!   also yields `g(n)` (the eccentricity of `I_n`);
//! - a bidirectional BFS over hashed [`EncodedState`]s;
//! - IDA* with the admissible bound `n - adjacency_count`.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stack::{flip_prefix, improve_in, SignedStack, StackError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "bfs")]
    Bfs,
    #[serde(rename = "bidir")]
    Bidirectional,
    #[serde(rename = "ida")]
    IdaStar,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bfs => "bfs",
            Method::Bidirectional => "bidir",
            Method::IdaStar => "ida",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("n = {n} exceeds the {what} limit of {limit}")]
    LimitExceeded { n: usize, limit: usize, what: &'static str },
    #[error("IDA* gave up after {0:?}")]
    TimeBudgetExceeded(Duration),
    #[error(transparent)]
    Stack(#[from] StackError),
}

/// Largest `n` each route accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub bfs: usize,
    pub reverse_bfs: usize,
    pub ida: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { bfs: 8, reverse_bfs: 7, ida: 12 }
    }
}

impl Limits {
    fn check(n: usize, limit: usize, what: &'static str) -> Result<(), ExactError> {
        if n == 0 {
            return Err(StackError::Empty.into());
        }
        if n > limit {
            return Err(ExactError::LimitExceeded { n, limit, what });
        }
        Ok(())
    }
}

/// Largest stack [`EncodedState`] can pack.
pub const MAX_ENCODED_N: usize = 12;

/// A stack packed five bits per position (four bits of size − 1, one sign
/// bit), top in the low bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedState(pub u64);

impl EncodedState {
    pub fn encode(stack: &SignedStack) -> Result<Self, ExactError> {
        if stack.len() > MAX_ENCODED_N {
            return Err(ExactError::LimitExceeded { n: stack.len(), limit: MAX_ENCODED_N, what: "encoding" });
        }
        Ok(Self(pack(stack.entries())))
    }

    pub fn decode(self, n: usize) -> SignedStack {
        SignedStack::from_entries_unchecked(unpack(self.0, n))
    }
}

fn pack(e: &[i32]) -> u64 {
    e.iter().rev().fold(0u64, |acc, &v| {
        let field = ((v.unsigned_abs() as u64 - 1) << 1) | (v < 0) as u64;
        (acc << 5) | field
    })
}

fn unpack(mut code: u64, n: usize) -> Vec<i32> {
    (0..n)
        .map(|_| {
            let field = code & 0x1f;
            code >>= 5;
            let size = (field >> 1) as i32 + 1;
            if field & 1 == 1 {
                -size
            } else {
                size
            }
        })
        .collect()
}

/// Dense index of a signed permutation: Lehmer rank of the sizes times
/// `2^n`, plus one bit per burnt pancake.
fn rank(e: &[i32]) -> usize {
    let n = e.len();
    let mut unused: u32 = (1 << n) - 1;
    let mut perm = 0usize;
    let mut signs = 0usize;
    for (i, &v) in e.iter().enumerate() {
        let bit = v.unsigned_abs() - 1;
        perm = perm * (n - i) + (unused & ((1 << bit) - 1)).count_ones() as usize;
        unused &= !(1 << bit);
        signs |= ((v < 0) as usize) << i;
    }
    (perm << n) | signs
}

fn unrank(index: usize, n: usize, out: &mut [i32]) {
    let signs = index & ((1 << n) - 1);
    let mut perm = index >> n;
    let mut digits = [0usize; 16];
    for i in (0..n).rev() {
        digits[i] = perm % (n - i);
        perm /= n - i;
    }
    let mut unused: u32 = (1 << n) - 1;
    for i in 0..n {
        let mut m = unused;
        for _ in 0..digits[i] {
            m &= m - 1;
        }
        let bit = m.trailing_zeros();
        unused &= !(1 << bit);
        let size = bit as i32 + 1;
        out[i] = if signs >> i & 1 == 1 { -size } else { size };
    }
}

fn state_count(n: usize) -> usize {
    (1..=n).product::<usize>() << n
}

const UNSEEN: u8 = u8::MAX;

/// Distance from every signed permutation of size `n` to `I_n`.
pub struct DistanceTable {
    n: usize,
    dist: Vec<u8>,
}

impl DistanceTable {
    /// Level-synchronous BFS from `I_n`; each level is expanded in parallel.
    pub fn build(n: usize) -> Self {
        assert!((1..=10).contains(&n), "dense table is limited to n ≤ 10");
        let total = state_count(n);
        let dist: Vec<AtomicU8> = (0..total).map(|_| AtomicU8::new(UNSEEN)).collect();
        let identity: Vec<i32> = (1..=n as i32).collect();
        dist[rank(&identity)].store(0, Ordering::Relaxed);
        let mut level = 0u8;
        loop {
            let grew = AtomicBool::new(false);
            dist.par_chunks(1 << 12).enumerate().for_each(|(chunk, slots)| {
                let mut e = vec![0i32; n];
                for (offset, slot) in slots.iter().enumerate() {
                    if slot.load(Ordering::Relaxed) != level {
                        continue;
                    }
                    unrank((chunk << 12) + offset, n, &mut e);
                    for k in 1..=n {
                        flip_prefix(&mut e, k);
                        let next = rank(&e);
                        if dist[next].compare_exchange(UNSEEN, level + 1, Ordering::Relaxed, Ordering::Relaxed).is_ok() {
                            grew.store(true, Ordering::Relaxed);
                        }
                        flip_prefix(&mut e, k);
                    }
                }
            });
            if !grew.load(Ordering::Relaxed) {
                break;
            }
            level += 1;
        }
        Self { n, dist: dist.into_iter().map(AtomicU8::into_inner).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> usize {
        self.dist.len()
    }

    pub fn distance(&self, stack: &SignedStack) -> u32 {
        assert_eq!(stack.len(), self.n);
        self.dist[rank(stack.entries())] as u32
    }

    /// Largest distance to `I_n` over all stacks, i.e. `g(n)`.
    pub fn eccentricity(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0) as u32
    }

    /// Lexicographically smallest shortest flip sequence sorting `stack`.
    pub fn witness(&self, stack: &SignedStack) -> Vec<usize> {
        let mut e = stack.entries().to_vec();
        let mut d = self.dist[rank(&e)];
        let mut out = Vec::with_capacity(d as usize);
        while d > 0 {
            let k = (1..=self.n)
                .find(|&k| {
                    flip_prefix(&mut e, k);
                    let closer = self.dist[rank(&e)] == d - 1;
                    flip_prefix(&mut e, k);
                    closer
                })
                .expect("a state at distance d > 0 has a neighbour at d - 1");
            flip_prefix(&mut e, k);
            out.push(k);
            d -= 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub n: usize,
    pub t_value: u32,
    pub witness: Vec<usize>,
    pub explored: u64,
    pub method: Method,
}

/// `T(n)` as far as it is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TBounds {
    Exact(u32),
    Range(u32, u32),
    NeedsSolver,
}

impl fmt::Display for TBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TBounds::Exact(v) => write!(f, "Exact {v}"),
            TBounds::Range(lo, hi) => write!(f, "Range {lo}..{hi}"),
            TBounds::NeedsSolver => f.write_str("NeedsSolver"),
        }
    }
}

/// Odd `n ≥ 19`: `(3n+3)/2`. Even `n ≥ 14`: `3n/2 + 1` or `3n/2 + 2`.
/// `T(17) = 28` is a known exception below that range.
pub fn t_bounds(n: usize) -> TBounds {
    let n32 = n as u32;
    match n {
        17 => TBounds::Exact(28),
        _ if n % 2 == 1 && n >= 19 => TBounds::Exact((3 * n32 + 3) / 2),
        _ if n % 2 == 0 && n >= 14 => TBounds::Range(3 * n32 / 2 + 1, 3 * n32 / 2 + 2),
        _ => TBounds::NeedsSolver,
    }
}

/// Admissible IDA* estimate: every flip changes the adjacency count by at most one.
pub fn heuristic(stack: &SignedStack) -> usize {
    stack.len() - stack.adjacency_count()
}

/// Exact solvers sharing a cache of distance tables.
pub struct Oracle {
    limits: Limits,
    tables: Mutex<HashMap<usize, Arc<DistanceTable>>>,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new(Limits::default())
    }
}

impl Oracle {
    pub fn new(limits: Limits) -> Self {
        Self { limits, tables: Mutex::new(HashMap::new()) }
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    fn table(&self, n: usize) -> Arc<DistanceTable> {
        let cached = self.tables.lock().unwrap().get(&n).cloned();
        cached.unwrap_or_else(|| {
            let table = Arc::new(DistanceTable::build(n));
            self.tables.lock().unwrap().insert(n, table.clone());
            table
        })
    }

    /// Full BFS; the witness is the lexicographically smallest optimal sequence.
    pub fn bfs_t(&self, n: usize) -> Result<SolveResult, ExactError> {
        Limits::check(n, self.limits.bfs.min(10), "BFS")?;
        let table = self.table(n);
        let start = SignedStack::neg_identity(n)?;
        Ok(SolveResult {
            n,
            t_value: table.distance(&start),
            witness: table.witness(&start),
            explored: table.states() as u64,
            method: Method::Bfs,
        })
    }

    /// `g(n)`: the largest distance from any stack to `I_n`.
    pub fn g_of_n(&self, n: usize) -> Result<u32, ExactError> {
        Limits::check(n, self.limits.reverse_bfs.min(10), "reverse BFS")?;
        Ok(self.table(n).eccentricity())
    }

    /// Whether some shortest sequence for `-I_n` begins with the full flip.
    pub fn optimal_first_flip_full(&self, n: usize) -> Result<bool, ExactError> {
        Limits::check(n, self.limits.bfs.min(10), "BFS")?;
        let table = self.table(n);
        let start = SignedStack::neg_identity(n)?;
        let after = start.flip(n)?;
        Ok(1 + table.distance(&after) == table.distance(&start))
    }

    /// Meet-in-the-middle BFS from both ends over hashed states.
    pub fn bidirectional_t(&self, n: usize) -> Result<SolveResult, ExactError> {
        Limits::check(n, self.limits.bfs.min(MAX_ENCODED_N), "BFS")?;
        bidirectional(n)
    }

    pub fn ida_t(&self, n: usize, budget: Option<Duration>) -> Result<SolveResult, ExactError> {
        Limits::check(n, self.limits.ida, "IDA*")?;
        ida(n, budget)
    }

    pub fn solve(&self, n: usize, method: Method) -> Result<SolveResult, ExactError> {
        match method {
            Method::Bfs => self.bfs_t(n),
            Method::Bidirectional => self.bidirectional_t(n),
            Method::IdaStar => self.ida_t(n, None),
        }
    }
}

/// Per-side record: distance from that side's root and the flip that reached it.
type Visited = HashMap<u64, (u8, u8)>;

fn bidirectional(n: usize) -> Result<SolveResult, ExactError> {
    let start = pack(SignedStack::neg_identity(n)?.entries());
    let goal = pack(SignedStack::identity(n)?.entries());
    if start == goal {
        return Ok(SolveResult { n, t_value: 0, witness: vec![], explored: 1, method: Method::Bidirectional });
    }
    let mut sides: [(Visited, Vec<u64>); 2] = [
        (HashMap::from([(start, (0, 0))]), vec![start]),
        (HashMap::from([(goal, (0, 0))]), vec![goal]),
    ];
    let mut depth = [0u8; 2];
    let mut e = vec![0i32; n];
    loop {
        // Grow the smaller frontier by one full level.
        let s = if sides[0].1.len() <= sides[1].1.len() { 0 } else { 1 };
        let (this, other) = if s == 0 {
            let (a, b) = sides.split_at_mut(1);
            (&mut a[0], &b[0])
        } else {
            let (a, b) = sides.split_at_mut(1);
            (&mut b[0], &a[0])
        };
        let mut next = Vec::new();
        let mut best: Option<(u32, u64)> = None;
        for &code in &this.1 {
            e.copy_from_slice(&unpack(code, n));
            for k in 1..=n {
                flip_prefix(&mut e, k);
                let c = pack(&e);
                flip_prefix(&mut e, k);
                if this.0.contains_key(&c) {
                    continue;
                }
                this.0.insert(c, (depth[s] + 1, k as u8));
                next.push(c);
                if let Some(&(d_other, _)) = other.0.get(&c) {
                    let total = (depth[s] + 1) as u32 + d_other as u32;
                    if best.is_none_or(|(b, _)| total < b) {
                        best = Some((total, c));
                    }
                }
            }
        }
        depth[s] += 1;
        this.1 = next;
        if let Some((t_value, meet)) = best {
            let witness = join_paths(n, meet, &sides[0].0, &sides[1].0);
            let explored = (sides[0].0.len() + sides[1].0.len()) as u64;
            return Ok(SolveResult { n, t_value, witness, explored, method: Method::Bidirectional });
        }
    }
}

/// Start-side path to `meet`, then the goal-side path from `meet` back to `I_n`.
fn join_paths(n: usize, meet: u64, from_start: &Visited, from_goal: &Visited) -> Vec<usize> {
    let walk = |visited: &Visited| {
        let mut path = Vec::new();
        let mut code = meet;
        loop {
            let (d, k) = visited[&code];
            if d == 0 {
                break;
            }
            path.push(k as usize);
            let mut e = unpack(code, n);
            flip_prefix(&mut e, k as usize);
            code = pack(&e);
        }
        path
    };
    let mut forward = walk(from_start);
    forward.reverse();
    forward.extend(walk(from_goal));
    forward
}

const TIME_CHECK_MASK: u64 = (1 << 16) - 1;

struct IdaCtx<'a> {
    n: usize,
    bound: usize,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: &'a AtomicBool,
    path: Vec<usize>,
}

impl IdaCtx<'_> {
    /// Lower bound on the remaining distance. Beyond `n - adjacencies`, a
    /// stack with no available improve needs at least one waste first.
    fn bound_for(e: &[i32], adjacencies: usize) -> usize {
        let n = e.len();
        let h = n - adjacencies;
        if h > 0 && improve_in(e).is_none() {
            h + 1
        } else {
            h
        }
    }

    fn dfs(&mut self, e: &mut [i32], adjacencies: usize, last: usize) -> bool {
        if adjacencies == self.n && e[0] == 1 {
            return true;
        }
        self.nodes += 1;
        if self.nodes & TIME_CHECK_MASK == 0 {
            if self.timed_out.load(Ordering::Relaxed) {
                return false;
            }
            if self.deadline.is_some_and(|d| Instant::now() > d) {
                self.timed_out.store(true, Ordering::Relaxed);
                return false;
            }
        }
        for k in 1..=self.n {
            if k == last {
                continue;
            }
            let under = e.get(k).copied().unwrap_or(self.n as i32 + 1);
            let before = (under == e[k - 1] + 1) as usize;
            let after = (under == -e[0] + 1) as usize;
            let adj = adjacencies + after - before;
            flip_prefix(e, k);
            if self.path.len() + 1 + Self::bound_for(e, adj) <= self.bound {
                self.path.push(k);
                if self.dfs(e, adj, k) {
                    return true;
                }
                self.path.pop();
            }
            flip_prefix(e, k);
        }
        false
    }
}

/// Iterative deepening with the first flip split across threads. Within one
/// bound, first flips are tried in increasing order and each subtree is
/// searched in lexicographic order, so the witness is the lexicographically
/// smallest optimal sequence.
fn ida(n: usize, budget: Option<Duration>) -> Result<SolveResult, ExactError> {
    let start = SignedStack::neg_identity(n)?;
    let root = start.entries().to_vec();
    let deadline = budget.map(|b| Instant::now() + b);
    let timed_out = AtomicBool::new(false);
    let explored = AtomicU64::new(0);
    let mut bound = IdaCtx::bound_for(&root, 0);
    loop {
        let found: Vec<Option<Vec<usize>>> = (1..=n)
            .into_par_iter()
            .map(|k| {
                let mut e = root.clone();
                let probe = SignedStack::from_entries_unchecked(root.clone());
                let adj = (probe.adjacency_delta(k).expect("k in range") + probe.adjacency_count() as i32) as usize;
                flip_prefix(&mut e, k);
                let mut ctx = IdaCtx { n, bound, nodes: 0, deadline, timed_out: &timed_out, path: vec![k] };
                let ok = IdaCtx::bound_for(&e, adj) < bound && ctx.dfs(&mut e, adj, k);
                explored.fetch_add(ctx.nodes + 1, Ordering::Relaxed);
                ok.then_some(ctx.path)
            })
            .collect();
        if timed_out.load(Ordering::Relaxed) {
            return Err(ExactError::TimeBudgetExceeded(budget.unwrap_or_default()));
        }
        if let Some(witness) = found.into_iter().flatten().next() {
            return Ok(SolveResult {
                n,
                t_value: witness.len() as u32,
                witness,
                explored: explored.load(Ordering::Relaxed),
                method: Method::IdaStar,
            });
        }
        bound += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_is_a_bijection_for_small_n() {
        for n in 1..=4 {
            let total = state_count(n);
            let mut e = vec![0; n];
            let mut seen = vec![false; total];
            for idx in 0..total {
                unrank(idx, n, &mut e);
                assert!(SignedStack::new(e.clone()).is_ok());
                assert_eq!(rank(&e), idx);
                assert!(!std::mem::replace(&mut seen[rank(&e)], true));
            }
        }
    }

    #[test]
    fn encode_round_trip_examples() {
        let s = SignedStack::new(vec![-3, 12, 1, -2, 4, 5, 6, 7, 8, 9, 10, 11]).unwrap();
        let code = EncodedState::encode(&s).unwrap();
        assert_eq!(code.decode(12), s);
        let big = SignedStack::neg_identity(13).unwrap();
        assert!(matches!(EncodedState::encode(&big), Err(ExactError::LimitExceeded { .. })));
    }

    #[test]
    fn tiny_values() {
        let oracle = Oracle::default();
        let one = oracle.bfs_t(1).unwrap();
        assert_eq!((one.t_value, one.witness.clone()), (1, vec![1]));
        let two = oracle.bfs_t(2).unwrap();
        assert_eq!(two.t_value, 4);
        assert_eq!(two.witness, vec![1, 2, 1, 2]);
        assert_eq!(oracle.g_of_n(1).unwrap(), 1);
        assert!(oracle.optimal_first_flip_full(1).unwrap());
        assert!(oracle.optimal_first_flip_full(2).unwrap());
    }

    #[test]
    fn limits_are_enforced() {
        let oracle = Oracle::default();
        assert!(matches!(oracle.bfs_t(9), Err(ExactError::LimitExceeded { n: 9, limit: 8, .. })));
        assert!(matches!(oracle.g_of_n(8), Err(ExactError::LimitExceeded { n: 8, limit: 7, .. })));
        assert!(matches!(oracle.ida_t(17, None), Err(ExactError::LimitExceeded { n: 17, limit: 12, .. })));
        assert!(matches!(oracle.bfs_t(0), Err(ExactError::Stack(StackError::Empty))));
    }

    #[test]
    fn heuristic_endpoints() {
        for n in 1..=9 {
            assert_eq!(heuristic(&SignedStack::neg_identity(n).unwrap()), n);
            assert_eq!(heuristic(&SignedStack::identity(n).unwrap()), 0);
        }
    }

    #[test]
    fn three_routes_agree_on_small_n() {
        let oracle = Oracle::default();
        for n in 1..=6 {
            let bfs = oracle.bfs_t(n).unwrap();
            let bidir = oracle.bidirectional_t(n).unwrap();
            let ida = oracle.ida_t(n, None).unwrap();
            assert_eq!(bfs.t_value, bidir.t_value, "n = {n}");
            assert_eq!(bfs.t_value, ida.t_value, "n = {n}");
            assert_eq!(bfs.witness, ida.witness, "lexicographic witnesses, n = {n}");
            for w in [&bfs.witness, &bidir.witness, &ida.witness] {
                let mut s = SignedStack::neg_identity(n).unwrap();
                s.apply(w).unwrap();
                assert!(s.is_sorted());
                assert_eq!(w.len() as u32, bfs.t_value);
            }
        }
    }

    #[test]
    fn ida_time_budget() {
        let r = Oracle::default().ida_t(12, Some(Duration::from_millis(1)));
        assert!(matches!(r, Err(ExactError::TimeBudgetExceeded(_))));
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(t_bounds(19), TBounds::Exact(30));
        assert_eq!(t_bounds(20), TBounds::Range(31, 32));
        assert_eq!(t_bounds(17), TBounds::Exact(28));
        assert_eq!(t_bounds(37), TBounds::Exact(57));
        assert_eq!(t_bounds(12), TBounds::NeedsSolver);
        assert_eq!(t_bounds(15), TBounds::NeedsSolver);
        assert_eq!(t_bounds(20).to_string(), "Range 31..32");
        assert_eq!(t_bounds(37).to_string(), "Exact 57");
    }
}
