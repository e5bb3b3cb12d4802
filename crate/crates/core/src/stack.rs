//! Signed-permutation model of a burnt pancake stack.
//!
//! Entry 0 is the top of the stack. A pancake is a nonzero signed integer whose
//! magnitude is its size and whose sign is negative when the burnt side faces
//! up. A virtual pancake `n + 1` sits below the bottom; it never moves and only
//! takes part in adjacency counting.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StackError {
    #[error("stack size must be at least 1")]
    Empty,
    #[error("entry {value} at index {index} is not a signed value in 1..={n}")]
    OutOfRange { index: usize, value: i32, n: usize },
    #[error("pancake {size} appears more than once")]
    Duplicate { size: u32 },
    #[error("flip length {k} is outside 1..={n}")]
    BadFlip { k: usize, n: usize },
}

/// Whether a flip gains exactly one adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlipClass {
    Improve,
    Waste,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    /// `[x, x+1, ...]`, length at least 2.
    Block,
    /// `[x, x-1, ...]`, length at least 2.
    Clan,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    pub kind: SegmentKind,
}

/// Maximal tiling of a stack into blocks, clans and free pancakes, top to bottom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDecomposition {
    pub segments: Vec<Segment>,
}

impl RunDecomposition {
    pub fn clans(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.kind == SegmentKind::Clan)
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.kind == SegmentKind::Block)
    }

    pub fn free(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.kind == SegmentKind::Free)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct SignedStack {
    entries: Vec<i32>,
}

impl SignedStack {
    pub fn new(entries: Vec<i32>) -> Result<Self, StackError> {
        let n = entries.len();
        if n == 0 {
            return Err(StackError::Empty);
        }
        let mut seen = vec![false; n + 1];
        for (index, &value) in entries.iter().enumerate() {
            let size = value.unsigned_abs() as usize;
            if value == 0 || size > n {
                return Err(StackError::OutOfRange { index, value, n });
            }
            if std::mem::replace(&mut seen[size], true) {
                return Err(StackError::Duplicate { size: size as u32 });
            }
        }
        Ok(Self { entries })
    }

    /// Caller guarantees `entries` is a signed permutation of `1..=len`.
    pub(crate) fn from_entries_unchecked(entries: Vec<i32>) -> Self {
        debug_assert!(Self::new(entries.clone()).is_ok());
        Self { entries }
    }

    /// `[-1, -2, ..., -n]`.
    pub fn neg_identity(n: usize) -> Result<Self, StackError> {
        if n == 0 {
            return Err(StackError::Empty);
        }
        Ok(Self { entries: (1..=n as i32).map(|v| -v).collect() })
    }

    /// `[1, 2, ..., n]`.
    pub fn identity(n: usize) -> Result<Self, StackError> {
        if n == 0 {
            return Err(StackError::Empty);
        }
        Ok(Self { entries: (1..=n as i32).collect() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[i32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<i32> {
        self.entries
    }

    pub fn top(&self) -> i32 {
        self.entries[0]
    }

    pub fn is_sorted(&self) -> bool {
        self.entries.iter().zip(1..).all(|(&v, i)| v == i)
    }

    pub fn check_flip(&self, k: usize) -> Result<(), StackError> {
        if k == 0 || k > self.len() {
            Err(StackError::BadFlip { k, n: self.len() })
        } else {
            Ok(())
        }
    }

    /// Reverses and negates the top `k` pancakes.
    pub fn flip(&self, k: usize) -> Result<Self, StackError> {
        let mut out = self.clone();
        out.flip_in_place(k)?;
        Ok(out)
    }

    pub fn flip_in_place(&mut self, k: usize) -> Result<(), StackError> {
        self.check_flip(k)?;
        flip_prefix(&mut self.entries, k);
        Ok(())
    }

    pub fn apply(&mut self, flips: &[usize]) -> Result<(), StackError> {
        for &k in flips {
            self.flip_in_place(k)?;
        }
        Ok(())
    }

    /// Value found below index `i`, counting the virtual pancake under the bottom.
    fn below(&self, i: usize) -> i32 {
        self.entries.get(i + 1).copied().unwrap_or(self.len() as i32 + 1)
    }

    /// Number of vertically consecutive pairs `(a, b)` with `b = a + 1`,
    /// including the pair the bottom pancake forms with the virtual pancake.
    pub fn adjacency_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.below(i) == self.entries[i] + 1).count()
    }

    /// Change in adjacency count caused by flipping `k`. Only the boundary
    /// under position `k` can change; reversed pairs keep their status.
    pub fn adjacency_delta(&self, k: usize) -> Result<i32, StackError> {
        self.check_flip(k)?;
        let under = self.below(k - 1);
        let before = (under == self.entries[k - 1] + 1) as i32;
        let after = (under == -self.entries[0] + 1) as i32;
        Ok(after - before)
    }

    pub fn classify_flip(&self, k: usize) -> Result<FlipClass, StackError> {
        Ok(if self.adjacency_delta(k)? == 1 {
            FlipClass::Improve
        } else {
            FlipClass::Waste
        })
    }

    /// The only flip that can be an improve: it must cut directly above
    /// pancake `-t + 1`, where `t` is the top pancake.
    pub fn improve_candidate(&self) -> Option<usize> {
        improve_in(&self.entries)
    }

    pub fn decompose_runs(&self) -> RunDecomposition {
        let e = &self.entries;
        let mut segments = Vec::new();
        let mut start = 0;
        while start < e.len() {
            let mut end = start + 1;
            let kind = match e.get(end).map(|&next| next - e[start]) {
                Some(1) => SegmentKind::Block,
                Some(-1) => SegmentKind::Clan,
                _ => SegmentKind::Free,
            };
            let step = match kind {
                SegmentKind::Block => 1,
                SegmentKind::Clan => -1,
                SegmentKind::Free => 0,
            };
            if step != 0 {
                while end < e.len() && e[end] - e[end - 1] == step {
                    end += 1;
                }
            }
            segments.push(Segment { start, len: end - start, kind });
            start = end;
        }
        RunDecomposition { segments }
    }

    pub fn max_clan_size(&self) -> usize {
        self.decompose_runs().clans().map(|s| s.len).max().unwrap_or(0)
    }

    pub fn position_of(&self, value: i32) -> Option<usize> {
        self.entries.iter().position(|&v| v == value)
    }
}

impl TryFrom<Vec<i32>> for SignedStack {
    type Error = StackError;

    fn try_from(entries: Vec<i32>) -> Result<Self, StackError> {
        Self::new(entries)
    }
}

impl From<SignedStack> for Vec<i32> {
    fn from(stack: SignedStack) -> Self {
        stack.entries
    }
}

impl AsRef<[i32]> for SignedStack {
    fn as_ref(&self) -> &[i32] {
        &self.entries
    }
}

impl fmt::Display for SignedStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// Raw prefix flip on a slice; `k` must be in `1..=e.len()`.
#[inline]
pub(crate) fn flip_prefix(e: &mut [i32], k: usize) {
    let prefix = &mut e[..k];
    prefix.reverse();
    for v in prefix {
        *v = -*v;
    }
}

#[inline]
pub(crate) fn improve_in(e: &[i32]) -> Option<usize> {
    let n = e.len();
    let target = -e[0] + 1;
    if target == n as i32 + 1 {
        // The top is -n, so the bottom cannot already be n.
        return Some(n);
    }
    let j = e.iter().position(|&v| v == target)?;
    // j == 0 is impossible: target differs from the top by construction.
    (j >= 1 && e[j] != e[j - 1] + 1).then_some(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[i32]) -> SignedStack {
        SignedStack::new(v.to_vec()).unwrap()
    }

    #[test]
    fn neg_identity_values() {
        assert_eq!(SignedStack::neg_identity(3).unwrap().entries(), &[-1, -2, -3]);
        assert_eq!(SignedStack::neg_identity(1).unwrap().entries(), &[-1]);
        let s = SignedStack::neg_identity(61).unwrap();
        assert_eq!((s.entries()[0], s.entries()[60]), (-1, -61));
        assert_eq!(SignedStack::neg_identity(0), Err(StackError::Empty));
    }

    #[test]
    fn validation() {
        assert!(matches!(SignedStack::new(vec![1, 0]), Err(StackError::OutOfRange { .. })));
        assert!(matches!(SignedStack::new(vec![1, 3]), Err(StackError::OutOfRange { .. })));
        assert_eq!(SignedStack::new(vec![1, -1]), Err(StackError::Duplicate { size: 1 }));
        assert_eq!(SignedStack::new(vec![]), Err(StackError::Empty));
    }

    #[test]
    fn flip_examples() {
        assert_eq!(st(&[-1, -2, -3]).flip(3).unwrap(), st(&[3, 2, 1]));
        assert_eq!(st(&[1, 2, 3]).flip(1).unwrap(), st(&[-1, 2, 3]));
        assert_eq!(st(&[1, 2, 3]).flip(0), Err(StackError::BadFlip { k: 0, n: 3 }));
        assert_eq!(st(&[1, 2, 3]).flip(4), Err(StackError::BadFlip { k: 4, n: 3 }));
    }

    #[test]
    fn adjacency_examples() {
        assert_eq!(SignedStack::identity(7).unwrap().adjacency_count(), 7);
        assert_eq!(SignedStack::neg_identity(7).unwrap().adjacency_count(), 0);
        assert_eq!(st(&[-5, -4, 1, 2, 3]).adjacency_count(), 3);
    }

    #[test]
    fn classify_examples() {
        let neg = SignedStack::neg_identity(9).unwrap();
        assert_eq!(neg.classify_flip(9).unwrap(), FlipClass::Waste);
        assert_eq!(st(&[-2, 3, 1]).classify_flip(1).unwrap(), FlipClass::Improve);
        assert_eq!(st(&[1, 2, 3]).classify_flip(3).unwrap(), FlipClass::Waste);
        assert!(st(&[1, 2, 3]).classify_flip(5).is_err());
    }

    #[test]
    fn decompose_examples() {
        let d = SignedStack::neg_identity(6).unwrap().decompose_runs();
        assert_eq!(d.segments, vec![Segment { start: 0, len: 6, kind: SegmentKind::Clan }]);
        let d = SignedStack::identity(6).unwrap().decompose_runs();
        assert_eq!(d.segments, vec![Segment { start: 0, len: 6, kind: SegmentKind::Block }]);
        // [2, -5, 7] is not a permutation of 1..=3; check the free-only case on a valid stack.
        let d = st(&[2, -5, 7, 1, -3, 6, -4]).decompose_runs();
        assert!(d.segments.iter().all(|s| s.kind == SegmentKind::Free && s.len == 1));
        assert_eq!(d.segments.len(), 7);
    }

    #[test]
    fn max_clan_examples() {
        assert_eq!(SignedStack::neg_identity(8).unwrap().max_clan_size(), 8);
        assert_eq!(st(&[1, 2, 3]).max_clan_size(), 0);
        assert_eq!(st(&[5, 4, 3, 1, 2]).max_clan_size(), 3);
    }

    #[test]
    fn improve_candidate_examples() {
        assert_eq!(st(&[-1, -2, -3]).improve_candidate(), None);
        assert_eq!(st(&[-3, 1, 2, 4]).improve_candidate(), Some(3));
        assert_eq!(st(&[-4, 1, 2, 3]).improve_candidate(), Some(4));
        assert_eq!(st(&[-3, 1, 2]).improve_candidate(), Some(3));
        assert_eq!(st(&[-1]).improve_candidate(), Some(1));
        // Top 1 asks for pancake 0, which does not exist.
        assert_eq!(st(&[1, -2, 3]).improve_candidate(), None);
    }

    #[test]
    fn display() {
        assert_eq!(st(&[-1, 2]).to_string(), "[-1, 2]");
    }
}
