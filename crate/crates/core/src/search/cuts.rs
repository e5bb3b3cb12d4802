use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::stack::{flip_prefix, SignedStack};

/// Order in which the clan boundaries of the fully flipped `-I_n` are cut.
///
/// Cut `m` (for `0 ≤ m ≤ (n-3)/2`) separates the pancakes of sizes `2m+2` and
/// `2m+1`. After all `(n-1)/2` cuts the stack consists of the clans
/// `{2m+3, 2m+2}` and the free pancake 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CutPermutation(Vec<usize>);

pub(crate) fn cut_count(n: usize) -> usize {
    (n - 1) / 2
}

pub(crate) fn check_size(n: usize) -> Result<(), SearchError> {
    if n % 2 == 0 || n < 5 {
        return Err(SearchError::UnsupportedSize { n });
    }
    Ok(())
}

impl CutPermutation {
    pub fn new(n: usize, order: Vec<usize>) -> Result<Self, SearchError> {
        check_size(n)?;
        let count = cut_count(n);
        let mut seen = vec![false; count];
        let ok = order.len() == count
            && order.iter().all(|&m| m < count && !std::mem::replace(&mut seen[m], true));
        if !ok {
            return Err(SearchError::NotACutPermutation { n, order });
        }
        Ok(Self(order))
    }

    pub fn identity(n: usize) -> Result<Self, SearchError> {
        check_size(n)?;
        Ok(Self((0..cut_count(n)).collect()))
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn into_order(self) -> Vec<usize> {
        self.0
    }

    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        Self(order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PrefixFault {
    SplitWasImprove { index: usize },
    BoundaryNotFound { cut: usize },
}

/// Builds the waste prefix for `order` on `e`, which must hold `-I_n`.
/// `flips` receives the `(n+3)/2` flips.
pub(crate) fn build_prefix(e: &mut [i32], order: &[usize], flips: &mut Vec<usize>) -> Result<(), PrefixFault> {
    let n = e.len();
    flips.clear();
    flip_prefix(e, n);
    flips.push(n);
    for (i, &m) in order.iter().enumerate() {
        let k = split_position(e, m).ok_or(PrefixFault::BoundaryNotFound { cut: m })?;
        // The boundary pair is a clan pair, so the flip gains an adjacency
        // only if the new top's successor lands right under it.
        if e[k] == -e[0] + 1 {
            return Err(PrefixFault::SplitWasImprove { index: i + 1 });
        }
        flip_prefix(e, k);
        flips.push(k);
    }
    flip_prefix(e, n);
    flips.push(n);
    Ok(())
}

/// Flip length that cuts between sizes `2m+2` and `2m+1`, if they are adjacent.
fn split_position(e: &[i32], m: usize) -> Option<usize> {
    let lo = 2 * m as i32 + 1;
    let j = e.iter().position(|&v| v.abs() == lo)?;
    let hi = lo + 1;
    // Clan orientation: either [hi, lo] or [-lo, -hi].
    if e[j] > 0 {
        (j >= 1 && e[j - 1] == hi).then_some(j)
    } else {
        (j + 1 < e.len() && e[j + 1] == -hi).then_some(j + 1)
    }
}

/// Replays the waste prefix for `sigma` from `-I_n`, returning the final stack
/// and its `(n+3)/2` flips.
pub fn waste_prefix_from_cuts(n: usize, sigma: &CutPermutation) -> Result<(SignedStack, Vec<usize>), SearchError> {
    check_size(n)?;
    if sigma.order().len() != cut_count(n) {
        return Err(SearchError::NotACutPermutation { n, order: sigma.order().to_vec() });
    }
    let mut e = SignedStack::neg_identity(n)?.into_entries();
    let mut flips = Vec::with_capacity((n + 3) / 2);
    build_prefix(&mut e, sigma.order(), &mut flips).map_err(|fault| match fault {
        PrefixFault::SplitWasImprove { index } => SearchError::SplitWasImprove { index },
        PrefixFault::BoundaryNotFound { cut } => SearchError::BoundaryNotFound { cut },
    })?;
    Ok((SignedStack::from_entries_unchecked(e), flips))
}

/// Recovers the cut order behind a waste prefix of the form
/// full flip, `(n-1)/2` clan splits, full flip.
pub fn cuts_from_waste_prefix(n: usize, flips: &[usize]) -> Result<CutPermutation, SearchError> {
    check_size(n)?;
    let count = cut_count(n);
    let shape_ok = flips.len() == count + 2 && flips[0] == n && flips[count + 1] == n;
    if !shape_ok {
        return Err(SearchError::NotAWastePrefix { index: 0 });
    }
    let mut e = SignedStack::neg_identity(n)?.into_entries();
    flip_prefix(&mut e, n);
    let mut order = Vec::with_capacity(count);
    for (i, &k) in flips[1..=count].iter().enumerate() {
        let index = i + 1;
        if k == 0 || k >= n {
            return Err(SearchError::NotAWastePrefix { index });
        }
        let (a, b) = (e[k - 1], e[k]);
        // A clan pair [x, x-1] spanning sizes 2m+2 / 2m+1.
        if b != a - 1 {
            return Err(SearchError::NotAWastePrefix { index });
        }
        let lo = a.abs().min(b.abs());
        if lo % 2 == 0 {
            return Err(SearchError::NotAWastePrefix { index });
        }
        order.push((lo as usize - 1) / 2);
        flip_prefix(&mut e, k);
    }
    CutPermutation::new(n, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{generate, Part};
    use crate::stack::SegmentKind;

    #[test]
    fn prefix_length_and_shape() {
        for n in [5, 7, 9, 13] {
            let sigma = CutPermutation::identity(n).unwrap();
            match waste_prefix_from_cuts(n, &sigma) {
                Ok((stack, flips)) => {
                    assert_eq!(flips.len(), (n + 3) / 2);
                    assert_eq!((flips[0], flips[flips.len() - 1]), (n, n));
                    assert_eq!(stack.max_clan_size(), 2);
                }
                Err(SearchError::SplitWasImprove { .. }) => {}
                Err(e) => panic!("n = {n}: {e}"),
            }
        }
    }

    #[test]
    fn n5_by_direct_simulation() {
        // [-1..-5] -> full flip -> [5, 4, 3, 2, 1]. Cut 0 sits between 2 and 1
        // (flip 4 -> [-2, -3, -4, -5, 1]); cut 1 sits between -3 and -4
        // (flip 2 -> [3, 2, -4, -5, 1]); full flip -> [-1, 5, 4, -2, -3].
        let sigma = CutPermutation::new(5, vec![0, 1]).unwrap();
        let (stack, flips) = waste_prefix_from_cuts(5, &sigma).unwrap();
        assert_eq!(flips, vec![5, 4, 2, 5]);
        assert_eq!(stack.entries(), &[-1, 5, 4, -2, -3]);
        let d = stack.decompose_runs();
        assert_eq!(d.clans().count(), 2);
        assert!(d.clans().all(|s| s.len == 2));
        assert_eq!(d.free().count(), 1);
        assert_eq!(cuts_from_waste_prefix(5, &flips).unwrap(), sigma);
    }

    #[test]
    fn n29_cuts_recovered_from_generated_w_part() {
        let w = generate(29).unwrap().part(Part::W);
        let sigma = cuts_from_waste_prefix(29, &w).unwrap();
        assert_eq!(&sigma.order()[..3], &[4, 6, 9]);
        let (stack, flips) = waste_prefix_from_cuts(29, &sigma).unwrap();
        assert_eq!(&flips[..4], &[29, 20, 4, 10]);
        assert_eq!(flips, w);
        let d = stack.decompose_runs();
        assert_eq!(d.clans().filter(|s| s.len == 2).count(), 14);
        assert!(d.segments.iter().all(|s| s.kind != SegmentKind::Block));
        assert_eq!(stack.top(), -1);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(CutPermutation::new(7, vec![0, 1]), Err(SearchError::NotACutPermutation { .. })));
        assert!(matches!(CutPermutation::new(7, vec![0, 1, 1]), Err(SearchError::NotACutPermutation { .. })));
        assert!(matches!(CutPermutation::new(7, vec![0, 1, 3]), Err(SearchError::NotACutPermutation { .. })));
        assert!(matches!(CutPermutation::identity(8), Err(SearchError::UnsupportedSize { n: 8 })));
        assert!(matches!(cuts_from_waste_prefix(5, &[5, 3, 2, 5]), Err(SearchError::NotAWastePrefix { index: 1 })));
        assert!(matches!(cuts_from_waste_prefix(5, &[5, 4, 2]), Err(SearchError::NotAWastePrefix { index: 0 })));
    }
}
