//! Growing a working waste prefix for `n` into candidates for `n + 12`.
//!
//! Two three-flip templates are inserted into the base prefix, one before the
//! flip `n - 1` and one after it. Every other base flip either keeps its value
//! or is shifted by the offset, depending on whether it counts from the top
//! or from the bottom of the stack.

use serde::{Deserialize, Serialize};

use super::{cuts_from_waste_prefix, run_ranges, Candidate, RangeResult, SearchConfig, SearchError, SearchMode, SearchOutcome};
use crate::stack::{flip_prefix, SignedStack};
use crate::verify::{complete_in_place, greedy_improve_completion, RawOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OffsetRule {
    Keep,
    Shift,
    /// Both values are tried.
    Either,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionSpec {
    pub n: usize,
    pub base_waste_skeleton: Vec<usize>,
    pub insert_templates: [Vec<usize>; 2],
    pub offset: usize,
    /// One rule per flip of the base skeleton.
    pub offset_rules: Vec<OffsetRule>,
}

const MAX_EITHER: usize = 32;

impl ExtensionSpec {
    /// Defaults: templates `[10, 4, 6]` and `[6, 4, 10]`, offset 12, the
    /// flips `n` and `n - 1` always shifted, every other flip free.
    pub fn new(n: usize, base_waste_skeleton: Vec<usize>) -> Result<Self, SearchError> {
        let offset_rules = base_waste_skeleton
            .iter()
            .map(|&k| if k + 1 >= n { OffsetRule::Shift } else { OffsetRule::Either })
            .collect();
        let spec = Self {
            n,
            base_waste_skeleton,
            insert_templates: [vec![10, 4, 6], vec![6, 4, 10]],
            offset: 12,
            offset_rules,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn target_n(&self) -> usize {
        self.n + self.offset
    }

    /// Checks the skeleton shape and that it completes with improves only.
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: String| Err(SearchError::BadExtension(msg));
        let (n, sk) = (self.n, &self.base_waste_skeleton);
        if sk.len() < 2 || sk[0] != n || sk[sk.len() - 1] != n {
            return bad(format!("skeleton must start and end with the full flip {n}"));
        }
        if sk.iter().filter(|&&k| k == n - 1).count() != 1 {
            return bad(format!("skeleton must contain the flip {} exactly once", n - 1));
        }
        if self.offset_rules.len() != sk.len() {
            return bad(format!("{} offset rules for {} flips", self.offset_rules.len(), sk.len()));
        }
        if self.either_positions().len() > MAX_EITHER {
            return bad(format!("more than {MAX_EITHER} flips with a free offset"));
        }
        let target = self.target_n();
        let templates_ok = self.insert_templates.iter().flatten().all(|&k| (1..=target).contains(&k));
        if !templates_ok {
            return bad("template flip outside the target stack".into());
        }
        let mut stack = SignedStack::neg_identity(n)?;
        for (i, &k) in sk.iter().enumerate() {
            if stack.adjacency_delta(k).map_err(|e| SearchError::BadExtension(e.to_string()))? == 1 {
                return bad(format!("skeleton flip #{i} is an improve"));
            }
            stack.flip_in_place(k)?;
        }
        if !greedy_improve_completion(&stack, n).is_sorted() {
            return bad("skeleton does not complete with improves only".into());
        }
        Ok(())
    }

    fn pivot(&self) -> usize {
        self.base_waste_skeleton.iter().position(|&k| k == self.n - 1).expect("validated")
    }

    /// Insertion slots, as base indices the template is placed before.
    fn slots(&self) -> (Vec<usize>, Vec<usize>) {
        let pivot = self.pivot();
        let last = self.base_waste_skeleton.len() - 1;
        ((1..=pivot).collect(), (pivot + 1..=last).collect())
    }

    fn either_positions(&self) -> Vec<usize> {
        (0..self.offset_rules.len()).filter(|&i| self.offset_rules[i] == OffsetRule::Either).collect()
    }

    fn space(&self) -> (Vec<(usize, usize)>, Vec<usize>) {
        let (first, second) = self.slots();
        let pairs = first.iter().flat_map(|&a| second.iter().map(move |&b| (a, b))).collect();
        (pairs, self.either_positions())
    }

    /// Number of candidates the search enumerates.
    pub fn candidate_count(&self) -> u64 {
        let (pairs, either) = self.space();
        pairs.len() as u64 * (1u64 << either.len())
    }

    /// Waste prefix for candidate `index` in the enumeration order.
    pub fn candidate_prefix(&self, index: u64) -> Vec<usize> {
        let (pairs, either) = self.space();
        let masks = 1u64 << either.len();
        let (p1, p2) = pairs[(index / masks) as usize];
        let mask = index % masks;
        let mut out = Vec::with_capacity(self.base_waste_skeleton.len() + 6);
        for (i, &k) in self.base_waste_skeleton.iter().enumerate() {
            if i == p1 {
                out.extend(&self.insert_templates[0]);
            }
            if i == p2 {
                out.extend(&self.insert_templates[1]);
            }
            let shifted = match self.offset_rules[i] {
                OffsetRule::Keep => false,
                OffsetRule::Shift => true,
                OffsetRule::Either => {
                    let bit = either.iter().position(|&j| j == i).expect("listed");
                    mask >> bit & 1 == 1
                }
            };
            out.push(if shifted { k + self.offset } else { k });
        }
        out
    }
}

/// Enumerates insertion slot pairs crossed with offset choices; a candidate
/// succeeds when every prefix flip is a waste and the rest sorts with
/// improves only.
pub fn extension_search(spec: &ExtensionSpec, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    spec.validate()?;
    if cfg.worker_count == 0 {
        return Err(SearchError::BadConfig("worker_count must be at least 1".into()));
    }
    if cfg.mode != SearchMode::Exhaustive {
        return Err(SearchError::BadConfig("extension search is exhaustive".into()));
    }
    let target = spec.target_n();
    let total = spec.candidate_count();
    let tag = format!("extension-from{}", spec.n);

    run_ranges(target, total, &tag, cfg, |start, end, stop| {
        let mut out = RangeResult { complete: true, ..Default::default() };
        let mut e = Vec::with_capacity(target);
        let mut completion = Vec::new();
        for index in start..end {
            if stop() {
                out.complete = false;
                break;
            }
            out.evaluated += 1;
            let prefix = spec.candidate_prefix(index);
            e.clear();
            e.extend((1..=target as i32).map(|v| -v));
            let mut all_wastes = true;
            for &k in &prefix {
                if k == 0 || k > target {
                    all_wastes = false;
                    break;
                }
                let under = e.get(k).copied().unwrap_or(target as i32 + 1);
                if under == -e[0] + 1 && under != e[k - 1] + 1 {
                    all_wastes = false;
                    break;
                }
                flip_prefix(&mut e, k);
            }
            if !all_wastes {
                out.split_rejected += 1;
                continue;
            }
            completion.clear();
            if complete_in_place(&mut e, target, &mut completion) == RawOutcome::Sorted {
                let sigma = cuts_from_waste_prefix(target, &prefix).ok();
                out.successes.push(Candidate::success(index, sigma, prefix, completion.clone()));
            }
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{generate, Part};
    use crate::verify::verify_sorts;

    fn base29() -> ExtensionSpec {
        ExtensionSpec::new(29, generate(29).unwrap().part(Part::W)).unwrap()
    }

    #[test]
    fn space_size() {
        let spec = base29();
        // 8 slots before the flip 28, 7 after it, 2^13 offset choices.
        assert_eq!(spec.candidate_count(), 56 * (1 << 13));
        assert_eq!(spec.target_n(), 41);
    }

    #[test]
    fn all_keep_with_first_slots_is_a_plain_splice() {
        let mut spec = base29();
        spec.offset_rules.iter_mut().for_each(|r| *r = OffsetRule::Keep);
        let prefix = spec.candidate_prefix(0);
        let sk = &spec.base_waste_skeleton;
        let mut expected = vec![sk[0], 10, 4, 6];
        expected.extend(&sk[1..=8]);
        expected.extend([6, 4, 10]);
        expected.extend(&sk[9..]);
        assert_eq!(prefix, expected);
    }

    #[test]
    fn rejects_bad_skeletons() {
        assert!(ExtensionSpec::new(29, vec![29, 29]).is_err());
        let mut w = generate(29).unwrap().part(Part::W);
        w.swap(1, 2);
        assert!(ExtensionSpec::new(29, w).is_err());
    }

    #[test]
    fn successes_verify_at_target_length() {
        let outcome = extension_search(&base29(), &SearchConfig::exhaustive(4)).unwrap();
        assert!(!outcome.successes.is_empty());
        let w41 = generate(41).unwrap().part(Part::W);
        assert!(outcome.successes.iter().any(|c| c.waste_prefix == w41));
        for c in &outcome.successes {
            let r = verify_sorts(41, &c.flips(), None).unwrap();
            assert!(r.sorted);
            assert_eq!(r.total_flips, (3 * 41 + 3) / 2);
            assert_eq!(r.waste_count, (41 + 3) / 2);
        }
    }
}
