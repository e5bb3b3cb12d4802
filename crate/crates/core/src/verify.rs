//! Replaying and certifying flipping sequences.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequences::{AnnotatedSeq, Part, Phase};
use crate::stack::{flip_prefix, improve_in, FlipClass, SignedStack, StackError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("flip #{index} has length {k}, outside 1..={n}")]
    InvalidFlip { index: usize, k: usize, n: usize },
    #[error("{phases} phase tags for {flips} flips")]
    PhaseCountMismatch { flips: usize, phases: usize },
    #[error(transparent)]
    Stack(#[from] StackError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseViolation {
    pub index: usize,
    pub phase: Phase,
    pub expected: FlipClass,
    pub actual: FlipClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub sorted: bool,
    pub total_flips: usize,
    pub waste_count: usize,
    pub improve_count: usize,
    pub phase_violations: Vec<PhaseViolation>,
    pub final_stack: SignedStack,
}

impl VerifyReport {
    /// Sorted and, when phases were supplied, consistent with them.
    pub fn is_certificate(&self) -> bool {
        self.sorted && self.phase_violations.is_empty()
    }
}

fn expected_class(phase: Phase) -> FlipClass {
    match phase.part() {
        Part::W => FlipClass::Waste,
        Part::A | Part::B => FlipClass::Improve,
    }
}

/// Replays `flips` from `start`, classifying each flip.
pub fn verify_from(
    start: SignedStack,
    flips: &[usize],
    phases: Option<&[Phase]>,
) -> Result<VerifyReport, VerifyError> {
    let n = start.len();
    if let Some(phases) = phases {
        if phases.len() != flips.len() {
            return Err(VerifyError::PhaseCountMismatch { flips: flips.len(), phases: phases.len() });
        }
    }
    let mut stack = start;
    let mut waste_count = 0;
    let mut phase_violations = Vec::new();
    for (index, &k) in flips.iter().enumerate() {
        let class = stack.classify_flip(k).map_err(|_| VerifyError::InvalidFlip { index, k, n })?;
        if class == FlipClass::Waste {
            waste_count += 1;
        }
        if let Some(phase) = phases.map(|p| p[index]) {
            let expected = expected_class(phase);
            if expected != class {
                phase_violations.push(PhaseViolation { index, phase, expected, actual: class });
            }
        }
        stack.flip_in_place(k)?;
    }
    Ok(VerifyReport {
        n,
        sorted: stack.is_sorted(),
        total_flips: flips.len(),
        waste_count,
        improve_count: flips.len() - waste_count,
        phase_violations,
        final_stack: stack,
    })
}

/// Replays `flips` from `-I_n`.
pub fn verify_sorts(n: usize, flips: &[usize], phases: Option<&[Phase]>) -> Result<VerifyReport, VerifyError> {
    verify_from(SignedStack::neg_identity(n)?, flips, phases)
}

pub fn verify_annotated(seq: &AnnotatedSeq) -> Result<VerifyReport, VerifyError> {
    verify_sorts(seq.n, &seq.flips(), Some(&seq.phases()))
}

/// Every intermediate state of a replay. `states[i + 1]` is `states[i]` flipped by `flips[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub states: Vec<SignedStack>,
    pub flips: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<Phase>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// Index into `states`; 0 is the starting stack.
    pub step: usize,
    pub expected: Option<SignedStack>,
    pub actual: Option<SignedStack>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Stack { line: usize, source: StackError },
    #[error("trace has no starting state")]
    NoStart,
}

pub fn trace(n: usize, flips: &[usize]) -> Result<Trace, VerifyError> {
    trace_from(SignedStack::neg_identity(n)?, flips)
}

pub fn trace_from(start: SignedStack, flips: &[usize]) -> Result<Trace, VerifyError> {
    let n = start.len();
    let mut states = Vec::with_capacity(flips.len() + 1);
    states.push(start);
    for (index, &k) in flips.iter().enumerate() {
        let next = states[index].flip(k).map_err(|_| VerifyError::InvalidFlip { index, k, n })?;
        states.push(next);
    }
    Ok(Trace { states, flips: flips.to_vec(), phases: None })
}

/// Entries per rendered row.
pub const TRACE_ROW_WIDTH: usize = 15;

impl Trace {
    pub fn with_phases(mut self, phases: Vec<Phase>) -> Self {
        self.phases = Some(phases);
        self
    }

    pub fn n(&self) -> usize {
        self.states.first().map_or(0, SignedStack::len)
    }

    pub fn final_state(&self) -> &SignedStack {
        self.states.last().expect("a trace always holds its starting state")
    }

    /// First flip index whose recorded successor state is wrong.
    pub fn first_inconsistency(&self) -> Option<usize> {
        if self.states.len() != self.flips.len() + 1 {
            return Some(self.flips.len().min(self.states.len().saturating_sub(1)));
        }
        self.flips.iter().enumerate().find_map(|(i, &k)| match self.states[i].flip(k) {
            Ok(next) if next == self.states[i + 1] => None,
            _ => Some(i),
        })
    }

    /// First state at which two traces disagree, comparing values only.
    pub fn first_divergence(&self, expected: &Trace) -> Option<Divergence> {
        let len = self.states.len().max(expected.states.len());
        (0..len).find_map(|step| {
            let a = self.states.get(step);
            let e = expected.states.get(step);
            (a != e).then(|| Divergence { step, expected: e.cloned(), actual: a.cloned() })
        })
    }

    /// Bracketed rows of signed integers, one state per record, wrapped at
    /// [`TRACE_ROW_WIDTH`] entries.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.n());
        out.push_str("start\n");
        render_state(&mut out, &self.states[0]);
        for (i, &k) in self.flips.iter().enumerate() {
            match self.phases.as_ref().and_then(|p| p.get(i)) {
                Some(phase) => {
                    let _ = writeln!(out, "flip {k} {phase}");
                }
                None => {
                    let _ = writeln!(out, "flip {k}");
                }
            }
            render_state(&mut out, &self.states[i + 1]);
        }
        out
    }

    /// Parses [`Trace::to_text`] output. Whitespace and row wrapping are
    /// irrelevant; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Trace, TraceParseError> {
        let mut states = Vec::new();
        let mut flips = Vec::new();
        let mut phases: Vec<Option<Phase>> = Vec::new();
        let mut declared_n: Option<usize> = None;
        let mut open: Option<(usize, Vec<i32>)> = None;
        let mut expecting_state = false;

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let syntax = |msg: String| TraceParseError::Syntax { line, msg };
            let content = raw.split('#').next().unwrap_or("");
            let spaced = content.replace('[', " [ ").replace(']', " ] ").replace(',', " ");
            let mut tokens = spaced.split_whitespace().peekable();
            while let Some(tok) = tokens.next() {
                if let Some((_, values)) = open.as_mut() {
                    if tok == "]" {
                        let (start_line, values) = open.take().unwrap();
                        let stack = SignedStack::new(values)
                            .map_err(|source| TraceParseError::Stack { line: start_line, source })?;
                        if let Some(n) = declared_n {
                            if stack.len() != n {
                                return Err(syntax(format!("state has {} entries, expected {n}", stack.len())));
                            }
                        }
                        states.push(stack);
                        expecting_state = false;
                    } else {
                        values.push(tok.parse().map_err(|_| syntax(format!("bad entry {tok:?}")))?);
                    }
                    continue;
                }
                match tok {
                    "n" => {
                        let v = tokens.next().ok_or_else(|| syntax("missing size after `n`".into()))?;
                        declared_n = Some(v.parse().map_err(|_| syntax(format!("bad size {v:?}")))?);
                    }
                    "start" => {
                        if !states.is_empty() {
                            return Err(syntax("`start` after the first state".into()));
                        }
                        expecting_state = true;
                    }
                    "flip" => {
                        if states.is_empty() || expecting_state {
                            return Err(syntax("`flip` before a complete state".into()));
                        }
                        let v = tokens.next().ok_or_else(|| syntax("missing flip length".into()))?;
                        flips.push(v.parse().map_err(|_| syntax(format!("bad flip length {v:?}")))?);
                        let phase = match tokens.peek() {
                            Some(&t) if t != "[" => {
                                tokens.next();
                                Some(t.parse::<Phase>().map_err(syntax)?)
                            }
                            _ => None,
                        };
                        phases.push(phase);
                        expecting_state = true;
                    }
                    "[" => {
                        if !expecting_state {
                            return Err(syntax("state without a preceding `start` or `flip`".into()));
                        }
                        open = Some((line, Vec::new()));
                    }
                    other => return Err(syntax(format!("unexpected token {other:?}"))),
                }
            }
        }
        if open.is_some() || expecting_state {
            return Err(TraceParseError::Syntax { line: text.lines().count(), msg: "unterminated state".into() });
        }
        if states.is_empty() {
            return Err(TraceParseError::NoStart);
        }
        let phases = if !phases.is_empty() && phases.iter().all(Option::is_some) {
            Some(phases.into_iter().flatten().collect())
        } else {
            None
        };
        Ok(Trace { states, flips, phases })
    }
}

fn render_state(out: &mut String, stack: &SignedStack) {
    out.push_str("    [");
    for (i, v) in stack.entries().iter().enumerate() {
        if i > 0 {
            out.push_str(if i % TRACE_ROW_WIDTH == 0 { ",\n    " } else { ", " });
        }
        let _ = write!(out, "{v}");
    }
    out.push_str("]\n");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StuckReason {
    /// No flip gains an adjacency; the top pancake is recorded.
    NoImprove { top: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompletionResult {
    Sorted(Vec<usize>),
    Stuck { stack: SignedStack, applied: Vec<usize>, reason: StuckReason },
    BudgetExceeded { applied: Vec<usize> },
}

impl CompletionResult {
    pub fn is_sorted(&self) -> bool {
        matches!(self, CompletionResult::Sorted(_))
    }

    pub fn sorted_flips(&self) -> Option<&[usize]> {
        match self {
            CompletionResult::Sorted(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawOutcome {
    Sorted,
    Stuck,
    BudgetExceeded,
}

/// Greedy improve-only completion on a raw slice, appending flips to `out`.
/// Each step costs O(n): the improve, if any, is unique.
pub(crate) fn complete_in_place(e: &mut [i32], budget: usize, out: &mut Vec<usize>) -> RawOutcome {
    let mut used = 0;
    loop {
        if e.iter().zip(1..).all(|(&v, i)| v == i) {
            return RawOutcome::Sorted;
        }
        if used == budget {
            return RawOutcome::BudgetExceeded;
        }
        let Some(k) = improve_in(e) else {
            return RawOutcome::Stuck;
        };
        flip_prefix(e, k);
        out.push(k);
        used += 1;
    }
}

/// Applies the unique improve flip until the stack is sorted, no improve
/// exists, or `budget` flips have been spent.
pub fn greedy_improve_completion(stack: &SignedStack, budget: usize) -> CompletionResult {
    let mut entries = stack.entries().to_vec();
    let mut applied = Vec::new();
    match complete_in_place(&mut entries, budget, &mut applied) {
        RawOutcome::Sorted => CompletionResult::Sorted(applied),
        RawOutcome::BudgetExceeded => CompletionResult::BudgetExceeded { applied },
        RawOutcome::Stuck => {
            let stack = SignedStack::from_entries_unchecked(entries);
            let reason = StuckReason::NoImprove { top: stack.top() };
            CompletionResult::Stuck { stack, applied, reason }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::generate;

    #[test]
    fn verify_generated_53() {
        let seq = generate(53).unwrap();
        let r = verify_annotated(&seq).unwrap();
        assert!(r.sorted);
        assert_eq!((r.total_flips, r.waste_count, r.improve_count), (81, 28, 53));
        assert!(r.phase_violations.is_empty());
    }

    #[test]
    fn verify_single_full_flip() {
        let r = verify_sorts(3, &[3], None).unwrap();
        assert!(!r.sorted);
        assert_eq!(r.final_stack.entries(), &[3, 2, 1]);
        assert_eq!(r.waste_count + r.improve_count, r.total_flips);
    }

    #[test]
    fn truncated_sequence_does_not_sort() {
        let mut flips = generate(61).unwrap().flips();
        flips.pop();
        assert!(!verify_sorts(61, &flips, None).unwrap().sorted);
    }

    #[test]
    fn verify_reports_bad_flip_index() {
        assert_eq!(verify_sorts(5, &[5, 6], None), Err(VerifyError::InvalidFlip { index: 1, k: 6, n: 5 }));
        assert_eq!(verify_sorts(5, &[5, 0], None), Err(VerifyError::InvalidFlip { index: 1, k: 0, n: 5 }));
        assert!(matches!(verify_sorts(5, &[5], Some(&[])), Err(VerifyError::PhaseCountMismatch { .. })));
    }

    #[test]
    fn phase_violation_is_flagged() {
        let seq = generate(29).unwrap();
        let mut phases = seq.phases();
        phases[0] = Phase::A1;
        let r = verify_sorts(29, &seq.flips(), Some(&phases)).unwrap();
        assert!(r.sorted);
        assert_eq!(
            r.phase_violations,
            vec![PhaseViolation { index: 0, phase: Phase::A1, expected: FlipClass::Improve, actual: FlipClass::Waste }]
        );
        assert!(!r.is_certificate());
    }

    #[test]
    fn trace_examples() {
        let t = trace(61, &generate(61).unwrap().flips()).unwrap();
        assert_eq!(t.states[1].entries(), (1..=61).rev().collect::<Vec<i32>>().as_slice());
        let t = trace(53, &generate(53).unwrap().flips()).unwrap();
        assert!(t.final_state().is_sorted());
        let t = trace(1, &[1]).unwrap();
        assert_eq!(t.states, vec![SignedStack::new(vec![-1]).unwrap(), SignedStack::new(vec![1]).unwrap()]);
        assert_eq!(t.first_inconsistency(), None);
    }

    #[test]
    fn trace_text_round_trip() {
        let seq = generate(33).unwrap();
        let t = trace(33, &seq.flips()).unwrap().with_phases(seq.phases());
        let text = t.to_text();
        assert!(text.lines().all(|l| l.matches(',').count() <= TRACE_ROW_WIDTH));
        assert_eq!(Trace::parse_text(&text).unwrap(), t);

        let plain = trace(5, &[5, 5]).unwrap();
        let back = Trace::parse_text(&plain.to_text()).unwrap();
        assert_eq!(back, plain);
        assert_eq!(back.phases, None);
    }

    #[test]
    fn trace_text_rejects_garbage() {
        assert!(matches!(Trace::parse_text(""), Err(TraceParseError::NoStart)));
        assert!(Trace::parse_text("start\n [1, 2").is_err());
        assert!(Trace::parse_text("start [1, 1]").is_err());
        assert!(Trace::parse_text("flip 2 [1, 2]").is_err());
        assert!(Trace::parse_text("n 3\nstart [1, 2]").is_err());
        assert!(Trace::parse_text("start [1, 2] flip 2 X9 [-2, -1]").is_err());
        assert!(Trace::parse_text("start [1, 2] bogus").is_err());
    }

    #[test]
    fn divergence_reports_first_step() {
        let a = trace(5, &[5, 3]).unwrap();
        let b = trace(5, &[5, 2]).unwrap();
        let d = a.first_divergence(&b).unwrap();
        assert_eq!(d.step, 2);
        assert_eq!(a.first_divergence(&a), None);
        let short = trace(5, &[5]).unwrap();
        assert_eq!(a.first_divergence(&short).unwrap().step, 2);
    }

    #[test]
    fn completion_of_sorted_stack_is_empty() {
        let id = SignedStack::identity(9).unwrap();
        assert_eq!(greedy_improve_completion(&id, 0), CompletionResult::Sorted(vec![]));
    }

    #[test]
    fn completion_outcomes() {
        // [-2, -1]: flip 2 gives [1, 2] directly.
        let s = SignedStack::new(vec![-2, -1]).unwrap();
        assert_eq!(greedy_improve_completion(&s, 5), CompletionResult::Sorted(vec![2]));
        assert_eq!(greedy_improve_completion(&s, 0), CompletionResult::BudgetExceeded { applied: vec![] });
        let stuck = greedy_improve_completion(&SignedStack::neg_identity(4).unwrap(), 4);
        assert!(matches!(stuck, CompletionResult::Stuck { reason: StuckReason::NoImprove { top: -1 }, .. }));
    }

    #[test]
    fn completion_reproduces_a_and_b_parts() {
        let seq = generate(53).unwrap();
        let w = seq.part(Part::W);
        let mut post_w = SignedStack::neg_identity(53).unwrap();
        post_w.apply(&w).unwrap();
        let mut ab = seq.part(Part::A);
        ab.extend(seq.part(Part::B));
        assert_eq!(ab.len(), 53);
        assert_eq!(greedy_improve_completion(&post_w, 53), CompletionResult::Sorted(ab));
    }
}
