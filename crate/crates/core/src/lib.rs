//! Burnt pancake stacks and optimal flipping sequences for `-I_n = [-1, ..., -n]`.
//!
//! - [`stack`]: signed-permutation stacks, flips, adjacencies and run decomposition.
//! - [`sequences`]: closed-form optimal sequences for `n ≡ 1 (mod 4)`, `n ≥ 29`.
//! - [`verify`]: replay, traces and greedy improve-only completion.
//! - [`search`]: waste-permutation search for new sequences.
//! - [`exact`]: brute-force distances in the burnt pancake graph for small `n`.
//! - [`corpus`]: reference traces for n = 61, 53 and 57.

pub mod corpus;
pub mod exact;
pub mod search;
pub mod sequences;
pub mod stack;
pub mod verify;

pub use sequences::{expected_lengths, family_of, generate, AnnotatedSeq, Family, FamilyError, Phase};
pub use stack::{FlipClass, RunDecomposition, Segment, SegmentKind, SignedStack, StackError};
pub use verify::{greedy_improve_completion, trace, verify_sorts, CompletionResult, Trace, VerifyReport};
