use proptest::prelude::*;

use pancake_core::exact::{heuristic, EncodedState, MAX_ENCODED_N};
use pancake_core::stack::{FlipClass, SegmentKind, SignedStack};
use pancake_core::verify::{greedy_improve_completion, trace_from, Trace};

fn stack(max_n: usize) -> impl Strategy<Value = SignedStack> {
    (1..=max_n)
        .prop_flat_map(|n| (Just((1..=n as i32).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(any::<bool>(), n)))
        .prop_map(|(v, signs)| {
            let e = v.into_iter().zip(signs).map(|(x, neg)| if neg { -x } else { x }).collect();
            SignedStack::new(e).unwrap()
        })
}

fn stack_and_flip(max_n: usize) -> impl Strategy<Value = (SignedStack, usize)> {
    stack(max_n).prop_flat_map(|s| {
        let n = s.len();
        (Just(s), 1..=n)
    })
}

fn stack_and_flips(max_n: usize) -> impl Strategy<Value = (SignedStack, Vec<usize>)> {
    stack(max_n).prop_flat_map(|s| {
        let n = s.len();
        (Just(s), prop::collection::vec(1..=n, 0..40))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn flip_is_an_involution((s, k) in stack_and_flip(40)) {
        prop_assert_eq!(s.flip(k).unwrap().flip(k).unwrap(), s);
    }

    #[test]
    fn flip_preserves_validity((s, k) in stack_and_flip(40)) {
        let f = s.flip(k).unwrap();
        prop_assert!(SignedStack::new(f.entries().to_vec()).is_ok());
        prop_assert_eq!(&f.entries()[k..], &s.entries()[k..]);
    }

    #[test]
    fn adjacency_changes_by_at_most_one((s, k) in stack_and_flip(40)) {
        let delta = s.flip(k).unwrap().adjacency_count() as i32 - s.adjacency_count() as i32;
        prop_assert!(delta.abs() <= 1);
        prop_assert_eq!(delta, s.adjacency_delta(k).unwrap());
    }

    #[test]
    fn improve_is_unique_and_predicted(s in stack(10)) {
        let improves: Vec<usize> = (1..=s.len())
            .filter(|&k| s.classify_flip(k).unwrap() == FlipClass::Improve)
            .collect();
        prop_assert!(improves.len() <= 1);
        prop_assert_eq!(s.improve_candidate(), improves.first().copied());
    }

    #[test]
    fn runs_tile_the_stack_maximally(s in stack(30)) {
        let d = s.decompose_runs();
        let e = s.entries();
        let mut next = 0;
        for seg in &d.segments {
            prop_assert_eq!(seg.start, next);
            prop_assert!(seg.len >= 1);
            let step = match seg.kind {
                SegmentKind::Block => 1,
                SegmentKind::Clan => -1,
                SegmentKind::Free => 0,
            };
            if step == 0 {
                prop_assert_eq!(seg.len, 1);
            } else {
                prop_assert!(seg.len >= 2);
            }
            for i in seg.start + 1..seg.start + seg.len {
                prop_assert_eq!(e[i] - e[i - 1], step);
            }
            next = seg.start + seg.len;
        }
        prop_assert_eq!(next, e.len());
        // Neighbouring segments could not be merged.
        for w in d.segments.windows(2) {
            let b = w[1].start;
            prop_assert!((e[b] - e[b - 1]).abs() != 1);
        }
    }

    #[test]
    fn encoding_round_trips(s in stack(MAX_ENCODED_N)) {
        let code = EncodedState::encode(&s).unwrap();
        prop_assert_eq!(code.decode(s.len()), s);
    }

    #[test]
    fn greedy_completion_is_deterministic_and_honest(s in stack(30)) {
        let n = s.len();
        let a = greedy_improve_completion(&s, n);
        prop_assert_eq!(&a, &greedy_improve_completion(&s, n));
        if let Some(flips) = a.sorted_flips() {
            let mut t = s.clone();
            for &k in flips {
                prop_assert_eq!(t.classify_flip(k).unwrap(), FlipClass::Improve);
                t.flip_in_place(k).unwrap();
            }
            prop_assert!(t.is_sorted());
            prop_assert_eq!(flips.len(), n - s.adjacency_count());
        }
    }

    #[test]
    fn heuristic_never_overestimates_one_step((s, k) in stack_and_flip(12)) {
        prop_assert!(heuristic(&s) <= heuristic(&s.flip(k).unwrap()) + 1);
    }

    #[test]
    fn trace_replays_and_round_trips((s, flips) in stack_and_flips(20)) {
        let t = trace_from(s.clone(), &flips).unwrap();
        prop_assert_eq!(t.states.len(), flips.len() + 1);
        prop_assert_eq!(t.first_inconsistency(), None);
        let mut end = s;
        end.apply(&flips).unwrap();
        prop_assert_eq!(t.final_state(), &end);
        let back = Trace::parse_text(&t.to_text()).unwrap();
        prop_assert_eq!(back.first_divergence(&t), None);
    }
}
