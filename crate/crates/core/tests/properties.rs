use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::SeedableRng;

use stepwise_core::serial::{exists_non_ready, relaxed_non_ready};
use stepwise_core::testing::{random_confluent_set, random_state, random_task, TaskShape};
use stepwise_core::{
    check_exists, check_exists_fixpoint, check_forall, check_relaxed, invalidation_graph,
    oracle_serializable, read_facts, write_facts, ActionId, Semantics,
};

fn shape() -> TaskShape {
    TaskShape { max_fluents: 6, max_domain: 3, max_actions: 6, max_conditions: 3, max_goals: 2 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn successor_matches_definition(seed in any::<u64>()) {
        let mut rng = SmallRng::seed_from_u64(seed);
        let t = random_task(&mut rng, shape());
        let s = random_state(&mut rng, &t);
        for a in t.action_ids() {
            let act = &t.actions()[a.index()];
            match t.successor(&s, a).unwrap() {
                Some(next) => {
                    prop_assert!(act.pre.holds_in(&s));
                    for f in t.fluent_ids() {
                        let want = act.post.get(f).unwrap_or(s.get(f));
                        prop_assert_eq!(next.get(f), want);
                    }
                }
                None => prop_assert!(!act.pre.holds_in(&s)),
            }
        }
    }

    #[test]
    fn apply_sequence_splits(seed in any::<u64>(), cut in 0usize..6) {
        let mut rng = SmallRng::seed_from_u64(seed);
        let t = random_task(&mut rng, shape());
        let s = random_state(&mut rng, &t);
        let seq: Vec<ActionId> = (0..5).map(|i| ActionId(((seed >> (i * 3)) as u32) % t.actions().len() as u32)).collect();
        let cut = cut.min(seq.len());
        if let Some(whole) = t.apply_sequence(&s, &seq).unwrap() {
            let mid = t.apply_sequence(&s, &seq[..cut]).unwrap().unwrap();
            prop_assert_eq!(t.apply_sequence(&mid, &seq[cut..]).unwrap(), Some(whole));
        }
    }

    #[test]
    fn confluence_is_downward_closed(seed in any::<u64>()) {
        let mut rng = SmallRng::seed_from_u64(seed);
        let t = random_task(&mut rng, shape());
        let set = random_confluent_set(&mut rng, &t, 6);
        prop_assert!(t.is_confluent(&set));
        for mask in 0u32..(1 << set.len()) {
            let sub: Vec<ActionId> = set.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect();
            prop_assert!(t.is_confluent(&sub));
        }
    }

    #[test]
    fn facts_round_trip(seed in any::<u64>()) {
        let mut rng = SmallRng::seed_from_u64(seed);
        let t = random_task(&mut rng, shape());
        let text = write_facts(&t);
        let back = read_facts(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(write_facts(&back), text);
    }
}

/// Checkers against the permutation oracle, the implication chain between
/// the three semantics, and soundness of every returned witness.
#[test]
fn checkers_agree_with_oracle() {
    let mut rng = SmallRng::seed_from_u64(0x5e7_1a11);
    let mut accepted = [0usize; 3];
    for _ in 0..10_000 {
        let t = random_task(&mut rng, shape());
        let s = random_state(&mut rng, &t);
        let set = random_confluent_set(&mut rng, &t, 6);

        let fa = check_forall(&t, &s, &set);
        let (ex, ex_w) = check_exists(&t, &s, &set);
        let (fx, fx_w) = check_exists_fixpoint(&t, &s, &set);
        let (rx, rx_w) = check_relaxed(&t, &s, &set);

        assert_eq!(fa, oracle_serializable(&t, &s, &set, Semantics::Forall).unwrap());
        assert_eq!(ex, oracle_serializable(&t, &s, &set, Semantics::Exists).unwrap());
        assert_eq!(rx, oracle_serializable(&t, &s, &set, Semantics::Relaxed).unwrap());
        assert_eq!((ex, &ex_w), (fx, &fx_w));
        assert_eq!(ex, exists_non_ready(&t, &s, &set).is_empty() && set.iter().all(|&a| t.actions()[a.index()].applicable(&s)));
        assert_eq!(rx, relaxed_non_ready(&t, &s, &set).is_empty());
        assert!(!fa || ex);
        assert!(!ex || rx);
        if ex {
            assert!(invalidation_graph(&t, &set).is_acyclic());
        }

        let update = t.parallel_update(&s, &set);
        for w in [ex_w, rx_w].into_iter().flatten() {
            let mut sorted = w.clone();
            sorted.sort();
            assert_eq!(sorted, set);
            assert_eq!(t.apply_sequence(&s, &w).unwrap(), Some(update.clone()));
        }
        accepted[0] += fa as usize;
        accepted[1] += ex as usize;
        accepted[2] += rx as usize;
    }
    // The sample must exercise both verdicts of every checker.
    assert!(accepted.iter().all(|&n| n > 500 && n < 9_500), "{accepted:?}");
}
