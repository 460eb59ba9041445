use bisect_core::brute;
use bisect_core::harness::{gen_uniform, run, RunOptions, Verdict};
use bisect_core::numbertheory::{r_ladder, EstimatorState, ExtendedPositive};
use bisect_core::oracle::{self, Balance, PreservingCounter};
use bisect_core::*;
use proptest::prelude::*;

fn sizes_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=6, 1..=10).prop_filter("even total", |v| v.iter().sum::<usize>() % 2 == 0)
}

fn partition_strategy(n: usize) -> impl Strategy<Value = Partition> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(move |order| Partition::from_left_set(n, &order[..n / 2]).unwrap())
}

fn set_and_prev() -> impl Strategy<Value = (ComponentSet, Partition)> {
    sizes_strategy().prop_flat_map(|sizes| {
        let set = ComponentSet::from_sizes(&sizes).unwrap();
        let n = set.n();
        (Just(set), partition_strategy(n))
    })
}

fn balance_strategy() -> impl Strategy<Value = Balance> {
    (0usize..5, 1usize..=5, 0usize..=3).prop_map(|(g, q, l)| {
        let g = if g == 0 {
            ExtendedPositive::Infinite
        } else {
            ExtendedPositive::Finite(g)
        };
        Balance::new(g, q, l)
    })
}

proptest! {
    #[test]
    fn dist_is_even_and_metric(a in partition_strategy(10), b in partition_strategy(10), c in partition_strategy(10)) {
        let ab = a.dist(&b).unwrap();
        prop_assert_eq!(ab % 2, 0);
        prop_assert_eq!(ab, b.dist(&a).unwrap());
        prop_assert!(a.dist(&c).unwrap() <= ab + b.dist(&c).unwrap());
    }

    #[test]
    fn closest_matches_enumeration((set, prev) in set_and_prev()) {
        let got = oracle::closest_preserving(&set, &prev).unwrap();
        prop_assert_eq!(got.as_ref().map(|g| g.1), brute::min_dist(&set, &prev));
        if let Some((p, _)) = got {
            prop_assert!(p.preserves(&set));
        }
    }

    #[test]
    fn balanced_matches_enumeration((set, prev) in set_and_prev(), balance in balance_strategy()) {
        prop_assert_eq!(
            oracle::exists_balanced(&set, &balance),
            !brute::balanced_partitions(&set, &balance).is_empty()
        );
        let best = oracle::best_balanced(&set, &balance, &prev).unwrap();
        prop_assert_eq!(
            best.as_ref().map(|p| p.dist(&prev).unwrap()),
            brute::min_balanced_dist(&set, &balance, &prev)
        );
        if let Some(p) = best {
            prop_assert!(balance.admits(&set, &p));
        }
    }

    #[test]
    fn count_matches_enumeration(sizes in sizes_strategy()) {
        let set = ComponentSet::from_sizes(&sizes).unwrap();
        let counter = PreservingCounter::new(&set);
        prop_assert_eq!(counter.count().0, brute::count(&set).into());
        prop_assert_eq!(counter.is_empty(), !oracle::exists_preserving(&set));
    }

    #[test]
    fn estimator_ladders_shrink(q in 1usize..12, steps in prop::collection::vec(prop::collection::btree_set(1usize..12, 0..5), 1..8)) {
        let mut state = EstimatorState::new(q);
        for popular in steps {
            let next = state.update(&popular);
            let old: std::collections::BTreeSet<_> = r_ladder(state.g, q).into_iter().collect();
            prop_assert!(r_ladder(next.g, q).iter().all(|x| old.contains(x)));
            state = next;
        }
    }

    #[test]
    fn tracker_conserves_mass(reqs in prop::collection::vec((0usize..12, 0usize..12), 0..40)) {
        let p = Partition::halves(12).unwrap();
        let mut tracker = ComponentTracker::new(12).unwrap();
        for (u, v) in reqs.into_iter().filter(|(u, v)| u != v) {
            tracker.ingest(ElementId(u), ElementId(v), &p).unwrap();
            let set = tracker.components();
            prop_assert_eq!(set.sizes().iter().sum::<usize>(), 12);
            prop_assert!(tracker.merges() <= 11);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn preserving_runs_keep_invariants(seed in 0u64..1_000, half in 2usize..=8, t in 0usize..80) {
        let inst = gen_uniform(2 * half, t, seed).unwrap();
        for kind in [AlgorithmKind::Icb, AlgorithmKind::Cb] {
            let mut alg = build_algorithm(kind, inst.p0.clone(), None, seed).unwrap();
            let out = run(alg.as_mut(), &inst, &RunOptions::default()).unwrap();
            for name in ["preservation", "epoch_length", "step_cost", "epoch_cost"] {
                prop_assert_eq!(out.report.verdicts[name], Verdict::Pass, "{} {}", kind, name);
            }
            let r = &out.report;
            prop_assert_eq!(r.total_cost, r.service_cost + r.switching_cost + r.rebalancing_cost);
        }
    }
}
