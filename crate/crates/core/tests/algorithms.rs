use bisect_core::algorithms::ParamOverrides;
use bisect_core::numbertheory::{Finite, Infinite};
use bisect_core::*;

fn e(i: usize) -> ElementId {
    ElementId(i)
}

#[test]
fn classification_follows_ladder() {
    assert_eq!(classify_step((2, 4), Finite(2), 5), StepClass::Regular);
    assert_eq!(classify_step((2, 3), Finite(2), 5), StepClass::Irregular);
    assert_eq!(classify_step((1, 1), Infinite, 5), StepClass::Irregular);
    assert_eq!(classify_step((6, 2), Finite(2), 5), StepClass::Irregular);
}

#[test]
fn default_parameters() {
    // q is the smallest integer with q^7 >= n.
    let p = IcbParameters::defaults(128).unwrap();
    assert_eq!((p.q, p.w), (2, 66));
    let p = IcbParameters::defaults(130).unwrap();
    assert_eq!((p.q, p.w), (3, 326));
    // n^(13/14) / sqrt(log2 n) at n = 2112 is about 367.8.
    let p = IcbParameters::defaults(2112).unwrap();
    assert_eq!((p.q, p.d), (3, 368));
    assert!(!p.is_valid());
    assert!(IcbParameters::defaults(7).is_err());
}

#[test]
fn override_tuple_is_exactly_valid() {
    let p = IcbParameters::with_overrides(
        2112,
        ParamOverrides {
            q: Some(2),
            w: Some(66),
            d: Some(264),
        },
    )
    .unwrap();
    assert!(p.is_valid());
    assert!(p.n >= 4 * p.d);
    assert_eq!(p.d, 2 * p.q * p.w);
    let v = IcbParameters { d: 263, ..p }.violations();
    assert_eq!(v, ["d >= 2qw fails: d = 263 < 2qw = 264"]);
    let v = IcbParameters { d: 529, ..p }.violations();
    assert_eq!(v, ["n >= 4d fails: n = 2112 < 4d = 2116"]);
}

#[test]
fn w_follows_overridden_q() {
    let p = IcbParameters::with_overrides(
        64,
        ParamOverrides {
            q: Some(3),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(p.w, 4 * 81 + 2);
}

#[test]
fn cb_cross_merge_from_balanced_start() {
    let p0 = Partition::halves(4).unwrap();
    let mut cb = ComponentBased::new(p0).unwrap();
    let out = cb.step(e(0), e(2)).unwrap();
    assert_eq!((out.service, out.switching, out.rebalancing), (1, 2, 0));
    assert_eq!(out.movement, 2);
    let p = cb.partition();
    assert_eq!(p.side(e(0)), p.side(e(2)));
}

#[test]
fn cb_same_side_merge_is_free() {
    let mut cb = ComponentBased::new(Partition::halves(4).unwrap()).unwrap();
    let out = cb.step(e(0), e(1)).unwrap();
    assert_eq!(out.cost(), 0);
    assert!(out.merge.is_some());
}

#[test]
fn cb_epoch_ends_when_nothing_preserves() {
    // {0,1} | {2,3}, then 0-2 forces {0,2,?}: sizes become {2,1,1} then {3,1}.
    let mut cb = ComponentBased::new(Partition::halves(4).unwrap()).unwrap();
    cb.step(e(0), e(1)).unwrap();
    let before = cb.partition().clone();
    let out = cb.step(e(1), e(2)).unwrap();
    assert!(out.epoch_ended);
    assert_eq!(out.service, 1);
    assert_eq!(cb.partition(), &before);
    assert_eq!(out.components, 4);
}

#[test]
fn static_never_moves() {
    let mut st = StaticPartition::new(Partition::halves(6).unwrap());
    assert_eq!(st.step(e(0), e(5)).unwrap().cost(), 1);
    assert_eq!(st.step(e(0), e(1)).unwrap().cost(), 0);
    let total: usize = (0..10).map(|_| st.step(e(2), e(3)).unwrap().cost()).sum();
    assert_eq!(total, 10);
    assert!(st.step(e(1), e(1)).is_err());
}

fn small_icb(seed: u64) -> Icb {
    let params = IcbParameters::with_overrides(
        8,
        ParamOverrides {
            q: Some(2),
            w: Some(2),
            d: Some(1),
        },
    )
    .unwrap();
    Icb::new(params, Partition::halves(8).unwrap(), seed).unwrap()
}

#[test]
fn icb_same_side_merge_keeps_partition() {
    let mut icb = small_icb(1);
    let p0 = icb.partition().clone();
    let out = icb.step(e(0), e(1)).unwrap();
    assert_eq!(out.cost(), 0);
    assert_eq!(icb.partition(), &p0);
    assert_eq!(out.classification, Some(StepClass::Regular));
}

#[test]
fn icb_estimator_reacts_to_popular_pairs() {
    let mut icb = small_icb(1);
    icb.step(e(0), e(1)).unwrap();
    // Two components of size 2 make size 2 popular with w = 2; size 1 has
    // 4 left and stays popular, so g = gcd{1, 2} = 1.
    let out = icb.step(e(4), e(5)).unwrap();
    assert_eq!(out.g_after, Finite(1));
    icb.step(e(2), e(3)).unwrap();
    // Size-1 count drops to 2, still popular.
    let out = icb.step(e(6), e(7)).unwrap();
    // All four components have size 2 now: B = {2}, g = 2.
    assert_eq!(out.g_after, Finite(2));
    assert!(out.pivotal);
}

#[test]
fn icb_epoch_ends_and_resets() {
    let mut icb = small_icb(3);
    let mut ended = false;
    // Chain everything on the left plus one right element: sizes {5, 1, 1, 1}.
    for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 4)] {
        let out = icb.step(e(u), e(v)).unwrap();
        ended |= out.epoch_ended;
        if out.epoch_ended {
            assert_eq!(out.stage_after, Stage::First);
            assert_eq!(out.g_after, Finite(1));
        }
    }
    assert!(ended);
    assert_eq!(icb.epoch(), 1);
    assert_eq!(icb.components().len(), 8);
}

#[test]
fn icb_replays_identically_per_seed() {
    let run = |seed| {
        let mut icb = small_icb(seed);
        let reqs = [(0, 4), (1, 5), (2, 6), (0, 1), (3, 7), (2, 3), (4, 6)];
        reqs.iter()
            .map(|&(u, v)| icb.step(e(u), e(v)).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(9), run(9));
}

#[test]
fn factory_builds_by_name() {
    let p0 = Partition::halves(8).unwrap();
    for name in ["icb", "cb", "static"] {
        let kind: AlgorithmKind = name.parse().unwrap();
        let alg = build_algorithm(kind, p0.clone(), None, 0).unwrap();
        assert_eq!(alg.name(), name);
    }
    assert!("greedy".parse::<AlgorithmKind>().is_err());
    let blob = serde_json::json!({"q": 2, "w": 2, "d": 1});
    let alg = build_algorithm(AlgorithmKind::Icb, p0.clone(), Some(&blob), 0).unwrap();
    assert_eq!(alg.icb_parameters().unwrap().w, 2);
    let bad = serde_json::json!({"q": 2, "x": 1});
    assert!(build_algorithm(AlgorithmKind::Icb, p0, Some(&bad), 0).is_err());
}
