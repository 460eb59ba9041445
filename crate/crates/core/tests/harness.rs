use std::collections::BTreeMap;

use bisect_core::harness::*;
use bisect_core::numbertheory::popular_sizes;
use bisect_core::*;

fn e(i: usize) -> ElementId {
    ElementId(i)
}

#[test]
fn uniform_generator_basics() {
    assert!(gen_uniform(8, 0, 1).unwrap().is_empty());
    assert_eq!(gen_uniform(8, 50, 4).unwrap(), gen_uniform(8, 50, 4).unwrap());
    assert_ne!(gen_uniform(8, 50, 4).unwrap(), gen_uniform(8, 50, 5).unwrap());
    assert!(gen_uniform(5, 3, 0).is_err());
}

#[test]
fn uniform_pairs_are_equally_likely() {
    let inst = gen_uniform(4, 1000, 17).unwrap();
    let mut freq: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(u, v) in &inst.requests {
        assert_ne!(u, v);
        *freq.entry((u.0.min(v.0), u.0.max(v.0))).or_default() += 1;
    }
    assert_eq!(freq.len(), 6);
    for (pair, k) in freq {
        let f = k as f64 / 1000.0;
        assert!((f - 1.0 / 6.0).abs() <= 0.05, "{pair:?}: {f}");
    }
}

fn run_cb(inst: &Instance) -> RunOutput {
    let mut alg = ComponentBased::new(inst.p0.clone()).unwrap();
    run(&mut alg, inst, &RunOptions::default()).unwrap()
}

#[test]
fn merge_script_of_two_singletons() {
    let inst = gen_merge_script(2, &[2], 1, 0).unwrap();
    let out = run_cb(&inst);
    assert!(out.trace[0].merged.is_some());
    assert_eq!(out.trace.iter().filter(|r| r.merged.is_some()).count(), 1);
}

#[test]
fn merge_script_makes_pairs_popular() {
    let inst = gen_merge_script(8, &[2], 4, 3).unwrap();
    let mut tracker = ComponentTracker::new(8).unwrap();
    for &(u, v) in &inst.requests {
        tracker.ingest(u, v, &inst.p0).unwrap();
    }
    let set = tracker.components();
    assert_eq!(set.sizes(), vec![2, 2, 2, 2]);
    assert_eq!(popular_sizes(&set, 4, 3).into_iter().collect::<Vec<_>>(), vec![2]);
}

#[test]
fn merge_script_can_force_epoch_end() {
    let inst = gen_merge_script(4, &[3], 2, 0).unwrap();
    let out = run_cb(&inst);
    assert_eq!(out.report.epochs_finished, 1);
    assert!(out.trace[1].epoch_end);
    assert!(gen_merge_script(8, &[2, 3], 4, 0).is_err());
}

#[test]
fn adaptive_cut_against_static_always_pays() {
    let mut alg = StaticPartition::new(Partition::halves(8).unwrap());
    let inst = gen_adaptive_cut(&mut alg, 25, None).unwrap();
    let mut fresh = StaticPartition::new(Partition::halves(8).unwrap());
    let out = run(&mut fresh, &inst, &RunOptions::default()).unwrap();
    assert_eq!(out.report.total_cost, 25);
}

#[test]
fn adaptive_cut_against_cb() {
    let mut alg = ComponentBased::new(Partition::halves(4).unwrap()).unwrap();
    let inst = gen_adaptive_cut(&mut alg, 3, None).unwrap();
    let out = run_cb(&inst);
    assert!(out.report.total_cost >= 3);
    assert!(out.trace.iter().all(|r| r.crossed));
}

#[test]
fn adaptive_cut_needs_replay_seed_for_icb() {
    let p0 = Partition::halves(8).unwrap();
    let mut icb = build_algorithm(AlgorithmKind::Icb, p0.clone(), None, 5).unwrap();
    assert!(matches!(
        gen_adaptive_cut(icb.as_mut(), 10, None),
        Err(BisectError::Usage(_))
    ));
    let inst = gen_adaptive_cut(icb.as_mut(), 10, Some(5)).unwrap();
    assert_eq!(inst.len(), 10);
}

#[test]
fn static_on_same_side_requests_costs_nothing() {
    let p0 = Partition::halves(6).unwrap();
    let inst = Instance::new(p0.clone(), vec![(e(0), e(1)), (e(1), e(2)), (e(3), e(5))]).unwrap();
    let mut alg = StaticPartition::new(p0);
    let out = run(&mut alg, &inst, &RunOptions::default()).unwrap();
    assert_eq!(out.report.total_cost, 0);
    assert!(out.report.verdicts.values().all(|v| *v == Verdict::Skipped));
}

#[test]
fn ledger_adds_up() {
    let inst = gen_uniform(16, 200, 8).unwrap();
    for kind in [AlgorithmKind::Icb, AlgorithmKind::Cb, AlgorithmKind::Static] {
        let mut alg = build_algorithm(kind, inst.p0.clone(), None, 2).unwrap();
        let out = run(alg.as_mut(), &inst, &RunOptions::default()).unwrap();
        let r = &out.report;
        assert_eq!(r.total_cost, r.service_cost + r.switching_cost + r.rebalancing_cost);
        let from_rows: u64 = out
            .rows
            .iter()
            .map(|x| (x.service as usize + x.switching + x.rebalancing) as u64)
            .sum();
        assert_eq!(from_rows, r.total_cost);
        assert_eq!(r.epochs.iter().map(|e| e.cost).sum::<u64>(), r.total_cost);
        assert!(r.movement_cost <= r.switching_cost + r.rebalancing_cost);
        assert_eq!(r.epochs_finished, epoch_lower_bound(&out.trace));
    }
}

#[test]
fn default_parameters_skip_lemma_monitors() {
    let inst = gen_uniform(16, 100, 1).unwrap();
    let mut alg = build_algorithm(AlgorithmKind::Icb, inst.p0.clone(), None, 1).unwrap();
    let out = run(alg.as_mut(), &inst, &RunOptions::default()).unwrap();
    let v = &out.report.verdicts;
    assert_eq!(v["pivotal_steps"], Verdict::Skipped);
    assert_eq!(v["post_step_balance"], Verdict::Skipped);
    assert_eq!(v["preservation"], Verdict::Pass);
    assert_eq!(v["epoch_length"], Verdict::Pass);
}

/// Claims to preserve components but never moves.
struct Stubborn(Partition);

impl OnlineAlgorithm for Stubborn {
    fn name(&self) -> &'static str {
        "stubborn"
    }
    fn n(&self) -> usize {
        self.0.n()
    }
    fn partition(&self) -> &Partition {
        &self.0
    }
    fn step(&mut self, u: ElementId, v: ElementId) -> Result<StepOutcome> {
        let mut inner = StaticPartition::new(self.0.clone());
        inner.step(u, v)
    }
    fn is_component_preserving(&self) -> bool {
        true
    }
    fn is_randomized(&self) -> bool {
        false
    }
}

#[test]
fn monitors_catch_a_split_component() {
    let p0 = Partition::halves(4).unwrap();
    let inst = Instance::new(p0.clone(), vec![(e(0), e(1)), (e(0), e(2))]).unwrap();

    let out = run(&mut Stubborn(p0.clone()), &inst, &RunOptions::default()).unwrap();
    assert_eq!(out.report.verdicts["preservation"], Verdict::Fail);
    assert_eq!(out.report.violations[0].step, 2);

    let strict = RunOptions {
        strict: true,
        ..RunOptions::default()
    };
    match run(&mut Stubborn(p0), &inst, &strict) {
        Err(BisectError::Monitor { lemma, step, witness }) => {
            assert_eq!(lemma, "preservation");
            assert_eq!(step, 2);
            assert!(witness.contains("0011"), "{witness}");
        }
        other => panic!("expected a monitor failure, got {other:?}"),
    }
}

#[test]
fn csv_has_fixed_columns() {
    let inst = gen_uniform(8, 5, 1).unwrap();
    let mut alg = ComponentBased::new(inst.p0.clone()).unwrap();
    let out = run(&mut alg, &inst, &RunOptions::default()).unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "step,epoch,stage,service,switching,rebalancing,g,regular,pivotal,rebalanced,components,epochs_finished"
    );
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn trace_round_trips() {
    let inst = gen_merge_script(8, &[2, 4, 8], 12, 6).unwrap();
    let mut alg = build_algorithm(AlgorithmKind::Icb, inst.p0.clone(), None, 3).unwrap();
    let out = run(alg.as_mut(), &inst, &RunOptions::default()).unwrap();
    let mut buf = Vec::new();
    out.write_trace(&mut buf).unwrap();
    let back = bisect_core::trace::read_trace(&buf[..]).unwrap();
    assert_eq!(back, out.trace);
    assert_eq!(Instance::from_trace(inst.p0.clone(), &back).unwrap(), inst);
    let first: serde_json::Value = serde_json::from_slice(buf.split(|b| *b == b'\n').next().unwrap()).unwrap();
    for key in ["t", "u", "v", "crossed", "merged", "epoch", "stage", "epoch_end"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn sweep_keeps_job_order() {
    let jobs: Vec<SweepJob> = (0..4)
        .map(|seed| SweepJob {
            algorithm: AlgorithmKind::Cb,
            params: None,
            generator: GeneratorSpec {
                kind: GeneratorKind::UniformRandom,
                n: 8,
                t: 40,
                seed,
            },
            timeline: vec![],
            alg_seed: 0,
        })
        .collect();
    let reports = sweep(&jobs, &RunOptions::default());
    for (job, r) in jobs.iter().zip(&reports) {
        let alone = run_job(job, &RunOptions::default()).unwrap().report;
        assert_eq!(r.as_ref().unwrap(), &alone);
    }
}
