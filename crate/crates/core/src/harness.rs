//! Request generators, the simulation loop with online lemma monitors, and
//! CSV / JSON output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    build_algorithm, AlgorithmKind, IcbParameters, OnlineAlgorithm, Stage, StepClass, StepOutcome,
};
use crate::error::{BisectError, Result};
use crate::model::{check_universe, ComponentTracker, ElementId, Partition};
use crate::numbertheory::{ext_divides, ExtendedPositive};
use crate::opt::Instance;
use crate::oracle::Balance;
use crate::trace::TraceRecord;

// ---------------------------------------------------------------------------
// generators

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    UniformRandom,
    AdaptiveCut,
    MergeScript,
}

impl FromStr for GeneratorKind {
    type Err = BisectError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform_random" => Ok(GeneratorKind::UniformRandom),
            "adaptive" | "adaptive_cut" => Ok(GeneratorKind::AdaptiveCut),
            "merge" | "merge_script" => Ok(GeneratorKind::MergeScript),
            other => Err(BisectError::usage(format!(
                "unknown generator {other:?} (expected uniform, adaptive_cut or merge_script)"
            ))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::UniformRandom => "uniform_random",
            GeneratorKind::AdaptiveCut => "adaptive_cut",
            GeneratorKind::MergeScript => "merge_script",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
}

fn random_pair<R: Rng>(n: usize, rng: &mut R) -> (ElementId, ElementId) {
    let u = rng.gen_range(0..n);
    let mut v = rng.gen_range(0..n - 1);
    if v >= u {
        v += 1;
    }
    (ElementId(u), ElementId(v))
}

/// `t` independent uniformly random pairs of distinct elements.
pub fn gen_uniform(n: usize, t: usize, seed: u64) -> Result<Instance> {
    check_universe(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requests = (0..t).map(|_| random_pair(n, &mut rng)).collect();
    Instance::new(Partition::halves(n)?, requests)
}

/// Doubling block sizes `2, 4, 8, ...` up to `n`.
pub fn doubling_timeline(n: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |&b| Some(b * 2))
        .take_while(|&b| b <= n)
        .collect()
}

/// Hierarchical merges: elements are shuffled, then for each block size `b`
/// in `timeline` consecutive runs of `b` elements are joined into one
/// component. Each block size must be a multiple of the previous one. Once
/// the script is exhausted the stream continues with uniform requests.
pub fn gen_merge_script(n: usize, timeline: &[usize], t: usize, seed: u64) -> Result<Instance> {
    check_universe(n)?;
    let mut prev = 1;
    for &b in timeline {
        if b <= prev || b % prev != 0 {
            return Err(BisectError::usage(format!(
                "block size {b} must be a proper multiple of {prev}"
            )));
        }
        prev = b;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut requests = Vec::with_capacity(t);
    let mut prev = 1;
    'script: for &b in timeline {
        let mut links = Vec::new();
        for start in (0..n).step_by(b) {
            let end = (start + b).min(n);
            let mut sub = start + prev;
            while sub < end {
                let a = order[rng.gen_range(start..sub)];
                let c = order[rng.gen_range(sub..(sub + prev).min(end))];
                links.push((ElementId(a), ElementId(c)));
                sub += prev;
            }
        }
        prev = b;
        for link in links {
            if requests.len() == t {
                break 'script;
            }
            requests.push(link);
        }
    }
    while requests.len() < t {
        requests.push(random_pair(n, &mut rng));
    }
    Instance::new(Partition::halves(n)?, requests)
}

/// Drives `alg` with requests that straddle its current cut, joining the
/// smallest component on each side. The algorithm is consumed; replaying
/// the returned instance on a fresh copy of a deterministic algorithm (or a
/// randomized one with the same recorded seed) reproduces the run.
pub fn gen_adaptive_cut(
    alg: &mut dyn OnlineAlgorithm,
    t: usize,
    replay_seed: Option<u64>,
) -> Result<Instance> {
    if alg.is_randomized() && replay_seed.is_none() {
        return Err(BisectError::usage(format!(
            "adaptive_cut against randomized algorithm {} needs a fixed replay seed",
            alg.name()
        )));
    }
    let n = alg.n();
    let p0 = alg.partition().clone();
    let mut tracker = ComponentTracker::new(n)?;
    let mut requests = Vec::with_capacity(t);
    for _ in 0..t {
        let p = alg.partition();
        let mut best: [Option<(usize, usize)>; 2] = [None, None];
        for v in 0..n {
            let side = p.side(ElementId(v)).index();
            let size = tracker.component_size(ElementId(v));
            if best[side].is_none_or(|(s, _)| size < s) {
                best[side] = Some((size, v));
            }
        }
        let (u, v) = match best {
            [Some((_, a)), Some((_, b))] => (ElementId(a), ElementId(b)),
            _ => unreachable!("balanced partitions have both sides"),
        };
        let prev = p.clone();
        let out = alg.step(u, v)?;
        tracker.ingest(u, v, &prev)?;
        if out.epoch_ended {
            tracker.reset_epoch();
        }
        requests.push((u, v));
    }
    Instance::new(p0, requests)
}

// ---------------------------------------------------------------------------
// monitors

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Preservation,
    EpochLength,
    StepCost,
    EpochCost,
    DivisibilityChain,
    PivotalSteps,
    RegularSwitching,
    IrregularSteps,
    BetweenRebalancing,
    PostStepBalance,
}

impl Lemma {
    pub const ALL: [Lemma; 10] = [
        Lemma::Preservation,
        Lemma::EpochLength,
        Lemma::StepCost,
        Lemma::EpochCost,
        Lemma::DivisibilityChain,
        Lemma::PivotalSteps,
        Lemma::RegularSwitching,
        Lemma::IrregularSteps,
        Lemma::BetweenRebalancing,
        Lemma::PostStepBalance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Preservation => "preservation",
            Lemma::EpochLength => "epoch_length",
            Lemma::StepCost => "step_cost",
            Lemma::EpochCost => "epoch_cost",
            Lemma::DivisibilityChain => "divisibility_chain",
            Lemma::PivotalSteps => "pivotal_steps",
            Lemma::RegularSwitching => "regular_switching",
            Lemma::IrregularSteps => "irregular_steps",
            Lemma::BetweenRebalancing => "between_rebalancing",
            Lemma::PostStepBalance => "post_step_balance",
        }
    }

    /// Holds for every component-preserving algorithm, whatever its parameters.
    fn is_structural(self) -> bool {
        matches!(
            self,
            Lemma::Preservation | Lemma::EpochLength | Lemma::StepCost | Lemma::EpochCost
        )
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = BisectError;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| BisectError::usage(format!("unknown monitor {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub lemma: Lemma,
    /// 1-based request index.
    pub step: usize,
    pub epoch: usize,
    pub witness: String,
}

/// Per-stage counters for the ICB lemmas.
#[derive(Debug, Clone, Default)]
struct StageState {
    pivotal: usize,
    irregular_small: usize,
    irregular_large: usize,
    /// `g` before the previous merge step of this epoch.
    last_g_before: Option<ExtendedPositive>,
    /// `(g, Σ(1 + switching))` since the last rebalance.
    since_rebalance: Option<(ExtendedPositive, usize)>,
}

struct Monitors {
    enabled: Vec<Lemma>,
    active: BTreeMap<Lemma, bool>,
    violations: Vec<Violation>,
    params: Option<IcbParameters>,
    n: usize,
    epoch_merges: usize,
    epoch_actual: usize,
    stage: StageState,
}

impl Monitors {
    fn new(enabled: &[Lemma], alg: &dyn OnlineAlgorithm) -> Self {
        let params = alg.icb_parameters().copied();
        let lemma_ok = params.is_some_and(|p| p.is_valid());
        let active: BTreeMap<Lemma, bool> = enabled
            .iter()
            .map(|&l| {
                let on = if l.is_structural() {
                    alg.is_component_preserving()
                } else {
                    lemma_ok
                };
                (l, on)
            })
            .collect();
        if let Some(p) = params.filter(|_| !lemma_ok) {
            let skipped: Vec<_> = enabled.iter().filter(|l| !l.is_structural()).map(|l| l.name()).collect();
            if !skipped.is_empty() {
                warn!("skipping monitors {}: {}", skipped.join(", "), p.violations().join("; "));
            }
        }
        Monitors {
            enabled: enabled.to_vec(),
            active,
            violations: Vec::new(),
            params,
            n: alg.n(),
            epoch_merges: 0,
            epoch_actual: 0,
            stage: StageState::default(),
        }
    }

    fn on(&self, l: Lemma) -> bool {
        self.active.get(&l).copied().unwrap_or(false)
    }

    fn check(&mut self, l: Lemma, ok: bool, step: usize, epoch: usize, witness: impl FnOnce() -> String) {
        if self.on(l) && !ok {
            self.violations.push(Violation {
                lemma: l,
                step,
                epoch,
                witness: witness(),
            });
        }
    }

    fn verdicts(&self) -> BTreeMap<String, Verdict> {
        self.enabled
            .iter()
            .map(|&l| {
                let v = if !self.on(l) {
                    Verdict::Skipped
                } else if self.violations.iter().any(|x| x.lemma == l) {
                    Verdict::Fail
                } else {
                    Verdict::Pass
                };
                (l.name().to_string(), v)
            })
            .collect()
    }

    /// Examines one step. `tracker` already reflects the request (and has
    /// not yet been reset if the epoch ended); `merged` is its own verdict
    /// on whether the request joined two components.
    fn observe(
        &mut self,
        step: usize,
        out: &StepOutcome,
        merged: bool,
        before: &Partition,
        after: &Partition,
        tracker: &ComponentTracker,
    ) {
        let n = self.n;
        let epoch = out.epoch;
        let actual = out.actual_cost();

        if merged {
            self.epoch_merges += 1;
        }
        self.epoch_actual += actual;

        self.check(Lemma::StepCost, actual <= n + 1, step, epoch, || {
            format!("service {} + movement {} > n + 1 = {}", out.service, out.movement, n + 1)
        });
        let merges = self.epoch_merges;
        self.check(Lemma::EpochLength, merges < n, step, epoch, || {
            format!("{merges} merges in epoch, limit n - 1 = {}", n - 1)
        });
        let spent = self.epoch_actual;
        self.check(Lemma::EpochCost, spent <= (n - 1) * (n + 1), step, epoch, || {
            format!("epoch cost {spent} > (n-1)(n+1) = {}", (n - 1) * (n + 1))
        });
        if self.on(Lemma::Preservation) && (merged || before != after) && !out.epoch_ended {
            let split = tracker.split_by(after);
            self.check(Lemma::Preservation, split.is_none(), step, epoch, || {
                format!("partition {after} splits component {}", split.expect("violation"))
            });
        }
        if out.movement > 0 || before != after {
            let d = before.dist(after).unwrap_or(usize::MAX);
            self.check(Lemma::StepCost, d == out.movement, step, epoch, || {
                format!("reported movement {} but partitions differ in {d}", out.movement)
            });
        }

        if let (Some(p), Some(merge)) = (self.params, out.merge) {
            self.observe_icb(step, out, &merge, p, after, tracker);
        }

        if out.epoch_ended {
            self.epoch_merges = 0;
            self.epoch_actual = 0;
            self.stage = StageState::default();
        } else if out.stage_before != out.stage_after {
            self.stage = StageState::default();
        }
    }

    fn observe_icb(
        &mut self,
        step: usize,
        out: &StepOutcome,
        merge: &crate::model::MergeEvent,
        p: IcbParameters,
        after: &Partition,
        tracker: &ComponentTracker,
    ) {
        let epoch = out.epoch;
        if out.stage_before != Stage::First {
            return;
        }
        let q = p.q;
        let last_g = self.stage.last_g_before.replace(out.g_before);

        if !out.epoch_ended {
            let (a, b) = (out.g_before, out.g_after);
            self.check(Lemma::DivisibilityChain, ext_divides(a, b), step, epoch, || {
                format!("g went from {a} to {b}")
            });
        }

        if out.pivotal {
            self.stage.pivotal += 1;
            let k = self.stage.pivotal;
            let ok = (1u128 << (k - 1).min(127)) <= q as u128;
            self.check(Lemma::PivotalSteps, ok, step, epoch, || {
                format!("{k} pivotal steps in one first stage, q = {q}")
            });
        }

        if out.classification == Some(StepClass::Regular)
            && merge.step > 1
            && last_g == Some(out.g_before)
            && !out.epoch_ended
        {
            let limit = 4 * q.pow(6);
            let s = out.switching;
            self.check(Lemma::RegularSwitching, s <= limit, step, epoch, || {
                format!("regular step switching {s} > 4q^6 = {limit}")
            });
        }

        if out.classification == Some(StepClass::Irregular) {
            if merge.result_size <= q {
                self.stage.irregular_small += 1;
            } else {
                self.stage.irregular_large += 1;
            }
            let (small, large) = (self.stage.irregular_small, self.stage.irregular_large);
            let (ls, ll) = (q * q * p.w, p.n / q);
            self.check(
                Lemma::IrregularSteps,
                small <= ls && large <= ll && small + large <= ls + ll,
                step,
                epoch,
                || format!("irregular steps: {small} small (limit {ls}), {large} large (limit {ll})"),
            );
        }

        if out.epoch_ended || out.stage_after != Stage::First {
            return;
        }

        let add = 1 + out.switching;
        if out.rebalanced {
            if let Some((g, sum)) = self.stage.since_rebalance {
                let total = sum + add;
                if g == out.g_after {
                    self.check(Lemma::BetweenRebalancing, 2 * total >= p.d, step, epoch, || {
                        format!("only {total} switching+steps between rebalances with g = {g}, need d/2 = {}", p.d as f64 / 2.0)
                    });
                }
            }
            self.stage.since_rebalance = Some((out.g_after, 0));
        } else if let Some((_, sum)) = self.stage.since_rebalance.as_mut() {
            *sum += add;
        }

        if self.on(Lemma::PostStepBalance) {
            let counted = Balance::new(out.g_after, q, p.d);
            let counts = tracker.side_counts(after, |size| counted.counts(size));
            self.check(
                Lemma::PostStepBalance,
                counts.iter().all(|&c| c >= p.d),
                step,
                epoch,
                || format!("g = {}: {} / {} counted components per side, need {}", out.g_after, counts[0], counts[1], p.d),
            );
        }
    }
}

// ---------------------------------------------------------------------------
// run

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub requests: usize,
    pub merges: usize,
    /// Service plus switching plus rebalancing.
    pub cost: u64,
    /// Service plus movement.
    pub actual_cost: u64,
    pub first_stage_merges: usize,
    pub pivotal: usize,
    pub irregular: usize,
    pub rebalances: usize,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub n: usize,
    pub requests: usize,
    pub params: Option<IcbParameters>,
    pub total_cost: u64,
    pub service_cost: u64,
    pub switching_cost: u64,
    pub rebalancing_cost: u64,
    pub movement_cost: u64,
    pub epochs_finished: u64,
    pub epochs: Vec<EpochSummary>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub violations: Vec<Violation>,
    /// Total cost over `max(1, finished epochs)`.
    pub empirical_ratio: Ratio,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.values().all(|v| *v != Verdict::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One CSV row per request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRow {
    pub step: usize,
    pub epoch: usize,
    pub stage: Stage,
    pub service: u32,
    pub switching: usize,
    pub rebalancing: usize,
    pub g: ExtendedPositive,
    /// `1` regular, `0` irregular, `-` for requests inside a component.
    pub regular: &'static str,
    pub pivotal: u8,
    pub rebalanced: u8,
    pub components: usize,
    pub epochs_finished: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub rows: Vec<StepRow>,
    pub trace: Vec<TraceRecord>,
}

impl RunOutput {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(&self.rows, w)
    }

    pub fn write_trace<W: Write>(&self, w: W) -> Result<()> {
        crate::trace::write_trace(&self.trace, w)
    }
}

pub fn write_rows<W: Write>(rows: &[StepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| BisectError::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub monitors: Vec<Lemma>,
    pub strict: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            monitors: Lemma::ALL.to_vec(),
            strict: false,
        }
    }
}

/// Feeds `inst` to `alg`, keeping the ledger and evaluating the monitors
/// after every request. The harness tracks components on its own rather
/// than trusting the algorithm. In strict mode the first violation aborts
/// with [`BisectError::Monitor`].
pub fn run(alg: &mut dyn OnlineAlgorithm, inst: &Instance, opts: &RunOptions) -> Result<RunOutput> {
    if alg.n() != inst.n {
        return Err(BisectError::UniverseMismatch(alg.n(), inst.n));
    }
    if alg.partition() != &inst.p0 {
        return Err(BisectError::usage("algorithm does not start from the instance's p0"));
    }
    let n = inst.n;
    let mut monitors = Monitors::new(&opts.monitors, alg);
    let mut tracker = ComponentTracker::new(n)?;
    let mut rows = Vec::with_capacity(inst.len());
    let mut trace = Vec::with_capacity(inst.len());
    let mut epochs = vec![EpochSummary::default()];
    let (mut service, mut switching, mut rebalancing, mut movement) = (0u64, 0u64, 0u64, 0u64);
    let mut finished = 0u64;

    for (i, &(u, v)) in inst.requests.iter().enumerate() {
        let t = i + 1;
        let before = alg.partition().clone();
        let out = alg.step(u, v)?;
        let merged = tracker.ingest(u, v, &before)?.merge.is_some();
        monitors.observe(t, &out, merged, &before, alg.partition(), &tracker);
        if opts.strict {
            if let Some(x) = monitors.violations.first() {
                return Err(BisectError::Monitor {
                    lemma: x.lemma.name().to_string(),
                    step: x.step,
                    witness: x.witness.clone(),
                });
            }
        }

        service += u64::from(out.service);
        switching += out.switching as u64;
        rebalancing += out.rebalancing as u64;
        movement += out.movement as u64;

        let e = epochs.last_mut().expect("current epoch");
        e.epoch = out.epoch;
        e.requests += 1;
        e.cost += out.cost() as u64;
        e.actual_cost += out.actual_cost() as u64;
        if out.merge.is_some() {
            e.merges += 1;
            if out.stage_before == Stage::First {
                e.first_stage_merges += 1;
            }
        }
        e.pivotal += usize::from(out.pivotal);
        e.irregular += usize::from(out.classification == Some(StepClass::Irregular));
        e.rebalances += usize::from(out.rebalanced);
        if out.epoch_ended {
            e.finished = true;
            finished += 1;
            tracker.reset_epoch();
            epochs.push(EpochSummary {
                epoch: out.epoch + 1,
                ..EpochSummary::default()
            });
        }

        rows.push(StepRow {
            step: t,
            epoch: out.epoch,
            stage: out.stage_before,
            service: out.service,
            switching: out.switching,
            rebalancing: out.rebalancing,
            g: out.g_after,
            regular: match out.classification {
                Some(StepClass::Regular) => "1",
                Some(StepClass::Irregular) => "0",
                None => "-",
            },
            pivotal: u8::from(out.pivotal),
            rebalanced: u8::from(out.rebalanced),
            components: out.components,
            epochs_finished: finished,
        });
        trace.push(TraceRecord::from_outcome(t, u, v, &out));
    }

    let total = service + switching + rebalancing;
    let report = RunReport {
        algorithm: alg.name().to_string(),
        n,
        requests: inst.len(),
        params: alg.icb_parameters().copied(),
        total_cost: total,
        service_cost: service,
        switching_cost: switching,
        rebalancing_cost: rebalancing,
        movement_cost: movement,
        epochs_finished: finished,
        epochs,
        verdicts: monitors.verdicts(),
        violations: monitors.violations,
        empirical_ratio: Ratio {
            num: total,
            den: finished.max(1),
        },
    };
    Ok(RunOutput { report, rows, trace })
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub algorithm: AlgorithmKind,
    pub params: Option<serde_json::Value>,
    pub generator: GeneratorSpec,
    /// Merge-script block sizes; doubling when empty.
    #[serde(default)]
    pub timeline: Vec<usize>,
    /// Seed of the algorithm's own generator.
    pub alg_seed: u64,
}

/// Builds the instance a job describes. Adaptive instances are generated
/// against a throwaway copy of the algorithm.
pub fn build_instance(job: &SweepJob) -> Result<Instance> {
    let g = &job.generator;
    match g.kind {
        GeneratorKind::UniformRandom => gen_uniform(g.n, g.t, g.seed),
        GeneratorKind::MergeScript => {
            let timeline = if job.timeline.is_empty() {
                doubling_timeline(g.n)
            } else {
                job.timeline.clone()
            };
            gen_merge_script(g.n, &timeline, g.t, g.seed)
        }
        GeneratorKind::AdaptiveCut => {
            let mut alg = build_algorithm(
                job.algorithm,
                Partition::halves(g.n)?,
                job.params.as_ref(),
                job.alg_seed,
            )?;
            let replay = Some(job.alg_seed).filter(|_| alg.is_randomized());
            gen_adaptive_cut(alg.as_mut(), g.t, replay)
        }
    }
}

pub fn run_job(job: &SweepJob, opts: &RunOptions) -> Result<RunOutput> {
    let inst = build_instance(job)?;
    let mut alg = build_algorithm(job.algorithm, inst.p0.clone(), job.params.as_ref(), job.alg_seed)?;
    run(alg.as_mut(), &inst, opts)
}

/// Runs independent jobs in parallel; results keep the job order.
pub fn sweep(jobs: &[SweepJob], opts: &RunOptions) -> Vec<Result<RunReport>> {
    use rayon::prelude::*;
    jobs.par_iter()
        .map(|job| run_job(job, opts).map(|o| o.report))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub algorithm: String,
    pub generator: String,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    pub total_cost: u64,
    pub service_cost: u64,
    pub switching_cost: u64,
    pub rebalancing_cost: u64,
    pub epochs_finished: u64,
    pub ratio_num: u64,
    pub ratio_den: u64,
    pub monitors_failed: usize,
}

impl SweepRow {
    pub fn new(job: &SweepJob, r: &RunReport) -> Self {
        SweepRow {
            algorithm: r.algorithm.clone(),
            generator: job.generator.kind.to_string(),
            n: r.n,
            t: r.requests,
            seed: job.generator.seed,
            total_cost: r.total_cost,
            service_cost: r.service_cost,
            switching_cost: r.switching_cost,
            rebalancing_cost: r.rebalancing_cost,
            epochs_finished: r.epochs_finished,
            ratio_num: r.empirical_ratio.num,
            ratio_den: r.empirical_ratio.den,
            monitors_failed: r.verdicts.values().filter(|v| **v == Verdict::Fail).count(),
        }
    }
}
