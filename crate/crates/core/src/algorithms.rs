//! Online algorithms behind one interface: ICB (two-stage, randomized), the
//! component-preserving baseline and a static partition.

use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BisectError, Result};
use crate::model::{check_universe, ComponentSet, ComponentTracker, ElementId, MergeEvent, Partition};
use crate::numbertheory::{in_ladder, popular_from_counts, EstimatorState, ExtendedPositive, Finite};
use crate::oracle::{self, Balance, PreservingCounter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    First,
    Second,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::First => "first",
            Stage::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepClass {
    Regular,
    Irregular,
}

/// Regular iff both merged sizes lie in `R(g_prev)`.
pub fn classify_step(sizes: (usize, usize), g_prev: ExtendedPositive, q: usize) -> StepClass {
    if in_ladder(sizes.0, g_prev, q) && in_ladder(sizes.1, g_prev, q) {
        StepClass::Regular
    } else {
        StepClass::Irregular
    }
}

/// Smallest `q` with `q^7 >= n`.
fn seventh_root_ceil(n: usize) -> usize {
    let mut q = (n as f64).powf(1.0 / 7.0).floor().max(1.0) as usize;
    while (q as u128).pow(7) < n as u128 {
        q += 1;
    }
    while q > 1 && ((q - 1) as u128).pow(7) >= n as u128 {
        q -= 1;
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcbParameters {
    pub n: usize,
    pub q: usize,
    pub w: usize,
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Validity {
    /// `n >= 4d`
    pub n_ge_4d: bool,
    /// `d >= 2qw`
    pub d_ge_2qw: bool,
}

/// Optional `q`, `w`, `d` overrides; the JSON parameter blob.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub q: Option<usize>,
    pub w: Option<usize>,
    pub d: Option<usize>,
}

impl IcbParameters {
    /// `q = ceil(n^(1/7))`, `w = 4q^4 + 2`, `d = ceil(n^(13/14) / sqrt(log2 n))`.
    pub fn defaults(n: usize) -> Result<Self> {
        Self::with_overrides(n, ParamOverrides::default())
    }

    pub fn with_overrides(n: usize, o: ParamOverrides) -> Result<Self> {
        check_universe(n)?;
        let q = o.q.unwrap_or_else(|| seventh_root_ceil(n));
        let w = o.w.unwrap_or(4 * q.pow(4) + 2);
        let d = o.d.unwrap_or_else(|| {
            let nf = n as f64;
            (nf.powf(13.0 / 14.0) / nf.log2().sqrt()).ceil() as usize
        });
        if q == 0 || w == 0 || d == 0 {
            return Err(BisectError::usage("q, w and d must be positive"));
        }
        Ok(IcbParameters { n, q, w, d })
    }

    pub fn validity(&self) -> Validity {
        Validity {
            n_ge_4d: self.n >= 4 * self.d,
            d_ge_2qw: self.d >= 2 * self.q * self.w,
        }
    }

    pub fn is_valid(&self) -> bool {
        let v = self.validity();
        v.n_ge_4d && v.d_ge_2qw
    }

    /// Human-readable descriptions of violated inequalities.
    pub fn violations(&self) -> Vec<String> {
        let v = self.validity();
        let mut out = Vec::new();
        if !v.n_ge_4d {
            out.push(format!("n >= 4d fails: n = {} < 4d = {}", self.n, 4 * self.d));
        }
        if !v.d_ge_2qw {
            out.push(format!(
                "d >= 2qw fails: d = {} < 2qw = {}",
                self.d,
                2 * self.q * self.w
            ));
        }
        out
    }
}

/// Everything an algorithm reports about one request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepOutcome {
    pub service: u32,
    /// `dist(p_{t-1}, p*_t)`
    pub switching: usize,
    /// `dist(p*_t, p_t)`; on the step that enters the second stage this is
    /// the distance to the resampled partition.
    pub rebalancing: usize,
    /// `dist(p_{t-1}, p_t)`
    pub movement: usize,
    pub merge: Option<MergeEvent>,
    pub classification: Option<StepClass>,
    pub pivotal: bool,
    pub rebalanced: bool,
    pub resampled: bool,
    pub g_before: ExtendedPositive,
    pub g_after: ExtendedPositive,
    pub stage_before: Stage,
    pub stage_after: Stage,
    pub epoch: usize,
    pub epoch_ended: bool,
    pub components: usize,
}

impl StepOutcome {
    fn quiet(service: u32, stage: Stage, g: ExtendedPositive, epoch: usize, components: usize) -> Self {
        StepOutcome {
            service,
            switching: 0,
            rebalancing: 0,
            movement: 0,
            merge: None,
            classification: None,
            pivotal: false,
            rebalanced: false,
            resampled: false,
            g_before: g,
            g_after: g,
            stage_before: stage,
            stage_after: stage,
            epoch,
            epoch_ended: false,
            components,
        }
    }

    /// Ledger cost: service plus switching plus rebalancing.
    pub fn cost(&self) -> usize {
        self.service as usize + self.switching + self.rebalancing
    }

    /// Cost actually paid: service plus `dist(p_{t-1}, p_t)`.
    pub fn actual_cost(&self) -> usize {
        self.service as usize + self.movement
    }
}

pub trait OnlineAlgorithm {
    fn name(&self) -> &'static str;
    fn n(&self) -> usize;
    fn partition(&self) -> &Partition;
    fn step(&mut self, u: ElementId, v: ElementId) -> Result<StepOutcome>;
    fn is_component_preserving(&self) -> bool;
    fn is_randomized(&self) -> bool;
    fn icb_parameters(&self) -> Option<&IcbParameters> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Icb,
    Cb,
    Static,
}

impl FromStr for AlgorithmKind {
    type Err = BisectError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "icb" => Ok(AlgorithmKind::Icb),
            "cb" => Ok(AlgorithmKind::Cb),
            "static" => Ok(AlgorithmKind::Static),
            other => Err(BisectError::usage(format!(
                "unknown algorithm {other:?} (expected icb, cb or static)"
            ))),
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::Icb => "icb",
            AlgorithmKind::Cb => "cb",
            AlgorithmKind::Static => "static",
        })
    }
}

/// Builds an algorithm by name; `params` is the JSON override blob (only
/// meaningful for ICB).
pub fn build_algorithm(
    kind: AlgorithmKind,
    p0: Partition,
    params: Option<&serde_json::Value>,
    seed: u64,
) -> Result<Box<dyn OnlineAlgorithm + Send>> {
    let overrides: ParamOverrides = match params {
        None => ParamOverrides::default(),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| BisectError::usage(format!("bad parameter blob: {e}")))?,
    };
    Ok(match kind {
        AlgorithmKind::Icb => {
            let params = IcbParameters::with_overrides(p0.n(), overrides)?;
            Box::new(Icb::new(params, p0, seed)?)
        }
        AlgorithmKind::Cb => Box::new(ComponentBased::new(p0)?),
        AlgorithmKind::Static => Box::new(StaticPartition::new(p0)),
    })
}

// ---------------------------------------------------------------------------

/// The two-stage randomized algorithm.
#[derive(Debug, Clone)]
pub struct Icb {
    params: IcbParameters,
    partition: Partition,
    estimator: EstimatorState,
    stage: Stage,
    epoch: usize,
    tracker: ComponentTracker,
    rng: ChaCha8Rng,
    /// A `(g, 2d)`-balanced preserving partition known for the current
    /// components, kept while no merge crosses it.
    witness: Option<Partition>,
}

impl Icb {
    pub fn new(params: IcbParameters, p0: Partition, seed: u64) -> Result<Self> {
        if p0.n() != params.n {
            return Err(BisectError::UniverseMismatch(p0.n(), params.n));
        }
        if !params.is_valid() {
            for v in params.violations() {
                warn!("icb parameters outside the analysed regime: {v}");
            }
        }
        Ok(Icb {
            estimator: EstimatorState::new(params.q),
            tracker: ComponentTracker::new(params.n)?,
            params,
            partition: p0,
            stage: Stage::First,
            epoch: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            witness: None,
        })
    }

    pub fn params(&self) -> &IcbParameters {
        &self.params
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn estimator(&self) -> EstimatorState {
        self.estimator
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn components(&self) -> ComponentSet {
        self.tracker.components()
    }

    fn end_epoch(&mut self, out: &mut StepOutcome) {
        self.tracker.reset_epoch();
        self.estimator = EstimatorState::new(self.params.q);
        self.stage = Stage::First;
        self.epoch += 1;
        self.witness = None;
        out.epoch_ended = true;
        out.stage_after = Stage::First;
        out.g_after = self.estimator.g;
        out.components = self.tracker.live_components();
    }

    fn resample(&mut self, set: &ComponentSet) -> Result<Partition> {
        let sides = PreservingCounter::new(set).sample_sides(&mut self.rng)?;
        Ok(oracle::realize(set, &sides))
    }

    fn first_stage(&mut self, u: ElementId, merge: &MergeEvent, out: &mut StepOutcome) -> Result<()> {
        let set = self.tracker.components();
        let p_star = if merge.crossed {
            match oracle::closest_preserving(&set, &self.partition)? {
                Some((p, _)) => p,
                None => {
                    self.end_epoch(out);
                    return Ok(());
                }
            }
        } else {
            self.partition.clone()
        };
        let switching = p_star.dist(&self.partition)?;

        let popular = popular_from_counts(|i| self.tracker.count_of_size(i), self.params.w, self.params.q);
        let g_prev = self.estimator.g;
        self.estimator = self.estimator.update(&popular);
        let g = self.estimator.g;
        out.g_after = g;
        out.pivotal = g != g_prev;

        let q = self.params.q;
        let wide = Balance::new(g, q, 2 * self.params.d);
        let narrow = Balance::new(g, q, self.params.d);
        if let Some(w) = &self.witness {
            if w.component_side(self.tracker.members_of(u)).is_none() {
                self.witness = None;
            }
        }
        let star_counts = wide.side_counts(&set, &p_star);
        let has_wide = if star_counts.iter().all(|&c| c >= wide.min_per_side) {
            self.witness = Some(p_star.clone());
            true
        } else if self
            .witness
            .as_ref()
            .is_some_and(|w| wide.side_counts(&set, w).iter().all(|&c| c >= wide.min_per_side))
        {
            true
        } else {
            self.witness = oracle::balanced_witness(&set, &wide);
            self.witness.is_some()
        };

        if !has_wide {
            // Stage switch. The old partition is kept when it still preserves
            // the components, otherwise the step already acts as a second-stage step.
            self.stage = Stage::Second;
            out.stage_after = Stage::Second;
            out.switching = switching;
            if merge.crossed {
                let next = self.resample(&set)?;
                out.rebalancing = next.dist(&p_star)?;
                out.movement = next.dist(&self.partition)?;
                out.resampled = true;
                self.partition = next;
            }
            return Ok(());
        }

        out.switching = switching;
        let star_narrow = narrow.side_counts(&set, &p_star);
        let next = if star_narrow.iter().all(|&c| c >= narrow.min_per_side) {
            p_star
        } else {
            let p = oracle::best_balanced(&set, &wide, &p_star)?
                .expect("a (g, 2d)-balanced partition was just found");
            out.rebalancing = p.dist(&p_star)?;
            out.rebalanced = true;
            self.witness = Some(p.clone());
            p
        };
        out.movement = next.dist(&self.partition)?;
        self.partition = next;
        Ok(())
    }

    fn second_stage(&mut self, merge: &MergeEvent, out: &mut StepOutcome) -> Result<()> {
        if !merge.crossed {
            return Ok(());
        }
        let set = self.tracker.components();
        let counter = PreservingCounter::new(&set);
        if counter.is_empty() {
            self.end_epoch(out);
            return Ok(());
        }
        let sides = counter.sample_sides(&mut self.rng)?;
        let next = oracle::realize(&set, &sides);
        out.switching = next.dist(&self.partition)?;
        out.movement = out.switching;
        out.resampled = true;
        self.partition = next;
        Ok(())
    }
}

impl OnlineAlgorithm for Icb {
    fn name(&self) -> &'static str {
        "icb"
    }

    fn n(&self) -> usize {
        self.params.n
    }

    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn step(&mut self, u: ElementId, v: ElementId) -> Result<StepOutcome> {
        let ingest = self.tracker.ingest(u, v, &self.partition)?;
        let mut out = StepOutcome::quiet(
            ingest.service,
            self.stage,
            self.estimator.g,
            self.epoch,
            self.tracker.live_components(),
        );
        let Some(merge) = ingest.merge else {
            return Ok(out);
        };
        out.merge = Some(merge);
        out.classification = Some(classify_step(
            (merge.absorbed_sizes[0], merge.absorbed_sizes[1]),
            self.estimator.g,
            self.params.q,
        ));
        match self.stage {
            Stage::First => self.first_stage(u, &merge, &mut out)?,
            Stage::Second => self.second_stage(&merge, &mut out)?,
        }
        if !out.epoch_ended {
            out.components = self.tracker.live_components();
        }
        Ok(out)
    }

    fn is_component_preserving(&self) -> bool {
        true
    }

    fn is_randomized(&self) -> bool {
        true
    }

    fn icb_parameters(&self) -> Option<&IcbParameters> {
        Some(&self.params)
    }
}

// ---------------------------------------------------------------------------

/// Component-preserving baseline: keeps its partition while it preserves
/// the components, otherwise moves to the closest preserving partition.
#[derive(Debug, Clone)]
pub struct ComponentBased {
    partition: Partition,
    tracker: ComponentTracker,
    epoch: usize,
}

impl ComponentBased {
    pub fn new(p0: Partition) -> Result<Self> {
        Ok(ComponentBased {
            tracker: ComponentTracker::new(p0.n())?,
            partition: p0,
            epoch: 0,
        })
    }
}

impl OnlineAlgorithm for ComponentBased {
    fn name(&self) -> &'static str {
        "cb"
    }

    fn n(&self) -> usize {
        self.partition.n()
    }

    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn step(&mut self, u: ElementId, v: ElementId) -> Result<StepOutcome> {
        let ingest = self.tracker.ingest(u, v, &self.partition)?;
        let mut out = StepOutcome::quiet(
            ingest.service,
            Stage::First,
            Finite(1),
            self.epoch,
            self.tracker.live_components(),
        );
        let Some(merge) = ingest.merge else {
            return Ok(out);
        };
        out.merge = Some(merge);
        if !merge.crossed {
            return Ok(out);
        }
        let set = self.tracker.components();
        match oracle::closest_preserving(&set, &self.partition)? {
            Some((p, d)) => {
                out.switching = d;
                out.movement = d;
                self.partition = p;
            }
            None => {
                self.tracker.reset_epoch();
                self.epoch += 1;
                out.epoch_ended = true;
                out.components = self.tracker.live_components();
            }
        }
        Ok(out)
    }

    fn is_component_preserving(&self) -> bool {
        true
    }

    fn is_randomized(&self) -> bool {
        false
    }
}

/// Never reorganizes.
#[derive(Debug, Clone)]
pub struct StaticPartition {
    partition: Partition,
}

impl StaticPartition {
    pub fn new(p0: Partition) -> Self {
        StaticPartition { partition: p0 }
    }
}

impl OnlineAlgorithm for StaticPartition {
    fn name(&self) -> &'static str {
        "static"
    }

    fn n(&self) -> usize {
        self.partition.n()
    }

    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn step(&mut self, u: ElementId, v: ElementId) -> Result<StepOutcome> {
        let n = self.n();
        for w in [u, v] {
            if w.0 >= n {
                return Err(BisectError::ElementOutOfRange { element: w.0, n });
            }
        }
        if u == v {
            return Err(BisectError::SelfRequest(u.0));
        }
        let service = u32::from(self.partition.side(u) != self.partition.side(v));
        Ok(StepOutcome::quiet(service, Stage::First, Finite(1), 0, 0))
    }

    fn is_component_preserving(&self) -> bool {
        false
    }

    fn is_randomized(&self) -> bool {
        false
    }
}
