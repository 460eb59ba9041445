//! Online balanced graph bisection with learned component sizes.
//!
//! The crate holds the partition model, exact partition oracles, the online
//! algorithms, an exact offline optimum for small instances and a simulation
//! harness that checks the structural guarantees while it runs.

pub mod algorithms;
pub mod brute;
mod dp;
pub mod error;
pub mod harness;
pub mod model;
pub mod numbertheory;
pub mod opt;
pub mod oracle;
pub mod trace;
pub mod verify;

pub use algorithms::{
    build_algorithm, classify_step, AlgorithmKind, ComponentBased, Icb, IcbParameters, OnlineAlgorithm,
    ParamOverrides, Stage, StaticPartition, StepClass, StepOutcome,
};
pub use error::{BisectError, Result};
pub use model::{
    dist, ComponentId, ComponentSet, ComponentTracker, ElementId, MergeEvent, Partition, Side,
};
pub use numbertheory::{nonneg_bezout, BezoutCertificate, EstimatorState, ExtendedPositive};
pub use harness::{run, Lemma, RunOptions, RunOutput, RunReport, Verdict};
pub use opt::{epoch_lower_bound, exact_opt, Instance};
pub use trace::TraceRecord;
