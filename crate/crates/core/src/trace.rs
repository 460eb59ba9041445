//! JSON-lines trace: one record per request.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Stage, StepOutcome};
use crate::error::{BisectError, Result};
use crate::model::{ComponentId, ElementId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub absorbed: [ComponentId; 2],
    pub result: ComponentId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// 1-based request index.
    pub t: usize,
    pub u: ElementId,
    pub v: ElementId,
    /// Endpoints were separated when the request arrived.
    pub crossed: bool,
    pub merged: Option<MergeRecord>,
    pub epoch: usize,
    pub stage: Stage,
    #[serde(default)]
    pub epoch_end: bool,
}

impl TraceRecord {
    pub fn from_outcome(t: usize, u: ElementId, v: ElementId, out: &StepOutcome) -> Self {
        TraceRecord {
            t,
            u,
            v,
            crossed: out.service == 1,
            merged: out.merge.map(|m| MergeRecord {
                absorbed: m.absorbed,
                result: m.result,
            }),
            epoch: out.epoch,
            stage: out.stage_before,
            epoch_end: out.epoch_ended,
        }
    }
}

pub fn write_trace<W: Write>(records: &[TraceRecord], mut w: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| BisectError::Io(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| BisectError::usage(format!("trace line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}
