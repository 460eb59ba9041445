//! Offline reference costs: exact OPT for small `n` and the epoch-count
//! lower bound.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{BisectError, Result};
use crate::model::{check_universe, ElementId, Partition, Side};
use crate::trace::TraceRecord;

pub const DEFAULT_STATE_CAP: u128 = 12870;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub p0: Partition,
    pub requests: Vec<(ElementId, ElementId)>,
}

impl Instance {
    pub fn new(p0: Partition, requests: Vec<(ElementId, ElementId)>) -> Result<Self> {
        let n = p0.n();
        for &(u, v) in &requests {
            for w in [u, v] {
                if w.0 >= n {
                    return Err(BisectError::ElementOutOfRange { element: w.0, n });
                }
            }
            if u == v {
                return Err(BisectError::SelfRequest(u.0));
            }
        }
        Ok(Instance { n, p0, requests })
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn prefix(&self, t: usize) -> Instance {
        Instance {
            n: self.n,
            p0: self.p0.clone(),
            requests: self.requests[..t].to_vec(),
        }
    }

    /// Rebuilds the request sequence recorded in a trace.
    pub fn from_trace(p0: Partition, trace: &[TraceRecord]) -> Result<Self> {
        Instance::new(p0, trace.iter().map(|r| (r.u, r.v)).collect())
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn balanced_masks(n: usize) -> Vec<u64> {
    let half = n / 2;
    let mut out = Vec::new();
    // Gosper's hack over all n-bit words with n/2 bits set.
    let mut x: u64 = (1u64 << half) - 1;
    let limit = 1u64 << n;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

fn mask_of(p: &Partition) -> u64 {
    p.sides()
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Side::Left)
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// Minimum over all partition sequences of service plus movement, where each
/// request is served by the partition held before it and any move may follow.
pub fn exact_opt(inst: &Instance) -> Result<u64> {
    exact_opt_capped(inst, DEFAULT_STATE_CAP)
}

pub fn exact_opt_capped(inst: &Instance, cap: u128) -> Result<u64> {
    let n = inst.n;
    check_universe(n)?;
    let states = binomial(n, n / 2);
    if states > cap || n > 62 {
        return Err(BisectError::Capacity { states, cap });
    }
    let masks = balanced_masks(n);
    let index: HashMap<u64, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let full = (1u64 << n) - 1;
    const INF: u64 = u64::MAX;

    let mut value = vec![INF; masks.len()];
    value[index[&mask_of(&inst.p0)]] = 0;
    let mut heap = BinaryHeap::new();
    for &(u, v) in &inst.requests {
        let (bu, bv) = (1u64 << u.0, 1u64 << v.0);
        for (i, &m) in masks.iter().enumerate() {
            if value[i] != INF && ((m & bu) != 0) != ((m & bv) != 0) {
                value[i] += 1;
            }
        }
        // Moving costs 2 per swapped pair, so a Dijkstra pass over single
        // swaps gives the cheapest relocation from any state.
        heap.clear();
        for (i, &c) in value.iter().enumerate() {
            if c != INF {
                heap.push(Reverse((c, i)));
            }
        }
        while let Some(Reverse((c, i))) = heap.pop() {
            if c > value[i] {
                continue;
            }
            let m = masks[i];
            let mut left = m;
            while left != 0 {
                let a = left & left.wrapping_neg();
                left ^= a;
                let mut right = !m & full;
                while right != 0 {
                    let b = right & right.wrapping_neg();
                    right ^= b;
                    let j = index[&(m ^ a ^ b)];
                    if c + 2 < value[j] {
                        value[j] = c + 2;
                        heap.push(Reverse((c + 2, j)));
                    }
                }
            }
        }
    }
    Ok(value.into_iter().min().expect("at least one state"))
}

/// Finished epochs in a trace of a component-preserving run; each finished
/// epoch forces OPT to pay at least one.
pub fn epoch_lower_bound(trace: &[TraceRecord]) -> u64 {
    trace.iter().filter(|r| r.epoch_end).count() as u64
}
