//! Exact oracles over component multisets: existence, closest partition,
//! `(g, ell)`-balanced partitions, counting and uniform sampling of
//! component-preserving balanced partitions.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::dp::{self, Item};
use crate::error::{BisectError, Result};
use crate::model::{ComponentSet, Partition, Side};
use crate::numbertheory::{in_ladder, ExtendedPositive};

/// Balance requirement: at least `min_per_side` components with sizes in
/// `R(g)` (multiples of `g` up to `q`) on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Balance {
    pub g: ExtendedPositive,
    pub q: usize,
    pub min_per_side: usize,
}

impl Balance {
    pub fn new(g: ExtendedPositive, q: usize, min_per_side: usize) -> Self {
        Balance { g, q, min_per_side }
    }

    #[inline]
    pub fn counts(&self, size: usize) -> bool {
        in_ladder(size, self.g, self.q)
    }

    /// Components with sizes in `R(g)` on each side of `p`. `p` must
    /// preserve `set`.
    pub fn side_counts(&self, set: &ComponentSet, p: &Partition) -> [usize; 2] {
        let mut out = [0; 2];
        for c in set.components() {
            if self.counts(c.size()) {
                out[p.side(c.members[0]).index()] += 1;
            }
        }
        out
    }

    /// Membership of a preserving partition in `P^g_ell(C)`.
    pub fn admits(&self, set: &ComponentSet, p: &Partition) -> bool {
        p.preserves(set) && self.side_counts(set, p).iter().all(|&c| c >= self.min_per_side)
    }
}

/// Exact number of component-preserving balanced partitions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartitionCount(pub BigUint);

impl fmt::Display for PartitionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn items(set: &ComponentSet, prev: Option<&Partition>, balance: Option<&Balance>) -> Vec<Item> {
    set.components()
        .iter()
        .map(|c| {
            let cost = match prev {
                None => [0, 0],
                Some(p) => {
                    let left = c.members.iter().filter(|&&v| p.side(v) == Side::Left).count() as u64;
                    let right = c.size() as u64 - left;
                    [right, left]
                }
            };
            Item {
                size: c.size(),
                cost,
                counted: balance.is_some_and(|b| b.counts(c.size())),
            }
        })
        .collect()
}

/// Element-level partition from a per-component side assignment.
pub fn realize(set: &ComponentSet, sides: &[Side]) -> Partition {
    let mut out = vec![Side::Right; set.n()];
    for (c, &s) in set.components().iter().zip(sides) {
        for &v in &c.members {
            out[v.0] = s;
        }
    }
    Partition::new(out).expect("oracle assignments are balanced")
}

fn check_prev(set: &ComponentSet, prev: &Partition) -> Result<()> {
    if set.n() != prev.n() {
        return Err(BisectError::UniverseMismatch(set.n(), prev.n()));
    }
    Ok(())
}

/// True iff some subset of component sizes sums to `n/2`.
pub fn exists_preserving(set: &ComponentSet) -> bool {
    dp::subset_sum_exists(&set.sizes(), set.n() / 2)
}

/// A preserving partition minimising the distance to `prev`, with that
/// distance; `None` when no preserving partition exists.
pub fn closest_preserving(set: &ComponentSet, prev: &Partition) -> Result<Option<(Partition, usize)>> {
    check_prev(set, prev)?;
    Ok(dp::min_cost_assignment(&items(set, Some(prev), None), set.n() / 2)
        .map(|(cost, sides)| (realize(set, &sides), cost as usize)))
}

/// True iff `P^g_ell(C)` is non-empty.
pub fn exists_balanced(set: &ComponentSet, balance: &Balance) -> bool {
    balanced_witness(set, balance).is_some()
}

/// Some member of `P^g_ell(C)`.
pub fn balanced_witness(set: &ComponentSet, balance: &Balance) -> Option<Partition> {
    if balance.min_per_side == 0 {
        return dp::min_cost_assignment(&items(set, None, None), set.n() / 2)
            .map(|(_, sides)| realize(set, &sides));
    }
    dp::balanced_witness(&items(set, None, Some(balance)), set.n() / 2, balance.min_per_side)
        .map(|sides| realize(set, &sides))
}

/// The member of `P^g_ell(C)` closest to `prev`.
pub fn best_balanced(set: &ComponentSet, balance: &Balance, prev: &Partition) -> Result<Option<Partition>> {
    check_prev(set, prev)?;
    if balance.min_per_side == 0 {
        return Ok(closest_preserving(set, prev)?.map(|(p, _)| p));
    }
    Ok(
        dp::balanced_min_cost(&items(set, Some(prev), Some(balance)), set.n() / 2, balance.min_per_side)
            .map(|(_, sides)| realize(set, &sides)),
    )
}

/// Suffix counting tables over size classes; supports exact counting and
/// exact uniform sampling of preserving balanced partitions.
#[derive(Debug, Clone)]
pub struct PreservingCounter {
    half: usize,
    /// `(size, component indices)`, ascending by size.
    classes: Vec<(usize, Vec<usize>)>,
    /// `suffix[j]`: ways for classes `j..` to put mass `x` on the left, for
    /// the masses a sampler can still ask about at class `j`.
    suffix: Vec<Window>,
    n_components: usize,
}

/// Table entries for `x` in `[lo, lo + vals.len())`; zero above.
#[derive(Debug, Clone)]
struct Window {
    lo: usize,
    vals: Vec<BigUint>,
}

impl Window {
    fn get(&self, x: usize) -> Option<&BigUint> {
        x.checked_sub(self.lo).and_then(|i| self.vals.get(i))
    }
}

impl PreservingCounter {
    pub fn new(set: &ComponentSet) -> Self {
        let n = set.n();
        let half = n / 2;
        let mut by_size: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, c) in set.components().iter().enumerate() {
            by_size.entry(c.size()).or_default().push(i);
        }
        let classes: Vec<(usize, Vec<usize>)> = by_size.into_iter().collect();
        let mut suffix = vec![
            Window {
                lo: 0,
                vals: Vec::new()
            };
            classes.len() + 1
        ];
        // Once mass `m` is folded in, the sampler only reads masses in
        // `[m - half, min(m, half)]`: the rest can't be completed by the
        // classes still to come.
        let window = |m: usize| (m.saturating_sub(half), m.min(half));
        let mut table = vec![BigUint::zero(); half + 1];
        table[0] = BigUint::one();
        suffix[classes.len()] = Window {
            lo: 0,
            vals: vec![BigUint::one()],
        };
        let mut mass = 0;
        for (j, (size, members)) in classes.iter().enumerate().rev() {
            for _ in 0..members.len() {
                mass += size;
                let (lo, hi) = window(mass);
                for x in (lo.max(*size)..=hi).rev() {
                    let (below, above) = table.split_at_mut(x);
                    above[0] += &below[x - size];
                }
            }
            let (lo, hi) = window(mass);
            suffix[j] = Window {
                lo,
                vals: table[lo..=hi].to_vec(),
            };
        }
        debug_assert_eq!(mass, n);
        PreservingCounter {
            half,
            classes,
            suffix,
            n_components: set.len(),
        }
    }

    pub fn count(&self) -> PartitionCount {
        PartitionCount(self.total().clone())
    }

    fn total(&self) -> &BigUint {
        self.suffix[0].get(self.half).expect("window covers n/2")
    }

    pub fn is_empty(&self) -> bool {
        self.total().is_zero()
    }

    /// Per-component sides drawn uniformly from all preserving partitions.
    pub fn sample_sides<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Side>> {
        if self.is_empty() {
            return Err(BisectError::NoPreservingPartition);
        }
        let mut sides = vec![Side::Right; self.n_components];
        let mut x = self.half;
        for (j, (size, members)) in self.classes.iter().enumerate() {
            let total = self.suffix[j].get(x).expect("reachable mass");
            let next = &self.suffix[j + 1];
            let mut r = rng.gen_biguint_below(total);
            let m = members.len();
            let mut binom = BigUint::one();
            let mut chosen = None;
            for k in 0..=m {
                if k > 0 {
                    binom = binom * BigUint::from(m - k + 1) / BigUint::from(k);
                }
                if k * size > x {
                    break;
                }
                let Some(rest) = next.get(x - k * size) else {
                    continue;
                };
                let w = &binom * rest;
                if r < w {
                    chosen = Some(k);
                    break;
                }
                r -= w;
            }
            let k = chosen.expect("weights sum to the suffix count");
            for i in rand::seq::index::sample(rng, m, k) {
                sides[members[i]] = Side::Left;
            }
            x -= k * size;
        }
        debug_assert_eq!(x, 0);
        Ok(sides)
    }
}

/// Number of distinct preserving balanced partitions of `set`.
pub fn count_preserving(set: &ComponentSet) -> PartitionCount {
    PreservingCounter::new(set).count()
}

/// Exact uniform draw from `P(C)`.
pub fn sample_uniform<R: Rng + ?Sized>(set: &ComponentSet, rng: &mut R) -> Result<Partition> {
    let sides = PreservingCounter::new(set).sample_sides(rng)?;
    Ok(realize(set, &sides))
}
