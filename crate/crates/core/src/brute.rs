//! Exhaustive reference implementations. Exponential in the number of
//! components; used to cross-check the dynamic programs on small inputs.

use crate::model::{ComponentSet, Partition, Side};
use crate::oracle::Balance;

/// Every balanced per-component side assignment, as element partitions.
pub fn preserving_partitions(set: &ComponentSet) -> Vec<Partition> {
    let comps = set.components();
    assert!(comps.len() < 26, "brute force is limited to small inputs");
    let half = set.n() / 2;
    let mut out = Vec::new();
    for mask in 0u32..(1 << comps.len()) {
        let left: usize = comps
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, c)| c.size())
            .sum();
        if left != half {
            continue;
        }
        let mut sides = vec![Side::Right; set.n()];
        for (i, c) in comps.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for &v in &c.members {
                    sides[v.0] = Side::Left;
                }
            }
        }
        out.push(Partition::new(sides).expect("balanced by construction"));
    }
    out
}

pub fn count(set: &ComponentSet) -> usize {
    preserving_partitions(set).len()
}

pub fn min_dist(set: &ComponentSet, prev: &Partition) -> Option<usize> {
    preserving_partitions(set)
        .iter()
        .map(|p| p.dist(prev).expect("same universe"))
        .min()
}

fn is_balanced(set: &ComponentSet, balance: &Balance, p: &Partition) -> bool {
    let mut per_side = [0usize; 2];
    for c in set.components() {
        let size = c.size();
        let in_ladder = match balance.g.finite() {
            Some(g) => size <= balance.q && size % g == 0,
            None => false,
        };
        if in_ladder {
            per_side[p.side(c.members[0]).index()] += 1;
        }
    }
    per_side.iter().all(|&k| k >= balance.min_per_side)
}

pub fn balanced_partitions(set: &ComponentSet, balance: &Balance) -> Vec<Partition> {
    preserving_partitions(set)
        .into_iter()
        .filter(|p| is_balanced(set, balance, p))
        .collect()
}

pub fn min_balanced_dist(set: &ComponentSet, balance: &Balance, prev: &Partition) -> Option<usize> {
    balanced_partitions(set, balance)
        .iter()
        .map(|p| p.dist(prev).expect("same universe"))
        .min()
}

/// Searches signed coefficients in `[-h, h]` with `Σ x_i v_i = g`.
pub fn signed_bezout_exists(values: &[u64], g: u64, h: i64) -> bool {
    fn rec(values: &[u64], target: i64, h: i64) -> bool {
        match values.split_first() {
            None => target == 0,
            Some((&v, rest)) => (-h..=h).any(|x| rec(rest, target - x * v as i64, h)),
        }
    }
    rec(values, g as i64, h)
}

/// Searches non-negative `r, s <= bound` with `Σ r a = g + Σ s b`.
pub fn nonneg_bezout_exists(a: &[u64], b: &[u64], g: u64, bound: u64) -> bool {
    let vals: Vec<i64> = a
        .iter()
        .map(|&x| x as i64)
        .chain(b.iter().map(|&x| -(x as i64)))
        .collect();
    fn rec(vals: &[i64], target: i64, bound: i64) -> bool {
        match vals.split_first() {
            None => target == 0,
            Some((&v, rest)) => (0..=bound).any(|x| rec(rest, target - x * v, bound)),
        }
    }
    rec(&vals, g as i64, bound as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_small_cases() {
        assert_eq!(count(&ComponentSet::from_sizes(&[1, 1, 1, 1]).unwrap()), 6);
        assert_eq!(count(&ComponentSet::from_sizes(&[2, 1, 1]).unwrap()), 2);
        assert_eq!(count(&ComponentSet::from_sizes(&[3, 1]).unwrap()), 0);
    }

    #[test]
    fn bezout_search() {
        assert!(nonneg_bezout_exists(&[4], &[6], 2, 108));
        assert!(nonneg_bezout_exists(&[3], &[5], 1, 2));
        assert!(signed_bezout_exists(&[4, 6], 2, 6));
    }
}
