//! Subset-sum engines shared by the partition oracles.
//!
//! Items with identical `(size, cost, counted)` are interchangeable, so they
//! are grouped into classes and each class of multiplicity `m` is split into
//! `O(log m)` binary pieces. Every count `0..=m` is a sum of distinct pieces,
//! which turns the bounded knapsack into a 0/1 knapsack over pieces.

use std::collections::BTreeMap;

use crate::model::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Item {
    pub size: usize,
    /// Cost of placing the item on the left / right side.
    pub cost: [u64; 2],
    /// Counts toward the balance constraint.
    pub counted: bool,
}

#[derive(Debug)]
struct Class {
    size: usize,
    cost: [u64; 2],
    members: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    class: usize,
    k: usize,
    mass: usize,
}

fn classes(items: &[Item], filter: impl Fn(&Item) -> bool) -> Vec<Class> {
    let mut map: BTreeMap<(usize, u64, u64, bool), Vec<usize>> = BTreeMap::new();
    for (i, it) in items.iter().enumerate().filter(|(_, it)| filter(it)) {
        map.entry((it.size, it.cost[0], it.cost[1], it.counted))
            .or_default()
            .push(i);
    }
    map.into_iter()
        .map(|((size, c0, c1, _), members)| Class {
            size,
            cost: [c0, c1],
            members,
        })
        .collect()
}

fn pieces(classes: &[Class]) -> Vec<Piece> {
    let mut out = Vec::new();
    for (ci, c) in classes.iter().enumerate() {
        let mut left = c.members.len();
        let mut k = 1;
        while left > 0 {
            let take = k.min(left);
            out.push(Piece {
                class: ci,
                k: take,
                mass: take * c.size,
            });
            left -= take;
            k *= 2;
        }
    }
    out
}

/// Puts `left_counts[c]` members of each class on the left, lowest item
/// indices first, the rest on the right.
fn realize(n_items: usize, classes: &[Class], left_counts: &[usize]) -> Vec<Side> {
    let mut sides = vec![Side::Right; n_items];
    for (c, &k) in classes.iter().zip(left_counts) {
        for &i in &c.members[..k] {
            sides[i] = Side::Left;
        }
    }
    sides
}

fn assignment_cost(items: &[Item], sides: &[Side]) -> u64 {
    items
        .iter()
        .zip(sides)
        .map(|(it, s)| it.cost[s.index()])
        .sum()
}

// ---------------------------------------------------------------------------
// bitsets

#[inline]
fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
fn get(bs: &[u64], i: usize) -> bool {
    bs[i / 64] >> (i % 64) & 1 == 1
}

#[inline]
fn set(bs: &mut [u64], i: usize) {
    bs[i / 64] |= 1 << (i % 64);
}

/// `dst |= src << shift`, both `nbits` wide.
fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize, nbits: usize) {
    if shift >= nbits {
        return;
    }
    let (ws, bs) = (shift / 64, shift % 64);
    let nw = dst.len();
    for w in (ws..nw).rev() {
        let hi = src[w - ws] << bs;
        let lo = if bs > 0 && w > ws {
            src[w - ws - 1] >> (64 - bs)
        } else {
            0
        };
        dst[w] |= hi | lo;
    }
    let extra = nw * 64 - nbits;
    if extra > 0 {
        dst[nw - 1] &= u64::MAX >> extra;
    }
}

/// In-place 0/1 subset-sum step over a single bitset.
fn or_shifted_self(bs: &mut [u64], shift: usize, nbits: usize) {
    if shift >= nbits {
        return;
    }
    let (ws, b) = (shift / 64, shift % 64);
    let nw = bs.len();
    for w in (ws..nw).rev() {
        let hi = bs[w - ws] << b;
        let lo = if b > 0 && w > ws {
            bs[w - ws - 1] >> (64 - b)
        } else {
            0
        };
        bs[w] |= hi | lo;
    }
    let extra = nw * 64 - nbits;
    if extra > 0 {
        bs[nw - 1] &= u64::MAX >> extra;
    }
}

/// Subset sums reachable by uncounted-style pieces, with per-piece
/// snapshots when `keep` is set. Returns (final set, snapshots before each piece).
fn subset_sums(
    pieces: &[Piece],
    target: usize,
    keep: bool,
) -> (Vec<u64>, Vec<Vec<u64>>) {
    let nbits = target + 1;
    let mut bs = vec![0u64; words(nbits)];
    set(&mut bs, 0);
    let mut snaps = Vec::new();
    for p in pieces {
        if keep {
            snaps.push(bs.clone());
        }
        or_shifted_self(&mut bs, p.mass, nbits);
    }
    (bs, snaps)
}

fn unwind_subset_sums(
    classes: &[Class],
    pieces: &[Piece],
    snaps: &[Vec<u64>],
    mut x: usize,
) -> Vec<usize> {
    let mut left = vec![0; classes.len()];
    for (j, p) in pieces.iter().enumerate().rev() {
        if !get(&snaps[j], x) {
            x -= p.mass;
            left[p.class] += p.k;
        }
    }
    debug_assert_eq!(x, 0);
    left
}

/// True iff some subset of the sizes sums to `target`.
pub(crate) fn subset_sum_exists(sizes: &[usize], target: usize) -> bool {
    let items: Vec<Item> = sizes
        .iter()
        .map(|&size| Item {
            size,
            cost: [0, 0],
            counted: false,
        })
        .collect();
    let cls = classes(&items, |_| true);
    let ps = pieces(&cls);
    let (bs, _) = subset_sums(&ps, target, false);
    get(&bs, target)
}

// ---------------------------------------------------------------------------
// min-cost, mass only

const INF: i64 = i64::MAX / 4;

struct MinCostTable {
    /// `dp[x]` = minimal delta cost (relative to all-right) with left mass `x`.
    dp: Vec<i64>,
    take: Vec<Vec<u64>>,
}

fn min_cost_table(classes: &[Class], pieces: &[Piece], target: usize) -> MinCostTable {
    let nbits = target + 1;
    let mut dp = vec![INF; nbits];
    dp[0] = 0;
    let mut take = Vec::with_capacity(pieces.len());
    for p in pieces {
        let c = &classes[p.class];
        let delta = p.k as i64 * (c.cost[0] as i64 - c.cost[1] as i64);
        let mut bits = vec![0u64; words(nbits)];
        if p.mass <= target {
            for x in (0..=target - p.mass).rev() {
                let cur = dp[x];
                if cur >= INF {
                    continue;
                }
                let cand = cur + delta;
                if cand < dp[x + p.mass] {
                    dp[x + p.mass] = cand;
                    set(&mut bits, x + p.mass);
                }
            }
        }
        take.push(bits);
    }
    MinCostTable { dp, take }
}

fn unwind_min_cost(
    classes: &[Class],
    pieces: &[Piece],
    table: &MinCostTable,
    mut x: usize,
) -> Vec<usize> {
    let mut left = vec![0; classes.len()];
    for (j, p) in pieces.iter().enumerate().rev() {
        if get(&table.take[j], x) {
            x -= p.mass;
            left[p.class] += p.k;
        }
    }
    debug_assert_eq!(x, 0);
    left
}

/// Cheapest side assignment with exactly `target` mass on the left.
pub(crate) fn min_cost_assignment(items: &[Item], target: usize) -> Option<(u64, Vec<Side>)> {
    let cls = classes(items, |_| true);
    let ps = pieces(&cls);
    let table = min_cost_table(&cls, &ps, target);
    if table.dp[target] >= INF {
        return None;
    }
    let left = unwind_min_cost(&cls, &ps, &table, target);
    let sides = realize(items.len(), &cls, &left);
    Some((assignment_cost(items, &sides), sides))
}

// ---------------------------------------------------------------------------
// balanced variants: counted items carry a second dimension

struct Split {
    counted: Vec<Class>,
    counted_pieces: Vec<Piece>,
    free: Vec<Class>,
    free_pieces: Vec<Piece>,
    total_counted: usize,
    counted_mass_cap: usize,
}

fn split(items: &[Item], target: usize) -> Split {
    let counted = classes(items, |it| it.counted);
    let free = classes(items, |it| !it.counted);
    let counted_pieces = pieces(&counted);
    let free_pieces = pieces(&free);
    let total_counted = counted.iter().map(|c| c.members.len()).sum();
    let counted_mass: usize = counted.iter().map(|c| c.size * c.members.len()).sum();
    Split {
        counted,
        counted_pieces,
        free,
        free_pieces,
        total_counted,
        counted_mass_cap: counted_mass.min(target),
    }
}

fn merge_left_counts(items: &[Item], s: &Split, counted_left: &[usize], free_left: &[usize]) -> Vec<Side> {
    let mut sides = vec![Side::Right; items.len()];
    for (c, &k) in s.counted.iter().zip(counted_left) {
        for &i in &c.members[..k] {
            sides[i] = Side::Left;
        }
    }
    for (c, &k) in s.free.iter().zip(free_left) {
        for &i in &c.members[..k] {
            sides[i] = Side::Left;
        }
    }
    sides
}

/// Some assignment with `target` left mass and at least `ell` counted items
/// on each side, or `None`.
pub(crate) fn balanced_witness(items: &[Item], target: usize, ell: usize) -> Option<Vec<Side>> {
    let s = split(items, target);
    if s.total_counted < 2 * ell {
        return None;
    }
    let (lo, hi) = (ell, s.total_counted - ell);
    let xr = s.counted_mass_cap;
    let nbits = xr + 1;
    let nw = words(nbits);
    let rows = s.total_counted + 1;

    let mut grid = vec![0u64; rows * nw];
    set(&mut grid[..nw], 0);
    let mut snaps: Vec<Vec<u64>> = Vec::with_capacity(s.counted_pieces.len());
    let mut max_row = 0;
    for p in &s.counted_pieces {
        snaps.push(grid[..(max_row + 1) * nw].to_vec());
        let top = (max_row + p.k).min(rows - 1);
        for c in (0..=max_row).rev() {
            if c + p.k >= rows {
                continue;
            }
            let (head, tail) = grid.split_at_mut((c + p.k) * nw);
            or_shifted(&mut tail[..nw], &head[c * nw..(c + 1) * nw], p.mass, nbits);
        }
        max_row = top;
    }

    let (free_sums, free_snaps) = subset_sums(&s.free_pieces, target, true);
    let mut rev = vec![0u64; nw];
    for x in 0..=xr {
        if get(&free_sums, target - x) {
            set(&mut rev, x);
        }
    }

    let mut found = None;
    'outer: for c in lo..=hi.min(max_row) {
        let row = &grid[c * nw..(c + 1) * nw];
        for (w, (a, b)) in row.iter().zip(&rev).enumerate() {
            let both = a & b;
            if both != 0 {
                found = Some((c, w * 64 + both.trailing_zeros() as usize));
                break 'outer;
            }
        }
    }
    let (mut c, mut x) = found?;
    let free_left = unwind_subset_sums(&s.free, &s.free_pieces, &free_snaps, target - x);

    let mut counted_left = vec![0; s.counted.len()];
    for (j, p) in s.counted_pieces.iter().enumerate().rev() {
        let snap = &snaps[j];
        let before = c * nw < snap.len() && get(&snap[c * nw..(c + 1) * nw], x);
        if !before {
            c -= p.k;
            x -= p.mass;
            counted_left[p.class] += p.k;
        }
    }
    debug_assert_eq!((c, x), (0, 0));
    Some(merge_left_counts(items, &s, &counted_left, &free_left))
}

/// Cheapest assignment with `target` left mass and at least `ell` counted
/// items on each side.
pub(crate) fn balanced_min_cost(items: &[Item], target: usize, ell: usize) -> Option<(u64, Vec<Side>)> {
    let s = split(items, target);
    if s.total_counted < 2 * ell {
        return None;
    }
    let (lo, hi) = (ell, s.total_counted - ell);
    let xr = s.counted_mass_cap;
    let width = xr + 1;
    let rows = s.total_counted + 1;

    let mut grid = vec![INF; rows * width];
    grid[0] = 0;
    let mut take: Vec<Vec<u64>> = Vec::with_capacity(s.counted_pieces.len());
    let mut max_row = 0;
    for p in &s.counted_pieces {
        let class = &s.counted[p.class];
        let delta = p.k as i64 * (class.cost[0] as i64 - class.cost[1] as i64);
        let mut bits = vec![0u64; words(rows * width)];
        if p.mass <= xr {
            for c in (0..=max_row).rev() {
                if c + p.k >= rows {
                    continue;
                }
                let src = c * width;
                let dst = (c + p.k) * width + p.mass;
                for x in (0..width - p.mass).rev() {
                    let cur = grid[src + x];
                    if cur >= INF {
                        continue;
                    }
                    let cand = cur + delta;
                    if cand < grid[dst + x] {
                        grid[dst + x] = cand;
                        set(&mut bits, dst + x);
                    }
                }
            }
            max_row = (max_row + p.k).min(rows - 1);
        }
        take.push(bits);
    }

    let free = min_cost_table(&s.free, &s.free_pieces, target);
    let mut best: Option<(i64, usize, usize)> = None;
    for c in lo..=hi.min(max_row) {
        for x in 0..width {
            let a = grid[c * width + x];
            let b = free.dp[target - x];
            if a >= INF || b >= INF {
                continue;
            }
            if best.is_none_or(|(v, _, _)| a + b < v) {
                best = Some((a + b, c, x));
            }
        }
    }
    let (_, mut c, mut x) = best?;
    let free_left = unwind_min_cost(&s.free, &s.free_pieces, &free, target - x);
    let mut counted_left = vec![0; s.counted.len()];
    for (j, p) in s.counted_pieces.iter().enumerate().rev() {
        if get(&take[j], c * width + x) {
            c -= p.k;
            x -= p.mass;
            counted_left[p.class] += p.k;
        }
    }
    debug_assert_eq!((c, x), (0, 0));
    let sides = merge_left_counts(items, &s, &counted_left, &free_left);
    Some((assignment_cost(items, &sides), sides))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(sizes: &[usize]) -> Vec<Item> {
        sizes
            .iter()
            .map(|&size| Item { size, cost: [0, 0], counted: false })
            .collect()
    }

    #[test]
    fn shifted_or_crosses_word_boundaries() {
        let nbits = 200;
        let mut src = vec![0u64; words(nbits)];
        set(&mut src, 3);
        set(&mut src, 63);
        set(&mut src, 130);
        let mut dst = vec![0u64; words(nbits)];
        or_shifted(&mut dst, &src, 65, nbits);
        let on: Vec<usize> = (0..nbits).filter(|&i| get(&dst, i)).collect();
        assert_eq!(on, vec![68, 128, 195]);
    }

    #[test]
    fn subset_sums_small() {
        assert!(!subset_sum_exists(&[3, 1], 2));
        assert!(subset_sum_exists(&[2, 1, 1], 2));
        assert!(subset_sum_exists(&[1; 10], 5));
        assert!(subset_sum_exists(&[], 0));
    }

    #[test]
    fn min_cost_prefers_cheap_side() {
        let items = vec![
            Item { size: 1, cost: [0, 1], counted: false },
            Item { size: 1, cost: [1, 0], counted: false },
            Item { size: 2, cost: [2, 0], counted: false },
        ];
        let (cost, sides) = min_cost_assignment(&items, 2).unwrap();
        assert_eq!(cost, 1);
        assert_eq!(sides[0], Side::Left);
        assert!(min_cost_assignment(&plain(&[3, 1]), 2).is_none());
    }

    #[test]
    fn balanced_witness_respects_window() {
        let mut items = plain(&[1, 1, 1, 1, 2, 2]);
        for it in &mut items {
            it.counted = true;
        }
        let sides = balanced_witness(&items, 4, 2).unwrap();
        let left_mass: usize = items.iter().zip(&sides).filter(|(_, s)| **s == Side::Left).map(|(i, _)| i.size).sum();
        let left_count = sides.iter().filter(|s| **s == Side::Left).count();
        assert_eq!(left_mass, 4);
        assert!(left_count >= 2 && 6 - left_count >= 2);
        assert!(balanced_witness(&items, 4, 4).is_none());
    }
}
