//! Self-checks: oracles against exhaustive enumeration, Bezout certificates
//! over a grid of small sets, and a chi-square test of the sampler.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::brute;
use crate::error::Result;
use crate::model::{ComponentSet, Partition, Side};
use crate::numbertheory::{nonneg_bezout, Finite, Infinite};
use crate::oracle::{self, Balance, PreservingCounter};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

/// Random component multiset with `n <= max_n` (even) and at most
/// `max_parts` components, laid out on contiguous elements.
pub fn random_set<R: Rng>(rng: &mut R, max_n: usize, max_parts: usize) -> ComponentSet {
    let n = 2 * rng.gen_range(1..=max_n / 2);
    let parts = rng.gen_range(1..=max_parts.min(n));
    // Random composition of n into `parts` positive parts.
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(n)) {
        sizes.push(c - prev);
        prev = c;
    }
    ComponentSet::from_sizes(&sizes).expect("sizes sum to n")
}

pub fn random_partition<R: Rng>(rng: &mut R, n: usize) -> Partition {
    let left: Vec<usize> = rand::seq::index::sample(rng, n, n / 2).into_vec();
    Partition::from_left_set(n, &left).expect("half the elements")
}

fn random_balance<R: Rng>(rng: &mut R) -> Balance {
    let g = match rng.gen_range(0..5) {
        0 => Infinite,
        k => Finite(k),
    };
    Balance::new(g, rng.gen_range(1..=5), rng.gen_range(0..=3))
}

/// Compares every oracle with [`brute`] on `cases` random inputs.
pub fn oracle_equivalence(cases: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let set = random_set(&mut rng, 16, 12);
        let prev = random_partition(&mut rng, set.n());
        let balance = random_balance(&mut rng);
        let all = brute::preserving_partitions(&set);

        let mut fail = |what: &str| failures.push(format!("case {case} {:?}: {what}", set.sizes()));
        if oracle::exists_preserving(&set) != !all.is_empty() {
            fail("exists_preserving");
        }
        let closest = oracle::closest_preserving(&set, &prev)?;
        if closest.as_ref().map(|c| c.1) != brute::min_dist(&set, &prev)
            || closest.as_ref().is_some_and(|(p, d)| !all.contains(p) || p.dist(&prev).ok() != Some(*d))
        {
            fail("closest_preserving");
        }
        let balanced = brute::balanced_partitions(&set, &balance);
        if oracle::exists_balanced(&set, &balance) != !balanced.is_empty() {
            fail("exists_balanced");
        }
        if oracle::balanced_witness(&set, &balance).is_some_and(|p| !balanced.contains(&p)) {
            fail("balanced_witness");
        }
        let best = oracle::best_balanced(&set, &balance, &prev)?;
        let best_dist = best.as_ref().map(|p| p.dist(&prev).expect("same n"));
        if best_dist != brute::min_balanced_dist(&set, &balance, &prev)
            || best.is_some_and(|p| !balanced.contains(&p))
        {
            fail("best_balanced");
        }
        let counter = PreservingCounter::new(&set);
        if counter.count().0 != all.len().into() {
            fail("count_preserving");
        }
        if !all.is_empty() {
            for _ in 0..4 {
                let sides = counter.sample_sides(&mut rng)?;
                if !all.contains(&oracle::realize(&set, &sides)) {
                    fail("sample_uniform support");
                }
            }
        }
    }
    Ok(Check {
        name: "oracle_equivalence",
        passed: failures.is_empty(),
        cases,
        detail: failures.first().cloned().unwrap_or_default(),
    })
}

/// All disjoint non-empty `A, B ⊆ {1..=max}` with `|A| + |B| <= max_total`.
pub fn bezout_pairs(max: u64, max_total: usize) -> Vec<(BTreeSet<u64>, BTreeSet<u64>)> {
    let mut out = Vec::new();
    // Each value is absent, in A or in B.
    let slots = max as u32;
    for code in 0..3u64.pow(slots) {
        let (mut a, mut b) = (BTreeSet::new(), BTreeSet::new());
        let mut c = code;
        for v in 1..=max {
            match c % 3 {
                1 => {
                    a.insert(v);
                }
                2 => {
                    b.insert(v);
                }
                _ => {}
            }
            c /= 3;
        }
        if !a.is_empty() && !b.is_empty() && a.len() + b.len() <= max_total {
            out.push((a, b));
        }
    }
    out
}

pub fn bezout_grid() -> Result<Check> {
    let pairs = bezout_pairs(8, 5);
    let mut bad = None;
    for (a, b) in &pairs {
        let cert = nonneg_bezout(a, b)?;
        if !cert.verify() {
            bad.get_or_insert_with(|| format!("A = {a:?}, B = {b:?}"));
        }
    }
    Ok(Check {
        name: "bezout_certificates",
        passed: bad.is_none(),
        cases: pairs.len(),
        detail: bad.unwrap_or_default(),
    })
}

/// Pearson statistic of `draws` samples against the uniform distribution
/// over `P(C)`, with its p-value.
pub fn sampler_chi_square(sizes: &[usize], draws: usize, seed: u64) -> Result<(f64, f64, usize)> {
    let set = ComponentSet::from_sizes(sizes)?;
    let counter = PreservingCounter::new(&set);
    let support = brute::count(&set);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freq: BTreeMap<Vec<Side>, usize> = BTreeMap::new();
    for _ in 0..draws {
        *freq.entry(counter.sample_sides(&mut rng)?).or_default() += 1;
    }
    let expected = draws as f64 / support as f64;
    let observed_cells = freq.len();
    let stat: f64 = freq
        .values()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum::<f64>()
        + (support - observed_cells) as f64 * expected;
    let df = (support - 1) as f64;
    let p = if df == 0.0 {
        1.0
    } else {
        1.0 - ChiSquared::new(df).expect("df > 0").cdf(stat)
    };
    Ok((stat, p, observed_cells))
}

pub fn sampler_uniformity(draws: usize, seed: u64, alpha: f64) -> Result<Check> {
    let mut details = Vec::new();
    let mut passed = true;
    for sizes in [&[1, 1, 1, 1][..], &[2, 1, 1][..]] {
        let (stat, p, _) = sampler_chi_square(sizes, draws, seed)?;
        passed &= p >= alpha;
        details.push(format!("{sizes:?}: chi2 = {stat:.3}, p = {p:.4}"));
    }
    Ok(Check {
        name: "sampler_uniformity",
        passed,
        cases: 2,
        detail: details.join("; "),
    })
}

/// The full self-check suite.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        oracle_equivalence(500, seed)?,
        bezout_grid()?,
        sampler_uniformity(10_000, seed, 1e-3)?,
    ])
}
