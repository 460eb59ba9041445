//! Extended gcd arithmetic over positive integers plus infinity, the size
//! ladder `R(g)`, the popularity estimator and non-negative Bezout
//! certificates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BisectError, Result};
use crate::model::ComponentSet;

/// A positive integer or infinity; `gcd` of the empty set is infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtendedPositive {
    Finite(usize),
    Infinite,
}

pub use ExtendedPositive::{Finite, Infinite};

impl ExtendedPositive {
    pub fn finite(self) -> Option<usize> {
        match self {
            Finite(v) => Some(v),
            Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Infinite
    }

    /// Extended gcd of two values: `gcd(a, inf) = a`.
    pub fn gcd(self, other: ExtendedPositive) -> ExtendedPositive {
        match (self, other) {
            (Infinite, x) | (x, Infinite) => x,
            (Finite(a), Finite(b)) => Finite(a.gcd(&b)),
        }
    }
}

impl fmt::Display for ExtendedPositive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(v) => write!(f, "{v}"),
            Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedPositive {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Finite(v) => s.serialize_u64(*v as u64),
            Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedPositive {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(0) => Err(serde::de::Error::custom("extended positive must be >= 1")),
            Raw::Num(v) => Ok(Finite(v as usize)),
            Raw::Text(t) if t == "inf" => Ok(Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a positive integer or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// gcd of a set of positive integers; infinity for the empty set.
pub fn ext_gcd_set<I: IntoIterator<Item = usize>>(values: I) -> ExtendedPositive {
    values
        .into_iter()
        .fold(Infinite, |acc, v| acc.gcd(Finite(v)))
}

/// Divisibility with `a | inf` for every `a` and `inf` dividing no finite value.
pub fn ext_divides(a: ExtendedPositive, b: ExtendedPositive) -> bool {
    match (a, b) {
        (_, Infinite) => true,
        (Infinite, Finite(_)) => false,
        (Finite(a), Finite(b)) => b % a == 0,
    }
}

/// Multiples of `g` inside `[1, q]`, ascending.
pub fn r_ladder(g: ExtendedPositive, q: usize) -> Vec<usize> {
    match g {
        Infinite => Vec::new(),
        Finite(g) => (g..=q).step_by(g).collect(),
    }
}

/// Membership in `R(g)` without materialising the ladder.
#[inline]
pub fn in_ladder(size: usize, g: ExtendedPositive, q: usize) -> bool {
    match g {
        Infinite => false,
        Finite(g) => size <= q && size % g == 0,
    }
}

/// Sizes `i <= q` with at least `w` components of size `i`.
pub fn popular_sizes(set: &ComponentSet, w: usize, q: usize) -> BTreeSet<usize> {
    let mut counts = vec![0usize; q + 1];
    for c in set.components() {
        if c.size() <= q {
            counts[c.size()] += 1;
        }
    }
    popular_from_counts(|i| counts[i], w, q)
}

/// Same as [`popular_sizes`] for any size-count source.
pub fn popular_from_counts(count: impl Fn(usize) -> usize, w: usize, q: usize) -> BTreeSet<usize> {
    (1..=q).filter(|&i| count(i) >= w).collect()
}

/// The popularity estimator `g` together with the ladder cap `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorState {
    pub g: ExtendedPositive,
    pub q: usize,
}

impl EstimatorState {
    /// Fresh estimator, `g = 1`.
    pub fn new(q: usize) -> Self {
        EstimatorState { g: Finite(1), q }
    }

    pub fn ladder(&self) -> Vec<usize> {
        r_ladder(self.g, self.q)
    }

    /// `g <- gcd(R(g) ∩ popular)`.
    pub fn update(&self, popular: &BTreeSet<usize>) -> EstimatorState {
        let g = ext_gcd_set(
            self.ladder()
                .into_iter()
                .filter(|size| popular.contains(size)),
        );
        EstimatorState { g, q: self.q }
    }
}

pub fn update_estimator(state: EstimatorState, popular: &BTreeSet<usize>) -> EstimatorState {
    state.update(popular)
}

/// `gcd(A) | gcd(A ∩ B)`; always true.
pub fn gcd_monotone_check(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    ext_divides(
        ext_gcd_set(a.iter().copied()),
        ext_gcd_set(a.intersection(b).copied()),
    )
}

/// Non-negative coefficients with `Σ r_i a_i = g + Σ s_i b_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BezoutCertificate {
    pub a_coeffs: BTreeMap<u64, BigUint>,
    pub b_coeffs: BTreeMap<u64, BigUint>,
    pub g: u64,
    /// `(1 + |A| + |B|) * H^2`.
    pub bound: BigUint,
}

impl BezoutCertificate {
    pub fn left_sum(&self) -> BigUint {
        self.a_coeffs.iter().map(|(a, r)| r * BigUint::from(*a)).sum()
    }

    pub fn right_sum(&self) -> BigUint {
        self.b_coeffs.iter().map(|(b, s)| s * BigUint::from(*b)).sum()
    }

    /// Checks the identity, the gcd and the coefficient bound.
    pub fn verify(&self) -> bool {
        let values = self.a_coeffs.keys().chain(self.b_coeffs.keys()).copied();
        let g = values.fold(0u64, |acc, v| acc.gcd(&v));
        g == self.g
            && self.left_sum() == BigUint::from(self.g) + self.right_sum()
            && self
                .a_coeffs
                .values()
                .chain(self.b_coeffs.values())
                .all(|c| c <= &self.bound)
    }

    pub fn to_json(&self) -> serde_json::Value {
        fn num(v: &BigUint) -> serde_json::Value {
            match u64::try_from(v) {
                Ok(x) => serde_json::Value::from(x),
                Err(_) => serde_json::Value::from(v.to_string()),
            }
        }
        fn coeffs(m: &BTreeMap<u64, BigUint>) -> serde_json::Value {
            m.iter()
                .map(|(k, v)| (k.to_string(), num(v)))
                .collect::<serde_json::Map<_, _>>()
                .into()
        }
        serde_json::json!({
            "g": self.g,
            "bound": num(&self.bound),
            "a_coeffs": coeffs(&self.a_coeffs),
            "b_coeffs": coeffs(&self.b_coeffs),
            "verified": self.verify(),
        })
    }
}

/// Signed coefficients `x` with `Σ x_i v_i = gcd(v)` and `|x_i| <= max(v)`.
pub(crate) fn reduced_bezout(values: &[u64]) -> (u64, Vec<BigInt>) {
    let h = BigInt::from(*values.iter().max().expect("non-empty"));
    let mut coeffs: Vec<BigInt> = vec![BigInt::zero(); values.len()];
    coeffs[0] = BigInt::one();
    let mut acc = BigInt::from(values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        let e = acc.extended_gcd(&BigInt::from(v));
        for c in &mut coeffs[..i] {
            *c *= &e.x;
        }
        coeffs[i] = e.y;
        acc = e.gcd;
    }
    let g = u64::try_from(&acc).expect("gcd fits the inputs");

    // Pairwise transfers along (v_j/d, -v_i/d) keep the sum fixed and
    // strictly decrease Σ|x_i| v_i, so this terminates.
    loop {
        let (i, xi) = match coeffs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
        {
            Some((i, x)) if x.abs() > h => (i, x.clone()),
            _ => break,
        };
        let j = coeffs
            .iter()
            .enumerate()
            .filter(|(j, x)| *j != i && x.sign() != Sign::NoSign && x.sign() != xi.sign())
            .max_by(|a, b| {
                (a.1.abs() * values[a.0])
                    .cmp(&(b.1.abs() * values[b.0]))
                    .then(b.0.cmp(&a.0))
            })
            .map(|(j, _)| j)
            .expect("an opposite-sign coefficient exists while the sum is g");
        let d = values[i].gcd(&values[j]);
        let step_i = BigInt::from(values[j] / d);
        let step_j = BigInt::from(values[i] / d);
        let k_i = xi.abs() / &step_i;
        let k_j = coeffs[j].abs().div_ceil(&step_j);
        let k = k_i.min(k_j);
        let sign = if xi.is_positive() { BigInt::one() } else { -BigInt::one() };
        coeffs[i] -= &sign * &k * &step_i;
        coeffs[j] += &sign * &k * &step_j;
    }
    (g, coeffs)
}

/// Non-negative Bezout certificate for disjoint non-empty `A` and `B`.
pub fn nonneg_bezout(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> Result<BezoutCertificate> {
    if a.is_empty() || b.is_empty() {
        return Err(BisectError::usage("both value sets must be non-empty"));
    }
    if a.contains(&0) || b.contains(&0) {
        return Err(BisectError::usage("values must be positive"));
    }
    if let Some(x) = a.intersection(b).next() {
        return Err(BisectError::usage(format!(
            "value sets must be disjoint ({x} appears in both)"
        )));
    }
    let a_vals: Vec<u64> = a.iter().copied().collect();
    let b_vals: Vec<u64> = b.iter().copied().collect();
    let values: Vec<u64> = a_vals.iter().chain(&b_vals).copied().collect();
    let hmax = *values.iter().max().expect("non-empty");
    let (g, x) = reduced_bezout(&values);
    let (k, l) = (a_vals.len(), b_vals.len());

    // Σ r~ a - Σ s~ b = g with r~ = x over A and s~ = -x over B.
    let r_t = &x[..k];
    let s_t: Vec<BigInt> = x[k..].iter().map(|c| -c).collect();

    let h = BigInt::from(hmax);
    let (a1, b1) = (BigInt::from(a_vals[0]), BigInt::from(b_vals[0]));
    let lift_b = h.div_ceil(&b1) * &b1;
    let lift_a = h.div_ceil(&a1) * &a1;
    let sum_a: BigInt = a_vals.iter().map(|&v| BigInt::from(v)).sum();
    let sum_b: BigInt = b_vals.iter().map(|&v| BigInt::from(v)).sum();
    let ceil_h_a1 = h.div_ceil(&a1);
    let ceil_h_b1 = h.div_ceil(&b1);

    let mut r: Vec<BigInt> = r_t.iter().map(|c| c + &lift_b).collect();
    r[0] += &ceil_h_a1 * &sum_b;
    let mut s: Vec<BigInt> = s_t.iter().map(|c| c + &lift_a).collect();
    s[0] += &ceil_h_b1 * &sum_a;

    let to_nat = |c: BigInt| c.to_biguint().expect("shifted coefficients are non-negative");
    let cert = BezoutCertificate {
        a_coeffs: a_vals.iter().copied().zip(r.into_iter().map(to_nat)).collect(),
        b_coeffs: b_vals.iter().copied().zip(s.into_iter().map(to_nat)).collect(),
        g,
        bound: BigUint::from((1 + k + l) as u64) * BigUint::from(hmax) * BigUint::from(hmax),
    };
    assert!(cert.verify(), "bezout certificate failed self-check: {cert:?}");
    Ok(cert)
}
