//! Dyadic intervals 2^j[k, k+1), the maximal admissible pairing of two
//! distinct frequencies, and randomized verification that those pairs tile
//! the off-diagonal plane exactly once.
//!
//! A pair (I, I′) of equal-length dyadic intervals is *admissible* when
//! dist(I, I′) ≥ 4|I|.  Coarsening shrinks the distance and doubles the
//! required gap, so admissibility is monotone in the level; the *maximal*
//! pair for (ξ, ξ′) sits at the unique level where admissibility is about to
//! fail, and maximality forces dist(I, I′) ≤ 10|I|.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};

/// The dyadic interval 2^j·[k, k+1), half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub level: i32,
    pub index: i64,
}

impl DyadicInterval {
    pub fn length(&self) -> f64 {
        (self.level as f64).exp2()
    }

    pub fn left(&self) -> f64 {
        self.index as f64 * self.length()
    }

    pub fn right(&self) -> f64 {
        (self.index as f64 + 1.0) * self.length()
    }

    pub fn contains(&self, xi: f64) -> bool {
        self.left() <= xi && xi < self.right()
    }

    pub fn parent(&self) -> DyadicInterval {
        DyadicInterval {
            level: self.level + 1,
            index: self.index.div_euclid(2),
        }
    }
}

/// A maximal admissible pair: |I| = |I′|, 4|I| ≤ dist(I, I′) ≤ 10|I|, and the
/// parents of I and I′ violate admissibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WhitneyPair {
    pub first: DyadicInterval,
    pub second: DyadicInterval,
}

impl WhitneyPair {
    /// dist(I, I′) in frequency units.
    pub fn distance(&self) -> f64 {
        gap(self.first.index, self.second.index) as f64 * self.first.length()
    }
}

/// Integer gap between same-level intervals with indices k, k′: the number
/// of whole intervals strictly between them.
fn gap(k: i64, k2: i64) -> i64 {
    (k - k2).abs() - 1
}

fn admissible(k: i64, k2: i64) -> bool {
    gap(k, k2) >= 4
}

/// The unique I ∈ 𝒟_level containing ξ: index = floor(ξ / 2^level).
pub fn dyadic_interval_containing(xi: f64, level: i32) -> DyadicInterval {
    DyadicInterval {
        level,
        index: (xi / (level as f64).exp2()).floor() as i64,
    }
}

/// The unique maximal admissible pair with ξ ∈ I, ξ′ ∈ I′.
///
/// Ascends from a level a few octaves below log₂|ξ − ξ′| (where the
/// containing intervals are certainly admissible) until the parent pair
/// violates admissibility.
pub fn whitney_pair(xi: f64, xi_prime: f64) -> Result<WhitneyPair> {
    if xi == xi_prime || !xi.is_finite() || !xi_prime.is_finite() {
        return Err(LabError::NoPair(format!(
            "need two distinct finite frequencies, got ({xi}, {xi_prime})"
        )));
    }
    let sep = (xi - xi_prime).abs();
    let mut level = sep.log2().floor() as i32 - 4;
    let (mut a, mut b) = (
        dyadic_interval_containing(xi, level),
        dyadic_interval_containing(xi_prime, level),
    );
    debug_assert!(
        admissible(a.index, b.index),
        "start level not admissible for ({xi}, {xi_prime})"
    );
    loop {
        let (pa, pb) = (a.parent(), b.parent());
        if !admissible(pa.index, pb.index) {
            return Ok(WhitneyPair { first: a, second: b });
        }
        level += 1;
        a = pa;
        b = pb;
        // Range check: maximal pairs live within a couple of octaves of the
        // separation; anything beyond signals a logic error.
        debug_assert!(level <= sep.log2().ceil() as i32 + 1);
    }
}

/// Report of the randomized tiling check.
#[derive(Debug, Clone, Copy)]
pub struct PartitionReport {
    pub samples: usize,
    /// Pairs (ξ, ξ′) not covered by exactly one maximal admissible pair.
    pub violations: usize,
    /// max over encountered I of #{I′ : (I, I′) maximal admissible} within
    /// the sampled range.
    pub max_multiplicity: usize,
    pub range: (f64, f64),
    pub seed: u64,
}

/// Is (I, I′) at the same level a member of the maximal family?  Admissible,
/// and the parent pair is not.
fn is_maximal_pair(k: i64, k2: i64) -> bool {
    admissible(k, k2) && !admissible(k.div_euclid(2), k2.div_euclid(2))
}

/// Number of partners I′ of the interval (level, k) in the maximal family,
/// restricted to indices whose interval intersects `range`.
fn multiplicity_within(level: i32, k: i64, range: (f64, f64)) -> usize {
    let len = (level as f64).exp2();
    let mut count = 0;
    // Maximality caps the distance at 10|I|, so partners lie within 11 slots.
    for off in -12i64..=12 {
        if off == 0 {
            continue;
        }
        let k2 = k + off;
        let left = k2 as f64 * len;
        if left + len <= range.0 || left >= range.1 {
            continue;
        }
        if is_maximal_pair(k, k2) {
            count += 1;
        }
    }
    count
}

/// Draws `samples` random pairs (ξ, ξ′), ξ ≠ ξ′, from range² and counts, for
/// each, the number of levels at which the containing intervals form a
/// maximal admissible pair (exactly one is expected).  Also tracks the
/// largest partner count over all intervals encountered.
pub fn verify_partition(range: (f64, f64), samples: usize, seed: u64) -> Result<PartitionReport> {
    if samples == 0 {
        return Err(LabError::InvalidArgument("need at least one sample".into()));
    }
    if !(range.1 > range.0) {
        return Err(LabError::InvalidArgument(format!(
            "empty range ({}, {})",
            range.0, range.1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut max_multiplicity = 0usize;
    for _ in 0..samples {
        let xi: f64 = rng.gen_range(range.0..range.1);
        let xi2: f64 = rng.gen_range(range.0..range.1);
        if xi == xi2 {
            continue;
        }
        // Independent cover count: scan every level around the separation
        // scale and count maximal admissible containments directly.
        let sep = (xi - xi2).abs();
        let lo = sep.log2().floor() as i32 - 6;
        let hi = sep.log2().ceil() as i32 + 3;
        let mut covers = 0usize;
        let mut found: Option<(DyadicInterval, DyadicInterval)> = None;
        for level in lo..=hi {
            let a = dyadic_interval_containing(xi, level);
            let b = dyadic_interval_containing(xi2, level);
            if is_maximal_pair(a.index, b.index) {
                covers += 1;
                found = Some((a, b));
            }
        }
        if covers != 1 {
            violations += 1;
            continue;
        }
        // Cross-check the constructive search against the scan.
        let pair = whitney_pair(xi, xi2)?;
        let (a, b) = found.unwrap();
        if pair.first != a || pair.second != b {
            violations += 1;
            continue;
        }
        max_multiplicity = max_multiplicity.max(multiplicity_within(a.level, a.index, range));
    }
    Ok(PartitionReport {
        samples,
        violations,
        max_multiplicity,
        range,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containing_interval_examples() {
        let i = dyadic_interval_containing(0.7, 0);
        assert_eq!((i.left(), i.right()), (0.0, 1.0));
        let i = dyadic_interval_containing(-0.3, 0);
        assert_eq!((i.left(), i.right()), (-1.0, 0.0));
        let i = dyadic_interval_containing(5.0, 1);
        assert_eq!((i.left(), i.right()), (4.0, 6.0));
    }

    #[test]
    fn whitney_pair_reference_case() {
        // (0.5, 5.5): I = [0,1), I′ = [5,6); dist = 4 = 4|I| is admissible
        // while the parents [0,2), [4,6) sit at distance 2 < 8.
        let p = whitney_pair(0.5, 5.5).unwrap();
        assert_eq!((p.first.left(), p.first.right()), (0.0, 1.0));
        assert_eq!((p.second.left(), p.second.right()), (5.0, 6.0));
        assert_eq!(p.distance(), 4.0);

        let q = whitney_pair(5.5, 0.5).unwrap();
        assert_eq!(q.first, p.second);
        assert_eq!(q.second, p.first);
    }

    #[test]
    fn whitney_pair_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let xi: f64 = rng.gen_range(-50.0..50.0);
            let xi2: f64 = rng.gen_range(-50.0..50.0);
            if xi == xi2 {
                continue;
            }
            let p = whitney_pair(xi, xi2).unwrap();
            assert!(p.first.contains(xi));
            assert!(p.second.contains(xi2));
            assert_eq!(p.first.level, p.second.level);
            let len = p.first.length();
            assert!(p.distance() >= 4.0 * len);
            assert!(p.distance() <= 10.0 * len);
        }
    }

    #[test]
    fn whitney_pair_scale_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let xi: f64 = rng.gen_range(-20.0..20.0);
            let xi2: f64 = rng.gen_range(-20.0..20.0);
            if xi == xi2 {
                continue;
            }
            let p = whitney_pair(xi, xi2).unwrap();
            let q = whitney_pair(2.0 * xi, 2.0 * xi2).unwrap();
            assert_eq!(q.first.level, p.first.level + 1);
            assert_eq!(q.first.index, p.first.index);
            assert_eq!(q.second.index, p.second.index);
        }
    }

    #[test]
    fn whitney_pair_agrees_with_top_down_search() {
        // Independent construction: descend from a coarse level, taking the
        // first admissible pair encountered.
        fn top_down(xi: f64, xi2: f64) -> (DyadicInterval, DyadicInterval) {
            let sep = (xi - xi2).abs();
            let mut level = sep.log2().ceil() as i32 + 2;
            loop {
                let a = dyadic_interval_containing(xi, level);
                let b = dyadic_interval_containing(xi2, level);
                if admissible(a.index, b.index) {
                    return (a, b);
                }
                level -= 1;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let xi: f64 = rng.gen_range(-30.0..30.0);
            let xi2: f64 = rng.gen_range(-30.0..30.0);
            if xi == xi2 {
                continue;
            }
            let p = whitney_pair(xi, xi2).unwrap();
            let (a, b) = top_down(xi, xi2);
            assert_eq!(p.first, a);
            assert_eq!(p.second, b);
        }
    }

    #[test]
    fn whitney_pair_rejects_equal_frequencies() {
        assert!(matches!(whitney_pair(1.0, 1.0), Err(LabError::NoPair(_))));
    }

    #[test]
    fn partition_covers_exactly_once() {
        let r = verify_partition((-10.0, 10.0), 10_000, 7).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_multiplicity >= 1);
    }

    #[test]
    fn multiplicity_matches_enumeration_oracle() {
        // Brute-force oracle: an interval's partner count in the maximal
        // family, from first principles over a wide index range.
        fn oracle(k: i64) -> usize {
            (-40i64..=40)
                .filter(|&k2| k2 != k)
                .filter(|&k2| {
                    gap(k, k2) >= 4
                        && gap(k.div_euclid(2), k2.div_euclid(2)) < 4
                })
                .count()
        }
        for k in -6i64..=6 {
            assert_eq!(multiplicity_within(0, k, (-1e9, 1e9)), oracle(k), "k = {k}");
        }
        // Interior multiplicity is 9 for every parity.
        assert_eq!(oracle(0), 9);
        assert_eq!(oracle(1), 9);
    }

    #[test]
    fn partition_multiplicity_is_scale_invariant() {
        let a = verify_partition((-10.0, 10.0), 4000, 13).unwrap();
        let b = verify_partition((-160.0, 160.0), 4000, 13).unwrap();
        assert_eq!(a.violations, 0);
        assert_eq!(b.violations, 0);
        assert_eq!(a.max_multiplicity, b.max_multiplicity);
    }
}
