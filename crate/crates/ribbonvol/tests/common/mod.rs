//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ribbonvol::ribbon::{enumerate_trivalent, next_permutation, RibbonGraph};
use ribbonvol::scalar::ratio;

/// Types on which the property suites run.
pub const SMALL_TYPES: [(usize, usize); 3] = [(0, 4), (1, 1), (1, 2)];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive rationals with small numerators and denominators.
pub fn random_lengths(rng: &mut ChaCha8Rng, k: usize) -> Vec<BigRational> {
    (0..k).map(|_| ratio(rng.gen_range(1..40), rng.gen_range(1..8))).collect()
}

/// Every face-labelled trivalent graph of the small types.
pub fn small_trivalent() -> Vec<RibbonGraph> {
    SMALL_TYPES.iter().flat_map(|&(g, n)| enumerate_trivalent(g, n).unwrap()).collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(a.abs())
}

/// Smallest row-sorted form of a 0/1 matrix over all column permutations.
fn canonical(m: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let d = m[0].len();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut best: Option<Vec<Vec<u8>>> = None;
    loop {
        let mut rows: Vec<Vec<u8>> = m.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        rows.sort();
        if best.as_ref().map_or(true, |b| rows < *b) {
            best = Some(rows);
        }
        if !next_permutation(&mut perm) {
            return best.unwrap();
        }
    }
}

/// Every product of at most three forms in at most three variables, with no
/// zero form and no unused variable, up to permutation.
pub fn instances() -> Vec<Vec<Vec<u8>>> {
    let mut seen = BTreeSet::new();
    for e in 1..=3usize {
        for d in 1..=3usize {
            for bits in 0u32..1 << (e * d) {
                let m: Vec<Vec<u8>> =
                    (0..e).map(|i| (0..d).map(|j| (bits >> (i * d + j) & 1) as u8).collect()).collect();
                if m.iter().any(|r| r.iter().all(|&x| x == 0)) || (0..d).any(|j| m.iter().all(|r| r[j] == 0)) {
                    continue;
                }
                seen.insert(canonical(&m));
            }
        }
    }
    seen.into_iter().collect()
}
