//! Brute-force reference implementations for cross-checking the library.
//!
//! Everything here recomputes results from first principles with digit
//! vectors and map-based grouping, deliberately sharing no code or technique
//! with the production paths (which work on packed integers).

use std::collections::BTreeMap;

use grn_padic_core::TransitionMap;
use rand::Rng;

/// Base-p digits of `m`, least significant first, padded to `n`.
pub fn digits(m: u64, p: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut rest = m;
    for _ in 0..n {
        out.push(rest % p);
        rest /= p;
    }
    out
}

pub fn from_digits(ds: &[u64], p: u64) -> u64 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Encoding of a canonical state under an ordering, built digit by digit:
/// position k of the encoding carries the state of gene `perm[k]`.
pub fn oracle_permute(m: u64, perm: &[usize], p: u64) -> u64 {
    let ds = digits(m, p, perm.len());
    let reordered: Vec<u64> = perm.iter().map(|&g| ds[g]).collect();
    from_digits(&reordered, p)
}

/// Longest shared digit prefix across a set of encodings, capped at n.
pub fn oracle_prefix_len(values: &[u64], p: u64, n: usize) -> usize {
    for len in 0..n {
        let column: Vec<u64> = values.iter().map(|&v| digits(v, p, n)[len]).collect();
        if column.windows(2).any(|w| w[0] != w[1]) {
            return len;
        }
    }
    n
}

/// Per-ball image prefix lengths at one level, computed by grouping every
/// state into its ball through a digit-prefix key.
pub fn oracle_level_prefixes(
    f: &TransitionMap,
    perm: &[usize],
    level: usize,
) -> BTreeMap<Vec<u64>, usize> {
    let n = perm.len();
    let mut groups: BTreeMap<Vec<u64>, Vec<u64>> = BTreeMap::new();
    for m in 0..f.size() {
        let enc = oracle_permute(m, perm, f.p);
        let key = digits(enc, f.p, n)[..level].to_vec();
        let image = oracle_permute(f.apply(m), perm, f.p);
        groups.entry(key).or_default().push(image);
    }
    groups
        .into_iter()
        .map(|(key, images)| (key, oracle_prefix_len(&images, f.p, n)))
        .collect()
}

/// The three scores, accumulated per level from the grouped prefixes.
pub fn oracle_scores(f: &TransitionMap, perm: &[usize]) -> (u128, u128, u128) {
    let n = perm.len();
    let (mut mu_e, mut mu_a, mut mu_i) = (0u128, 0u128, 0u128);
    for level in 1..n {
        let weight = (f.p as u128).pow((n - level) as u32);
        for (_, m_len) in oracle_level_prefixes(f, perm, level) {
            if m_len < level {
                mu_e += weight;
            } else if m_len == level {
                mu_i += weight;
            } else {
                mu_a += weight;
            }
        }
    }
    (mu_e, mu_a, mu_i)
}

/// Uniform random transition map over `p^n` states.
pub fn random_map(rng: &mut impl Rng, p: u64, n: usize) -> TransitionMap {
    let size = (p as u64).pow(n as u32);
    let images = (0..size).map(|_| rng.gen_range(0..size)).collect();
    TransitionMap::new(p, n, images).unwrap()
}

/// Fisher-Yates permutation of `0..n`.
pub fn random_perm(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}
