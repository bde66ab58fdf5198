//! Ball-level stability classification and the hierarchy-weighted scores.
//!
//! For an ordering pi and a level n, every ball B(n, b) of states sharing
//! digits `0..n` is classified by M, the longest digit prefix shared by the
//! images of its members (capped at N):
//!
//! * M < n: expanding (E) — the image set is wider than the ball,
//! * M = n: isometric (I) — widths match,
//! * M > n: contracting (A) — the image set is strictly narrower.
//!
//! Scores weight the per-level counts by `p^(N-n)`, so disagreement close to
//! the most influential digits dominates. All arithmetic is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use crate::padic::Ordering;

use crate::error::{Error, Result};
use crate::network::TransitionMap;
use crate::padic::{
    checked_pow, common_prefix_length, permute_encoding, power_rational, unpermute_encoding,
    BallIndex,
};

/// Stability class of a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    Expanding,
    Isometric,
    Contracting,
}

impl Class {
    pub fn letter(self) -> char {
        match self {
            Class::Expanding => 'E',
            Class::Isometric => 'I',
            Class::Contracting => 'A',
        }
    }

    pub fn from_prefix(prefix_len: usize, level: usize) -> Self {
        use std::cmp::Ordering::*;
        match prefix_len.cmp(&level) {
            Less => Class::Expanding,
            Equal => Class::Isometric,
            Greater => Class::Contracting,
        }
    }
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Classification detail for a single ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallStats {
    pub ball: BallIndex,
    /// M: longest common digit prefix of the member images, capped at N.
    pub prefix_len: usize,
    pub class: Class,
    /// Image-set diameter bound `t = p^(-M)`.
    pub t: BigRational,
    /// Width ratio `Lambda = p^(n - M)`.
    pub lambda: BigRational,
}

/// Per-class ball counts at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub n: usize,
    pub expanding: u64,
    pub isometric: u64,
    pub contracting: u64,
}

impl LevelCounts {
    pub fn total(&self) -> u64 {
        self.expanding + self.isometric + self.contracting
    }
}

/// The three hierarchy-weighted scores plus the per-level counts behind them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityScores {
    pub mu_e: u128,
    pub mu_a: u128,
    pub mu_i: u128,
    pub per_level: Vec<LevelCounts>,
}

impl StabilityScores {
    pub fn total(&self) -> u128 {
        self.mu_e + self.mu_a + self.mu_i
    }

    /// `(N-1) * p^N`, which the three scores always sum to.
    pub fn expected_total(p: u64, n: usize) -> Result<u128> {
        Ok((n.saturating_sub(1) as u128) * (checked_pow(p, n)? as u128))
    }
}

fn check_compatible(f: &TransitionMap, ordering: &Ordering) -> Result<()> {
    if ordering.len() != f.n {
        return Err(Error::WrongLength {
            expected: f.n,
            got: ordering.len(),
        });
    }
    Ok(())
}

/// Image of every state, re-encoded under the ordering and indexed by the
/// ordering-specific encoding of the source state.
pub fn permuted_images(f: &TransitionMap, ordering: &Ordering) -> Result<Vec<u64>> {
    check_compatible(f, ordering)?;
    let size = f.images.len();
    let mut out = vec![0u64; size];
    for m in 0..size {
        let s = permute_encoding(m as u64, ordering, f.p, f.n);
        out[s as usize] = permute_encoding(f.images[m], ordering, f.p, f.n);
    }
    Ok(out)
}

/// The dynamics as seen through an ordering: state s maps to the re-encoded
/// image of the state s denotes. Stability under the identity ordering of the
/// result equals stability of `f` under `ordering`.
pub fn conjugate_by_ordering(f: &TransitionMap, ordering: &Ordering) -> Result<TransitionMap> {
    check_compatible(f, ordering)?;
    let size = f.images.len();
    let mut images = vec![0u64; size];
    for (s, slot) in images.iter_mut().enumerate() {
        let m = unpermute_encoding(s as u64, ordering, f.p, f.n);
        *slot = permute_encoding(f.images[m as usize], ordering, f.p, f.n);
    }
    TransitionMap::new(f.p, f.n, images)
}

/// M for every level-n ball, indexed by ball prefix. One pass over all states.
pub fn level_prefixes(f: &TransitionMap, ordering: &Ordering, n: usize) -> Result<Vec<usize>> {
    check_compatible(f, ordering)?;
    if n > f.n {
        return Err(Error::ValueOutOfRange {
            value: n as u64,
            limit: f.n as u64 + 1,
        });
    }
    let images = permuted_images(f, ordering)?;
    Ok(prefixes_from_permuted(&images, f.p, f.n, n))
}

/// Core of the level pass, reused by the search module on pre-permuted images.
pub(crate) fn prefixes_from_permuted(
    permuted: &[u64],
    p: u64,
    num_genes: usize,
    n: usize,
) -> Vec<usize> {
    let balls = checked_pow(p, n).expect("level fits if the map was constructed") as usize;
    if p == 2 {
        let mut reference = vec![0u64; balls];
        let mut diff = vec![0u64; balls];
        let mut seen = vec![false; balls];
        let mask = (balls - 1) as u64;
        for (s, &y) in permuted.iter().enumerate() {
            let b = (s as u64 & mask) as usize;
            if seen[b] {
                diff[b] |= y ^ reference[b];
            } else {
                reference[b] = y;
                seen[b] = true;
            }
        }
        return diff
            .iter()
            .map(|d| (d.trailing_zeros() as usize).min(num_genes))
            .collect();
    }
    let mut reference = vec![0u64; balls];
    let mut agree = vec![num_genes; balls];
    let mut seen = vec![false; balls];
    for (s, &y) in permuted.iter().enumerate() {
        let b = (s as u64 % balls as u64) as usize;
        if !seen[b] {
            reference[b] = y;
            seen[b] = true;
            continue;
        }
        if agree[b] == 0 {
            continue;
        }
        let mut a = reference[b];
        let mut c = y;
        let mut len = 0usize;
        while len < agree[b] && a % p == c % p {
            a /= p;
            c /= p;
            len += 1;
        }
        agree[b] = agree[b].min(len);
    }
    agree
}

/// Classification of one ball, with exact t and Lambda.
pub fn ball_stats(
    f: &TransitionMap,
    ordering: &Ordering,
    n: usize,
    index: u64,
) -> Result<BallStats> {
    check_compatible(f, ordering)?;
    let modulus = checked_pow(f.p, n)?;
    if index >= modulus {
        return Err(Error::ValueOutOfRange {
            value: index,
            limit: modulus,
        });
    }
    let members = f.size() / modulus;
    let mut images = Vec::with_capacity(members as usize);
    for t in 0..members {
        let s = index + t * modulus;
        let m = unpermute_encoding(s, ordering, f.p, f.n);
        images.push(permute_encoding(f.images[m as usize], ordering, f.p, f.n));
    }
    let prefix_len = common_prefix_length(&images, f.p, f.n)?;
    Ok(BallStats {
        ball: BallIndex { level: n, index },
        prefix_len,
        class: Class::from_prefix(prefix_len, n),
        t: power_rational(f.p, -(prefix_len as i64)),
        lambda: power_rational(f.p, n as i64 - prefix_len as i64),
    })
}

/// E/I/A ball counts at a single level.
pub fn level_counts(f: &TransitionMap, ordering: &Ordering, n: usize) -> Result<LevelCounts> {
    let prefixes = level_prefixes(f, ordering, n)?;
    Ok(counts_from_prefixes(&prefixes, n))
}

fn counts_from_prefixes(prefixes: &[usize], n: usize) -> LevelCounts {
    let mut counts = LevelCounts {
        n,
        expanding: 0,
        isometric: 0,
        contracting: 0,
    };
    for &m in prefixes {
        match Class::from_prefix(m, n) {
            Class::Expanding => counts.expanding += 1,
            Class::Isometric => counts.isometric += 1,
            Class::Contracting => counts.contracting += 1,
        }
    }
    counts
}

/// Prefixes of the expanding balls at level n, ascending.
pub fn expanding_set(f: &TransitionMap, ordering: &Ordering, n: usize) -> Result<Vec<u64>> {
    let prefixes = level_prefixes(f, ordering, n)?;
    Ok(prefixes
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m < n)
        .map(|(b, _)| b as u64)
        .collect())
}

/// All three scores in one sweep: levels 1 through N-1, each level one pass.
pub fn stability_scores(f: &TransitionMap, ordering: &Ordering) -> Result<StabilityScores> {
    let images = permuted_images(f, ordering)?;
    let mut per_level = Vec::new();
    let mut mu_e: u128 = 0;
    let mut mu_a: u128 = 0;
    let mut mu_i: u128 = 0;
    for n in 1..f.n {
        let prefixes = prefixes_from_permuted(&images, f.p, f.n, n);
        let counts = counts_from_prefixes(&prefixes, n);
        let weight = checked_pow(f.p, f.n - n)? as u128;
        mu_e += counts.expanding as u128 * weight;
        mu_a += counts.contracting as u128 * weight;
        mu_i += counts.isometric as u128 * weight;
        per_level.push(counts);
    }
    Ok(StabilityScores {
        mu_e,
        mu_a,
        mu_i,
        per_level,
    })
}

/// Same scores through the measure-theoretic formula
/// `mu = p^N * sum_n count(n) / p^n`, computed with exact rationals. Must
/// agree with [`stability_scores`] bit for bit.
pub fn scores_via_haar(f: &TransitionMap, ordering: &Ordering) -> Result<StabilityScores> {
    let images = permuted_images(f, ordering)?;
    let mut per_level = Vec::new();
    let mut sums = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
    for n in 1..f.n {
        let prefixes = prefixes_from_permuted(&images, f.p, f.n, n);
        let counts = counts_from_prefixes(&prefixes, n);
        let scale = power_rational(f.p, -(n as i64));
        sums[0] += BigRational::from_integer(BigInt::from(counts.expanding)) * &scale;
        sums[1] += BigRational::from_integer(BigInt::from(counts.contracting)) * &scale;
        sums[2] += BigRational::from_integer(BigInt::from(counts.isometric)) * &scale;
        per_level.push(counts);
    }
    let volume = power_rational(f.p, f.n as i64);
    let mut out = [0u128; 3];
    for (slot, sum) in out.iter_mut().zip(&sums) {
        let scaled = sum * &volume;
        debug_assert!(scaled.is_integer(), "Haar totals must be integral");
        let int = scaled.to_integer();
        debug_assert!(!int.is_negative());
        *slot = int.to_u128().expect("score fits in 128 bits");
    }
    Ok(StabilityScores {
        mu_e: out[0],
        mu_a: out[1],
        mu_i: out[2],
        per_level,
    })
}
