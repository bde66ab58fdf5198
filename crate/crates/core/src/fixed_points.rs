//! Fixed points, periodic orbits, and per-level classification sequences.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::TransitionMap;
use crate::padic::{decode, permute_encoding, truncate, BallIndex, Configuration, Ordering};
use crate::stability::{ball_stats, Class};

/// A fixed point together with the chain of balls that contain it and the
/// stability class of each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub config: Configuration,
    /// Encoding under the reporting ordering.
    pub encoded: u64,
    /// Encoding in canonical (declaration) gene order.
    pub canonical: u64,
    /// Containing balls at levels 1 through N-1.
    pub ball_chain: Vec<BallIndex>,
    /// Class of each ball in the chain, most influential level first.
    pub sequence: Vec<Class>,
    pub label: Option<String>,
}

impl FixedPointReport {
    /// The sequence as a compact word like `IEAA`.
    pub fn sequence_word(&self) -> String {
        self.sequence.iter().map(|c| c.letter()).collect()
    }
}

/// Canonical encodings of all fixed points, ascending.
pub fn find_fixed_points(f: &TransitionMap) -> Vec<u64> {
    f.images
        .iter()
        .enumerate()
        .filter(|&(m, &y)| m as u64 == y)
        .map(|(m, _)| m as u64)
        .collect()
}

/// Cycles of length at least 2, each rotated to start at its smallest state
/// and sorted by that state. Canonical encodings.
pub fn find_periodic_orbits(f: &TransitionMap) -> Vec<Vec<u64>> {
    let size = f.images.len();
    // 0 = unvisited, 1 = on the current walk, 2 = settled.
    let mut color = vec![0u8; size];
    let mut walk_pos = vec![0usize; size];
    let mut orbits = Vec::new();
    for start in 0..size {
        if color[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut s = start;
        while color[s] == 0 {
            color[s] = 1;
            walk_pos[s] = path.len();
            path.push(s);
            s = f.images[s] as usize;
        }
        if color[s] == 1 {
            let cycle: Vec<u64> = path[walk_pos[s]..].iter().map(|&m| m as u64).collect();
            if cycle.len() > 1 {
                let min_at = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|&(_, &m)| m)
                    .map(|(i, _)| i)
                    .unwrap();
                let mut rotated = cycle[min_at..].to_vec();
                rotated.extend_from_slice(&cycle[..min_at]);
                orbits.push(rotated);
            }
        }
        for &m in &path {
            color[m] = 2;
        }
    }
    orbits.sort();
    orbits
}

/// Stability classes of the balls containing a fixed point, levels 1..N-1.
/// `encoded` is the fixed point's encoding under `ordering`.
pub fn classification_sequence(
    f: &TransitionMap,
    ordering: &Ordering,
    encoded: u64,
) -> Result<Vec<Class>> {
    let canonical = crate::padic::unpermute_encoding(encoded, ordering, f.p, f.n);
    if !f.is_fixed_point(canonical) {
        return Err(Error::NotFixedPoint(encoded));
    }
    let mut sequence = Vec::with_capacity(f.n.saturating_sub(1));
    for n in 1..f.n {
        let ball = truncate(encoded, n, f.p)?;
        sequence.push(ball_stats(f, ordering, n, ball.index)?.class);
    }
    Ok(sequence)
}

/// Reports for every fixed point, sorted by encoding under `ordering`.
/// `labels` are keyed by canonical encoding, as in network file annotations.
pub fn fixed_point_report(
    f: &TransitionMap,
    ordering: &Ordering,
    labels: Option<&BTreeMap<u64, String>>,
) -> Result<Vec<FixedPointReport>> {
    let mut reports = Vec::new();
    for canonical in find_fixed_points(f) {
        let encoded = permute_encoding(canonical, ordering, f.p, f.n);
        let mut ball_chain = Vec::with_capacity(f.n.saturating_sub(1));
        for n in 1..f.n {
            ball_chain.push(truncate(encoded, n, f.p)?);
        }
        reports.push(FixedPointReport {
            config: decode(canonical, &Ordering::identity(f.n), f.p, f.n)?,
            encoded,
            canonical,
            sequence: classification_sequence(f, ordering, encoded)?,
            ball_chain,
            label: labels.and_then(|map| map.get(&canonical).cloned()),
        });
    }
    reports.sort_by_key(|r| r.encoded);
    Ok(reports)
}
