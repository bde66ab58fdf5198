//! Randomized properties of encodings, distances, classification, scores,
//! and searches, checked against the digit-vector oracle in `common`.

mod common;

use std::collections::BTreeMap;

use grn_padic_core::{
    branch_and_bound_minimize, checked_pow, classification_sequence, common_prefix_length,
    conjugate_by_ordering, decode, encode, encoded_distance, exhaustive_minimize, find_fixed_points,
    ga_minimize, level_counts, level_prefixes, scores_via_haar, stability_scores, truncate,
    ball_stats, Class, Configuration, Evaluator, GAConfig, Ordering, StabilityScores,
    TransitionMap,
};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use common::{oracle_permute, oracle_prefix_len, oracle_scores, random_map, random_perm};

/// (p, N) pairs small enough for brute-force comparison.
fn small_shape() -> impl Strategy<Value = (u64, usize)> {
    prop_oneof![
        (Just(2u64), 2usize..=8),
        (Just(3u64), 2usize..=5),
        (Just(5u64), 2usize..=4),
    ]
}

fn shape_with_seed() -> impl Strategy<Value = (u64, usize, u64)> {
    small_shape().prop_flat_map(|(p, n)| (Just(p), Just(n), any::<u64>()))
}

fn map_and_perm(seed: u64, p: u64, n: usize) -> (TransitionMap, Vec<usize>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let f = random_map(&mut rng, p, n);
    let perm = random_perm(&mut rng, n);
    (f, perm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// encode is the oracle's digit-reordering; decode inverts it.
    #[test]
    fn encode_decode_round_trip((p, n, seed) in shape_with_seed()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let perm = random_perm(&mut rng, n);
        let ordering = Ordering::new(perm.clone()).unwrap();
        for _ in 0..16 {
            let states: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            let config = Configuration::new(states.clone());
            let m = encode(&config, &ordering, p).unwrap();
            let canonical: u64 = states
                .iter()
                .enumerate()
                .map(|(g, &s)| s * checked_pow(p, g).unwrap())
                .sum();
            prop_assert_eq!(m, oracle_permute(canonical, &perm, p));
            prop_assert_eq!(decode(m, &ordering, p, n).unwrap(), config);
        }
    }

    /// d(a,b) = 0 iff a = b, symmetry, and the strong triangle inequality.
    #[test]
    fn distance_is_ultrametric((p, n, seed) in shape_with_seed()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let size = checked_pow(p, n).unwrap();
        for _ in 0..24 {
            let a = rng.gen_range(0..size);
            let b = rng.gen_range(0..size);
            let c = rng.gen_range(0..size);
            let dab = encoded_distance(a, b, p, n).unwrap();
            let dba = encoded_distance(b, a, p, n).unwrap();
            let dbc = encoded_distance(b, c, p, n).unwrap();
            let dac = encoded_distance(a, c, p, n).unwrap();
            prop_assert_eq!(&dab, &dba);
            prop_assert_eq!(dab.is_zero(), a == b);
            let bound = if dab >= dbc { dab.clone() } else { dbc.clone() };
            prop_assert!(dac <= bound, "d(a,c) {} > max {}", dac, bound);
        }
    }

    /// Finer truncations refine coarser ones, and members of the finer ball
    /// stay inside the coarser ball.
    #[test]
    fn balls_nest((p, n, seed) in shape_with_seed()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let size = checked_pow(p, n).unwrap();
        let m = rng.gen_range(0..size);
        for level in 1..n {
            let coarse = truncate(m, level - 1, p).unwrap();
            let fine = truncate(m, level, p).unwrap();
            prop_assert_eq!(fine.index % checked_pow(p, level - 1).unwrap(), coarse.index);
            // Distance within the finer ball never exceeds its radius bound.
            let radius = grn_padic_core::padic::power_rational(p, -(level as i64));
            let other = fine.index + checked_pow(p, level).unwrap()
                * rng.gen_range(0..size / checked_pow(p, level).unwrap());
            let d = encoded_distance(m, other, p, n).unwrap();
            prop_assert!(d <= radius);
        }
    }

    /// Image prefix lengths agree with the digit-column oracle at all levels.
    #[test]
    fn prefixes_match_oracle((p, n, seed) in shape_with_seed()) {
        let (f, perm) = map_and_perm(seed, p, n);
        let ordering = Ordering::new(perm.clone()).unwrap();
        for level in 1..n {
            let got = level_prefixes(&f, &ordering, level).unwrap();
            let want = common::oracle_level_prefixes(&f, &perm, level);
            for (key, m_len) in want {
                let index = common::from_digits(&key, p);
                prop_assert_eq!(got[index as usize], m_len, "level {} ball {}", level, index);
            }
        }
    }

    /// Sub-ball image diameters never exceed the parent ball's: t is
    /// monotone along every chain of nested balls.
    #[test]
    fn radius_monotone_along_chains((p, n, seed) in shape_with_seed()) {
        let (f, perm) = map_and_perm(seed, p, n);
        let ordering = Ordering::new(perm).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e37);
        let m = rng.gen_range(0..f.size());
        let mut prev: Option<BigRational> = None;
        for level in 1..n {
            let ball = truncate(m, level, p).unwrap();
            let stats = ball_stats(&f, &ordering, level, ball.index).unwrap();
            if let Some(parent_t) = prev {
                prop_assert!(stats.t <= parent_t, "level {}", level);
            }
            prev = Some(stats.t);
        }
    }

    /// The three scores match the oracle and sum to (N-1) p^N.
    #[test]
    fn scores_match_oracle_and_control_identity((p, n, seed) in shape_with_seed()) {
        let (f, perm) = map_and_perm(seed, p, n);
        let ordering = Ordering::new(perm.clone()).unwrap();
        let scores = stability_scores(&f, &ordering).unwrap();
        let (mu_e, mu_a, mu_i) = oracle_scores(&f, &perm);
        prop_assert_eq!(scores.mu_e, mu_e);
        prop_assert_eq!(scores.mu_a, mu_a);
        prop_assert_eq!(scores.mu_i, mu_i);
        prop_assert_eq!(
            scores.total(),
            StabilityScores::expected_total(p, n).unwrap()
        );
    }

    /// The rational Haar-sum formulation reproduces the integer scores
    /// exactly.
    #[test]
    fn haar_equals_weighted_counts((p, n, seed) in shape_with_seed()) {
        let (f, perm) = map_and_perm(seed, p, n);
        let ordering = Ordering::new(perm).unwrap();
        let direct = stability_scores(&f, &ordering).unwrap();
        let haar = scores_via_haar(&f, &ordering).unwrap();
        prop_assert_eq!(direct, haar);
    }

    /// Level-n expanding counts depend only on the first n ordering
    /// positions; the full level-n counts depend only on the first n+1.
    #[test]
    fn counts_depend_only_on_prefix((p, n, seed) in shape_with_seed()) {
        let (f, perm) = map_and_perm(seed, p, n);
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xabcd);
        for level in 1..n {
            let base = level_counts(&f, &Ordering::new(perm.clone()).unwrap(), level).unwrap();
            // Scramble positions >= level: expanding count must not move.
            let mut scrambled = perm.clone();
            let tail = random_perm(&mut rng, n - level);
            let orig_tail: Vec<usize> = scrambled[level..].to_vec();
            for (slot, &pick) in scrambled[level..].iter_mut().zip(&tail) {
                *slot = orig_tail[pick];
            }
            let moved = level_counts(&f, &Ordering::new(scrambled).unwrap(), level).unwrap();
            prop_assert_eq!(base.expanding, moved.expanding, "level {}", level);
            // Scramble positions > level: the whole triple must hold.
            if level + 1 < n {
                let mut gentle = perm.clone();
                let tail = random_perm(&mut rng, n - level - 1);
                let orig_tail: Vec<usize> = gentle[level + 1..].to_vec();
                for (slot, &pick) in gentle[level + 1..].iter_mut().zip(&tail) {
                    *slot = orig_tail[pick];
                }
                let held = level_counts(&f, &Ordering::new(gentle).unwrap(), level).unwrap();
                prop_assert_eq!(base, held, "level {}", level);
            }
        }
    }

    /// Scoring under an ordering equals scoring the conjugated map under the
    /// identity: the scores are intrinsic to the relabeled dynamics.
    #[test]
    fn scores_intrinsic_to_conjugated_map((p, n, seed) in shape_with_seed()) {
        let (f, perm) = map_and_perm(seed, p, n);
        let ordering = Ordering::new(perm).unwrap();
        let direct = stability_scores(&f, &ordering).unwrap();
        let conj = conjugate_by_ordering(&f, &ordering).unwrap();
        let intrinsic = stability_scores(&conj, &Ordering::identity(n)).unwrap();
        prop_assert_eq!(direct, intrinsic);
    }

    /// The incremental search evaluator agrees with the reference scorer.
    #[test]
    fn evaluator_matches_reference((p, n, seed) in shape_with_seed()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let f = random_map(&mut rng, p, n);
        let evaluator = Evaluator::new(&f).unwrap();
        for _ in 0..8 {
            let perm = random_perm(&mut rng, n);
            let ordering = Ordering::new(perm).unwrap();
            let reference = stability_scores(&f, &ordering).unwrap().mu_e;
            prop_assert_eq!(evaluator.mu_e(&ordering), reference);
        }
    }

    /// Classification sequences of fixed points agree with per-ball stats
    /// along the truncation chain.
    #[test]
    fn fixed_point_sequences_consistent((p, n, seed) in shape_with_seed()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut f = random_map(&mut rng, p, n);
        // Force at least one fixed point.
        let pin = rng.gen_range(0..f.size());
        let mut images = f.images.clone();
        images[pin as usize] = pin;
        f = TransitionMap::new(p, n, images).unwrap();
        let perm = random_perm(&mut rng, n);
        let ordering = Ordering::new(perm).unwrap();
        for canonical in find_fixed_points(&f) {
            let encoded = grn_padic_core::permute_encoding(canonical, &ordering, p, n);
            let seq = classification_sequence(&f, &ordering, encoded).unwrap();
            prop_assert_eq!(seq.len(), n - 1);
            for (i, class) in seq.iter().enumerate() {
                let ball = truncate(encoded, i + 1, p).unwrap();
                let stats = ball_stats(&f, &ordering, i + 1, ball.index).unwrap();
                prop_assert_eq!(*class, stats.class);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Branch-and-bound reproduces the exhaustive optimum and the complete
    /// minimizer set on spaces small enough to enumerate.
    #[test]
    fn branch_and_bound_equals_exhaustive(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let f = random_map(&mut rng, 2, n);
        let full = exhaustive_minimize(&f).unwrap();
        let pruned = branch_and_bound_minimize(&f, None).unwrap();
        prop_assert!(full.certified && pruned.certified);
        prop_assert_eq!(full.best_score, pruned.best_score);
        prop_assert_eq!(full.minimizers, pruned.minimizers);
    }

    /// A fixed seed makes the genetic search fully reproducible, and its
    /// result never beats the true optimum.
    #[test]
    fn ga_deterministic_and_sound(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let f = random_map(&mut rng, 2, n);
        let config = GAConfig { population: 24, generations: 30, seed, ..GAConfig::default() };
        let a = ga_minimize(&f, &config).unwrap();
        let b = ga_minimize(&f, &config).unwrap();
        prop_assert_eq!(a.best_score, b.best_score);
        prop_assert_eq!(a.minimizers, b.minimizers);
        prop_assert_eq!(a.evaluations, b.evaluations);
        let truth = exhaustive_minimize(&f).unwrap();
        prop_assert!(a.best_score >= truth.best_score);
    }
}

/// Hand-computed micro-case: p=2, N=2, images 0->3, 1->1, 2->0, 3->2.
/// Level-1 balls {0,2} and {1,3} both have images disagreeing in digit 0,
/// so both expand and mu = (4, 0, 0).
#[test]
fn micro_case_by_hand() {
    let f = TransitionMap::new(2, 2, vec![3, 1, 0, 2]).unwrap();
    let ordering = Ordering::identity(2);
    let scores = stability_scores(&f, &ordering).unwrap();
    assert_eq!((scores.mu_e, scores.mu_a, scores.mu_i), (4, 0, 0));
    assert_eq!(oracle_scores(&f, &[0, 1]), (4, 0, 0));
    assert_eq!(
        level_counts(&f, &ordering, 1).unwrap().expanding,
        2
    );
}

/// The documented diameter bound: every image pair of a ball sits within
/// distance t of each other, and the bound is attained for some pair when
/// the images differ.
#[test]
fn image_diameter_matches_t() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..20 {
        let f = random_map(&mut rng, 2, 5);
        let perm = random_perm(&mut rng, 5);
        let ordering = Ordering::new(perm.clone()).unwrap();
        for level in 1..5 {
            let modulus = checked_pow(2, level).unwrap();
            for index in 0..modulus {
                let stats = ball_stats(&f, &ordering, level, index).unwrap();
                let mut images = Vec::new();
                for t in 0..f.size() / modulus {
                    let s = index + t * modulus;
                    let canonical = grn_padic_core::unpermute_encoding(s, &ordering, 2, 5);
                    images.push(grn_padic_core::permute_encoding(
                        f.apply(canonical),
                        &ordering,
                        2,
                        5,
                    ));
                }
                let mut attained = BigRational::zero();
                for (i, &a) in images.iter().enumerate() {
                    for &b in &images[i + 1..] {
                        let d = encoded_distance(a, b, 2, 5).unwrap();
                        assert!(d <= stats.t, "pair exceeds diameter bound");
                        if d > attained {
                            attained = d;
                        }
                    }
                }
                if images.iter().any(|&x| x != images[0]) {
                    assert_eq!(attained, stats.t, "diameter not attained");
                }
            }
        }
    }
}

/// Oracle self-check: prefix length on explicit digit vectors.
#[test]
fn oracle_prefix_sanity() {
    // 6 = (0,1,1) and 2 = (0,1,0) in LSB-first binary share two digits.
    assert_eq!(oracle_prefix_len(&[6, 2], 2, 3), 2);
    assert_eq!(oracle_prefix_len(&[5, 5], 2, 3), 3);
    assert_eq!(oracle_prefix_len(&[1, 2], 2, 3), 0);
    assert_eq!(
        common_prefix_length(&[6, 2], 2, 3).unwrap(),
        oracle_prefix_len(&[6, 2], 2, 3)
    );
}

/// Conjugation preserves dynamics up to relabeling: fixed point counts and
/// orbit structure are invariant.
#[test]
fn conjugation_preserves_fixed_points() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = random_map(&mut rng, 3, 4);
        let perm = random_perm(&mut rng, 4);
        let ordering = Ordering::new(perm).unwrap();
        let conj = conjugate_by_ordering(&f, &ordering).unwrap();
        let mut mapped: Vec<u64> = find_fixed_points(&f)
            .into_iter()
            .map(|m| grn_padic_core::permute_encoding(m, &ordering, 3, 4))
            .collect();
        mapped.sort_unstable();
        assert_eq!(find_fixed_points(&conj), mapped);
    }
}

/// Labels keyed by canonical encoding survive the report round trip.
#[test]
fn fixed_point_report_labels() {
    let f = TransitionMap::new(2, 3, vec![0, 0, 2, 2, 4, 4, 6, 6]).unwrap();
    let mut labels = BTreeMap::new();
    for (i, m) in find_fixed_points(&f).into_iter().enumerate() {
        labels.insert(m, format!("state-{i}"));
    }
    let reports =
        grn_padic_core::fixed_point_report(&f, &Ordering::identity(3), Some(&labels)).unwrap();
    assert_eq!(reports.len(), labels.len());
    for report in reports {
        assert_eq!(
            report.label.as_deref(),
            labels.get(&report.canonical).map(|s| s.as_str())
        );
        assert!(matches!(
            report.sequence.first(),
            Some(Class::Expanding | Class::Isometric | Class::Contracting)
        ));
    }
}
