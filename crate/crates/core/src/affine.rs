//! Affine local models: on each ball the dynamics act like `z -> A(z - m) + beta`
//! with `A` a pure power of p, reproducing the image prefix and the exact
//! image-set diameter.
//!
//! Because the unit part of A is 1, the model has the closed form
//! `g(m + p^n y) = beta + p^M y`, which the verifier exploits to cross-check
//! the scalar arithmetic against exact integer computations.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::TransitionMap;
use crate::padic::{
    checked_pow, common_prefix_length, permute_encoding, power_rational, unpermute_encoding,
    BallIndex, Ordering, PadicScalar,
};
use crate::stability::level_prefixes;

/// Affine representative of one ball's dynamics at level n:
/// `g(z) = A (z - m) + beta` where m is the ball prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineLocalMap {
    pub ball: BallIndex,
    /// Multiplier `A = p^(M - n)`, unit part 1. Negative valuation on
    /// expanding balls.
    pub a: PadicScalar,
    /// Shared image prefix, below `p^M`.
    pub beta: u64,
    /// M for this ball.
    pub prefix_len: usize,
}

impl AffineLocalMap {
    /// `t = p^(-M)`, the image-set diameter this model attains.
    pub fn t(&self, p: u64) -> BigRational {
        power_rational(p, -(self.prefix_len as i64))
    }
}

/// Scalar digits tracked in model multipliers: twice the gene count.
pub fn default_precision(num_genes: usize) -> usize {
    (2 * num_genes).max(1)
}

/// Builds the affine model of every ball at one level.
pub fn build_affine_model(
    f: &TransitionMap,
    ordering: &Ordering,
    n: usize,
) -> Result<Vec<AffineLocalMap>> {
    let prefixes = level_prefixes(f, ordering, n)?;
    let precision = default_precision(f.n);
    let mut out = Vec::with_capacity(prefixes.len());
    for (index, &m_len) in prefixes.iter().enumerate() {
        let index = index as u64;
        // Any member's image carries the shared prefix.
        let member = unpermute_encoding(index, ordering, f.p, f.n);
        let image = permute_encoding(f.images[member as usize], ordering, f.p, f.n);
        let beta = image % checked_pow(f.p, m_len)?;
        out.push(AffineLocalMap {
            ball: BallIndex { level: n, index },
            a: PadicScalar::pure_power(m_len as i64 - n as i64, f.p, precision),
            beta,
            prefix_len: m_len,
        });
    }
    Ok(out)
}

/// What the verifier established for one ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallVerification {
    pub ball: BallIndex,
    pub samples: usize,
    /// Whether some pair among sampled images and true member images sits at
    /// distance exactly t. Trivially false when every image coincides.
    pub diameter_attained: bool,
    /// False when the ball's image set is a single point.
    pub distinct_images: bool,
}

/// Checks one ball's model against the dynamics:
///
/// * every true member image agrees with beta on M digits,
/// * `|g(z) - beta|_p <= t` for sampled `z = m + p^n y`, evaluated both with
///   scalar arithmetic and with the closed form,
/// * the diameter t is attained over samples plus true images (when the
///   image set has at least two points).
pub fn verify_mapping_property(
    f: &TransitionMap,
    ordering: &Ordering,
    model: &AffineLocalMap,
    samples: usize,
    rng_seed: u64,
) -> Result<BallVerification> {
    let n = model.ball.level;
    let index = model.ball.index;
    let m_len = model.prefix_len;
    let violation = |detail: String| Error::MappingViolation {
        level: n,
        index,
        detail,
    };
    let modulus = checked_pow(f.p, n)?;
    let prefix_mod = checked_pow(f.p, m_len)?;
    let members = f.size() / modulus;

    // True images of every member, re-encoded under the ordering.
    let mut images = Vec::with_capacity(members as usize);
    for t in 0..members {
        let s = index + t * modulus;
        let c = unpermute_encoding(s, ordering, f.p, f.n);
        let y = permute_encoding(f.images[c as usize], ordering, f.p, f.n);
        if y % prefix_mod != model.beta {
            return Err(violation(format!(
                "member {s} maps to {y}, which disagrees with beta = {} within {m_len} digits",
                model.beta
            )));
        }
        images.push(y);
    }
    let true_prefix = common_prefix_length(&images, f.p, f.n)?;
    if true_prefix != m_len {
        return Err(violation(format!(
            "model claims M = {m_len}, dynamics give {true_prefix}"
        )));
    }

    // Sample offsets y with enough digits to exercise the precision window.
    let digits = (default_precision(f.n)).min(63 / (64 - f.p.leading_zeros()).max(1) as usize);
    let y_range = checked_pow(f.p, digits.max(1)).unwrap_or(1 << 62);
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let t_bound = model.t(f.p);
    let precision = default_precision(f.n);
    let mut sampled_y = Vec::with_capacity(samples);
    for k in 0..samples {
        let y = rng.gen_range(0..y_range);
        sampled_y.push(y);
        // Scalar path: |A (z - m)|_p with z - m = p^n y.
        let offset = PadicScalar::from_integer(y as i128, f.p, precision)
            .mul(&PadicScalar::pure_power(n as i64, f.p, precision));
        let displacement = model.a.mul(&offset);
        if displacement.padic_abs() > t_bound {
            return Err(violation(format!(
                "sample {k}: |g(z) - beta| = {} exceeds t = {}",
                displacement.padic_abs(),
                t_bound
            )));
        }
        // Closed form: g(z) - beta = p^M y; the valuations must agree.
        let closed = PadicScalar::from_integer(y as i128, f.p, precision)
            .mul(&PadicScalar::pure_power(m_len as i64, f.p, precision));
        if displacement.padic_abs() != closed.padic_abs() {
            return Err(violation(format!(
                "sample {k}: scalar and closed-form magnitudes disagree"
            )));
        }
    }

    // Diameter: max pairwise distance over true images and sampled images.
    // Both image families share the prefix beta, so every distance is at most
    // t; attainment needs one pair differing at digit M exactly. Attainment
    // is only guaranteed — and only required — when at least two member
    // configurations have distinct images: M is maximal over those, so some
    // true pair differs at digit M. Sampled deeper-digit extensions may or
    // may not attain t and must never fail the check on their own.
    let distinct = images.iter().any(|&y| y != images[0]);
    let mut attained = distinct;
    'outer: for i in 0..sampled_y.len() {
        if attained {
            break;
        }
        for j in i + 1..sampled_y.len() {
            let gap = (sampled_y[i] as i128 - sampled_y[j] as i128).unsigned_abs();
            if gap != 0 && gap % f.p as u128 != 0 {
                attained = true;
                break 'outer;
            }
        }
    }
    if distinct && !attained {
        return Err(violation(
            "image set has two points but no pair attains the diameter t".into(),
        ));
    }
    Ok(BallVerification {
        ball: model.ball,
        samples,
        diameter_attained: attained,
        distinct_images: distinct,
    })
}

/// Builds and verifies the whole level; stops at the first violation.
pub fn verify_level(
    f: &TransitionMap,
    ordering: &Ordering,
    n: usize,
    samples: usize,
    rng_seed: u64,
) -> Result<Vec<BallVerification>> {
    let model = build_affine_model(f, ordering, n)?;
    let mut out = Vec::with_capacity(model.len());
    for (i, ball_model) in model.iter().enumerate() {
        out.push(verify_mapping_property(
            f,
            ordering,
            ball_model,
            samples,
            rng_seed.wrapping_add(i as u64),
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_transition_map, builtin_dataset, BuiltinDataset};

    fn toy() -> TransitionMap {
        build_transition_map(&builtin_dataset(BuiltinDataset::Toy4).unwrap()).unwrap()
    }

    #[test]
    fn toy_level_one_models() {
        let f = toy();
        let id = Ordering::identity(4);
        let model = build_affine_model(&f, &id, 1).unwrap();
        assert_eq!(model.len(), 2);
        // Ball 0: images {0, 4}, M = 2, so A = 2^1 and beta = 0.
        assert_eq!(model[0].a.valuation(), Some(1));
        assert_eq!(model[0].beta, 0);
        assert_eq!(model[0].prefix_len, 2);
        assert_eq!(model[0].t(2), power_rational(2, -2));
        // Ball 1: images {1, 9}, M = 3, so A = 2^2 and beta = 1.
        assert_eq!(model[1].a.valuation(), Some(2));
        assert_eq!(model[1].beta, 1);
    }

    #[test]
    fn identity_map_recovers_the_identity() {
        let f = TransitionMap::new(2, 4, (0..16).collect()).unwrap();
        let id = Ordering::identity(4);
        for n in 1..4 {
            for m in build_affine_model(&f, &id, n).unwrap() {
                assert_eq!(m.a.valuation(), Some(0));
                assert_eq!(m.beta, m.ball.index);
                assert_eq!(m.prefix_len, n);
            }
        }
    }

    #[test]
    fn halving_map_gets_negative_valuation() {
        // f(m) = m >> 1 spreads each level-1 ball over everything.
        let images: Vec<u64> = (0u64..16).map(|m| m >> 1).collect();
        let f = TransitionMap::new(2, 4, images).unwrap();
        let id = Ordering::identity(4);
        let model = build_affine_model(&f, &id, 1).unwrap();
        assert_eq!(model[0].prefix_len, 0);
        assert_eq!(model[0].a.valuation(), Some(-1));
        assert_eq!(model[0].beta, 0);
        let report = verify_mapping_property(&f, &id, &model[0], 50, 7).unwrap();
        assert!(report.diameter_attained);
        assert!(report.distinct_images);
    }

    #[test]
    fn toy_verifies_at_every_level() {
        let f = toy();
        let id = Ordering::identity(4);
        for n in 1..4 {
            let reports = verify_level(&f, &id, n, 64, 11).unwrap();
            assert_eq!(reports.len(), 1 << n);
            for r in reports {
                // Sampled offsets always produce two residues mod 2.
                assert!(r.diameter_attained);
            }
        }
    }

    #[test]
    fn tampered_models_are_rejected() {
        let f = toy();
        let id = Ordering::identity(4);
        let mut model = build_affine_model(&f, &id, 1).unwrap();
        model[0].beta ^= 1;
        let err = verify_mapping_property(&f, &id, &model[0], 16, 3).unwrap_err();
        assert!(matches!(err, Error::MappingViolation { .. }));

        let mut model = build_affine_model(&f, &id, 1).unwrap();
        model[1].prefix_len = 1; // claims a looser prefix than the dynamics
        model[1].a = PadicScalar::pure_power(0, 2, 8);
        assert!(verify_mapping_property(&f, &id, &model[1], 16, 3).is_err());
    }

    #[test]
    fn constant_ball_is_vacuously_verified() {
        // All states map to 3: every ball has a one-point image set.
        let f = TransitionMap::new(2, 3, vec![3; 8]).unwrap();
        let id = Ordering::identity(3);
        let model = build_affine_model(&f, &id, 1).unwrap();
        assert_eq!(model[1].prefix_len, 3);
        // With a single sample nothing can attain a diameter.
        let report = verify_mapping_property(&f, &id, &model[1], 1, 5).unwrap();
        assert!(!report.distinct_images);
        assert!(!report.diameter_attained);
    }
}
