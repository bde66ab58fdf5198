//! Base-p digit encodings of gene configurations and truncated p-adic scalars.
//!
//! A configuration of N genes, each holding a state in `0..p`, is packed into a
//! single integer `m = sum_k x_{pi(k)} * p^k` where `pi` is a gene ordering.
//! Digit position 0 is the most influential position: two encodings that agree
//! on digits `0..n` lie in the same level-n ball, and the metric distance
//! between encodings is `p^(-prefix)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical integer encoding of a configuration (digits in base p).
pub type EncodedState = u64;

/// `p^n`, rejecting anything that does not fit in 63 bits.
pub fn checked_pow(p: u64, n: usize) -> Result<u64> {
    let mut out: u64 = 1;
    for _ in 0..n {
        out = out
            .checked_mul(p)
            .filter(|v| *v < (1u64 << 63))
            .ok_or(Error::NetworkTooLarge { p, n })?;
    }
    Ok(out)
}

/// One state per gene, in canonical (declaration) gene order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub states: Vec<u64>,
}

impl Configuration {
    pub fn new(states: Vec<u64>) -> Self {
        Configuration { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// All states below p?
    pub fn validate(&self, p: u64) -> Result<()> {
        for (gene, &state) in self.states.iter().enumerate() {
            if state >= p {
                return Err(Error::InvalidConfiguration { gene, state, p });
            }
        }
        Ok(())
    }

    /// Compact digit string in canonical gene order, e.g. `0110` (p <= 10)
    /// or dot-separated states for larger p.
    pub fn digits_string(&self, p: u64) -> String {
        if p <= 10 {
            self.states.iter().map(|s| s.to_string()).collect()
        } else {
            let parts: Vec<String> = self.states.iter().map(|s| s.to_string()).collect();
            parts.join(".")
        }
    }
}

/// Assignment of genes to digit positions: `perm[k]` is the canonical index of
/// the gene written at position k. Position 0 carries the most weight in the
/// ball hierarchy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ordering {
    perm: Vec<usize>,
}

impl Ordering {
    /// Validates that `perm` is a permutation of `0..perm.len()`.
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &g in &perm {
            if g >= n || seen[g] {
                return Err(Error::InvalidOrdering(format!(
                    "{perm:?} is not a permutation of 0..{n}"
                )));
            }
            seen[g] = true;
        }
        Ok(Ordering { perm })
    }

    /// Canonical ordering: gene k at position k.
    pub fn identity(n: usize) -> Self {
        Ordering {
            perm: (0..n).collect(),
        }
    }

    /// Resolves a list of gene names (most influential first) against the
    /// canonical name list.
    pub fn from_names<S: AsRef<str>>(names: &[S], canonical: &[String]) -> Result<Self> {
        if names.len() != canonical.len() {
            return Err(Error::InvalidOrdering(format!(
                "expected {} gene names, got {}",
                canonical.len(),
                names.len()
            )));
        }
        let mut perm = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            let idx = canonical
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::InvalidOrdering(format!("unknown gene '{name}'")))?;
            perm.push(idx);
        }
        Ordering::new(perm)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Canonical gene index at digit position k.
    pub fn gene_at(&self, k: usize) -> usize {
        self.perm[k]
    }

    /// Digit position occupied by a canonical gene index.
    pub fn position_of(&self, gene: usize) -> Option<usize> {
        self.perm.iter().position(|&g| g == gene)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// New ordering with digit positions i and j exchanged.
    pub fn swap_positions(&self, i: usize, j: usize) -> Self {
        let mut perm = self.perm.clone();
        perm.swap(i, j);
        Ordering { perm }
    }

    /// Gene names in position order, most influential first.
    pub fn names<'a>(&self, canonical: &'a [String]) -> Vec<&'a str> {
        self.perm.iter().map(|&g| canonical[g].as_str()).collect()
    }
}

/// A level-n ball: the set of encodings sharing digits `0..level`.
/// `index` is the shared prefix value, below `p^level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BallIndex {
    pub level: usize,
    pub index: u64,
}

impl std::fmt::Display for BallIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.level, self.index)
    }
}

/// Packs a configuration into its integer encoding under an ordering.
pub fn encode(config: &Configuration, ordering: &Ordering, p: u64) -> Result<EncodedState> {
    if config.len() != ordering.len() {
        return Err(Error::WrongLength {
            expected: ordering.len(),
            got: config.len(),
        });
    }
    config.validate(p)?;
    checked_pow(p, config.len())?;
    let mut m: u64 = 0;
    let mut weight: u64 = 1;
    for k in 0..config.len() {
        m += config.states[ordering.gene_at(k)] * weight;
        if k + 1 < config.len() {
            weight *= p;
        }
    }
    Ok(m)
}

/// Unpacks an integer encoding back into per-gene states.
pub fn decode(m: EncodedState, ordering: &Ordering, p: u64, n: usize) -> Result<Configuration> {
    let limit = checked_pow(p, n)?;
    if ordering.len() != n {
        return Err(Error::WrongLength {
            expected: n,
            got: ordering.len(),
        });
    }
    if m >= limit {
        return Err(Error::ValueOutOfRange { value: m, limit });
    }
    let mut states = vec![0u64; n];
    let mut rest = m;
    for k in 0..n {
        states[ordering.gene_at(k)] = rest % p;
        rest /= p;
    }
    Ok(Configuration::new(states))
}

/// Ball containing m at the given level: keeps digits `0..n`.
pub fn truncate(m: EncodedState, n: usize, p: u64) -> Result<BallIndex> {
    let modulus = checked_pow(p, n)?;
    Ok(BallIndex {
        level: n,
        index: m % modulus,
    })
}

/// Length of the longest digit prefix shared by every value, capped at n.
/// A single value (or identical values) yields the cap.
pub fn common_prefix_length(values: &[EncodedState], p: u64, n: usize) -> Result<usize> {
    let first = *values.first().ok_or(Error::EmptyInput)?;
    if p == 2 {
        let mut diff: u64 = 0;
        for &v in &values[1..] {
            diff |= v ^ first;
        }
        return Ok((diff.trailing_zeros() as usize).min(n));
    }
    let mut len = 0;
    let mut scaled: Vec<u64> = values.to_vec();
    while len < n {
        let digit = scaled[0] % p;
        if scaled[1..].iter().any(|v| v % p != digit) {
            break;
        }
        for v in &mut scaled {
            *v /= p;
        }
        len += 1;
    }
    Ok(len)
}

/// Re-encodes a canonically encoded state under an ordering: digit k of the
/// result is the state of gene `ordering.gene_at(k)`.
pub fn permute_encoding(m: EncodedState, ordering: &Ordering, p: u64, n: usize) -> EncodedState {
    if p == 2 {
        let mut out = 0u64;
        for k in 0..n {
            out |= ((m >> ordering.gene_at(k)) & 1) << k;
        }
        return out;
    }
    let mut digits = vec![0u64; n];
    let mut rest = m;
    for digit in digits.iter_mut() {
        *digit = rest % p;
        rest /= p;
    }
    let mut out = 0u64;
    let mut weight = 1u64;
    for k in 0..n {
        out += digits[ordering.gene_at(k)] * weight;
        if k + 1 < n {
            weight *= p;
        }
    }
    out
}

/// Inverse of [`permute_encoding`]: recovers the canonical encoding from an
/// ordering-specific one.
pub fn unpermute_encoding(s: EncodedState, ordering: &Ordering, p: u64, n: usize) -> EncodedState {
    if p == 2 {
        let mut out = 0u64;
        for k in 0..n {
            out |= ((s >> k) & 1) << ordering.gene_at(k);
        }
        return out;
    }
    let mut out = 0u64;
    let mut rest = s;
    let mut pow = vec![1u64; n];
    for g in 1..n {
        pow[g] = pow[g - 1] * p;
    }
    for k in 0..n {
        out += (rest % p) * pow[ordering.gene_at(k)];
        rest /= p;
    }
    out
}

/// `p^(-prefix)` as an exact rational; 0 when the encodings coincide.
pub fn encoded_distance(a: EncodedState, b: EncodedState, p: u64, n: usize) -> Result<BigRational> {
    if a == b {
        return Ok(BigRational::zero());
    }
    let prefix = common_prefix_length(&[a, b], p, n)?;
    Ok(power_rational(p, -(prefix as i64)))
}

/// `p^exp` as an exact rational, for any sign of exp.
pub fn power_rational(p: u64, exp: i64) -> BigRational {
    let mag = BigInt::from(p).pow(exp.unsigned_abs() as u32);
    if exp >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// A p-adic number tracked to finitely many unit digits: either exact zero or
/// `p^valuation * u` with `u` a unit known modulo `p^precision`.
///
/// Arithmetic is exact except when addition cancels every tracked digit, which
/// raises [`Error::PrecisionExhausted`] rather than inventing a valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicScalar {
    p: u64,
    valuation: i64,
    /// Little-endian unit digits; empty iff the value is exactly zero.
    /// Nonzero values keep `digits[0] != 0`.
    digits: Vec<u64>,
    precision: usize,
}

impl PadicScalar {
    /// Exact zero.
    pub fn zero(p: u64, precision: usize) -> Self {
        PadicScalar {
            p,
            valuation: 0,
            digits: Vec::new(),
            precision,
        }
    }

    /// `p^exp` with unit part 1.
    pub fn pure_power(exp: i64, p: u64, precision: usize) -> Self {
        let mut digits = vec![0u64; precision.max(1)];
        digits[0] = 1;
        PadicScalar {
            p,
            valuation: exp,
            digits,
            precision: precision.max(1),
        }
    }

    pub fn one(p: u64, precision: usize) -> Self {
        Self::pure_power(0, p, precision)
    }

    /// Embeds an ordinary integer, factoring out powers of p.
    pub fn from_integer(value: i128, p: u64, precision: usize) -> Self {
        if value == 0 {
            return Self::zero(p, precision);
        }
        let negative = value < 0;
        let mut mag = value.unsigned_abs();
        let mut valuation = 0i64;
        while mag % (p as u128) == 0 {
            mag /= p as u128;
            valuation += 1;
        }
        let precision = precision.max(1);
        let mut digits = vec![0u64; precision];
        for d in digits.iter_mut() {
            *d = (mag % p as u128) as u64;
            mag /= p as u128;
        }
        let scalar = PadicScalar {
            p,
            valuation,
            digits,
            precision,
        };
        if negative {
            scalar.neg()
        } else {
            scalar
        }
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// None for zero (its valuation is +infinity).
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.valuation)
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Number of unit digits still known exactly.
    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn unit_digits(&self) -> &[u64] {
        &self.digits
    }

    /// `|x|_p = p^(-valuation)`; zero maps to 0.
    pub fn padic_abs(&self) -> BigRational {
        match self.valuation() {
            None => BigRational::zero(),
            Some(v) => power_rational(self.p, -v),
        }
    }

    fn check_same_prime(&self, other: &Self) {
        assert_eq!(
            self.p, other.p,
            "p-adic arithmetic across different primes ({} vs {})",
            self.p, other.p
        );
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same_prime(other);
        let precision = self.precision.min(other.precision);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p, precision);
        }
        let p = self.p as u128;
        let mut out = vec![0u64; precision];
        let mut carry: u128 = 0;
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = carry;
            for i in 0..=j {
                let a = *self.digits.get(i).unwrap_or(&0) as u128;
                let b = *other.digits.get(j - i).unwrap_or(&0) as u128;
                acc += a * b;
            }
            *slot = (acc % p) as u64;
            carry = acc / p;
        }
        debug_assert_ne!(out[0], 0, "product of units must be a unit");
        PadicScalar {
            p: self.p,
            valuation: self.valuation + other.valuation,
            digits: out,
            precision,
        }
    }

    /// Additive inverse via the p-complement of the unit digits.
    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut digits = Vec::with_capacity(self.digits.len());
        digits.push(self.p - self.digits[0]);
        for &d in &self.digits[1..] {
            digits.push(self.p - 1 - d);
        }
        PadicScalar {
            p: self.p,
            valuation: self.valuation,
            digits,
            precision: self.precision,
        }
    }

    /// Sum, tracking only digits both operands determine. Errors when every
    /// tracked digit cancels: the true valuation is then unknowable.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other);
        if self.is_zero() {
            let mut out = other.clone();
            out.precision = out.precision.min(self.precision);
            out.digits.truncate(out.precision.max(1));
            return Ok(out);
        }
        if other.is_zero() {
            let mut out = self.clone();
            out.precision = out.precision.min(other.precision);
            out.digits.truncate(out.precision.max(1));
            return Ok(out);
        }
        let base = self.valuation.min(other.valuation);
        let off_a = (self.valuation - base) as usize;
        let off_b = (other.valuation - base) as usize;
        // Output digit t is determined only while both operands are inside
        // their tracked windows (digits below an operand's valuation are an
        // exact zero).
        let known = (off_a + self.digits.len()).min(off_b + other.digits.len());
        let mut digits = vec![0u64; known];
        let mut carry = 0u64;
        for (t, slot) in digits.iter_mut().enumerate() {
            let a = if t >= off_a {
                self.digits.get(t - off_a).copied().unwrap_or(0)
            } else {
                0
            };
            let b = if t >= off_b {
                other.digits.get(t - off_b).copied().unwrap_or(0)
            } else {
                0
            };
            let sum = a + b + carry;
            *slot = sum % self.p;
            carry = sum / self.p;
        }
        let leading_zeros = digits.iter().take_while(|&&d| d == 0).count();
        if leading_zeros == digits.len() {
            return Err(Error::PrecisionExhausted {
                operation: "add",
                precision: known,
            });
        }
        digits.drain(..leading_zeros);
        let precision = digits.len();
        Ok(PadicScalar {
            p: self.p,
            valuation: base + leading_zeros as i64,
            digits,
            precision,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }
}

impl std::fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let shown: Vec<String> = self
            .digits
            .iter()
            .take(8)
            .map(|d| d.to_string())
            .collect();
        let ellipsis = if self.digits.len() > 8 { ", …" } else { "" };
        write!(
            f,
            "{}^{}·[{}{}]",
            self.p,
            self.valuation,
            shown.join(", "),
            ellipsis
        )
    }
}

/// `|x|_p` of a scalar; see [`PadicScalar::padic_abs`].
pub fn padic_abs(x: &PadicScalar) -> BigRational {
    x.padic_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(perm: &[usize]) -> Ordering {
        Ordering::new(perm.to_vec()).unwrap()
    }

    #[test]
    fn encode_packs_digits_least_significant_first() {
        let c = Configuration::new(vec![0, 1, 0, 1]);
        let id = Ordering::identity(4);
        assert_eq!(encode(&c, &id, 2).unwrap(), 10);
        assert_eq!(encode(&Configuration::new(vec![0; 4]), &id, 2).unwrap(), 0);
        // Reversing the ordering reads the same digits from the other end.
        let rev = ord(&[3, 2, 1, 0]);
        assert_eq!(encode(&c, &rev, 2).unwrap(), 5);
    }

    #[test]
    fn encode_nonbinary() {
        let c = Configuration::new(vec![2, 0, 1]);
        let id = Ordering::identity(3);
        assert_eq!(encode(&c, &id, 3).unwrap(), 2 + 0 * 3 + 1 * 9);
    }

    #[test]
    fn encode_rejects_bad_states() {
        let c = Configuration::new(vec![0, 2, 0, 1]);
        let id = Ordering::identity(4);
        assert!(matches!(
            encode(&c, &id, 2),
            Err(Error::InvalidConfiguration { gene: 1, state: 2, p: 2 })
        ));
    }

    #[test]
    fn decode_inverts_encode() {
        let id = Ordering::identity(4);
        assert_eq!(decode(10, &id, 2, 4).unwrap().states, vec![0, 1, 0, 1]);
        assert_eq!(decode(0, &id, 2, 4).unwrap().states, vec![0, 0, 0, 0]);
        assert_eq!(decode(15, &id, 2, 4).unwrap().states, vec![1, 1, 1, 1]);
        assert!(matches!(
            decode(16, &id, 2, 4),
            Err(Error::ValueOutOfRange { value: 16, limit: 16 })
        ));
    }

    #[test]
    fn truncate_keeps_low_digits() {
        let b = truncate(11, 2, 2).unwrap();
        assert_eq!(b, BallIndex { level: 2, index: 3 });
        assert_eq!(truncate(11, 0, 2).unwrap().index, 0);
        assert_eq!(truncate(11, 4, 2).unwrap().index, 11);
    }

    #[test]
    fn common_prefix_examples() {
        assert_eq!(common_prefix_length(&[0, 4], 2, 4).unwrap(), 2);
        assert_eq!(common_prefix_length(&[1, 9], 2, 4).unwrap(), 3);
        assert_eq!(common_prefix_length(&[7, 7], 2, 4).unwrap(), 4);
        assert_eq!(common_prefix_length(&[7], 2, 4).unwrap(), 4);
        assert_eq!(common_prefix_length(&[0, 1], 2, 4).unwrap(), 0);
        assert!(matches!(
            common_prefix_length(&[], 2, 4),
            Err(Error::EmptyInput)
        ));
        // Base 3: 4 = (1,1), 13 = (1,1,1): agree on first two digits.
        assert_eq!(common_prefix_length(&[4, 13], 3, 3).unwrap(), 2);
    }

    #[test]
    fn permute_encoding_moves_digits() {
        // Swap the two most influential positions of m = 1 (only gene 0 on).
        let swapped = ord(&[1, 0, 2, 3]);
        assert_eq!(permute_encoding(1, &swapped, 2, 4), 2);
        assert_eq!(unpermute_encoding(2, &swapped, 2, 4), 1);
        for m in 0..16 {
            let s = permute_encoding(m, &swapped, 2, 4);
            assert_eq!(unpermute_encoding(s, &swapped, 2, 4), m);
        }
        // Base 3 round trip under a rotation.
        let rot = ord(&[2, 0, 1]);
        for m in 0..27 {
            let s = permute_encoding(m, &rot, 3, 3);
            assert_eq!(unpermute_encoding(s, &rot, 3, 3), m);
        }
    }

    #[test]
    fn abs_of_integers() {
        let two = PadicScalar::from_integer(2, 2, 8);
        assert_eq!(two.padic_abs(), power_rational(2, -1));
        let zero = PadicScalar::zero(2, 8);
        assert_eq!(zero.padic_abs(), BigRational::zero());
        let three = PadicScalar::from_integer(3, 2, 8);
        assert_eq!(three.padic_abs(), BigRational::from_integer(1.into()));
        let twelve = PadicScalar::from_integer(12, 2, 8);
        assert_eq!(twelve.valuation(), Some(2));
        assert_eq!(twelve.unit_digits()[0], 1);
    }

    #[test]
    fn scalar_multiplication_adds_valuations() {
        let a = PadicScalar::from_integer(6, 2, 8); // 2 * 3
        let b = PadicScalar::from_integer(20, 2, 8); // 4 * 5
        let ab = a.mul(&b);
        assert_eq!(ab.valuation(), Some(3));
        assert_eq!(ab, PadicScalar::from_integer(120, 2, 8));
        let z = PadicScalar::zero(2, 8);
        assert!(a.mul(&z).is_zero());
    }

    #[test]
    fn scalar_addition_aligns_valuations() {
        let a = PadicScalar::from_integer(4, 2, 8);
        let b = PadicScalar::from_integer(3, 2, 8);
        assert_eq!(a.add(&b).unwrap(), PadicScalar::from_integer(7, 2, 8));
        // 7 + 9 = 16: cancellation raises the valuation but leaves digits.
        let c = PadicScalar::from_integer(7, 2, 8)
            .add(&PadicScalar::from_integer(9, 2, 8))
            .unwrap();
        assert_eq!(c.valuation(), Some(4));
        assert!(c.precision() < 8);
    }

    #[test]
    fn total_cancellation_is_an_error() {
        let a = PadicScalar::from_integer(5, 3, 6);
        let err = a.add(&a.neg()).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { .. }));
    }

    #[test]
    fn subtraction_round_trips() {
        for x in [1i128, 2, 7, 45, 1000] {
            for y in [3i128, 8, 11] {
                if x == y {
                    continue;
                }
                let p = 5;
                let a = PadicScalar::from_integer(x, p, 10);
                let b = PadicScalar::from_integer(y, p, 10);
                let diff = a.sub(&b).unwrap();
                assert_eq!(
                    diff.padic_abs(),
                    PadicScalar::from_integer(x - y, p, 10).padic_abs()
                );
            }
        }
    }

    #[test]
    fn ultrametric_inequality_on_scalars() {
        let cases = [(8i128, 2i128), (6, 10), (9, 27), (5, 7)];
        for (x, y) in cases {
            let a = PadicScalar::from_integer(x, 2, 12);
            let b = PadicScalar::from_integer(y, 2, 12);
            let sum = a.add(&b).unwrap();
            let bound = a.padic_abs().max(b.padic_abs());
            assert!(sum.padic_abs() <= bound, "|{x}+{y}| > max for p=2");
        }
    }
}
