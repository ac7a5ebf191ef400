//! Classical side of the comparison protocols: secret inputs, keyed digests,
//! two-bit grouping, XOR masking and the third party's per-group scoring.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::bell::BellCode;

/// Identifier of the digest construction, recorded in transcript headers so
/// runs can be reproduced.
pub const HASH_PRIMITIVE_ID: &str = "keyed-sha256-ctr";

#[derive(Debug, Error, PartialEq)]
pub enum ClassicalError {
    #[error("hash config rejected: {0}")]
    BadHashConfig(String),
    #[error("cannot group an empty bit sequence")]
    EmptyBits,
    #[error("hex input {hex:?} does not encode exactly {bits} bits")]
    BadHexInput { hex: String, bits: usize },
    #[error("check results have length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// A two-bit protocol value: an input group, a digest group, or any XOR
/// combination of those with Bell codes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct TwoBits(u8);

impl TwoBits {
    pub const ALL: [TwoBits; 4] = [TwoBits(0), TwoBits(1), TwoBits(2), TwoBits(3)];

    pub fn new(value: u8) -> TwoBits {
        assert!(value < 4, "two-bit value out of range: {value}");
        TwoBits(value)
    }

    pub fn from_bits(hi: bool, lo: bool) -> TwoBits {
        TwoBits(((hi as u8) << 1) | lo as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn bits(self) -> (bool, bool) {
        (self.0 & 0b10 != 0, self.0 & 0b01 != 0)
    }

    pub fn xor(self, other: TwoBits) -> TwoBits {
        TwoBits(self.0 ^ other.0)
    }

    pub fn weight(self) -> u8 {
        self.0.count_ones() as u8
    }
}

impl From<BellCode> for TwoBits {
    fn from(code: BellCode) -> TwoBits {
        TwoBits(code.value())
    }
}

impl From<TwoBits> for BellCode {
    fn from(v: TwoBits) -> BellCode {
        BellCode::new(v.0)
    }
}

impl fmt::Debug for TwoBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0 >> 1, self.0 & 1)
    }
}

impl fmt::Display for TwoBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0 >> 1, self.0 & 1)
    }
}

impl From<TwoBits> for String {
    fn from(v: TwoBits) -> String {
        format!("{v}")
    }
}

impl TryFrom<String> for TwoBits {
    type Error = String;

    fn try_from(s: String) -> Result<TwoBits, String> {
        match s.as_str() {
            "00" => Ok(TwoBits(0)),
            "01" => Ok(TwoBits(1)),
            "10" => Ok(TwoBits(2)),
            "11" => Ok(TwoBits(3)),
            other => Err(format!("invalid two-bit value: {other:?}")),
        }
    }
}

/// A party's secret input as an ordered bit sequence, most significant
/// bit first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretInput {
    bits: Vec<bool>,
}

impl SecretInput {
    /// Build from explicit bits (most significant first).
    pub fn from_bits(bits: Vec<bool>) -> SecretInput {
        SecretInput { bits }
    }

    /// Build from the low `bit_length` bits of `value`.
    pub fn from_u64(value: u64, bit_length: usize) -> SecretInput {
        assert!((1..=64).contains(&bit_length));
        let bits = (0..bit_length)
            .rev()
            .map(|j| (value >> j) & 1 == 1)
            .collect();
        SecretInput { bits }
    }

    /// Parse a hex string with an explicit bit length. The string must have
    /// exactly `ceil(bit_length / 4)` digits (leading zeros significant) and
    /// any surplus high bits must be zero.
    pub fn from_hex(hex: &str, bit_length: usize) -> Result<SecretInput, ClassicalError> {
        let err = || ClassicalError::BadHexInput {
            hex: hex.to_string(),
            bits: bit_length,
        };
        if bit_length == 0 || hex.len() != bit_length.div_ceil(4) {
            return Err(err());
        }
        let mut nibble_bits = Vec::with_capacity(hex.len() * 4);
        for ch in hex.chars() {
            let v = ch.to_digit(16).ok_or_else(err)? as u8;
            for j in (0..4).rev() {
                nibble_bits.push((v >> j) & 1 == 1);
            }
        }
        let surplus = nibble_bits.len() - bit_length;
        if nibble_bits[..surplus].iter().any(|&b| b) {
            return Err(err());
        }
        Ok(SecretInput {
            bits: nibble_bits[surplus..].to_vec(),
        })
    }

    /// Hex rendering with `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let surplus = self.bits.len().div_ceil(4) * 4 - self.bits.len();
        let mut padded = vec![false; surplus];
        padded.extend_from_slice(&self.bits);
        padded
            .chunks(4)
            .map(|chunk| {
                let v = chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8);
                char::from_digit(v as u32, 16).unwrap()
            })
            .collect()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Two-bit groups of the raw bits (the pre-hash protocols compare these
    /// directly).
    pub fn groups(&self) -> Result<GroupSeq, ClassicalError> {
        group_bits(&self.bits)
    }
}

/// Keyed digest configuration shared by the comparing parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashConfig {
    key: Vec<u8>,
    output_bits: usize,
}

impl HashConfig {
    pub fn new(key: Vec<u8>, output_bits: usize) -> Result<HashConfig, ClassicalError> {
        if key.is_empty() {
            return Err(ClassicalError::BadHashConfig("key must be nonempty".into()));
        }
        if output_bits < 2 {
            return Err(ClassicalError::BadHashConfig(format!(
                "output length must be at least 2 bits, got {output_bits}"
            )));
        }
        Ok(HashConfig { key, output_bits })
    }

    pub fn key(&self) -> &[u8] {
        &self.key
    }

    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    pub fn primitive_id(&self) -> &'static str {
        HASH_PRIMITIVE_ID
    }
}

/// An N-bit digest, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digest {
    bits: Vec<bool>,
}

impl Digest {
    /// Reconstruct a digest from recorded bits. Protocol code only ever
    /// obtains digests through [`hash_digest`].
    pub fn from_bits(bits: Vec<bool>) -> Digest {
        Digest { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn groups(&self) -> Result<GroupSeq, ClassicalError> {
        group_bits(&self.bits)
    }
}

/// Keyed digest of a secret input, truncated to the configured bit length.
///
/// Construction: SHA-256 over `(key length, key, block counter, input
/// length, packed input bits)`, run in counter mode until enough output
/// bits exist, then truncated. Deterministic in `(key, input)`.
pub fn hash_digest(cfg: &HashConfig, input: &SecretInput) -> Result<Digest, ClassicalError> {
    if cfg.key.is_empty() || cfg.output_bits < 2 {
        return Err(ClassicalError::BadHashConfig(
            "hash config failed validation".into(),
        ));
    }
    let mut packed = vec![0u8; input.len().div_ceil(8)];
    for (j, &bit) in input.bits().iter().enumerate() {
        if bit {
            packed[j / 8] |= 1 << (7 - j % 8);
        }
    }
    let mut bits = Vec::with_capacity(cfg.output_bits);
    let mut counter: u32 = 0;
    while bits.len() < cfg.output_bits {
        let mut hasher = Sha256::new();
        hasher.update((cfg.key.len() as u64).to_be_bytes());
        hasher.update(&cfg.key);
        hasher.update(counter.to_be_bytes());
        hasher.update((input.len() as u64).to_be_bytes());
        hasher.update(&packed);
        let block = hasher.finalize();
        for byte in block {
            for j in (0..8).rev() {
                bits.push((byte >> j) & 1 == 1);
                if bits.len() == cfg.output_bits {
                    break;
                }
            }
            if bits.len() == cfg.output_bits {
                break;
            }
        }
        counter += 1;
    }
    Ok(Digest { bits })
}

/// Ordered two-bit groups of a digest or raw input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSeq {
    groups: Vec<TwoBits>,
    padded: bool,
}

impl GroupSeq {
    pub fn groups(&self) -> &[TwoBits] {
        &self.groups
    }

    pub fn count(&self) -> usize {
        self.groups.len()
    }

    pub fn padded(&self) -> bool {
        self.padded
    }

    /// Original bit sequence, with the pad bit dropped if one was added.
    pub fn ungroup(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.groups.len() * 2);
        for g in &self.groups {
            let (hi, lo) = g.bits();
            bits.push(hi);
            bits.push(lo);
        }
        if self.padded {
            bits.pop();
        }
        bits
    }
}

/// Split bits into two-bit groups, most significant pair first. An odd
/// count gets one 0 appended in the last group's low slot.
pub fn group_bits(bits: &[bool]) -> Result<GroupSeq, ClassicalError> {
    if bits.is_empty() {
        return Err(ClassicalError::EmptyBits);
    }
    let padded = bits.len() % 2 == 1;
    let mut groups = Vec::with_capacity(bits.len().div_ceil(2));
    let mut iter = bits.chunks(2);
    for chunk in &mut iter {
        let hi = chunk[0];
        let lo = if chunk.len() == 2 { chunk[1] } else { false };
        groups.push(TwoBits::from_bits(hi, lo));
    }
    Ok(GroupSeq { groups, padded })
}

/// XOR a group with a Bell code (the one-time-pad masking step).
pub fn mask(group: TwoBits, code: BellCode) -> TwoBits {
    group.xor(code.into())
}

/// The third party's per-group score: bitwise mismatch count between a
/// received masked value and its own measured code. Zero exactly when the
/// compared groups are equal.
pub fn group_score(r: TwoBits, t: TwoBits) -> u8 {
    r.xor(t).weight()
}

/// Sum of per-group scores; zero exactly when every group matched.
pub fn total_score(scores: &[u8]) -> u32 {
    debug_assert!(scores.iter().all(|&s| s <= 2));
    scores.iter().map(|&s| s as u32).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_from_str(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn hash_is_deterministic() {
        let cfg = HashConfig::new(b"shared-key".to_vec(), 128).unwrap();
        let x = SecretInput::from_u64(0xDEAD_BEEF, 32);
        assert_eq!(
            hash_digest(&cfg, &x).unwrap(),
            hash_digest(&cfg, &x).unwrap()
        );
    }

    #[test]
    fn equal_inputs_have_equal_digests() {
        let cfg = HashConfig::new(b"k".to_vec(), 64).unwrap();
        let x = SecretInput::from_u64(7, 8);
        let y = SecretInput::from_u64(7, 8);
        assert_eq!(
            hash_digest(&cfg, &x).unwrap(),
            hash_digest(&cfg, &y).unwrap()
        );
    }

    #[test]
    fn distinct_inputs_do_not_collide_at_desk_scale() {
        // 10^4 distinct 64-bit digests: a collision here would be a bug, not
        // bad luck.
        let cfg = HashConfig::new(b"collision-check".to_vec(), 64).unwrap();
        let mut seen = std::collections::HashSet::new();
        for v in 0..10_000u64 {
            let d = hash_digest(&cfg, &SecretInput::from_u64(v, 32)).unwrap();
            assert!(seen.insert(d.bits().to_vec()), "collision at input {v}");
        }
    }

    #[test]
    fn digest_length_follows_config() {
        for n in [2usize, 5, 64, 128, 300] {
            let cfg = HashConfig::new(b"k".to_vec(), n).unwrap();
            let d = hash_digest(&cfg, &SecretInput::from_u64(1, 8)).unwrap();
            assert_eq!(d.len(), n);
        }
    }

    #[test]
    fn bad_hash_configs_are_rejected() {
        assert!(HashConfig::new(vec![], 64).is_err());
        assert!(HashConfig::new(b"k".to_vec(), 1).is_err());
    }

    #[test]
    fn grouping_even_length() {
        let seq = group_bits(&bits_from_str("1011")).unwrap();
        assert_eq!(seq.groups(), &[TwoBits::new(0b10), TwoBits::new(0b11)]);
        assert!(!seq.padded());
    }

    #[test]
    fn grouping_odd_length_pads_low_slot() {
        let seq = group_bits(&bits_from_str("10110")).unwrap();
        assert_eq!(
            seq.groups(),
            &[TwoBits::new(0b10), TwoBits::new(0b11), TwoBits::new(0b00)]
        );
        assert!(seq.padded());
        assert_eq!(seq.count() * 2 - 1, 5);
    }

    #[test]
    fn grouping_round_trips() {
        let cfg = HashConfig::new(b"k".to_vec(), 31).unwrap();
        for v in 0..1000u64 {
            let d = hash_digest(&cfg, &SecretInput::from_u64(v, 16)).unwrap();
            let seq = d.groups().unwrap();
            assert_eq!(seq.ungroup(), d.bits());
        }
    }

    #[test]
    fn grouping_rejects_empty() {
        assert_eq!(group_bits(&[]), Err(ClassicalError::EmptyBits));
    }

    #[test]
    fn mask_examples() {
        assert_eq!(
            mask(TwoBits::new(0b01), BellCode::new(0b00)),
            TwoBits::new(0b01)
        );
        assert_eq!(
            mask(TwoBits::new(0b11), BellCode::new(0b10)),
            TwoBits::new(0b01)
        );
    }

    #[test]
    fn mask_is_an_involution() {
        for g in TwoBits::ALL {
            for r in BellCode::ALL {
                assert_eq!(mask(mask(g, r), r), g);
            }
        }
    }

    #[test]
    fn group_score_examples() {
        assert_eq!(group_score(TwoBits::new(0b00), TwoBits::new(0b00)), 0);
        assert_eq!(group_score(TwoBits::new(0b01), TwoBits::new(0b00)), 1);
        assert_eq!(group_score(TwoBits::new(0b11), TwoBits::new(0b00)), 2);
    }

    #[test]
    fn group_score_matches_popcount_oracle() {
        for r in TwoBits::ALL {
            for t in TwoBits::ALL {
                let popcount = (r.value() ^ t.value()).count_ones() as u8;
                assert_eq!(group_score(r, t), popcount);
                assert_eq!(group_score(r, t) == 0, r == t);
            }
        }
    }

    #[test]
    fn total_score_sums_and_detects_equality() {
        assert_eq!(total_score(&[0, 0, 0]), 0);
        assert_eq!(total_score(&[1, 2, 0]), 3);
        assert!(total_score(&[0, 0, 1]) > 0);
    }

    #[test]
    fn masked_chain_total_is_zero_iff_digests_equal() {
        // Brute force over every pair of two-group digests and every pair of
        // measurement codes: the masked XOR chain scores zero against the
        // third party's code exactly when the digests agree.
        for d1 in 0..16u8 {
            for d2 in 0..16u8 {
                let g1 = [TwoBits::new(d1 >> 2), TwoBits::new(d1 & 3)];
                let g2 = [TwoBits::new(d2 >> 2), TwoBits::new(d2 & 3)];
                for ra in BellCode::ALL {
                    for rb in BellCode::ALL {
                        let scores: Vec<u8> = (0..2)
                            .map(|j| {
                                let rj = mask(g1[j], ra).xor(mask(g2[j], rb));
                                let tj = TwoBits::from(ra).xor(rb.into());
                                group_score(rj, tj)
                            })
                            .collect();
                        let equal = total_score(&scores) == 0;
                        assert_eq!(equal, d1 == d2);
                    }
                }
            }
        }
    }

    #[test]
    fn hex_parsing_preserves_leading_zeros() {
        let x = SecretInput::from_hex("0b", 8).unwrap();
        assert_eq!(x.bits(), bits_from_str("00001011").as_slice());
        assert_eq!(x.to_hex(), "0b");
    }

    #[test]
    fn hex_parsing_enforces_declared_length() {
        assert!(SecretInput::from_hex("b", 4).is_ok());
        // 5 bits need 2 hex digits.
        assert!(SecretInput::from_hex("b", 5).is_err());
        // Surplus high bits must be zero: 5 bits from "1b" ok, from "fb" not.
        assert!(SecretInput::from_hex("1b", 5).is_ok());
        assert!(SecretInput::from_hex("fb", 5).is_err());
        assert!(SecretInput::from_hex("zz", 8).is_err());
    }

    #[test]
    fn from_u64_matches_binary_expansion() {
        let x = SecretInput::from_u64(0b1011, 4);
        assert_eq!(x.bits(), bits_from_str("1011").as_slice());
        assert_eq!(x.to_hex(), "b");
    }
}
