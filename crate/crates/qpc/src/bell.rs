//! Bell-state coding and the entanglement-swapping XOR algebra.
//!
//! The four Bell states are labelled and coded as two-bit values:
//!
//! ```text
//! |Φ⁺⟩ = (|00⟩ + |11⟩)/√2  ↔  00
//! |Φ⁻⟩ = (|00⟩ - |11⟩)/√2  ↔  01
//! |Ψ⁺⟩ = (|01⟩ + |10⟩)/√2  ↔  10
//! |Ψ⁻⟩ = (|01⟩ - |10⟩)/√2  ↔  11
//! ```
//!
//! Under this coding, entanglement swapping obeys a pure XOR law: when two
//! pairs with codes `a` and `b` are cross-measured in the Bell basis and the
//! measured pair collapses to `m`, the unmeasured cross pair collapses to
//! `n = a ⊕ b ⊕ m`, so `a ⊕ b = m ⊕ n` always holds. The statevector
//! oracle in [`crate::statevector`] verifies this law exhaustively.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Label of one of the four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    /// |Φ⁺⟩ = (|00⟩ + |11⟩)/√2
    PhiPlus,
    /// |Φ⁻⟩ = (|00⟩ - |11⟩)/√2
    PhiMinus,
    /// |Ψ⁺⟩ = (|01⟩ + |10⟩)/√2
    PsiPlus,
    /// |Ψ⁻⟩ = (|01⟩ - |10⟩)/√2
    PsiMinus,
}

impl BellLabel {
    /// All four labels, in code order 00, 01, 10, 11.
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    /// Parse a textual label such as `phi+` or `psi-`.
    pub fn parse(s: &str) -> Option<BellLabel> {
        match s.to_ascii_lowercase().as_str() {
            "phi+" | "phi_plus" | "phiplus" | "00" => Some(BellLabel::PhiPlus),
            "phi-" | "phi_minus" | "phiminus" | "01" => Some(BellLabel::PhiMinus),
            "psi+" | "psi_plus" | "psiplus" | "10" => Some(BellLabel::PsiPlus),
            "psi-" | "psi_minus" | "psiminus" | "11" => Some(BellLabel::PsiMinus),
            _ => None,
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        };
        f.write_str(s)
    }
}

/// Two-bit code of a Bell state (or of any two-bit protocol value derived
/// from one by XOR masking).
///
/// The codes form a group under XOR, which is what makes the swapped-pair
/// bookkeeping of the comparison protocols work.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BellCode(u8);

impl BellCode {
    /// All four codes in numeric order.
    pub const ALL: [BellCode; 4] = [BellCode(0), BellCode(1), BellCode(2), BellCode(3)];

    /// Build from the packed two-bit value; panics above 3.
    pub fn new(value: u8) -> BellCode {
        assert!(value < 4, "Bell code out of range: {value}");
        BellCode(value)
    }

    /// Build from individual bits `(b1, b2)`, most significant first.
    pub fn from_bits(b1: bool, b2: bool) -> BellCode {
        BellCode(((b1 as u8) << 1) | b2 as u8)
    }

    /// Packed two-bit value in `0..4`.
    pub fn value(self) -> u8 {
        self.0
    }

    /// Most significant bit.
    pub fn b1(self) -> bool {
        self.0 & 0b10 != 0
    }

    /// Least significant bit.
    pub fn b2(self) -> bool {
        self.0 & 0b01 != 0
    }

    /// Bitwise XOR with another code.
    pub fn xor(self, other: BellCode) -> BellCode {
        BellCode(self.0 ^ other.0)
    }

    /// Number of set bits, i.e. the Hamming weight of the code.
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// The Bell label this code stands for.
    pub fn label(self) -> BellLabel {
        match self.0 {
            0 => BellLabel::PhiPlus,
            1 => BellLabel::PhiMinus,
            2 => BellLabel::PsiPlus,
            _ => BellLabel::PsiMinus,
        }
    }
}

impl fmt::Debug for BellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0 >> 1, self.0 & 1)
    }
}

impl fmt::Display for BellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0 >> 1, self.0 & 1)
    }
}

impl From<BellCode> for String {
    fn from(code: BellCode) -> String {
        format!("{code}")
    }
}

impl TryFrom<String> for BellCode {
    type Error = String;

    fn try_from(s: String) -> Result<BellCode, String> {
        match s.as_str() {
            "00" => Ok(BellCode(0)),
            "01" => Ok(BellCode(1)),
            "10" => Ok(BellCode(2)),
            "11" => Ok(BellCode(3)),
            other => Err(format!("invalid two-bit code: {other:?}")),
        }
    }
}

/// The fixed coding of Bell labels used throughout the protocols.
pub fn code_of(label: BellLabel) -> BellCode {
    match label {
        BellLabel::PhiPlus => BellCode(0b00),
        BellLabel::PhiMinus => BellCode(0b01),
        BellLabel::PsiPlus => BellCode(0b10),
        BellLabel::PsiMinus => BellCode(0b11),
    }
}

/// Code of the unmeasured cross pair after entanglement swapping.
///
/// Source pairs carry codes `a` and `b`; a Bell-basis measurement across
/// them yields `m`, and the leftover pair collapses to `a ⊕ b ⊕ m`.
pub fn swap_collapse(a: BellCode, b: BellCode, m: BellCode) -> BellCode {
    a.xor(b).xor(m)
}

/// Sample one entanglement-swapping event on pairs with codes `a` and `b`.
///
/// The measured outcome `m` is uniform over the four codes; the returned
/// pair `(m, n)` always satisfies `a ⊕ b = m ⊕ n`.
pub fn swap_sample<R: Rng + ?Sized>(a: BellCode, b: BellCode, rng: &mut R) -> (BellCode, BellCode) {
    let m = BellCode(rng.random_range(0..4u8));
    (m, swap_collapse(a, b, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn coding_matches_protocol_table() {
        assert_eq!(code_of(BellLabel::PhiPlus), BellCode::new(0b00));
        assert_eq!(code_of(BellLabel::PhiMinus), BellCode::new(0b01));
        assert_eq!(code_of(BellLabel::PsiPlus), BellCode::new(0b10));
        assert_eq!(code_of(BellLabel::PsiMinus), BellCode::new(0b11));
    }

    #[test]
    fn coding_is_a_bijection() {
        for label in BellLabel::ALL {
            assert_eq!(code_of(label).label(), label);
        }
        for code in BellCode::ALL {
            assert_eq!(code_of(code.label()), code);
        }
    }

    #[test]
    fn swap_collapse_identity_sources() {
        // Both source pairs phi+ force the leftover pair to mirror the outcome.
        let zero = BellCode::new(0);
        for m in BellCode::ALL {
            assert_eq!(swap_collapse(zero, zero, m), m);
        }
    }

    #[test]
    fn swap_collapse_equal_sources_cancel() {
        for a in BellCode::ALL {
            for m in BellCode::ALL {
                assert_eq!(swap_collapse(a, a, m), m);
            }
        }
    }

    #[test]
    fn swap_collapse_mixed_sources() {
        // Verified against the statevector oracle in statevector::tests.
        assert_eq!(
            swap_collapse(
                BellCode::new(0b01),
                BellCode::new(0b10),
                BellCode::new(0b00)
            ),
            BellCode::new(0b11)
        );
        assert_eq!(
            swap_collapse(
                BellCode::new(0b00),
                BellCode::new(0b00),
                BellCode::new(0b10)
            ),
            BellCode::new(0b10)
        );
    }

    #[test]
    fn swap_sample_preserves_xor_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for a in BellCode::ALL {
            for b in BellCode::ALL {
                for _ in 0..64 {
                    let (m, n) = swap_sample(a, b, &mut rng);
                    assert_eq!(a.xor(b), m.xor(n));
                }
            }
        }
    }

    #[test]
    fn swap_sample_outcomes_are_uniform() {
        // 4000 draws per outcome bucket: expect 1000 each, sigma = sqrt(4000*1/4*3/4).
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let mut counts = [0u32; 4];
        let a = BellCode::new(0);
        for _ in 0..4000 {
            let (m, _) = swap_sample(a, a, &mut rng);
            counts[m.value() as usize] += 1;
        }
        let sigma = (4000.0f64 * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - 1000.0).abs() <= 3.0 * sigma,
                "outcome count {c} outside 1000 +/- 3 sigma"
            );
        }
    }

    #[test]
    fn serde_round_trip_uses_two_bit_strings() {
        let code = BellCode::new(0b10);
        let json = serde_json::to_string(&code).unwrap();
        assert_eq!(json, "\"10\"");
        let back: BellCode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, code);
    }
}
