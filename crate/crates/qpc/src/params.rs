//! Run parameters shared by the protocol engine, transcripts and the CLI.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on the number of comparing users in one run. Keeps the
/// adversary-view algebra in fixed-width bitmasks.
pub const MAX_PARTIES: u8 = 40;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// Protocol variant under simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Two-party baseline: raw input groups, no transmission checks.
    Lwc2,
    /// Two-party with decoy-photon checks on every transmission.
    Llcll2,
    /// Two-party comparing keyed digests, decoy checks optional.
    Hash2,
    /// Three users, digests, Bell-pair correlation checks.
    Three,
    /// K users, digests, Bell-pair correlation checks, all pairwise
    /// verdicts in one execution.
    Multi,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Variant> {
        match s.to_ascii_lowercase().as_str() {
            "lwc2" => Some(Variant::Lwc2),
            "llcll2" => Some(Variant::Llcll2),
            "hash2" => Some(Variant::Hash2),
            "three" => Some(Variant::Three),
            "multi" => Some(Variant::Multi),
            _ => None,
        }
    }

    /// Whether the parties compare keyed digests rather than raw inputs.
    pub fn hashed(self) -> bool {
        matches!(self, Variant::Hash2 | Variant::Three | Variant::Multi)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Lwc2 => "lwc2",
            Variant::Llcll2 => "llcll2",
            Variant::Hash2 => "hash2",
            Variant::Three => "three",
            Variant::Multi => "multi",
        };
        f.write_str(s)
    }
}

/// A protocol participant: comparing user `P1..PK` or the third party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PartyId {
    User(u8),
    Tp,
}

impl PartyId {
    pub fn parse(s: &str) -> Option<PartyId> {
        let upper = s.to_ascii_uppercase();
        if upper == "TP" {
            return Some(PartyId::Tp);
        }
        let idx: u8 = upper.strip_prefix('P')?.parse().ok()?;
        (idx >= 1).then_some(PartyId::User(idx))
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyId::User(i) => write!(f, "P{i}"),
            PartyId::Tp => f.write_str("TP"),
        }
    }
}

impl From<PartyId> for String {
    fn from(p: PartyId) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PartyId {
    type Error = String;

    fn try_from(s: String) -> Result<PartyId, String> {
        PartyId::parse(&s).ok_or_else(|| format!("invalid party id: {s:?}"))
    }
}

/// A directed quantum link, named `<from>-<to>` (e.g. `P1-TP`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ChannelId {
    pub from: PartyId,
    pub to: PartyId,
}

impl ChannelId {
    pub fn new(from: PartyId, to: PartyId) -> ChannelId {
        ChannelId { from, to }
    }

    pub fn parse(s: &str) -> Option<ChannelId> {
        let (a, b) = s.split_once('-')?;
        Some(ChannelId {
            from: PartyId::parse(a)?,
            to: PartyId::parse(b)?,
        })
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

impl From<ChannelId> for String {
    fn from(c: ChannelId) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for ChannelId {
    type Error = String;

    fn try_from(s: String) -> Result<ChannelId, String> {
        ChannelId::parse(&s).ok_or_else(|| format!("invalid channel id: {s:?}"))
    }
}

/// Photon-touching attacker behaviour on a quantum channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelAttackKind {
    /// Measure every passing photon in a fresh random basis and forward the
    /// collapsed eigenstate.
    InterceptResend,
    /// Measure every passing photon in the Z basis and forward the
    /// post-measurement state.
    MeasureResend,
}

/// Adversary configured for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    /// Photon attacker sitting on one directed channel.
    Channel {
        attack: ChannelAttackKind,
        channel: ChannelId,
    },
    /// Records all classical traffic, touches nothing.
    PassiveClassical,
    /// The third party Bell-measures its own collapsed pairs mid-run and
    /// combines the codes with public traffic.
    TpBellMeasurement,
}

/// Full configuration of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub variant: Variant,
    /// Number of comparing users.
    pub k: u8,
    /// Bit length of each secret input.
    pub bit_length: usize,
    /// Digest length in bits (hash variants).
    pub hash_bits: usize,
    /// Shared hash key (hash variants).
    pub hash_key: Vec<u8>,
    /// Decoy photons or check pairs inserted per protected transmission.
    pub check_count: usize,
    /// Whether the two-party hash variant keeps its decoy checks.
    pub decoys_enabled: bool,
    pub seed: u64,
    pub attack: Option<AttackSpec>,
}

impl ProtocolParams {
    /// Defaults for a variant: 128-bit digests, a fixed demonstration key,
    /// and one check photon per data pair.
    pub fn new(variant: Variant, k: u8, bit_length: usize, seed: u64) -> ProtocolParams {
        let hash_bits: usize = 128;
        let groups = if variant.hashed() {
            hash_bits.div_ceil(2)
        } else {
            bit_length.div_ceil(2)
        };
        ProtocolParams {
            variant,
            k,
            bit_length,
            hash_bits,
            hash_key: b"qpc-shared-key".to_vec(),
            check_count: groups,
            decoys_enabled: true,
            seed,
            attack: None,
        }
    }

    /// Number of two-bit groups each party compares.
    pub fn group_count(&self) -> usize {
        if self.variant.hashed() {
            self.hash_bits.div_ceil(2)
        } else {
            self.bit_length.div_ceil(2)
        }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let err = |msg: String| Err(ParamsError::Invalid(msg));
        match self.variant {
            Variant::Lwc2 | Variant::Llcll2 | Variant::Hash2 => {
                if self.k != 2 {
                    return err(format!(
                        "variant {} requires --k 2, got {}",
                        self.variant, self.k
                    ));
                }
            }
            Variant::Three => {
                if self.k != 3 {
                    return err(format!("variant three requires --k 3, got {}", self.k));
                }
            }
            Variant::Multi => {
                if self.k < 2 {
                    return err(format!("variant multi requires --k >= 2, got {}", self.k));
                }
            }
        }
        if self.k > MAX_PARTIES {
            return err(format!(
                "at most {MAX_PARTIES} users supported, got {}",
                self.k
            ));
        }
        if self.bit_length == 0 {
            return err("--bit-length must be positive".into());
        }
        if self.variant.hashed() {
            if self.hash_bits < 2 {
                return err("--hash-bits must be at least 2".into());
            }
            if self.hash_key.is_empty() {
                return err("hash key must be nonempty".into());
            }
        }
        match self.attack {
            Some(AttackSpec::Channel { channel, .. }) => {
                let valid = |p: PartyId| match p {
                    PartyId::Tp => true,
                    PartyId::User(i) => i >= 1 && i <= self.k,
                };
                if !valid(channel.from) || !valid(channel.to) || channel.from == channel.to {
                    return err(format!(
                        "--attack-channel {channel} names no link in this run"
                    ));
                }
                if (channel.from == PartyId::Tp) == (channel.to == PartyId::Tp) {
                    return err(format!(
                        "--attack-channel {channel} must connect one user with TP"
                    ));
                }
                if self.variant == Variant::Lwc2 {
                    return err("lwc2 has no transmission checks; channel attacks are only \
                                meaningful for checked variants"
                        .into());
                }
            }
            Some(AttackSpec::TpBellMeasurement) => {
                if !matches!(self.variant, Variant::Lwc2 | Variant::Hash2) {
                    return err("tp-bell attack experiments cover lwc2 and hash2 only".into());
                }
                if self.variant == Variant::Hash2 && self.decoys_enabled {
                    return err("tp-bell on hash2 requires --no-decoys; with decoys in the \
                                sequences the third party cannot tell data pairs apart"
                        .into());
                }
            }
            Some(AttackSpec::PassiveClassical) | None => {}
        }
        Ok(())
    }
}
