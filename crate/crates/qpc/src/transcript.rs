//! Replayable event log of one protocol run.
//!
//! A transcript is a header line plus one JSON object per event, in
//! execution order. The header carries everything needed to re-execute the
//! run (parameters, inputs, hash primitive id, seed), so replaying a
//! transcript and comparing bytes is the determinism check. Events mark
//! which traffic is public: classical sends, check announcements and
//! results, verdicts and aborts are visible to any observer; preparations,
//! quantum sends and Bell measurements are not.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::BellCode;
use crate::classical::{SecretInput, TwoBits, HASH_PRIMITIVE_ID};
use crate::params::{AttackSpec, ChannelId, PartyId, ProtocolParams, Variant};
use crate::statevector::Basis;

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("transcript is empty")]
    Empty,
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("unsupported transcript schema version {0}")]
    SchemaVersion(u32),
    #[error("header rejected: {0}")]
    BadHeader(String),
    #[error("wire discipline violated: {0}")]
    WireDiscipline(String),
}

/// First line of a transcript: the full run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub variant: Variant,
    pub k: u8,
    pub bit_length: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hash_bits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hash_primitive: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hash_key_hex: Option<String>,
    pub check_count: usize,
    pub decoys_enabled: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub attack: Option<AttackSpec>,
    pub inputs_hex: Vec<String>,
}

impl Header {
    pub fn from_params(params: &ProtocolParams, inputs: &[SecretInput]) -> Header {
        let hashed = params.variant.hashed();
        Header {
            schema_version: TRANSCRIPT_SCHEMA_VERSION,
            variant: params.variant,
            k: params.k,
            bit_length: params.bit_length,
            hash_bits: hashed.then_some(params.hash_bits),
            hash_primitive: hashed.then(|| HASH_PRIMITIVE_ID.to_string()),
            hash_key_hex: hashed.then(|| hex::encode(&params.hash_key)),
            check_count: params.check_count,
            decoys_enabled: params.decoys_enabled,
            seed: params.seed,
            attack: params.attack,
            inputs_hex: inputs.iter().map(SecretInput::to_hex).collect(),
        }
    }

    /// Rebuild run configuration and inputs from the header.
    pub fn to_params(&self) -> Result<(ProtocolParams, Vec<SecretInput>), TranscriptError> {
        if self.schema_version != TRANSCRIPT_SCHEMA_VERSION {
            return Err(TranscriptError::SchemaVersion(self.schema_version));
        }
        let bad = |msg: String| TranscriptError::BadHeader(msg);
        if let Some(p) = &self.hash_primitive {
            if p != HASH_PRIMITIVE_ID {
                return Err(bad(format!("unknown hash primitive {p:?}")));
            }
        }
        let hash_key = match &self.hash_key_hex {
            Some(h) => hex::decode(h).map_err(|e| bad(format!("bad hash key hex: {e}")))?,
            None => Vec::new(),
        };
        let params = ProtocolParams {
            variant: self.variant,
            k: self.k,
            bit_length: self.bit_length,
            hash_bits: self.hash_bits.unwrap_or(0),
            hash_key,
            check_count: self.check_count,
            decoys_enabled: self.decoys_enabled,
            seed: self.seed,
            attack: self.attack,
        };
        if self.inputs_hex.len() != self.k as usize {
            return Err(bad(format!(
                "{} inputs for {} users",
                self.inputs_hex.len(),
                self.k
            )));
        }
        let inputs = self
            .inputs_hex
            .iter()
            .map(|h| {
                SecretInput::from_hex(h, self.bit_length)
                    .map_err(|e| bad(format!("bad input: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((params, inputs))
    }
}

/// Which eavesdropping-check machinery protected a transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckScheme {
    Decoy,
    BellPair,
}

/// Role of a Bell-basis measurement within the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurePurpose {
    /// User `P_round` measuring its swap pairs.
    UserSwap { round: u8 },
    /// The third party reading its collapsed chain pairs in `round`.
    TpChain { round: u8 },
    /// The third party's mid-run measurement attack after `round`.
    TpAttack { round: u8 },
}

/// User-originated classical value on the public wire. These three shapes
/// are the entire wire vocabulary: measurement codes in the clear, codes
/// masked by a secret group, and pairwise aggregates addressed to the
/// third party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassicalPayload {
    /// `R_j` codes of `owner`, unmasked.
    UnmaskedCodes {
        owner: PartyId,
        values: Vec<TwoBits>,
    },
    /// `R_j ⊕ G_j` of `owner`: code masked by the owner's secret group.
    MaskedCodes {
        owner: PartyId,
        values: Vec<TwoBits>,
    },
    /// Aggregated comparison word for the user pair `(m, k)`.
    PairAggregate { m: u8, k: u8, values: Vec<TwoBits> },
}

/// One step of a protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Prepare {
        party: PartyId,
        pairs: usize,
    },
    QSend {
        channel: ChannelId,
        photons: usize,
    },
    CheckAnnounce {
        scheme: CheckScheme,
        from: PartyId,
        to: PartyId,
        covers: Vec<ChannelId>,
        positions: Vec<usize>,
        bases: Vec<Basis>,
    },
    CheckResult {
        from: PartyId,
        to: PartyId,
        bits: Vec<bool>,
    },
    Abort {
        scheme: CheckScheme,
        covers: Vec<ChannelId>,
        error_rate: f64,
    },
    BellMeasure {
        party: PartyId,
        purpose: MeasurePurpose,
        codes: Vec<BellCode>,
    },
    ClassicalSend {
        from: PartyId,
        to: PartyId,
        payload: ClassicalPayload,
    },
    TpScore {
        m: u8,
        k: u8,
        per_group: Vec<u8>,
        total: u32,
    },
    Verdict {
        m: u8,
        k: u8,
        total: u32,
        equal: bool,
    },
}

impl Event {
    /// Whether the event is visible on the public classical channel.
    pub fn is_classical(&self) -> bool {
        matches!(
            self,
            Event::CheckAnnounce { .. }
                | Event::CheckResult { .. }
                | Event::ClassicalSend { .. }
                | Event::Verdict { .. }
                | Event::Abort { .. }
        )
    }
}

/// Ordered, typed log of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub header: Header,
    pub events: Vec<Event>,
}

impl Transcript {
    /// Line-delimited JSON: header first, then one event per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&self.header).expect("header serializes"));
        out.push('\n');
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Transcript, TranscriptError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (line, header_text) = lines.next().ok_or(TranscriptError::Empty)?;
        let header: Header =
            serde_json::from_str(header_text).map_err(|source| TranscriptError::Json {
                line: line + 1,
                source,
            })?;
        if header.schema_version != TRANSCRIPT_SCHEMA_VERSION {
            return Err(TranscriptError::SchemaVersion(header.schema_version));
        }
        let mut events = Vec::new();
        for (line, text) in lines {
            events.push(
                serde_json::from_str(text).map_err(|source| TranscriptError::Json {
                    line: line + 1,
                    source,
                })?,
            );
        }
        Ok(Transcript { header, events })
    }

    /// The abort event, if the run halted at an eavesdropping check.
    pub fn abort(&self) -> Option<&Event> {
        self.events
            .iter()
            .find(|e| matches!(e, Event::Abort { .. }))
    }

    /// All events visible on the public classical channel, in order.
    pub fn classical_events(&self) -> Vec<&Event> {
        self.events.iter().filter(|e| e.is_classical()).collect()
    }

    /// Enforce the classical-message discipline: users put exactly three
    /// shapes of value on the wire (unmasked codes from their owner, masked
    /// codes from their owner, and pair aggregates from the aggregating
    /// user to the third party), all sized to the run's group count; the
    /// third party originates no classical sends, and measurement events
    /// are attributed to the party their purpose names.
    pub fn validate_wire_discipline(&self) -> Result<(), TranscriptError> {
        let fail = |msg: String| Err(TranscriptError::WireDiscipline(msg));
        let groups = if self.variant_hashed() {
            self.header.hash_bits.unwrap_or(0).div_ceil(2)
        } else {
            self.header.bit_length.div_ceil(2)
        };
        for (i, event) in self.events.iter().enumerate() {
            match event {
                Event::ClassicalSend { from, to, payload } => {
                    if *from == PartyId::Tp {
                        return fail(format!("event {i}: TP originated a classical send"));
                    }
                    match payload {
                        ClassicalPayload::UnmaskedCodes { owner, values }
                        | ClassicalPayload::MaskedCodes { owner, values } => {
                            if owner != from {
                                return fail(format!(
                                    "event {i}: {from} sent codes owned by {owner}"
                                ));
                            }
                            if values.len() != groups {
                                return fail(format!(
                                    "event {i}: payload has {} values, run has {groups} groups",
                                    values.len()
                                ));
                            }
                        }
                        ClassicalPayload::PairAggregate { m, k, values } => {
                            if *to != PartyId::Tp {
                                return fail(format!(
                                    "event {i}: pair aggregate addressed to {to}, not TP"
                                ));
                            }
                            if *from != PartyId::User(*k) {
                                return fail(format!(
                                    "event {i}: aggregate for pair ({m},{k}) sent by {from}"
                                ));
                            }
                            if values.len() != groups {
                                return fail(format!(
                                    "event {i}: aggregate has {} values, run has {groups} groups",
                                    values.len()
                                ));
                            }
                        }
                    }
                }
                Event::BellMeasure { party, purpose, .. } => {
                    let expected = match purpose {
                        MeasurePurpose::UserSwap { round } => PartyId::User(*round),
                        MeasurePurpose::TpChain { .. } | MeasurePurpose::TpAttack { .. } => {
                            PartyId::Tp
                        }
                    };
                    if *party != expected {
                        return fail(format!(
                            "event {i}: measurement for {purpose:?} attributed to {party}"
                        ));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn variant_hashed(&self) -> bool {
        self.header.variant.hashed()
    }
}
