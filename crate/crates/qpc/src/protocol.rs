//! Party state machines and orchestration of the comparison protocols.
//!
//! All five variants run through one deterministic event loop. A round `r`
//! exchanges second-particle sequences between user `P_r` and the third
//! party (protected by the variant's check scheme), lets `P_r` swap-measure
//! its pairs against the received halves, and, from round 2 on, has the
//! third party read its collapsed chain pairs and score the pairwise
//! comparison words the users assemble over the public channel. One run of
//! the K-party variant settles all `K(K-1)/2` pairwise verdicts.
//!
//! Everything is driven by a single seeded random stream (the attacker has
//! its own derived stream), so a transcript replays byte for byte.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bell::BellCode;
use crate::channels::{
    bellpair_insert, bellpair_verify, decoy_insert, decoy_verify, measure_announced_decoys,
    strip_positions, AttackerModel, BellPairCheck, ChannelError, ClassicalChannel, DecoyBatch,
    QuantumChannel,
};
use crate::classical::{
    group_score, hash_digest, mask, total_score, ClassicalError, GroupSeq, HashConfig, SecretInput,
    TwoBits,
};
use crate::params::{AttackSpec, ChannelId, ParamsError, PartyId, ProtocolParams, Variant};
use crate::registry::{PairRegistry, ParticleId};
use crate::transcript::{
    CheckScheme, ClassicalPayload, Event, Header, MeasurePurpose, Transcript, TranscriptError,
};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { got: usize, expected: usize },
    #[error("input for {party} has {got} bits, declared length is {expected}")]
    InputLength {
        party: PartyId,
        got: usize,
        expected: usize,
    },
    #[error("replayed transcript diverges from the original starting at line {line}")]
    ReplayDivergence { line: usize },
}

/// Check machinery a variant runs on its quantum transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scheme {
    /// No transmission checks at all (the attackable baseline).
    Unchecked,
    /// Decoy photons on every transmission, including the deferred
    /// two-channel check of the first user's batch.
    Decoys,
    /// Sample Bell pairs split across both sequences of each exchange.
    BellPairs,
}

impl Scheme {
    fn for_params(params: &ProtocolParams) -> Scheme {
        match params.variant {
            Variant::Lwc2 => Scheme::Unchecked,
            Variant::Llcll2 => Scheme::Decoys,
            Variant::Hash2 => {
                if params.decoys_enabled {
                    Scheme::Decoys
                } else {
                    Scheme::Unchecked
                }
            }
            Variant::Three | Variant::Multi => Scheme::BellPairs,
        }
    }
}

/// Why a run stopped at an eavesdropping check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbortInfo {
    pub scheme: CheckScheme,
    pub covers: Vec<ChannelId>,
    pub error_rate: f64,
}

/// One pairwise comparison outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairOutcome {
    pub m: u8,
    pub k: u8,
    pub total: u32,
    pub equal: bool,
}

/// All pairwise totals and verdicts from one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseResults {
    pub variant: Variant,
    pub k: u8,
    pub seed: u64,
    pub aborted: Option<AbortInfo>,
    pub pairs: Vec<PairOutcome>,
}

impl PairwiseResults {
    /// Verdict for the user pair `(m, k)`, if the run got that far.
    pub fn verdict(&self, m: u8, k: u8) -> Option<bool> {
        let (lo, hi) = if m < k { (m, k) } else { (k, m) };
        self.pairs
            .iter()
            .find(|p| p.m == lo && p.k == hi)
            .map(|p| p.equal)
    }

    /// K×K verdict matrix: `self` on the diagonal, `equal`/`unequal` off
    /// it, `unknown` where an abort cut the run short.
    pub fn verdict_matrix(&self) -> Vec<Vec<String>> {
        (1..=self.k)
            .map(|row| {
                (1..=self.k)
                    .map(|col| {
                        if row == col {
                            "self".to_string()
                        } else {
                            match self.verdict(row, col) {
                                Some(true) => "equal".to_string(),
                                Some(false) => "unequal".to_string(),
                                None => "unknown".to_string(),
                            }
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Machine-readable run report (see `docs/schemas/report.schema.json`).
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub variant: Variant,
    pub k: u8,
    pub seed: u64,
    pub hash_primitive: Option<String>,
    pub hash_bits: Option<usize>,
    pub aborted: Option<AbortInfo>,
    pub pairs: Vec<PairOutcome>,
    pub verdict_matrix: Vec<Vec<String>>,
}

impl RunReport {
    pub fn from_results(results: &PairwiseResults, header: &Header) -> RunReport {
        RunReport {
            schema_version: 1,
            variant: results.variant,
            k: results.k,
            seed: results.seed,
            hash_primitive: header.hash_primitive.clone(),
            hash_bits: header.hash_bits,
            aborted: results.aborted.clone(),
            pairs: results.pairs.clone(),
            verdict_matrix: results.verdict_matrix(),
        }
    }
}

/// Results plus the replayable transcript of one run.
#[derive(Debug)]
pub struct RunOutcome {
    pub results: PairwiseResults,
    pub transcript: Transcript,
    /// Classical traffic captured by the configured attacker, when one was
    /// present (any attacker wiretaps the public channel).
    pub attacker_classical_log: Option<Vec<Event>>,
}

struct UserState {
    groups: GroupSeq,
    s1: Vec<ParticleId>,
    s2: Vec<ParticleId>,
    received: Vec<ParticleId>,
    codes: Vec<BellCode>,
}

struct TpState {
    t1: Vec<ParticleId>,
    t2: Vec<ParticleId>,
    /// Second halves of the current chain pairs, aligned with `t1`.
    chain_partner: Vec<ParticleId>,
    /// Unstripped sequence the third party forwards wholesale (decoy
    /// scheme only; the first user's decoys hide in here).
    forward_buffer: Vec<ParticleId>,
    chain_codes: Vec<BellCode>,
}

struct Engine<'a> {
    params: &'a ProtocolParams,
    scheme: Scheme,
    n_groups: usize,
    rng: ChaCha12Rng,
    registry: PairRegistry,
    attacker: Option<AttackerModel>,
    attacked_channel: Option<ChannelId>,
    channels: Vec<QuantumChannel>,
    classical: ClassicalChannel,
    events: Vec<Event>,
    users: Vec<UserState>,
    tp: TpState,
    pending_first_user_decoys: Option<DecoyBatch>,
    outcomes: Vec<PairOutcome>,
    abort: Option<AbortInfo>,
}

/// Run any variant. Inputs are one secret per user, `P1..PK` in order.
pub fn run_protocol(
    params: &ProtocolParams,
    inputs: &[SecretInput],
) -> Result<RunOutcome, ProtocolError> {
    params.validate()?;
    if inputs.len() != params.k as usize {
        return Err(ProtocolError::InputCount {
            got: inputs.len(),
            expected: params.k as usize,
        });
    }
    for (i, input) in inputs.iter().enumerate() {
        if input.len() != params.bit_length {
            return Err(ProtocolError::InputLength {
                party: PartyId::User(i as u8 + 1),
                got: input.len(),
                expected: params.bit_length,
            });
        }
    }
    let engine = Engine::new(params, inputs)?;
    engine.execute(inputs)
}

/// Two-party baseline: raw input groups, no transmission checks.
pub fn run_two_party_lwc(
    params: &ProtocolParams,
    x: &SecretInput,
    y: &SecretInput,
) -> Result<RunOutcome, ProtocolError> {
    expect_variant(params, Variant::Lwc2)?;
    run_protocol(params, &[x.clone(), y.clone()])
}

/// Two-party protocol with decoy checks on every transmission.
pub fn run_two_party_llcll(
    params: &ProtocolParams,
    x: &SecretInput,
    y: &SecretInput,
) -> Result<RunOutcome, ProtocolError> {
    expect_variant(params, Variant::Llcll2)?;
    run_protocol(params, &[x.clone(), y.clone()])
}

/// Two-party protocol comparing keyed digests.
pub fn run_two_party_hash(
    params: &ProtocolParams,
    x: &SecretInput,
    y: &SecretInput,
) -> Result<RunOutcome, ProtocolError> {
    expect_variant(params, Variant::Hash2)?;
    run_protocol(params, &[x.clone(), y.clone()])
}

/// Three-party protocol: all three pairwise verdicts in one run.
pub fn run_three_party(
    params: &ProtocolParams,
    x: &SecretInput,
    y: &SecretInput,
    z: &SecretInput,
) -> Result<RunOutcome, ProtocolError> {
    expect_variant(params, Variant::Three)?;
    run_protocol(params, &[x.clone(), y.clone(), z.clone()])
}

/// K-party protocol: all `K(K-1)/2` pairwise verdicts in one run.
pub fn run_multi_party(
    params: &ProtocolParams,
    inputs: &[SecretInput],
) -> Result<RunOutcome, ProtocolError> {
    expect_variant(params, Variant::Multi)?;
    run_protocol(params, inputs)
}

fn expect_variant(params: &ProtocolParams, variant: Variant) -> Result<(), ProtocolError> {
    if params.variant != variant {
        return Err(ProtocolError::Params(ParamsError::Invalid(format!(
            "entry point is for variant {variant}, params say {}",
            params.variant
        ))));
    }
    Ok(())
}

/// Re-execute a transcript from its header.
pub fn replay(transcript: &Transcript) -> Result<Transcript, ProtocolError> {
    let (params, inputs) = transcript.header.to_params()?;
    Ok(run_protocol(&params, &inputs)?.transcript)
}

/// Re-execute and demand byte identity with the original.
pub fn verify_replay(transcript: &Transcript) -> Result<(), ProtocolError> {
    let again = replay(transcript)?;
    let original = transcript.to_jsonl();
    let regenerated = again.to_jsonl();
    if original == regenerated {
        return Ok(());
    }
    let line = original
        .lines()
        .zip(regenerated.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| original.lines().count().min(regenerated.lines().count()));
    Err(ProtocolError::ReplayDivergence { line: line + 1 })
}

impl<'a> Engine<'a> {
    fn new(
        params: &'a ProtocolParams,
        inputs: &[SecretInput],
    ) -> Result<Engine<'a>, ProtocolError> {
        let groups = compute_groups(params, inputs)?;
        let n_groups = params.group_count();
        let (attacker, attacked_channel) = match params.attack {
            Some(AttackSpec::Channel { attack, channel }) => (
                Some(AttackerModel::new(attack.into(), params.seed)),
                Some(channel),
            ),
            Some(AttackSpec::PassiveClassical) => (
                Some(AttackerModel::new(
                    crate::channels::AttackerKind::PassiveClassical,
                    params.seed,
                )),
                None,
            ),
            Some(AttackSpec::TpBellMeasurement) | None => (None, None),
        };
        let users = groups
            .into_iter()
            .map(|groups| UserState {
                groups,
                s1: Vec::new(),
                s2: Vec::new(),
                received: Vec::new(),
                codes: Vec::new(),
            })
            .collect();
        Ok(Engine {
            params,
            scheme: Scheme::for_params(params),
            n_groups,
            rng: ChaCha12Rng::seed_from_u64(params.seed),
            registry: PairRegistry::new(),
            attacker,
            attacked_channel,
            channels: Vec::new(),
            classical: ClassicalChannel::new(),
            events: Vec::new(),
            users,
            tp: TpState {
                t1: Vec::new(),
                t2: Vec::new(),
                chain_partner: Vec::new(),
                forward_buffer: Vec::new(),
                chain_codes: Vec::new(),
            },
            pending_first_user_decoys: None,
            outcomes: Vec::new(),
            abort: None,
        })
    }

    fn emit(&mut self, event: Event) {
        self.classical.record(&event);
        if let Some(att) = self.attacker.as_mut() {
            att.observe_classical(&event);
        }
        self.events.push(event);
    }

    fn execute(mut self, inputs: &[SecretInput]) -> Result<RunOutcome, ProtocolError> {
        self.prepare();
        for round in 1..=self.params.k {
            if !self.exchange_round(round)? {
                break;
            }
            self.user_swap_measure(round);
            if round == 1 && self.params.attack == Some(AttackSpec::TpBellMeasurement) {
                self.tp_attack_measure(round);
            }
            if round >= 2 {
                self.tp_chain_measure(round);
                self.classical_round(round);
            }
        }
        if self.abort.is_some() {
            self.registry.discard_pending();
        } else {
            let audit = self.registry.audit();
            assert_eq!(
                audit.pending, 0,
                "conservation violated: {} particles left dangling",
                audit.pending
            );
        }
        let header = Header::from_params(self.params, inputs);
        let results = PairwiseResults {
            variant: self.params.variant,
            k: self.params.k,
            seed: self.params.seed,
            aborted: self.abort,
            pairs: self.outcomes,
        };
        let attacker_classical_log = self.attacker.as_ref().map(|a| {
            // Whatever else the attacker does, its wiretap must see exactly
            // the public channel, message for message.
            assert_eq!(a.classical_log(), self.classical.log());
            a.classical_log().to_vec()
        });
        let transcript = Transcript {
            header,
            events: self.events,
        };
        debug_assert!(transcript.validate_wire_discipline().is_ok());
        Ok(RunOutcome {
            results,
            transcript,
            attacker_classical_log,
        })
    }

    fn prepare(&mut self) {
        let phi_plus = BellCode::new(0);
        for i in 0..self.users.len() {
            let party = PartyId::User(i as u8 + 1);
            for _ in 0..self.n_groups {
                let [first, second] = self.registry.new_pair(phi_plus, party);
                self.users[i].s1.push(first);
                self.users[i].s2.push(second);
            }
            self.emit(Event::Prepare {
                party,
                pairs: self.n_groups,
            });
        }
        for _ in 0..self.n_groups {
            let [first, second] = self.registry.new_pair(phi_plus, PartyId::Tp);
            self.tp.t1.push(first);
            self.tp.t2.push(second);
        }
        self.emit(Event::Prepare {
            party: PartyId::Tp,
            pairs: self.n_groups,
        });
    }

    fn send(&mut self, channel: ChannelId, photons: &[ParticleId]) {
        let attacker = if self.attacked_channel == Some(channel) {
            self.attacker.as_mut()
        } else {
            None
        };
        let slot = match self.channels.iter().position(|c| c.id == channel) {
            Some(i) => i,
            None => {
                self.channels.push(QuantumChannel::new(channel));
                self.channels.len() - 1
            }
        };
        self.channels[slot].transmit(&mut self.registry, attacker, photons);
        self.emit(Event::QSend {
            channel,
            photons: photons.len(),
        });
    }

    /// The sequence the third party sends to the round's user.
    fn tp_outgoing(&self, round: u8) -> Vec<ParticleId> {
        if round == 1 {
            self.tp.t2.clone()
        } else if self.scheme == Scheme::Decoys {
            self.tp.forward_buffer.clone()
        } else {
            self.tp.chain_partner.clone()
        }
    }

    /// Exchange second sequences between `P_round` and the third party,
    /// protected per scheme. Returns false when a check aborted the run.
    fn exchange_round(&mut self, round: u8) -> Result<bool, ProtocolError> {
        let user_party = PartyId::User(round);
        let to_tp = ChannelId::new(user_party, PartyId::Tp);
        let from_tp = ChannelId::new(PartyId::Tp, user_party);
        let user_seq = self.users[round as usize - 1].s2.clone();
        let tp_seq = self.tp_outgoing(round);
        match self.scheme {
            Scheme::Unchecked => {
                self.send(to_tp, &user_seq);
                self.send(from_tp, &tp_seq);
                self.tp.chain_partner = user_seq;
                self.users[round as usize - 1].received = tp_seq;
                Ok(true)
            }
            Scheme::Decoys => self.exchange_with_decoys(round, user_seq, tp_seq),
            Scheme::BellPairs => self.exchange_with_bellpairs(round, user_seq, tp_seq),
        }
    }

    fn exchange_with_decoys(
        &mut self,
        round: u8,
        user_seq: Vec<ParticleId>,
        tp_seq: Vec<ParticleId>,
    ) -> Result<bool, ProtocolError> {
        let c = self.params.check_count;
        let user_party = PartyId::User(round);
        let to_tp = ChannelId::new(user_party, PartyId::Tp);
        let from_tp = ChannelId::new(PartyId::Tp, user_party);
        let (user_protected, user_batch) =
            decoy_insert(&mut self.registry, user_party, &user_seq, c, &mut self.rng);
        if round == 1 {
            // The third party protects its own outgoing halves; the first
            // user's batch rides along to the second user and is checked
            // there, covering both channels it crossed.
            let (tp_protected, tp_batch) =
                decoy_insert(&mut self.registry, PartyId::Tp, &tp_seq, c, &mut self.rng);
            self.send(to_tp, &user_protected);
            self.send(from_tp, &tp_protected);
            self.tp.forward_buffer = user_protected;
            self.pending_first_user_decoys = Some(user_batch);
            let pass = self.run_decoy_check(
                &tp_batch,
                PartyId::Tp,
                user_party,
                vec![from_tp],
                &tp_protected,
            )?;
            if !pass {
                return Ok(false);
            }
            let stripped = strip_positions(&tp_protected, tp_batch.positions());
            self.users[round as usize - 1].received = stripped;
            Ok(true)
        } else {
            self.send(to_tp, &user_protected);
            self.send(from_tp, &tp_seq);
            let forwarded = tp_seq;
            // Check the second user's fresh batch first, then the deferred
            // first-user batch that has now crossed both channels.
            let pass = self.run_decoy_check(
                &user_batch,
                user_party,
                PartyId::Tp,
                vec![to_tp],
                &user_protected,
            )?;
            if !pass {
                return Ok(false);
            }
            self.tp.chain_partner = strip_positions(&user_protected, user_batch.positions());
            let first_batch = self
                .pending_first_user_decoys
                .take()
                .expect("round-1 batch pending");
            let first_user = PartyId::User(1);
            let covers = vec![
                ChannelId::new(first_user, PartyId::Tp),
                ChannelId::new(PartyId::Tp, user_party),
            ];
            let pass =
                self.run_decoy_check(&first_batch, first_user, user_party, covers, &forwarded)?;
            if !pass {
                return Ok(false);
            }
            self.users[round as usize - 1].received =
                strip_positions(&forwarded, first_batch.positions());
            Ok(true)
        }
    }

    /// One decoy check: `owner` announces positions and bases, `holder`
    /// measures and reports, `owner` verifies. Emits the abort on failure.
    fn run_decoy_check(
        &mut self,
        batch: &DecoyBatch,
        owner: PartyId,
        holder: PartyId,
        covers: Vec<ChannelId>,
        protected: &[ParticleId],
    ) -> Result<bool, ProtocolError> {
        let bases = batch.announced_bases();
        self.emit(Event::CheckAnnounce {
            scheme: CheckScheme::Decoy,
            from: owner,
            to: holder,
            covers: covers.clone(),
            positions: batch.positions().to_vec(),
            bases: bases.clone(),
        });
        let bits = measure_announced_decoys(
            &mut self.registry,
            protected,
            batch.positions(),
            &bases,
            &mut self.rng,
        );
        self.emit(Event::CheckResult {
            from: holder,
            to: owner,
            bits: bits.clone(),
        });
        let error_rate = decoy_verify(batch, &bits)?;
        if error_rate > 0.0 {
            self.abort_run(CheckScheme::Decoy, covers, error_rate);
            return Ok(false);
        }
        Ok(true)
    }

    fn exchange_with_bellpairs(
        &mut self,
        round: u8,
        user_seq: Vec<ParticleId>,
        tp_seq: Vec<ParticleId>,
    ) -> Result<bool, ProtocolError> {
        let c = self.params.check_count;
        let user_party = PartyId::User(round);
        let to_tp = ChannelId::new(user_party, PartyId::Tp);
        let from_tp = ChannelId::new(PartyId::Tp, user_party);
        let user_s1 = self.users[round as usize - 1].s1.clone();
        let (user_s1_prot, user_s2_prot, user_batch) = bellpair_insert(
            &mut self.registry,
            user_party,
            &user_s1,
            &user_seq,
            c,
            &mut self.rng,
        )?;
        let tp_retained = self.tp.t1.clone();
        let (tp_t1_prot, tp_out_prot, tp_batch) = bellpair_insert(
            &mut self.registry,
            PartyId::Tp,
            &tp_retained,
            &tp_seq,
            c,
            &mut self.rng,
        )?;
        self.send(to_tp, &user_s2_prot);
        self.send(from_tp, &tp_out_prot);

        // User's batch first, then the third party's; each preparer
        // announces, the counterpart reports its transmitted-half readouts.
        let user_check = bellpair_verify(&mut self.registry, &user_batch, &mut self.rng);
        self.emit_bellpair_check(user_party, PartyId::Tp, to_tp, &user_batch, &user_check);
        if user_check.error_rate > 0.0 {
            self.abort_run(CheckScheme::BellPair, vec![to_tp], user_check.error_rate);
            return Ok(false);
        }
        let tp_check = bellpair_verify(&mut self.registry, &tp_batch, &mut self.rng);
        self.emit_bellpair_check(PartyId::Tp, user_party, from_tp, &tp_batch, &tp_check);
        if tp_check.error_rate > 0.0 {
            self.abort_run(CheckScheme::BellPair, vec![from_tp], tp_check.error_rate);
            return Ok(false);
        }

        self.users[round as usize - 1].s1 = strip_positions(&user_s1_prot, user_batch.positions());
        self.tp.chain_partner = strip_positions(&user_s2_prot, user_batch.positions());
        self.tp.t1 = strip_positions(&tp_t1_prot, tp_batch.positions());
        self.users[round as usize - 1].received =
            strip_positions(&tp_out_prot, tp_batch.positions());
        Ok(true)
    }

    fn emit_bellpair_check(
        &mut self,
        owner: PartyId,
        counterpart: PartyId,
        covers: ChannelId,
        batch: &crate::channels::CheckPairBatch,
        check: &BellPairCheck,
    ) {
        self.emit(Event::CheckAnnounce {
            scheme: CheckScheme::BellPair,
            from: owner,
            to: counterpart,
            covers: vec![covers],
            positions: batch.positions().to_vec(),
            bases: check.bases.clone(),
        });
        self.emit(Event::CheckResult {
            from: counterpart,
            to: owner,
            bits: check.receiver_bits.clone(),
        });
    }

    fn abort_run(&mut self, scheme: CheckScheme, covers: Vec<ChannelId>, error_rate: f64) {
        self.emit(Event::Abort {
            scheme,
            covers: covers.clone(),
            error_rate,
        });
        self.abort = Some(AbortInfo {
            scheme,
            covers,
            error_rate,
        });
    }

    /// `P_round` Bell-measures its first halves against the received
    /// sequence; the third party's chain pairs collapse accordingly.
    fn user_swap_measure(&mut self, round: u8) {
        let party = PartyId::User(round);
        let user = &self.users[round as usize - 1];
        // Both sequences are back to one particle per data pair, and the
        // user holds everything it is about to measure.
        assert_eq!(user.s1.len(), self.n_groups);
        assert_eq!(user.received.len(), self.n_groups);
        let pairs: Vec<(ParticleId, ParticleId)> = user
            .s1
            .iter()
            .copied()
            .zip(user.received.iter().copied())
            .collect();
        let codes: Vec<BellCode> = pairs
            .into_iter()
            .map(|(own, recv)| {
                debug_assert_eq!(self.registry.holder(own), Some(party));
                debug_assert_eq!(self.registry.holder(recv), Some(party));
                self.registry.bell_measure(own, recv, &mut self.rng)
            })
            .collect();
        self.users[round as usize - 1].codes = codes.clone();
        self.emit(Event::BellMeasure {
            party,
            purpose: MeasurePurpose::UserSwap { round },
            codes,
        });
    }

    /// The third party's mid-run measurement attack: read the freshly
    /// collapsed chain pairs. Non-perturbing, hence undetectable.
    fn tp_attack_measure(&mut self, round: u8) {
        let pairs: Vec<(ParticleId, ParticleId)> = self
            .tp
            .t1
            .iter()
            .copied()
            .zip(self.tp.chain_partner.iter().copied())
            .collect();
        let codes: Vec<BellCode> = pairs
            .into_iter()
            .map(|(t1, partner)| {
                debug_assert!(self.registry.same_pair(t1, partner));
                self.registry.bell_measure(t1, partner, &mut self.rng)
            })
            .collect();
        self.emit(Event::BellMeasure {
            party: PartyId::Tp,
            purpose: MeasurePurpose::TpAttack { round },
            codes,
        });
    }

    /// The third party reads its collapsed chain pairs for this round.
    ///
    /// On unattacked channels the chain law must hold: the code equals the
    /// XOR of every user swap outcome so far, and the pair is genuinely
    /// collapsed. A photon attacker that slipped past the checks breaks
    /// the physical chain, in which case the measurement still runs and
    /// simply yields garbage codes.
    fn tp_chain_measure(&mut self, round: u8) {
        let physical_chain_intact = self.attacked_channel.is_none();
        let pairs: Vec<(ParticleId, ParticleId)> = self
            .tp
            .t1
            .iter()
            .copied()
            .zip(self.tp.chain_partner.iter().copied())
            .collect();
        let codes: Vec<BellCode> = pairs
            .into_iter()
            .map(|(t1, partner)| {
                assert!(
                    !physical_chain_intact || self.registry.same_pair(t1, partner),
                    "chain pair misaligned in round {round}"
                );
                self.registry.bell_measure(t1, partner, &mut self.rng)
            })
            .collect();
        if physical_chain_intact {
            for (j, &code) in codes.iter().enumerate() {
                let expected = self
                    .users
                    .iter()
                    .take(round as usize)
                    .fold(BellCode::new(0), |acc, u| acc.xor(u.codes[j]));
                assert_eq!(
                    code, expected,
                    "chain invariant broken at round {round}, group {j}"
                );
            }
        }
        self.tp.chain_codes = codes.clone();
        self.emit(Event::BellMeasure {
            party: PartyId::Tp,
            purpose: MeasurePurpose::TpChain { round },
            codes,
        });
    }

    /// Round `k` classical phase: for every earlier user `m`, the round's
    /// user aggregates the comparison word for the pair `(m, k)` from the
    /// others' codes (one masked, the rest in the clear), sends it to the
    /// third party, and the third party scores and publishes the verdict.
    fn classical_round(&mut self, round: u8) {
        let aggregator = PartyId::User(round);
        for m in 1..round {
            for i in 1..round {
                if i == m {
                    continue;
                }
                let codes: Vec<TwoBits> = self.users[i as usize - 1]
                    .codes
                    .iter()
                    .map(|&c| TwoBits::from(c))
                    .collect();
                self.emit(Event::ClassicalSend {
                    from: PartyId::User(i),
                    to: aggregator,
                    payload: ClassicalPayload::UnmaskedCodes {
                        owner: PartyId::User(i),
                        values: codes,
                    },
                });
            }
            let masked: Vec<TwoBits> = {
                let user_m = &self.users[m as usize - 1];
                (0..self.n_groups)
                    .map(|j| mask(user_m.groups.groups()[j], user_m.codes[j]))
                    .collect()
            };
            self.emit(Event::ClassicalSend {
                from: PartyId::User(m),
                to: aggregator,
                payload: ClassicalPayload::MaskedCodes {
                    owner: PartyId::User(m),
                    values: masked.clone(),
                },
            });
            let aggregate: Vec<TwoBits> = {
                let user_k = &self.users[round as usize - 1];
                (0..self.n_groups)
                    .map(|j| {
                        let mut acc = masked[j];
                        for i in 1..round {
                            if i != m {
                                acc = acc.xor(self.users[i as usize - 1].codes[j].into());
                            }
                        }
                        acc.xor(mask(user_k.groups.groups()[j], user_k.codes[j]))
                    })
                    .collect()
            };
            self.emit(Event::ClassicalSend {
                from: aggregator,
                to: PartyId::Tp,
                payload: ClassicalPayload::PairAggregate {
                    m,
                    k: round,
                    values: aggregate.clone(),
                },
            });
            let per_group: Vec<u8> = (0..self.n_groups)
                .map(|j| group_score(aggregate[j], self.tp.chain_codes[j].into()))
                .collect();
            let total = total_score(&per_group);
            self.emit(Event::TpScore {
                m,
                k: round,
                per_group,
                total,
            });
            let equal = total == 0;
            self.emit(Event::Verdict {
                m,
                k: round,
                total,
                equal,
            });
            self.outcomes.push(PairOutcome {
                m,
                k: round,
                total,
                equal,
            });
        }
    }
}

fn compute_groups(
    params: &ProtocolParams,
    inputs: &[SecretInput],
) -> Result<Vec<GroupSeq>, ProtocolError> {
    if params.variant.hashed() {
        let cfg = HashConfig::new(params.hash_key.clone(), params.hash_bits)?;
        inputs
            .iter()
            .map(|input| Ok(hash_digest(&cfg, input)?.groups()?))
            .collect()
    } else {
        inputs.iter().map(|input| Ok(input.groups()?)).collect()
    }
}
