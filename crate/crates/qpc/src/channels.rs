//! Simulated quantum and classical channels, attacker interposition, and
//! the two eavesdropping-check schemes: random decoy photons and sample
//! Bell-pair correlation checks.
//!
//! The channels are ideal: no loss, no noise. The only error source is an
//! attacker, so a clean run always verifies with error rate exactly zero
//! and the abort threshold is "any error at all".

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::bell::BellCode;
use crate::params::{ChannelAttackKind, ChannelId, PartyId};
use crate::registry::{PairRegistry, ParticleId};
use crate::statevector::{Basis, DecoyState};
use crate::transcript::Event;

/// Stream id for the attacker's private randomness, derived from the run
/// seed so attacked runs stay reproducible.
const ATTACKER_RNG_STREAM: u64 = 0xA77AC;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("check results have length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("sequences must have equal length, got {0} and {1}")]
    UnevenSequences(usize, usize),
}

/// What an interposed attacker does to each passing photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackerKind {
    /// Forward untouched.
    None,
    /// Measure in a fresh uniform basis, forward the collapsed eigenstate.
    InterceptResend,
    /// Measure in the Z basis, forward the post-measurement state.
    MeasureResend,
    /// Touch no photons; record all public classical traffic.
    PassiveClassical,
}

impl From<ChannelAttackKind> for AttackerKind {
    fn from(kind: ChannelAttackKind) -> AttackerKind {
        match kind {
            ChannelAttackKind::InterceptResend => AttackerKind::InterceptResend,
            ChannelAttackKind::MeasureResend => AttackerKind::MeasureResend,
        }
    }
}

/// One photon measurement made by an attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhotonCapture {
    pub particle: ParticleId,
    pub basis: Basis,
    pub bit: bool,
}

/// Deterministic adversary: own randomness stream, full capture log.
#[derive(Debug)]
pub struct AttackerModel {
    pub kind: AttackerKind,
    rng: ChaCha12Rng,
    captured: Vec<PhotonCapture>,
    classical_log: Vec<Event>,
}

impl AttackerModel {
    pub fn new(kind: AttackerKind, seed: u64) -> AttackerModel {
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(ATTACKER_RNG_STREAM);
        AttackerModel {
            kind,
            rng,
            captured: Vec::new(),
            classical_log: Vec::new(),
        }
    }

    /// Act on one in-flight photon. Intercept-resend measures it in a
    /// uniformly random basis and the channel carries the collapsed
    /// eigenstate onward; measure-resend always measures Z.
    pub fn interpose(&mut self, registry: &mut PairRegistry, particle: ParticleId) {
        let basis = match self.kind {
            AttackerKind::None | AttackerKind::PassiveClassical => return,
            AttackerKind::InterceptResend => {
                if self.rng.random() {
                    Basis::Z
                } else {
                    Basis::X
                }
            }
            AttackerKind::MeasureResend => Basis::Z,
        };
        let bit = registry.measure_single(particle, basis, &mut self.rng);
        self.captured.push(PhotonCapture {
            particle,
            basis,
            bit,
        });
    }

    /// Record one piece of public classical traffic (passive wiretap).
    pub fn observe_classical(&mut self, event: &Event) {
        if event.is_classical() {
            self.classical_log.push(event.clone());
        }
    }

    pub fn captured(&self) -> &[PhotonCapture] {
        &self.captured
    }

    pub fn classical_log(&self) -> &[Event] {
        &self.classical_log
    }
}

/// Directed quantum link delivering photons in send order, through the
/// attacker when one sits on this link.
#[derive(Debug)]
pub struct QuantumChannel {
    pub id: ChannelId,
    delivered: Vec<ParticleId>,
}

impl QuantumChannel {
    pub fn new(id: ChannelId) -> QuantumChannel {
        QuantumChannel {
            id,
            delivered: Vec::new(),
        }
    }

    /// Move `photons` from the sender to the receiver, one at a time.
    pub fn transmit(
        &mut self,
        registry: &mut PairRegistry,
        mut attacker: Option<&mut AttackerModel>,
        photons: &[ParticleId],
    ) {
        for &p in photons {
            debug_assert!(
                !self.delivered.contains(&p),
                "particle delivered twice on {}",
                self.id
            );
            registry.set_holder(p, None);
            if let Some(att) = attacker.as_deref_mut() {
                att.interpose(registry, p);
            }
            registry.set_holder(p, Some(self.id.to));
            self.delivered.push(p);
        }
    }

    pub fn delivered(&self) -> &[ParticleId] {
        &self.delivered
    }
}

/// Public classical broadcast medium: append-only, readable by everyone.
#[derive(Debug, Default)]
pub struct ClassicalChannel {
    log: Vec<Event>,
}

impl ClassicalChannel {
    pub fn new() -> ClassicalChannel {
        ClassicalChannel::default()
    }

    pub fn record(&mut self, event: &Event) {
        if event.is_classical() {
            self.log.push(event.clone());
        }
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }
}

/// Sender's secret record of inserted decoy photons.
#[derive(Debug, Clone)]
pub struct DecoyBatch {
    positions: Vec<usize>,
    states: Vec<DecoyState>,
    particles: Vec<ParticleId>,
}

impl DecoyBatch {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions announced when the check runs.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Measurement bases announced when the check runs (the preparation
    /// basis of each decoy).
    pub fn announced_bases(&self) -> Vec<Basis> {
        self.states.iter().map(|s| s.basis()).collect()
    }

    pub fn states(&self) -> &[DecoyState] {
        &self.states
    }

    pub fn particles(&self) -> &[ParticleId] {
        &self.particles
    }
}

/// `n` strictly increasing insertion slots among `total` positions.
fn sample_positions<R: Rng + ?Sized>(total: usize, n: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(n <= total);
    let mut slots: Vec<usize> = (0..total).collect();
    for i in 0..n {
        let j = rng.random_range(i..total);
        slots.swap(i, j);
    }
    let mut picked = slots[..n].to_vec();
    picked.sort_unstable();
    picked
}

/// Insert `n_decoys` fresh decoy photons into `seq` at uniformly random
/// positions, each in a uniformly random decoy state. Returns the
/// protected sequence and the sender's secret batch record.
pub fn decoy_insert<R: Rng + ?Sized>(
    registry: &mut PairRegistry,
    owner: PartyId,
    seq: &[ParticleId],
    n_decoys: usize,
    rng: &mut R,
) -> (Vec<ParticleId>, DecoyBatch) {
    let total = seq.len() + n_decoys;
    let positions = sample_positions(total, n_decoys, rng);
    let mut states = Vec::with_capacity(n_decoys);
    let mut particles = Vec::with_capacity(n_decoys);
    let mut protected = Vec::with_capacity(total);
    let mut data = seq.iter();
    let mut next_decoy = positions.iter().peekable();
    for slot in 0..total {
        if next_decoy.peek() == Some(&&slot) {
            next_decoy.next();
            let state = DecoyState::ALL[rng.random_range(0..4usize)];
            let particle = registry.new_decoy(state, owner);
            states.push(state);
            particles.push(particle);
            protected.push(particle);
        } else {
            protected.push(*data.next().expect("slot count matches"));
        }
    }
    (
        protected,
        DecoyBatch {
            positions,
            states,
            particles,
        },
    )
}

/// Receiver side of a decoy check: measure the photons at the announced
/// positions in the announced bases.
pub fn measure_announced_decoys<R: Rng + ?Sized>(
    registry: &mut PairRegistry,
    protected: &[ParticleId],
    positions: &[usize],
    bases: &[Basis],
    rng: &mut R,
) -> Vec<bool> {
    positions
        .iter()
        .zip(bases)
        .map(|(&pos, &basis)| registry.measure_single(protected[pos], basis, rng))
        .collect()
}

/// Sender side of a decoy check: compare the receiver's reported bits with
/// the prepared states. Matching-basis measurement of an untouched decoy
/// is deterministic, so a clean channel scores exactly zero.
pub fn decoy_verify(batch: &DecoyBatch, results: &[bool]) -> Result<f64, ChannelError> {
    if results.len() != batch.len() {
        return Err(ChannelError::LengthMismatch {
            got: results.len(),
            expected: batch.len(),
        });
    }
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mismatches = batch
        .states
        .iter()
        .zip(results)
        .filter(|(state, &bit)| state.bit() != bit)
        .count();
    Ok(mismatches as f64 / batch.len() as f64)
}

/// Sender's record of sample Bell pairs split across the retained and
/// transmitted sequences at identical positions.
#[derive(Debug, Clone)]
pub struct CheckPairBatch {
    positions: Vec<usize>,
    retained: Vec<ParticleId>,
    transmitted: Vec<ParticleId>,
}

impl CheckPairBatch {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn retained(&self) -> &[ParticleId] {
        &self.retained
    }

    pub fn transmitted(&self) -> &[ParticleId] {
        &self.transmitted
    }
}

/// Insert `n_checks` fresh phi+ pairs into the sequence pair `(s1, s2)`:
/// first halves into `s1`, second halves into `s2`, at the same positions.
pub fn bellpair_insert<R: Rng + ?Sized>(
    registry: &mut PairRegistry,
    owner: PartyId,
    s1: &[ParticleId],
    s2: &[ParticleId],
    n_checks: usize,
    rng: &mut R,
) -> Result<(Vec<ParticleId>, Vec<ParticleId>, CheckPairBatch), ChannelError> {
    if s1.len() != s2.len() {
        return Err(ChannelError::UnevenSequences(s1.len(), s2.len()));
    }
    let total = s1.len() + n_checks;
    let positions = sample_positions(total, n_checks, rng);
    let mut retained = Vec::with_capacity(n_checks);
    let mut transmitted = Vec::with_capacity(n_checks);
    let mut out1 = Vec::with_capacity(total);
    let mut out2 = Vec::with_capacity(total);
    let mut data1 = s1.iter();
    let mut data2 = s2.iter();
    let mut next_check = positions.iter().peekable();
    for slot in 0..total {
        if next_check.peek() == Some(&&slot) {
            next_check.next();
            let [first, second] = registry.new_pair(BellCode::new(0), owner);
            retained.push(first);
            transmitted.push(second);
            out1.push(first);
            out2.push(second);
        } else {
            out1.push(*data1.next().expect("slot count matches"));
            out2.push(*data2.next().expect("slot count matches"));
        }
    }
    Ok((
        out1,
        out2,
        CheckPairBatch {
            positions,
            retained,
            transmitted,
        },
    ))
}

/// Outcome of one Bell-pair correlation check.
#[derive(Debug, Clone)]
pub struct BellPairCheck {
    pub bases: Vec<Basis>,
    pub sender_bits: Vec<bool>,
    pub receiver_bits: Vec<bool>,
    pub error_rate: f64,
}

/// Verify a check-pair batch: both holders measure each pair in a jointly
/// announced random basis. phi+ correlates equal bits in both Z and X, so
/// any anticorrelated pair counts as an error and a clean channel scores
/// exactly zero.
pub fn bellpair_verify<R: Rng + ?Sized>(
    registry: &mut PairRegistry,
    batch: &CheckPairBatch,
    rng: &mut R,
) -> BellPairCheck {
    let bases: Vec<Basis> = (0..batch.len())
        .map(|_| if rng.random() { Basis::Z } else { Basis::X })
        .collect();
    verify_with_bases(registry, batch, bases, rng)
}

/// Fixed-basis variant, used to isolate per-basis detection statistics.
pub fn bellpair_verify_in_basis<R: Rng + ?Sized>(
    registry: &mut PairRegistry,
    batch: &CheckPairBatch,
    basis: Basis,
    rng: &mut R,
) -> BellPairCheck {
    verify_with_bases(registry, batch, vec![basis; batch.len()], rng)
}

fn verify_with_bases<R: Rng + ?Sized>(
    registry: &mut PairRegistry,
    batch: &CheckPairBatch,
    bases: Vec<Basis>,
    rng: &mut R,
) -> BellPairCheck {
    let sender_bits: Vec<bool> = batch
        .retained
        .iter()
        .zip(&bases)
        .map(|(&p, &basis)| registry.measure_single(p, basis, rng))
        .collect();
    let receiver_bits: Vec<bool> = batch
        .transmitted
        .iter()
        .zip(&bases)
        .map(|(&p, &basis)| registry.measure_single(p, basis, rng))
        .collect();
    let errors = sender_bits
        .iter()
        .zip(&receiver_bits)
        .filter(|(a, b)| a != b)
        .count();
    let error_rate = if batch.is_empty() {
        0.0
    } else {
        errors as f64 / batch.len() as f64
    };
    BellPairCheck {
        bases,
        sender_bits,
        receiver_bits,
        error_rate,
    }
}

/// Drop the checked slots from a protected sequence, restoring the
/// original data order.
pub fn strip_positions(seq: &[ParticleId], positions: &[usize]) -> Vec<ParticleId> {
    let mut next = positions.iter().peekable();
    seq.iter()
        .enumerate()
        .filter(|(slot, _)| {
            if next.peek() == Some(&slot) {
                next.next();
                false
            } else {
                true
            }
        })
        .map(|(_, &p)| p)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn fresh_halves(
        registry: &mut PairRegistry,
        owner: PartyId,
        n: usize,
    ) -> (Vec<ParticleId>, Vec<ParticleId>) {
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for _ in 0..n {
            let [a, b] = registry.new_pair(BellCode::new(0), owner);
            s1.push(a);
            s2.push(b);
        }
        (s1, s2)
    }

    #[test]
    fn decoy_insert_zero_is_identity() {
        let mut reg = PairRegistry::new();
        let mut r = rng(1);
        let (_, s2) = fresh_halves(&mut reg, PartyId::User(1), 4);
        let (protected, batch) = decoy_insert(&mut reg, PartyId::User(1), &s2, 0, &mut r);
        assert_eq!(protected, s2);
        assert!(batch.is_empty());
    }

    #[test]
    fn decoy_insert_counts_and_positions() {
        let mut reg = PairRegistry::new();
        let mut r = rng(2);
        let (_, s2) = fresh_halves(&mut reg, PartyId::User(1), 8);
        let (protected, batch) = decoy_insert(&mut reg, PartyId::User(1), &s2, 8, &mut r);
        assert_eq!(protected.len(), 16);
        assert_eq!(batch.len(), 8);
        let mut sorted = batch.positions().to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), 8, "positions must be unique");
        assert!(batch.positions().windows(2).all(|w| w[0] < w[1]));
        // Stripping the decoys restores the data sequence.
        assert_eq!(strip_positions(&protected, batch.positions()), s2);
    }

    #[test]
    fn decoy_states_are_uniform() {
        let mut reg = PairRegistry::new();
        let mut r = rng(3);
        let (protected, batch) = decoy_insert(&mut reg, PartyId::Tp, &[], 10_000, &mut r);
        assert_eq!(protected.len(), 10_000);
        let mut counts = [0u32; 4];
        for s in batch.states() {
            counts[DecoyState::ALL.iter().position(|d| d == s).unwrap()] += 1;
        }
        let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!((c as f64 - 2500.0).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn clean_decoy_check_is_exactly_zero() {
        for seed in 0..20 {
            let mut reg = PairRegistry::new();
            let mut r = rng(seed);
            let (protected, batch) = decoy_insert(&mut reg, PartyId::Tp, &[], 32, &mut r);
            let bits = measure_announced_decoys(
                &mut reg,
                &protected,
                batch.positions(),
                &batch.announced_bases(),
                &mut r,
            );
            assert_eq!(decoy_verify(&batch, &bits), Ok(0.0));
        }
    }

    #[test]
    fn decoy_verify_rejects_length_mismatch() {
        let mut reg = PairRegistry::new();
        let mut r = rng(4);
        let (_, batch) = decoy_insert(&mut reg, PartyId::Tp, &[], 4, &mut r);
        assert!(matches!(
            decoy_verify(&batch, &[true]),
            Err(ChannelError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn intercept_resend_hits_a_quarter_of_decoys() {
        // Closed form: attacker basis matches the decoy basis half the
        // time (no disturbance); otherwise the receiver's matching-basis
        // measurement flips with probability 1/2. Per-photon rate 1/4.
        let mut reg = PairRegistry::new();
        let mut r = rng(5);
        let mut attacker = AttackerModel::new(AttackerKind::InterceptResend, 5);
        let n = 10_000;
        let (protected, batch) = decoy_insert(&mut reg, PartyId::Tp, &[], n, &mut r);
        let mut channel = QuantumChannel::new(ChannelId::parse("TP-P1").unwrap());
        channel.transmit(&mut reg, Some(&mut attacker), &protected);
        let bits = measure_announced_decoys(
            &mut reg,
            &protected,
            batch.positions(),
            &batch.announced_bases(),
            &mut r,
        );
        let rate = decoy_verify(&batch, &bits).unwrap();
        assert!((rate - 0.25).abs() < 0.02, "detected rate {rate}");
        assert_eq!(attacker.captured().len(), n);
    }

    #[test]
    fn undetected_fraction_matches_closed_form() {
        // P(all 20 decoys survive) = (3/4)^20; estimate over 10^4 trials.
        let trials = 10_000;
        let mut undetected = 0u32;
        for seed in 0..trials {
            let mut reg = PairRegistry::new();
            let mut r = rng(seed as u64);
            let mut attacker = AttackerModel::new(AttackerKind::InterceptResend, seed as u64);
            let (protected, batch) = decoy_insert(&mut reg, PartyId::Tp, &[], 20, &mut r);
            let mut channel = QuantumChannel::new(ChannelId::parse("TP-P1").unwrap());
            channel.transmit(&mut reg, Some(&mut attacker), &protected);
            let bits = measure_announced_decoys(
                &mut reg,
                &protected,
                batch.positions(),
                &batch.announced_bases(),
                &mut r,
            );
            if decoy_verify(&batch, &bits).unwrap() == 0.0 {
                undetected += 1;
            }
        }
        let fraction = undetected as f64 / trials as f64;
        let expected = 0.75f64.powi(20);
        assert!(
            (fraction - expected).abs() < 0.002,
            "undetected {fraction} vs {expected}"
        );
    }

    #[test]
    fn bellpair_insert_aligns_positions() {
        let mut reg = PairRegistry::new();
        let mut r = rng(6);
        let (s1, s2) = fresh_halves(&mut reg, PartyId::User(1), 10);
        let (p1, p2, batch) =
            bellpair_insert(&mut reg, PartyId::User(1), &s1, &s2, 5, &mut r).unwrap();
        assert_eq!(p1.len(), 15);
        assert_eq!(p2.len(), 15);
        for (i, &pos) in batch.positions().iter().enumerate() {
            assert_eq!(p1[pos], batch.retained()[i]);
            assert_eq!(p2[pos], batch.transmitted()[i]);
            assert!(reg.same_pair(p1[pos], p2[pos]));
        }
        assert_eq!(strip_positions(&p1, batch.positions()), s1);
        assert_eq!(strip_positions(&p2, batch.positions()), s2);
    }

    #[test]
    fn bellpair_insert_zero_is_identity() {
        let mut reg = PairRegistry::new();
        let mut r = rng(7);
        let (s1, s2) = fresh_halves(&mut reg, PartyId::User(1), 3);
        let (p1, p2, batch) =
            bellpair_insert(&mut reg, PartyId::User(1), &s1, &s2, 0, &mut r).unwrap();
        assert_eq!(p1, s1);
        assert_eq!(p2, s2);
        assert!(batch.is_empty());
    }

    #[test]
    fn bellpair_insert_rejects_uneven_inputs() {
        let mut reg = PairRegistry::new();
        let mut r = rng(8);
        let (s1, _) = fresh_halves(&mut reg, PartyId::User(1), 3);
        assert!(matches!(
            bellpair_insert(&mut reg, PartyId::User(1), &s1, &s1[..2], 1, &mut r),
            Err(ChannelError::UnevenSequences(3, 2))
        ));
    }

    #[test]
    fn clean_bellpair_check_is_exactly_zero() {
        for seed in 0..20 {
            let mut reg = PairRegistry::new();
            let mut r = rng(seed);
            let (_, _, batch) =
                bellpair_insert(&mut reg, PartyId::Tp, &[], &[], 32, &mut r).unwrap();
            let check = bellpair_verify(&mut reg, &batch, &mut r);
            assert_eq!(check.error_rate, 0.0);
        }
    }

    #[test]
    fn intercept_resend_hits_a_quarter_of_check_pairs() {
        let mut reg = PairRegistry::new();
        let mut r = rng(9);
        let mut attacker = AttackerModel::new(AttackerKind::InterceptResend, 9);
        let (_, transmitted_seq, batch) =
            bellpair_insert(&mut reg, PartyId::Tp, &[], &[], 10_000, &mut r).unwrap();
        let mut channel = QuantumChannel::new(ChannelId::parse("TP-P1").unwrap());
        channel.transmit(&mut reg, Some(&mut attacker), &transmitted_seq);
        let check = bellpair_verify(&mut reg, &batch, &mut r);
        assert!(
            (check.error_rate - 0.25).abs() < 0.02,
            "error rate {}",
            check.error_rate
        );
    }

    #[test]
    fn measure_resend_fails_every_second_x_check() {
        // Z-only attacker against X-basis checks: the pair collapses to Z
        // eigenstates, whose X readouts are independent coin flips.
        let mut reg = PairRegistry::new();
        let mut r = rng(10);
        let mut attacker = AttackerModel::new(AttackerKind::MeasureResend, 10);
        let (_, transmitted_seq, batch) =
            bellpair_insert(&mut reg, PartyId::Tp, &[], &[], 10_000, &mut r).unwrap();
        let mut channel = QuantumChannel::new(ChannelId::parse("TP-P1").unwrap());
        channel.transmit(&mut reg, Some(&mut attacker), &transmitted_seq);
        let check = bellpair_verify_in_basis(&mut reg, &batch, Basis::X, &mut r);
        assert!(
            (check.error_rate - 0.5).abs() < 0.03,
            "error rate {}",
            check.error_rate
        );
    }

    #[test]
    fn attacker_none_is_passthrough() {
        let mut reg = PairRegistry::new();
        let mut attacker = AttackerModel::new(AttackerKind::None, 0);
        let [_, b] = reg.new_pair(BellCode::new(0b10), PartyId::Tp);
        let mut channel = QuantumChannel::new(ChannelId::parse("TP-P1").unwrap());
        channel.transmit(&mut reg, Some(&mut attacker), &[b]);
        assert_eq!(reg.pair_code(b), Some(BellCode::new(0b10)));
        assert_eq!(reg.holder(b), Some(PartyId::User(1)));
        assert!(attacker.captured().is_empty());
    }

    #[test]
    fn intercept_resend_forwards_fresh_eigenstate() {
        // Attacking |0> in the X basis forwards |+> or |->, each half the
        // time; cross-checked against the amplitude rule in statevector.
        let mut counts = [0u32; 2];
        for seed in 0..2000 {
            let mut reg = PairRegistry::new();
            let mut attacker = AttackerModel::new(AttackerKind::InterceptResend, seed);
            let p = reg.new_decoy(DecoyState::Z0, PartyId::Tp);
            // Force the X branch by retrying until the attacker picked X.
            attacker.interpose(&mut reg, p);
            let cap = attacker.captured()[0];
            if cap.basis == Basis::X {
                counts[cap.bit as usize] += 1;
                let forwarded = reg.lone_state(p).unwrap();
                assert_eq!(forwarded, DecoyState::from_basis_bit(Basis::X, cap.bit));
            }
        }
        let total = counts[0] + counts[1];
        assert!(total > 800, "X branch should occur about half the time");
        let sigma = (total as f64 * 0.25).sqrt();
        assert!(((counts[0] as f64) - total as f64 / 2.0).abs() < 4.0 * sigma);
    }
}
