//! Simulator and analysis toolkit for quantum private comparison (QPC)
//! protocols built on entanglement swapping of Bell states.
//!
//! The crate covers the whole protocol family: the two-party baseline, its
//! decoy-hardened revision, the hash-hardened revision, the three-party
//! protocol, and the K-party generalization that settles every pairwise
//! equality verdict in a single execution. Around the protocol engine sit
//! a statevector oracle that grounds the swap algebra in raw amplitudes,
//! channel simulations with pluggable attackers, and analysis tooling that
//! rebuilds the relation tables, quantifies what the third party learns,
//! and reruns the published attacks as executable experiments.
//!
//! Start with the runnable examples (`cargo run --example two_party`) or
//! the `qpc` binary (`qpc run --protocol multi --k 6 ...`).

pub mod analysis;
pub mod bell;
pub mod channels;
pub mod classical;
pub mod cli;
pub mod params;
pub mod protocol;
pub mod registry;
pub mod statevector;
pub mod transcript;
pub mod verification;

pub use bell::{code_of, swap_collapse, swap_sample, BellCode, BellLabel};
pub use classical::{
    group_bits, group_score, hash_digest, mask, total_score, Digest, GroupSeq, HashConfig,
    SecretInput, TwoBits,
};
pub use params::{AttackSpec, ChannelAttackKind, ChannelId, PartyId, ProtocolParams, Variant};
pub use protocol::{
    replay, run_multi_party, run_protocol, run_three_party, run_two_party_hash,
    run_two_party_llcll, run_two_party_lwc, verify_replay, PairwiseResults, RunOutcome, RunReport,
};
pub use statevector::{
    bell_measure_pure, measure_decoy, oracle_swap_distribution, Basis, DecoyState, Statevector,
    SwapOutcome,
};
pub use transcript::{Event, Header, Transcript};
