//! Two-party private comparison, all three flavours.
//!
//! Alice and Bob compare secret inputs through the third party without
//! revealing them: the unchecked baseline, the decoy-checked revision and
//! the digest-comparing revision all produce the same verdict on a clean
//! channel.
//!
//! ```bash
//! cargo run --example two_party
//! ```

use qpc::{
    run_two_party_hash, run_two_party_llcll, run_two_party_lwc, ProtocolParams, SecretInput,
    Variant,
};

fn main() {
    let x = SecretInput::from_hex("c3a9", 16).unwrap();
    let y = SecretInput::from_hex("c3a9", 16).unwrap();
    let z = SecretInput::from_hex("c3a8", 16).unwrap();

    let lwc = ProtocolParams::new(Variant::Lwc2, 2, 16, 42);
    let out = run_two_party_lwc(&lwc, &x, &y).unwrap();
    println!(
        "baseline, equal inputs:   total {} -> {:?}",
        out.results.pairs[0].total,
        out.results.verdict(1, 2).unwrap()
    );

    let llcll = ProtocolParams::new(Variant::Llcll2, 2, 16, 42);
    let out = run_two_party_llcll(&llcll, &x, &z).unwrap();
    println!(
        "decoy-checked, unequal:   total {} -> {:?}",
        out.results.pairs[0].total,
        out.results.verdict(1, 2).unwrap()
    );

    let hash = ProtocolParams::new(Variant::Hash2, 2, 16, 42);
    let out = run_two_party_hash(&hash, &x, &y).unwrap();
    println!(
        "digest-comparing, equal:  total {} -> {:?}",
        out.results.pairs[0].total,
        out.results.verdict(1, 2).unwrap()
    );
    println!();
    println!(
        "transcript of the last run: {} events, {} of them public classical traffic",
        out.transcript.events.len(),
        out.transcript.classical_events().len()
    );
}
