//! Deterministic transcripts: record, serialize, replay, compare bytes.
//!
//! Every run is a pure function of its parameters and seed. The transcript
//! header carries both, so re-executing it must reproduce the event log
//! byte for byte — and tampering with the header is caught as divergence.
//!
//! ```bash
//! cargo run --example transcript_replay
//! ```

use qpc::{
    replay, run_multi_party, verify_replay, ProtocolParams, SecretInput, Transcript, Variant,
};

fn main() {
    let inputs = [
        SecretInput::from_u64(5, 16),
        SecretInput::from_u64(6, 16),
        SecretInput::from_u64(5, 16),
    ];
    let params = ProtocolParams::new(Variant::Multi, 3, 16, 31337);
    let out = run_multi_party(&params, &inputs).unwrap();

    let jsonl = out.transcript.to_jsonl();
    println!(
        "recorded {} lines of transcript; first two:",
        jsonl.lines().count()
    );
    for line in jsonl.lines().take(2) {
        let shown = if line.len() > 100 { &line[..100] } else { line };
        println!("  {shown}...");
    }

    let parsed = Transcript::from_jsonl(&jsonl).unwrap();
    verify_replay(&parsed).unwrap();
    println!();
    println!("replay from the parsed header: byte-identical");

    let mut tampered = parsed.clone();
    tampered.header.seed ^= 1;
    match verify_replay(&tampered) {
        Err(e) => println!("tampered seed: {e}"),
        Ok(()) => unreachable!("a different seed cannot reproduce the measurements"),
    }
    let regenerated = replay(&tampered).unwrap();
    println!(
        "the tampered header still re-executes cleanly ({} events, verdicts may differ)",
        regenerated.events.len()
    );
}
