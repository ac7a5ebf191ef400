//! Six users, fifteen pairwise verdicts, still one execution.
//!
//! Pairwise two-party comparison among K users costs between K-1 and
//! K(K-1)/2 protocol runs; the K-party protocol settles every pair in a
//! single run. This example compares six inputs containing two duplicate
//! groups and prints the verdict matrix.
//!
//! ```bash
//! cargo run --example multi_party
//! ```

use qpc::analysis::execution_count;
use qpc::{run_multi_party, ProtocolParams, SecretInput, Variant};

fn main() {
    let inputs = [
        SecretInput::from_u64(111, 16), // P1
        SecretInput::from_u64(222, 16), // P2
        SecretInput::from_u64(111, 16), // P3 == P1
        SecretInput::from_u64(333, 16), // P4
        SecretInput::from_u64(222, 16), // P5 == P2
        SecretInput::from_u64(444, 16), // P6
    ];
    let params = ProtocolParams::new(Variant::Multi, 6, 16, 7);
    let out = run_multi_party(&params, &inputs).unwrap();

    println!("verdict matrix for 6 users:");
    for row in out.results.verdict_matrix() {
        println!("  {}", row.join("\t"));
    }
    println!();
    println!(
        "{} pairwise verdicts from a single transcript of {} events",
        out.results.pairs.len(),
        out.transcript.events.len()
    );

    let (pair_min, pair_max, ours) = execution_count(6).unwrap();
    println!(
        "two-party executions needed instead: {pair_min} to {pair_max}; this protocol: {ours}"
    );
}
