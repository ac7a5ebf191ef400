//! Three users, three pairwise verdicts, one protocol run.
//!
//! Alice, Bob and Charlie hand the third party one comparison chain; the
//! first round settles Alice-vs-Bob, the second round settles both
//! remaining pairs. The example also prints what each role could deduce
//! from its own view of the run.
//!
//! ```bash
//! cargo run --example three_party
//! ```

use qpc::analysis::{observer_view, Knowledge, ObserverRole};
use qpc::{run_three_party, ProtocolParams, SecretInput, Variant};

fn main() {
    let x = SecretInput::from_u64(1234, 16);
    let y = SecretInput::from_u64(1234, 16);
    let z = SecretInput::from_u64(9999, 16);

    let params = ProtocolParams::new(Variant::Three, 3, 16, 2024);
    let out = run_three_party(&params, &x, &y, &z).unwrap();

    println!("inputs: X = Y != Z");
    for pair in &out.results.pairs {
        println!(
            "  P{} vs P{}: total {:3} -> {}",
            pair.m,
            pair.k,
            pair.total,
            if pair.equal { "equal" } else { "unequal" }
        );
    }

    println!();
    println!("what each observer can reconstruct (digest groups, not raw inputs):");
    for role in [
        ObserverRole::Outside,
        ObserverRole::User(1),
        ObserverRole::Tp,
    ] {
        let view = observer_view(&out.transcript, role).unwrap();
        let summary: Vec<String> = (1..=3)
            .map(|i| {
                let key = format!("G[P{i}]");
                let status = match view.symbols.get(&key) {
                    Some(Knowledge::Exact { .. }) => "exact",
                    _ => "unknown",
                };
                format!("{key}={status}")
            })
            .collect();
        println!("  {:<8} {}", role.to_string(), summary.join("  "));
    }
}
