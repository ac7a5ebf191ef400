//! The relation tables and what a nonzero score tells the third party.
//!
//! Rebuilds the two-party relation table for a fixed first group, the
//! score-to-group-pairs candidate sets, and the leakage figures: a
//! per-group score of 1 narrows twelve unequal pairs to eight, a score of
//! 2 narrows them to four.
//!
//! ```bash
//! cargo run --example leakage_tables
//! ```

use qpc::analysis::{build_table1, candidate_sets, leaked_bits, mutual_information_bits};
use qpc::TwoBits;

fn main() {
    println!("relation rows for G_A = 00 (one line per measurement combination, G_B = 00):");
    println!("  M_A   M_B   R_A R_B  M_T   R_T  scores over G_B");
    let rows = build_table1(TwoBits::new(0));
    for chunk in rows.chunks(4) {
        let r = chunk[0];
        let scores: Vec<String> = chunk.iter().map(|row| row.r_prime.to_string()).collect();
        println!(
            "  {:<5} {:<5} {}  {}   {:<5} {}   {}",
            r.m_a.to_string(),
            r.m_b.to_string(),
            r.r_a,
            r.r_b,
            r.m_t.to_string(),
            r.r_t,
            scores.join("/")
        );
    }

    println!();
    println!("candidate group pairs per score:");
    for score in 0u8..=2 {
        let pairs = candidate_sets(score).unwrap();
        let rendered: Vec<String> = pairs.iter().map(|(a, b)| format!("({a},{b})")).collect();
        println!(
            "  score {score}: {:2} pairs  {}",
            pairs.len(),
            rendered.join(" ")
        );
    }

    println!();
    println!(
        "leakage toward the third party: score 1 -> {:.6} bits, score 2 -> {:.6} bits",
        leaked_bits(1).unwrap(),
        leaked_bits(2).unwrap()
    );
    println!(
        "mutual information between the group pair and the score: {:.2} bits",
        mutual_information_bits()
    );
}
