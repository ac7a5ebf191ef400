//! Self-verification battery: regenerates the relation tables and the
//! leakage constants from the protocol machinery and compares them against
//! frozen expected values, and checks the swap algebra against the
//! statevector oracle outcome by outcome.

use serde::Serialize;

use crate::analysis::{
    build_table1, candidate_sets, leaked_bits, mutual_information_bits, Table1Row,
};
use crate::bell::{swap_collapse, BellCode};
use crate::classical::TwoBits;
use crate::statevector::oracle_swap_distribution;

/// Expected two-party relation rows for a first group of 00: one entry per
/// measurement combination, in publication order. Layout:
/// `(r_a, r_b, r_j over G_B in code order, r_t)`.
const TABLE1_EXPECTED: [(u8, u8, [u8; 4], u8); 16] = [
    (0b00, 0b00, [0b00, 0b01, 0b10, 0b11], 0b00),
    (0b00, 0b01, [0b01, 0b00, 0b11, 0b10], 0b01),
    (0b00, 0b10, [0b10, 0b11, 0b00, 0b01], 0b10),
    (0b00, 0b11, [0b11, 0b10, 0b01, 0b00], 0b11),
    (0b01, 0b01, [0b00, 0b01, 0b10, 0b11], 0b00),
    (0b01, 0b00, [0b01, 0b00, 0b11, 0b10], 0b01),
    (0b01, 0b11, [0b10, 0b11, 0b00, 0b01], 0b10),
    (0b01, 0b10, [0b11, 0b10, 0b01, 0b00], 0b11),
    (0b10, 0b10, [0b00, 0b01, 0b10, 0b11], 0b00),
    (0b10, 0b11, [0b01, 0b00, 0b11, 0b10], 0b01),
    (0b10, 0b00, [0b10, 0b11, 0b00, 0b01], 0b10),
    (0b10, 0b01, [0b11, 0b10, 0b01, 0b00], 0b11),
    (0b11, 0b00, [0b11, 0b10, 0b01, 0b00], 0b11),
    (0b11, 0b10, [0b01, 0b00, 0b11, 0b10], 0b01),
    (0b11, 0b01, [0b10, 0b11, 0b00, 0b01], 0b10),
    (0b11, 0b11, [0b00, 0b01, 0b10, 0b11], 0b00),
];

/// Per-group score pattern over the second group in code order.
const SCORE_PATTERN: [u8; 4] = [0, 1, 1, 2];

/// Expected candidate pairs per score class (the score-to-groups relation
/// table; identical for raw and hashed groups).
const CANDIDATES_EXPECTED: [&[(u8, u8)]; 3] = [
    &[(0b00, 0b00), (0b01, 0b01), (0b10, 0b10), (0b11, 0b11)],
    &[
        (0b00, 0b01),
        (0b00, 0b10),
        (0b01, 0b00),
        (0b01, 0b11),
        (0b10, 0b00),
        (0b10, 0b11),
        (0b11, 0b01),
        (0b11, 0b10),
    ],
    &[(0b00, 0b11), (0b01, 0b10), (0b10, 0b01), (0b11, 0b00)],
];

const LOG2_3: f64 = 1.584_962_500_721_156;

/// Result of one verification check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: String) -> CheckOutcome {
        CheckOutcome {
            name,
            pass: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> CheckOutcome {
        CheckOutcome {
            name,
            pass: false,
            detail,
        }
    }
}

/// Compare regenerated relation rows against an expected table. Returns
/// the first mismatch description, if any.
fn diff_table1(rows: &[Table1Row], expected: &[(u8, u8, [u8; 4], u8)]) -> Option<String> {
    if rows.len() != 64 {
        return Some(format!("expected 64 rows, got {}", rows.len()));
    }
    for &(r_a, r_b, r_j_pattern, r_t) in expected {
        let r_a = BellCode::new(r_a);
        let r_b = BellCode::new(r_b);
        for (idx, g_b) in TwoBits::ALL.into_iter().enumerate() {
            let Some(row) = rows
                .iter()
                .find(|row| row.r_a == r_a && row.r_b == r_b && row.g_b == g_b)
            else {
                return Some(format!("missing row ({r_a}, {r_b}, G_B={g_b})"));
            };
            if row.m_a != r_a.label() || row.m_b != r_b.label() {
                return Some(format!("label/code mismatch at ({r_a}, {r_b})"));
            }
            if row.r_t != BellCode::new(r_t) || row.m_t != BellCode::new(r_t).label() {
                return Some(format!(
                    "row ({r_a}, {r_b}): r_t {} expected {}",
                    row.r_t,
                    BellCode::new(r_t)
                ));
            }
            if row.r_j != TwoBits::new(r_j_pattern[idx]) {
                return Some(format!(
                    "row ({r_a}, {r_b}, G_B={g_b}): r_j {} expected {}",
                    row.r_j, r_j_pattern[idx]
                ));
            }
            if row.r_prime != SCORE_PATTERN[idx] {
                return Some(format!(
                    "row ({r_a}, {r_b}, G_B={g_b}): score {} expected {}",
                    row.r_prime, SCORE_PATTERN[idx]
                ));
            }
        }
    }
    None
}

fn check_table1() -> CheckOutcome {
    let name = "table1-reconstruction";
    let rows = build_table1(TwoBits::new(0));
    match diff_table1(&rows, &TABLE1_EXPECTED) {
        None => CheckOutcome::pass(
            name,
            "all 16 measurement combinations reproduce the published row set, \
             score pattern 0/1/1/2 per second group"
                .into(),
        ),
        Some(diff) => CheckOutcome::fail(name, diff),
    }
}

fn check_candidate_sets() -> CheckOutcome {
    let name = "table2-table3-candidate-sets";
    for (score, expected) in CANDIDATES_EXPECTED.iter().enumerate() {
        let derived = match candidate_sets(score as u8) {
            Ok(set) => set,
            Err(e) => return CheckOutcome::fail(name, e.to_string()),
        };
        let expected: Vec<(TwoBits, TwoBits)> = expected
            .iter()
            .map(|&(a, b)| (TwoBits::new(a), TwoBits::new(b)))
            .collect();
        let mut sorted = expected.clone();
        sorted.sort();
        if derived != sorted {
            return CheckOutcome::fail(
                name,
                format!("score {score}: derived {derived:?}, expected {sorted:?}"),
            );
        }
    }
    CheckOutcome::pass(
        name,
        "candidate sets partition the 16 group pairs as 4/8/4; identical for hashed groups".into(),
    )
}

fn check_oracle_equivalence() -> CheckOutcome {
    let name = "oracle-algebra-equivalence";
    for a in BellCode::ALL {
        for b in BellCode::ALL {
            let dist = match oracle_swap_distribution(a, b) {
                Ok(d) => d,
                Err(e) => return CheckOutcome::fail(name, e.to_string()),
            };
            if dist.len() != 4 {
                return CheckOutcome::fail(name, format!("({a},{b}): {} outcomes", dist.len()));
            }
            for out in dist {
                if out.residual != swap_collapse(a, b, out.measured) {
                    return CheckOutcome::fail(
                        name,
                        format!(
                            "({a},{b}): oracle residual {} vs algebra {}",
                            out.residual,
                            swap_collapse(a, b, out.measured)
                        ),
                    );
                }
                if (out.probability - 0.25).abs() > 1e-12 {
                    return CheckOutcome::fail(
                        name,
                        format!("({a},{b}): probability {}", out.probability),
                    );
                }
            }
        }
    }
    CheckOutcome::pass(
        name,
        "all 16 source combinations: statevector outcomes match the XOR law, p = 1/4 within 1e-12"
            .into(),
    )
}

fn check_leaked_bits() -> CheckOutcome {
    let name = "leaked-bits-constants";
    let one = match leaked_bits(1) {
        Ok(v) => v,
        Err(e) => return CheckOutcome::fail(name, e.to_string()),
    };
    let two = match leaked_bits(2) {
        Ok(v) => v,
        Err(e) => return CheckOutcome::fail(name, e.to_string()),
    };
    let ok = (one - (LOG2_3 - 1.0)).abs() < 1e-9 && (two - LOG2_3).abs() < 1e-9;
    let detail = format!("score 1 leaks {one:.6} bits, score 2 leaks {two:.6} bits");
    if ok {
        CheckOutcome::pass(name, detail)
    } else {
        CheckOutcome::fail(name, detail)
    }
}

fn check_mutual_information() -> CheckOutcome {
    let name = "mutual-information";
    let mi = mutual_information_bits();
    if (mi - 1.5).abs() < 1e-9 {
        CheckOutcome::pass(
            name,
            format!("I(groups; score) = {mi:.6} bits under uniform prior"),
        )
    } else {
        CheckOutcome::fail(name, format!("got {mi}"))
    }
}

/// Negative control: the comparison machinery must notice a corrupted
/// expected table, otherwise the positive checks prove nothing.
fn check_negative_control() -> CheckOutcome {
    let name = "negative-control-mutated-coding";
    let mut mutated = TABLE1_EXPECTED;
    mutated[0].3 ^= 0b01;
    let rows = build_table1(TwoBits::new(0));
    match diff_table1(&rows, &mutated) {
        Some(diff) => CheckOutcome::pass(name, format!("mutation detected: {diff}")),
        None => CheckOutcome::fail(name, "mutated table went unnoticed".into()),
    }
}

/// Run the whole battery.
pub fn verification_checks() -> Vec<CheckOutcome> {
    vec![
        check_table1(),
        check_candidate_sets(),
        check_oracle_equivalence(),
        check_leaked_bits(),
        check_mutual_information(),
        check_negative_control(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_every_check() {
        for check in verification_checks() {
            assert!(check.pass, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn table_diff_catches_mutations() {
        let rows = build_table1(TwoBits::new(0));
        let mut mutated = TABLE1_EXPECTED;
        mutated[5].2[1] ^= 0b10;
        assert!(diff_table1(&rows, &mutated).is_some());
    }
}
