//! Entanglement swapping from first principles.
//!
//! Builds the joint statevector of two Bell pairs, projects one particle
//! from each pair onto the Bell basis, and prints the outcome distribution
//! next to the XOR-algebra prediction for all 16 source combinations.
//!
//! ```bash
//! cargo run --example swap_oracle
//! ```

use qpc::{oracle_swap_distribution, swap_collapse, BellCode};

fn main() {
    println!("source A  source B  measured  residual  p        algebra");
    for a in BellCode::ALL {
        for b in BellCode::ALL {
            let dist = oracle_swap_distribution(a, b).expect("residuals are Bell states");
            for out in &dist {
                let predicted = swap_collapse(a, b, out.measured);
                assert_eq!(out.residual, predicted);
                assert!((out.probability - 0.25).abs() < 1e-12);
                println!(
                    "{:<9} {:<9} {:<9} {:<9} {:<8.4} {}",
                    a.label(),
                    b.label(),
                    out.measured.label(),
                    out.residual.label(),
                    out.probability,
                    predicted.label(),
                );
            }
        }
    }
    println!();
    println!("all 64 outcomes: statevector residual == a XOR b XOR measured, p = 1/4");
}
