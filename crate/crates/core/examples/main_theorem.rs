//! The main test for 0^m 1^n against 1^m 0^n: exact desk checks, the
//! threshold exponent M(m), and the square pairs.

use bec_order::order::{capital_m, decide_main, square_exponent, square_pair};

fn main() -> bec_order::Result<()> {
    for (m, n) in [(1.0, 1.0), (1.0, 2.0), (2.0, 3.0), (2.0, 4.0), (3.0, 8.0), (1.5, 2.0)] {
        let d = decide_main(m, n)?;
        let exact = d.exact_threshold.clone().unwrap_or_default();
        println!("m = {m:<4} n = {n:<4} {:<8} threshold {:.10} {exact}", d.status(), d.threshold_value);
    }

    println!("\n{:>5} {:>14} {:>14}", "m", "M(m)", "2^m + lg ln 2");
    for m in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        println!("{m:>5} {:>14.10} {:>14.10}", capital_m(m)?, square_exponent(m));
    }

    let sp = square_pair(1.0)?;
    println!("\nsquare pair at m = 1: {} vs {} -> {}", sp.left, sp.right, sp.verdict.status());
    Ok(())
}
