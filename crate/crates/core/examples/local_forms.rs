//! The local quantities behind the alignment system: g, h and their
//! derivatives, the (j, k) solution, and the swap coefficient.

use bec_order::local::{aligned_exponents, delta_quadratic, g_h, solve_jk, swap_coefficient};

fn main() -> bec_order::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>8}", "y", "g'", "h'", "j", "k", "c");
    for y in [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
        let (g1, h1) = g_h(y, 1)?;
        let jk = solve_jk(y)?;
        let c = swap_coefficient(y)?;
        println!("{y:>6} {g1:>10.5} {h1:>10.5} {:>10.6} {:>10.6} {c:>8.5}", jk.j, jk.k);
    }

    let e = aligned_exponents(0.3, 0.01, 0.02)?;
    println!("\naligned square at y = 0.3: {e:?}");
    for x in [0.1, 0.2, 0.3, 0.4, 0.5] {
        println!("  delta({x}) = {:+.3e}", delta_quadratic(x, &e)?);
    }
    Ok(())
}
