//! Emits a grid of edge exponents from the alignment trajectory, verifies
//! every square, and checks the printed diagonal labels.

use bec_order::grid::{diagonal_label_grid, emit_grid, verify_grid, EdgeRule};
use bec_order::ivp::integrate;

fn main() -> bec_order::Result<()> {
    let traj = integrate(10.0, 1e-10)?;

    for delta in [0.125, 0.0625, 0.03125] {
        let g = emit_grid(6, 4, delta, &traj, 1.0, EdgeRule::Midpoint)?;
        let rep = verify_grid(&g, 201, 1e-9)?;
        let worst = rep.worst().unwrap();
        println!(
            "delta = {delta:<8} all pass: {}  worst gap {:.3e} at square ({}, {})",
            rep.all_pass(),
            worst.min_gap,
            worst.col,
            worst.row
        );
    }

    let labels = [0.616, 0.632, 0.677, 0.764, 0.906, 1.122, 1.450, 1.969, 2.818, 4.211];
    let g = diagonal_label_grid(&labels, 6, 4, 5, 3)?;
    let rep = verify_grid(&g, 201, 1e-3)?;
    print!("{}", rep.to_csv());
    Ok(())
}
