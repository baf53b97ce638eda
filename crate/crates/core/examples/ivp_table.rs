//! Integrates the alignment system to t = 10 and prints the state table,
//! conservation and constraint residuals, and the exponent integrals.

use bec_order::ivp::{integrate, output_grid, residuals};

fn main() -> bec_order::Result<()> {
    let started = std::time::Instant::now();
    let traj = integrate(10.0, 1e-10)?;
    println!(
        "integrated to t = 10 in {:.1?} with {} steps",
        started.elapsed(),
        traj.step_count()
    );

    print!("{}", traj.to_csv(&[0.5, 1.0, 2.0, 3.0, 5.0, 10.0], Some(5))?);

    let mut worst = 0.0f64;
    for t in output_grid(10.0, 0.01) {
        worst = worst.max(residuals(&traj.sample(t)?).max_abs());
    }
    println!("max residual on [0, 10]: {worst:.3e}");

    for mu in [0.5, 1.0, 2.0] {
        let (m, big_m) = traj.exponent_integrals(mu)?;
        println!("mu = {mu}: m = {m:.8}, M = {big_m:.8}");
    }
    Ok(())
}
