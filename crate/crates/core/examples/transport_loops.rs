//! Transports capacities around closed staircase loops. Loops through the
//! diagonal return Y at their start; the counterclockwise square only moves
//! capacities up.

use bec_order::ivp::integrate;
use bec_order::path::{loop_verdict, staircase_word, transport, Path};
use bec_order::eval_word;

fn main() -> bec_order::Result<()> {
    let traj = integrate(10.0, 1e-10)?;
    let square = Path::rectangle(0.0, 0.0, 2.0, 2.0)?;

    let word = staircase_word(&square, &traj)?;
    println!("square loop word: {word}");
    for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let ccw = transport(&square, x, &traj)?;
        let cw = transport(&square.reversed(), x, &traj)?;
        println!("x = {x}: ccw {ccw:.9}  cw {cw:.9}  word {:.9}", eval_word(&word, x));
    }

    let xs: Vec<f64> = (1..=100).map(|i| i as f64 / 101.0).collect();
    let rep = loop_verdict(&square, &traj, &xs, 1e-9)?;
    println!(
        "loop inequality holds: {}, smallest margin {:.3e} at {:.4}",
        rep.holds, rep.min_margin, rep.margin_at
    );

    let stairs = Path::parse("0,0 1,0 1,0.5 1.5,0.5 1.5,1.5 0,1.5 0,0")?;
    println!("staircase from the origin sends 1/2 to {:.12}", transport(&stairs, 0.5, &traj)?);
    Ok(())
}
