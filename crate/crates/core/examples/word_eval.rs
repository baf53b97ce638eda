//! Parses a few realistic strings and evaluates them in floating point and
//! exactly at rational capacities.

use bec_order::exact::{eval_word_exact, rational_to_f64, DEFAULT_EXACT_CAP};
use bec_order::{eval_word, step0, step1, PolarWord};
use num_rational::BigRational;

fn main() -> bec_order::Result<()> {
    for text in ["011", "0^1.5 1^2", "0^2 0^3 1", "1^-0.5 0^2.25"] {
        let w = PolarWord::parse(text)?;
        println!("{text:>14} -> {w:<16} value at 0.3 = {:.12}", eval_word(&w, 0.3));
    }

    println!("step0(0.5, 1) = {}, step1(0.5, 1) = {}", step0(0.5, 1.0), step1(0.5, 1.0));

    let w = PolarWord::parse("01011")?;
    let half = BigRational::new(1.into(), 2.into());
    let exact = eval_word_exact(&w, &half, DEFAULT_EXACT_CAP)?;
    println!("01011 at 1/2 = {exact} = {:.16}", rational_to_f64(&exact));
    println!("complement of {w} is {}", w.complement());
    Ok(())
}
