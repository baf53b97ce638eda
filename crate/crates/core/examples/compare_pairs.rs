//! Compares the short reliability pairs numerically and prints the closed
//! form certificate that covers each one.

use bec_order::order::certify;
use bec_order::{compare_words, CompareConfig, PolarWord};

fn main() -> bec_order::Result<()> {
    let cfg = CompareConfig::default();
    let pairs = [
        ("011", "100"),
        ("00111", "10000"),
        ("01011", "10100"),
        ("001111", "110000"),
        ("000111", "100000"),
        ("01", "10"),
    ];
    for (l, r) in pairs {
        let (a, b) = (PolarWord::parse(l)?, PolarWord::parse(r)?);
        let v = compare_words(&a, &b, &cfg);
        let cert = certify(&a, &b)
            .map(|c| serde_json::to_string(&c).unwrap())
            .unwrap_or_else(|| "none".into());
        println!("{l:>6} vs {r:<6} {:<5} min gap {:>10.3e}  {cert}", v.relation(), v.min_gap);
        if let Some(x) = v.witness {
            println!("{:>22} at x = {x:.6}", "witness");
        }
    }
    Ok(())
}
