//! The prefix criterion at 1/2 and the bit strings it certifies.

use bec_order::order::{dyck_check, enumerate_dyck};

fn main() -> bec_order::Result<()> {
    for w in ["011", "01011", "001111", "000111", "10"] {
        let v = dyck_check(w)?;
        let prefixes: Vec<String> = v.prefix_values.iter().map(|p| format!("{p:.4}")).collect();
        println!("{w:>7} {:<5} [{}]", v.criterion, prefixes.join(" "));
    }
    let pairs = enumerate_dyck(8)?;
    println!("\n{} pairs up to length 8:", pairs.len());
    for p in pairs.iter().take(12) {
        println!("  {} >= {}", p.word, p.complement);
    }
    Ok(())
}
