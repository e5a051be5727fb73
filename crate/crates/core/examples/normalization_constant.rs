//! Table of `C_{N,s}` against the closed forms that exist for special `s`.

use fracdiff::kernel::normalization_constant;
use std::f64::consts::PI;

fn main() -> fracdiff::error::Result<()> {
    let known = [
        (1, 0.5, 1.0 / PI),
        (1, 0.25, 0.25 * 2f64.sqrt() / PI.sqrt()),
        (2, 0.5, 1.0 / (2.0 * PI)),
    ];
    println!(
        "{:>3} {:>6} {:>22} {:>12}",
        "N", "s", "C_{N,s}", "rel. error"
    );
    for (n, s, exact) in known {
        let c = normalization_constant(n, s)?;
        println!(
            "{n:>3} {s:>6} {c:>22.16e} {:>12.2e}",
            ((c - exact) / exact).abs()
        );
    }
    // Blows up like 1/(1-s) near s = 1 and vanishes like s near 0.
    for s in [0.01, 0.1, 0.9, 0.99] {
        println!("{:>3} {s:>6} {:>22.16e}", 1, normalization_constant(1, s)?);
    }
    Ok(())
}
