//! The `verify` pipeline driven from a config file, as the binary runs it.
//! Usage: `cargo run --release --example config_pipeline [config.toml]`.

use fracdiff::cli::{prepare_output, run_verify};
use fracdiff::config::RunConfig;

fn main() -> fracdiff::error::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/robin.toml").to_string()
    });
    let cfg = RunConfig::from_path(path.as_ref())?;
    let out = prepare_output(&cfg, "verify")?;
    let reports = run_verify(&cfg, &out, false)?;
    for r in &reports {
        println!("{}", r.line());
    }
    println!(
        "{} of {} checks passed; report in {}",
        reports.iter().filter(|r| r.passed).count(),
        reports.len(),
        out.display()
    );
    Ok(())
}
