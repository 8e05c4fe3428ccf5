//! Generating a seeded evolving dependency graph and writing it as a series
//! manifest that the command line and `load_series` accept.
//!
//! Run with `cargo run --example synthetic_series [output-dir]`.

use std::path::PathBuf;

use deplink::graph::{load_series, version_stats};
use deplink::synth::{generate, write_series, SynthConfig};

fn main() -> deplink::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("deplink-synth"));
    let cfg = SynthConfig {
        seed: 42,
        node_count: 15,
        version_count: 5,
        ..Default::default()
    };
    let series = generate(&cfg)?;
    let manifest = write_series(&series, &dir)?;
    println!("wrote {}", manifest.display());

    let reloaded = load_series(&manifest)?;
    assert_eq!(reloaded, series);
    for row in version_stats(&reloaded) {
        println!(
            "{}: {} modules, {} dependencies (+{}), sparsity {:.4}",
            row.label,
            row.packages,
            row.deps,
            row.added.unwrap_or(0),
            row.sparsity
        );
    }
    Ok(())
}
