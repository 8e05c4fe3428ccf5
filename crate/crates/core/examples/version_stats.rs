//! Per-version statistics, version deltas and the eligibility filter on a
//! small two-version fixture.
//!
//! Run with `cargo run --example version_stats`.

use std::path::Path;

use deplink::graph::{delta, filter_version_pairs, load_series, version_stats, PairFilterConfig, PairSummary};

fn main() -> deplink::Result<()> {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/series/manifest.json");
    let series = load_series(&manifest)?;

    println!("{:<4} {:>7} {:>4} {:>5} {:>9}  sparsity", "ver", "classes", "#p", "#deps", "change");
    for row in version_stats(&series) {
        let change = match (row.added, row.removed) {
            (Some(a), Some(r)) => format!("+{a}/-{r}"),
            _ => String::new(),
        };
        let classes = row.classes.map_or("-".to_string(), |c| c.to_string());
        println!(
            "{:<4} {:>7} {:>4} {:>5} {:>9}  {:.4}",
            row.label, classes, row.packages, row.deps, change, row.sparsity
        );
    }

    let (v1, v2) = (&series.snapshots()[0], &series.snapshots()[1]);
    let d = delta(v1.graph(), v2.graph());
    println!("\nnew dependencies {} -> {}:", v1.label(), v2.label());
    for (s, t) in &d.added_edges {
        println!("  + {s} -> {t}");
    }
    for (s, t) in &d.removed_edges {
        println!("  - {s} -> {t}");
    }

    let cfg = PairFilterConfig::default();
    let summary = PairSummary::between(v1, v2);
    println!(
        "\nnode growth {:.1}%, {} added among shared modules, eligible: {}",
        100.0 * summary.node_growth(),
        summary.added_shared_edges,
        summary.is_eligible(&cfg)
    );
    println!("eligible pairs: {:?}", filter_version_pairs(&series, &cfg)?);
    Ok(())
}
