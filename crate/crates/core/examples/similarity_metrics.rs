//! The nine pair-similarity metrics, neighbourhood modes and label
//! propagation communities on a small dependency graph.
//!
//! Run with `cargo run --example similarity_metrics`.

use deplink::metrics::{communities, neighbors, MetricConfig, MetricId, NeighborhoodMode, PairScorer};
use deplink::{DependencyGraph, ModuleId};

fn main() -> deplink::Result<()> {
    let g = DependencyGraph::from_pairs(&[
        ("ui", "api"),
        ("ui", "util"),
        ("cli", "api"),
        ("cli", "log"),
        ("api", "core"),
        ("api", "util"),
        ("core", "db"),
        ("core", "log"),
        ("core", "util"),
        ("db", "log"),
    ]);

    for mode in [NeighborhoodMode::Out, NeighborhoodMode::In, NeighborhoodMode::Union] {
        let names: Vec<String> = neighbors(&g, "api", mode)?.iter().map(|m| m.to_string()).collect();
        println!("Γ_{mode:?}(api) = {{{}}}", names.join(", "));
    }

    let cfg = MetricConfig::default();
    let scorer = PairScorer::new(&g, &cfg)?;
    let pairs = [("ui", "core"), ("cli", "util"), ("db", "ui")];
    print!("\n{:<12}", "pair");
    for m in MetricId::ALL {
        print!("{:>12}", m.column());
    }
    println!();
    for (x, y) in pairs {
        let fv = scorer.features_by_id(&ModuleId::new(x)?, &ModuleId::new(y)?)?;
        print!("{:<12}", format!("{x}->{y}"));
        for v in fv.values() {
            print!("{v:>12.6}");
        }
        println!();
    }

    let partition = communities(&g, 0);
    println!("\n{} communities:", partition.community_count());
    for (module, label) in partition.assignment() {
        println!("  {module:<5} {label}");
    }
    Ok(())
}
