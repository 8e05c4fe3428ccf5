//! Top-N homophily rankings per package and their precision against the
//! dependencies that actually appear in the next version.
//!
//! Run with `cargo run --example rank_dependencies [metric] [N]`.

use std::path::Path;

use deplink::graph::load_series;
use deplink::metrics::{MetricConfig, MetricId};
use deplink::ranking::evaluate_ranking;

fn main() -> deplink::Result<()> {
    let mut args = std::env::args().skip(1);
    let metric: MetricId = args.next().as_deref().unwrap_or("adamic-adar").parse()?;
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);

    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/series/manifest.json");
    let series = load_series(&manifest)?;
    let (v1, v2) = (series.snapshots()[0].graph(), series.snapshots()[1].graph());
    let ev = evaluate_ranking(v1, v2, metric, &MetricConfig::default(), n)?;

    for ranking in &ev.rankings {
        let hits = &ev.per_node[&ranking.source];
        println!("{}  (P@{n} = {:.2})", ranking.source, hits.precision());
        for (k, e) in ranking.entries.iter().enumerate() {
            let mark = if ev.is_hit(&ranking.source, &e.target) { "*" } else { " " };
            println!("  {}{mark} {:<18} {:.4}", k + 1, e.target.as_str(), e.score);
        }
    }
    println!(
        "\n{} precision@{n}: {:.3} over all packages, {:.3} over packages that gained dependencies",
        metric.name(),
        ev.micro_precision,
        ev.gaining_precision
    );
    Ok(())
}
