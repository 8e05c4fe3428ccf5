//! Training the RBF support vector machine on one version and scoring the
//! candidate dependencies of the next, compared against each metric used
//! directly as a score.
//!
//! Run with `cargo run --release --example classify_pairs [seed]`.

use deplink::classifier::TrainedModel;
use deplink::graph::PairFilterConfig;
use deplink::pipeline::{classify_eligible, compare_with_metrics, ClassifySettings};
use deplink::synth::{generate, SynthConfig};

fn main() -> deplink::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let series = generate(&SynthConfig {
        seed,
        ..Default::default()
    })?;
    let settings = ClassifySettings::default();
    let runs = classify_eligible(&series, &PairFilterConfig::default(), &settings)?;

    println!("{:<8} {:>9} {:>9} {:>9} {:>6} {:>6}", "pair", "pos AUPR", "neg AUPR", "weighted", "+", "-");
    for run in &runs {
        let r = &run.report;
        println!(
            "{:<8} {:>9.4} {:>9.4} {:>9.4} {:>6} {:>6}",
            r.key, r.positive_aupr, r.negative_aupr, r.weighted_aupr, r.counts.positive, r.counts.negative
        );
    }

    let cmp = compare_with_metrics(&runs)?;
    println!(
        "\nmean positive AUPR: classifier {:.4}, best metric ({}) {:.4}",
        cmp.classifier_aupr,
        cmp.best_metric.name(),
        cmp.best_metric_aupr
    );

    let model = &runs[0].model;
    let json = model.to_json()?;
    let back = TrainedModel::from_json(&json)?;
    println!(
        "model of {}: {} support vectors, {} SMO updates, JSON round trip {}",
        runs[0].report.key,
        back.support_vectors.len(),
        back.training.updates,
        if &back == model { "exact" } else { "differs" }
    );
    Ok(())
}
