//! Precision-recall curves, step-interpolated AUPR, the support-weighted
//! two-class AUPR and report files.
//!
//! Run with `cargo run --example pr_evaluation`.

use deplink::dataset::{DatasetMode, Label};
use deplink::eval::{evaluate, pr_curve, aupr, weighted_aupr, Provenance, ReportFile};

fn main() -> deplink::Result<()> {
    use Label::{Negative as N, Positive as P};
    let scores = [0.92, 0.85, 0.85, 0.60, 0.41, 0.33, 0.20, 0.05];
    let labels = [P, N, P, N, N, P, N, N];

    let curve = pr_curve(&scores, &labels)?;
    println!("{:>9} {:>7} {:>9}", "threshold", "recall", "precision");
    for p in &curve {
        println!("{:>9.2} {:>7.3} {:>9.3}", p.threshold, p.recall, p.precision);
    }
    println!("AUPR (positive class): {:.4}", aupr(&curve));

    let w = weighted_aupr(&scores, &labels)?;
    println!("negative class: {:.4}, weighted: {:.4}", w.negative, w.weighted);

    let mut report = ReportFile::new(serde_json::json!({ "source": "pr_evaluation example" }));
    let prov = Provenance::new("classifier", "v1", "v2").with_mode(DatasetMode::Forward);
    report.rows.push(evaluate(&scores, &labels, prov, Some(3))?);
    let dir = std::env::temp_dir().join("deplink-pr-example");
    let path = report.write(&dir)?;
    println!("\nwrote {} and {}", path.display(), dir.join("pr_curve.csv").display());
    Ok(())
}
