//! Estimating next-version features from a window of past versions and
//! classifying with them, side by side with the real next-version features.
//!
//! Run with `cargo run --release --example forecast_features [method]`,
//! where method is `linear_ls`, `naive` or `exp:<alpha>`.

use deplink::dataset::DatasetMode;
use deplink::forecast::{forecast_next, forecast_pipeline, ForecastMethod, ForecastSettings};
use deplink::metrics::MetricId;
use deplink::synth::{generate, SynthConfig};

fn main() -> deplink::Result<()> {
    let method: ForecastMethod = std::env::args().nth(1).as_deref().unwrap_or("linear_ls").parse()?;

    let series = [0.10, 0.20, 0.35];
    println!(
        "forecast of {series:?} (sorensen): {:.3}",
        forecast_next(&series, MetricId::Sorensen, method)?
    );

    let series = generate(&SynthConfig {
        seed: 1,
        p_triadic: 1.0,
        ..Default::default()
    })?;
    let settings = ForecastSettings {
        method,
        mode: DatasetMode::AsPaper,
        ..Default::default()
    };
    println!("\n{:<8} {:>10} {:>10}", "window", "estimated", "real");
    for end in 1..series.len() - 1 {
        let out = forecast_pipeline(&series, 0..=end, end + 1, &settings)?;
        println!(
            "{:<8} {:>10.4} {:>10.4}",
            out.estimated.key, out.estimated.positive_aupr, out.real.positive_aupr
        );
    }
    Ok(())
}
