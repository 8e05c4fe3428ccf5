//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{bold_pairs, random_digraph, realize, rng, sweep_average_precision, MetricOracle, HW, SDB};
use deplink::classifier::{train_rows, KernelSpec, SvmParams};
use deplink::dataset::Label;
use deplink::eval::{aupr, average_precision, pr_curve};
use deplink::forecast::{forecast_pipeline, ForecastSettings};
use deplink::graph::{delta, filter_version_pairs, load_edge_list, load_odem, sparsity_from_counts, PairFilterConfig};
use deplink::metrics::{MetricConfig, MetricId, NeighborhoodMode, PairScorer};
use deplink::pipeline::{classify_eligible, compare_with_metrics, BaselineComparison, ClassifySettings, PairRun};
use deplink::synth::{generate, SynthConfig};
use deplink::dataset::DatasetMode;
use rand::seq::SliceRandom;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn table_fidelity() -> Verdict {
    let mut misses = Vec::new();
    let mut checked = 0;
    for (system, rows) in [("HW", &HW), ("SDB", &SDB)] {
        for (i, r) in rows.iter().enumerate() {
            checked += 1;
            let s = sparsity_from_counts(r.packages, r.deps);
            if (s - r.sparsity).abs() > 5e-5 {
                misses.push(format!("{system} {} sparsity {s:.6} vs {:.4}", r.version, r.sparsity));
            }
            if r.added.is_some() || r.removed.is_some() {
                let prev = rows[i - 1].deps;
                let (a, d) = (r.added.unwrap_or(0), r.removed.unwrap_or(0));
                if prev + a - d != r.deps {
                    misses.push(format!("{system} {} delta {prev}+{a}-{d}={} vs {}", r.version, prev + a - d, r.deps));
                }
            }
        }
    }
    let detail = format!("{}/{checked} rows reconcile", checked - misses.len());
    if misses.is_empty() {
        verdict(true, detail)
    } else {
        verdict(false, format!("{detail}; {}", misses.join("; ")))
    }
}

fn filter_fidelity() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for (system, rows) in [("HW", &HW[..]), ("SDB", &SDB[..])] {
        let series = realize(rows, 17);
        for (snap, r) in series.snapshots().iter().zip(rows) {
            assert_eq!(snap.graph().node_count(), r.packages);
            assert_eq!(snap.graph().edge_count(), r.deps);
        }
        let got = filter_version_pairs(&series, &PairFilterConfig::default()).expect("filter");
        let want = bold_pairs(rows);
        if got != want {
            pass = false;
            notes.push(format!("{system}: selected {got:?}, bold {want:?}"));
        } else {
            notes.push(format!("{system}: {} pairs", got.len()));
        }
    }
    verdict(pass, notes.join(", "))
}

fn metric_oracles() -> Verdict {
    let mut worst = (0.0f64, String::new());
    let mut pairs = 0usize;
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let n = r.gen_range(3..=20);
        let p = r.gen_range(0.1..=0.4);
        let g = random_digraph(&mut r, n, p);
        let mode = [NeighborhoodMode::Union, NeighborhoodMode::Out, NeighborhoodMode::In][seed as usize % 3];
        let cfg = MetricConfig {
            mode,
            simrank_max_iters: 10_000,
            simrank_tol: 1e-14,
            ..Default::default()
        };
        let scorer = PairScorer::new(&g, &cfg).expect("scorer");
        let oracle = MetricOracle::new(&g, mode, cfg.katz_beta, cfg.katz_max_length, cfg.simrank_decay);
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                pairs += 1;
                let want = oracle.scores(x, y);
                for m in MetricId::ALL {
                    let err = (scorer.score(x, y, m) - want[m.position()]).abs();
                    if err > worst.0 {
                        worst = (err, format!("{m} on graph {seed} ({x},{y})"));
                    }
                }
            }
        }
    }
    verdict(
        worst.0 <= 1e-9,
        format!("{pairs} pairs x 9 metrics, max error {:.2e} {}", worst.0, worst.1),
    )
}

fn aupr_oracles() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let mut r = rng(1000 + seed);
        let len = r.gen_range(1..=50);
        let prevalence = r.gen_range(0.05..0.95);
        let mut labels: Vec<Label> = (0..len).map(|_| Label::from_bool(r.gen_bool(prevalence))).collect();
        let forced = r.gen_range(0..len);
        labels[forced] = Label::Positive;
        let scores: Vec<f64> = if seed % 2 == 0 {
            (0..len).map(|_| f64::from(r.gen_range(0..5u8))).collect()
        } else {
            (0..len).map(|_| r.gen::<f64>()).collect()
        };
        let want = sweep_average_precision(&scores, &labels);
        let got = average_precision(&scores, &labels).expect("ap");
        let via_curve = aupr(&pr_curve(&scores, &labels).expect("curve"));
        worst = worst.max((got - want).abs()).max((via_curve - want).abs());
    }

    let mut r = rng(7);
    let mut labels: Vec<Label> = (0..200).map(|i| Label::from_bool(i < 20)).collect();
    let mut total = 0.0;
    for _ in 0..1000 {
        labels.shuffle(&mut r);
        let scores: Vec<f64> = (0..200).map(|_| r.gen::<f64>()).collect();
        total += average_precision(&scores, &labels).expect("ap");
    }
    let mean = total / 1000.0;
    verdict(
        worst <= 1e-9 && (mean - 0.1).abs() <= 0.03,
        format!("500 cases, max error {worst:.2e}; random scorer mean {mean:.4} (prevalence 0.1)"),
    )
}

fn svm_dataset(seed: u64) -> (Vec<Vec<f64>>, Vec<bool>, Vec<f64>) {
    let mut r = rng(5000 + seed);
    let n = r.gen_range(20..=100);
    let dim = r.gen_range(2..=5);
    let separable = seed % 2 == 0;
    let w: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    while rows.len() < n {
        let x: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0) * 3.0).collect();
        let margin: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.2;
        let label = if separable {
            if margin.abs() < 0.3 {
                continue;
            }
            margin > 0.0
        } else {
            (margin > 0.0) != r.gen_bool(0.2)
        };
        rows.push(x);
        labels.push(label);
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        labels[0] = !labels[0];
    }
    let weights = if seed % 4 < 2 {
        vec![1.0; n]
    } else {
        (0..n).map(|_| r.gen_range(0.5..2.0)).collect()
    };
    (rows, labels, weights)
}

fn svm_correctness() -> Verdict {
    let params = SvmParams::default();
    let tol = 1e-3;
    let mut violations = Vec::new();
    let mut worst_dual = 0.0f64;
    let mut points = 0;
    for seed in 0..50u64 {
        let (rows, labels, weights) = svm_dataset(seed);
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let kernel = KernelSpec::for_arity(rows[0].len());
        let model = train_rows(&refs, &labels, &weights, Vec::new(), &kernel, &params).expect("train");
        if !model.training.converged {
            violations.push(format!("dataset {seed} did not converge"));
        }
        worst_dual = worst_dual.max(model.coefficients.iter().sum::<f64>().abs());
        for i in 0..rows.len() {
            points += 1;
            let y = if labels[i] { 1.0 } else { -1.0 };
            let yf = y * model.decision_value(&rows[i]).expect("decision");
            let alpha = model.alpha_of(i);
            let c = params.cost * weights[i];
            let ok = if alpha == 0.0 {
                yf >= 1.0 - tol
            } else if alpha >= c * (1.0 - 1e-9) {
                yf <= 1.0 + tol
            } else {
                (yf - 1.0).abs() <= tol
            };
            if !ok {
                violations.push(format!("dataset {seed} point {i}: alpha {alpha:.4} C {c:.4} yf {yf:.5}"));
            }
        }
    }

    let xor: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]];
    let xor_labels = [false, false, true, true];
    let model = train_rows(&xor, &xor_labels, &[1.0; 4], Vec::new(), &KernelSpec::rbf(1.0).unwrap(), &params)
        .expect("xor");
    let xor_correct = xor
        .iter()
        .zip(xor_labels)
        .filter(|(x, l)| model.predict(x, 0.0).unwrap().is_positive() == *l)
        .count();
    worst_dual = worst_dual.max(model.coefficients.iter().sum::<f64>().abs());

    let pass = violations.is_empty() && xor_correct == 4 && worst_dual <= 1e-6;
    let mut detail = format!(
        "{points} points, {} KKT violations; XOR {xor_correct}/4; max |sum alpha*y| {worst_dual:.1e}",
        violations.len()
    );
    if !violations.is_empty() {
        detail.push_str(&format!("; first: {}", violations[0]));
    }
    verdict(pass, detail)
}

struct SeedRuns {
    runs: Vec<PairRun>,
    comparison: BaselineComparison,
}

fn synth_corpus() -> &'static [SeedRuns] {
    static CORPUS: OnceLock<Vec<SeedRuns>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let settings = ClassifySettings {
            mode: DatasetMode::Forward,
            ..Default::default()
        };
        (0..20)
            .map(|seed| {
                let cfg = SynthConfig {
                    seed,
                    node_count: 20,
                    version_count: 10,
                    p_triadic: 0.7,
                    ..Default::default()
                };
                let series = generate(&cfg).expect("synth");
                let runs = classify_eligible(&series, &PairFilterConfig::default(), &settings).expect("classify");
                let comparison = compare_with_metrics(&runs).expect("compare");
                SeedRuns { runs, comparison }
            })
            .collect()
    })
}

fn classifier_beats_metrics() -> Verdict {
    let corpus = synth_corpus();
    let wins = corpus
        .iter()
        .filter(|s| s.comparison.classifier_aupr > s.comparison.best_metric_aupr)
        .count();
    let k = corpus.len() as f64;
    let clf = corpus.iter().map(|s| s.comparison.classifier_aupr).sum::<f64>() / k;
    let best = corpus.iter().map(|s| s.comparison.best_metric_aupr).sum::<f64>() / k;
    verdict(
        wins * 10 >= corpus.len() * 7,
        format!(
            "classifier wins {wins}/{} seeds (need 70%); mean AUPR classifier {clf:.3}, best metric {best:.3}",
            corpus.len()
        ),
    )
}

fn weighted_gap() -> Verdict {
    let runs: Vec<&PairRun> = synth_corpus().iter().flat_map(|s| &s.runs).collect();
    let holds = runs
        .iter()
        .filter(|r| r.report.weighted_aupr >= r.report.positive_aupr)
        .count();
    let gap = runs
        .iter()
        .map(|r| r.report.weighted_aupr - r.report.positive_aupr)
        .sum::<f64>()
        / runs.len() as f64;
    verdict(
        holds == runs.len() && gap > 0.05,
        format!("weighted >= positive in {holds}/{} runs; mean gap {gap:.3}", runs.len()),
    )
}

fn forecast_sanity() -> Verdict {
    let settings = ForecastSettings::default();
    let (mut est, mut real, mut abs) = (0.0, 0.0, 0.0);
    for seed in 0..10 {
        let cfg = SynthConfig {
            seed,
            p_triadic: 1.0,
            ..Default::default()
        };
        let series = generate(&cfg).expect("synth");
        let outcome = forecast_pipeline(&series, 0..=2, 3, &settings).expect("forecast");
        est += outcome.estimated.positive_aupr / 10.0;
        real += outcome.real.positive_aupr / 10.0;
        abs += (outcome.estimated.positive_aupr - outcome.real.positive_aupr).abs() / 10.0;
    }
    verdict(
        abs <= 0.1,
        format!("window v1-v3 -> v4, mean AUPR forecast {est:.3}, real {real:.3}, mean |diff| {abs:.3}"),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_deplink"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn same_bytes(a: &Path, b: &Path) -> Result<bool, String> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    Ok(read(a)? == read(b)?)
}

fn determinism() -> Verdict {
    let run = || -> Result<Vec<String>, String> {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
        let mut differing = Vec::new();

        for dir in ["synth-a", "synth-b"] {
            cli(&["synth", "--seed", "4", "--output-dir", &d(dir)])?;
        }
        for entry in std::fs::read_dir(d("synth-a")).map_err(|e| e.to_string())? {
            let name = entry.map_err(|e| e.to_string())?.file_name();
            if !same_bytes(&tmp.path().join("synth-a").join(&name), &tmp.path().join("synth-b").join(&name))? {
                differing.push(format!("synth/{}", name.to_string_lossy()));
            }
        }

        let manifest = d("synth-a/manifest.json");
        for dir in ["classify-a", "classify-b"] {
            cli(&["classify", "--manifest", &manifest, "--mode", "forward", "--baselines", "--output-dir", &d(dir)])?;
        }

        cli(&["synth", "--seed", "4", "--p-triadic", "1", "--output-dir", &d("homophilous")])?;
        let manifest = d("homophilous/manifest.json");
        for dir in ["forecast-a", "forecast-b"] {
            cli(&["forecast", "--manifest", &manifest, "--window", "v1..v3", "--output-dir", &d(dir)])?;
        }

        for (a, b) in [("classify-a", "classify-b"), ("forecast-a", "forecast-b")] {
            for file in ["report.json", "pr_curve.csv"] {
                if !same_bytes(&tmp.path().join(a).join(file), &tmp.path().join(b).join(file))? {
                    differing.push(format!("{a}/{file}"));
                }
            }
        }
        Ok(differing)
    };
    match run() {
        Ok(differing) if differing.is_empty() => verdict(true, "synth, classify and forecast reruns are byte-identical"),
        Ok(differing) => verdict(false, format!("differing outputs: {}", differing.join(", "))),
        Err(e) => verdict(false, e),
    }
}

fn odem_ingestion() -> Verdict {
    let read = |name: &str| std::fs::read_to_string(fixture(name)).expect("fixture");
    let parsed = load_odem(&read("sample.odem")).expect("sample.odem");
    let expected = load_edge_list(&read("sample.expected.tsv")).expect("expected graph");
    let d = delta(&expected, &parsed);
    let graph_ok = d.is_empty();
    let (err_ok, err_text) = match load_odem(&read("malformed.odem")) {
        Ok(_) => (false, "malformed fixture parsed".to_string()),
        Err(e) => {
            let text = e.to_string();
            (text.contains("line 9"), text)
        }
    };
    verdict(
        graph_ok && err_ok,
        format!(
            "{} nodes, {} edges match: {graph_ok}; malformed: {err_text}",
            parsed.node_count(),
            parsed.edge_count()
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, Option<Duration>, fn() -> Verdict); 10] = [
        (1, "table fidelity", Some(Duration::from_secs(1)), table_fidelity),
        (2, "filter fidelity", Some(Duration::from_secs(1)), filter_fidelity),
        (3, "metric oracles", Some(Duration::from_secs(30)), metric_oracles),
        (4, "AUPR oracles", Some(Duration::from_secs(10)), aupr_oracles),
        (5, "SVM correctness", Some(Duration::from_secs(30)), svm_correctness),
        (6, "classifier vs metrics", Some(Duration::from_secs(60)), classifier_beats_metrics),
        (7, "weighted vs positive AUPR", None, weighted_gap),
        (8, "forecast sanity", Some(Duration::from_secs(60)), forecast_sanity),
        (9, "determinism", None, determinism),
        (10, "ODEM ingestion", None, odem_ingestion),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let v = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = match limit {
            Some(l) => format!(" of {} s", l.as_secs()),
            None => String::new(),
        };
        println!(
            "criterion {n:>2}: {} {name} ({:.2} s{budget}{}): {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" },
            v.detail
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
