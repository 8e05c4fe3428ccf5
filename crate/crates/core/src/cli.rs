//! Command-line front end.
//!
//! Settings resolve in three layers: built-in defaults, then the JSON file
//! given by `--config`, then explicit flags. Exit codes: 0 on success
//! (including `--help`), 1 on usage or configuration errors, 2 on data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::classifier::KernelSpec;
use crate::config::RunConfig;
use crate::dataset::{build_test_set, DatasetMode, ImbalanceStrategy};
use crate::error::{Error, Result};
use crate::eval::{evaluate, write_text, EvalReport, PrecisionAtN, Provenance, ReportFile, REPORT_FILE};
use crate::forecast::{forecast_pipeline, write_forecasts, ForecastMethod};
use crate::graph::{delta, filter_version_pairs, load_series, version_stats, PairSummary, VersionSeries};
use crate::metrics::{MetricId, NeighborhoodMode};
use crate::pipeline::{classify_eligible, classify_pair, metric_reports, PairRun};
use crate::ranking::{evaluate_ranking, rank_for_node, NodeRanking};
use crate::synth::{generate, write_series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub const RANKINGS_FILE: &str = "rankings.csv";
pub const FORECASTS_FILE: &str = "forecasts.csv";

#[derive(Debug, Parser)]
#[command(name = "deplink", version, about = "Predict new dependencies between software modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Version series manifest (JSON array of {label, path, format}).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Run configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json, pr_curve.csv, rankings.csv, forecasts.csv.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Neighbourhood used by the overlap metrics.
    #[arg(long)]
    neighborhood: Option<NeighborhoodMode>,
    /// Add the same-community flag as a tenth feature.
    #[arg(long)]
    community: bool,
}

#[derive(Debug, Args)]
struct Learner {
    /// as_paper or forward.
    #[arg(long)]
    mode: Option<DatasetMode>,
    /// class-weights, none or undersample:<ratio>[:<seed>].
    #[arg(long)]
    imbalance: Option<ImbalanceStrategy>,
    #[arg(long)]
    cost: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Seed of the SMO second-choice fallback.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-version package, dependency and sparsity table.
    Stats {
        #[command(flatten)]
        common: Common,
    },
    /// Dependencies added and removed between two versions.
    Delta {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Consecutive version pairs worth predicting.
    Filter {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_node_growth: Option<f64>,
        #[arg(long)]
        min_added: Option<usize>,
        #[arg(long)]
        require_class_growth: bool,
    },
    /// Top-N similarity ranking of candidate dependencies per module.
    Rank {
        #[command(flatten)]
        common: Common,
        /// Version to rank.
        #[arg(long)]
        version: String,
        /// Later version used to score the rankings.
        #[arg(long)]
        next: Option<String>,
        #[arg(long, default_value = "adamic-adar")]
        metric: MetricId,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Train on one version, score candidate pairs of the next.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        learner: Learner,
        /// Training version; without --train/--test every eligible pair is run.
        #[arg(long, requires = "test")]
        train: Option<String>,
        #[arg(long, requires = "train")]
        test: Option<String>,
        /// Also report each metric used directly as a score.
        #[arg(long)]
        baselines: bool,
    },
    /// Forecast next-version features over a window, then classify.
    Forecast {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        learner: Learner,
        /// Window as `<first>..<last>`, e.g. v1..v3.
        #[arg(long)]
        window: String,
        /// Version supplying labels; defaults to the one after the window.
        #[arg(long)]
        test: Option<String>,
        /// linear_ls, naive or exp:<alpha>.
        #[arg(long)]
        method: Option<ForecastMethod>,
    },
    /// Generate a synthetic version series.
    Synth {
        #[arg(long)]
        output_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        versions: Option<usize>,
        #[arg(long)]
        edges_per_version: Option<usize>,
        #[arg(long)]
        p_triadic: Option<f64>,
        #[arg(long)]
        initial_edge_fraction: Option<f64>,
    },
    /// Merge report.json files.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

/// Runs the command line against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidModuleId(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.manifest {
        cfg.manifest = Some(m.clone());
    }
    if let Some(o) = &common.output_dir {
        cfg.output_dir = Some(o.clone());
    }
    if let Some(n) = common.neighborhood {
        cfg.metrics.mode = n;
    }
    if common.community {
        cfg.metrics.include_community_feature = true;
    }
    Ok(cfg)
}

fn apply_learner(cfg: &mut RunConfig, l: &Learner) -> Result<()> {
    if let Some(m) = l.mode {
        cfg.mode = m;
    }
    if let Some(s) = l.imbalance {
        cfg.strategy = s;
    }
    if let Some(c) = l.cost {
        cfg.svm.cost = c;
    }
    if let Some(g) = l.gamma {
        cfg.kernel = Some(KernelSpec::rbf(g)?);
    }
    if let Some(s) = l.seed {
        cfg.svm.seed = s;
    }
    Ok(())
}

fn load(cfg: &RunConfig) -> Result<VersionSeries> {
    cfg.validate()?;
    let path = cfg
        .manifest
        .as_ref()
        .ok_or_else(|| Error::Config("--manifest is required".into()))?;
    let series = load_series(path)?;
    if series.is_empty() {
        return Err(Error::Data(format!("{} lists no versions", path.display())));
    }
    Ok(series)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Data(format!("CSV buffer: {}", e.error())))
}

/// Writes to `dir/file` when an output directory is set, otherwise to `out`.
fn emit(out: &mut dyn Write, dir: Option<&Path>, file: &str, bytes: &[u8]) -> Result<()> {
    match dir {
        Some(d) => write_text(&d.join(file), &String::from_utf8_lossy(bytes)),
        None => out.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn emit_report(out: &mut dyn Write, cfg: &RunConfig, report: &ReportFile) -> Result<()> {
    match &cfg.output_dir {
        Some(d) => report.write(d).map(|_| ()),
        None => emit(out, None, REPORT_FILE, report.to_json()?.as_bytes()),
    }
}

#[derive(Serialize)]
struct DeltaRow<'a> {
    change: &'a str,
    source: String,
    target: String,
}

#[derive(Serialize)]
struct FilterRow<'a> {
    from: &'a str,
    to: &'a str,
    nodes_before: usize,
    added_nodes: usize,
    added_shared_edges: usize,
    node_growth: f64,
}

#[derive(Serialize)]
struct RankRow {
    source: String,
    rank: usize,
    target: String,
    score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    hit: Option<bool>,
}

fn rank_rows(rankings: &[NodeRanking], hit: impl Fn(&NodeRanking, usize) -> Option<bool>) -> Vec<RankRow> {
    rankings
        .iter()
        .flat_map(|r| {
            r.entries.iter().enumerate().map(|(k, e)| RankRow {
                source: r.source.to_string(),
                rank: k + 1,
                target: e.target.to_string(),
                score: e.score,
                hit: hit(r, k),
            })
        })
        .collect()
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Stats { common } => {
            let cfg = resolve(&common)?;
            let series = load(&cfg)?;
            let rows = version_stats(&series);
            emit(out, cfg.output_dir.as_deref(), "stats.csv", &csv_bytes(&rows)?)
        }
        Command::Delta { common, from, to } => {
            let cfg = resolve(&common)?;
            let series = load(&cfg)?;
            let a = series.snapshots()[series.require(&from)?].graph();
            let b = series.snapshots()[series.require(&to)?].graph();
            let d = delta(a, b);
            let mut rows: Vec<DeltaRow> = Vec::new();
            for (change, set) in [("added", &d.added_edges), ("removed", &d.removed_edges)] {
                rows.extend(set.iter().map(|(s, t)| DeltaRow {
                    change,
                    source: s.to_string(),
                    target: t.to_string(),
                }));
            }
            for (change, set) in [("added_node", &d.added_nodes), ("removed_node", &d.removed_nodes)] {
                rows.extend(set.iter().map(|n| DeltaRow {
                    change,
                    source: n.to_string(),
                    target: String::new(),
                }));
            }
            emit(out, cfg.output_dir.as_deref(), "delta.csv", &csv_bytes(&rows)?)
        }
        Command::Filter {
            common,
            max_node_growth,
            min_added,
            require_class_growth,
        } => {
            let mut cfg = resolve(&common)?;
            if let Some(g) = max_node_growth {
                cfg.filter.max_node_growth_fraction = g;
            }
            if let Some(m) = min_added {
                cfg.filter.min_added_edges = m;
            }
            cfg.filter.require_class_growth |= require_class_growth;
            let series = load(&cfg)?;
            let snaps = series.snapshots();
            let rows: Vec<FilterRow> = filter_version_pairs(&series, &cfg.filter)?
                .into_iter()
                .map(|(a, b)| {
                    let s = PairSummary::between(&snaps[a], &snaps[b]);
                    FilterRow {
                        from: snaps[a].label(),
                        to: snaps[b].label(),
                        nodes_before: s.nodes_before,
                        added_nodes: s.added_nodes,
                        added_shared_edges: s.added_shared_edges,
                        node_growth: s.node_growth(),
                    }
                })
                .collect();
            emit(out, cfg.output_dir.as_deref(), "filter.csv", &csv_bytes(&rows)?)
        }
        Command::Rank {
            common,
            version,
            next,
            metric,
            top,
        } => {
            let mut cfg = resolve(&common)?;
            if let Some(n) = top {
                cfg.top_n = n;
            }
            let series = load(&cfg)?;
            let vi = series.require(&version)?;
            let g = series.snapshots()[vi].graph();
            let dir = cfg.output_dir.clone();
            match next {
                None => {
                    let rankings = g
                        .nodes()
                        .iter()
                        .map(|m| rank_for_node(g, m.as_str(), metric, &cfg.metrics, cfg.top_n))
                        .collect::<Result<Vec<_>>>()?;
                    let rows = rank_rows(&rankings, |_, _| None);
                    emit(out, dir.as_deref(), RANKINGS_FILE, &csv_bytes(&rows)?)
                }
                Some(next) => {
                    let ni = series.require(&next)?;
                    let g_next = series.snapshots()[ni].graph();
                    let ev = evaluate_ranking(g, g_next, metric, &cfg.metrics, cfg.top_n)?;
                    let rows = rank_rows(&ev.rankings, |r, k| Some(ev.is_hit(&r.source, &r.entries[k].target)));
                    emit(out, dir.as_deref(), RANKINGS_FILE, &csv_bytes(&rows)?)?;
                    if dir.is_some() {
                        let mut report = ReportFile::new(cfg.provenance_json()?);
                        report.rows.push(ranking_report_row(&series, vi, ni, metric, &cfg)?);
                        emit_report(out, &cfg, &report)?;
                    }
                    Ok(())
                }
            }
        }
        Command::Classify {
            common,
            learner,
            train,
            test,
            baselines,
        } => {
            let mut cfg = resolve(&common)?;
            apply_learner(&mut cfg, &learner)?;
            let series = load(&cfg)?;
            let settings = cfg.classify_settings();
            let runs: Vec<PairRun> = match (train, test) {
                (Some(a), Some(b)) => vec![classify_pair(&series, series.require(&a)?, series.require(&b)?, &settings)?],
                _ => classify_eligible(&series, &cfg.filter, &settings)?,
            };
            let mut report = ReportFile::new(cfg.provenance_json()?);
            for run in &runs {
                report.rows.push(run.report.clone());
            }
            if baselines {
                for run in &runs {
                    let p = &run.report.provenance;
                    report.rows.extend(metric_reports(&run.test_set, &p.train, &p.test)?);
                }
            }
            emit_report(out, &cfg, &report)
        }
        Command::Forecast {
            common,
            learner,
            window,
            test,
            method,
        } => {
            let mut cfg = resolve(&common)?;
            apply_learner(&mut cfg, &learner)?;
            if let Some(m) = method {
                cfg.forecast = m;
            }
            let series = load(&cfg)?;
            let (first, last) = window
                .split_once("..")
                .ok_or_else(|| Error::Config(format!("window {window:?} is not <first>..<last>")))?;
            let (a, b) = (series.require(first)?, series.require(last)?);
            let t = match test {
                Some(t) => series.require(&t)?,
                None => b + 1,
            };
            let outcome = forecast_pipeline(&series, a..=b, t, &cfg.forecast_settings())?;
            let mut report = ReportFile::new(cfg.provenance_json()?);
            report.rows.push(outcome.estimated);
            report.rows.push(outcome.real);
            if let Some(d) = &cfg.output_dir {
                report.write(d)?;
                write_forecasts(&d.join(FORECASTS_FILE), &cfg.metrics.feature_names(), &outcome.rows)?;
                Ok(())
            } else {
                emit_report(out, &cfg, &report)
            }
        }
        Command::Synth {
            output_dir,
            config,
            seed,
            nodes,
            versions,
            edges_per_version,
            p_triadic,
            initial_edge_fraction,
        } => {
            let mut synth = match &config {
                Some(p) => RunConfig::load(p)?.synth,
                None => RunConfig::default().synth,
            };
            if let Some(v) = seed {
                synth.seed = v;
            }
            if let Some(v) = nodes {
                synth.node_count = v;
            }
            if let Some(v) = versions {
                synth.version_count = v;
            }
            if let Some(v) = edges_per_version {
                synth.edges_per_version = v;
            }
            if let Some(v) = p_triadic {
                synth.p_triadic = v;
            }
            if let Some(v) = initial_edge_fraction {
                synth.initial_edge_fraction = v;
            }
            let series = generate(&synth)?;
            let manifest = write_series(&series, &output_dir)?;
            writeln!(out, "{}", manifest.display()).map_err(|e| Error::io("<stdout>", e))
        }
        Command::Report { inputs, output_dir } => {
            let files = inputs
                .iter()
                .map(|p| ReportFile::read(p))
                .collect::<Result<Vec<_>>>()?;
            let merged = ReportFile::merge(&files)?;
            let cfg = RunConfig {
                output_dir,
                ..Default::default()
            };
            emit_report(out, &cfg, &merged)
        }
    }
}

/// Report row of one metric used as a score over the forward candidates of
/// `version`, with the per-module precision@N of its rankings.
pub fn ranking_report_row(
    series: &VersionSeries,
    version: usize,
    next: usize,
    metric: MetricId,
    cfg: &RunConfig,
) -> Result<EvalReport> {
    let g = series.snapshots()[version].graph();
    let g_next = series.snapshots()[next].graph();
    let ev = evaluate_ranking(g, g_next, metric, &cfg.metrics, cfg.top_n)?;
    let set = build_test_set(g, g_next, &cfg.metrics, DatasetMode::Forward)?;
    let scores: Vec<f64> = set.instances.iter().map(|i| i.features.get(metric)).collect();
    let prov = Provenance::new("ranking", series.snapshots()[version].label(), series.snapshots()[next].label())
        .with_mode(DatasetMode::Forward)
        .with_detail(metric.name());
    let mut row = evaluate(&scores, &set.labels(), prov, None)?;
    row.precision_at_n = Some(PrecisionAtN {
        n: cfg.top_n,
        value: ev.micro_precision,
    });
    Ok(row)
}
