use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use jsloss::data::{NoiseReport, NoiseSpec, SplitTag};
use jsloss::par::{map_indices, Exec};
use jsloss::train::{train_loop_with, MetricsRecord, TrainConfig};
use jsloss::verify::{run_suites, Suite, VerifyOptions, VerifyReport};
use jsloss::{LossKind, ZMode};
use serde::Serialize;

use crate::config::{Axis, ExperimentConfig, Seeds};
use crate::error::{CliError, Result};

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSONL: &str = "metrics.jsonl";
pub const MANIFEST: &str = "manifest.json";
pub const RESOLVED_CONFIG: &str = "config.toml";
pub const SWEEP_SUMMARY: &str = "summary.csv";

pub struct VerifyArgs {
    pub selector: String,
    pub seed: u64,
    pub exec: Exec,
    pub fault_z: Option<f64>,
    pub report: Option<PathBuf>,
}

pub fn verify(args: &VerifyArgs) -> Result<VerifyReport> {
    let suites = Suite::parse_selector(&args.selector).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(z) = args.fault_z {
        if !(z.is_finite() && z > 0.0) {
            return Err(CliError::Config(format!("--fault-z {z} must be positive")));
        }
    }
    let opts = VerifyOptions { seed: args.seed, exec: args.exec, z_override: args.fault_z.map(ZMode::Fixed) };
    let report = run_suites(&suites, &opts)?;
    for s in &report.suites {
        println!("{} {} ({:.2}s)", if s.passed { "PASS" } else { "FAIL" }, s.suite.name(), s.seconds);
        for c in &s.claims {
            println!(
                "  {} {:<36} worst {:.3e} tol {:.1e}  {}",
                if c.passed { "ok " } else { "BAD" },
                c.name,
                c.worst_violation,
                c.tolerance,
                c.detail
            );
        }
    }
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    let failing = report.failing_claims();
    if !failing.is_empty() {
        for c in &failing {
            eprintln!("failed: {} ({})", c.name, c.description);
        }
        return Err(CliError::Tolerance(failing.len()));
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
struct CsvRow {
    epoch: usize,
    train_loss: f64,
    train_acc_noisy: f64,
    train_acc_clean: f64,
    val_acc: f64,
    consistency: f64,
    seconds: f64,
}

impl From<&MetricsRecord> for CsvRow {
    fn from(m: &MetricsRecord) -> Self {
        CsvRow {
            epoch: m.epoch,
            train_loss: m.train_loss,
            train_acc_noisy: m.train_acc_noisy,
            train_acc_clean: m.train_acc_clean,
            val_acc: m.val_acc,
            consistency: m.consistency,
            seconds: m.seconds,
        }
    }
}

#[derive(Debug, Serialize)]
struct RowCounts {
    train: usize,
    val: usize,
    test: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    version: &'static str,
    config: &'a ExperimentConfig,
    seeds: Seeds,
    dataset: String,
    rows: RowCounts,
    noise: NoiseSpec,
    noise_report: &'a NoiseReport,
    train: &'a TrainConfig,
    metrics: [&'static str; 2],
    last_epoch: Option<&'a MetricsRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub metrics: Vec<MetricsRecord>,
    pub noise: NoiseReport,
}

impl RunSummary {
    pub fn final_val(&self) -> Option<f64> {
        self.metrics.last().map(|m| m.val_acc)
    }

    pub fn best_val(&self) -> Option<f64> {
        self.metrics.iter().map(|m| m.val_acc).reduce(f64::max)
    }
}

/// Trains one configuration and writes metrics, the resolved config and a manifest into `cfg.output_dir`.
pub fn train(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let cfg = &cfg.resolved()?;
    let tc = cfg.train_config()?;
    let (ds, noise) = cfg.build_dataset()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_text(&dir.join(RESOLVED_CONFIG), &cfg.to_toml())?;

    let csv_path = dir.join(METRICS_CSV);
    let jsonl_path = dir.join(METRICS_JSONL);
    let mut csv = csv::Writer::from_writer(create(&csv_path)?);
    let mut jsonl = BufWriter::new(create(&jsonl_path)?);
    let wall = cfg.record_wall_time;
    let outcome = train_loop_with(&ds, &tc, |m| {
        let m = MetricsRecord { seconds: if wall { m.seconds } else { 0.0 }, ..m.clone() };
        csv.serialize(CsvRow::from(&m)).map_err(|e| jsloss::Error::Io(e.to_string()))?;
        csv.flush()?;
        serde_json::to_writer(&mut jsonl, &m)?;
        jsonl.write_all(b"\n")?;
        jsonl.flush()?;
        Ok(())
    })?;
    if outcome.metrics.is_empty() {
        // Keep the header so consumers see the schema.
        csv.write_record(["epoch", "train_loss", "train_acc_noisy", "train_acc_clean", "val_acc", "consistency", "seconds"])?;
    }
    csv.flush().map_err(|e| CliError::io(&csv_path, e))?;
    let metrics: Vec<MetricsRecord> =
        outcome.metrics.iter().map(|m| MetricsRecord { seconds: if wall { m.seconds } else { 0.0 }, ..m.clone() }).collect();

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        seeds: cfg.seeds(),
        dataset: ds.provenance.source.clone(),
        rows: RowCounts {
            train: ds.rows_with(SplitTag::Train).len(),
            val: ds.rows_with(SplitTag::Val).len(),
            test: ds.rows_with(SplitTag::Test).len(),
        },
        noise: cfg.noise_spec()?,
        noise_report: &noise,
        train: &tc,
        metrics: [METRICS_CSV, METRICS_JSONL],
        last_epoch: metrics.last(),
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(RunSummary { dir: dir.clone(), metrics, noise })
}

pub fn noise_inspect(cfg: &ExperimentConfig, json: bool) -> Result<NoiseReport> {
    let (ds, report) = cfg.build_dataset()?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(jsloss::Error::from)?);
        return Ok(report);
    }
    let spec = cfg.noise_spec()?;
    println!("dataset        {}", ds.provenance.source);
    println!("noise          {:?} eta = {} seed = {}", spec.kind, spec.eta, spec.seed);
    println!("train rows     {}", report.rows_considered);
    println!("changed        {} ({:.4}, expected {:.4})", report.changed, report.changed_fraction, report.expected_fraction);
    println!("confusion (rows: clean label, columns: observed label)");
    for (i, row) in report.confusion.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>6}")).collect();
        println!("  {i:>3} {}", cells.join(""));
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    axis: String,
    value: f64,
    final_val_acc: Option<f64>,
    best_val_acc: Option<f64>,
    final_test_acc: Option<f64>,
    best_test_acc: Option<f64>,
    final_train_loss: Option<f64>,
    run_dir: String,
}

/// One config per value, with the swept field replaced. Fails before any training on an invalid value.
pub fn sweep_points(cfg: &ExperimentConfig, axis: Axis, values: &[f64]) -> Result<Vec<ExperimentConfig>> {
    if values.is_empty() {
        return Err(CliError::Config("sweep.values is empty".into()));
    }
    let kind = cfg.loss.kind;
    match axis {
        Axis::Pi1 if !kind.is_js_family() => return Err(CliError::Config(format!("a pi1 sweep needs a JS-family loss, not {kind}"))),
        Axis::M if !matches!(kind, LossKind::Gjs | LossKind::JsOnMean) => {
            return Err(CliError::Config(format!("an M sweep needs gjs or js-on-mean, not {kind}")))
        }
        _ => {}
    }
    let mut points = Vec::with_capacity(values.len());
    for &v in values {
        let mut p = cfg.clone();
        match axis {
            Axis::Pi1 => p.loss.pi1 = v,
            Axis::M => {
                if v.fract() != 0.0 || v < 2.0 {
                    return Err(CliError::Config(format!("sweep value M = {v} is not an integer >= 2")));
                }
                p.loss.m = v as usize;
                if let Some(k) = cfg.num_classes() {
                    if p.loss.m > k + 1 {
                        eprintln!("warning: M = {} exceeds K + 1 = {}; the bound constants do not apply, training proceeds", p.loss.m, k + 1);
                    }
                }
            }
            Axis::Eta => {
                if !(0.0..1.0).contains(&v) {
                    return Err(CliError::Config(format!("sweep value eta = {v} outside [0, 1)")));
                }
                p.noise.eta = v;
            }
            Axis::Jitter => p.views.jitter_sigma = v,
        }
        p.output_dir = cfg.output_dir.join(format!("{axis}-{v}"));
        p.sweep = None;
        p.train_config()?;
        p.noise_spec()?;
        points.push(p);
    }
    Ok(points)
}

/// Runs every point (in parallel, each in reference mode) and writes `summary.csv`.
pub fn sweep(cfg: &ExperimentConfig, axis: Axis, values: &[f64]) -> Result<Vec<RunSummary>> {
    let points = sweep_points(cfg, axis, values)?;
    let runs = map_indices(Exec::Parallel, points.len(), |i| train(&points[i]));
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    let path = cfg.output_dir.join(SWEEP_SUMMARY);
    let mut w = csv::Writer::from_writer(create(&path)?);
    for (&v, r) in values.iter().zip(&runs) {
        let test: Vec<f64> = r.metrics.iter().filter_map(|m| m.test_acc).collect();
        w.serialize(SweepRow {
            axis: axis.to_string(),
            value: v,
            final_val_acc: r.final_val(),
            best_val_acc: r.best_val(),
            final_test_acc: test.last().copied(),
            best_test_acc: test.iter().copied().reduce(f64::max),
            final_train_loss: r.metrics.last().map(|m| m.train_loss),
            run_dir: r.dir.display().to_string(),
        })?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    for (&v, r) in values.iter().zip(&runs) {
        println!("{axis} = {v}: final val {:.4}, best val {:.4}", r.final_val().unwrap_or(f64::NAN), r.best_val().unwrap_or(f64::NAN));
    }
    Ok(runs)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(jsloss::Error::from)?;
    write_text(path, &(text + "\n"))
}
