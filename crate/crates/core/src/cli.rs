//! Command implementations behind the `coopsim` binary. Each command writes
//! its artifacts under an output directory and returns a short report for
//! stdout; failures map to process exit codes through [`CliError::exit_code`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scenario::{parse_scenario, preset_source, Override, ScenarioError};
use crate::sim::{
    complexity_probe, linear_fit, run, run_baseline, RunMetrics, ScenarioConfig, SweepAxis,
};

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "COOPSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "coopsim-out";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const ALL_TRIALS: &str = "All trials";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{source_name}: {error}")]
    Schema {
        source_name: String,
        error: ScenarioError,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for schema violations, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => CliError::Schema {
                source_name: "scenario".into(),
                error: c.into(),
            },
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub fn out_dir_from_env() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| DEFAULT_OUT_DIR.into())
}

/// Loads `scenario`, which is either a file path or a bundled preset name.
pub fn load_scenario(scenario: &str, overrides: &[Override]) -> Result<ScenarioConfig, CliError> {
    let path = Path::new(scenario);
    let src = if path.exists() {
        fs::read_to_string(path).map_err(|e| CliError::io(path, e))?
    } else if let Some(src) = preset_source(scenario) {
        src.to_owned()
    } else {
        return Err(CliError::Runtime(format!(
            "{scenario}: no such file or preset"
        )));
    };
    parse_scenario(&src, overrides).map_err(|error| CliError::Schema {
        source_name: scenario.to_owned(),
        error,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes `<run_id>.verdicts.csv` and `<run_id>.summary.json`.
pub fn write_run(metrics: &RunMetrics, out_dir: &Path) -> Result<[PathBuf; 2], CliError> {
    let id = &metrics.summary.run_id;
    let csv_path = out_dir.join(format!("{id}.verdicts.csv"));
    let mut buf = Vec::new();
    metrics
        .write_records_csv(&mut buf)
        .map_err(|e| CliError::io(&csv_path, e))?;
    write_file(&csv_path, &buf)?;
    let json_path = out_dir.join(format!("{id}.summary.json"));
    let mut json = metrics.summary_json();
    json.push('\n');
    write_file(&json_path, json.as_bytes())?;
    Ok([csv_path, json_path])
}

fn describe(m: &RunMetrics) -> String {
    let s = &m.summary;
    let acc = if s.accuracy_defined {
        format!("{:.4}", s.accuracy)
    } else {
        "undefined (no verdicts)".into()
    };
    format!(
        "{}: accuracy {acc}, {} verdicts over {} rounds, {} messages delivered, {} dropped",
        s.run_id, s.total_verdicts, s.rounds, s.messages.delivered, s.messages.dropped
    )
}

pub fn cmd_run(scenario: &str, overrides: &[Override], out_dir: &Path) -> Result<String, CliError> {
    let config = load_scenario(scenario, overrides)?;
    let metrics = run(&config)?;
    let files = write_run(&metrics, out_dir)?;
    let mut report = describe(&metrics);
    for f in files {
        let _ = write!(report, "\n  wrote {}", f.display());
    }
    Ok(report)
}

pub fn cmd_validate(
    scenario: &str,
    overrides: &[Override],
    canonical: bool,
) -> Result<String, CliError> {
    let config = load_scenario(scenario, overrides)?;
    if canonical {
        return Ok(config.to_toml());
    }
    Ok(format!(
        "{}: valid ({} locations, {} cavs, {} obstacles, mode {})",
        config.name,
        config.scene.locations.len(),
        config.scene.cavs.len(),
        config.scene.obstacles.len(),
        config.run.mode
    ))
}

/// One row of the comparison table. Accuracies are fractions in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub setup: String,
    pub collaborative_accuracy: f64,
    pub benchmark_accuracy: f64,
    pub difference: f64,
}

fn pooled(runs: &[&RunMetrics]) -> f64 {
    let total: u64 = runs.iter().map(|m| m.summary.total_verdicts).sum();
    let correct: u64 = runs.iter().map(|m| m.summary.correct_verdicts).sum();
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

fn row(setup: &str, collab: &[&RunMetrics], bench: &[&RunMetrics]) -> ComparisonRow {
    let (c, b) = (pooled(collab), pooled(bench));
    ComparisonRow {
        setup: setup.to_owned(),
        collaborative_accuracy: c,
        benchmark_accuracy: b,
        difference: c - b,
    }
}

/// Collaborative vs single-CAV runs on identical seeds for each scenario,
/// `seeds` consecutive seeds from each scenario's own. Accuracies pool all
/// verdicts of a setup; the last row pools every setup.
pub fn compare(
    scenarios: &[String],
    overrides: &[Override],
    seeds: u64,
) -> Result<(Vec<ComparisonRow>, Vec<RunMetrics>), CliError> {
    let mut rows = Vec::new();
    let mut all_runs = Vec::new();
    let mut pairs: Vec<(RunMetrics, RunMetrics)> = Vec::new();
    for scenario in scenarios {
        let base = load_scenario(scenario, overrides)?;
        let base = base.with_mode(base.run.mode.collaborative());
        let mut setup = Vec::new();
        for i in 0..seeds.max(1) {
            let mut c = base.clone();
            c.run.seed = base.run.seed.wrapping_add(i);
            setup.push((run(&c)?, run_baseline(&c)?));
        }
        let collab: Vec<&RunMetrics> = setup.iter().map(|p| &p.0).collect();
        let bench: Vec<&RunMetrics> = setup.iter().map(|p| &p.1).collect();
        rows.push(row(&base.name, &collab, &bench));
        pairs.extend(setup);
    }
    let collab: Vec<&RunMetrics> = pairs.iter().map(|p| &p.0).collect();
    let bench: Vec<&RunMetrics> = pairs.iter().map(|p| &p.1).collect();
    rows.push(row(ALL_TRIALS, &collab, &bench));
    for (c, b) in pairs {
        all_runs.push(c);
        all_runs.push(b);
    }
    Ok((rows, all_runs))
}

fn comparison_csv(rows: &[ComparisonRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "setup",
        "collaborative_accuracy",
        "benchmark_accuracy",
        "difference",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.setup.clone(),
            format!("{:.6}", r.collaborative_accuracy),
            format!("{:.6}", r.benchmark_accuracy),
            format!("{:.6}", r.difference),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn cmd_compare(
    scenarios: &[String],
    overrides: &[Override],
    seeds: u64,
    out_dir: &Path,
) -> Result<String, CliError> {
    let (rows, runs) = compare(scenarios, overrides, seeds)?;
    for m in &runs {
        write_run(m, out_dir)?;
    }
    let path = out_dir.join(COMPARISON_FILE);
    write_file(&path, &comparison_csv(&rows))?;
    let width = rows.iter().map(|r| r.setup.len()).max().unwrap_or(0).max(5);
    let mut out = format!(
        "{:<width$}  {:>13}  {:>13}  {:>10}\n",
        "setup", "collab (%)", "benchmark (%)", "diff (%)"
    );
    for r in &rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>13.1}  {:>13.1}  {:>+10.1}",
            r.setup,
            100.0 * r.collaborative_accuracy,
            100.0 * r.benchmark_accuracy,
            100.0 * r.difference
        );
    }
    let _ = write!(out, "wrote {}", path.display());
    Ok(out)
}

pub fn cmd_sweep(
    scenario: &str,
    overrides: &[Override],
    axis: &str,
    values: &[String],
    out_dir: &Path,
) -> Result<String, CliError> {
    let axis: SweepAxis =
        axis.parse()
            .map_err(|e: crate::error::ConfigError| CliError::Schema {
                source_name: "--axis".into(),
                error: e.into(),
            })?;
    let base = load_scenario(scenario, overrides)?;
    let runs = crate::sim::sweep(&base, axis, values)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        axis.name(),
        "run_id",
        "seed",
        "mode",
        "accuracy",
        "accuracy_defined",
        "total_verdicts",
        "rounds",
        "delivered",
        "dropped",
    ])
    .expect("in-memory write");
    for (v, m) in values.iter().zip(&runs) {
        write_run(m, out_dir)?;
        let s = &m.summary;
        w.write_record([
            v.trim().to_owned(),
            s.run_id.clone(),
            s.seed.to_string(),
            s.mode.clone(),
            format!("{:.6}", s.accuracy),
            s.accuracy_defined.to_string(),
            s.total_verdicts.to_string(),
            s.rounds.to_string(),
            s.messages.delivered.to_string(),
            s.messages.dropped.to_string(),
        ])
        .expect("in-memory write");
    }
    let table = w.into_inner().expect("in-memory flush");
    let path = out_dir.join(format!("sweep-{axis}.csv"));
    write_file(&path, &table)?;
    let mut out = String::from_utf8(table).expect("csv is utf-8");
    let _ = write!(out, "wrote {}", path.display());
    Ok(out)
}

pub fn cmd_probe(
    cav_counts: &[usize],
    object_counts: &[usize],
    out_dir: &Path,
) -> Result<String, CliError> {
    let rows = complexity_probe(cav_counts, object_counts);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cavs", "objects", "work", "pace_ops", "vote_ops"])
        .expect("in-memory write");
    for r in &rows {
        w.write_record(
            [
                r.cavs,
                r.objects,
                r.work(),
                r.pace_ops as usize,
                r.vote_ops as usize,
            ]
            .map(|n| n.to_string()),
        )
        .expect("in-memory write");
    }
    let path = out_dir.join("complexity.csv");
    write_file(&path, &w.into_inner().expect("in-memory flush"))?;
    let xs: Vec<f64> = rows.iter().map(|r| r.work() as f64).collect();
    let mut out = String::new();
    for (name, ys) in [
        (
            "pace",
            rows.iter().map(|r| r.pace_ops as f64).collect::<Vec<_>>(),
        ),
        ("vote", rows.iter().map(|r| r.vote_ops as f64).collect()),
    ] {
        let f = linear_fit(&xs, &ys);
        let _ = writeln!(
            out,
            "{name}: ops = {:.3} * |V||Omega| + {:.3}  (R^2 = {:.6})",
            f.slope, f.intercept, f.r2
        );
    }
    let _ = write!(out, "wrote {}", path.display());
    Ok(out)
}

/// Reads a comparison table back.
pub fn read_comparison(path: &Path) -> Result<Vec<ComparisonRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::io(path, e))
}

/// From a comparison table, writes `plot-collaborative.csv` and
/// `plot-benchmark.csv`, each a `(setup, accuracy)` series.
pub fn cmd_plotdata(metrics_path: &Path, out_dir: &Path) -> Result<String, CliError> {
    let rows = read_comparison(metrics_path)?;
    if rows.is_empty() {
        return Err(CliError::Runtime(format!(
            "{}: no comparison rows",
            metrics_path.display()
        )));
    }
    let mut out = String::new();
    for (series, pick) in [
        (
            "collaborative",
            (|r: &ComparisonRow| r.collaborative_accuracy) as fn(&ComparisonRow) -> f64,
        ),
        ("benchmark", |r: &ComparisonRow| r.benchmark_accuracy),
    ] {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["setup", "accuracy"])
            .expect("in-memory write");
        for r in &rows {
            w.write_record([r.setup.clone(), format!("{:.6}", pick(r))])
                .expect("in-memory write");
        }
        let path = out_dir.join(format!("plot-{series}.csv"));
        write_file(&path, &w.into_inner().expect("in-memory flush"))?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(out.trim_end().to_owned())
}
