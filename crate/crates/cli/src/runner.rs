//! Job expansion, parallel execution and artifact output.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use havok_arc_core::detector::{batch_evaluate, DetectionThresholds, Verdict};
use havok_arc_core::feeder::{FeederConfig, ScenarioSpec};
use havok_arc_core::pipeline::{run_scenario, PipelineRun, BENCHMARK_CASES};
use rayon::prelude::*;

use crate::config::RunManifest;
use crate::error::CliError;
use crate::format::{
    forcing_csv, model_report, report_line, sig9, summary_csv, summary_table, trace_csv, RunRecord,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub run_id: String,
    pub scenario_id: String,
    pub seed: u64,
    pub spec: ScenarioSpec,
    pub expected: Option<Verdict>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub feeder: FeederConfig,
    pub q: usize,
    pub thresholds: DetectionThresholds,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            feeder: FeederConfig::default(),
            q: havok_arc_core::havok::DEFAULT_EMBEDDING,
            thresholds: DetectionThresholds::default(),
        }
    }
}

fn run_id(id: &str, rep: usize, reps: usize) -> String {
    if reps == 1 {
        id.to_string()
    } else {
        format!("{id}_r{:0width$}", rep + 1, width = reps.to_string().len())
    }
}

/// Scenario × repetition jobs; repetition `k` uses seed `seed + k`.
pub fn manifest_jobs(manifest: &RunManifest) -> Vec<Job> {
    let reps = manifest.repetitions;
    manifest
        .scenarios
        .iter()
        .flat_map(|s| {
            (0..reps).map(move |k| Job {
                run_id: run_id(&s.id, k, reps),
                scenario_id: s.id.clone(),
                seed: s.seed.wrapping_add(k as u64),
                spec: s.spec,
                expected: None,
            })
        })
        .collect()
}

/// The built-in reference cases, `reps` times each.
pub fn benchmark_jobs(reps: usize, seed: u64) -> Vec<Job> {
    BENCHMARK_CASES
        .iter()
        .flat_map(|c| {
            (0..reps).map(move |k| Job {
                run_id: run_id(c.id, k, reps),
                scenario_id: c.id.to_string(),
                seed: seed.wrapping_add(k as u64),
                spec: c.scenario,
                expected: Some(c.expected),
            })
        })
        .collect()
}

/// Creates `dir` and checks that a file can be written there.
pub fn prepare_output_dir(dir: &Path) -> Result<(), CliError> {
    let fail = |source| CliError::OutputDir {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".write_probe");
    fs::File::create(&probe).and_then(|mut f| f.write_all(b"")).map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn file_stem(run_id: &str) -> String {
    run_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_run_artifacts(dir: &Path, job: &Job, run: &PipelineRun) -> Result<(), CliError> {
    let stem = file_stem(&job.run_id);
    write_atomic(&dir.join(format!("{stem}_trace.csv")), &trace_csv(&run.simulation.trace))?;
    write_atomic(&dir.join(format!("{stem}_forcing.csv")), &forcing_csv(&run.forcing))?;
    write_atomic(&dir.join(format!("{stem}_model.txt")), &model_report(&run.model))
}

/// Runs every job, in parallel, returning records in job order. When
/// `artifacts` is given, per-run CSVs and model reports are written there.
pub fn execute(
    jobs: &[Job],
    options: &RunOptions,
    artifacts: Option<&Path>,
) -> Result<Vec<RunRecord>, CliError> {
    let results: Vec<Result<RunRecord, CliError>> = jobs
        .par_iter()
        .map(|job| {
            let run = run_scenario(&options.feeder, &job.spec, job.seed, options.q, &options.thresholds)
                .map_err(|error| CliError::Pipeline {
                    id: job.run_id.clone(),
                    error,
                })?;
            if let Some(dir) = artifacts {
                write_run_artifacts(dir, job, &run)?;
            }
            Ok(RunRecord {
                run_id: job.run_id.clone(),
                scenario_id: job.scenario_id.clone(),
                seed: job.seed,
                spec: job.spec,
                report: run.report,
                rank: run.model.rank,
                expected: job.expected,
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Per-scenario accuracy as CSV.
pub fn accuracy_csv(records: &[RunRecord]) -> String {
    let mut ids: Vec<&str> = Vec::new();
    for r in records {
        if !ids.contains(&r.scenario_id.as_str()) {
            ids.push(&r.scenario_id);
        }
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "case",
        "runs",
        "expected",
        "matches",
        "arc_fault_rate",
        "mean_latency_ms",
        "max_latency_ms",
    ])
    .expect("in-memory write");
    let ms = |x: Option<f64>| x.map(|v| sig9(v * 1e3)).unwrap_or_else(|| "NA".into());
    for id in ids {
        let group: Vec<&RunRecord> = records.iter().filter(|r| r.scenario_id == id).collect();
        let reports: Vec<_> = group.iter().map(|r| r.report).collect();
        let stats = &batch_evaluate(&reports).scenarios[0];
        let expected = group[0].expected;
        let matches = expected
            .map(|e| group.iter().filter(|r| r.report.verdict == e).count().to_string())
            .unwrap_or_else(|| "NA".into());
        w.write_record([
            id.to_string(),
            group.len().to_string(),
            expected.map(|e| e.to_string()).unwrap_or_else(|| "NA".into()),
            matches,
            sig9(stats.detection_rate),
            ms(stats.mean_latency),
            ms(stats.max_latency),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Writes `reports.txt`, `summary.txt`, `summary.csv` and `accuracy.csv`.
pub fn write_summaries(dir: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    let mut lines = String::new();
    for r in records {
        lines.push_str(&report_line(r));
        lines.push('\n');
    }
    write_atomic(&dir.join("reports.txt"), &lines)?;
    write_atomic(&dir.join("summary.txt"), &summary_table(records))?;
    write_atomic(&dir.join("summary.csv"), &summary_csv(records))?;
    write_atomic(&dir.join("accuracy.csv"), &accuracy_csv(records))
}
