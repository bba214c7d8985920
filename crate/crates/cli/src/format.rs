//! Text and CSV renderings of traces, models and run records.

use std::fmt::Write as _;

use havok_arc_core::detector::{DetectionReport, Verdict};
use havok_arc_core::feeder::{CurrentTrace, ScenarioSpec};
use havok_arc_core::havok::{ForcingSignal, HavokModel};

/// `%.9g`-style rendering: nine significant digits, trailing zeros removed,
/// scientific notation outside `[1e-4, 1e9)`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_else(|| "NA".into())
}

pub fn trace_csv(trace: &CurrentTrace) -> String {
    let mut out = String::from("time_s,current_ka\n");
    for (k, i) in trace.samples.iter().enumerate() {
        let _ = writeln!(out, "{},{}", sig9(trace.time(k)), sig9(*i));
    }
    out
}

pub fn forcing_csv(forcing: &ForcingSignal) -> String {
    let mut out = String::from("time_s,v_r\n");
    for (t, v) in forcing.times().zip(&forcing.values) {
        let _ = writeln!(out, "{},{}", sig9(t), sig9(*v));
    }
    out
}

pub fn model_report(model: &HavokModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rank {}", model.rank);
    let _ = writeln!(out, "residual {}", sig9(model.residual));
    let spectrum: Vec<String> = model.singular_values.iter().map(|s| sig9(*s)).collect();
    let _ = writeln!(out, "singular_values {}", spectrum.join(" "));
    let _ = writeln!(out, "A");
    for i in 0..model.a.rows() {
        let row: Vec<String> = (0..model.a.cols()).map(|j| sig9(model.a[(i, j)])).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
    let b: Vec<String> = model.b.iter().map(|x| sig9(*x)).collect();
    let _ = writeln!(out, "B {}", b.join(" "));
    out
}

/// Outcome of one scenario repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub scenario_id: String,
    pub seed: u64,
    pub spec: ScenarioSpec,
    pub report: DetectionReport,
    pub rank: usize,
    /// Verdict the case is expected to produce, when known.
    pub expected: Option<Verdict>,
}

pub fn report_line(r: &RunRecord) -> String {
    format!(
        "scenario={} run={} seed={} verdict={} peak={} deviation_time_s={} latency_ms={}",
        r.scenario_id,
        r.run_id,
        r.seed,
        r.report.verdict,
        opt(r.report.peak_forcing),
        opt(r.report.deviation_time),
        opt(r.report.latency.map(|l| l * 1e3)),
    )
}

const COLUMNS: [&str; 8] = [
    "case",
    "extent",
    "duration",
    "offset",
    "R_T",
    "peak forcing",
    "latency_ms",
    "verdict",
];

fn row(r: &RunRecord) -> [String; 8] {
    let arc = r.spec.arc;
    [
        r.run_id.clone(),
        opt(arc.map(|a| a.extent)),
        opt(arc.map(|a| a.duration)),
        opt(arc.map(|a| a.offset)),
        opt(arc.map(|a| a.grounding_resistance)),
        opt(r.report.peak_forcing),
        opt(r.report.latency.map(|l| l * 1e3)),
        r.report.verdict.to_string(),
    ]
}

/// Aligned plain-text table, one row per run.
pub fn summary_table(records: &[RunRecord]) -> String {
    let rows: Vec<[String; 8]> = records.iter().map(row).collect();
    let mut widths = COLUMNS.map(str::len);
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    out.push_str(&line(&COLUMNS));
    out.push('\n');
    for r in &rows {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        out.push_str(&line(&cells));
        out.push('\n');
    }
    out
}

/// CSV twin of [`summary_table`].
pub fn summary_csv(records: &[RunRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record(row(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
