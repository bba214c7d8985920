//! Burst detection and band classification of the forcing signal.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::feeder::ScenarioKind;
use crate::havok::ForcingSignal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionThresholds {
    pub nonarc_max: f64,
    pub arc_min: f64,
    pub arc_max: f64,
    pub other_min: f64,
    /// Quiescent span `[baseline_start, baseline_end]`, s.
    pub baseline_start: f64,
    pub baseline_end: f64,
    pub deviation_factor: f64,
    /// Length of the span after the deviation searched for the peak, s.
    pub peak_window: f64,
}

impl Default for DetectionThresholds {
    fn default() -> Self {
        Self {
            nonarc_max: 0.045,
            arc_min: 0.06,
            arc_max: 0.18,
            other_min: 0.2,
            baseline_start: 0.0,
            baseline_end: 0.15,
            deviation_factor: 5.0,
            peak_window: 0.1,
        }
    }
}

impl DetectionThresholds {
    pub fn with_bands(nonarc_max: f64, arc_min: f64, arc_max: f64, other_min: f64) -> Result<Self> {
        let t = Self {
            nonarc_max,
            arc_min,
            arc_max,
            other_min,
            ..Self::default()
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = 0.0 < self.nonarc_max
            && self.nonarc_max < self.arc_min
            && self.arc_min < self.arc_max
            && self.arc_max < self.other_min
            && self.other_min.is_finite();
        if !ordered {
            return Err(invalid("bands must satisfy 0 < nonarc_max < arc_min < arc_max < other_min"));
        }
        if !(self.baseline_start <= self.baseline_end) {
            return Err(invalid("baseline window is reversed"));
        }
        if !(self.deviation_factor > 0.0 && self.deviation_factor.is_finite()) {
            return Err(invalid("deviation_factor must be positive"));
        }
        if !(self.peak_window >= 0.0) {
            return Err(invalid("peak_window must be >= 0"));
        }
        Ok(())
    }

    /// Multiplies every band edge by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            nonarc_max: self.nonarc_max * c,
            arc_min: self.arc_min * c,
            arc_max: self.arc_max * c,
            other_min: self.other_min * c,
            ..*self
        }
    }

    /// Verdict for a peak forcing value.
    pub fn band(&self, peak: f64) -> Verdict {
        let m = libm::fabs(peak);
        if m > self.other_min {
            Verdict::OtherFault
        } else if m >= self.arc_min && m <= self.arc_max {
            Verdict::ArcFault
        } else if m < self.nonarc_max {
            Verdict::NonArcingDisturbance
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    ArcFault,
    OtherFault,
    NonArcingDisturbance,
    Inconclusive,
    NoEvent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ArcFault => "ArcFault",
            Verdict::OtherFault => "OtherFault",
            Verdict::NonArcingDisturbance => "NonArcingDisturbance",
            Verdict::Inconclusive => "Inconclusive",
            Verdict::NoEvent => "NoEvent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionReport {
    pub verdict: Verdict,
    /// Signed forcing at the extremal post-deviation sample.
    pub peak_forcing: Option<f64>,
    pub deviation_time: Option<f64>,
    /// `deviation_time - fault_start`, s.
    pub latency: Option<f64>,
    pub fault_start: Option<f64>,
    pub label: Option<ScenarioKind>,
}

impl DetectionReport {
    pub fn no_event() -> Self {
        Self {
            verdict: Verdict::NoEvent,
            peak_forcing: None,
            deviation_time: None,
            latency: None,
            fault_start: None,
            label: None,
        }
    }

    /// Attaches the known disturbance onset and derives the latency.
    pub fn with_fault_start(mut self, fault_start: f64) -> Self {
        self.fault_start = Some(fault_start);
        self.latency = self.deviation_time.map(|t| t - fault_start);
        self
    }

    pub fn with_label(mut self, label: ScenarioKind) -> Self {
        self.label = Some(label);
        self
    }
}

/// Time of the first sample whose magnitude exceeds
/// `max(deviation_factor · baseline peak, nonarc_max / 2)`.
pub fn find_deviation(
    forcing: &ForcingSignal,
    thresholds: &DetectionThresholds,
) -> Result<Option<f64>> {
    let mut baseline_peak: Option<f64> = None;
    for (t, v) in forcing.times().zip(&forcing.values) {
        if t >= thresholds.baseline_start && t <= thresholds.baseline_end {
            baseline_peak = Some(baseline_peak.unwrap_or(0.0).max(libm::fabs(*v)));
        }
    }
    let baseline_peak = baseline_peak.ok_or(Error::EmptyBaseline)?;
    let level = (thresholds.deviation_factor * baseline_peak).max(0.5 * thresholds.nonarc_max);
    Ok(forcing
        .values
        .iter()
        .position(|v| libm::fabs(*v) > level)
        .map(|k| forcing.time(k)))
}

/// Classifies the extremal sample in
/// `[deviation_time, deviation_time + peak_window]`.
pub fn classify(
    forcing: &ForcingSignal,
    deviation_time: Option<f64>,
    thresholds: &DetectionThresholds,
) -> DetectionReport {
    let Some(t0) = deviation_time else {
        return DetectionReport::no_event();
    };
    let t1 = t0 + thresholds.peak_window;
    let peak = forcing
        .times()
        .zip(&forcing.values)
        .filter(|(t, _)| *t >= t0 - 1e-12 && *t <= t1 + 1e-12)
        .map(|(_, v)| *v)
        .fold(None, |best: Option<f64>, v| match best {
            Some(b) if libm::fabs(b) >= libm::fabs(v) => Some(b),
            _ => Some(v),
        });
    let Some(peak) = peak else {
        return DetectionReport::no_event();
    };
    DetectionReport {
        verdict: thresholds.band(peak),
        peak_forcing: Some(peak),
        deviation_time: Some(t0),
        latency: None,
        fault_start: None,
        label: None,
    }
}

/// Deviation search followed by classification.
pub fn detect(forcing: &ForcingSignal, thresholds: &DetectionThresholds) -> Result<DetectionReport> {
    let t = find_deviation(forcing, thresholds)?;
    Ok(classify(forcing, t, thresholds))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub label: Option<ScenarioKind>,
    pub runs: usize,
    /// Runs classified as ArcFault.
    pub arc_verdicts: usize,
    /// Fraction of runs classified as ArcFault.
    pub detection_rate: f64,
    pub mean_latency: Option<f64>,
    pub max_latency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub scenarios: Vec<ScenarioSummary>,
    /// ArcFault share among runs of non-arc scenarios; `None` if there were
    /// none.
    pub false_positive_rate: Option<f64>,
}

/// Aggregates repeated runs by scenario label, in order of first
/// appearance.
pub fn batch_evaluate(reports: &[DetectionReport]) -> BatchSummary {
    let mut labels: Vec<Option<ScenarioKind>> = Vec::new();
    for r in reports {
        if !labels.contains(&r.label) {
            labels.push(r.label);
        }
    }
    let mut scenarios = Vec::with_capacity(labels.len());
    let (mut non_arc_runs, mut false_positives) = (0usize, 0usize);
    for label in labels {
        let runs: Vec<&DetectionReport> = reports.iter().filter(|r| r.label == label).collect();
        let arc_verdicts = runs.iter().filter(|r| r.verdict == Verdict::ArcFault).count();
        let latencies: Vec<f64> = runs.iter().filter_map(|r| r.latency).collect();
        let mean_latency = if latencies.is_empty() {
            None
        } else {
            Some(latencies.iter().sum::<f64>() / latencies.len() as f64)
        };
        let max_latency = latencies.iter().copied().reduce(f64::max);
        if label.is_some_and(|k| !k.involves_arc()) {
            non_arc_runs += runs.len();
            false_positives += arc_verdicts;
        }
        scenarios.push(ScenarioSummary {
            label,
            runs: runs.len(),
            arc_verdicts,
            detection_rate: arc_verdicts as f64 / runs.len() as f64,
            mean_latency,
            max_latency,
        });
    }
    BatchSummary {
        scenarios,
        false_positive_rate: (non_arc_runs > 0)
            .then(|| false_positives as f64 / non_arc_runs as f64),
    }
}
