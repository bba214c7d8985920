//! Simulate → decompose → detect, plus the built-in reference cases.

use core::fmt;

use crate::arc_model::ArcParameters;
use crate::detector::{detect, DetectionReport, DetectionThresholds, Verdict};
use crate::error::Error;
use crate::feeder::{simulate_detailed, FeederConfig, LoadSwitch, MotorLoad, ScenarioKind, ScenarioSpec, Simulation};
use crate::havok::{analyze, forcing_signal, ForcingSignal, HavokModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Simulation,
    Decomposition,
    Detection,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Simulation => "simulation",
            Stage::Decomposition => "decomposition",
            Stage::Detection => "detection",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.error)
    }
}

impl core::error::Error for PipelineError {}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub simulation: Simulation,
    pub model: HavokModel,
    pub forcing: ForcingSignal,
    pub report: DetectionReport,
}

pub fn run_scenario(
    config: &FeederConfig,
    scenario: &ScenarioSpec,
    seed: u64,
    q: usize,
    thresholds: &DetectionThresholds,
) -> Result<PipelineRun, PipelineError> {
    let at = |stage| move |error| PipelineError { stage, error };
    thresholds.validate().map_err(at(Stage::Detection))?;
    let simulation = simulate_detailed(config, scenario, seed).map_err(at(Stage::Simulation))?;
    let trace = &simulation.trace;
    let model = analyze(&trace.samples, trace.dt, q).map_err(at(Stage::Decomposition))?;
    let forcing = forcing_signal(&model);
    let report = detect(&forcing, thresholds)
        .map_err(at(Stage::Detection))?
        .with_fault_start(trace.fault_start)
        .with_label(trace.label);
    Ok(PipelineRun {
        simulation,
        model,
        forcing,
        report,
    })
}

/// One row of the reference benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkCase {
    pub id: &'static str,
    /// Short category code, e.g. `LCAF`.
    pub category: &'static str,
    pub scenario: ScenarioSpec,
    pub expected: Verdict,
    /// Expected forcing value for this case on the reference network.
    pub reference_forcing: f64,
    pub reference_latency_ms: f64,
}

const LOW_CURRENT: ArcParameters = arc(5000.0, 0.00413, 0.2, 1000.0);
const HIGH_CURRENT: ArcParameters = arc(5000.0, 0.00413, 0.2, 0.001);

const fn arc(extent: f64, duration: f64, offset: f64, r_t: f64) -> ArcParameters {
    ArcParameters {
        extent,
        duration,
        offset,
        m_coefficient: 0.0,
        grounding_resistance: r_t,
        period: 0.02,
    }
}

const fn arc_case(kind: ScenarioKind, params: ArcParameters) -> ScenarioSpec {
    ScenarioSpec {
        kind,
        arc: Some(params),
        snr_db: None,
        switch: None,
        fault_resistance: None,
        motor: None,
    }
}

const fn motor_case(params: ArcParameters) -> ScenarioSpec {
    ScenarioSpec {
        motor: Some(MotorLoad {
            inrush: 5.0,
            time_constant: 0.05,
            start: 0.0,
        }),
        ..arc_case(ScenarioKind::ArcWithMotorLoad, params)
    }
}

/// SNR of the noisy reference case, dB.
pub const BENCHMARK_SNR_DB: f64 = 70.0;

/// The nine reference cases, A through H.
pub const BENCHMARK_CASES: [BenchmarkCase; 9] = [
    BenchmarkCase {
        id: "A",
        category: "LCAF",
        scenario: arc_case(ScenarioKind::LowCurrentArc, LOW_CURRENT),
        expected: Verdict::ArcFault,
        reference_forcing: -0.1035,
        reference_latency_ms: 0.45,
    },
    BenchmarkCase {
        id: "B",
        category: "HCAF",
        scenario: arc_case(ScenarioKind::HighCurrentArc, HIGH_CURRENT),
        expected: Verdict::ArcFault,
        reference_forcing: -0.0776,
        reference_latency_ms: 0.05,
    },
    BenchmarkCase {
        id: "C",
        category: "ACWC",
        scenario: arc_case(ScenarioKind::ArcWetCement, arc(50000.0, 0.007, 0.2, 50.0)),
        expected: Verdict::ArcFault,
        reference_forcing: 0.1520,
        reference_latency_ms: 0.10,
    },
    BenchmarkCase {
        id: "D",
        category: "ACDS",
        scenario: arc_case(ScenarioKind::ArcDrySoil, arc(4708.0, 0.007, 0.2, 50.0)),
        expected: Verdict::ArcFault,
        reference_forcing: -0.1614,
        reference_latency_ms: 0.15,
    },
    BenchmarkCase {
        id: "E",
        category: "NAD (LS)",
        scenario: ScenarioSpec {
            kind: ScenarioKind::LoadSwitch,
            arc: None,
            snr_db: None,
            switch: Some(LoadSwitch {
                t_on: 0.2,
                t_off: 0.3,
                delta_power: 5.0,
            }),
            fault_resistance: None,
            motor: None,
        },
        expected: Verdict::NonArcingDisturbance,
        reference_forcing: 0.0429,
        reference_latency_ms: 0.20,
    },
    BenchmarkCase {
        id: "F",
        category: "LGF",
        scenario: ScenarioSpec {
            kind: ScenarioKind::LineToGround,
            arc: None,
            snr_db: None,
            switch: None,
            fault_resistance: Some(1.0),
            motor: None,
        },
        expected: Verdict::OtherFault,
        reference_forcing: -0.2020,
        reference_latency_ms: 0.10,
    },
    BenchmarkCase {
        id: "G(a)",
        category: "LCAFIM",
        scenario: motor_case(LOW_CURRENT),
        expected: Verdict::ArcFault,
        reference_forcing: -0.0805,
        reference_latency_ms: 0.15,
    },
    BenchmarkCase {
        id: "G(b)",
        category: "HCAFIM",
        scenario: motor_case(HIGH_CURRENT),
        expected: Verdict::ArcFault,
        reference_forcing: -0.0805,
        reference_latency_ms: 0.10,
    },
    BenchmarkCase {
        id: "H",
        category: "AFWN",
        scenario: ScenarioSpec {
            snr_db: Some(BENCHMARK_SNR_DB),
            ..arc_case(ScenarioKind::ArcWithNoise, LOW_CURRENT)
        },
        expected: Verdict::ArcFault,
        reference_forcing: 0.1168,
        reference_latency_ms: 0.65,
    },
];

/// Looks up a reference case by id (`"A"`, `"G(b)"`, ...).
pub fn benchmark_case(id: &str) -> Option<&'static BenchmarkCase> {
    BENCHMARK_CASES.iter().find(|c| c.id == id)
}
