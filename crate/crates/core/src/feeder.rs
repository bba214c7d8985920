//! Single-feeder surrogate of a 12 kV / 50 Hz distribution system.
//!
//! A stiff sinusoidal source feeds `load_count` constant-impedance loads in
//! parallel. Faults are a switchable branch `u / (R_fault + Z_src)` whose
//! current is superposed on the load current at the feeder head. Currents are
//! in kA, voltages in kV, resistances in Ω and powers in MW.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::arc_model::{
    arc_resistance_trace_anchored, compute_profile_coefficients, locate_t_m_per_half_cycle,
    ArcParameters, DEFAULT_EXPONENT_CAP,
};
use crate::error::{invalid, Error, Result};

/// Noise levels above this are treated as this value.
pub const MAX_SNR_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeederConfig {
    /// Phase-voltage peak, kV.
    pub source_peak_voltage: f64,
    pub frequency: f64,
    /// Resistive source impedance, Ω.
    pub source_impedance: f64,
    /// Power drawn by each load, MW.
    pub load_power: f64,
    pub load_count: usize,
    pub sample_rate: f64,
    pub horizon: f64,
    pub fault_start: f64,
    pub fault_duration: f64,
    /// Upper bound on `ln R_arc` before a profile is declared divergent.
    pub exponent_cap: f64,
}

impl Default for FeederConfig {
    fn default() -> Self {
        Self {
            source_peak_voltage: 12.0,
            frequency: 50.0,
            source_impedance: 0.5,
            load_power: 10.0,
            load_count: 2,
            sample_rate: 20_000.0,
            horizon: 0.5,
            fault_start: 0.2,
            fault_duration: 0.1,
            exponent_cap: DEFAULT_EXPONENT_CAP,
        }
    }
}

impl FeederConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn sample_count(&self) -> usize {
        libm::round(self.horizon * self.sample_rate) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.source_peak_voltage) {
            return Err(invalid("source_peak_voltage must be positive"));
        }
        if !positive(self.frequency) {
            return Err(invalid("frequency must be positive"));
        }
        if !(self.source_impedance.is_finite() && self.source_impedance >= 0.0) {
            return Err(invalid("source_impedance must be >= 0"));
        }
        if !(self.load_power.is_finite() && self.load_power >= 0.0) {
            return Err(invalid("load_power must be >= 0"));
        }
        if self.load_count == 0 {
            return Err(invalid("load_count must be at least 1"));
        }
        if !positive(self.sample_rate) || !positive(self.horizon) {
            return Err(invalid("sample_rate and horizon must be positive"));
        }
        let count = self.horizon * self.sample_rate;
        if libm::fabs(count - libm::round(count)) > 1e-6 || libm::round(count) < 2.0 {
            return Err(invalid("sample_rate * horizon must be an integer count >= 2"));
        }
        if !(self.fault_start >= 0.0 && self.fault_duration >= 0.0) {
            return Err(invalid("fault window must start and last at non-negative times"));
        }
        if self.fault_start + self.fault_duration > self.horizon + 1e-12 {
            return Err(invalid("fault window must lie inside the horizon"));
        }
        if !positive(self.exponent_cap) {
            return Err(invalid("exponent_cap must be positive"));
        }
        Ok(())
    }

    /// Source voltage at `t`, kV.
    pub fn source_voltage(&self, t: f64) -> f64 {
        self.source_peak_voltage * libm::sin(2.0 * PI * self.frequency * t)
    }

    /// Sampled source voltage over the horizon.
    pub fn source_waveform(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.sample_count())
            .map(|k| self.source_voltage(k as f64 * dt))
            .collect()
    }

    /// Conductance (kA/kV) of a load drawing `power` MW.
    ///
    /// The single-phase convention treats `power` as a three-phase rating on
    /// the phase voltage: `I_rms = P / (3 V_rms)`.
    pub fn conductance(&self, power: f64) -> f64 {
        let v_rms = self.source_peak_voltage / core::f64::consts::SQRT_2;
        power / (3.0 * v_rms * v_rms)
    }

    /// Peak of the steady-state load current, kA.
    pub fn load_current_amplitude(&self) -> f64 {
        self.conductance(self.load_power) * self.load_count as f64 * self.source_peak_voltage
    }

    /// Sample indices `[start, end)` covered by `[t0, t1)`.
    fn window(&self, t0: f64, t1: f64) -> (usize, usize) {
        let dt = self.dt();
        let n = self.sample_count();
        let idx = |t: f64| (libm::ceil(t / dt - 1e-9).max(0.0) as usize).min(n);
        (idx(t0), idx(t1))
    }

    fn fault_window(&self) -> (usize, usize) {
        self.window(self.fault_start, self.fault_start + self.fault_duration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    LowCurrentArc,
    HighCurrentArc,
    ArcWetCement,
    ArcDrySoil,
    LoadSwitch,
    LineToGround,
    ArcWithMotorLoad,
    ArcWithNoise,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::LowCurrentArc,
        ScenarioKind::HighCurrentArc,
        ScenarioKind::ArcWetCement,
        ScenarioKind::ArcDrySoil,
        ScenarioKind::LoadSwitch,
        ScenarioKind::LineToGround,
        ScenarioKind::ArcWithMotorLoad,
        ScenarioKind::ArcWithNoise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::LowCurrentArc => "low_current_arc",
            ScenarioKind::HighCurrentArc => "high_current_arc",
            ScenarioKind::ArcWetCement => "arc_wet_cement",
            ScenarioKind::ArcDrySoil => "arc_dry_soil",
            ScenarioKind::LoadSwitch => "load_switch",
            ScenarioKind::LineToGround => "line_to_ground",
            ScenarioKind::ArcWithMotorLoad => "arc_with_motor_load",
            ScenarioKind::ArcWithNoise => "arc_with_noise",
        }
    }

    pub fn involves_arc(self) -> bool {
        !matches!(self, ScenarioKind::LoadSwitch | ScenarioKind::LineToGround)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid("unknown scenario kind"))
    }
}

/// A load step during `[t_on, t_off)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSwitch {
    pub t_on: f64,
    pub t_off: f64,
    /// Power added to the first load, MW. May be negative.
    pub delta_power: f64,
}

impl Default for LoadSwitch {
    fn default() -> Self {
        Self {
            t_on: 0.2,
            t_off: 0.3,
            delta_power: 5.0,
        }
    }
}

/// Induction-motor stand-in: the last load's current is scaled by
/// `1 + inrush · exp(-(t - start) / time_constant)` from `start` on and is
/// zero before.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorLoad {
    pub inrush: f64,
    pub time_constant: f64,
    pub start: f64,
}

impl Default for MotorLoad {
    fn default() -> Self {
        Self {
            inrush: 5.0,
            time_constant: 0.05,
            start: 0.0,
        }
    }
}

impl MotorLoad {
    /// Multiplier on the steady-state current at `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        if t < self.start {
            0.0
        } else {
            1.0 + self.inrush * libm::exp(-(t - self.start) / self.time_constant)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.inrush.is_finite() && self.inrush >= 0.0) {
            return Err(invalid("motor inrush must be >= 0"));
        }
        if !(self.time_constant.is_finite() && self.time_constant > 0.0) {
            return Err(invalid("motor time_constant must be positive"));
        }
        if !(self.start.is_finite() && self.start >= 0.0) {
            return Err(invalid("motor start must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub arc: Option<ArcParameters>,
    pub snr_db: Option<f64>,
    pub switch: Option<LoadSwitch>,
    /// Constant fault resistance for `line_to_ground`, Ω. `f64::INFINITY`
    /// leaves the branch open.
    pub fault_resistance: Option<f64>,
    pub motor: Option<MotorLoad>,
}

impl ScenarioSpec {
    pub fn arc(kind: ScenarioKind, arc: ArcParameters) -> Self {
        Self {
            kind,
            arc: Some(arc),
            snr_db: None,
            switch: None,
            fault_resistance: None,
            motor: None,
        }
    }

    pub fn noisy_arc(arc: ArcParameters, snr_db: f64) -> Self {
        Self {
            snr_db: Some(snr_db),
            ..Self::arc(ScenarioKind::ArcWithNoise, arc)
        }
    }

    pub fn load_switch(switch: LoadSwitch) -> Self {
        Self {
            kind: ScenarioKind::LoadSwitch,
            arc: None,
            snr_db: None,
            switch: Some(switch),
            fault_resistance: None,
            motor: None,
        }
    }

    pub fn line_to_ground(fault_resistance: f64) -> Self {
        Self {
            kind: ScenarioKind::LineToGround,
            arc: None,
            snr_db: None,
            switch: None,
            fault_resistance: Some(fault_resistance),
            motor: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.involves_arc() != self.arc.is_some() {
            return Err(invalid("arc parameters must be given exactly for arc scenarios"));
        }
        if (self.kind == ScenarioKind::ArcWithNoise) != self.snr_db.is_some() {
            return Err(invalid("snr_db must be given exactly for arc_with_noise"));
        }
        if self.switch.is_some() && self.kind != ScenarioKind::LoadSwitch {
            return Err(invalid("switch details only apply to load_switch"));
        }
        if self.fault_resistance.is_some() && self.kind != ScenarioKind::LineToGround {
            return Err(invalid("fault_resistance only applies to line_to_ground"));
        }
        if self.motor.is_some() && self.kind != ScenarioKind::ArcWithMotorLoad {
            return Err(invalid("motor details only apply to arc_with_motor_load"));
        }
        if let Some(arc) = &self.arc {
            arc.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTrace {
    /// Feeder-head current, kA.
    pub samples: Vec<f64>,
    pub dt: f64,
    /// Instant the disturbance was applied, s.
    pub fault_start: f64,
    pub label: ScenarioKind,
}

impl CurrentTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Mean square of the samples.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }
}

/// A simulated trace together with its fault-branch internals.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub trace: CurrentTrace,
    /// Fault-branch current, kA (zero outside the fault window).
    pub fault_current: Vec<f64>,
    /// Arc resistance over the whole horizon, Ω, for arc scenarios.
    pub arc_resistance: Option<Vec<f64>>,
}

/// Steady-state current of all constant loads.
fn load_current(config: &FeederConfig, u: &[f64]) -> Vec<f64> {
    let g = config.conductance(config.load_power) * config.load_count as f64;
    u.iter().map(|v| g * v).collect()
}

/// Fault-branch current for an arc with parameters `arc`, plus `R_arc`.
fn arc_branch(
    config: &FeederConfig,
    arc: &ArcParameters,
    u: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut params = *arc;
    params.period = config.period();
    params.validate_for_source(config.source_peak_voltage)?;
    let profile = compute_profile_coefficients(&params)?;
    let dt = config.dt();
    let all = locate_t_m_per_half_cycle(u, dt, params.offset)?;
    // re-anchor from the half-cycle whose distortion covers the fault onset
    let half_width = params.duration / 2.0;
    let first = all
        .iter()
        .rposition(|&t| t - half_width <= config.fault_start)
        .unwrap_or(0);
    let anchors = &all[first..];
    let r_arc =
        arc_resistance_trace_anchored(&profile, anchors, config.horizon, dt, config.exponent_cap)?
            .samples;

    let series = params.grounding_resistance + config.source_impedance;
    let (k0, k1) = config.fault_window();
    let mut i_f = vec![0.0; u.len()];
    for k in k0..k1 {
        let z = r_arc[k] + series;
        if !(z > 0.0) {
            return Err(invalid("fault branch impedance must be positive"));
        }
        i_f[k] = u[k] / z;
    }
    Ok((i_f, r_arc))
}

fn constant_branch(config: &FeederConfig, resistance: f64, u: &[f64]) -> Result<Vec<f64>> {
    if !(resistance >= 0.0) {
        return Err(invalid("fault_resistance must be >= 0"));
    }
    let mut i_f = vec![0.0; u.len()];
    if resistance.is_infinite() {
        return Ok(i_f);
    }
    let z = resistance + config.source_impedance;
    if !(z > 0.0) {
        return Err(invalid("fault branch impedance must be positive"));
    }
    let (k0, k1) = config.fault_window();
    for k in k0..k1 {
        i_f[k] = u[k] / z;
    }
    Ok(i_f)
}

fn motor_current(config: &FeederConfig, motor: &MotorLoad, u: &[f64]) -> Result<Vec<f64>> {
    motor.validate()?;
    let g = config.conductance(config.load_power);
    let fixed = g * (config.load_count - 1) as f64;
    let dt = config.dt();
    Ok(u.iter()
        .enumerate()
        .map(|(k, v)| (fixed + g * motor.envelope(k as f64 * dt)) * v)
        .collect())
}

fn superpose(load: Vec<f64>, fault: &[f64]) -> Vec<f64> {
    load.into_iter().zip(fault).map(|(a, b)| a + b).collect()
}

/// Runs `scenario` and keeps the fault-branch internals.
///
/// `seed` only affects `arc_with_noise`.
pub fn simulate_detailed(
    config: &FeederConfig,
    scenario: &ScenarioSpec,
    seed: u64,
) -> Result<Simulation> {
    config.validate()?;
    scenario.validate()?;
    let u = config.source_waveform();
    let dt = config.dt();
    let trace = |samples: Vec<f64>, fault_start: f64| CurrentTrace {
        samples,
        dt,
        fault_start,
        label: scenario.kind,
    };

    match scenario.kind {
        ScenarioKind::LoadSwitch => {
            let sw = scenario.switch.unwrap_or_default();
            let t = switch_load(config, sw.t_on, sw.t_off, sw.delta_power)?;
            let n = t.len();
            Ok(Simulation {
                trace: t,
                fault_current: vec![0.0; n],
                arc_resistance: None,
            })
        }
        ScenarioKind::LineToGround => {
            let r = scenario.fault_resistance.unwrap_or(1.0);
            let i_f = constant_branch(config, r, &u)?;
            let samples = superpose(load_current(config, &u), &i_f);
            Ok(Simulation {
                trace: trace(samples, config.fault_start),
                fault_current: i_f,
                arc_resistance: None,
            })
        }
        _ => {
            let arc = scenario.arc.ok_or_else(|| invalid("missing arc parameters"))?;
            let (i_f, r_arc) = arc_branch(config, &arc, &u)?;
            let load = match scenario.kind {
                ScenarioKind::ArcWithMotorLoad => {
                    motor_current(config, &scenario.motor.unwrap_or_default(), &u)?
                }
                _ => load_current(config, &u),
            };
            let mut out = trace(superpose(load, &i_f), config.fault_start);
            if let Some(snr) = scenario.snr_db {
                out = inject_noise(&out, snr, seed)?;
            }
            Ok(Simulation {
                trace: out,
                fault_current: i_f,
                arc_resistance: Some(r_arc),
            })
        }
    }
}

/// Feeder-head current for `scenario`.
pub fn simulate(config: &FeederConfig, scenario: &ScenarioSpec, seed: u64) -> Result<CurrentTrace> {
    simulate_detailed(config, scenario, seed).map(|s| s.trace)
}

/// Adds seeded white Gaussian noise at `snr_db` relative to the trace power.
pub fn inject_noise(trace: &CurrentTrace, snr_db: f64, seed: u64) -> Result<CurrentTrace> {
    if !(snr_db > 0.0) {
        return Err(invalid("snr_db must be positive"));
    }
    if trace.is_empty() {
        return Err(invalid("cannot add noise to an empty trace"));
    }
    let snr = snr_db.min(MAX_SNR_DB);
    let sigma = libm::sqrt(trace.power() / libm::pow(10.0, snr / 10.0));
    let normal = Normal::new(0.0, sigma).map_err(|_| Error::NumericalFailure("noise variance"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = trace
        .samples
        .iter()
        .map(|x| x + normal.sample(&mut rng))
        .collect();
    Ok(CurrentTrace {
        samples,
        ..trace.clone()
    })
}

/// Fault-free trace where the first load changes by `delta_power` MW during
/// `[t_on, t_off)`.
pub fn switch_load(
    config: &FeederConfig,
    t_on: f64,
    t_off: f64,
    delta_power: f64,
) -> Result<CurrentTrace> {
    config.validate()?;
    if !(t_on >= 0.0 && t_on < t_off && t_off <= config.horizon) {
        return Err(invalid("switching window must satisfy 0 <= t_on < t_off <= horizon"));
    }
    if !(config.load_power + delta_power >= 0.0) {
        return Err(invalid("switched load cannot draw negative power"));
    }
    let u = config.source_waveform();
    let mut samples = load_current(config, &u);
    let dg = config.conductance(delta_power);
    let (k0, k1) = config.window(t_on, t_off);
    for k in k0..k1 {
        samples[k] += dg * u[k];
    }
    Ok(CurrentTrace {
        samples,
        dt: config.dt(),
        fault_start: t_on,
        label: ScenarioKind::LoadSwitch,
    })
}

/// Constant-resistance line-to-ground fault over the configured fault window.
pub fn line_to_ground(config: &FeederConfig, fault_resistance: f64) -> Result<CurrentTrace> {
    simulate(config, &ScenarioSpec::line_to_ground(fault_resistance), 0)
}

/// Arc fault with the last load replaced by a decaying-inrush motor.
pub fn motor_load_surrogate(
    config: &FeederConfig,
    arc: &ArcParameters,
    motor: &MotorLoad,
) -> Result<CurrentTrace> {
    let spec = ScenarioSpec {
        motor: Some(*motor),
        ..ScenarioSpec::arc(ScenarioKind::ArcWithMotorLoad, *arc)
    };
    simulate(config, &spec, 0)
}
