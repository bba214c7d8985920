//! Arc resistance from a prescribed residual-power profile.
//!
//! The arc is described by three distortion features: the length of the
//! zero-off interval (`duration`), the peak arc resistance (`extent`) and the
//! fault-voltage level at which that peak occurs (`offset`). The residual
//! power is a half-period periodic, piecewise-linear function anchored at
//! t_m, and `ln R_arc` is its running integral.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Minimum arc resistance between distortions, in ohms.
pub const BASELINE_RESISTANCE: f64 = 1.0;

/// Default cap on the running `ln R_arc`; corresponds to 1 TΩ.
pub const DEFAULT_EXPONENT_CAP: f64 = 27.631_021_115_928_547; // ln(1e12)

/// One arc-fault scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcParameters {
    /// Peak arc resistance R_arc(t_m), Ω.
    pub extent: f64,
    /// Zero-off interval length, s.
    pub duration: f64,
    /// Fault-voltage magnitude at t_m, kV. Negative values place t_m on the
    /// falling flank before a zero crossing.
    pub offset: f64,
    pub m_coefficient: f64,
    /// Grounding resistance R_T in series with the arc, Ω.
    pub grounding_resistance: f64,
    /// One fundamental period, s.
    pub period: f64,
}

impl ArcParameters {
    /// Parameters for a 50 Hz system with `m = 0`.
    pub fn new(extent: f64, duration: f64, offset: f64, grounding_resistance: f64) -> Self {
        Self {
            extent,
            duration,
            offset,
            m_coefficient: 0.0,
            grounding_resistance,
            period: 0.02,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(invalid("extent must be positive and finite"));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(invalid("period must be positive"));
        }
        if !(self.duration > 0.0 && self.duration < self.period) {
            return Err(invalid("duration must lie in (0, period)"));
        }
        if !self.offset.is_finite() {
            return Err(invalid("offset must be finite"));
        }
        if !self.m_coefficient.is_finite() {
            return Err(invalid("m_coefficient must be finite"));
        }
        if !(self.grounding_resistance >= 0.0 && self.grounding_resistance.is_finite()) {
            return Err(invalid("grounding_resistance must be >= 0"));
        }
        Ok(())
    }

    /// Checks `|offset| < peak` for a source of the given peak voltage (kV).
    pub fn validate_for_source(&self, source_peak: f64) -> Result<()> {
        self.validate()?;
        if libm::fabs(self.offset) >= source_peak {
            return Err(Error::NoCrossing {
                offset: self.offset,
                peak: source_peak,
            });
        }
        Ok(())
    }
}

/// Piecewise-linear residual power anchored at `t_m`.
///
/// On `[t_m - D/2, t_m + D/2)` the power is `a1 (t - t_m - D/2) - b1`; on the
/// remainder of the half period it is `a2 (t - t_m - D/2) - b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPowerProfile {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub t_m: f64,
    pub duration: f64,
    pub half_period: f64,
}

impl ResidualPowerProfile {
    pub fn anchored_at(mut self, t_m: f64) -> Self {
        self.t_m = t_m;
        self
    }

    /// `[start, end)` of the first (distortion) segment.
    pub fn first_segment(&self) -> (f64, f64) {
        (self.t_m - self.duration / 2.0, self.t_m + self.duration / 2.0)
    }

    /// `[start, end)` of the second segment.
    pub fn second_segment(&self) -> (f64, f64) {
        let start = self.t_m + self.duration / 2.0;
        (start, self.t_m + self.half_period - self.duration / 2.0)
    }

    /// Residual power at `t`, extended periodically with the half period.
    pub fn power_at(&self, t: f64) -> f64 {
        let start = self.t_m - self.duration / 2.0;
        let mut phase = libm::fmod(t - start, self.half_period);
        if phase < 0.0 {
            phase += self.half_period;
        }
        // phase - D equals t - t_m - D/2 within the current period
        let x = phase - self.duration;
        if phase < self.duration {
            self.a1 * x - self.b1
        } else {
            self.a2 * x - self.b2
        }
    }
}

/// Evaluates the profile coefficients for `params`, anchored at `t_m = 0`.
pub fn compute_profile_coefficients(params: &ArcParameters) -> Result<ResidualPowerProfile> {
    params.validate()?;
    let half_period = params.period / 2.0;
    if params.duration >= half_period {
        return Err(invalid(
            "duration must be shorter than half a period (second segment is empty)",
        ));
    }
    let d = params.duration;
    let ln_extent = libm::log(params.extent);
    let b1 = 4.0 * ln_extent / d;
    let a1 = -8.0 * ln_extent / (d * d);
    let a2 = params.m_coefficient * (-16.0 * ln_extent) / (d * (params.period - 2.0 * d));
    let b2 = params.m_coefficient * b1;
    Ok(ResidualPowerProfile {
        a1,
        b1,
        a2,
        b2,
        t_m: 0.0,
        duration: d,
        half_period,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Boundary {
    /// The waveform starts or ends here; no zero crossing is known.
    Edge,
    Crossing,
}

/// Zero crossings of a sampled signal, linearly interpolated.
fn zero_crossings(samples: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..samples.len().saturating_sub(1) {
        let (a, b) = (samples[k], samples[k + 1]);
        if a == 0.0 {
            let prev_zero = k > 0 && samples[k - 1] == 0.0;
            if !prev_zero && (k > 0 || b != 0.0) {
                out.push(k as f64 * dt);
            }
        } else if a * b < 0.0 {
            out.push((k as f64 + a / (a - b)) * dt);
        }
    }
    out
}

/// Instants t_m for every half-cycle of `fault_voltage` (kV, uniform `dt`).
///
/// For `offset >= 0` t_m is where |u_f| first rises through `offset` after a
/// zero crossing; for `offset < 0` it is where |u_f| last falls through
/// `|offset|` before the next zero crossing. Positions are linearly
/// interpolated between samples.
pub fn locate_t_m_per_half_cycle(fault_voltage: &[f64], dt: f64, offset: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || fault_voltage.len() < 2 {
        return Err(invalid("fault voltage needs at least two samples and dt > 0"));
    }
    let peak = fault_voltage.iter().fold(0.0f64, |m, x| m.max(libm::fabs(*x)));
    let level = libm::fabs(offset);
    if !(level < peak) {
        return Err(Error::NoCrossing { offset, peak });
    }

    let crossings = zero_crossings(fault_voltage, dt);
    let end = (fault_voltage.len() - 1) as f64 * dt;
    let mut bounds: Vec<(f64, Boundary)> = Vec::with_capacity(crossings.len() + 2);
    bounds.push((0.0, Boundary::Edge));
    for z in crossings {
        if z == 0.0 {
            bounds[0].1 = Boundary::Crossing;
        } else {
            bounds.push((z, Boundary::Crossing));
        }
    }
    if bounds.last().map(|b| b.0) != Some(end) {
        bounds.push((end, Boundary::Edge));
    }

    let sample_at = |k: usize| fault_voltage[k];
    let mut out = Vec::new();
    for w in bounds.windows(2) {
        let ((lo, lo_kind), (hi, hi_kind)) = (w[0], w[1]);
        // sample indices strictly inside (lo, hi)
        let first = (libm::floor(lo / dt) as usize + 1).min(fault_voltage.len());
        let last = (libm::ceil(hi / dt) as usize).min(fault_voltage.len());
        if first >= last {
            continue;
        }
        let inner: Vec<usize> = (first..last)
            .filter(|&k| {
                let t = k as f64 * dt;
                t > lo && t < hi
            })
            .collect();
        let Some(&mid) = inner.get(inner.len() / 2) else {
            continue;
        };
        let sign = if sample_at(mid) >= 0.0 { 1.0 } else { -1.0 };
        let mag = |k: usize| sign * sample_at(k);

        if offset >= 0.0 {
            if lo_kind != Boundary::Crossing {
                continue;
            }
            if level == 0.0 {
                out.push(lo);
                continue;
            }
            let mut prev = (lo, 0.0);
            for &k in &inner {
                let (t, m) = (k as f64 * dt, mag(k));
                if m >= level {
                    out.push(prev.0 + (level - prev.1) / (m - prev.1) * (t - prev.0));
                    break;
                }
                prev = (t, m);
            }
        } else {
            if hi_kind != Boundary::Crossing {
                continue;
            }
            let mut next = (hi, 0.0);
            for &k in inner.iter().rev() {
                let (t, m) = (k as f64 * dt, mag(k));
                if m >= level {
                    out.push(t + (m - level) / (m - next.1) * (next.0 - t));
                    break;
                }
                next = (t, m);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoCrossing { offset, peak });
    }
    Ok(out)
}

/// The earliest t_m of the sampled fault voltage.
pub fn locate_t_m(fault_voltage: &[f64], dt: f64, offset: f64) -> Result<f64> {
    locate_t_m_per_half_cycle(fault_voltage, dt, offset).map(|v| v[0])
}

/// Arc resistance sampled on `t_k = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcResistanceTrace {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub baseline: f64,
}

impl ArcResistanceTrace {
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    slope: f64,
    /// P(t) = slope (t - pivot) - drop
    pivot: f64,
    drop: f64,
}

impl Segment {
    fn power(&self, t: f64) -> f64 {
        self.slope * (t - self.pivot) - self.drop
    }
}

fn build_segments(profile: &ResidualPowerProfile, anchors: &[f64]) -> Vec<Segment> {
    let d = profile.duration;
    let mut segs = Vec::with_capacity(anchors.len() * 2);
    for (k, &t_m) in anchors.iter().enumerate() {
        let pivot = t_m + d / 2.0;
        let start = t_m - d / 2.0;
        let end = match anchors.get(k + 1) {
            Some(next) => next - d / 2.0,
            None => start + profile.half_period,
        };
        segs.push(Segment {
            start,
            end: pivot.min(end),
            slope: profile.a1,
            pivot,
            drop: profile.b1,
        });
        if end > pivot {
            segs.push(Segment {
                start: pivot,
                end,
                slope: profile.a2,
                pivot,
                drop: profile.b2,
            });
        }
    }
    segs
}

/// Exact trapezoid over `[a, b]`, split at every segment boundary.
fn integrate(segs: &[Segment], cursor: &mut usize, a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    let mut lo = a;
    while lo < b {
        while *cursor < segs.len() && segs[*cursor].end <= lo {
            *cursor += 1;
        }
        let Some(seg) = segs.get(*cursor) else { break };
        if seg.start >= b {
            break;
        }
        if seg.start > lo {
            // zero power in a gap before this segment
            lo = seg.start;
            continue;
        }
        let hi = seg.end.min(b);
        acc += 0.5 * (hi - lo) * (seg.power(lo) + seg.power(hi));
        lo = hi;
    }
    acc
}

/// `R_arc(t) = exp(∫ P_res)` for a profile re-anchored at every entry of
/// `anchors` (ascending t_m, one per half-cycle).
///
/// Integration starts at the first segment start with `ln R = 0`; before
/// that, and after the last anchor's half period, the power is zero. Each step is the trapezoidal rule
/// split at segment boundaries.
pub fn arc_resistance_trace_anchored(
    profile: &ResidualPowerProfile,
    anchors: &[f64],
    horizon: f64,
    dt: f64,
    exponent_cap: f64,
) -> Result<ArcResistanceTrace> {
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(invalid("horizon and dt must be positive"));
    }
    let steps = libm::round(horizon / dt);
    if libm::fabs(steps * dt - horizon) > 1e-9 * horizon {
        return Err(invalid("dt must divide horizon"));
    }
    if anchors.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("anchors must be strictly increasing"));
    }
    let n = steps as usize;
    let segs = build_segments(profile, anchors);
    let mut cursor = 0;
    let mut ln_r = 0.0;
    // account for any part of the first segment preceding t = 0
    if let Some(first) = segs.first() {
        if first.start < 0.0 {
            ln_r = integrate(&segs, &mut cursor, first.start, 0.0);
        }
    }
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            let (a, b) = ((k - 1) as f64 * dt, k as f64 * dt);
            ln_r += integrate(&segs, &mut cursor, a, b);
        }
        if ln_r > exponent_cap {
            return Err(Error::DivergingProfile {
                time: k as f64 * dt,
                exponent: ln_r,
                cap: exponent_cap,
            });
        }
        samples.push(BASELINE_RESISTANCE * libm::exp(ln_r));
    }
    Ok(ArcResistanceTrace {
        samples,
        dt,
        baseline: BASELINE_RESISTANCE,
    })
}

/// Arc resistance for a strictly periodic profile (anchors at
/// `t_m + k · period/2`) over `[0, horizon)`.
pub fn arc_resistance_trace(
    params: &ArcParameters,
    profile: &ResidualPowerProfile,
    horizon: f64,
    dt: f64,
) -> Result<ArcResistanceTrace> {
    params.validate()?;
    let mut anchors = Vec::new();
    let mut t_m = profile.t_m;
    while t_m - profile.duration / 2.0 < horizon {
        anchors.push(t_m);
        t_m += profile.half_period;
    }
    arc_resistance_trace_anchored(profile, &anchors, horizon, dt, DEFAULT_EXPONENT_CAP)
}
