//! Fixed-rate inference pipeline with a Lipschitz plausibility filter.
//!
//! The filter bounds how fast each of the four outputs may move per second.
//! A tick that violates a bound is clamped onto the Lipschitz cone around the
//! last accepted value; after `rejection_limit` consecutive clamped ticks the
//! raw value is taken unconditionally so a genuine regime change cannot lock
//! the filter out forever.

use crate::error::{Error, Result};
use crate::gaitdata::{circular_phase_diff, Dataset, Normalizer, LABEL_DIMS};
use crate::mlpnet::BranchedNetwork;
use crate::Clock;

use alloc::vec::Vec;

pub const DEFAULT_SAFETY_FACTOR: f64 = 1.5;
pub const DEFAULT_REJECTION_LIMIT: u32 = 5;
/// Minimum per-dimension bound in units/second.
pub const MIN_BOUND: f64 = 1e-3;

/// Index of the circular phase dimension inside an output 4-vector.
const PHASE_DIM: usize = 1;

/// Maximum plausible rate of change per output dimension, units/second.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzBounds {
    pub bounds: [f64; LABEL_DIMS],
    pub safety_factor: f64,
}

/// Per-stream filter state. One stream owns one state.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub last: [f64; LABEL_DIMS],
    pub last_time_s: f64,
    pub consecutive_rejections: u32,
    pub rejection_limit: u32,
    primed: bool,
}

impl FilterState {
    pub fn new(rejection_limit: u32) -> Self {
        FilterState {
            last: [0.0; LABEL_DIMS],
            last_time_s: f64::NEG_INFINITY,
            consecutive_rejections: 0,
            rejection_limit,
            primed: false,
        }
    }
}

/// One emitted pipeline tick.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamTick {
    pub time_s: f64,
    pub output: [f64; LABEL_DIMS],
    pub latency_us: u64,
    pub rejected_dims: u32,
}

/// Per dimension, the safety-scaled maximum |Δy|/Δt over adjacent same-trial
/// sample pairs, floored at [`MIN_BOUND`]. Phase is differenced circularly.
pub fn estimate_lipschitz_bounds(
    dataset: &Dataset,
    safety_factor: f64,
) -> Result<LipschitzBounds> {
    if !(safety_factor >= 1.0) {
        return Err(Error::invalid("safety factor must be >= 1"));
    }
    let mut raw = [0.0f64; LABEL_DIMS];
    let mut pairs = 0usize;
    for range in dataset.trial_ranges() {
        for i in range.start + 1..range.end {
            let a = dataset.samples[i - 1].labels();
            let b = dataset.samples[i].labels();
            let dt = dataset.samples[i].time_s - dataset.samples[i - 1].time_s;
            if !(dt > 0.0) {
                return Err(Error::invalid("non-increasing timestamps within a trial"));
            }
            for d in 0..LABEL_DIMS {
                let dy = if d == PHASE_DIM {
                    circular_phase_diff(a[d], b[d])
                } else {
                    (b[d] - a[d]).abs()
                };
                raw[d] = raw[d].max(dy / dt);
            }
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::invalid("no trial has two samples"));
    }
    let mut bounds = [0.0; LABEL_DIMS];
    for d in 0..LABEL_DIMS {
        bounds[d] = (safety_factor * raw[d]).max(MIN_BOUND);
    }
    Ok(LipschitzBounds {
        bounds,
        safety_factor,
    })
}

/// Signed phase difference in (−50, 50].
fn signed_phase_diff(from: f64, to: f64) -> f64 {
    let d = crate::rem_euclid_f(to - from, 100.0);
    if d > 50.0 {
        d - 100.0
    } else {
        d
    }
}

/// Filter one raw output 4-vector.
///
/// Returns the accepted output and the number of dimensions that were
/// clamped this tick. The first call on a fresh state accepts unconditionally.
pub fn filter_step(
    state: &mut FilterState,
    bounds: &LipschitzBounds,
    raw: [f64; LABEL_DIMS],
    time_s: f64,
) -> Result<([f64; LABEL_DIMS], u32)> {
    if !state.primed {
        state.last = raw;
        state.last_time_s = time_s;
        state.primed = true;
        return Ok((raw, 0));
    }
    if !(time_s > state.last_time_s) {
        return Err(Error::invalid("timestamp must increase"));
    }
    let dt = time_s - state.last_time_s;
    let mut clamped = raw;
    let mut violations = 0u32;
    for d in 0..LABEL_DIMS {
        let step = if d == PHASE_DIM {
            signed_phase_diff(state.last[d], raw[d])
        } else {
            raw[d] - state.last[d]
        };
        let limit = bounds.bounds[d] * dt;
        if step.abs() > limit {
            violations += 1;
            let v = state.last[d] + step.clamp(-limit, limit);
            clamped[d] = if d == PHASE_DIM { crate::rem_euclid_f(v, 100.0) } else { v };
        }
    }
    let accepted;
    let rejected;
    if violations == 0 || state.consecutive_rejections >= state.rejection_limit {
        // Compliant, or re-acquisition after the rejection budget is spent:
        // the raw value passes through unmodified.
        accepted = raw;
        rejected = 0;
        state.consecutive_rejections = 0;
    } else {
        accepted = clamped;
        rejected = violations;
        state.consecutive_rejections += 1;
    }
    state.last = accepted;
    state.last_time_s = time_s;
    Ok((accepted, rejected))
}

/// Run a whole IMU trace through normalize → forward → filter at a fixed
/// rate, measuring per-tick latency with `clock`.
pub fn run_stream(
    network: &BranchedNetwork,
    normalizer: &Normalizer,
    trace: &Dataset,
    bounds: &LipschitzBounds,
    rate_hz: f64,
    clock: &mut dyn Clock,
) -> Result<Vec<StreamTick>> {
    if !(rate_hz > 0.0) {
        return Err(Error::invalid("rate must be positive"));
    }
    let mut state = FilterState::new(DEFAULT_REJECTION_LIMIT);
    let mut out = Vec::with_capacity(trace.samples.len());
    for sample in &trace.samples {
        let t0 = clock.now_us();
        let x = normalizer.apply(sample);
        let (mid, fin) = network.forward(&x)?;
        let raw = [mid[0], crate::rem_euclid_f(mid[1], 100.0), fin[0], fin[1]];
        let (output, rejected_dims) = filter_step(&mut state, bounds, raw, sample.time_s)?;
        let latency_us = clock.now_us().saturating_sub(t0);
        out.push(StreamTick {
            time_s: sample.time_s,
            output,
            latency_us,
            rejected_dims,
        });
    }
    Ok(out)
}
