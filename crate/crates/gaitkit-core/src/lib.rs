//! Core algorithms for continuous gait recognition and powered-ankle control.
//!
//! The crate is `no_std`-compatible (with `alloc`); file IO, the command-line
//! driver, and wall-clock timing live in the companion `gaitkit-cli` crate.
//!
//! Modules:
//! - [`gaitdata`]: synthetic gait dataset generation, CSV codec, fold plans,
//!   input normalization.
//! - [`mlpnet`]: the branched MLP (IMU -> speed/phase -> ankle angle/velocity),
//!   backpropagation, Adam, training loop, weight serialization.
//! - [`evalkit`]: MSE/RMSE/MAE, relative-error buckets, angle-threshold report.
//! - [`rtpipe`]: streaming inference with the Lipschitz hypothesis-testing filter.
//! - [`plantsim`]: PID + motor + series-elastic-actuator closed-loop simulator.
//! - [`doestats`]: Shapiro-Wilk / Pearson / Spearman over design-of-experiment
//!   tables.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod doestats;
pub mod error;
pub mod evalkit;
pub mod gaitdata;
pub mod mlpnet;
pub mod plantsim;
pub mod rtpipe;

pub use error::{Error, Result};

/// Monotonic time source for latency / wall-clock bookkeeping.
///
/// The core crate cannot read a clock in `no_std`; callers that want real
/// timings inject one (see `gaitkit-cli`), everything else uses [`NullClock`].
pub trait Clock {
    /// Microseconds since an arbitrary epoch. Must be monotonic.
    fn now_us(&mut self) -> u64;
}

/// Clock that always reads zero; timing fields come out as zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_us(&mut self) -> u64 {
        0
    }
}

/// Non-negative float remainder, usable without std.
pub(crate) fn rem_euclid_f(x: f64, m: f64) -> f64 {
    let r = x % m;
    if r < 0.0 {
        r + m
    } else {
        r
    }
}
