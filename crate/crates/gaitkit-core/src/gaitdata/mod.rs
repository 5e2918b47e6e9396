//! Synthetic gait datasets, the canonical CSV codec, cross-validation fold
//! plans, and input normalization.
//!
//! The generator replaces the original lab pipeline (motion capture +
//! musculoskeletal models) with a smooth closed-form kinematic template so the
//! learning task stays well-posed at desk scale: amplitudes scale with
//! locomotive speed and every channel is 100-periodic in gait phase.

mod csv;
mod folds;
mod generate;
mod normalize;
mod template;

pub use csv::{parse_dataset_csv, write_dataset_csv, DATASET_CSV_HEADER};
pub use folds::{kfold_split, FoldPlan, FoldRound};
pub use generate::{generate_dataset, GeneratorConfig, NoiseStd, DEFAULT_SPEEDS_MPS};
pub use normalize::{fit_normalizer, fit_normalizer_subset, Normalizer};
pub use template::{cycle_duration_s, gait_template, KinematicPoint};

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

/// Number of IMU input channels (three shank angles, three shank rates).
pub const IMU_CHANNELS: usize = 6;

/// Number of label dimensions (speed, phase, ankle angle, ankle rate).
pub const LABEL_DIMS: usize = 4;

/// Prosthesis ankle motion range in degrees.
pub const MOTION_RANGE_DEG: f64 = 50.0;

/// One timestamped record of shank IMU channels plus ground-truth labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSample {
    pub time_s: f64,
    /// Locomotive speed in m/s, >= 0.
    pub speed_mps: f64,
    /// Gait phase as percent of cycle, in [0, 100).
    pub phase_pct: f64,
    /// Shank orientation (theta, phi, psi) in the sagittal, coronal and
    /// transverse planes, degrees.
    pub shank_angles_deg: [f64; 3],
    /// Shank angular velocities (dtheta, dphi, dpsi), degrees/second.
    pub shank_rates_dps: [f64; 3],
    /// Ankle angle alpha, degrees, |alpha| <= 50.
    pub ankle_angle_deg: f64,
    /// Ankle angular velocity, degrees/second.
    pub ankle_rate_dps: f64,
}

impl GaitSample {
    /// The six IMU input channels in canonical order.
    pub fn imu(&self) -> [f64; IMU_CHANNELS] {
        [
            self.shank_angles_deg[0],
            self.shank_angles_deg[1],
            self.shank_angles_deg[2],
            self.shank_rates_dps[0],
            self.shank_rates_dps[1],
            self.shank_rates_dps[2],
        ]
    }

    /// The four regression targets: (speed, phase, ankle angle, ankle rate).
    pub fn labels(&self) -> [f64; LABEL_DIMS] {
        [
            self.speed_mps,
            self.phase_pct,
            self.ankle_angle_deg,
            self.ankle_rate_dps,
        ]
    }
}

/// An ordered sequence of [`GaitSample`]s captured at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<GaitSample>,
    pub source_tag: String,
    pub sample_rate_hz: f64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index ranges of gait cycles. A new cycle starts where the phase label
    /// decreases or the speed label changes.
    pub fn cycle_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0usize;
        for i in 1..self.samples.len() {
            let prev = &self.samples[i - 1];
            let cur = &self.samples[i];
            if cur.phase_pct < prev.phase_pct || cur.speed_mps != prev.speed_mps {
                out.push(start..i);
                start = i;
            }
        }
        if start < self.samples.len() {
            out.push(start..self.samples.len());
        }
        out
    }

    /// Index ranges of contiguous trials: maximal runs where time advances by
    /// exactly one sample period (relative tolerance 1e-6).
    pub fn trial_ranges(&self) -> Vec<Range<usize>> {
        let dt = 1.0 / self.sample_rate_hz;
        let mut out = Vec::new();
        let mut start = 0usize;
        for i in 1..self.samples.len() {
            let step = self.samples[i].time_s - self.samples[i - 1].time_s;
            if libm::fabs(step - dt) > 1e-6 * dt {
                out.push(start..i);
                start = i;
            }
        }
        if start < self.samples.len() {
            out.push(start..self.samples.len());
        }
        out
    }
}

/// Circular distance between two phases on the [0, 100) cycle.
pub fn circular_phase_diff(a: f64, b: f64) -> f64 {
    let d = libm::fabs(a - b) % 100.0;
    if d > 50.0 {
        100.0 - d
    } else {
        d
    }
}
