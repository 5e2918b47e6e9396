//! Seeded synthetic dataset generation.

use super::template::{cycle_duration_s, gait_template};
use super::{Dataset, GaitSample};
use crate::error::{Error, Result};

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// The twelve capture speeds of the original experiment, m/s.
pub const DEFAULT_SPEEDS_MPS: [f64; 12] = [
    0.5, 0.8, 1.25, 1.5, 1.8, 2.0, 2.5, 2.8, 3.0, 3.3, 3.5, 4.5,
];

/// Gaussian noise levels added to the IMU channels only; labels stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStd {
    /// Std of the three shank angle channels, degrees.
    pub angle_deg: f64,
    /// Std of the three shank rate channels, degrees/second.
    pub rate_dps: f64,
}

impl NoiseStd {
    pub const NONE: NoiseStd = NoiseStd {
        angle_deg: 0.0,
        rate_dps: 0.0,
    };
}

impl Default for NoiseStd {
    fn default() -> Self {
        NoiseStd {
            angle_deg: 0.5,
            rate_dps: 5.0,
        }
    }
}

/// Parameters of [`generate_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub speeds_mps: Vec<f64>,
    pub cycles_per_speed: usize,
    pub sample_rate_hz: f64,
    pub noise: NoiseStd,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            speeds_mps: DEFAULT_SPEEDS_MPS.to_vec(),
            cycles_per_speed: 30,
            sample_rate_hz: 100.0,
            noise: NoiseStd::default(),
            seed: 7,
        }
    }
}

/// Generate `cycles_per_speed` full gait cycles per speed, sampled at
/// `sample_rate_hz`, with seeded Gaussian noise on the IMU channels.
///
/// Per speed the time axis starts at zero and is contiguous across cycles;
/// each speed therefore forms one trial. The per-cycle sample count is
/// `round(T(v) * rate)`.
pub fn generate_dataset(config: &GeneratorConfig) -> Result<Dataset> {
    if config.speeds_mps.is_empty() {
        return Err(Error::invalid("speed list must be non-empty"));
    }
    if config.cycles_per_speed == 0 {
        return Err(Error::invalid("cycles_per_speed must be >= 1"));
    }
    if !(config.sample_rate_hz > 0.0) {
        return Err(Error::invalid("sample_rate_hz must be > 0"));
    }
    if config.noise.angle_deg < 0.0 || config.noise.rate_dps < 0.0 {
        return Err(Error::invalid("noise std must be >= 0"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let angle_noise = noise_dist(config.noise.angle_deg)?;
    let rate_noise = noise_dist(config.noise.rate_dps)?;

    let mut samples = Vec::new();
    for &v in &config.speeds_mps {
        let n = libm::round(cycle_duration_s(v) * config.sample_rate_hz) as usize;
        let n = n.max(1);
        let mut tick = 0usize;
        for _ in 0..config.cycles_per_speed {
            for j in 0..n {
                let phase = 100.0 * j as f64 / n as f64;
                let k = gait_template(v, phase)?;
                let mut angles = k.shank_angles_deg;
                let mut rates = k.shank_rates_dps;
                if let Some(d) = angle_noise {
                    for a in &mut angles {
                        *a += d.sample(&mut rng);
                    }
                }
                if let Some(d) = rate_noise {
                    for r in &mut rates {
                        *r += d.sample(&mut rng);
                    }
                }
                samples.push(GaitSample {
                    time_s: tick as f64 / config.sample_rate_hz,
                    speed_mps: v,
                    phase_pct: phase,
                    shank_angles_deg: angles,
                    shank_rates_dps: rates,
                    ankle_angle_deg: k.ankle_angle_deg,
                    ankle_rate_dps: k.ankle_rate_dps,
                });
                tick += 1;
            }
        }
    }

    Ok(Dataset {
        samples,
        source_tag: format!("synthetic(seed={})", config.seed),
        sample_rate_hz: config.sample_rate_hz,
    })
}

fn noise_dist(std: f64) -> Result<Option<Normal<f64>>> {
    if std == 0.0 {
        return Ok(None);
    }
    Normal::new(0.0, std)
        .map(Some)
        .map_err(|_| Error::invalid("invalid noise std"))
}
