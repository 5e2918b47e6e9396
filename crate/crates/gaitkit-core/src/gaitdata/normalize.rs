//! Per-channel standardization of the IMU inputs. Targets stay in raw units.

use super::{Dataset, GaitSample, IMU_CHANNELS};
use crate::error::{Error, Result};

use alloc::format;
use alloc::vec::Vec;

const MIN_STD: f64 = 1e-12;

/// Per-channel mean and standard deviation of the six IMU inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub mean: [f64; IMU_CHANNELS],
    pub std: [f64; IMU_CHANNELS],
}

impl Normalizer {
    /// Identity normalizer (mean 0, std 1).
    pub fn identity() -> Self {
        Normalizer {
            mean: [0.0; IMU_CHANNELS],
            std: [1.0; IMU_CHANNELS],
        }
    }

    /// Standardize one sample's IMU channels.
    pub fn apply(&self, sample: &GaitSample) -> [f64; IMU_CHANNELS] {
        self.apply_channels(&sample.imu())
    }

    /// Standardize a raw 6-channel vector.
    pub fn apply_channels(&self, imu: &[f64; IMU_CHANNELS]) -> [f64; IMU_CHANNELS] {
        let mut out = [0.0; IMU_CHANNELS];
        for c in 0..IMU_CHANNELS {
            out[c] = (imu[c] - self.mean[c]) / self.std[c];
        }
        out
    }
}

/// Fit a normalizer over the whole dataset.
pub fn fit_normalizer(dataset: &Dataset) -> Result<Normalizer> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    fit_normalizer_subset(dataset, &all)
}

/// Fit a normalizer over a subset of sample indices (e.g. one fold's train
/// split). Uses Welford's one-pass update; population variance.
pub fn fit_normalizer_subset(dataset: &Dataset, indices: &[usize]) -> Result<Normalizer> {
    if indices.is_empty() {
        return Err(Error::invalid("cannot fit a normalizer on an empty set"));
    }
    let mut mean = [0.0; IMU_CHANNELS];
    let mut m2 = [0.0; IMU_CHANNELS];
    let mut n = 0.0f64;
    for &i in indices {
        let imu = dataset.samples[i].imu();
        n += 1.0;
        for c in 0..IMU_CHANNELS {
            let delta = imu[c] - mean[c];
            mean[c] += delta / n;
            m2[c] += delta * (imu[c] - mean[c]);
        }
    }
    let mut std = [0.0; IMU_CHANNELS];
    for c in 0..IMU_CHANNELS {
        std[c] = libm::sqrt(m2[c] / n);
        if std[c] < MIN_STD {
            return Err(Error::Degenerate(format!(
                "IMU channel {c} has zero variance"
            )));
        }
    }
    Ok(Normalizer { mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaitdata::{generate_dataset, GeneratorConfig, NoiseStd};
    use alloc::string::ToString;

    fn sample(imu: [f64; 6]) -> GaitSample {
        GaitSample {
            time_s: 0.0,
            speed_mps: 1.0,
            phase_pct: 0.0,
            shank_angles_deg: [imu[0], imu[1], imu[2]],
            shank_rates_dps: [imu[3], imu[4], imu[5]],
            ankle_angle_deg: 0.0,
            ankle_rate_dps: 0.0,
        }
    }

    fn dataset(samples: Vec<GaitSample>) -> Dataset {
        Dataset {
            samples,
            source_tag: "test".to_string(),
            sample_rate_hz: 100.0,
        }
    }

    #[test]
    fn constant_channel_is_degenerate() {
        let d = dataset(alloc::vec![
            sample([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            sample([2.0, 2.0, 4.0, 5.0, 6.0, 7.0]),
        ]);
        match fit_normalizer(&d) {
            Err(Error::Degenerate(msg)) => assert!(msg.contains("channel 1")),
            other => panic!("expected degenerate error, got {other:?}"),
        }
    }

    #[test]
    fn standardized_fitting_set_has_zero_mean_unit_variance() {
        let d = generate_dataset(&GeneratorConfig {
            speeds_mps: alloc::vec![0.8, 2.0],
            cycles_per_speed: 2,
            sample_rate_hz: 100.0,
            noise: NoiseStd::default(),
            seed: 11,
        })
        .unwrap();
        let norm = fit_normalizer(&d).unwrap();
        let n = d.len() as f64;
        let mut mean = [0.0; 6];
        let mut var = [0.0; 6];
        for s in &d.samples {
            let z = norm.apply(s);
            for c in 0..6 {
                mean[c] += z[c] / n;
            }
        }
        for s in &d.samples {
            let z = norm.apply(s);
            for c in 0..6 {
                var[c] += (z[c] - mean[c]) * (z[c] - mean[c]) / n;
            }
        }
        for c in 0..6 {
            assert!(mean[c].abs() < 1e-9, "channel {c} mean {}", mean[c]);
            assert!((var[c] - 1.0).abs() < 1e-9, "channel {c} var {}", var[c]);
        }
    }

    /// Independent two-pass oracle on a hand-built 3-sample set.
    #[test]
    fn matches_two_pass_oracle() {
        let rows = [
            [1.0, -2.0, 0.5, 10.0, -3.0, 7.0],
            [4.0, 0.0, 1.5, -2.0, 5.0, 2.0],
            [-2.0, 3.0, 2.5, 4.0, 1.0, -6.0],
        ];
        let d = dataset(rows.iter().map(|r| sample(*r)).collect());
        let norm = fit_normalizer(&d).unwrap();
        for c in 0..6 {
            let m: f64 = rows.iter().map(|r| r[c]).sum::<f64>() / 3.0;
            let v: f64 = rows.iter().map(|r| (r[c] - m) * (r[c] - m)).sum::<f64>() / 3.0;
            assert!((norm.mean[c] - m).abs() < 1e-12);
            assert!((norm.std[c] - v.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_set_rejected() {
        let d = dataset(alloc::vec![]);
        assert!(fit_normalizer(&d).is_err());
    }
}
