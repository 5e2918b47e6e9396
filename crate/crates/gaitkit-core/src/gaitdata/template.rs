//! Closed-form kinematic template: a deterministic, speed-modulated mapping
//! from (speed, phase) to shank and ankle kinematics.

use super::MOTION_RANGE_DEG;
use crate::error::{Error, Result};

use core::f64::consts::PI;

/// Gait cycle duration T(v) in seconds: `max(0.4, 1.4 - 0.2 v)`.
pub fn cycle_duration_s(speed_mps: f64) -> f64 {
    let t = 1.4 - 0.2 * speed_mps;
    if t < 0.4 {
        0.4
    } else {
        t
    }
}

/// Kinematic fields of one template point (no timestamp).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicPoint {
    pub speed_mps: f64,
    pub phase_pct: f64,
    pub shank_angles_deg: [f64; 3],
    pub shank_rates_dps: [f64; 3],
    pub ankle_angle_deg: f64,
    pub ankle_rate_dps: f64,
}

/// Evaluate the closed-form gait kinematics at one (speed, phase) point.
///
/// With `ph = phase/100` and `T = cycle_duration_s(v)`:
///
/// - `alpha = clip(v (10 sin(2 pi ph) + 4 sin(4 pi ph + 0.7)), +-50)` degrees
/// - `theta = 15 v sin(2 pi ph - 0.3)`, `phi = 0.2 theta`, `psi = 0.1 theta`
///
/// Rate channels are the exact analytic time derivatives (`d/d ph * 1/T`);
/// where the ankle angle sits on the clip boundary its rate is zero.
pub fn gait_template(speed_mps: f64, phase_pct: f64) -> Result<KinematicPoint> {
    if !(speed_mps >= 0.0) || !speed_mps.is_finite() {
        return Err(Error::invalid("speed must be finite and >= 0"));
    }
    if !(0.0..100.0).contains(&phase_pct) {
        return Err(Error::invalid("phase must lie in [0, 100)"));
    }

    let v = speed_mps;
    let ph = phase_pct / 100.0;
    let period = cycle_duration_s(v);

    let alpha_raw = v * (10.0 * libm::sin(2.0 * PI * ph) + 4.0 * libm::sin(4.0 * PI * ph + 0.7));
    let (alpha, alpha_rate) = if libm::fabs(alpha_raw) > MOTION_RANGE_DEG {
        (
            MOTION_RANGE_DEG * if alpha_raw > 0.0 { 1.0 } else { -1.0 },
            0.0,
        )
    } else {
        let d_dph = v
            * (10.0 * 2.0 * PI * libm::cos(2.0 * PI * ph)
                + 4.0 * 4.0 * PI * libm::cos(4.0 * PI * ph + 0.7));
        (alpha_raw, d_dph / period)
    };

    let theta = 15.0 * v * libm::sin(2.0 * PI * ph - 0.3);
    let theta_rate = 15.0 * v * 2.0 * PI * libm::cos(2.0 * PI * ph - 0.3) / period;

    Ok(KinematicPoint {
        speed_mps: v,
        phase_pct,
        shank_angles_deg: [theta, 0.2 * theta, 0.1 * theta],
        shank_rates_dps: [theta_rate, 0.2 * theta_rate, 0.1 * theta_rate],
        ankle_angle_deg: alpha,
        ankle_rate_dps: alpha_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_speed_is_standing_posture() {
        for p in [0.0, 13.7, 50.0, 99.9] {
            let k = gait_template(0.0, p).unwrap();
            assert_eq!(k.shank_angles_deg, [0.0; 3]);
            assert_eq!(k.shank_rates_dps, [0.0; 3]);
            assert_eq!(k.ankle_angle_deg, 0.0);
            assert_eq!(k.ankle_rate_dps, 0.0);
        }
    }

    #[test]
    fn periodic_in_phase() {
        for v in [0.5, 1.5, 3.0, 4.5] {
            let a = gait_template(v, 0.0).unwrap();
            let b = gait_template(v, 100.0 - 1e-9).unwrap();
            assert!((a.ankle_angle_deg - b.ankle_angle_deg).abs() < 1e-6);
            assert!((a.shank_angles_deg[0] - b.shank_angles_deg[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(gait_template(-0.1, 10.0).is_err());
        assert!(gait_template(1.0, 100.0).is_err());
        assert!(gait_template(1.0, -0.001).is_err());
        assert!(gait_template(f64::NAN, 10.0).is_err());
    }

    #[test]
    fn ankle_clipped_to_motion_range() {
        // v = 4.5 exceeds +-50 deg unclipped around the positive peak.
        let mut clipped = 0;
        for i in 0..1000 {
            let k = gait_template(4.5, i as f64 / 10.0).unwrap();
            assert!(k.ankle_angle_deg.abs() <= MOTION_RANGE_DEG);
            if k.ankle_angle_deg.abs() == MOTION_RANGE_DEG {
                assert_eq!(k.ankle_rate_dps, 0.0);
                clipped += 1;
            }
        }
        assert!(clipped > 0);
    }

    /// Frozen values from an independent high-precision (50-digit) evaluation
    /// of the closed form at (v, p) = (1.5, 25.0).
    #[test]
    fn matches_high_precision_reference_point() {
        let k = gait_template(1.5, 25.0).unwrap();
        assert!((k.ankle_angle_deg - ORACLE_ALPHA_DEG).abs() < 1e-12);
        assert!((k.ankle_rate_dps - ORACLE_ALPHA_RATE_DPS).abs() < 1e-10);
        assert!((k.shank_angles_deg[0] - ORACLE_THETA_DEG).abs() < 1e-12);
        assert!((k.shank_rates_dps[0] - ORACLE_THETA_RATE_DPS).abs() < 1e-10);
        assert!((k.shank_angles_deg[1] - 0.2 * ORACLE_THETA_DEG).abs() < 1e-12);
        assert!((k.shank_angles_deg[2] - 0.1 * ORACLE_THETA_DEG).abs() < 1e-12);
    }

    const ORACLE_ALPHA_DEG: f64 = 11.134693876573854;
    const ORACLE_ALPHA_RATE_DPS: f64 = -52.42522029225813;
    const ORACLE_THETA_DEG: f64 = 21.495071005326135;
    const ORACLE_THETA_RATE_DPS: f64 = 37.980168145960986;
}
