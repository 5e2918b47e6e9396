//! Closed-loop actuator simulation: PID position control, a geared motor
//! with an optional series-elastic spring stack, and tracking reports with
//! per-cycle delay and peak-error analysis.
//!
//! Current-command convention: controllers and `plant_step` exchange the
//! torque-producing current, i.e. the measured current minus the idle
//! current. Zero command means zero torque. The idle current only appears on
//! the reporting side, where measured current = command + idle, so the
//! torque-from-measured-current identity holds exactly.

use crate::error::{Error, Result};

use alloc::vec::Vec;

use core::f64::consts::PI;

pub const DEFAULT_CONTROL_RATE_HZ: f64 = 100.0;
pub const DEFAULT_SUBSTEP_S: f64 = 1e-4;

const DEG: f64 = PI / 180.0;

/// Geared-motor constants and rigid-body defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorParams {
    pub motor_gear_ratio: f64,
    pub belt_ratio: f64,
    pub torque_constant_nm_per_a: f64,
    pub continuous_torque_nm: f64,
    pub peak_torque_nm: f64,
    pub peak_joint_speed_rad_s: f64,
    pub bus_voltage_v: f64,
    pub idle_current_a: f64,
    pub motion_range_deg: f64,
    pub load_inertia_kgm2: f64,
    pub load_damping_nms_per_rad: f64,
    pub reflected_motor_inertia_kgm2: f64,
    pub hard_stops: bool,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        ActuatorParams {
            motor_gear_ratio: 9.0,
            belt_ratio: 4.6,
            torque_constant_nm_per_a: 0.16,
            continuous_torque_nm: 82.8,
            peak_torque_nm: 220.8,
            peak_joint_speed_rad_s: 5.65,
            bus_voltage_v: 24.0,
            idle_current_a: 0.3,
            motion_range_deg: 50.0,
            load_inertia_kgm2: 0.05,
            load_damping_nms_per_rad: 0.5,
            reflected_motor_inertia_kgm2: 0.02,
            hard_stops: false,
        }
    }
}

impl ActuatorParams {
    pub fn total_ratio(&self) -> f64 {
        self.motor_gear_ratio * self.belt_ratio
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_torque_nm > self.continuous_torque_nm && self.continuous_torque_nm > 0.0) {
            return Err(Error::invalid("peak torque must exceed continuous torque > 0"));
        }
        Ok(())
    }
}

/// Axially stacked spring layers; stiffness adds linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpringStack {
    pub per_layer_stiffness_nm_per_deg: f64,
    pub layer_count: u32,
}

impl Default for SpringStack {
    fn default() -> Self {
        SpringStack {
            per_layer_stiffness_nm_per_deg: 7.5,
            layer_count: 3,
        }
    }
}

impl SpringStack {
    pub fn effective_stiffness_nm_per_deg(&self) -> f64 {
        self.layer_count as f64 * self.per_layer_stiffness_nm_per_deg
    }
}

/// Rigid transmission or series-elastic with a spring stack between the
/// transmission output and the joint.
#[derive(Debug, Clone, PartialEq)]
pub enum PlantMode {
    Rigid,
    Sea(SpringStack),
}

/// Joint and transmission kinematic state plus the last applied command.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub time_s: f64,
    pub joint_angle_deg: f64,
    pub joint_rate_dps: f64,
    pub trans_angle_deg: f64,
    pub trans_rate_dps: f64,
    pub commanded_current_a: f64,
    pub applied_torque_nm: f64,
}

impl PlantState {
    /// At rest with transmission matched to the joint (zero deflection).
    pub fn at_rest(joint_angle_deg: f64) -> Self {
        PlantState {
            time_s: 0.0,
            joint_angle_deg,
            joint_rate_dps: 0.0,
            trans_angle_deg: joint_angle_deg,
            trans_rate_dps: 0.0,
            commanded_current_a: 0.0,
            applied_torque_nm: 0.0,
        }
    }

    pub fn deflection_deg(&self) -> f64 {
        self.trans_angle_deg - self.joint_angle_deg
    }
}

/// PID gains in amperes per degree of error (and its integral/derivative).
#[derive(Debug, Clone, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub integral_clamp: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        PidGains {
            kp: 1.0,
            ki: 0.5,
            kd: 0.02,
            integral_clamp: 10.0,
        }
    }
}

/// Integral accumulator and derivative memory for one PID loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PidState {
    pub integral: f64,
    last_measured: Option<f64>,
}

/// Joint torque from measured current: `(i − idle) · kt · total ratio`,
/// clamped to the peak torque.
pub fn torque_from_current(current_a: f64, params: &ActuatorParams) -> f64 {
    let raw = (current_a - params.idle_current_a)
        * params.torque_constant_nm_per_a
        * params.total_ratio();
    raw.clamp(-params.peak_torque_nm, params.peak_torque_nm)
}

/// Spring-stack torque, exactly linear in deflection and layer count.
pub fn sea_torque(deflection_deg: f64, stack: &SpringStack) -> f64 {
    stack.effective_stiffness_nm_per_deg() * deflection_deg
}

/// Mechanical power with the rate given in degrees/second.
pub fn mech_power(torque_nm: f64, rate_dps: f64) -> f64 {
    torque_nm * rate_dps * DEG
}

/// One positional PID update with derivative on the measurement.
///
/// Returns the torque-producing current command, clamped so the resulting
/// torque stays within the peak.
pub fn pid_step(
    gains: &PidGains,
    reference_deg: f64,
    measured_deg: f64,
    dt: f64,
    state: &mut PidState,
    params: &ActuatorParams,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::invalid("pid dt must be positive"));
    }
    let error = reference_deg - measured_deg;
    state.integral = (state.integral + error * dt).clamp(-gains.integral_clamp, gains.integral_clamp);
    let derivative = match state.last_measured {
        Some(prev) => (measured_deg - prev) / dt,
        None => 0.0,
    };
    state.last_measured = Some(measured_deg);
    let raw = gains.kp * error + gains.ki * state.integral - gains.kd * derivative;
    let max_current = params.peak_torque_nm / (params.torque_constant_nm_per_a * params.total_ratio());
    Ok(raw.clamp(-max_current, max_current))
}

/// Torque produced by a torque-producing current command (idle already
/// removed), clamped to the peak.
fn command_torque(command_a: f64, params: &ActuatorParams) -> f64 {
    torque_from_current(command_a + params.idle_current_a, params)
}

fn rigid_accel(rate_rad: f64, torque: f64, params: &ActuatorParams) -> f64 {
    let j = params.load_inertia_kgm2 + params.reflected_motor_inertia_kgm2;
    (torque - params.load_damping_nms_per_rad * rate_rad) / j
}

/// Advance the plant by `dt` under a zero-order-hold current command.
pub fn plant_step(
    state: &mut PlantState,
    command_a: f64,
    dt: f64,
    params: &ActuatorParams,
    mode: &PlantMode,
) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::invalid("plant dt must be positive"));
    }
    let torque = command_torque(command_a, params);

    match mode {
        PlantMode::Rigid => {
            // y = [angle, rate] in radians; J y'' = tau - b y'.
            let a = state.joint_angle_deg * DEG;
            let w = state.joint_rate_dps * DEG;
            let f = |_: f64, y: [f64; 2]| [y[1], rigid_accel(y[1], torque, params)];
            let y = rk4_step(f, [a, w], dt);
            state.joint_angle_deg = y[0] / DEG;
            state.joint_rate_dps = y[1] / DEG;
            state.trans_angle_deg = state.joint_angle_deg;
            state.trans_rate_dps = state.joint_rate_dps;
        }
        PlantMode::Sea(stack) => {
            // y = [trans angle, trans rate, joint angle, joint rate] (rad).
            let k_rad = stack.effective_stiffness_nm_per_deg() / DEG;
            let jm = params.reflected_motor_inertia_kgm2;
            let jl = params.load_inertia_kgm2;
            let b = params.load_damping_nms_per_rad;
            let f = |_: f64, y: [f64; 4]| {
                let spring = k_rad * (y[0] - y[2]);
                [
                    y[1],
                    (torque - spring) / jm,
                    y[3],
                    (spring - b * y[3]) / jl,
                ]
            };
            let y0 = [
                state.trans_angle_deg * DEG,
                state.trans_rate_dps * DEG,
                state.joint_angle_deg * DEG,
                state.joint_rate_dps * DEG,
            ];
            let y = rk4_step(f, y0, dt);
            state.trans_angle_deg = y[0] / DEG;
            state.trans_rate_dps = y[1] / DEG;
            state.joint_angle_deg = y[2] / DEG;
            state.joint_rate_dps = y[3] / DEG;
        }
    }

    let speed_cap = params.peak_joint_speed_rad_s / DEG;
    state.joint_rate_dps = state.joint_rate_dps.clamp(-speed_cap, speed_cap);
    if params.hard_stops {
        let range = params.motion_range_deg;
        if state.joint_angle_deg.abs() > range {
            state.joint_angle_deg = state.joint_angle_deg.clamp(-range, range);
            state.joint_rate_dps = 0.0;
        }
    }

    state.time_s += dt;
    state.commanded_current_a = command_a;
    state.applied_torque_nm = torque;

    if !state.joint_angle_deg.is_finite() || !state.joint_rate_dps.is_finite() {
        return Err(Error::Numeric {
            time: state.time_s,
            message: alloc::string::String::from("plant state became non-finite"),
        });
    }
    Ok(())
}

/// Classic 4th-order Runge-Kutta step for a fixed-size first-order system.
fn rk4_step<const N: usize>(f: impl Fn(f64, [f64; N]) -> [f64; N], y: [f64; N], dt: f64) -> [f64; N] {
    let add = |y: [f64; N], k: [f64; N], s: f64| {
        let mut out = y;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(0.0, y);
    let k2 = f(dt / 2.0, add(y, k1, dt / 2.0));
    let k3 = f(dt / 2.0, add(y, k2, dt / 2.0));
    let k4 = f(dt, add(y, k3, dt));
    let mut out = y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Kinetic plus spring energy of an undamped SEA plant, joules.
pub fn sea_energy(state: &PlantState, params: &ActuatorParams, stack: &SpringStack) -> f64 {
    let wt = state.trans_rate_dps * DEG;
    let wj = state.joint_rate_dps * DEG;
    let k_rad = stack.effective_stiffness_nm_per_deg() / DEG;
    let d = state.deflection_deg() * DEG;
    0.5 * params.reflected_motor_inertia_kgm2 * wt * wt
        + 0.5 * params.load_inertia_kgm2 * wj * wj
        + 0.5 * k_rad * d * d
}

/// Per-cycle tracking statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStats {
    pub cycle: usize,
    pub delay_pct: f64,
    pub peak_err_pct: f64,
    pub peak_torque_nm: f64,
    pub peak_power_w: f64,
}

/// Closed-loop tracking result at the control rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub time_s: Vec<f64>,
    pub alpha_ref_deg: Vec<f64>,
    pub alpha_meas_deg: Vec<f64>,
    pub torque_nm: Vec<f64>,
    pub power_w: Vec<f64>,
    /// Measured current, command plus idle.
    pub current_a: Vec<f64>,
    pub cycles: Vec<CycleStats>,
    pub samples_per_cycle: usize,
}

impl TrackingReport {
    pub fn mean_abs_torque_nm(&self) -> f64 {
        self.torque_nm.iter().map(|t| t.abs()).sum::<f64>() / self.torque_nm.len() as f64
    }
}

/// Estimate the dominant period of a trace in samples via circular
/// autocorrelation of the mean-removed signal. Returns `None` for a
/// (near-)constant trace.
fn estimate_period(signal: &[f64]) -> Option<usize> {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = signal.iter().map(|s| s - mean).collect();
    let power: f64 = centered.iter().map(|s| s * s).sum();
    if power / (n as f64) < 1e-12 {
        return None;
    }
    let mut best_lag = 0;
    let mut best = f64::NEG_INFINITY;
    for lag in 2..=n / 2 {
        let mut acc = 0.0;
        for i in 0..n {
            acc += centered[i] * centered[(i + lag) % n];
        }
        if acc > best {
            best = acc;
            best_lag = lag;
        }
    }
    if best <= 0.0 {
        None
    } else {
        Some(best_lag)
    }
}

/// Circular cross-correlation delay of `measured` behind `reference`, in
/// samples, refined by parabolic interpolation around the best lag.
fn circular_delay_samples(reference: &[f64], measured: &[f64]) -> f64 {
    let n = reference.len();
    let center = |s: &[f64]| {
        let mean = s.iter().sum::<f64>() / n as f64;
        s.iter().map(|x| x - mean).collect::<Vec<f64>>()
    };
    let reference = center(reference);
    let measured = center(measured);
    let xcorr = |lag: usize| {
        let mut acc = 0.0;
        for i in 0..n {
            acc += reference[i] * measured[(i + lag) % n];
        }
        acc
    };
    let mut best_lag = 0usize;
    let mut best = f64::NEG_INFINITY;
    for lag in 0..n {
        let c = xcorr(lag);
        if c > best {
            best = c;
            best_lag = lag;
        }
    }
    // Parabolic refinement with circular neighbors.
    let c0 = xcorr((best_lag + n - 1) % n);
    let c1 = best;
    let c2 = xcorr((best_lag + 1) % n);
    let denom = c0 - 2.0 * c1 + c2;
    let frac = if denom.abs() < 1e-30 {
        0.0
    } else {
        0.5 * (c0 - c2) / denom
    };
    // `measured[(i + lag) % n]` peaking at `lag` means measured lags the
    // reference by `lag` samples. A sub-sample lead at lag 0 is floored: the
    // loop cannot anticipate the reference.
    let refined = best_lag as f64 + frac;
    if best_lag == 0 && refined < 0.0 {
        0.0
    } else {
        crate::rem_euclid_f(refined, n as f64)
    }
}

fn peak_abs(signal: &[f64]) -> f64 {
    signal.iter().fold(0.0f64, |m, s| m.max(s.abs()))
}

/// Run the closed loop over a uniform-rate reference angle trace.
///
/// The controller runs at the trace rate with the physics integrated in
/// `substep_s` increments under a zero-order-hold current command.
pub fn run_tracking(
    reference: &[(f64, f64)],
    params: &ActuatorParams,
    gains: &PidGains,
    mode: &PlantMode,
) -> Result<TrackingReport> {
    params.validate()?;
    if reference.len() < 2 {
        return Err(Error::invalid("reference trace needs at least two samples"));
    }
    let tick = reference[1].0 - reference[0].0;
    if !(tick > 0.0) {
        return Err(Error::invalid("reference timestamps must increase"));
    }
    for w in reference.windows(2) {
        if ((w[1].0 - w[0].0) - tick).abs() > 1e-6 * tick {
            return Err(Error::invalid("reference trace must be uniform-rate"));
        }
    }

    let ref_angles: Vec<f64> = reference.iter().map(|&(_, a)| a).collect();
    let period = estimate_period(&ref_angles);
    let samples_per_cycle = period.unwrap_or(reference.len());
    if reference.len() < samples_per_cycle {
        return Err(Error::invalid("reference trace shorter than one gait cycle"));
    }

    let substeps = libm::round(tick / DEFAULT_SUBSTEP_S).max(1.0) as usize;
    let dt = tick / substeps as f64;

    let mut plant = PlantState::at_rest(reference[0].1);
    let mut pid = PidState::default();
    let n = reference.len();
    let mut report = TrackingReport {
        time_s: Vec::with_capacity(n),
        alpha_ref_deg: Vec::with_capacity(n),
        alpha_meas_deg: Vec::with_capacity(n),
        torque_nm: Vec::with_capacity(n),
        power_w: Vec::with_capacity(n),
        current_a: Vec::with_capacity(n),
        cycles: Vec::new(),
        samples_per_cycle,
    };

    for &(t, alpha_ref) in reference {
        let measured = plant.joint_angle_deg;
        let command = pid_step(gains, alpha_ref, measured, tick, &mut pid, params)?;
        for _ in 0..substeps {
            plant_step(&mut plant, command, dt, params, mode)?;
        }
        report.time_s.push(t);
        report.alpha_ref_deg.push(alpha_ref);
        report.alpha_meas_deg.push(measured);
        report.torque_nm.push(plant.applied_torque_nm);
        report
            .power_w
            .push(mech_power(plant.applied_torque_nm, plant.joint_rate_dps));
        report.current_a.push(command + params.idle_current_a);
    }

    let p = samples_per_cycle;
    let full_cycles = n / p;
    for c in 0..full_cycles {
        let r = &report.alpha_ref_deg[c * p..(c + 1) * p];
        let m = &report.alpha_meas_deg[c * p..(c + 1) * p];
        let delay_pct = if period.is_some() {
            circular_delay_samples(r, m) / p as f64 * 100.0
        } else {
            0.0
        };
        let peak_ref = peak_abs(r);
        let peak_err_pct = if peak_ref > 0.0 {
            (peak_abs(m) - peak_ref) / peak_ref * 100.0
        } else {
            0.0
        };
        report.cycles.push(CycleStats {
            cycle: c,
            delay_pct,
            peak_err_pct,
            peak_torque_nm: peak_abs(&report.torque_nm[c * p..(c + 1) * p]),
            peak_power_w: peak_abs(&report.power_w[c * p..(c + 1) * p]),
        });
    }
    Ok(report)
}
