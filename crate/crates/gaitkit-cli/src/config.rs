//! Flat key-value run configuration.
//!
//! The format is plain text, one `section.key = value` assignment per line.
//! Blank lines and `#` comments are ignored. Unknown keys are rejected.
//! Every field has a default, so an empty file is a valid configuration;
//! [`RunConfig::render`] emits the fully-resolved effective configuration,
//! and feeding that text back through [`RunConfig::parse`] reproduces the
//! identical configuration.

use std::fmt::Write as _;

use gaitkit_core::gaitdata::GeneratorConfig;
use gaitkit_core::mlpnet::{NetworkConfig, PhaseEncoding, TrainHyper};
use gaitkit_core::plantsim::{ActuatorParams, PidGains, PlantMode, SpringStack};
use gaitkit_core::rtpipe::{DEFAULT_REJECTION_LIMIT, DEFAULT_SAFETY_FACTOR};
use gaitkit_core::{Error, Result};

/// Cross-validation settings not owned by [`TrainHyper`].
#[derive(Debug, Clone, PartialEq)]
pub struct FoldConfig {
    pub folds: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for FoldConfig {
    fn default() -> Self {
        FoldConfig {
            folds: 5,
            validation_fraction: 0.30,
            seed: 0,
        }
    }
}

/// Streaming-filter settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub safety_factor: f64,
    pub rejection_limit: u32,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            safety_factor: DEFAULT_SAFETY_FACTOR,
            rejection_limit: DEFAULT_REJECTION_LIMIT,
        }
    }
}

/// Plant selection: rigid joint or series-elastic drivetrain.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    pub mode: String,
    pub spring_layers: u32,
    pub spring_stiffness_nm_per_deg: f64,
    pub hard_stops: bool,
}

impl Default for PlantConfig {
    fn default() -> Self {
        let stack = SpringStack::default();
        PlantConfig {
            mode: "rigid".to_string(),
            spring_layers: stack.layer_count,
            spring_stiffness_nm_per_deg: stack.per_layer_stiffness_nm_per_deg,
            hard_stops: false,
        }
    }
}

/// Tracking-experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub speed_mps: f64,
    pub cycles: usize,
    pub rate_hz: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            speed_mps: 1.2,
            cycles: 30,
            rate_hz: 100.0,
        }
    }
}

/// Fully-resolved run configuration covering every subcommand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub generator: GeneratorConfig,
    pub network: NetworkConfig,
    pub training: TrainHyper,
    pub cv: FoldConfig,
    pub filter: FilterConfig,
    pub plant: PlantConfig,
    pub gains: PidGains,
    pub simulate: SimulateConfig,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("{key}: expected a number, got `{value}`")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| parse_err(line, format!("{key}: expected a non-negative integer, got `{value}`")))
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| parse_err(line, format!("{key}: expected a non-negative integer, got `{value}`")))
}

fn parse_u32(line: usize, key: &str, value: &str) -> Result<u32> {
    value
        .parse::<u32>()
        .map_err(|_| parse_err(line, format!("{key}: expected a non-negative integer, got `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_err(
            line,
            format!("{key}: expected `true` or `false`, got `{value}`"),
        )),
    }
}

fn parse_speeds(line: usize, value: &str) -> Result<Vec<f64>> {
    let speeds: Result<Vec<f64>> = value
        .split(',')
        .map(|s| parse_f64(line, "generator.speeds_mps", s.trim()))
        .collect();
    let speeds = speeds?;
    if speeds.is_empty() {
        return Err(parse_err(line, "generator.speeds_mps: empty speed list"));
    }
    Ok(speeds)
}

impl RunConfig {
    /// Parse `section.key = value` lines over the defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(lineno, format!("expected `key = value`, got `{line}`")))?;
            cfg.apply(lineno, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Override every seeded section with one global seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.generator.seed = seed;
        self.network.seed = seed;
        self.cv.seed = seed;
    }

    fn apply(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "generator.speeds_mps" => self.generator.speeds_mps = parse_speeds(line, value)?,
            "generator.cycles_per_speed" => {
                self.generator.cycles_per_speed = parse_usize(line, key, value)?
            }
            "generator.sample_rate_hz" => {
                self.generator.sample_rate_hz = parse_f64(line, key, value)?
            }
            "generator.noise_angle_deg" => {
                self.generator.noise.angle_deg = parse_f64(line, key, value)?
            }
            "generator.noise_rate_dps" => {
                self.generator.noise.rate_dps = parse_f64(line, key, value)?
            }
            "generator.seed" => self.generator.seed = parse_u64(line, key, value)?,
            "network.hidden_width" => self.network.hidden_width = parse_usize(line, key, value)?,
            "network.hidden_per_stage" => {
                self.network.hidden_per_stage = parse_usize(line, key, value)?
            }
            "network.stage2_sees_hidden" => {
                self.network.stage2_sees_hidden = parse_bool(line, key, value)?
            }
            "network.seed" => self.network.seed = parse_u64(line, key, value)?,
            "training.learning_rate" => self.training.learning_rate = parse_f64(line, key, value)?,
            "training.weight_decay" => self.training.weight_decay = parse_f64(line, key, value)?,
            "training.epochs" => self.training.epochs = parse_usize(line, key, value)?,
            "training.batch_size" => self.training.batch_size = parse_usize(line, key, value)?,
            "training.lambda_mid" => self.training.lambda_mid = parse_f64(line, key, value)?,
            "training.lambda_fin" => self.training.lambda_fin = parse_f64(line, key, value)?,
            "training.decoupled_decay" => {
                self.training.decoupled_decay = parse_bool(line, key, value)?
            }
            "training.phase_encoding" => {
                self.training.phase_encoding = match value {
                    "raw" => PhaseEncoding::RawPercent,
                    "sincos" => PhaseEncoding::SinCos,
                    _ => {
                        return Err(parse_err(
                            line,
                            format!("{key}: expected `raw` or `sincos`, got `{value}`"),
                        ))
                    }
                };
                self.network.middle_width = self.training.phase_encoding.middle_width();
            }
            "training.folds" => self.cv.folds = parse_usize(line, key, value)?,
            "training.validation_fraction" => {
                self.cv.validation_fraction = parse_f64(line, key, value)?
            }
            "training.seed" => self.cv.seed = parse_u64(line, key, value)?,
            "filter.safety_factor" => self.filter.safety_factor = parse_f64(line, key, value)?,
            "filter.rejection_limit" => self.filter.rejection_limit = parse_u32(line, key, value)?,
            "plant.mode" => {
                if value != "rigid" && value != "sea" {
                    return Err(parse_err(
                        line,
                        format!("plant.mode: expected `rigid` or `sea`, got `{value}`"),
                    ));
                }
                self.plant.mode = value.to_string();
            }
            "plant.spring_layers" => self.plant.spring_layers = parse_u32(line, key, value)?,
            "plant.spring_stiffness_nm_per_deg" => {
                self.plant.spring_stiffness_nm_per_deg = parse_f64(line, key, value)?
            }
            "plant.hard_stops" => self.plant.hard_stops = parse_bool(line, key, value)?,
            "gains.kp" => self.gains.kp = parse_f64(line, key, value)?,
            "gains.ki" => self.gains.ki = parse_f64(line, key, value)?,
            "gains.kd" => self.gains.kd = parse_f64(line, key, value)?,
            "gains.integral_clamp" => self.gains.integral_clamp = parse_f64(line, key, value)?,
            "simulate.speed_mps" => self.simulate.speed_mps = parse_f64(line, key, value)?,
            "simulate.cycles" => self.simulate.cycles = parse_usize(line, key, value)?,
            "simulate.rate_hz" => self.simulate.rate_hz = parse_f64(line, key, value)?,
            _ => return Err(parse_err(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Render the fully-resolved effective configuration.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let speeds = self
            .generator
            .speeds_mps
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(s, "generator.speeds_mps = {speeds}");
        let _ = writeln!(
            s,
            "generator.cycles_per_speed = {}",
            self.generator.cycles_per_speed
        );
        let _ = writeln!(
            s,
            "generator.sample_rate_hz = {}",
            self.generator.sample_rate_hz
        );
        let _ = writeln!(
            s,
            "generator.noise_angle_deg = {}",
            self.generator.noise.angle_deg
        );
        let _ = writeln!(
            s,
            "generator.noise_rate_dps = {}",
            self.generator.noise.rate_dps
        );
        let _ = writeln!(s, "generator.seed = {}", self.generator.seed);
        let _ = writeln!(s, "network.hidden_width = {}", self.network.hidden_width);
        let _ = writeln!(
            s,
            "network.hidden_per_stage = {}",
            self.network.hidden_per_stage
        );
        let _ = writeln!(
            s,
            "network.stage2_sees_hidden = {}",
            self.network.stage2_sees_hidden
        );
        let _ = writeln!(s, "network.seed = {}", self.network.seed);
        let _ = writeln!(s, "training.learning_rate = {}", self.training.learning_rate);
        let _ = writeln!(s, "training.weight_decay = {}", self.training.weight_decay);
        let _ = writeln!(s, "training.epochs = {}", self.training.epochs);
        let _ = writeln!(s, "training.batch_size = {}", self.training.batch_size);
        let _ = writeln!(s, "training.lambda_mid = {}", self.training.lambda_mid);
        let _ = writeln!(s, "training.lambda_fin = {}", self.training.lambda_fin);
        let _ = writeln!(
            s,
            "training.decoupled_decay = {}",
            self.training.decoupled_decay
        );
        let _ = writeln!(
            s,
            "training.phase_encoding = {}",
            match self.training.phase_encoding {
                PhaseEncoding::RawPercent => "raw",
                PhaseEncoding::SinCos => "sincos",
            }
        );
        let _ = writeln!(s, "training.folds = {}", self.cv.folds);
        let _ = writeln!(
            s,
            "training.validation_fraction = {}",
            self.cv.validation_fraction
        );
        let _ = writeln!(s, "training.seed = {}", self.cv.seed);
        let _ = writeln!(s, "filter.safety_factor = {}", self.filter.safety_factor);
        let _ = writeln!(s, "filter.rejection_limit = {}", self.filter.rejection_limit);
        let _ = writeln!(s, "plant.mode = {}", self.plant.mode);
        let _ = writeln!(s, "plant.spring_layers = {}", self.plant.spring_layers);
        let _ = writeln!(
            s,
            "plant.spring_stiffness_nm_per_deg = {}",
            self.plant.spring_stiffness_nm_per_deg
        );
        let _ = writeln!(s, "plant.hard_stops = {}", self.plant.hard_stops);
        let _ = writeln!(s, "gains.kp = {}", self.gains.kp);
        let _ = writeln!(s, "gains.ki = {}", self.gains.ki);
        let _ = writeln!(s, "gains.kd = {}", self.gains.kd);
        let _ = writeln!(s, "gains.integral_clamp = {}", self.gains.integral_clamp);
        let _ = writeln!(s, "simulate.speed_mps = {}", self.simulate.speed_mps);
        let _ = writeln!(s, "simulate.cycles = {}", self.simulate.cycles);
        let _ = writeln!(s, "simulate.rate_hz = {}", self.simulate.rate_hz);
        s
    }

    /// Plant mode with actuator hard-stop override applied.
    pub fn plant_mode(&self) -> PlantMode {
        if self.plant.mode == "sea" {
            PlantMode::Sea(SpringStack {
                per_layer_stiffness_nm_per_deg: self.plant.spring_stiffness_nm_per_deg,
                layer_count: self.plant.spring_layers,
            })
        } else {
            PlantMode::Rigid
        }
    }

    /// Actuator parameters with the configured hard-stop flag.
    pub fn actuator_params(&self) -> ActuatorParams {
        ActuatorParams {
            hard_stops: self.plant.hard_stops,
            ..ActuatorParams::default()
        }
    }
}
