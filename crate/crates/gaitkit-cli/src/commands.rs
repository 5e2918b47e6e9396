//! Subcommand implementations.
//!
//! Output layout under `--out-dir`:
//! `data/` datasets and generated DOE tables, `models/` weights plus
//! normalizer sidecars, `reports/` metric and trace CSVs, `plots/` SVG
//! charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;

use gaitkit_core::doestats::{correlation_report, demo_table, DoeTable};
use gaitkit_core::evalkit::{
    angle_threshold_report, regression_metrics, relative_error_buckets, DIMENSION_NAMES,
};
use gaitkit_core::gaitdata::{
    gait_template, generate_dataset, kfold_split, Dataset, Normalizer, IMU_CHANNELS, LABEL_DIMS,
};
use gaitkit_core::mlpnet::{train, BranchedNetwork, PhaseEncoding};
use gaitkit_core::plantsim::run_tracking;
use gaitkit_core::rtpipe::{estimate_lipschitz_bounds, run_stream};
use gaitkit_core::{Clock, Error, NullClock, Result};

use crate::config::RunConfig;
use crate::io;
use crate::plots::{line_chart, Series};

/// Wall clock backed by [`std::time::Instant`].
pub struct InstantClock {
    start: Instant,
}

impl InstantClock {
    pub fn new() -> Self {
        InstantClock {
            start: Instant::now(),
        }
    }
}

impl Default for InstantClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for InstantClock {
    fn now_us(&mut self) -> u64 {
        self.start.elapsed().as_micros() as u64
    }
}

fn status(msg: &str) {
    eprintln!("gaitkit: {msg}");
}

fn default_data_path(out_dir: &Path) -> PathBuf {
    out_dir.join("data/dataset.csv")
}

/// `gen-data`: synthesize the dataset and write `data/dataset.csv`.
pub fn gen_data(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let dataset = generate_dataset(&cfg.generator)?;
    let path = default_data_path(out_dir);
    io::save_dataset(&path, &dataset)?;
    status(&format!(
        "wrote {} samples ({} speeds) to {}",
        dataset.len(),
        cfg.generator.speeds_mps.len(),
        path.display()
    ));
    Ok(())
}

/// `train`: cross-validated training; writes per-fold weights, normalizer
/// sidecars, and the loss history.
pub fn train_cmd(cfg: &RunConfig, out_dir: &Path, data: Option<&Path>) -> Result<()> {
    let data_path = data.map(PathBuf::from).unwrap_or(default_data_path(out_dir));
    let dataset = io::load_dataset(&data_path)?;
    let plan = kfold_split(&dataset, cfg.cv.folds, cfg.cv.validation_fraction, cfg.cv.seed)?;
    let mut clock = InstantClock::new();
    let outcome = train(&dataset, &plan, &cfg.network, &cfg.training, &mut clock)?;

    for model in &outcome.models {
        let w = out_dir.join(format!("models/fold{}.gmlp", model.fold));
        io::save_network(&w, &model.network)?;
        io::save_normalizer(
            &out_dir.join(format!("models/fold{}.norm", model.fold)),
            &model.normalizer,
        )?;
        status(&format!("wrote {}", w.display()));
    }

    let mut epochs = String::from("fold,epoch,train_middle,train_final,val_middle,val_final\n");
    for r in &outcome.report.epochs {
        let _ = writeln!(
            epochs,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.fold, r.epoch, r.train_middle, r.train_final, r.val_middle, r.val_final
        );
    }
    io::write_text(&out_dir.join("reports/train-epochs.csv"), &epochs)?;

    let mut summary = String::from("fold,best_epoch,test_middle,test_final\n");
    for t in &outcome.report.tests {
        let _ = writeln!(
            summary,
            "{},{},{:.16e},{:.16e}",
            t.fold, t.best_epoch, t.test_middle, t.test_final
        );
    }
    let (mid, fin) = outcome.report.mean_test_losses();
    let _ = writeln!(summary, "mean,,{mid:.16e},{fin:.16e}");
    io::write_text(&out_dir.join("reports/train-summary.csv"), &summary)?;
    status(&format!(
        "{} folds trained; mean test loss middle {mid:.4} final {fin:.4}",
        outcome.models.len()
    ));
    Ok(())
}

/// Predict the output 4-vector `[v, p, alpha, dalpha]` for a set of samples.
pub fn predict(
    network: &BranchedNetwork,
    normalizer: &Normalizer,
    encoding: PhaseEncoding,
    dataset: &Dataset,
    indices: &[usize],
) -> Result<(Vec<[f64; LABEL_DIMS]>, Vec<[f64; LABEL_DIMS]>)> {
    let mut x = Array2::zeros((indices.len(), IMU_CHANNELS));
    let mut targets = Vec::with_capacity(indices.len());
    for (row, &i) in indices.iter().enumerate() {
        let s = &dataset.samples[i];
        for (c, v) in normalizer.apply(s).into_iter().enumerate() {
            x[[row, c]] = v;
        }
        targets.push(s.labels());
    }
    let (mid, fin) = network.forward_batch(x.view())?;
    let mut preds = Vec::with_capacity(indices.len());
    for row in 0..indices.len() {
        let mid_row: Vec<f64> = mid.row(row).to_vec();
        let (v, p) = encoding.decode(&mid_row);
        preds.push([
            v,
            p.rem_euclid(100.0),
            fin[[row, 0]],
            fin[[row, 1]],
        ]);
    }
    Ok((preds, targets))
}

/// `eval`: held-out metrics of the trained fold models; writes
/// `reports/metrics.csv` and `reports/buckets.csv`.
pub fn eval_cmd(cfg: &RunConfig, out_dir: &Path, data: Option<&Path>) -> Result<()> {
    let data_path = data.map(PathBuf::from).unwrap_or(default_data_path(out_dir));
    let dataset = io::load_dataset(&data_path)?;
    let plan = kfold_split(&dataset, cfg.cv.folds, cfg.cv.validation_fraction, cfg.cv.seed)?;

    let mut metrics = String::from("fold,dimension,mse,rmse,mae\n");
    let mut mean_rmse = [0.0f64; LABEL_DIMS];
    let mut all_preds = Vec::new();
    let mut all_targets = Vec::new();
    for (fold, round) in plan.rounds.iter().enumerate() {
        let network = io::load_network(&out_dir.join(format!("models/fold{fold}.gmlp")))?;
        let normalizer = io::load_normalizer(&out_dir.join(format!("models/fold{fold}.norm")))?;
        let (preds, targets) = predict(
            &network,
            &normalizer,
            cfg.training.phase_encoding,
            &dataset,
            &round.test,
        )?;
        let m = regression_metrics(&preds, &targets)?;
        for d in 0..LABEL_DIMS {
            let _ = writeln!(
                metrics,
                "{},{},{:.16e},{:.16e},{:.16e}",
                fold, DIMENSION_NAMES[d], m.mse[d], m.rmse[d], m.mae[d]
            );
            mean_rmse[d] += m.rmse[d] / plan.rounds.len() as f64;
        }
        all_preds.extend(preds);
        all_targets.extend(targets);
    }
    for d in 0..LABEL_DIMS {
        let _ = writeln!(metrics, "mean,{},,{:.16e},", DIMENSION_NAMES[d], mean_rmse[d]);
    }
    io::write_text(&out_dir.join("reports/metrics.csv"), &metrics)?;

    let thresholds = [5.0, 10.0, 15.0, 20.0];
    let buckets = relative_error_buckets(&all_preds, &all_targets, &thresholds, 1.0)?;
    let mut text = String::from("dimension,threshold_pct,fraction\n");
    for report in &buckets {
        for &(thr, frac) in &report.buckets {
            let _ = writeln!(text, "{},{},{:.16e}", report.dimension, thr, frac);
        }
    }
    let split = angle_threshold_report(&all_preds, &all_targets, 15.0, &thresholds, 1.0)?;
    for &(thr, frac) in &split.above[2].buckets {
        let _ = writeln!(text, "alpha_above_15deg,{},{:.16e}", thr, frac);
    }
    io::write_text(&out_dir.join("reports/buckets.csv"), &text)?;
    status(&format!(
        "mean RMSE: v {:.3} m/s, p {:.3} %, alpha {:.3} deg, dalpha {:.3} deg/s",
        mean_rmse[0], mean_rmse[1], mean_rmse[2], mean_rmse[3]
    ));
    Ok(())
}

/// `infer`: stream a trace through normalize → forward → filter; writes
/// `reports/stream.csv`.
///
/// Latency is reported as zero unless `measure_latency` is set, keeping the
/// default file output bit-reproducible.
pub fn infer_cmd(
    cfg: &RunConfig,
    out_dir: &Path,
    data: Option<&Path>,
    model: Option<&Path>,
    measure_latency: bool,
) -> Result<()> {
    let data_path = data.map(PathBuf::from).unwrap_or(default_data_path(out_dir));
    let dataset = io::load_dataset(&data_path)?;
    let model_path = model
        .map(PathBuf::from)
        .unwrap_or(out_dir.join("models/fold0.gmlp"));
    let network = io::load_network(&model_path)?;
    let normalizer = io::load_normalizer(&model_path.with_extension("norm"))?;
    let bounds = estimate_lipschitz_bounds(&dataset, cfg.filter.safety_factor)?;

    // Each trial restarts its time axis at zero, so it is one independent
    // stream: filter state does not carry across trials.
    let mut ticks = Vec::with_capacity(dataset.len());
    let mut real_clock = InstantClock::new();
    let mut null_clock = NullClock;
    for range in dataset.trial_ranges() {
        let trial = Dataset {
            samples: dataset.samples[range].to_vec(),
            source_tag: dataset.source_tag.clone(),
            sample_rate_hz: dataset.sample_rate_hz,
        };
        let clock: &mut dyn Clock = if measure_latency {
            &mut real_clock
        } else {
            &mut null_clock
        };
        ticks.extend(run_stream(
            &network,
            &normalizer,
            &trial,
            &bounds,
            cfg.generator.sample_rate_hz,
            clock,
        )?);
    }
    io::write_text(&out_dir.join("reports/stream.csv"), &io::write_stream_csv(&ticks))?;
    let rejected: u32 = ticks.iter().map(|t| t.rejected_dims).sum();
    status(&format!(
        "streamed {} ticks, {} dimension clamps",
        ticks.len(),
        rejected
    ));
    Ok(())
}

/// Build the closed-loop reference trace: `cycles` noise-free template
/// cycles of ankle angle at the configured speed and rate.
pub fn reference_trace(speed_mps: f64, cycles: usize, rate_hz: f64) -> Result<Vec<(f64, f64)>> {
    if !(rate_hz > 0.0) || cycles == 0 {
        return Err(Error::InvalidArgument(
            "simulate needs a positive rate and at least one cycle".to_string(),
        ));
    }
    let period = gaitkit_core::gaitdata::cycle_duration_s(speed_mps);
    let per_cycle = (period * rate_hz).round() as usize;
    if per_cycle < 2 {
        return Err(Error::InvalidArgument(
            "sample rate too low for one gait cycle".to_string(),
        ));
    }
    let mut trace = Vec::with_capacity(per_cycle * cycles);
    for i in 0..per_cycle * cycles {
        let t = i as f64 / rate_hz;
        let phase = (i % per_cycle) as f64 / per_cycle as f64 * 100.0;
        let point = gait_template(speed_mps, phase)?;
        trace.push((t, point.ankle_angle_deg));
    }
    Ok(trace)
}

/// `simulate`: closed-loop tracking of the gait reference; writes
/// `reports/tracking.csv` and `reports/cycles.csv`.
pub fn simulate_cmd(cfg: &RunConfig, out_dir: &Path, speed: Option<f64>) -> Result<()> {
    let speed = speed.unwrap_or(cfg.simulate.speed_mps);
    let trace = reference_trace(speed, cfg.simulate.cycles, cfg.simulate.rate_hz)?;
    let report = run_tracking(&trace, &cfg.actuator_params(), &cfg.gains, &cfg.plant_mode())?;
    io::write_text(
        &out_dir.join("reports/tracking.csv"),
        &io::write_tracking_csv(&report),
    )?;
    io::write_text(
        &out_dir.join("reports/cycles.csv"),
        &io::write_cycles_csv(&report),
    )?;
    let worst_delay = report
        .cycles
        .iter()
        .fold(0.0f64, |m, c| m.max(c.delay_pct));
    status(&format!(
        "{} cycles at {speed} m/s ({} mode): worst delay {worst_delay:.2} % of cycle, mean |torque| {:.1} Nm",
        report.cycles.len(),
        cfg.plant.mode,
        report.mean_abs_torque_nm()
    ));
    Ok(())
}

/// `doe-stats`: normality-gated correlation tests over DOE tables; writes
/// `reports/doe-stats.csv`. With no input tables a seeded demo table is
/// generated under `data/`.
pub fn doe_stats_cmd(cfg: &RunConfig, out_dir: &Path, table_paths: &[PathBuf]) -> Result<()> {
    let tables: Vec<DoeTable> = if table_paths.is_empty() {
        let table = demo_table(cfg.generator.seed);
        io::write_text(
            &out_dir.join("data/doe-demo.csv"),
            &io::write_doe_csv(&table),
        )?;
        vec![table]
    } else {
        table_paths
            .iter()
            .map(|p| io::parse_doe_csv(&io::read_text(p)?))
            .collect::<Result<_>>()?
    };

    let reports = correlation_report(&tables)?;
    let mut text = String::from(
        "factor_name,response,shapiro_w,shapiro_p,test,statistic,p_value,significant\n",
    );
    for table in &reports {
        for r in &table.responses {
            let _ = writeln!(
                text,
                "{},{},{:.16e},{:.16e},{},{:.16e},{:.16e},{}",
                table.factor_name,
                r.response,
                r.shapiro.statistic,
                r.shapiro.p_value,
                r.branch.name(),
                r.correlation.statistic,
                r.correlation.p_value,
                r.correlation.significant
            );
        }
    }
    io::write_text(&out_dir.join("reports/doe-stats.csv"), &text)?;
    status(&format!("analyzed {} DOE table(s)", reports.len()));
    Ok(())
}

fn parse_tracking_csv(text: &str) -> Result<Vec<[f64; 6]>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || idx == 0 {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("tracking CSV: bad number in `{line}`"),
            })?;
        if vals.len() != 6 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("tracking CSV: expected 6 fields, got {}", vals.len()),
            });
        }
        rows.push([vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]]);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "tracking CSV has no data rows".to_string(),
        });
    }
    Ok(rows)
}

fn cycle_average(rows: &[[f64; 6]], col: usize, per_cycle: usize) -> Vec<(f64, f64)> {
    let cycles = rows.len() / per_cycle;
    (0..per_cycle)
        .map(|i| {
            let pct = i as f64 / per_cycle as f64 * 100.0;
            let mean = (0..cycles)
                .map(|c| rows[c * per_cycle + i][col])
                .sum::<f64>()
                / cycles as f64;
            (pct, mean)
        })
        .collect()
}

/// `report`: render the tracking trace into angle / torque / power SVG
/// panels versus % gait cycle, averaged over cycles.
pub fn report_cmd(out_dir: &Path) -> Result<()> {
    let rows = parse_tracking_csv(&io::read_text(&out_dir.join("reports/tracking.csv"))?)?;
    let cycles_text = io::read_text(&out_dir.join("reports/cycles.csv"))?;
    let n_cycles = cycles_text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .count()
        .max(1);
    let per_cycle = rows.len() / n_cycles;
    if per_cycle < 2 {
        return Err(Error::InvalidArgument(
            "tracking trace shorter than one cycle".to_string(),
        ));
    }

    let angle = line_chart(
        "Ankle angle over the gait cycle",
        "% gait cycle",
        "angle (deg)",
        &[
            Series {
                label: "reference",
                points: cycle_average(&rows, 1, per_cycle),
            },
            Series {
                label: "measured",
                points: cycle_average(&rows, 2, per_cycle),
            },
        ],
    );
    io::write_text(&out_dir.join("plots/angle.svg"), &angle)?;

    let torque = line_chart(
        "Joint torque over the gait cycle",
        "% gait cycle",
        "torque (Nm)",
        &[Series {
            label: "torque",
            points: cycle_average(&rows, 3, per_cycle),
        }],
    );
    io::write_text(&out_dir.join("plots/torque.svg"), &torque)?;

    let power = line_chart(
        "Mechanical power over the gait cycle",
        "% gait cycle",
        "power (W)",
        &[Series {
            label: "power",
            points: cycle_average(&rows, 4, per_cycle),
        }],
    );
    io::write_text(&out_dir.join("plots/power.svg"), &power)?;
    status("wrote plots/angle.svg, plots/torque.svg, plots/power.svg");
    Ok(())
}
