//! Evaluation metrics over the four output dimensions: speed, phase, ankle
//! angle and ankle rate. Phase errors are measured circularly modulo 100.

use crate::error::{Error, Result};
use crate::gaitdata::{circular_phase_diff, LABEL_DIMS};

use alloc::string::String;
use alloc::vec::Vec;

/// Index of the phase dimension inside a label 4-vector.
pub const PHASE_DIM: usize = 1;

/// Default denominator floor for relative errors, one unit in each
/// dimension's natural scale.
pub const DEFAULT_DENOMINATOR_FLOOR: f64 = 1.0;

pub const DIMENSION_NAMES: [&str; LABEL_DIMS] = ["v", "p", "alpha", "dalpha"];

/// Per-dimension mean square error, root mean square error and mean absolute
/// error.
#[derive(Debug, Clone, PartialEq)]
pub struct PerDimMetrics {
    pub mse: [f64; LABEL_DIMS],
    pub rmse: [f64; LABEL_DIMS],
    pub mae: [f64; LABEL_DIMS],
    pub count: usize,
}

/// Fraction of samples whose relative error falls within each threshold, for
/// one output dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketReport {
    pub dimension: String,
    pub count: usize,
    /// `(threshold, fraction within threshold)`, thresholds ascending.
    pub buckets: Vec<(f64, f64)>,
}

/// Bucket reports for samples partitioned by |target angle| against a
/// threshold, plus the share of samples above it.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleThresholdReport {
    pub below: [BucketReport; LABEL_DIMS],
    pub above: [BucketReport; LABEL_DIMS],
    pub threshold_deg: f64,
    pub above_fraction: f64,
}

fn check_paired(predictions: &[[f64; LABEL_DIMS]], targets: &[[f64; LABEL_DIMS]]) -> Result<()> {
    if predictions.len() != targets.len() {
        return Err(Error::invalid("prediction/target length mismatch"));
    }
    if predictions.is_empty() {
        return Err(Error::invalid("empty prediction set"));
    }
    Ok(())
}

/// Absolute error per dimension, circular for phase.
fn dim_error(pred: f64, target: f64, dim: usize) -> f64 {
    if dim == PHASE_DIM {
        circular_phase_diff(pred, target)
    } else {
        (pred - target).abs()
    }
}

/// MSE, RMSE and MAE per dimension.
pub fn regression_metrics(
    predictions: &[[f64; LABEL_DIMS]],
    targets: &[[f64; LABEL_DIMS]],
) -> Result<PerDimMetrics> {
    check_paired(predictions, targets)?;
    let n = predictions.len() as f64;
    let mut mse = [0.0; LABEL_DIMS];
    let mut mae = [0.0; LABEL_DIMS];
    for (p, t) in predictions.iter().zip(targets) {
        for d in 0..LABEL_DIMS {
            let e = dim_error(p[d], t[d], d);
            mse[d] += e * e;
            mae[d] += e;
        }
    }
    let mut rmse = [0.0; LABEL_DIMS];
    for d in 0..LABEL_DIMS {
        mse[d] /= n;
        mae[d] /= n;
        rmse[d] = libm::sqrt(mse[d]);
    }
    Ok(PerDimMetrics {
        mse,
        rmse,
        mae,
        count: predictions.len(),
    })
}

fn bucket_one_dim(
    predictions: &[[f64; LABEL_DIMS]],
    targets: &[[f64; LABEL_DIMS]],
    dim: usize,
    thresholds: &[f64],
    floor: f64,
) -> BucketReport {
    let mut buckets = Vec::with_capacity(thresholds.len());
    let n = predictions.len();
    for &th in thresholds {
        let within = predictions
            .iter()
            .zip(targets)
            .filter(|(p, t)| {
                let denom = t[dim].abs().max(floor);
                dim_error(p[dim], t[dim], dim) / denom <= th
            })
            .count();
        buckets.push((th, within as f64 / n as f64));
    }
    BucketReport {
        dimension: String::from(DIMENSION_NAMES[dim]),
        count: n,
        buckets,
    }
}

/// Fraction of samples within each relative-error threshold, per dimension.
///
/// Relative error is `|pred − target| / max(|target|, floor)`, with the
/// circular distance as the numerator for phase.
pub fn relative_error_buckets(
    predictions: &[[f64; LABEL_DIMS]],
    targets: &[[f64; LABEL_DIMS]],
    thresholds: &[f64],
    denominator_floor: f64,
) -> Result<[BucketReport; LABEL_DIMS]> {
    check_paired(predictions, targets)?;
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("thresholds must be sorted ascending"));
    }
    if !(denominator_floor > 0.0) {
        return Err(Error::invalid("denominator floor must be positive"));
    }
    Ok(core::array::from_fn(|d| {
        bucket_one_dim(predictions, targets, d, thresholds, denominator_floor)
    }))
}

fn empty_report(dim: usize) -> BucketReport {
    BucketReport {
        dimension: String::from(DIMENSION_NAMES[dim]),
        count: 0,
        buckets: Vec::new(),
    }
}

/// Bucket reports for samples split by |target ankle angle| vs the threshold.
///
/// An empty partition gets count 0 and no buckets.
pub fn angle_threshold_report(
    predictions: &[[f64; LABEL_DIMS]],
    targets: &[[f64; LABEL_DIMS]],
    threshold_deg: f64,
    thresholds: &[f64],
    denominator_floor: f64,
) -> Result<AngleThresholdReport> {
    check_paired(predictions, targets)?;
    if !(threshold_deg > 0.0) {
        return Err(Error::invalid("angle threshold must be positive"));
    }
    let mut below_p = Vec::new();
    let mut below_t = Vec::new();
    let mut above_p = Vec::new();
    let mut above_t = Vec::new();
    for (p, t) in predictions.iter().zip(targets) {
        if t[2].abs() > threshold_deg {
            above_p.push(*p);
            above_t.push(*t);
        } else {
            below_p.push(*p);
            below_t.push(*t);
        }
    }
    let part = |ps: &[[f64; LABEL_DIMS]], ts: &[[f64; LABEL_DIMS]]| -> Result<[BucketReport; LABEL_DIMS]> {
        if ps.is_empty() {
            Ok(core::array::from_fn(empty_report))
        } else {
            relative_error_buckets(ps, ts, thresholds, denominator_floor)
        }
    };
    Ok(AngleThresholdReport {
        below: part(&below_p, &below_t)?,
        above: part(&above_p, &above_t)?,
        threshold_deg,
        above_fraction: above_p.len() as f64 / predictions.len() as f64,
    })
}
