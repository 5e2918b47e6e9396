//! Canonical dataset CSV codec.
//!
//! UTF-8, comma-separated, fixed header. `#`-prefixed lines after the header
//! are comments and skipped; blank lines are forbidden.

use super::{Dataset, GaitSample};
use crate::error::{Error, Result};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Exact header line of the dataset CSV.
pub const DATASET_CSV_HEADER: &str =
    "time_s,speed_mps,phase_pct,theta_deg,phi_deg,psi_deg,dtheta_dps,dphi_dps,dpsi_dps,alpha_deg,dalpha_dps";

const COLUMNS: usize = 11;

/// Render a dataset as CSV text. Numbers carry 17 significant digits so the
/// round trip through [`parse_dataset_csv`] is exact.
pub fn write_dataset_csv(dataset: &Dataset) -> String {
    let mut out = String::with_capacity(32 + dataset.len() * 24 * COLUMNS);
    out.push_str(DATASET_CSV_HEADER);
    out.push('\n');
    for s in &dataset.samples {
        let row = [
            s.time_s,
            s.speed_mps,
            s.phase_pct,
            s.shank_angles_deg[0],
            s.shank_angles_deg[1],
            s.shank_angles_deg[2],
            s.shank_rates_dps[0],
            s.shank_rates_dps[1],
            s.shank_rates_dps[2],
            s.ankle_angle_deg,
            s.ankle_rate_dps,
        ];
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", x));
        }
        out.push('\n');
    }
    out
}

/// Parse dataset CSV text. Errors carry the 1-based line number.
///
/// The sample rate is recovered from the smallest positive time step (the CSV
/// itself carries no rate field); a single-sample or empty dataset defaults
/// to 100 Hz.
pub fn parse_dataset_csv(text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header"))?;
    if header.trim_end() != DATASET_CSV_HEADER {
        return Err(parse_err(1, "missing or malformed header"));
    }

    let mut samples = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            return Err(parse_err(lineno, "blank lines are forbidden"));
        }
        if line.starts_with('#') {
            continue;
        }
        let mut fields = [0.0f64; COLUMNS];
        let mut count = 0;
        for (i, tok) in line.split(',').enumerate() {
            if i >= COLUMNS {
                count = i + 1;
                break;
            }
            fields[i] = tok.trim().parse::<f64>().map_err(|_| {
                parse_err(lineno, format!("column {}: not a number: {:?}", i + 1, tok))
            })?;
            count = i + 1;
        }
        if count != COLUMNS {
            return Err(parse_err(
                lineno,
                format!("expected {} columns, found {}", COLUMNS, count),
            ));
        }
        samples.push(GaitSample {
            time_s: fields[0],
            speed_mps: fields[1],
            phase_pct: fields[2],
            shank_angles_deg: [fields[3], fields[4], fields[5]],
            shank_rates_dps: [fields[6], fields[7], fields[8]],
            ankle_angle_deg: fields[9],
            ankle_rate_dps: fields[10],
        });
    }

    let sample_rate_hz = infer_rate(&samples);
    Ok(Dataset {
        samples,
        source_tag: "csv".to_string(),
        sample_rate_hz,
    })
}

fn infer_rate(samples: &[GaitSample]) -> f64 {
    let mut min_dt = f64::INFINITY;
    for w in samples.windows(2) {
        let dt = w[1].time_s - w[0].time_s;
        if dt > 0.0 && dt < min_dt {
            min_dt = dt;
        }
    }
    if min_dt.is_finite() {
        1.0 / min_dt
    } else {
        100.0
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
