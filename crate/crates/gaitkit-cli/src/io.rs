//! File IO: datasets, weights, normalizer sidecars, report CSVs, DOE tables.
//!
//! Everything text is written with explicit, deterministic formatting so
//! that a fixed seed yields bit-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gaitkit_core::doestats::DoeTable;
use gaitkit_core::gaitdata::{parse_dataset_csv, write_dataset_csv, Dataset, Normalizer};
use gaitkit_core::mlpnet::{deserialize_network, serialize_network, BranchedNetwork};
use gaitkit_core::plantsim::TrackingReport;
use gaitkit_core::rtpipe::StreamTick;
use gaitkit_core::{Error, Result};

/// Header of streaming-inference output CSVs.
pub const STREAM_CSV_HEADER: &str =
    "time_s,v_hat,p_hat,alpha_hat,dalpha_hat,latency_us,rejected_dims";

/// Header of tracking trace CSVs.
pub const TRACKING_CSV_HEADER: &str =
    "time_s,alpha_ref_deg,alpha_meas_deg,torque_nm,power_w,current_a";

/// Header of per-cycle tracking statistics CSVs.
pub const CYCLES_CSV_HEADER: &str = "cycle,delay_pct,peak_err_pct,peak_torque_nm,peak_power_w";

/// Header of DOE (design-of-experiments) table CSVs.
pub const DOE_CSV_HEADER: &str = "factor_name,factor_value,stiffness_nm_per_deg,max_vms_mpa";

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

/// Read a whole text file, mapping IO failures to data errors.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Write a file, creating parent directories first.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Write a text file, creating parent directories first.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

/// Load a dataset CSV from disk.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset_csv(&read_text(path)?)
}

/// Save a dataset CSV to disk.
pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    write_text(path, &write_dataset_csv(dataset))
}

/// Save network weights in the checksummed binary format.
pub fn save_network(path: &Path, net: &BranchedNetwork) -> Result<()> {
    write_bytes(path, &serialize_network(net))
}

/// Load network weights, running every format check.
pub fn load_network(path: &Path) -> Result<BranchedNetwork> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    deserialize_network(&bytes)
}

/// Save the input normalizer next to a weights file: two lines of six
/// `{:.16e}` values — channel means, then channel standard deviations.
pub fn save_normalizer(path: &Path, norm: &Normalizer) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}",
        norm.mean
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(
        s,
        "{}",
        norm.std
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    write_text(path, &s)
}

/// Load a normalizer sidecar written by [`save_normalizer`].
pub fn load_normalizer(path: &Path) -> Result<Normalizer> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("normalizer: expected six numbers, got `{line}`"),
            })?;
        if vals.len() != 6 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("normalizer: expected 6 values, got {}", vals.len()),
            });
        }
        rows.push(vals);
    }
    if rows.len() != 2 {
        return Err(Error::Parse {
            line: text.lines().count() + 1,
            message: format!("normalizer: expected 2 data lines, got {}", rows.len()),
        });
    }
    let mut norm = Normalizer::identity();
    for c in 0..6 {
        norm.mean[c] = rows[0][c];
        norm.std[c] = rows[1][c];
    }
    Ok(norm)
}

/// Render streaming-inference ticks as CSV.
pub fn write_stream_csv(ticks: &[StreamTick]) -> String {
    let mut s = String::with_capacity(ticks.len() * 96 + 64);
    s.push_str(STREAM_CSV_HEADER);
    s.push('\n');
    for t in ticks {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            t.time_s, t.output[0], t.output[1], t.output[2], t.output[3], t.latency_us,
            t.rejected_dims
        );
    }
    s
}

/// Render the closed-loop trace as CSV.
pub fn write_tracking_csv(report: &TrackingReport) -> String {
    let mut s = String::with_capacity(report.time_s.len() * 96 + 64);
    s.push_str(TRACKING_CSV_HEADER);
    s.push('\n');
    for i in 0..report.time_s.len() {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            report.time_s[i],
            report.alpha_ref_deg[i],
            report.alpha_meas_deg[i],
            report.torque_nm[i],
            report.power_w[i],
            report.current_a[i]
        );
    }
    s
}

/// Render per-cycle tracking statistics as CSV.
pub fn write_cycles_csv(report: &TrackingReport) -> String {
    let mut s = String::new();
    s.push_str(CYCLES_CSV_HEADER);
    s.push('\n');
    for c in &report.cycles {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.cycle, c.delay_pct, c.peak_err_pct, c.peak_torque_nm, c.peak_power_w
        );
    }
    s
}

/// Render a DOE table as CSV (one table per file).
pub fn write_doe_csv(table: &DoeTable) -> String {
    let mut s = String::new();
    s.push_str(DOE_CSV_HEADER);
    s.push('\n');
    for &(factor, stiffness, vms) in &table.rows {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e}",
            table.factor_name, factor, stiffness, vms
        );
    }
    s
}

/// Parse a DOE table CSV written by [`write_doe_csv`].
pub fn parse_doe_csv(text: &str) -> Result<DoeTable> {
    let mut factor_name: Option<String> = None;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != DOE_CSV_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected header `{DOE_CSV_HEADER}`, got `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let name = fields[0].trim();
        match &factor_name {
            None => factor_name = Some(name.to_string()),
            Some(existing) if existing != name => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "one table per file: factor `{name}` after `{existing}`"
                    ),
                });
            }
            _ => {}
        }
        let mut nums = [0.0f64; 3];
        for (i, f) in fields[1..].iter().enumerate() {
            nums[i] = f.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("expected a number, got `{f}`"),
            })?;
        }
        rows.push((nums[0], nums[1], nums[2]));
    }
    let factor_name = factor_name.ok_or_else(|| Error::Parse {
        line: text.lines().count().max(1),
        message: "DOE table has no data rows".to_string(),
    })?;
    let table = DoeTable { factor_name, rows };
    table.validate()?;
    Ok(table)
}
