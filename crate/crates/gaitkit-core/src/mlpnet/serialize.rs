//! Bit-exact binary weight serialization.
//!
//! Layout, little-endian:
//! magic `GMLP` | u32 version = 1 | u32 layer count | per layer u32 rows,
//! u32 cols | all weight matrices row-major f64 | all bias vectors f64 |
//! u64 FNV-1a checksum over every preceding byte.

use super::network::{BranchedNetwork, DenseLayer, NetworkConfig};
use crate::error::{Error, Result};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use ndarray::{Array1, Array2};

pub const WEIGHTS_MAGIC: [u8; 4] = *b"GMLP";
pub const WEIGHTS_VERSION: u32 = 1;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Serialize the network parameters.
pub fn serialize_network(net: &BranchedNetwork) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + net.parameter_count() * 8);
    out.extend_from_slice(&WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers.len() as u32).to_le_bytes());
    for layer in &net.layers {
        out.extend_from_slice(&(layer.w.nrows() as u32).to_le_bytes());
        out.extend_from_slice(&(layer.w.ncols() as u32).to_le_bytes());
    }
    for layer in &net.layers {
        for w in layer.w.iter() {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    for layer in &net.layers {
        for b in layer.b.iter() {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    let checksum = fnv1a(&out);
    out.extend_from_slice(&checksum.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(format_err("truncation", format!("while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let b = self.take(8, what)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(f64::from_le_bytes(a))
    }
}

fn format_err(check: &'static str, detail: impl Into<String>) -> Error {
    Error::Format {
        check,
        detail: detail.into(),
    }
}

/// Deserialize network parameters; each structural check failure is reported
/// by name (`magic`, `version`, `truncation`, `shape`, `checksum`).
pub fn deserialize_network(bytes: &[u8]) -> Result<BranchedNetwork> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != WEIGHTS_MAGIC {
        return Err(format_err("magic", "expected GMLP"));
    }
    let version = r.u32("version")?;
    if version != WEIGHTS_VERSION {
        return Err(format_err("version", format!("unsupported version {version}")));
    }
    let count = r.u32("layer count")? as usize;
    if count < 4 || count % 2 != 0 {
        return Err(format_err(
            "shape",
            format!("layer count {count} is not an even number >= 4"),
        ));
    }
    let mut shapes = Vec::with_capacity(count);
    for i in 0..count {
        let rows = r.u32("layer rows")? as usize;
        let cols = r.u32("layer cols")? as usize;
        if rows == 0 || cols == 0 {
            return Err(format_err("shape", format!("layer {i} has a zero dimension")));
        }
        shapes.push((rows, cols));
    }
    let config = config_from_shapes(&shapes)?;

    let mut weights = Vec::with_capacity(count);
    for (i, &(rows, cols)) in shapes.iter().enumerate() {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(r.f64(&format!("weights of layer {i}"))?);
        }
        weights.push(Array2::from_shape_vec((rows, cols), data).expect("sized above"));
    }
    let mut biases = Vec::with_capacity(count);
    for (i, &(rows, _)) in shapes.iter().enumerate() {
        let mut data = Vec::with_capacity(rows);
        for _ in 0..rows {
            data.push(r.f64(&format!("biases of layer {i}"))?);
        }
        biases.push(Array1::from_vec(data));
    }

    let payload_end = r.pos;
    let stored = u64::from_le_bytes(
        r.take(8, "checksum")?
            .try_into()
            .expect("take returned 8 bytes"),
    );
    if r.pos != bytes.len() {
        return Err(format_err("truncation", "trailing bytes after checksum"));
    }
    let computed = fnv1a(&bytes[..payload_end]);
    if stored != computed {
        return Err(format_err(
            "checksum",
            format!("stored {stored:#018x}, computed {computed:#018x}"),
        ));
    }

    let layers = weights
        .into_iter()
        .zip(biases)
        .map(|(w, b)| DenseLayer { w, b })
        .collect();
    Ok(BranchedNetwork { config, layers })
}

/// Recover the topology from the shape list and verify chain consistency.
fn config_from_shapes(shapes: &[(usize, usize)]) -> Result<NetworkConfig> {
    let count = shapes.len();
    let s1 = count / 2;
    let hidden_per_stage = s1 - 1;
    let input_width = shapes[0].1;
    let hidden_width = shapes[0].0;
    let middle_width = shapes[s1 - 1].0;
    let final_width = shapes[count - 1].0;
    let stage2_in = shapes[s1].1;
    let stage2_sees_hidden = if stage2_in == middle_width {
        false
    } else if stage2_in == middle_width + hidden_width {
        true
    } else {
        return Err(format_err(
            "shape",
            format!("stage 2 input width {stage2_in} matches no known wiring"),
        ));
    };
    let config = NetworkConfig {
        input_width,
        hidden_width,
        hidden_per_stage,
        middle_width,
        final_width,
        stage2_sees_hidden,
        seed: 0,
    };
    if config.layer_shapes() != shapes {
        return Err(format_err("shape", "layer shapes are not a consistent chain"));
    }
    Ok(config)
}
