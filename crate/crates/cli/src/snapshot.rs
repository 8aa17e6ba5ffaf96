//! Field snapshot files: magic "CSSR", version 1, little-endian f64 payload
//! interleaved (re, im) with the x index fastest. Round trips are bit exact.

use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"CSSR";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub n_x: u32,
    /// Transverse node count; 1 marks a 1D field.
    pub m_y_or_1: u32,
    pub l_x: f64,
    pub time: f64,
    pub epsilon: f64,
    pub beta: f64,
}

/// Write a field; 1D fields are stored as a single row.
pub fn write_snapshot(path: &Path, field: &Array2<Complex64>, meta: &SnapshotMeta) -> Result<()> {
    let (rows, cols) = field.dim();
    if rows as u32 != meta.m_y_or_1 || cols as u32 != meta.n_x {
        return Err(CliError::Validation(format!(
            "snapshot meta ({} x {}) does not match the field ({} x {})",
            meta.m_y_or_1, meta.n_x, rows, cols
        )));
    }
    let mut bytes = Vec::with_capacity(48 + 16 * rows * cols);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&meta.n_x.to_le_bytes());
    bytes.extend_from_slice(&meta.m_y_or_1.to_le_bytes());
    bytes.extend_from_slice(&meta.l_x.to_le_bytes());
    bytes.extend_from_slice(&meta.time.to_le_bytes());
    bytes.extend_from_slice(&meta.epsilon.to_le_bytes());
    bytes.extend_from_slice(&meta.beta.to_le_bytes());
    for row in field.rows() {
        for v in row {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a snapshot; rejects wrong magic, unsupported versions, truncated or
/// oversized payloads without returning a partial field.
pub fn read_snapshot(path: &Path) -> Result<(SnapshotMeta, Array2<Complex64>)> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let fail = |reason: &str| CliError::Snapshot {
        path: path.display().to_string(),
        reason: reason.into(),
    };
    if bytes.len() < 48 {
        return Err(fail("header truncated"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(fail("magic mismatch"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(fail(&format!("unsupported version {version}")));
    }
    let n_x = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let m_y_or_1 = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let meta = SnapshotMeta {
        n_x,
        m_y_or_1,
        l_x: f64_at(16),
        time: f64_at(24),
        epsilon: f64_at(32),
        beta: f64_at(40),
    };
    let count = (n_x as usize) * (m_y_or_1 as usize);
    let expected = 48 + 16 * count;
    if bytes.len() < expected {
        return Err(fail("payload truncated"));
    }
    if bytes.len() > expected {
        return Err(fail("trailing data after payload"));
    }
    let mut field = Array2::zeros((m_y_or_1 as usize, n_x as usize));
    let mut off = 48;
    for mut row in field.rows_mut() {
        for v in row.iter_mut() {
            *v = Complex64::new(f64_at(off), f64_at(off + 8));
            off += 16;
        }
    }
    Ok((meta, field))
}

/// View a single-row snapshot as a 1D field.
pub fn row_as_1d(field: &Array2<Complex64>) -> ndarray::Array1<Complex64> {
    field.row(0).to_owned()
}
