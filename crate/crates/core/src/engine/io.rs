use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::exec::StepDiagnostic;
use super::field::{Space, StateField};
use super::grid::Grid;
use crate::error::{Result, SplitError};
use crate::scalar::{lit, to_f64, Real, C};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub sizes: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
    pub space: Vec<Space>,
    /// `complex64` or `complex128`.
    pub dtype: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn dtype_of<T: Real>() -> &'static str {
    if std::mem::size_of::<T>() == 4 {
        "complex64"
    } else {
        "complex128"
    }
}

/// Writes little-endian interleaved complex samples to `path` and the metadata to `path.json`.
pub fn write_field<T: Real>(path: &Path, field: &StateField<T>) -> Result<()> {
    let dtype = dtype_of::<T>();
    let mut bytes = Vec::with_capacity(field.values().len() * 2 * std::mem::size_of::<T>());
    for z in field.values() {
        for v in [z.re, z.im] {
            if dtype == "complex64" {
                bytes.extend_from_slice(&(to_f64(v) as f32).to_le_bytes());
            } else {
                bytes.extend_from_slice(&to_f64(v).to_le_bytes());
            }
        }
    }
    fs::File::create(path)?.write_all(&bytes)?;
    let meta = FieldMeta {
        sizes: field.grid().sizes().to_vec(),
        bounds: field.grid().bounds().to_vec(),
        space: field.space().to_vec(),
        dtype: dtype.to_string(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_field<T: Real>(path: &Path) -> Result<StateField<T>> {
    let meta: FieldMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let grid = Grid::new(meta.sizes.clone(), meta.bounds.clone())?;
    let bytes = fs::read(path)?;
    let width = match meta.dtype.as_str() {
        "complex64" => 4,
        "complex128" => 8,
        other => return Err(SplitError::Format(format!("unknown dtype {other:?}"))),
    };
    if bytes.len() != grid.len() * 2 * width {
        return Err(SplitError::Format(format!(
            "field file has {} bytes, expected {}",
            bytes.len(),
            grid.len() * 2 * width
        )));
    }
    let scalar = |chunk: &[u8]| -> f64 {
        if width == 4 {
            f32::from_le_bytes(chunk.try_into().expect("4-byte chunk")) as f64
        } else {
            f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"))
        }
    };
    let values = bytes
        .chunks_exact(2 * width)
        .map(|c| C::new(lit::<T>(scalar(&c[..width])), lit::<T>(scalar(&c[width..]))))
        .collect();
    StateField::with_space(grid, values, meta.space)
}

/// Writes per-step diagnostics as CSV with columns `step_index,kind,norm_after,fft_calls`.
pub fn write_diagnostics<W: Write>(out: W, rows: &[StepDiagnostic]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step_index", "kind", "norm_after", "fft_calls"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.step_index.to_string(), r.kind.clone(), format!("{:.16e}", r.norm_after), r.fft_calls.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> SplitError {
    SplitError::Format(e.to_string())
}
