//! File formats and atomic writes.
//!
//! Numbers are written with Rust's shortest round-trip `{}` formatting,
//! so identical values give identical bytes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::diagnostics::ReportRow;
use crate::flow::Trajectory;
use crate::measure::{AtomicSignedMeasure, MeasureDoc, MeasureError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File { path: path.display().to_string(), source }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(file_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err(dir))?;
    tmp.write_all(bytes).map_err(file_err(path))?;
    tmp.as_file().sync_all().map_err(file_err(path))?;
    tmp.persist(path).map_err(|e| IoError::File { path: path.display().to_string(), source: e.error })?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T, path: &Path) -> Result<Vec<u8>, IoError> {
    let mut s = serde_json::to_vec_pretty(value).map_err(|source| IoError::Json { path: path.display().to_string(), source })?;
    s.push(b'\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_atomic(path, &to_json_pretty(value, path)?)
}

fn csv_line(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

/// `t, x_1..x_n, step, err`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.positions.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x_{i}");
    }
    out.push_str(",step,err\n");
    for i in 0..traj.times.len() {
        csv_line(
            &mut out,
            std::iter::once(traj.times[i])
                .chain(traj.positions[i].iter().copied())
                .chain([traj.steps[i], traj.errors[i]]),
        );
    }
    out
}

/// `t, D, term1, term2, term3, bound, W_refine, mass`.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = ReportRow::HEADER.join(",");
    out.push('\n');
    for r in rows {
        csv_line(&mut out, r.values());
    }
    out
}

pub fn read_measure(path: &Path) -> Result<AtomicSignedMeasure, IoError> {
    let text = std::fs::read_to_string(path).map_err(file_err(path))?;
    let doc: MeasureDoc =
        serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.display().to_string(), source })?;
    Ok(AtomicSignedMeasure::try_from(doc)?)
}

pub fn write_measure(path: &Path, m: &AtomicSignedMeasure) -> Result<(), IoError> {
    write_json(path, &MeasureDoc::from(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_columns() {
        let t = Trajectory {
            times: vec![0.0, 0.5],
            positions: vec![vec![1.0, 2.0], vec![1.5, 2.25]],
            steps: vec![0.0, 0.5],
            errors: vec![0.0, 0.125],
            frozen_at: None,
        };
        assert_eq!(trajectory_csv(&t), "t,x_1,x_2,step,err\n0,1,2,0,0\n0.5,1.5,2.25,0.5,0.125\n");
    }

    #[test]
    fn measure_roundtrip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/m.json");
        let m = AtomicSignedMeasure::dirac(vec![0.1, 0.2], -0.3).unwrap().with_reservoir(0.5);
        write_measure(&p, &m).unwrap();
        assert_eq!(read_measure(&p).unwrap(), m);
    }
}
