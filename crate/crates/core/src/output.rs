//! CSV and JSON artifacts; every write goes through a temporary file and a rename.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{MacroField, Mesh2D};
use crate::radiometry::PhysConstants;

pub const SNAPSHOT_HEADER: &str = "step,time_ns,i,j,x_cm,y_cm,T_keV,Tr_keV,rho,Ur,n_census";
pub const SPECTRUM_HEADER: &str = "u_lo_keV,u_hi_keV,intensity";
pub const TIMESERIES_HEADER: &str =
    "step,time_ns,total_energy,balance_residual,n_particles,picard_iters,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub step: u64,
    pub time_ns: f64,
    pub i: usize,
    pub j: usize,
    pub x_cm: f64,
    pub y_cm: f64,
    #[serde(rename = "T_keV")]
    pub t_kev: f64,
    #[serde(rename = "Tr_keV")]
    pub tr_kev: f64,
    pub rho: f64,
    #[serde(rename = "Ur")]
    pub ur: f64,
    pub n_census: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    #[serde(rename = "u_lo_keV")]
    pub u_lo_kev: f64,
    #[serde(rename = "u_hi_keV")]
    pub u_hi_kev: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesRow {
    pub step: u64,
    pub time_ns: f64,
    pub total_energy: f64,
    pub balance_residual: f64,
    pub n_particles: usize,
    pub picard_iters: usize,
    pub wall_ms: f64,
}

/// Rows of one snapshot from the state at `step`.
pub fn snapshot_rows(
    mesh: &Mesh2D,
    field: &MacroField,
    consts: &PhysConstants,
    n_census: &[usize],
    step: u64,
    time_ns: f64,
) -> Vec<SnapshotRow> {
    (0..mesh.n_cells())
        .map(|k| {
            let (i, j) = mesh.ij(k);
            let (x, y) = mesh.center(k);
            SnapshotRow {
                step,
                time_ns,
                i,
                j,
                x_cm: x,
                y_cm: y,
                t_kev: field.t[k],
                tr_kev: consts.radiation_temperature(field.rho[k]),
                rho: field.rho[k],
                ur: field.ur[k],
                n_census: n_census.get(k).copied().unwrap_or(0),
            }
        })
        .collect()
}

pub fn spectrum_rows(edges: &[f64], values: &[f64]) -> Vec<SpectrumRow> {
    edges
        .windows(2)
        .zip(values)
        .map(|(e, &v)| SpectrumRow {
            u_lo_kev: e[0],
            u_hi_kev: e[1],
            intensity: v,
        })
        .collect()
}

fn encode<T: Serialize>(header: &str, rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Domain(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
    let mut out = Vec::with_capacity(header.len() + 1 + body.len());
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    out.extend_from_slice(&body);
    Ok(out)
}

/// Writes `bytes` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_snapshot(rows: &[SnapshotRow], path: &Path) -> Result<()> {
    write_atomic(path, &encode(SNAPSHOT_HEADER, rows)?)
}

pub fn write_spectrum(rows: &[SpectrumRow], path: &Path) -> Result<()> {
    write_atomic(path, &encode(SPECTRUM_HEADER, rows)?)
}

pub fn write_timeseries(rows: &[TimeseriesRow], path: &Path) -> Result<()> {
    write_atomic(path, &encode(TIMESERIES_HEADER, rows)?)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Domain(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Parses a CSV whose header must equal `header` column for column.
fn decode<T: DeserializeOwned>(header: &str, path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: String| Error::Parse(format!("{}: {m}", path.display()));
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found: Vec<String> = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    for want in header.split(',') {
        if !found.iter().any(|f| f == want) {
            return Err(bad(format!("missing column {want:?}")));
        }
    }
    if found.join(",") != header {
        return Err(bad(format!(
            "header {:?} differs from {header:?}",
            found.join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| bad(e.to_string())))
        .collect()
}

pub fn read_snapshot(path: &Path) -> Result<Vec<SnapshotRow>> {
    decode(SNAPSHOT_HEADER, path)
}

pub fn read_spectrum(path: &Path) -> Result<Vec<SpectrumRow>> {
    decode(SPECTRUM_HEADER, path)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeseriesRow>> {
    decode(TIMESERIES_HEADER, path)
}

pub fn snapshot_name(step: u64) -> String {
    format!("snapshot_{step:06}.csv")
}

pub fn spectrum_name(step: u64) -> String {
    format!("spectrum_{step:06}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_snapshot_has_one_row() {
        let consts = PhysConstants::default();
        let mesh = Mesh2D::uniform(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let field = MacroField::equilibrium(&consts, &[0.3]);
        let rows = snapshot_rows(&mesh, &field, &consts, &[7], 2, 0.5);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(snapshot_name(2));
        write_snapshot(&rows, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SNAPSHOT_HEADER);
        assert_eq!(lines.len(), 2);
        assert!(!text.contains('\r'));
        assert_eq!(read_snapshot(&p).unwrap(), rows);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let rows = vec![SpectrumRow {
            u_lo_kev: 0.1 + 0.2,
            u_hi_kev: 1e-300,
            intensity: 1.0 / 3.0,
        }];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_spectrum(&rows, &p).unwrap();
        assert_eq!(read_spectrum(&p).unwrap(), rows);
        assert!(!dir.path().join("s.csv.tmp").exists());
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "step,time_ns,total_energy\n0,0,1\n").unwrap();
        let msg = read_timeseries(&p).unwrap_err().to_string();
        assert!(msg.contains("balance_residual"), "{msg}");
    }

    #[test]
    fn io_error_names_path() {
        let msg = read_snapshot(Path::new("/nonexistent/x.csv"))
            .unwrap_err()
            .to_string();
        assert!(msg.contains("/nonexistent/x.csv"));
    }
}
