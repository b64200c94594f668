//! Artifact writers. Fields and series are CSV with 17 significant digits;
//! reports are JSON with shortest round-trip floats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{pnm, Grid};
use crate::simulate::{NormSample, State};

/// Tool name and version written next to every artifact set.
pub const VERSION_STAMP: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::File::create(path)?)
}

/// Writes rows of numbers under a comma-separated header.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InvalidInput(format!(
                "csv row has {} columns, header {}",
                row.len(),
                header.len()
            )));
        }
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// `x,u,v` in 1D, `x,y,u,v` in 2D, one row per cell center.
pub fn write_field_csv(path: &Path, grid: &Grid, u: &[f64], v: &[f64]) -> Result<()> {
    let n = grid.cell_count();
    if u.len() != n || v.len() != n {
        return Err(Error::InvalidInput("field length does not match the grid".into()));
    }
    let header: &[&str] = if grid.dim() == 1 {
        &["x", "u", "v"]
    } else {
        &["x", "y", "u", "v"]
    };
    write_csv(
        path,
        header,
        (0..n).map(|k| {
            let (x, y) = grid.center(k);
            if grid.dim() == 1 {
                vec![x, u[k], v[k]]
            } else {
                vec![x, y, u[k], v[k]]
            }
        }),
    )
}

/// `t,du_inf,dv_inf`.
pub fn write_norms_csv(path: &Path, norms: &[NormSample]) -> Result<()> {
    write_csv(
        path,
        &["t", "du_inf", "dv_inf"],
        norms.iter().map(|n| vec![n.t, n.du_inf, n.dv_inf]),
    )
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = to_json(value)?;
    s.push('\n');
    create(path)?.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_bytes(path: &Path, data: &[u8]) -> Result<()> {
    create(path)?.write_all(data)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SnapshotMeta<'a> {
    t: f64,
    field: &'a str,
    min: f64,
    max: f64,
}

/// Snapshot file stem for time `t`.
pub fn snapshot_stem(t: f64) -> String {
    format!("t{t:014.6}")
}

/// Writes `<dir>/<t>.csv`; in 2D also a P5 image of `u` with a JSON sidecar
/// holding the gray-level range. Returns the CSV path.
pub fn write_snapshot(dir: &Path, grid: &Grid, t: f64, state: &State) -> Result<PathBuf> {
    let stem = snapshot_stem(t);
    let csv = dir.join(format!("{stem}.csv"));
    write_field_csv(&csv, grid, &state.u, &state.v)?;
    if grid.dim() == 2 {
        let (img, min, max) = pnm::encode_snapshot(grid, &state.u);
        write_bytes(&dir.join(format!("{stem}_u.pgm")), &img)?;
        write_json(
            &dir.join(format!("{stem}_u.json")),
            &SnapshotMeta {
                t,
                field: "u",
                min,
                max,
            },
        )?;
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1.0319292e10, f64::MIN_POSITIVE] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn field_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::square(4, 5).unwrap();
        let u: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let p = dir.path().join("f.csv");
        write_field_csv(&p, &g, &u, &u).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,u,v");
        assert_eq!(lines.len(), 21);
        let last: Vec<f64> = lines[20].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last, vec![0.875, 0.9, 19.0, 19.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_csv(&dir.path().join("x.csv"), &["a", "b"], [vec![1.0]]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn snapshot_names_sort_by_time() {
        let times = [0.0, 2.5, 10.0, 100.0, 12345.5];
        let names: Vec<String> = times.iter().map(|&t| snapshot_stem(t)).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }
}
