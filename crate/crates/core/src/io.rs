//! CSV files for potentials and scattering data, plus a JSON sidecar with
//! grid parameters.
//!
//! Numbers are written with 17 significant digits so that a write/read
//! cycle is lossless. On input the grid is inferred from the first column
//! and every node is checked against it.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{IstError, Result};
use crate::grid::{Potential, ScatteringData, SpatialGrid, SpectralGrid, C64};

/// Schema tag written into every sidecar.
pub const SIDECAR_SCHEMA: &str = "dnls-ist.grid/1";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> IstError {
    match e.kind() {
        csv::ErrorKind::Io(_) => IstError::Io(e.to_string()),
        _ => IstError::Parse(e.to_string()),
    }
}

fn read_rows<R: Read>(reader: R, expected: &[&str]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if headers.len() < expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(IstError::Parse(format!(
            "expected columns starting with {}, found {}",
            expected.join(","),
            headers.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| IstError::Parse(format!("row {}: {s:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != headers.len() {
            return Err(IstError::Parse(format!("row {} has {} fields", line + 1, row.len())));
        }
        rows.push(row);
    }
    Ok((headers, rows))
}

fn check_nodes(found: impl Iterator<Item = f64>, expected: impl Fn(usize) -> f64, scale: f64) -> Result<()> {
    for (j, x) in found.enumerate() {
        let e = expected(j);
        if (x - e).abs() > 1e-9 * scale {
            return Err(IstError::InvalidGrid(format!(
                "node {j} is {x}, expected {e} on a uniform grid"
            )));
        }
    }
    Ok(())
}

pub fn write_potential_to<W: Write>(q: &Potential, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "re_q", "im_q"]).map_err(csv_err)?;
    for (j, v) in q.values.iter().enumerate() {
        w.write_record([fmt(q.grid.node(j)), fmt(v.re), fmt(v.im)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_potential_from<R: Read>(input: R) -> Result<Potential> {
    let (_, rows) = read_rows(input, &["x", "re_q", "im_q"])?;
    if rows.len() < 2 {
        return Err(IstError::Parse("a potential needs at least two rows".into()));
    }
    let grid = SpatialGrid::new(-rows[0][0], rows.len())?;
    check_nodes(rows.iter().map(|r| r[0]), |j| grid.node(j), grid.half_width())?;
    Potential::new(grid, rows.iter().map(|r| C64::new(r[1], r[2])).collect())
}

pub fn write_scattering_to<W: Write>(d: &ScatteringData, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let full = d.alpha.as_ref().zip(d.beta.as_ref());
    if full.is_some() {
        w.write_record(["lambda", "re_rho", "im_rho", "re_alpha", "im_alpha", "re_beta", "im_beta"])
    } else {
        w.write_record(["lambda", "re_rho", "im_rho"])
    }
    .map_err(csv_err)?;
    for (k, r) in d.rho.iter().enumerate() {
        let mut rec = vec![fmt(d.grid.node(k)), fmt(r.re), fmt(r.im)];
        if let Some((a, b)) = full {
            rec.extend([fmt(a[k].re), fmt(a[k].im), fmt(b[k].re), fmt(b[k].im)]);
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scattering_from<R: Read>(input: R) -> Result<ScatteringData> {
    let (headers, rows) = read_rows(input, &["lambda", "re_rho", "im_rho"])?;
    if rows.len() < 2 {
        return Err(IstError::Parse("scattering data need at least two rows".into()));
    }
    let spacing = rows[1][0] - rows[0][0];
    let grid = SpectralGrid::new(rows.len(), spacing)?;
    let scale = spacing * rows.len() as f64;
    check_nodes(rows.iter().map(|r| r[0]), |k| grid.node(k), scale)?;
    let col = |a: usize| rows.iter().map(|r| C64::new(r[a], r[a + 1])).collect::<Vec<_>>();
    let data = ScatteringData::new(grid, col(1))?;
    match headers.len() {
        3 => Ok(data),
        7 if headers[3..] == ["re_alpha", "im_alpha", "re_beta", "im_beta"] => data.with_coefficients(col(3), col(5)),
        _ => Err(IstError::Parse(format!("unexpected columns {}", headers.join(",")))),
    }
}

fn with_path(path: &Path) -> impl Fn(std::io::Error) -> IstError + '_ {
    move |e| IstError::Io(format!("{}: {e}", path.display()))
}

pub fn write_potential(q: &Potential, path: &Path) -> Result<()> {
    write_potential_to(q, std::fs::File::create(path).map_err(with_path(path))?)
}

pub fn read_potential(path: &Path) -> Result<Potential> {
    read_potential_from(std::fs::File::open(path).map_err(with_path(path))?)
}

pub fn write_scattering(d: &ScatteringData, path: &Path) -> Result<()> {
    write_scattering_to(d, std::fs::File::create(path).map_err(with_path(path))?)
}

pub fn read_scattering(path: &Path) -> Result<ScatteringData> {
    read_scattering_from(std::fs::File::open(path).map_err(with_path(path))?)
}

/// Grid parameters written next to a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema: String,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub count: usize,
    pub dlambda: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Sidecar {
    pub fn for_spatial(grid: &SpatialGrid, tolerances: BTreeMap<String, f64>) -> Self {
        let dual = crate::grid::make_dual_spectral_grid(grid);
        Self {
            schema: SIDECAR_SCHEMA.into(),
            half_width: grid.half_width(),
            count: grid.len(),
            dlambda: dual.spacing(),
            tolerances,
        }
    }

    pub fn for_spectral(grid: &SpectralGrid, tolerances: BTreeMap<String, f64>) -> Self {
        let dual = grid.dual_spatial_grid();
        Self {
            schema: SIDECAR_SCHEMA.into(),
            half_width: dual.half_width(),
            count: grid.len(),
            dlambda: grid.spacing(),
            tolerances,
        }
    }

    /// `data.csv` -> `data.json`
    pub fn path_for(csv: &Path) -> std::path::PathBuf {
        csv.with_extension("json")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| IstError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| IstError::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_roundtrip_is_lossless() {
        let g = SpatialGrid::new(4.0, 16).unwrap();
        let q = Potential::from_fn(g, |x| C64::new((x * 1.3).sin() / 3.0, x.exp() * 1e-3));
        let mut buf = Vec::new();
        write_potential_to(&q, &mut buf).unwrap();
        let back = read_potential_from(buf.as_slice()).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn scattering_roundtrip_with_and_without_coefficients() {
        let g = SpectralGrid::new(8, 0.25).unwrap();
        let rho: Vec<C64> = (0..8).map(|k| C64::new(0.1 * k as f64, -1.0 / 3.0)).collect();
        let bare = ScatteringData::new(g, rho.clone()).unwrap();
        let full = bare.clone().with_coefficients(rho.clone(), rho.clone()).unwrap();
        for d in [bare, full] {
            let mut buf = Vec::new();
            write_scattering_to(&d, &mut buf).unwrap();
            assert_eq!(read_scattering_from(buf.as_slice()).unwrap(), d);
        }
    }

    #[test]
    fn rejects_nonuniform_and_malformed() {
        let text = "x,re_q,im_q\n-2,0,0\n-1,0,0\n0.5,0,0\n1,0,0\n";
        assert!(matches!(read_potential_from(text.as_bytes()), Err(IstError::InvalidGrid(_))));
        let text = "x,re_q,im_q\n-2,0,0\n-1,zz,0\n0,0,0\n1,0,0\n";
        assert!(matches!(read_potential_from(text.as_bytes()), Err(IstError::Parse(_))));
        let text = "lambda,re_q\n0,0\n";
        assert!(matches!(read_scattering_from(text.as_bytes()), Err(IstError::Parse(_))));
    }

    #[test]
    fn sidecar_keys() {
        let g = SpatialGrid::new(16.0, 1024).unwrap();
        let s = Sidecar::for_spatial(&g, BTreeMap::from([("ode".to_string(), 1e-10)]));
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v["L"], 16.0);
        assert_eq!(v["N"], 1024);
        assert!((v["dlambda"].as_f64().unwrap() - std::f64::consts::PI / 32.0).abs() < 1e-15);
        assert_eq!(v["schema"], SIDECAR_SCHEMA);
    }
}
