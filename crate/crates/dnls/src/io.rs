//! Potential files and staged artifact output.

use std::fs;
use std::path::{Path, PathBuf};

use dnls_core::potential::Potential;
use dnls_core::C64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::AppError;

/// Reads `x,re,im` rows; the grid must be uniform and symmetric about 0.
pub fn read_potential_csv(path: &Path) -> Result<Potential, AppError> {
    let file = fs::File::open(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut xs = Vec::new();
    let mut q = Vec::new();
    for rec in rdr.deserialize() {
        let (x, re, im): (f64, f64, f64) = rec?;
        xs.push(x);
        q.push(C64::new(re, im));
    }
    let bad = |m: &str| AppError::Config(format!("{}: {m}", path.display()));
    if xs.len() < 8 {
        return Err(bad("need at least 8 rows"));
    }
    let n = xs.len();
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if !(h > 0.0) || xs.iter().enumerate().any(|(j, x)| (x - xs[0] - j as f64 * h).abs() > 1e-9 * (1.0 + x.abs())) {
        return Err(bad("grid is not uniform and increasing"));
    }
    if (xs[0] + xs[n - 1]).abs() > 1e-9 * (1.0 + xs[0].abs()) {
        return Err(bad("grid is not symmetric about 0"));
    }
    Ok(Potential {
        half_width: xs[n - 1],
        h,
        q,
        family: None,
    })
}

pub fn potential_csv(p: &Potential) -> Result<Vec<u8>, AppError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "re", "im"])?;
    for (x, v) in p.grid().iter().zip(&p.q) {
        w.serialize((x, v.re, v.im))?;
    }
    w.into_inner().map_err(|e| AppError::Io(e.to_string()))
}

#[derive(Serialize)]
struct PotentialJson {
    half_width: f64,
    h: f64,
    re: Vec<f64>,
    im: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
}

pub fn potential_json(p: &Potential, t: Option<f64>) -> serde_json::Value {
    serde_json::to_value(PotentialJson {
        half_width: p.half_width,
        h: p.h,
        re: p.q.iter().map(|v| v.re).collect(),
        im: p.q.iter().map(|v| v.im).collect(),
        t,
    })
    .expect("plain data serializes")
}

/// CSV from a header and rows of numbers.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>, AppError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| AppError::Io(e.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

/// Files held in memory until the run has succeeded, so a failed run
/// leaves nothing behind.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_json(&mut self, name: impl Into<String>, v: &impl Serialize) {
        let mut bytes = serde_json::to_vec_pretty(v).expect("plain data serializes");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    pub fn records(&self) -> Vec<ArtifactRecord> {
        self.files
            .iter()
            .map(|(name, bytes)| ArtifactRecord {
                file: name.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
            })
            .collect()
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, AppError> {
        fs::create_dir_all(dir).map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
        let mut out = Vec::new();
        for (name, bytes) in self.files {
            let path = dir.join(&name);
            fs::write(&path, bytes).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
            out.push(path);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_csv_round_trip() {
        let p = Potential::from_fn(2.0, 0.25, |x| C64::new(x.cos(), -0.5 * x));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        fs::write(&path, potential_csv(&p).unwrap()).unwrap();
        let back = read_potential_csv(&path).unwrap();
        assert_eq!(back.len(), p.len());
        assert!((back.h - p.h).abs() < 1e-15 && back.half_width == p.half_width);
        assert_eq!(back.q, p.q);
    }

    #[test]
    fn rejects_ragged_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        let mut s = String::from("x,re,im\n");
        for x in [-4.0, -3.0, -2.0, -1.5, 0.0, 1.5, 2.0, 3.0, 4.0] {
            s += &format!("{x},0,0\n");
        }
        fs::write(&path, s).unwrap();
        assert!(matches!(read_potential_csv(&path), Err(AppError::Config(_))));
        assert!(matches!(read_potential_csv(&dir.path().join("none.csv")), Err(AppError::Io(_))));
    }
}
