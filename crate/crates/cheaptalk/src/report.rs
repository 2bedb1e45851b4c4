//! Deterministic output: CSV emission with fixed float formatting and the
//! JSON run manifest that makes every output reproducible byte-for-byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest encode/decode: {0}")]
    Json(#[from] serde_json::Error),
}

/// Formats a float with 17 significant digits, enough to round-trip any
/// double bit-exactly and identically across platforms.
pub fn fmt_f64(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{value:.16e}")
}

/// One CSV cell.
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::Float(v)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Cell {
        Cell::UInt(v as u64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Cell {
        Cell::UInt(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Cell {
        Cell::UInt(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Cell {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Cell {
        Cell::Str(v.into())
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::UInt(v) => v.to_string(),
        Cell::Float(v) => fmt_f64(*v),
        Cell::Bool(v) => v.to_string(),
        // Commas would break the bare-comma delimiter contract.
        Cell::Str(v) => v.replace(',', ";"),
    }
}

/// Writes a CSV table: comma delimiter, LF line endings, dot decimals.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), ReportError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let line: Vec<String> = row.iter().map(render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| ReportError::Io { path: path.to_owned(), source })
}

/// Everything needed to reproduce a run: the resolved command parameters
/// with the game (and model, when used) embedded inline, plus provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Fully resolved parameters, game spec included.
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params,
            seed: None,
            threads: None,
            outputs: Vec::new(),
            duration_seconds: 0.0,
        }
    }

    /// Manifest path that pairs with an output file.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut os = output.as_os_str().to_owned();
        os.push(".manifest.json");
        PathBuf::from(os)
    }

    pub fn write(&self, output: &Path) -> Result<(), ReportError> {
        let path = Self::path_for(output);
        let body = serde_json::to_string_pretty(self)?;
        fs::write(&path, body).map_err(|source| ReportError::Io { path, source })
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let body = fs::read_to_string(path)
            .map_err(|source| ReportError::Io { path: path.to_owned(), source })?;
        Ok(serde_json::from_str(&body)?)
    }
}

/// Convenience writer that pairs a CSV with its manifest.
pub fn write_csv_with_manifest(
    path: &Path,
    header: &[&str],
    rows: &[Vec<Cell>],
    manifest: &mut RunManifest,
) -> Result<(), ReportError> {
    write_csv(path, header, rows)?;
    manifest.outputs = vec![path.display().to_string()];
    manifest.write(path)
}

/// Writes a small JSON document next to an output (summaries, verdicts).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let body = serde_json::to_string_pretty(value)?;
    let mut file = fs::File::create(path)
        .map_err(|source| ReportError::Io { path: path.to_owned(), source })?;
    file.write_all(body.as_bytes())
        .map_err(|source| ReportError::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.1, 1.0 / 3.0, 6.02e23, -1.5e-300, 0.0] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v} -> {s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_emission_is_stable() {
        let dir = std::env::temp_dir().join(format!("cheaptalk-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let rows = vec![
            vec![Cell::UInt(1), Cell::Float(0.5), Cell::Bool(true)],
            vec![Cell::UInt(2), Cell::Float(-1.0), Cell::Bool(false)],
        ];
        write_csv(&path, &["n", "x", "ok"], &rows).unwrap();
        let a = std::fs::read(&path).unwrap();
        write_csv(&path, &["n", "x", "ok"], &rows).unwrap();
        let b = std::fs::read(&path).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("n,x,ok\n"));
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn manifest_round_trips() {
        let dir = std::env::temp_dir().join(format!("cheaptalk-man-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("eq.csv");
        let mut m = RunManifest::new("solve", serde_json::json!({"n": 50}));
        m.seed = Some(42);
        m.write(&out).unwrap();
        let loaded = RunManifest::load(&RunManifest::path_for(&out)).unwrap();
        assert_eq!(loaded.command, "solve");
        assert_eq!(loaded.seed, Some(42));
        assert_eq!(loaded.params["n"], 50);
        std::fs::remove_dir_all(&dir).ok();
    }
}
