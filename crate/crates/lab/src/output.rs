//! Data files and the run manifest.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) in both CSV and
//! JSON; missing values are empty CSV fields and JSON `null`. Data files never
//! contain time stamps or host details, so reruns are byte-identical. The
//! manifest is the only file with a wall-clock entry.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::config::{serialize_experiment, RunConfig};
use crate::error::LabError;

pub const MANIFEST: &str = "manifest.txt";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// JSON float with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F(pub f64);

impl Serialize for F {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(fmt_f64(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

pub fn opt(x: Option<f64>) -> Option<F> {
    x.map(F)
}

pub fn floats(xs: &[f64]) -> Vec<F> {
    xs.iter().copied().map(F).collect()
}

/// CSV text assembled row by row. Fields are numbers or bare tokens, so no
/// quoting is needed.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        debug_assert_eq!(fields.len(), self.columns);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(f.as_ref());
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("summaries serialize");
    v.push(b'\n');
    v
}

/// Named data files of one run, in write order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    /// Short human-readable report for stdout.
    pub report: String,
}

impl Artifacts {
    pub fn push(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn report_line(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.report, "{}", line.as_ref());
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// SHA-256 of the canonical config text, which covers every effective
/// parameter including defaults but not the output directory.
pub fn config_hash(cfg: &RunConfig) -> String {
    sha256_hex(serialize_experiment(cfg).as_bytes())
}

pub fn manifest_text(cfg: &RunConfig, artifacts: &Artifacts, unix_time: u64) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "tool: csl-lab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "subcommand: {}", cfg.subcommand());
    let _ = writeln!(m, "seed: {}", cfg.seed);
    let _ = writeln!(m, "config_sha256: {}", config_hash(cfg));
    for (name, bytes) in &artifacts.files {
        let _ = writeln!(m, "file: {name} sha256 {}", sha256_hex(bytes));
    }
    let _ = writeln!(m, "created_unix: {unix_time}");
    m
}

/// Writes data files, the canonical config and the manifest into `dir`.
pub fn write_run(dir: &Path, cfg: &RunConfig, artifacts: &Artifacts) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<(), LabError> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for (name, bytes) in &artifacts.files {
        put(name, bytes)?;
    }
    put("config.toml", serialize_experiment(cfg).as_bytes())?;
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    put(MANIFEST, manifest_text(cfg, artifacts, now).as_bytes())?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_floats() {
        let s = serde_json::to_string(&(F(0.3), F(f64::NAN), opt(None))).unwrap();
        assert_eq!(s, "[2.9999999999999999e-1,null,null]");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v[0].as_f64(), Some(0.3));
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&["1", ""]);
        assert_eq!(String::from_utf8(c.into_bytes()).unwrap(), "a,b\n1,\n");
    }
}
