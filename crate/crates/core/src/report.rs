//! CSV report emission. Every report embeds its metadata (problem hash,
//! truncation orders, seed) as leading comment lines so a result file is
//! reproducible from its own header.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct Report {
    pub name: String,
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Report {
            name: name.to_string(),
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Write `<dir>/<name>.csv`, creating the directory if needed.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, self.to_csv())?;
        Ok(path)
    }
}

/// Shortest-roundtrip float formatting shared by all reports.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_c64(v: num_complex::Complex64) -> String {
    format!("{}+{}i", v.re, v.im)
}
