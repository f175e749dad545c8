use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Formats;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A named table written as `<name>.csv`.
#[derive(Debug, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Result of one command before it is written out.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub body: Value,
    pub tables: Vec<Table>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    tol_scale: f64,
    passed: bool,
    report: &'a Value,
}

pub fn config_hash(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

pub struct Meta<'a> {
    pub command: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub tol_scale: f64,
}

/// Writes the JSON envelope and the CSV tables; returns the written paths.
pub fn write(dir: &Path, formats: Formats, meta: &Meta<'_>, out: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if formats.json {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command: meta.command,
            config_hash: meta.config_hash,
            seed: meta.seed,
            tol_scale: meta.tol_scale,
            passed: out.passed,
            report: &out.body,
        };
        let path = dir.join(format!("{}.json", meta.command));
        fs::write(&path, serde_json::to_string_pretty(&env)?)?;
        written.push(path);
    }
    if formats.csv {
        for t in &out.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}
