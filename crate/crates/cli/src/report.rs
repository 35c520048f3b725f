//! Report assembly and file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;

/// How a measured value is compared against its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within { target: f64, tolerance: f64 },
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Within { target, tolerance } => (v - target).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Invariant {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            value,
            pass: bound.holds(value),
            bound,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Bound::AtLeast(1.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub scenario: String,
    pub version: String,
    pub config_hash: String,
    pub config: ScenarioConfig,
    pub passed: bool,
    pub error: Option<String>,
    pub invariants: Vec<Invariant>,
    pub results: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, config: &ScenarioConfig, invariants: Vec<Invariant>, results: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            scenario: config.scenario.clone(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash(),
            config: config.clone(),
            passed: invariants.iter().all(|i| i.pass),
            error: None,
            invariants,
            results,
        }
    }

    pub fn failed(command: &str, config: &ScenarioConfig, error: String) -> Self {
        let mut r = Self::new(command, config, Vec::new(), serde_json::Value::Null);
        r.passed = false;
        r.error = Some(error);
        r
    }

    pub fn failures(&self) -> impl Iterator<Item = &Invariant> {
        self.invariants.iter().filter(|i| !i.pass)
    }
}

#[derive(Debug, Serialize)]
struct Timing<'a> {
    command: &'a str,
    config_hash: &'a str,
    wall_seconds: f64,
}

/// A CSV table: header and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Seventeen significant digits in scientific notation.
pub fn format_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> std::io::Error {
    std::io::Error::other(format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_table(dir: &Path, table: &Table) -> std::io::Result<PathBuf> {
    let path = dir.join(&table.name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(&table.header).map_err(|e| io_err(&path, e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_sig17(x))).map_err(|e| io_err(&path, e))?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes `report.json`, `timing.json`, the tables and any extra JSON
/// documents into `dir`.
pub fn emit(
    dir: &Path,
    report: &Report,
    tables: &[Table],
    extra: &[(String, serde_json::Value)],
    wall_seconds: f64,
) -> std::io::Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_json(&dir.join("report.json"), report)?;
    for t in tables {
        write_table(dir, t)?;
    }
    for (name, value) in extra {
        write_json(&dir.join(name), value)?;
    }
    let timing = Timing {
        command: &report.command,
        config_hash: &report.config_hash,
        wall_seconds,
    };
    let path = dir.join("timing.json");
    let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&timing).map_err(|e| io_err(&path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = format_sig17(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.split('e').next().unwrap().replace('.', "").len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_sig17(-2.5e-7).parse::<f64>().unwrap(), -2.5e-7);
    }

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).holds(1.0));
        assert!(!Bound::AtLeast(1.0).holds(0.5));
        assert!(Bound::Within {
            target: 0.5,
            tolerance: 0.05
        }
        .holds(0.54));
        assert!(!Bound::Within {
            target: 0.5,
            tolerance: 0.05
        }
        .holds(0.56));
        assert!(!Bound::AtMost(1.0).holds(f64::NAN));
    }

    proptest::proptest! {
        #[test]
        fn sig17_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            proptest::prop_assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
