//! Reports and their on-disk form.
//!
//! Every number is written as `{:.16e}` (17 significant digits, so the text
//! parses back to the same `f64`). Tables always go to CSV; the summary is
//! CSV (`name,value`) or a flat JSON object. Both start from the canonical
//! config echo, so each file describes how it was produced.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => fmt_num(*v),
            Cell::Num(_) => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
        }
    }
}

/// A CSV table written to `<stem>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub stem: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(stem: &str, columns: &[&str]) -> Self {
        Table { stem: stem.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub config_echo: String,
    /// Named summary values, in output order.
    pub summary: Vec<(String, Cell)>,
    pub tables: Vec<Table>,
    pub passed: bool,
    /// Exit code when `passed` is false.
    pub fail_code: i32,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, config_echo: String, fail_code: i32) -> Self {
        Report { command, seed, config_echo, summary: Vec::new(), tables: Vec::new(), passed: false, fail_code }
    }

    pub fn set(&mut self, name: impl Into<String>, value: impl Into<Cell>) {
        self.summary.push((name.into(), value.into()));
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.summary.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            crate::EXIT_PASS
        } else {
            self.fail_code
        }
    }

    fn header(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# command: {}", self.command).unwrap();
        writeln!(out, "# seed: {}", self.seed).unwrap();
        writeln!(out, "# config:").unwrap();
        for line in self.config_echo.lines() {
            writeln!(out, "#   {line}").unwrap();
        }
        out
    }

    pub fn table_csv(&self, table: &Table) -> String {
        let mut out = self.header();
        out.push_str(&table.columns.join(","));
        out.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = self.header();
        out.push_str("name,value\n");
        for (name, value) in self.fields() {
            writeln!(out, "{name},{}", value.csv()).unwrap();
        }
        out
    }

    /// Flat JSON object: command, seed, config echo, then the summary.
    pub fn summary_json(&self) -> String {
        let mut out = String::from("{\n");
        let mut entries = vec![
            ("command".to_string(), Cell::Text(self.command.into())),
            ("seed".to_string(), Cell::Text(self.seed.to_string())),
            ("config".to_string(), Cell::Text(self.config_echo.clone())),
        ];
        entries.extend(self.fields());
        for (k, (name, value)) in entries.iter().enumerate() {
            let value = if name == "seed" { self.seed.to_string() } else { value.json() };
            let sep = if k + 1 == entries.len() { "" } else { "," };
            writeln!(out, "  {}: {value}{sep}", serde_json::to_string(name).unwrap()).unwrap();
        }
        out.push_str("}\n");
        out
    }

    fn fields(&self) -> Vec<(String, Cell)> {
        let mut all = self.summary.clone();
        all.push(("passed".into(), Cell::Text(self.passed.to_string())));
        all
    }

    /// Writes the tables and the summary into `dir`; returns the paths in
    /// write order.
    pub fn write(&self, dir: &Path, format: &str) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for table in &self.tables {
            let path = dir.join(format!("{}.csv", table.stem));
            fs::write(&path, self.table_csv(table))?;
            paths.push(path);
        }
        let (text, ext) = match format {
            "json" => (self.summary_json(), "json"),
            _ => (self.summary_csv(), "csv"),
        };
        let path = dir.join(format!("{}_summary.{ext}", self.command));
        fs::write(&path, text)?;
        paths.push(path);
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        let mut r = Report::new("demo", 7, "[model]\npreset = \"stora\"\n".into(), 1);
        r.set("slope", 2.0);
        r.set("missing", f64::NAN);
        r.set("label", "a \"quoted\" name");
        let mut t = Table::new("demo", &["eps", "dev"]);
        t.push(vec![1e-2.into(), 0.1.into()]);
        r.tables.push(t);
        r.passed = true;
        r
    }

    #[test]
    fn numbers_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_num(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn summary_json_is_a_flat_object() {
        let value: serde_json::Value = serde_json::from_str(&report().summary_json()).unwrap();
        let map = value.as_object().unwrap();
        assert_eq!(map["command"], "demo");
        assert_eq!(map["seed"], 7);
        assert_eq!(map["slope"], 2.0);
        assert!(map["missing"].is_null());
        assert_eq!(map["label"], "a \"quoted\" name");
        assert_eq!(map["passed"], "true");
        assert!(map["config"].as_str().unwrap().contains("stora"));
        assert!(map.values().all(|v| !v.is_object() && !v.is_array()));
    }

    #[test]
    fn csv_starts_with_the_config_echo() {
        let r = report();
        let text = r.table_csv(&r.tables[0]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# command: demo"));
        assert_eq!(lines.next(), Some("# seed: 7"));
        assert!(text.contains("#   preset = \"stora\"\neps,dev\n1.0000000000000000e-2,"));
        let summary = r.summary_csv();
        assert!(summary.contains("name,value\nslope,2.0000000000000000e0\nmissing,NaN\n"));
    }
}
