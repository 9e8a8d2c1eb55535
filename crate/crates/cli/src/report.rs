//! Report assembly and JSON/CSV rendering.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Run metadata embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub config_paths: Vec<String>,
    pub seed: u64,
    pub output_paths: Vec<String>,
    /// Seconds since the Unix epoch. The only field allowed to differ
    /// between repeated runs.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: &str, seed: u64) -> Self {
        Self {
            tool: "jtcsim",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config_paths: vec![config.to_string()],
            seed,
            output_paths: Vec::new(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    fn csv_header(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("# {k}={v}\n"));
        line("tool", self.tool.to_string());
        line("version", self.version.to_string());
        line("command", self.command.clone());
        line("args", self.args.join(" "));
        line("config_paths", self.config_paths.join(";"));
        line("seed", self.seed.to_string());
        line("output_paths", self.output_paths.join(";"));
        line("timestamp", self.timestamp.to_string());
        s
    }
}

/// Rows for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Formats a float the same way on every run.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// A finished command: JSON body, one or more CSV tables and an exit code.
pub struct Report {
    pub manifest: RunManifest,
    pub body: Value,
    /// Named tables; the first is the primary CSV view.
    pub tables: Vec<(String, Table)>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Report {
    pub fn new(manifest: RunManifest, body: impl Serialize, table: Table) -> Result<Self> {
        let name = manifest.command.clone();
        Ok(Self { manifest, body: serde_json::to_value(body)?, tables: vec![(name, table)], exit_code: 0 })
    }

    pub fn with_table(mut self, name: &str, table: Table) -> Self {
        self.tables.push((name.to_string(), table));
        self
    }

    pub fn with_exit_code(mut self, code: i32) -> Self {
        self.exit_code = code;
        self
    }

    pub fn json(&self) -> Result<String> {
        let mut root = Map::new();
        root.insert("manifest".into(), serde_json::to_value(&self.manifest)?);
        match &self.body {
            Value::Object(m) => root.extend(m.clone()),
            other => {
                root.insert("result".into(), other.clone());
            }
        }
        Ok(serde_json::to_string_pretty(&Value::Object(root))? + "\n")
    }

    pub fn csv(&self, index: usize) -> Result<String> {
        let table = &self.tables[index].1;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.headers)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        let body = String::from_utf8(w.into_inner().context("flushing csv")?)?;
        Ok(self.manifest.csv_header() + &body)
    }

    fn file_names(&self, dir: &Path) -> Vec<PathBuf> {
        let mut paths = vec![dir.join(format!("{}.json", self.manifest.command))];
        paths.extend(self.tables.iter().map(|(name, _)| dir.join(format!("{name}.csv"))));
        paths
    }

    /// Writes `<command>.json` and one CSV per table into `dir`.
    pub fn write_to(&mut self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let paths = self.file_names(dir);
        self.manifest.output_paths = paths.iter().map(|p| p.display().to_string()).collect();
        std::fs::write(&paths[0], self.json()?).with_context(|| format!("writing {}", paths[0].display()))?;
        for (i, path) in paths[1..].iter().enumerate() {
            std::fs::write(path, self.csv(i)?).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(0),
        }
    }
}
