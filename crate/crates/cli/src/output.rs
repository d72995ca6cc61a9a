//! CSV series and key-value summaries, each starting with a provenance header.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub struct Report {
    command: &'static str,
    config: Vec<(String, String)>,
    seed: Option<u64>,
    columns: String,
    rows: Vec<String>,
    summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&str]) -> Self {
        Self {
            command,
            config: Vec::new(),
            seed: None,
            columns: columns.join(","),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    /// Records one effective configuration value.
    pub fn config(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    pub fn row(&mut self, values: &[String]) {
        self.rows.push(values.join(","));
    }

    pub fn summary(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.summary.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let config: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# {} {}\n# command: {}\n# config: {}\n# seed: {seed}\n",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            self.command,
            config.join(" ")
        )
    }

    pub fn csv(&self) -> String {
        let mut out = self.header();
        out.push_str(&self.columns);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = self.header();
        for (k, v) in &self.summary {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Writes the CSV to `output` (stdout when absent) and the summary to
    /// `summary` if given. The summary always goes to stderr too.
    pub fn emit(&self, output: Option<&Path>, summary: Option<&Path>) -> io::Result<()> {
        match output {
            Some(p) => fs::write(p, self.csv())?,
            None => io::stdout().lock().write_all(self.csv().as_bytes())?,
        }
        if let Some(p) = summary {
            fs::write(p, self.summary_text())?;
        }
        let mut err = io::stderr().lock();
        for (k, v) in &self.summary {
            writeln!(err, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
