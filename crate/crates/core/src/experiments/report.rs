use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OutputFormat};

pub const TOOL: &str = "kdist";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stamped on every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_hash: config.hash(),
        }
    }
}

/// Floats in CSV output: 17 significant digits, so values round-trip.
pub fn float_cell(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table with a fixed header. Rendering prepends one `#` comment
/// line carrying the provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self, provenance: &Provenance) -> String {
        let mut out = format!(
            "# tool={} version={} config_hash={}\n",
            provenance.tool, provenance.version, provenance.config_hash
        );
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub trait Report: Serialize {
    fn provenance(&self) -> &Provenance;

    fn table(&self) -> CsvTable;

    /// False when the report records a failed check.
    fn passed(&self) -> bool {
        true
    }

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.table().render(self.provenance()),
        }
    }
}
