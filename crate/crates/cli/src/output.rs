//! Tabular output records and their CSV / JSON serializations.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::{fmt_f64, OutputFormat};

/// Named equal-length columns plus `(key, value)` metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputRecord {
    pub header: Vec<(String, String)>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl OutputRecord {
    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push((name.into(), values));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for r in 0..self.rows() {
            let cells: Vec<String> = self.columns.iter().map(|(_, v)| fmt_f64(v[r])).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut params = Map::new();
        for (k, v) in &self.header {
            params.insert(k.clone(), Value::String(v.clone()));
        }
        let columns: Vec<Value> = self.columns.iter().map(|(n, v)| json!({ "name": n, "values": v })).collect();
        let doc = json!({ "parameters": params, "columns": columns });
        let mut s = serde_json::to_string_pretty(&doc).expect("plain JSON values serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let body = match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        };
        let mut f = fs::File::create(path)?;
        f.write_all(body.as_bytes())
    }
}
