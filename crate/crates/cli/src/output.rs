use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use steklov_core::bounds::REPORT_FORMAT_VERSION;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command result: a JSON body and a table for CSV output.
pub struct Output {
    pub command: &'static str,
    pub body: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    pub fn new(command: &'static str, body: impl Serialize) -> Result<Self, CliError> {
        let body = serde_json::to_value(body).map_err(|e| CliError::Failure(e.to_string()))?;
        let (header, rows) = flat_table(&body);
        Ok(Self {
            command,
            body,
            header,
            rows,
        })
    }

    pub fn with_table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("version".into(), json!(REPORT_FORMAT_VERSION));
                doc.insert("command".into(), json!(self.command));
                match &self.body {
                    Value::Object(fields) => doc.extend(fields.clone()),
                    other => {
                        doc.insert("result".into(), other.clone());
                    }
                }
                let mut buf = serde_json::to_vec_pretty(&Value::Object(doc)).map_err(|e| CliError::Failure(e.to_string()))?;
                buf.push(b'\n');
                Ok(buf)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let err = |e: csv::Error| CliError::Failure(format!("csv output: {e}"));
                w.write_record(&self.header).map_err(err)?;
                for r in &self.rows {
                    w.write_record(r).map_err(err)?;
                }
                w.into_inner().map_err(|e| CliError::Failure(e.to_string()))
            }
        }
    }
}

/// `key,value` rows for the scalar fields of an object; nested values
/// are written as JSON.
fn flat_table(body: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    if let Value::Object(fields) = body {
        for (k, v) in fields {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            rows.push(vec![k.clone(), text]);
        }
    }
    (vec!["key".into(), "value".into()], rows)
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Failure(format!("stdout: {e}"))),
    }
}
