//! Flat, ordered output records and their JSON and CSV encodings.

use std::io::Write;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Bits,
    Hex,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Some(Self::Json),
            "csv" => Some(Self::Csv),
            "bits" => Some(Self::Bits),
            "hex" => Some(Self::Hex),
            _ => None,
        }
    }
}

/// Keys keep insertion order; JSON keys and CSV headers are identical.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Map<String, Value>);

impl Record {
    /// A record opened with the command name, tool version and timestamp.
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.str("command", command);
        r.str("tool_version", env!("CARGO_PKG_VERSION"));
        r.str(
            "timestamp",
            &chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        );
        r
    }

    pub fn str(&mut self, key: &str, value: &str) -> &mut Self {
        self.0.insert(key.into(), Value::String(value.into()));
        self
    }

    pub fn uint(&mut self, key: &str, value: u64) -> &mut Self {
        self.0.insert(key.into(), Value::Number(value.into()));
        self
    }

    pub fn bool(&mut self, key: &str, value: bool) -> &mut Self {
        self.0.insert(key.into(), Value::Bool(value));
        self
    }

    /// Non-finite values become `null` (empty in CSV).
    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        let v = Number::from_f64(value).map_or(Value::Null, Value::Number);
        self.0.insert(key.into(), v);
        self
    }

    pub fn null(&mut self, key: &str) -> &mut Self {
        self.0.insert(key.into(), Value::Null);
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("records serialize")
    }

    fn csv_cells(&self) -> Vec<String> {
        self.0
            .values()
            .map(|v| match v {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect()
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> std::io::Result<()> {
        write_records(std::slice::from_ref(self), format, out)
    }
}

/// JSON writes one object per line; CSV writes a header and one row per
/// record (all records must share keys).
pub fn write_records<W: Write>(records: &[Record], format: Format, mut out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                w.write_record(first.keys())?;
            }
            for r in records {
                w.write_record(r.csv_cells())?;
            }
            w.flush()
        }
        _ => {
            for r in records {
                writeln!(out, "{}", r.to_json())?;
            }
            Ok(())
        }
    }
}
