//! Report envelope and CSV/JSON rendering.
//!
//! Floats are rounded to 12 significant digits and then printed in their
//! shortest round-trip form, identically in CSV and JSON.

use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

pub const TOOL: &str = "y00";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Round to 12 significant digits; non-finite values become JSON null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    json!(rounded)
}

/// A subcommand result: a table or a JSON object.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
    Object(Map<String, Value>),
}

impl Payload {
    pub fn table(columns: &[&str]) -> Self {
        Payload::Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        if let Payload::Table { columns, rows } = self {
            debug_assert_eq!(row.len(), columns.len());
            rows.push(row);
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Payload::Table { columns, rows } => Value::Array(
                rows.iter()
                    .map(|row| {
                        Value::Object(columns.iter().cloned().zip(row.iter().cloned()).collect())
                    })
                    .collect(),
            ),
            Payload::Object(map) => Value::Object(map.clone()),
        }
    }

    /// CSV body: the table itself, or `key,value` rows of a flattened object.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Payload::Table { columns, rows } => {
                out.push_str(&columns.join(","));
                out.push('\n');
                for row in rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Payload::Object(map) => {
                out.push_str("key,value\n");
                let mut flat = Vec::new();
                flatten("", &Value::Object(map.clone()), &mut flat);
                for (k, v) in flat {
                    out.push_str(&format!("{k},{}\n", csv_cell(&v)));
                }
            }
        }
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

/// `SOURCE_DATE_EPOCH` when set, else the current Unix time.
pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEnvelope {
    pub version: String,
    pub timestamp: u64,
    /// Resolved configuration as `key = value` pairs.
    pub config: Vec<(String, String)>,
    pub payload: Payload,
}

impl ReportEnvelope {
    pub fn new(config: Vec<(String, String)>, payload: Payload) -> Self {
        Self {
            version: VERSION.to_string(),
            timestamp: timestamp(),
            config,
            payload,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let config: Map<String, Value> = self
                    .config
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                    .collect();
                let doc = json!({
                    "tool": TOOL,
                    "version": self.version,
                    "timestamp": self.timestamp,
                    "config": config,
                    "payload": self.payload.to_json(),
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialise");
                text.push('\n');
                text
            }
            Format::Csv => {
                let mut text = format!(
                    "# tool = {TOOL} {}\n# timestamp = {}\n",
                    self.version, self.timestamp
                );
                for (k, v) in &self.config {
                    text.push_str(&format!("# {k} = {v}\n"));
                }
                text.push_str(&self.payload.to_csv());
                text
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(num(std::f64::consts::PI).to_string(), "3.14159265359");
        assert_eq!(
            num(-1.234567890123456e-109).to_string(),
            "-1.23456789012e-109"
        );
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn table_renders_both_ways() {
        let mut p = Payload::table(&["role", "ber"]);
        p.push_row(vec![json!("bob"), num(0.0351)]);
        assert_eq!(p.to_csv(), "role,ber\nbob,0.0351\n");
        assert_eq!(p.to_json(), json!([{"role": "bob", "ber": 0.0351}]));
    }

    #[test]
    fn objects_flatten_to_key_value_rows() {
        let mut map = Map::new();
        map.insert("a".into(), json!(1));
        map.insert("inner".into(), json!({"M": 4, "rule": "x,y"}));
        map.insert("list".into(), json!([true]));
        let csv = Payload::Object(map).to_csv();
        assert_eq!(
            csv,
            "key,value\na,1\ninner.M,4\ninner.rule,\"x,y\"\nlist.0,true\n"
        );
    }

    #[test]
    fn csv_envelope_carries_config_echo() {
        let env = ReportEnvelope {
            version: "0.0.0".into(),
            timestamp: 5,
            config: vec![("protocol.S".into(), "1".into())],
            payload: Payload::table(&["x"]),
        };
        assert_eq!(
            env.render(Format::Csv),
            "# tool = y00 0.0.0\n# timestamp = 5\n# protocol.S = 1\nx\n"
        );
    }
}
