//! Flat output records. CSV and JSON share the column names and order.

use anyhow::Context;
use serde_json::{Map, Number, Value as Json};
use std::io::Write;

pub const FORMAT_VERSION_LINE: &str = "# powerwalk v1";

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Value {
    fn csv_cell(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            // Same shortest round-trip text as the JSON output.
            Value::Float(v) => Number::from_f64(*v).map_or_else(|| v.to_string(), |n| n.to_string()),
            Value::Bool(v) => v.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(v) => Json::from(*v),
            Value::Float(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Value::Bool(v) => Json::Bool(*v),
            Value::Text(s) => Json::String(s.clone()),
            Value::Missing => Json::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.into())
    }
}

macro_rules! int_value {
    ($($t:ty),*) => {$(
        impl From<$t> for Value {
            fn from(v: $t) -> Self {
                Value::Int(v as i64)
            }
        }
    )*};
}
int_value!(u32, u64, usize, i64);

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

/// A column name with its `--help` description.
pub type Column = (&'static str, &'static str);

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    fields: Vec<(&'static str, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self { fields: Vec::new() }
    }

    pub fn with(mut self, name: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push((name, value.into()));
        self
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.fields.iter().map(|f| f.0).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|f| f.0 == name).map(|f| &f.1)
    }

    pub fn f64(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(Value::as_f64)
    }
}

impl Default for Record {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: &'static [Column],
    pub records: Vec<Record>,
}

impl Table {
    pub fn new(columns: &'static [Column]) -> Self {
        Self {
            columns,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: Record) {
        debug_assert_eq!(
            record.names(),
            self.columns.iter().map(|c| c.0).collect::<Vec<_>>(),
            "record fields must match the documented columns"
        );
        self.records.push(record);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        writeln!(out, "{FORMAT_VERSION_LINE}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.0))?;
        for r in &self.records {
            w.write_record(r.fields.iter().map(|f| f.1.csv_cell()))?;
        }
        w.flush().context("writing CSV")?;
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.records
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (k, v) in &r.fields {
                        m.insert((*k).into(), v.json());
                    }
                    Json::Object(m)
                })
                .collect(),
        )
    }

    pub fn write_json(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }
}

/// Column list formatted for `--help`.
pub fn columns_help(columns: &[Column]) -> String {
    let width = columns.iter().map(|c| c.0.len()).max().unwrap_or(0);
    let mut s = String::from("Output columns (CSV header order; JSON records use the same keys):\n");
    for (name, doc) in columns {
        s.push_str(&format!("  {name:<width$}  {doc}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const COLS: &[Column] = &[("a", "first"), ("b", "second"), ("c", "third")];

    fn table() -> Table {
        let mut t = Table::new(COLS);
        t.push(Record::new().with("a", 1u32).with("b", 0.1).with("c", "x,y"));
        t.push(Record::new().with("a", 2u32).with("b", f64::NAN).with("c", None::<f64>));
        t
    }

    #[test]
    fn csv_has_version_line_and_quotes() {
        let mut buf = Vec::new();
        table().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# powerwalk v1\na,b,c\n1,0.1,\"x,y\"\n2,NaN,\n");
    }

    #[test]
    fn json_is_flat_and_ordered() {
        let j = table().to_json();
        assert_eq!(
            j.to_string(),
            r#"[{"a":1,"b":0.1,"c":"x,y"},{"a":2,"b":null,"c":null}]"#
        );
    }

    #[test]
    fn floats_round_trip_through_csv_text() {
        for x in [0.1 + 0.2, 4.440892098500626e-16, 1e300, -7.0] {
            assert_eq!(Value::Float(x).csv_cell().parse::<f64>().unwrap(), x);
        }
        assert_eq!(Value::Float(4.440892098500626e-16).csv_cell(), "4.440892098500626e-16");
    }
}
