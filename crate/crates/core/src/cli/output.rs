//! Flat result records and their CSV/JSON encodings.
//!
//! CSV: one header row (keys of the first record, in insertion order) then one
//! row per record; floats carry 17 significant digits in `{:.16e}` form.
//! JSON: a top-level array of flat objects with the same keys and values.

use std::io::{self, Write};

use serde_json::{Map, Number, Value as Json};

use super::config::OutputFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(i) => Json::from(*i),
            Value::Float(x) => Number::from_f64(*x).map_or(Json::Null, Json::Number),
            Value::Bool(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultRecord {
    fields: Vec<(String, Value)>,
}

impl ResultRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn float(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.into(), Value::Float(v)));
        self
    }

    pub fn int(mut self, key: &str, v: impl TryInto<i64>) -> Self {
        let v = v.try_into().unwrap_or(i64::MAX);
        self.fields.push((key.into(), Value::Int(v)));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.fields.push((key.into(), Value::Bool(v)));
        self
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.fields.push((key.into(), Value::Text(v.into())));
        self
    }

    pub fn extend(mut self, other: &ResultRecord) -> Self {
        self.fields.extend(other.fields.iter().cloned());
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    /// Key of the first non-finite float, if any.
    pub fn first_non_finite(&self) -> Option<&str> {
        self.fields.iter().find(|(_, v)| matches!(v, Value::Float(x) if !x.is_finite())).map(|(k, _)| k.as_str())
    }
}

pub fn write_records<W: Write>(out: W, records: &[ResultRecord], format: OutputFormat) -> io::Result<()> {
    match format {
        OutputFormat::Csv => write_csv(out, records),
        OutputFormat::Json => write_json(out, records),
    }
}

pub fn write_csv<W: Write>(out: W, records: &[ResultRecord]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = records.first() {
        let header: Vec<&str> = first.keys().collect();
        w.write_record(&header)?;
        for r in records {
            if !r.keys().eq(header.iter().copied()) {
                return Err(io::Error::new(io::ErrorKind::InvalidData, "records in one run must share their keys"));
            }
            w.write_record(r.fields.iter().map(|(_, v)| v.csv_field()))?;
        }
    }
    w.flush()
}

pub fn write_json<W: Write>(mut out: W, records: &[ResultRecord]) -> io::Result<()> {
    let array: Vec<Json> = records
        .iter()
        .map(|r| Json::Object(r.fields.iter().map(|(k, v)| (k.clone(), v.json())).collect::<Map<_, _>>()))
        .collect();
    serde_json::to_writer_pretty(&mut out, &array)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ResultRecord> {
        vec![
            ResultRecord::new().int("atom", 0).float("x", 0.1).flag("ok", true).text("label", "a2"),
            ResultRecord::new().int("atom", 1).float("x", -2.5e-300).flag("ok", false).text("label", "b2"),
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("atom,x,ok,label"));
        assert_eq!(lines.next(), Some("0,1.0000000000000001e-1,true,a2"));
        assert_eq!(lines.next(), Some("1,-2.5000000000000000e-300,false,b2"));
    }

    #[test]
    fn csv_rejects_ragged_records() {
        let recs = vec![ResultRecord::new().int("a", 1), ResultRecord::new().int("b", 1)];
        assert!(write_csv(Vec::new(), &recs).is_err());
    }

    #[test]
    fn float_text_round_trips() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 5.208333333333333e-5, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        write_json(&mut buf, &sample()).unwrap();
        let v: Json = serde_json::from_slice(&buf).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 2);
        let keys: Vec<&str> = arr[0].as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["atom", "x", "ok", "label"]);
        assert_eq!(arr[1]["x"].as_f64(), Some(-2.5e-300));
    }

    #[test]
    fn detects_non_finite() {
        let r = ResultRecord::new().float("a", 1.0).float("b", f64::NAN);
        assert_eq!(r.first_non_finite(), Some("b"));
    }
}
