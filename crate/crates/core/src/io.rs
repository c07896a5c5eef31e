//! Deterministic text emission: fixed float formatting and `#`-prefixed
//! `key=value` metadata headers that parse back losslessly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const SCHEMA: &str = "squeeze-dyn/1";

/// 17 significant digits; round-trips every finite f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

/// Ordered list of header entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Self {
        let mut h = Self::default();
        h.push("schema", SCHEMA);
        h
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        let value = value.into();
        debug_assert!(!key.contains('=') && !value.contains('\n'));
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn push_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.push(key, fmt_f64(value))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.iter().cloned().collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }

    /// Collects the leading `# key=value` lines of a CSV body.
    pub fn parse(text: &str) -> Self {
        let mut h = Self::default();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix("# ") else {
                break;
            };
            if let Some((k, v)) = rest.split_once('=') {
                h.entries.push((k.to_string(), v.to_string()));
            }
        }
        h
    }
}

/// Renders a header plus comma-separated rows.
pub fn render_csv(header: &Header, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.render();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Serializes `f64` with non-finite values as `null`.
pub mod finite_or_null {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }
}
