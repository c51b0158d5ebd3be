//! Report writers. CSV and JSON carry the same numbers formatted to 15
//! significant digits so the two formats are bit-for-bit comparable.

use std::fmt::Write as _;

/// 15 significant digits, scientific.
pub fn g15(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn g15_opt(x: Option<f64>) -> String {
    x.map(g15).unwrap_or_default()
}

/// Minimal JSON writer for the flat report structures emitted here.
#[derive(Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn string(mut self, key: &str, value: &str) -> Self {
        self.fields.push((key.to_string(), json_string(value)));
        self
    }

    pub fn number(mut self, key: &str, value: f64) -> Self {
        self.fields.push((key.to_string(), g15(value)));
        self
    }

    pub fn number_opt(mut self, key: &str, value: Option<f64>) -> Self {
        let rendered = match value {
            Some(v) => g15(v),
            None => "null".to_string(),
        };
        self.fields.push((key.to_string(), rendered));
        self
    }

    pub fn integer(mut self, key: &str, value: usize) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn boolean(mut self, key: &str, value: bool) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn raw(mut self, key: &str, value: String) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{}:{}", json_string(k), v).unwrap();
        }
        out.push('}');
        out
    }
}

pub fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                write!(out, "\\u{:04x}", c as u32).unwrap();
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn json_array(items: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from("[");
    for (i, item) in items.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&item);
    }
    out.push(']');
    out
}

pub fn number_array(values: &[f64]) -> String {
    json_array(values.iter().map(|&v| g15(v)))
}

/// CSV line from already-rendered cells (values here never contain commas
/// or quotes; status messages are sanitized by the caller).
pub fn csv_line(cells: &[String]) -> String {
    cells.join(",")
}
