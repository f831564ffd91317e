use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::{StudyConfig, StudyError};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => float_17(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map(Into::into).unwrap_or(Cell::Null)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Le => value <= threshold,
            Comparison::Lt => value < threshold,
            Comparison::Ge => value >= threshold,
            Comparison::Gt => value > threshold,
        }
    }
}

/// A thresholded check. `value` is taken at the finest resolution; when a
/// coarser value exists, a gate that fails there but passes at the finest
/// level is `flagged`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub description: String,
    pub comparison: Comparison,
    pub threshold: f64,
    pub value: f64,
    pub passed: bool,
    pub coarse_value: Option<f64>,
    pub coarse_passed: Option<bool>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub config: StudyConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: BTreeMap<String, f64>,
    pub gates: Vec<Gate>,
    pub environment: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

impl StudyReport {
    pub(crate) fn new(config: &StudyConfig, columns: &[&str]) -> Self {
        StudyReport {
            study: config.study.clone(),
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            gates: Vec::new(),
            environment: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Adds a gate over per-level values (coarsest first, finest last); the
    /// threshold may be overridden by the config entry of the same name.
    pub(crate) fn gate(&mut self, name: &str, description: &str, comparison: Comparison, threshold: f64, levels: &[f64]) {
        let threshold = self.config.gates.get(name).copied().unwrap_or(threshold);
        let value = *levels.last().expect("at least one level");
        let passed = comparison.holds(value, threshold);
        let coarse = (levels.len() > 1).then(|| levels[0]);
        let coarse_passed = coarse.map(|v| comparison.holds(v, threshold));
        self.gates.push(Gate {
            name: name.to_string(),
            description: description.to_string(),
            comparison,
            threshold,
            value,
            passed,
            coarse_value: coarse,
            coarse_passed,
            flagged: passed && coarse_passed == Some(false),
        });
    }

    pub(crate) fn env<T: Serialize>(&mut self, key: &str, value: T) {
        self.environment
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column `name` over the rows accepted by `keep`.
    pub fn values<F: Fn(&[Cell]) -> bool>(&self, name: &str, keep: F) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter(|r| keep(r))
            .filter_map(|r| r[i].as_f64())
            .collect()
    }

    /// Cell `name` of `row`.
    pub fn cell<'a>(&self, row: &'a [Cell], name: &str) -> &'a Cell {
        &row[self.column(name).unwrap_or_else(|| panic!("no column {name}"))]
    }

    pub fn gate_named(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn failures(&self) -> Vec<&Gate> {
        self.gates.iter().filter(|g| !g.passed).collect()
    }

    pub fn to_json(&self) -> String {
        to_json_17(&serde_json::to_value(self).expect("report serializes"))
    }

    pub fn rows_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes the JSON report to `path` and the rows to `path` with extension `csv`.
    pub fn write(&self, path: &Path) -> Result<(), StudyError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json())?;
        std::fs::write(path.with_extension("csv"), self.rows_csv())?;
        Ok(())
    }
}

fn float_17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Pretty JSON with every float written to 17 significant digits.
pub fn to_json_17(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) if n.is_f64() => out.push_str(&float_17(n.as_f64().unwrap())),
        Value::Array(items) if !items.is_empty() => {
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(item, indent, out);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    write_value(item, indent + 1, out);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                let _ = write!(out, "{}]", pad(indent));
            }
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), Value::String(key.clone()));
                write_value(item, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", pad(indent));
        }
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_digits_and_parse_back() {
        let v = serde_json::json!({"a": 0.1, "b": [1, 2.5, "x"], "c": {"d": null, "e": f64::MIN_POSITIVE}});
        let s = to_json_17(&v);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("2.5000000000000000e0"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"][0].as_i64(), Some(1));
        assert_eq!(back["c"]["e"].as_f64(), Some(f64::MIN_POSITIVE));
    }

    #[test]
    fn gates_flag_coarse_failures() {
        let mut r = StudyReport::new(&StudyConfig::named("t"), &["a"]);
        r.gate("g1", "", Comparison::Le, 1.0, &[2.0, 0.5]);
        r.gate("g2", "", Comparison::Le, 1.0, &[0.5, 2.0]);
        r.gate("g3", "", Comparison::Ge, 1.0, &[3.0]);
        assert!(r.gates[0].passed && r.gates[0].flagged);
        assert!(!r.gates[1].passed && !r.gates[1].flagged);
        assert!(r.gates[2].passed && r.gates[2].coarse_passed.is_none());
        assert_eq!(r.failures().len(), 1);
        let mut c = StudyConfig::named("t");
        c.gates.insert("g".into(), 10.0);
        let mut r = StudyReport::new(&c, &["a"]);
        r.gate("g", "", Comparison::Le, 1.0, &[5.0]);
        assert!(r.passed());
    }

    #[test]
    fn csv_escapes_text() {
        let mut r = StudyReport::new(&StudyConfig::named("t"), &["a", "b", "c"]);
        r.push(vec!["x,y".into(), Cell::Null, 0.5.into()]);
        assert_eq!(r.rows_csv(), "a,b,c\n\"x,y\",,5.0000000000000000e-1\n");
    }
}
