//! Tables, CSV/JSON rendering and the run manifest.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_g17(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(format_g17(*x))),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// A one-by-one table printed as the bare value.
    pub bare: bool,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            bare: false,
        }
    }

    /// A single value, printed without a header.
    pub fn scalar(name: &str, value: Cell) -> Self {
        Self {
            columns: vec![name.to_string()],
            rows: vec![vec![value]],
            bare: true,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("row {row} has {found} cells but the schema has {expected} columns")]
pub struct SchemaMismatch {
    pub row: usize,
    pub found: usize,
    pub expected: usize,
}

/// Header row plus one line per row, LF-terminated; floats carry 17
/// significant digits.
pub fn emit_csv(table: &Table) -> Result<String, SchemaMismatch> {
    check(table)?;
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn check(table: &Table) -> Result<(), SchemaMismatch> {
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != table.columns.len() {
            return Err(SchemaMismatch {
                row: i,
                found: row.len(),
                expected: table.columns.len(),
            });
        }
    }
    Ok(())
}

/// Text written for `table`: the bare value, or CSV.
pub fn render_text(table: &Table) -> Result<String, SchemaMismatch> {
    check(table)?;
    if table.bare && table.rows.len() == 1 && table.columns.len() == 1 {
        return Ok(format!("{}\n", table.rows[0][0].csv()));
    }
    emit_csv(table)
}

/// `{"rows": [...], "manifest": {...}}` on one line.
pub fn render_json(table: &Table, manifest: &RunManifest) -> Result<String, SchemaMismatch> {
    check(table)?;
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, cell) in table.columns.iter().zip(row) {
                obj.insert(name.clone(), cell.json());
            }
            Value::Object(obj)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("rows".into(), Value::Array(rows));
    doc.insert(
        "manifest".into(),
        serde_json::to_value(manifest).unwrap_or(Value::Null),
    );
    Ok(format!("{}\n", Value::Object(doc)))
}

/// Formats like C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Everything that determined a run's output, printed as one JSON line on
/// standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// `capacity` or `power-noise`, when a channel was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: Map<String, Value>,
    /// SHA-256 of the CSV rendering of the output.
    pub checksum: String,
}

pub fn checksum(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        // Expected strings from printf("%.17g").
        let cases = [
            (0.25, "0.25"),
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (100.0, "100"),
            (1e16, "10000000000000000"),
            (1e17, "1e+17"),
            (1.5e-5, "1.5e-05"),
            (1e-4, "0.0001"),
            (-2.5, "-2.5"),
            (123456.789, "123456.789"),
            (1.0 / 3.0, "0.33333333333333331"),
            (6.02e23, "6.02e+23"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g17(x), s);
        }
        assert_eq!(format_g17(f64::INFINITY), "inf");
        assert_eq!(format_g17(0.0), "0");
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[
            0.1,
            1.0 / 3.0,
            2f64.sqrt(),
            1e-300,
            1.7976931348623157e308,
            5e-324,
        ] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_schema() {
        let t = Table::new(&["k", "n", "p_hat", "ci_lo", "ci_hi"]);
        assert_eq!(emit_csv(&t).unwrap(), "k,n,p_hat,ci_lo,ci_hi\n");
        let mut t = Table::new(&["param", "value"]);
        t.push(vec![Cell::Float(0.5), Cell::Float(0.25)]);
        assert_eq!(emit_csv(&t).unwrap(), "param,value\n0.5,0.25\n");
        t.push(vec![Cell::Float(0.5)]);
        assert!(emit_csv(&t).is_err());
    }

    #[test]
    fn bare_scalar() {
        let t = Table::scalar("value", Cell::Float(0.25));
        assert_eq!(render_text(&t).unwrap(), "0.25\n");
    }
}
