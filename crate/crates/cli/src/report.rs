//! Format-independent results and their JSON, CSV and text renderings.

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Num(f64),
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

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Table {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Plain CSV: header plus rows, numbers with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self
            .columns
            .iter()
            .map(|c| csv_field(c))
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(s) => csv_field(s),
                    Cell::Int(i) => i.to_string(),
                    Cell::Num(v) => exact(*v),
                })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of one command: named scalars followed by named tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub scalars: Vec<(String, Cell)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            scalars: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn scalar(&mut self, key: &str, value: impl Into<Cell>) {
        self.scalars.push((key.to_string(), value.into()));
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn find_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        for (k, v) in &self.scalars {
            root.insert(k.clone(), json_cell(v));
        }
        for t in &self.tables {
            let rows = t
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = t
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.clone(), json_cell(v)))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            root.insert(t.name.clone(), Value::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
        s.push('\n');
        s
    }

    /// Scalars as a `key,value` block, then each table, separated by blank
    /// lines and introduced by a `# name` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.scalars.is_empty() {
            let mut t = Table::new("summary", &["key", "value"]);
            for (k, v) in &self.scalars {
                t.push(vec![Cell::Text(k.clone()), v.clone()]);
            }
            out.push_str("# summary\n");
            out.push_str(&t.to_csv());
        }
        for t in &self.tables {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("# {}\n", t.name));
            out.push_str(&t.to_csv());
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        let width = self.scalars.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.scalars {
            out.push_str(&format!("  {k:<width$}  {}\n", text_cell(v)));
        }
        for t in &self.tables {
            out.push_str(&format!("\n{}\n", t.name));
            let cells: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| r.iter().map(text_cell).collect())
                .collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|j| {
                    cells
                        .iter()
                        .map(|r| r[j].chars().count())
                        .chain(std::iter::once(t.columns[j].chars().count()))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |items: Vec<&str>| {
                let padded: Vec<String> = items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}", w = *w))
                    .collect();
                format!("  {}\n", padded.join("  "))
            };
            out.push_str(&line(t.columns.iter().map(String::as_str).collect()));
            for r in &cells {
                out.push_str(&line(r.iter().map(String::as_str).collect()));
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn exact(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    format!("{v:.16e}")
}

/// 6 significant digits in the shorter of fixed or scientific notation.
pub fn human(v: f64) -> String {
    if !v.is_finite() {
        return exact(v);
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let (mantissa, e) = sci.split_once('e').unwrap();
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Int(i) => Value::Number((*i).into()),
        Cell::Num(v) if v.is_finite() => {
            Value::Number(exact(*v).parse::<Number>().expect("valid JSON number"))
        }
        Cell::Num(_) => Value::Null,
    }
}

fn text_cell(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(v) => human(*v),
    }
}
