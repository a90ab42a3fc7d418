use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Int,
    Float,
    Text,
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: &str, kind: ColumnKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
        }
    }
}

/// A typed table cell. Floats compare by bit pattern.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Int(a), Cell::Int(b)) => a == b,
            (Cell::Float(a), Cell::Float(b)) => a.to_bits() == b.to_bits(),
            (Cell::Text(a), Cell::Text(b)) => a == b,
            (Cell::Bool(a), Cell::Bool(b)) => a == b,
            _ => false,
        }
    }
}

impl Cell {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Cell::Int(_) => ColumnKind::Int,
            Cell::Float(_) => ColumnKind::Float,
            Cell::Text(_) => ColumnKind::Text,
            Cell::Bool(_) => ColumnKind::Bool,
        }
    }

    /// Shortest decimal that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn parse(text: &str, kind: ColumnKind) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse {text:?} as {kind:?}"));
        Ok(match kind {
            ColumnKind::Int => Cell::Int(text.parse().map_err(|_| bad())?),
            ColumnKind::Float => Cell::Float(text.parse().map_err(|_| bad())?),
            ColumnKind::Text => Cell::Text(text.to_string()),
            ColumnKind::Bool => Cell::Bool(text.parse().map_err(|_| bad())?),
        })
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => i64::try_from(*v)
                .map(Value::from)
                .or_else(|_| u64::try_from(*v).map(Value::from))
                .unwrap_or_else(|_| Value::String(v.to_string())),
            Cell::Float(v) => Number::from_f64(*v).map(Value::Number).unwrap_or_else(|| Value::String(format!("{v:?}"))),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }

    fn from_json(v: &Value, kind: ColumnKind) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unexpected JSON value {v} for {kind:?}"));
        match (kind, v) {
            (ColumnKind::Int, Value::Number(n)) => n
                .as_i64()
                .map(|x| Cell::Int(x as i128))
                .or_else(|| n.as_u64().map(|x| Cell::Int(x as i128)))
                .ok_or_else(bad),
            (ColumnKind::Float, Value::Number(n)) => n.as_f64().map(Cell::Float).ok_or_else(bad),
            (ColumnKind::Text, Value::String(s)) => Ok(Cell::Text(s.clone())),
            (ColumnKind::Bool, Value::Bool(b)) => Ok(Cell::Bool(*b)),
            (_, Value::String(s)) => Cell::parse(s, kind),
            _ => Err(bad()),
        }
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cell::Int(a), Cell::Int(b)) => a.cmp(b),
            (Cell::Float(a), Cell::Float(b)) => a.total_cmp(b),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            (Cell::Bool(a), Cell::Bool(b)) => a.cmp(b),
            _ => (self.kind() as u8).cmp(&(other.kind() as u8)),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i128)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Rows of typed cells under a fixed column schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub schema_version: u32,
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} cells, schema has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (c, col) in row.iter().zip(&self.columns) {
            if c.kind() != col.kind {
                return Err(Error::InvalidParameter(format!(
                    "column {} expects {:?}, got {:?}",
                    col.name,
                    col.kind,
                    c.kind()
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Stable sort by the named key columns present in the schema, followed
    /// by every remaining column so that the order is total.
    pub fn sort_by_keys(&mut self, keys: &[&str]) {
        let mut order: Vec<usize> = keys.iter().filter_map(|k| self.column_index(k)).collect();
        for i in 0..self.columns.len() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        self.rows.sort_by(|a, b| {
            order
                .iter()
                .map(|&i| a[i].cmp_total(&b[i]))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
    }

    /// Sort by `(n, u, v, p)`.
    pub fn sort_canonical(&mut self) {
        self.sort_by_keys(&["n", "u", "v", "p"]);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv_str(text: &str, columns: Vec<Column>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let expected: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        if header != expected {
            return Err(Error::InvalidParameter(format!("CSV header {header:?} does not match schema")));
        }
        let mut table = Self::new(columns);
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .zip(&table.columns)
                .map(|(s, c)| Cell::parse(s, c.kind))
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (c, col) in row.iter().zip(&self.columns) {
                        m.insert(col.name.clone(), c.to_json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.to_json_value())?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(text: &str, columns: Vec<Column>) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let Value::Array(items) = v else {
            return Err(Error::InvalidParameter("JSON table must be an array".into()));
        };
        let mut table = Self::new(columns);
        for item in items {
            let Value::Object(m) = item else {
                return Err(Error::InvalidParameter("JSON rows must be objects".into()));
            };
            let row = table
                .columns
                .iter()
                .map(|c| {
                    let v = m
                        .get(&c.name)
                        .ok_or_else(|| Error::InvalidParameter(format!("missing field {}", c.name)))?;
                    Cell::from_json(v, c.kind)
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    /// Writes `dir/stem.{csv,json}` and returns the path.
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str, format: Format) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{stem}.{}", format.extension()));
        let text = match format {
            Format::Csv => self.to_csv_string()?,
            Format::Json => self.to_json_string()?,
        };
        write_file(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: impl AsRef<Path>, columns: Vec<Column>, format: Format) -> Result<Self> {
        let path = path.as_ref();
        let mut text = String::new();
        std::io::Read::read_to_string(&mut BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?), &mut text)
            .map_err(|e| Error::io(path, e))?;
        match format {
            Format::Csv => Self::from_csv_str(&text, columns),
            Format::Json => Self::from_json_str(&text, columns),
        }
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
