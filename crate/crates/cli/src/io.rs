//! Series ingestion and structured output rendering.

use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

#[derive(Debug)]
pub struct InputError(pub String);

/// Reads one numeric column. Accepts plain CSV (optional header) and JSON
/// lines. With several columns, `column` or a column named `value` selects one.
pub fn read_series(path: &Path, column: Option<&str>) -> Result<Vec<Option<f64>>, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let values = if text.trim_start().starts_with('{') { parse_json_lines(&text, column) } else { parse_csv(&text, column) };
    values.map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn parse_json_lines(text: &str, column: Option<&str>) -> Result<Vec<Option<f64>>, String> {
    let key = column.unwrap_or("value");
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            let v: Value = serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1))?;
            match v.get(key) {
                Some(Value::Number(n)) => Ok(n.as_f64()),
                Some(Value::Null) => Ok(None),
                _ => Err(format!("line {}: no numeric field '{key}'", i + 1)),
            }
        })
        .collect()
}

fn parse_csv(text: &str, column: Option<&str>) -> Result<Vec<Option<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let Some(first) = rows.next() else { return Err("no data".into()) };
    let first = first.map_err(|e| e.to_string())?;
    let header = first.iter().any(|f| f.parse::<f64>().is_err());
    let idx = if header {
        let names: Vec<&str> = first.iter().collect();
        match column {
            Some(c) => names.iter().position(|n| *n == c).ok_or_else(|| format!("no column '{c}' in header {names:?}"))?,
            None if names.len() == 1 => 0,
            None => names.iter().position(|n| *n == "value").ok_or_else(|| format!("several columns {names:?}; choose one with --column"))?,
        }
    } else if first.len() == 1 {
        0
    } else {
        return Err(format!("expected a single column, found {}", first.len()));
    };
    let parse = |rec: &csv::StringRecord, line: usize| -> Result<Option<f64>, String> {
        let f = rec.get(idx).ok_or_else(|| format!("line {line}: missing field"))?;
        if f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan") {
            return Ok(None);
        }
        f.parse::<f64>().map(Some).map_err(|_| format!("line {line}: '{f}' is not a number"))
    };
    let mut out = Vec::new();
    if !header {
        out.push(parse(&first, 1)?);
    }
    for (i, rec) in rows.enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        out.push(parse(&rec, i + 2)?);
    }
    Ok(out)
}

/// A complete series: missing entries are an error.
pub fn read_complete(path: &Path, column: Option<&str>) -> Result<Vec<f64>, InputError> {
    let v = read_series(path, column)?;
    v.iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| InputError(format!("{}: missing value at row {}", path.display(), i + 1))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// One JSON object per line.
    Json,
    Csv,
    /// Aligned columns for reading at a terminal.
    Text,
}

/// A named block of records sharing the same keys.
pub struct Block {
    pub name: &'static str,
    pub rows: Vec<Map<String, Value>>,
}

impl Block {
    pub fn new(name: &'static str, rows: Vec<Map<String, Value>>) -> Self {
        Self { name, rows }
    }

    pub fn single(name: &'static str, row: Map<String, Value>) -> Self {
        Self { name, rows: vec![row] }
    }
}

/// Builds an ordered JSON object from `key => value` pairs.
#[macro_export]
macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = serde_json::Map::new();
        $( m.insert($k.to_string(), serde_json::json!($v)); )*
        m
    }};
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => {
            let f = n.as_f64().unwrap_or(f64::NAN);
            if n.is_f64() { format!("{f:?}") } else { n.to_string() }
        }
        other => other.to_string(),
    }
}

pub fn render(blocks: &[Block], format: Format) -> String {
    let mut out = String::new();
    let many = blocks.len() > 1;
    for (b, block) in blocks.iter().enumerate() {
        match format {
            Format::Json => {
                for row in &block.rows {
                    let mut row = row.clone();
                    if many {
                        row.insert("section".into(), Value::String(block.name.into()));
                    }
                    out.push_str(&Value::Object(row).to_string());
                    out.push('\n');
                }
            }
            Format::Csv | Format::Text => {
                if b > 0 {
                    out.push('\n');
                }
                if many {
                    let _ = writeln!(out, "# {}", block.name);
                }
                let Some(first) = block.rows.first() else { continue };
                let keys: Vec<&String> = first.keys().collect();
                let cells: Vec<Vec<String>> = block
                    .rows
                    .iter()
                    .map(|r| keys.iter().map(|k| r.get(*k).map(scalar).unwrap_or_default()).collect())
                    .collect();
                if format == Format::Csv {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let _ = w.write_record(&keys);
                    for c in &cells {
                        let _ = w.write_record(c);
                    }
                    out.push_str(&String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default());
                } else {
                    let widths: Vec<usize> = (0..keys.len())
                        .map(|i| cells.iter().map(|c| c[i].len()).chain([keys[i].len()]).max().unwrap_or(0))
                        .collect();
                    let line = |fields: Vec<&str>| {
                        fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect::<Vec<_>>().join("  ")
                    };
                    let _ = writeln!(out, "{}", line(keys.iter().map(|k| k.as_str()).collect()));
                    for c in &cells {
                        let _ = writeln!(out, "{}", line(c.iter().map(String::as_str).collect()));
                    }
                }
            }
        }
    }
    out
}

/// Writes to `path` through a temporary file in the same directory and a
/// rename, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, content: &str) -> io::Result<()> {
    match path {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()
        }
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(content.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
