//! Report assembly and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

/// A finished run: CSV rows plus a JSON summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Report { columns, rows: Vec::new(), summary: Map::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }
}

/// Shortest round-trip decimal (exponent form for very large or small
/// magnitudes); `inf`/`-inf`/`nan` for the non-finite cases.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or `null` when not finite.
pub fn jnum(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub struct Header<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub params: Vec<(String, String)>,
    pub stamp: Option<u64>,
}

impl Header<'_> {
    fn lines(&self) -> String {
        let mut s = format!("# riplab {}\n# command={}\n# seed={}\n", env!("CARGO_PKG_VERSION"), self.command, self.seed);
        for (k, v) in &self.params {
            s.push_str(&format!("# {k}={v}\n"));
        }
        if let Some(t) = self.stamp {
            s.push_str(&format!("# stamp=unix:{t}\n"));
        }
        s
    }
}

pub fn csv_body(report: &Report) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(report.columns)?;
    for r in &report.rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

fn summary_json(header: &Header<'_>, report: &Report) -> String {
    let mut doc = Map::new();
    doc.insert("command".into(), header.command.into());
    doc.insert("seed".into(), header.seed.into());
    let params: Map<String, Value> = header.params.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
    doc.insert("params".into(), Value::Object(params));
    doc.insert("results".into(), Value::Object(report.summary.clone()));
    if let Some(t) = header.stamp {
        doc.insert("stamp".into(), t.into());
    }
    serde_json::to_string_pretty(&Value::Object(doc)).expect("summary serializes")
}

/// Path of the JSON summary written next to a CSV report.
pub fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".json");
    out.with_file_name(name)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the CSV (header comments, then the body) and its JSON summary,
/// either to `out` and `out.json` or to stdout.
pub fn emit(header: &Header<'_>, report: &Report, out: Option<&Path>) -> std::io::Result<()> {
    let mut csv = header.lines().into_bytes();
    csv.extend(csv_body(report)?);
    let json = summary_json(header, report);
    match out {
        Some(path) => {
            write_atomic(path, &csv)?;
            write_atomic(&summary_path(path), format!("{json}\n").as_bytes())?;
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(&csv)?;
            let compact: Value = serde_json::from_str(&json).expect("summary parses");
            writeln!(so, "# summary {compact}")?;
        }
    }
    Ok(())
}
