//! Staged artifact writing: tables, log and summary.
//!
//! Files are first written into a hidden staging directory inside the
//! output directory and moved into place only after the run succeeds, with
//! `summary.json` moved last. A failed run leaves no partial artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.json";
pub const LOG_FILE: &str = "run.log";

/// A table cell. Floats are written in shortest round-trip form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v == 0.0 || (1e-4..1e15).contains(&v.abs()) => format!("{v}"),
            Cell::Float(v) => format!("{v:e}"),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

/// A CSV table with a description for every column.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[(&'static str, &'static str)]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    fn header(&self) -> Vec<&'static str> {
        self.columns.iter().map(|c| c.0).collect()
    }

    fn schema(&self) -> BTreeMap<String, String> {
        self.columns
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

/// Every header column must be described in `schema`, and every row must
/// match the header width.
pub fn check_schema(
    table: &Table,
    schema: &BTreeMap<String, BTreeMap<String, String>>,
) -> Result<(), CliError> {
    let fail = |msg: String| CliError::Schema(format!("{}: {msg}", table.file_name()));
    let documented = schema
        .get(&table.file_name())
        .ok_or_else(|| fail("missing from the schema block".into()))?;
    for column in table.header() {
        if !documented.contains_key(column) {
            return Err(fail(format!("column `{column}` is undocumented")));
        }
    }
    let width = table.columns.len();
    if let Some(i) = table.rows.iter().position(|r| r.len() != width) {
        return Err(fail(format!(
            "row {i} has {} cells, expected {width}",
            table.rows[i].len()
        )));
    }
    Ok(())
}

/// Collected artifacts of one run.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub log: Vec<String>,
}

impl Artifacts {
    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    pub fn schema(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        self.tables
            .iter()
            .map(|t| (t.file_name(), t.schema()))
            .collect()
    }
}

/// A staging directory that is removed unless [`Staging::commit`] succeeds.
pub struct Staging {
    out: PathBuf,
    dir: PathBuf,
    created_out: bool,
    files: Vec<String>,
    committed: bool,
}

impl Staging {
    pub fn new(out: &Path) -> Result<Self, CliError> {
        let created_out = !out.exists();
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let dir = out.join(format!(".staging-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        }
        fs::create_dir(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self {
            out: out.to_path_buf(),
            dir,
            created_out,
            files: Vec::new(),
            committed: false,
        })
    }

    fn create(&mut self, name: &str) -> Result<(PathBuf, fs::File), CliError> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok((path, file))
    }

    pub fn write_csv(&mut self, table: &Table) -> Result<(), CliError> {
        let (path, file) = self.create(&table.file_name())?;
        let mut writer = csv::Writer::from_writer(file);
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        writer.write_record(table.header()).map_err(io)?;
        for row in &table.rows {
            writer
                .write_record(row.iter().map(Cell::render))
                .map_err(io)?;
        }
        writer.flush().map_err(|e| CliError::io(&path, e))
    }

    pub fn write_gnuplot(&mut self, table: &Table) -> Result<(), CliError> {
        let mut text = format!("# {}\n", table.header().join(" "));
        for row in &table.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            text.push_str(&line.join(" "));
            text.push('\n');
        }
        self.write_text(&format!("{}.dat", table.name), &text)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let (path, mut file) = self.create(name)?;
        file.write_all(text.as_bytes())
            .map_err(|e| CliError::io(&path, e))
    }

    /// Moves every staged file into the output directory, `summary.json` last.
    pub fn commit(mut self, summary: &Value) -> Result<Vec<String>, CliError> {
        let text = serde_json::to_string_pretty(summary).expect("summary serializes") + "\n";
        self.write_text(SUMMARY_FILE, &text)?;
        let mut order: Vec<String> = self
            .files
            .iter()
            .filter(|f| *f != SUMMARY_FILE)
            .cloned()
            .collect();
        order.push(SUMMARY_FILE.to_string());
        for name in &order {
            let (from, to) = (self.dir.join(name), self.out.join(name));
            fs::rename(&from, &to).map_err(|e| CliError::io(&to, e))?;
        }
        fs::remove_dir(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        self.committed = true;
        Ok(order)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        let _ = fs::remove_dir_all(&self.dir);
        if self.created_out {
            // only removes the directory when nothing else was put there
            let _ = fs::remove_dir(&self.out);
        }
    }
}
