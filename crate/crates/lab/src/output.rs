//! CSV and JSON artifacts and the run manifest that vouches for them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Settings;
use crate::LabError;

pub const OUT_DIR_ENV: &str = "THINLEVY_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits: enough to round-trip any f64
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
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
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

fn writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf)
}

fn csv_error(e: csv::Error) -> LabError {
    LabError::Io(format!("csv: {e}"))
}

fn check_row(header: &[&str], row: &[Cell]) -> Result<(), LabError> {
    if row.len() != header.len() {
        return Err(LabError::Numerical(format!(
            "emit_csv: row has {} fields, schema has {} ({})",
            row.len(),
            header.len(),
            header.join(",")
        )));
    }
    Ok(())
}

/// Header plus rows, LF line endings; an empty table is just the header.
pub fn emit_csv(table: &Table) -> Result<Vec<u8>, LabError> {
    let mut buf = Vec::new();
    {
        let mut w = writer(&mut buf);
        w.write_record(&table.header).map_err(csv_error)?;
        for row in &table.rows {
            check_row(&table.header, row)?;
            w.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
        }
        w.flush().map_err(|e| LabError::Io(e.to_string()))?;
    }
    Ok(buf)
}

/// Header and rows of a CSV document, as strings.
pub fn parse_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<String>>), LabError> {
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()
        .map_err(csv_error)?;
    Ok((header, rows))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let io = |e: std::io::Error| LabError::Io(format!("{}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub command_line: Vec<String>,
    pub config: Settings,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputDigest>,
}

/// Output directory of one run; collects the files it writes.
pub struct Run {
    dir: PathBuf,
    command: String,
    started: String,
    written: Vec<PathBuf>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Run {
    /// `$THINLEVY_OUT_DIR`, or `./thinlevy-out`.
    pub fn start(command: &str) -> Result<Self, LabError> {
        let dir = std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("thinlevy-out"));
        fs::create_dir_all(&dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            command: command.to_string(),
            started: now(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn record(&mut self, path: PathBuf) {
        if !self.written.contains(&path) {
            self.written.push(path);
        }
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<PathBuf, LabError> {
        let path = self.dir.join(name);
        write_atomic(&path, &emit_csv(table)?)?;
        self.record(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, LabError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Io(e.to_string()))?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        self.record(path.clone());
        Ok(path)
    }

    /// Appends one row, writing the header first when the file is new; a
    /// file with a different header is a schema mismatch.
    pub fn append_csv(&mut self, name: &str, header: &[&'static str], row: Vec<Cell>) -> Result<PathBuf, LabError> {
        check_row(header, &row)?;
        let path = self.dir.join(name);
        let mut bytes = match fs::read(&path) {
            Ok(b) => {
                let (have, _) = parse_csv(&b)?;
                if have != header {
                    return Err(LabError::Numerical(format!(
                        "emit_csv: {} has header {}, expected {}",
                        path.display(),
                        have.join(","),
                        header.join(",")
                    )));
                }
                b
            }
            Err(_) => emit_csv(&Table::new(header))?,
        };
        {
            let mut w = writer(&mut bytes);
            w.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
            w.flush().map_err(|e| LabError::Io(e.to_string()))?;
        }
        write_atomic(&path, &bytes)?;
        self.record(path.clone());
        Ok(path)
    }

    /// Digests every file written and stores `<command>.manifest.json`.
    pub fn finish(self, settings: &Settings) -> Result<PathBuf, LabError> {
        let mut outputs = Vec::new();
        for p in &self.written {
            let bytes = fs::read(p).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))?;
            outputs.push(OutputDigest {
                file: p.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        let manifest = RunManifest {
            command: self.command.clone(),
            command_line: std::env::args().collect(),
            config: *settings,
            seed: settings.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: self.started,
            finished: now(),
            outputs,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| LabError::Io(e.to_string()))? + "\n";
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(emit_csv(&t).unwrap(), b"a,b\n");
    }

    #[test]
    fn schema_mismatch() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0.into()]);
        assert!(emit_csv(&t).is_err());
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
