//! CSV artifacts with provenance headers, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::failure::Failure;

/// Comment block placed at the top of every artifact.
#[derive(Debug, Clone)]
pub struct Header {
    lines: Vec<String>,
}

impl Header {
    pub fn new(command: &str, resolved_config: &str) -> Self {
        let mut lines = vec![
            format!("cylgrating {}", cylgrating::VERSION),
            format!("command: {command}"),
            "resolved config:".to_string(),
        ];
        lines.extend(resolved_config.lines().map(|l| format!("  {l}")));
        Self { lines }
    }

    pub fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn render(&self) -> String {
        self.lines.iter().map(|l| format!("# {l}\n")).collect()
    }
}

/// Rows of a CSV file under construction.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(columns).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, T>(&mut self, fields: I)
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Formats a float so that it reads back bit-exact.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn write_csv(&self, name: &str, header: &Header, table: Table) -> Result<PathBuf, Failure> {
        let mut bytes = header.render().into_bytes();
        bytes.extend(table.into_bytes());
        self.write(name, &bytes)
    }

    pub fn write_text(&self, name: &str, header: &Header, body: &str) -> Result<PathBuf, Failure> {
        let mut bytes = header.render().into_bytes();
        bytes.extend(body.as_bytes());
        self.write(name, &bytes)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(|e| Failure::io(&self.dir, e))?;
        tmp.write_all(bytes).map_err(|e| Failure::io(&path, e))?;
        tmp.persist(&path).map_err(|e| Failure::io(&path, e.error))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}
