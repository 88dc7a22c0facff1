use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Column-major numeric table with `#` comment lines above the header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    comments: Vec<String>,
    names: Vec<String>,
    columns: Vec<Column>,
}

#[derive(Debug, Clone)]
enum Column {
    Num(Vec<f64>),
    Text(Vec<String>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Num(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    fn cell(&self, i: usize) -> String {
        match self {
            Column::Num(v) => format_number(v[i]),
            Column::Text(v) => v[i].clone(),
        }
    }
}

/// Integers print as integers, everything else in 11-digit scientific notation.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        format!("{v:.10e}")
    }
}

impl Table {
    pub fn new() -> Self {
        Table::default()
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.names.push(name.into());
        self.columns.push(Column::Num(values));
        self
    }

    pub fn text_column(mut self, name: impl Into<String>, values: Vec<String>) -> Self {
        self.names.push(name.into());
        self.columns.push(Column::Text(values));
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Column::len)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let rows = self.rows();
        assert!(self.columns.iter().all(|c| c.len() == rows), "ragged table");
        let mut out = Vec::new();
        for c in &self.comments {
            out.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| CliError::io("formatting csv", std::io::Error::other(e));
        w.write_record(&self.names).map_err(err)?;
        for i in 0..rows {
            w.write_record(self.columns.iter().map(|c| c.cell(i))).map_err(err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::io("formatting csv", std::io::Error::other(e.to_string())))
    }
}

/// Files written by one run. Dropping the set without `finish` removes them.
pub struct OutputSet {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<OutputFile>,
    finished: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
            finished: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        // record before writing so a failed write is still cleaned up
        self.files.retain(|f| f.file != name);
        self.files.push(OutputFile {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.write(name, &table.to_bytes()?)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::io(format!("serializing {name}"), std::io::Error::other(e)))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    /// Keeps the files and returns their checksums.
    pub fn finish(mut self) -> Vec<OutputFile> {
        self.finished = true;
        std::mem::take(&mut self.files)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if self.finished {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(self.dir.join(&f.file));
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(26.0), "26");
        assert_eq!(format_number(-3.0), "-3");
        assert_eq!(format_number(0.051), "5.1000000000e-2");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn table_layout() {
        let t = Table::new()
            .comment("energy in eV")
            .column("energy_eV", vec![1.0, 1.5])
            .text_column("label", vec!["a".into(), "b,c".into()]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "# energy in eV\nenergy_eV,label\n1,a\n1.5000000000e0,\"b,c\"\n");
    }

    #[test]
    fn unfinished_sets_clean_up() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("out");
        {
            let mut set = OutputSet::create(&dir).unwrap();
            set.write("a.csv", b"1\n").unwrap();
            assert!(dir.join("a.csv").exists());
        }
        assert!(!dir.exists());
        let mut set = OutputSet::create(&dir).unwrap();
        set.write("a.csv", b"1\n").unwrap();
        let files = set.finish();
        assert_eq!(files[0].sha256, sha256_hex(b"1\n"));
        assert!(dir.join("a.csv").exists());
    }
}
