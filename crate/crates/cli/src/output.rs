//! Output files. Nothing time- or host-dependent is written, so reruns with
//! the same configuration produce identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_owned(),
            written: Vec::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    pub fn open(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.root.join(name);
        let file =
            File::create(&path).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_owned());
        Ok(BufWriter::new(file))
    }

    /// CSV with `#` metadata lines followed by a header row.
    pub fn csv(
        &mut self,
        name: &str,
        meta: &[(&str, String)],
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        let mut out = self.open(name)?;
        for (key, value) in meta {
            writeln!(out, "# {key} = {value}")?;
        }
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(header)?;
        for row in rows {
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut out = self.open(name)?;
        serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}
