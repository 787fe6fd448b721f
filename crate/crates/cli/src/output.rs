//! CSV tables with a versioned schema line, and the run manifest.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a real with 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// A CSV file whose first line is `#schema=slope-lab/<name>/v<version>`.
pub struct Table {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl Table {
    pub fn create(path: &Path, schema: &str, header: &[&str]) -> CliResult<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut file = File::create(path).map_err(io_err(path))?;
        writeln!(file, "#schema=slope-lab/{schema}/v{SCHEMA_VERSION}").map_err(io_err(path))?;
        let mut inner = csv::Writer::from_writer(file);
        let csv_err = |source| CliError::Csv {
            path: path.display().to_string(),
            source,
        };
        inner.write_record(header).map_err(csv_err)?;
        Ok(Self {
            path: path.to_path_buf(),
            inner,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|source| CliError::Csv {
            path: self.path.display().to_string(),
            source,
        })
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.inner.flush().map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn write(
        path: &Path,
        command: &str,
        flags: serde_json::Value,
        seed: Option<u64>,
        outputs: &[PathBuf],
        started: Instant,
    ) -> CliResult<()> {
        let m = RunManifest {
            command: command.to_string(),
            flags,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(io_err(path))
    }
}

/// `dir/stem.manifest.json` next to a primary output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.manifest.json"))
}
