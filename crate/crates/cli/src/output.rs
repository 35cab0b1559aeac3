//! Output directories with their provenance record, and the CSV/JSON writers
//! shared by the commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Experiment, LoadedConfig};
use crate::error::{CliError, Result};

pub const CODE_HASH: &str = env!("BLOWUP_CODE_HASH");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub code_hash: String,
    pub version: String,
    pub config_file: String,
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub struct OutputDir {
    pub path: PathBuf,
}

impl OutputDir {
    /// Creates `<root>/<command>` and writes the config echo and provenance.
    pub fn create(root: &Path, exp: Experiment, cfg: &LoadedConfig) -> Result<Self> {
        let path = root.join(exp.name());
        std::fs::create_dir_all(&path).map_err(io_err(&path))?;
        let dir = Self { path };
        dir.write_text("config.toml", &cfg.text)?;
        let prov = Provenance {
            command: exp.name().into(),
            code_hash: CODE_HASH.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_file: "config.toml".into(),
        };
        dir.write_json("provenance.json", &prov)?;
        Ok(dir)
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf> {
        let p = self.path.join(name);
        std::fs::create_dir_all(&p).map_err(io_err(&p))?;
        Ok(p)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let p = self.file(name);
        std::fs::write(&p, text).map_err(io_err(&p))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        write_csv(&self.file(name), header, rows)
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(io_err(path))
}

/// Shortest representation that reads back to the same f64.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_through_their_text() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
