//! Report envelope and output writing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{hex, JobConfig};
use crate::error::CliError;

pub const TOOLKIT: &str = "campaign-eval";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON report written by every scoring command. Field order is fixed by the
/// struct; maps inside `results` are ordered.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport<T: Serialize> {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    /// Input path -> SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    pub results: T,
}

impl<T: Serialize> ScoreReport<T> {
    pub fn new(command: &str, config: &JobConfig, results: T) -> Result<Self, CliError> {
        let inputs = input_digests(config)?;
        Ok(ScoreReport {
            toolkit: TOOLKIT,
            version: VERSION,
            command: command.to_string(),
            seed: config.seed,
            config_hash: config.hash(&inputs),
            inputs,
            results,
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(CliError::internal)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn input_digests(config: &JobConfig) -> Result<BTreeMap<String, String>, CliError> {
    config
        .input_paths()
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(p).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", p.display())))?;
            Ok((p.display().to_string(), hex(&Sha256::digest(&bytes))))
        })
        .collect()
}

/// Output directory that records what it wrote.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::internal(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::internal(format!("cannot create {}: {e}", parent.display())))?;
        }
        std::fs::write(&path, contents).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Minimal CSV row builder; fields with separators or quotes are quoted.
pub(crate) fn csv_line<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let f = f.as_ref();
        if f.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&f.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(f);
        }
    }
    out.push('\n');
    out
}

pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_line(["a", "b,c", "d\"e"]), "a,\"b,c\",\"d\"\"e\"\n");
    }
}
