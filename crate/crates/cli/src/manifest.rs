//! Run manifest: enough to reproduce an output from config and seed.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub mode: String,
    pub config_hash: String,
    pub cli_version: String,
    pub core_version: String,
    pub sub_seeds: BTreeMap<String, u64>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Where data goes: files under a directory, or stdout and stderr.
#[derive(Debug)]
pub struct Sink {
    dir: Option<PathBuf>,
    pub outputs: Vec<OutputFile>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Sink { dir, outputs: Vec::new() })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Writes `name` under the output directory, or prints `content` to stdout
    /// (primary) or stderr (secondary) when there is none.
    pub fn emit(&mut self, name: &str, content: &str, primary: bool) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, content)
                    .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
                self.outputs.push(OutputFile {
                    file: name.to_string(),
                    bytes: content.len(),
                    sha256: sha256_hex(content.as_bytes()),
                });
            }
            None if primary => {
                let mut out = std::io::stdout().lock();
                out.write_all(content.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Usage(format!("cannot write stdout: {e}")))?;
            }
            None => eprint!("{content}"),
        }
        Ok(())
    }

    /// Writes to an explicit path regardless of the output directory.
    pub fn emit_to(&mut self, path: &Path, content: &str) -> Result<(), CliError> {
        fs::write(path, content).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(OutputFile {
            file: path.display().to_string(),
            bytes: content.len(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }
}

pub fn append(path: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let line = serde_json::to_string(manifest).map_err(|e| CliError::Data(e.to_string()))?;
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    writeln!(file, "{line}").map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}
