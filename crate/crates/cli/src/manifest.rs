use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Run record written next to a command's primary output.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    pub seeds: serde_json::Value,
    pub config: serde_json::Value,
    pub config_hash: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> CliResult<InputFile> {
    let mut f = File::open(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let mut h = Sha256::new();
    let bytes = io::copy(&mut f, &mut h).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(InputFile {
        path: path.display().to_string(),
        bytes,
        sha256: hex(&h.finalize()),
    })
}

impl Manifest {
    /// `config` holds everything that determines the output; its hash is
    /// taken over the serialized form.
    pub fn new(command: &str, config: serde_json::Value, seeds: serde_json::Value) -> Self {
        let text = serde_json::to_string(&config).expect("JSON values serialize");
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seeds,
            config,
            config_hash: hex(&Sha256::digest(text.as_bytes())),
        }
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        if path.is_file() {
            self.inputs.push(hash_file(path)?);
        }
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

/// `<out>.manifest.json`, or `<dir>/manifest.json` for directory outputs.
pub fn default_path(out: &Path) -> PathBuf {
    if out.is_dir() {
        return out.join("manifest.json");
    }
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
