// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::commands::CliError;

/// Provenance stamped at the top of every written file.
#[derive(Debug, Clone)]
pub struct Stamp {
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Stamp {
    pub fn new(command: &'static str, canonical_config: &str, seed: u64) -> Self {
        Stamp {
            command,
            config_sha256: hex::encode(Sha256::digest(canonical_config.as_bytes())),
            seed,
        }
    }

    pub fn header(&self) -> String {
        format!(
            "# stmqc {}\n# config_sha256={}\n# seed={}\n",
            self.command, self.config_sha256, self.seed
        )
    }
}

/// Output directory plus the stamp shared by its files.
pub struct Writer {
    dir: PathBuf,
    stamp: Stamp,
}

impl Writer {
    pub fn new(dir: &Path, stamp: Stamp) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            stamp,
        })
    }

    pub fn stamp(&self) -> &Stamp {
        &self.stamp
    }

    pub fn write(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let text = format!("{}{body}", self.stamp.header());
        fs::write(&path, text).map_err(|e| CliError::Io(path.clone(), e))?;
        Ok(path)
    }
}
