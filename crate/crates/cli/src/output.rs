//! Output directory handling and run manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// An output directory that remembers the files written into it.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Writes one file through `write`, which receives a buffered writer.
    pub fn write<F>(&mut self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> rippler_core::Result<()>,
    {
        let path = self.root.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        write(&mut out).with_context(|| format!("writing {}", path.display()))?;
        out.flush()
            .with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write(name, |out| Ok(out.write_all(text.as_bytes())?))
    }

    /// Writes `manifest.toml` listing every file written so far.
    pub fn finish(mut self, manifest: Manifest) -> Result<PathBuf> {
        let manifest = Manifest {
            files: std::mem::take(&mut self.files),
            ..manifest
        };
        let text = toml::to_string(&manifest).context("serialising the manifest")?;
        self.write_text("manifest.toml", &text)?;
        Ok(self.root)
    }
}

/// What produced a directory of results.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub seed: u64,
    /// SHA-256 of the effective configuration, stored alongside as
    /// `config.toml`.
    pub config_sha256: String,
    /// SHA-256 of the observation file read, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_sha256: Option<String>,
    pub files: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
