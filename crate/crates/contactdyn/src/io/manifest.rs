//! Run manifests: every CLI run writes its fully resolved configuration so
//! the run can be reproduced bit-identically from the manifest alone.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("unsupported manifest format {0} (expected {MANIFEST_FORMAT_VERSION})")]
    Format(u32),
}

/// Fully resolved configuration of one subcommand run. Values are kept as
/// strings in a sorted map so serialization is canonical.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub format: u32,
    pub subcommand: String,
    pub settings: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Manifest {
            format: MANIFEST_FORMAT_VERSION,
            subcommand: subcommand.to_string(),
            settings: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.settings.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(|s| s.as_str())
    }

    pub fn save(&self, path: &Path) -> Result<(), ManifestError> {
        let text = toml::to_string(self).expect("manifest serialization cannot fail");
        std::fs::write(path, text).map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Manifest, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let manifest: Manifest = toml::from_str(&text).map_err(|source| ManifestError::Parse {
            path: path.display().to_string(),
            source: Box::new(source),
        })?;
        if manifest.format != MANIFEST_FORMAT_VERSION {
            return Err(ManifestError::Format(manifest.format));
        }
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.toml");
        let mut m = Manifest::new("ball-drop");
        m.set("masses", "10,50").set("dt", 1e-5).set("models", "mclean");
        m.save(&path).unwrap();
        let back = Manifest::load(&path).unwrap();
        assert_eq!(m, back);
    }
}
