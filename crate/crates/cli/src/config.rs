//! Run configuration: JSON file, command-line overrides, and the echo copy
//! written next to every run's outputs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use brainnet::{Error, Result};

/// Everything a run needs beyond its input paths. Unknown keys in the file
/// are rejected so typos fail loudly; command-line flags override the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: String,
    pub smote_order: String,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f32,
    pub flops_convention: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            scenario: "smote".into(),
            smote_order: "paper".into(),
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-4,
            flops_convention: "macs-x2".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&body)
            .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    /// Writes the effective configuration into the output directory so every
    /// run is reproducible from its artifacts alone.
    pub fn echo(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir)?;
        brainnet::eval::write_json(&out_dir.join("config.json"), self)
    }
}

/// Sidecar written next to a dataset cache, recording how it was built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub class_names: Vec<String>,
    pub scenario: String,
    pub smote_order: String,
    pub seed: u64,
    pub histogram: Vec<usize>,
    pub synthetic: usize,
}

impl DatasetMeta {
    pub fn path_for(cache: &Path) -> std::path::PathBuf {
        cache.with_extension("meta.json")
    }

    pub fn save(&self, cache: &Path) -> Result<()> {
        brainnet::eval::write_json(&Self::path_for(cache), self)
    }

    pub fn load(cache: &Path) -> Result<Self> {
        let path = Self::path_for(cache);
        let body = fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&body)
            .map_err(|e| Error::Config(format!("bad dataset meta {}: {e}", path.display())))
    }
}

/// 1234567 -> "1,234,567".
pub fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"seeed": 1}"#).unwrap_err();
        assert!(err.to_string().contains("seeed"));
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"epochs": 3}"#).unwrap();
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.scenario, "smote");
    }

    #[test]
    fn grouping_inserts_separators() {
        assert_eq!(group_thousands(0), "0");
        assert_eq!(group_thousands(999), "999");
        assert_eq!(group_thousands(73_856), "73,856");
        assert_eq!(group_thousands(1_801_464), "1,801,464");
    }
}
