//! Resolved run configuration, its stable hash, and the metadata header
//! embedded into every output.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

pub const DEFAULT_SEED: u64 = 42;

/// Optional defaults loaded from `--config`; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub threads: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn resolve_globals(args: &super::GlobalArgs) -> Result<Resolved> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config file {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let format = match args.format.as_deref().or(file.format.as_deref()) {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => anyhow::bail!("unknown format {other:?} (expected csv or json)"),
    };
    Ok(Resolved {
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        threads: args.threads.or(file.threads),
        format,
        out: args.out.clone().or(file.out),
    })
}

/// First 16 hex digits of the SHA-256 of the canonical resolved-config
/// JSON (the timestamp is not part of the hashed record).
pub fn config_hash<T: Serialize>(record: &T) -> String {
    let json = serde_json::to_string(record).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn artifact_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
