//! Output writing. CSV files start with one `#` comment line carrying
//! the metadata; JSON files wrap the payload in `{meta, data}`. The data
//! section is a pure function of the resolved configuration — the
//! timestamp lives only in the metadata and is excluded from the config
//! hash.

use crate::config::{artifact_version, config_hash, unix_timestamp, Format, Resolved};
use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

pub struct Sink<'a> {
    resolved: &'a Resolved,
}

impl<'a> Sink<'a> {
    pub fn new(resolved: &'a Resolved) -> Self {
        Self { resolved }
    }

    /// Writes a table. `config_record` is the full resolved run record
    /// (hashed without the timestamp).
    pub fn write_table<C: Serialize, R: Serialize>(
        &self,
        config_record: &C,
        header: &[&str],
        rows: &[R],
        to_cells: impl Fn(&R) -> Vec<String>,
    ) -> Result<()> {
        let hash = config_hash(config_record);
        match self.resolved.format {
            Format::Csv => {
                let mut text = format!(
                    "# config_hash={hash} seed={} version={} generated_at={}\n",
                    self.resolved.seed,
                    artifact_version(),
                    unix_timestamp()
                );
                text.push_str(&header.join(","));
                text.push('\n');
                for row in rows {
                    text.push_str(&to_cells(row).join(","));
                    text.push('\n');
                }
                self.emit(&text)
            }
            Format::Json => {
                let doc = json!({
                    "meta": {
                        "config_hash": hash,
                        "seed": self.resolved.seed,
                        "version": artifact_version(),
                        "generated_at": unix_timestamp(),
                        "config": serde_json::to_value(config_record)?,
                    },
                    "data": rows,
                });
                self.emit(&format!("{}\n", serde_json::to_string_pretty(&doc)?))
            }
        }
    }

    /// Writes a single JSON document (meta + payload), regardless of the
    /// format flag; used for inherently structured outputs.
    pub fn write_json<C: Serialize, D: Serialize>(&self, config_record: &C, data: &D) -> Result<()> {
        let hash = config_hash(config_record);
        let doc = json!({
            "meta": {
                "config_hash": hash,
                "seed": self.resolved.seed,
                "version": artifact_version(),
                "generated_at": unix_timestamp(),
                "config": serde_json::to_value(config_record)?,
            },
            "data": data,
        });
        self.emit(&format!("{}\n", serde_json::to_string_pretty(&doc)?))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.resolved.out {
            Some(path) => std::fs::write(path, text)
                .with_context(|| format!("writing output to {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}
