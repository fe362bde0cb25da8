//! Result serialization: CSV tables plus a JSON metadata sidecar.
//!
//! CSV holds only reproducible values (identical config and seed give
//! byte-identical files); wall-clock timing and other run-specific facts
//! live in the metadata sidecar.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::Failure;

pub struct OutputDir {
    dir: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn new(dir: impl Into<PathBuf>, force: bool) -> Result<Self, Failure> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, force })
    }

    fn target(&self, name: &str) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        if path.exists() && !self.force {
            return Err(Failure::Io(format!(
                "{} exists; pass --force to overwrite",
                path.display()
            )));
        }
        Ok(path)
    }

    /// Write a CSV file: a header row, then one row per record.
    pub fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: impl IntoIterator<Item = String>,
    ) -> Result<PathBuf, Failure> {
        let path = self.target(name)?;
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        for row in rows {
            buf.push_str(&row);
            buf.push('\n');
        }
        fs::write(&path, buf).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_metadata(&self, metadata: &Value) -> Result<PathBuf, Failure> {
        let path = self.target("metadata.json")?;
        let mut file =
            fs::File::create(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let text = serde_json::to_string_pretty(metadata)
            .map_err(|e| Failure::Io(format!("metadata encoding: {e}")))?;
        file.write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Shared convention block for every metadata sidecar: all tolerance and
/// convention choices a reader needs to interpret the CSVs.
pub fn conventions(analysis: &crate::config::AnalysisSection) -> Value {
    json!({
        "basis_order": "M = S..-S",
        "time_unit": "drive periods, T = 1",
        "dft": "rectangular window, omega_k = 2*pi*k/T_len, reported folded to omega <= pi",
        "spacing_ratio": "cyclic adjacent gaps including the wrap-around gap",
        "r_pos": pspin_core::spectral::R_POISSON,
        "degeneracy_floor": pspin_core::spectral::DEGENERACY_FLOOR,
        "drop_transient": analysis.drop_transient,
        "normalize_spectrum": analysis.normalize_spectrum,
        "otoc_threshold": analysis.otoc_threshold,
        "otoc_burn_in": analysis.otoc_burn_in,
        "clustering_tol": analysis.clustering_tol,
        "dos_bins": analysis.dos_bins,
    })
}

/// Assemble the metadata document from the command context.
pub struct MetadataBuilder {
    fields: Map<String, Value>,
}

impl MetadataBuilder {
    pub fn new(command: &str, seed: u64, threads: usize) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        fields.insert("seed".into(), json!(seed));
        fields.insert("threads".into(), json!(threads));
        Self { fields }
    }

    pub fn field(mut self, key: &str, value: Value) -> Self {
        self.fields.insert(key.into(), value);
        self
    }

    pub fn finish(mut self, elapsed_ms: u128) -> Value {
        self.fields.insert("elapsed_ms".into(), json!(elapsed_ms));
        Value::Object(self.fields)
    }
}

/// Format a float for CSV. The shortest round-trip representation is
/// deterministic for identical inputs.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// CSV-safe error cell: strip commas and newlines from the message.
pub fn fmt_error(e: &Option<String>) -> String {
    match e {
        None => String::new(),
        Some(msg) => msg.replace([',', '\n'], ";"),
    }
}
