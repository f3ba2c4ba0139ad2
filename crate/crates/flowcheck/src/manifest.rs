//! Machine-readable run manifests, written beside every CLI output.

use crate::config::ModelConfig;
use crate::error::Error;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Snapshot of the model configuration a run used.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConfigSnapshot {
    pub dimension: String,
    pub start_mode: String,
    pub version: String,
    pub include_visit_constraints: bool,
    pub total_flow_constant: u64,
    pub support_arcs: Option<u64>,
    pub bands: Option<(u16, u16)>,
}

impl ConfigSnapshot {
    pub fn of(config: &ModelConfig) -> Self {
        ConfigSnapshot {
            dimension: format!("{:?}", config.dimension).to_lowercase(),
            start_mode: format!("{:?}", config.start_mode),
            version: format!("{:?}", config.version).to_lowercase(),
            include_visit_constraints: config.include_visit_constraints,
            total_flow_constant: config.total_flow_constant,
            support_arcs: config.support.as_ref().map(|s| s.len() as u64),
            bands: config.bands.map(|b| (b.lead_in, b.valley_size)),
        }
    }
}

/// One JSON document per run: what ran, over what, what came out.
#[derive(Clone, Debug, Serialize, Deserialize, Default)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigSnapshot>,
    /// Instance identity: a family name such as `abcd`, or a spec summary.
    pub instance: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variables: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_violations: Option<u64>,
    /// Exact rational rendered as `p/q` or `p`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_cost: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<String>,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, instance: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            instance: instance.to_string(),
            ..Default::default()
        }
    }

    /// Writes the manifest as pretty JSON next to `output` (same path with
    /// `.manifest.json` appended) and returns the manifest path.
    pub fn write_beside(&self, output: &Path) -> Result<std::path::PathBuf, Error> {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = output.with_file_name(name);
        self.write_to(&path)?;
        Ok(path)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Validation(format!("manifest serialization: {e}")))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest {path:?}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Dimension;

    #[test]
    fn manifest_round_trip() {
        let dir = std::env::temp_dir().join("flowcheck-manifest-test");
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("model.lp");
        let mut m = RunManifest::new("build", "abcd");
        m.config = Some(ConfigSnapshot::of(&ModelConfig::new(Dimension::Y)));
        m.equations = Some(42);
        m.variables = Some(7);
        m.outputs = vec![out.display().to_string()];
        let path = m.write_beside(&out).unwrap();
        assert!(path.to_string_lossy().ends_with("model.lp.manifest.json"));
        let back = RunManifest::read_from(&path).unwrap();
        assert_eq!(back.command, "build");
        assert_eq!(back.equations, Some(42));
        assert_eq!(back.config.unwrap().dimension, "y");
        std::fs::remove_dir_all(&dir).ok();
    }
}
