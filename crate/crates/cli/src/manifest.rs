//! Run manifests: what was run, with which seeds, and what it wrote.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: BTreeMap<String, String>,
    pub version: String,
    pub master_seed: u64,
    pub replicate_seeds: Vec<u64>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputFile>,
    #[serde(default)]
    pub failed_replicates: Vec<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("manifest field `{0}`: {1}")]
    Invalid(&'static str, String),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    /// Parses and sanity-checks a manifest.
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let m: RunManifest = serde_json::from_str(text)?;
        if !m.config.contains_key("kind") {
            return Err(ManifestError::Invalid("config", "no experiment kind".into()));
        }
        if m.replicate_seeds.is_empty() {
            return Err(ManifestError::Invalid("replicate_seeds", "empty".into()));
        }
        if !(m.wall_time_seconds >= 0.0) {
            return Err(ManifestError::Invalid("wall_time_seconds", "negative or NaN".into()));
        }
        for o in &m.outputs {
            let hexish = o.sha256.len() == 64 && o.sha256.bytes().all(|b| b.is_ascii_hexdigit());
            if !hexish {
                return Err(ManifestError::Invalid("outputs", format!("bad checksum for {}", o.file)));
            }
            if o.file.is_empty() || o.file.contains('/') || o.file.contains('\\') {
                return Err(ManifestError::Invalid("outputs", format!("bad file name {:?}", o.file)));
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        RunManifest {
            config: [("kind".to_string(), "sine-sim".to_string())].into(),
            version: "0.1.0".into(),
            master_seed: 3,
            replicate_seeds: vec![1, 2],
            wall_time_seconds: 0.5,
            outputs: vec![OutputFile {
                file: "sine-sim.csv".into(),
                sha256: sha256_hex(b"abc"),
            }],
            failed_replicates: vec![],
        }
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_checksums_and_paths() {
        let mut m = sample();
        m.outputs[0].sha256 = "xyz".into();
        assert!(RunManifest::from_json(&m.to_json()).is_err());
        let mut m = sample();
        m.outputs[0].file = "../etc/passwd".into();
        assert!(RunManifest::from_json(&m.to_json()).is_err());
        assert!(RunManifest::from_json("{}").is_err());
    }
}
