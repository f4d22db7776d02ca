//! Run manifests: the resolved request, spec hashes and output checksums.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::run::{Outcome, Request};

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Seed of the run's noise spec. Every random draw is derived from it
    /// and the realization index; nothing else feeds the generators.
    pub seed: u64,
    pub spec_hashes: Vec<String>,
    pub outputs: Vec<OutputEntry>,
    pub run: Request,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(run: &Request, outcome: &Outcome) -> CliResult<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: run.spec_doc().seed,
            spec_hashes: run.spec_hashes()?,
            outputs: outcome
                .outputs
                .iter()
                .map(|o| OutputEntry {
                    file: o.name.clone(),
                    bytes: o.bytes.len(),
                    sha256: sha256_hex(&o.bytes),
                })
                .collect(),
            run: run.clone(),
        })
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("manifests always serialize")
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("manifest: {e}")))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Writes every output and the manifest into `dir`.
pub fn write_run(dir: &Path, run: &Request, outcome: &Outcome) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for o in &outcome.outputs {
        let path = dir.join(&o.name);
        std::fs::write(&path, &o.bytes).map_err(|e| CliError::io(&path, e))?;
    }
    let manifest = RunManifest::new(run, outcome)?;
    let path = dir.join(MANIFEST_NAME);
    std::fs::write(&path, manifest.to_text()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Names of outputs whose checksum differs from the manifest, plus files
/// that are missing on either side.
pub fn mismatches(expected: &RunManifest, outcome: &Outcome) -> Vec<String> {
    let mut bad = Vec::new();
    for e in &expected.outputs {
        match outcome.outputs.iter().find(|o| o.name == e.file) {
            Some(o) if sha256_hex(&o.bytes) == e.sha256 => {}
            Some(_) => bad.push(format!("{} (checksum differs)", e.file)),
            None => bad.push(format!("{} (not produced)", e.file)),
        }
    }
    for o in &outcome.outputs {
        if !expected.outputs.iter().any(|e| e.file == o.name) {
            bad.push(format!("{} (not in manifest)", o.name));
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::PolicyArg;
    use crate::run::{Output, RamseyRun};
    use bathforge::config::{NoiseSpecDoc, QuadratureKey};

    #[test]
    fn manifest_text_round_trips() {
        let run = Request::SimulateRamsey(RamseyRun {
            spec: NoiseSpecDoc {
                quadrature: QuadratureKey::Dephasing,
                alpha: 0.1 + 0.2,
                omega0_hz: 4.0,
                teeth: Some(750),
                p: Some(-1.0),
                envelope: None,
                seed: u64::MAX,
            },
            alphas: vec![1e-7, 3.3],
            taus: vec![1.0 / 3.0, 2e-3],
            fringe_hz: 1e3,
            pulse_rabi_hz: 5e4,
            realizations: 10,
            policy: PolicyArg::Frozen,
            pulse_noise: false,
        });
        let outcome = Outcome {
            outputs: vec![Output {
                name: "a.csv".into(),
                bytes: b"x".to_vec(),
            }],
            summary: vec![],
        };
        let m = RunManifest::new(&run, &outcome).unwrap();
        let text = m.to_text();
        let back = RunManifest::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
        assert!(mismatches(&back, &outcome).is_empty());
    }

    #[test]
    fn unknown_manifest_keys_are_rejected() {
        assert!(RunManifest::parse(
            "tool = \"x\"\nversion = \"0\"\nseed = 0\nspec_hashes = []\noutputs = []\nextra = 1\n"
        )
        .is_err());
    }
}
