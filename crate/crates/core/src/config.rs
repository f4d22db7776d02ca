//! Plain-text key-value documents (TOML) for noise specs, control programs
//! and count calibrations.
//!
//! Frequencies are written in Hz and converted to rad/s exactly once, when
//! a document is turned into a domain value. Unknown keys are errors.
//!
//! ```toml
//! quadrature = "dephasing"   # or "amplitude"
//! alpha = 0.5
//! omega0_hz = 4.0
//! teeth = 750
//! p = 0.0                    # or: envelope = [1.0, 0.5, ...]
//! seed = 7
//! ```

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::measurement::CountCalibration;
use crate::noise_synth::{Envelope, NoiseSpec, Quadrature};
use crate::waveform::{ControlProgram, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKey {
    Dephasing,
    Amplitude,
}

impl From<Quadrature> for QuadratureKey {
    fn from(q: Quadrature) -> Self {
        match q {
            Quadrature::Dephasing => QuadratureKey::Dephasing,
            Quadrature::Amplitude => QuadratureKey::Amplitude,
        }
    }
}

impl From<QuadratureKey> for Quadrature {
    fn from(q: QuadratureKey) -> Self {
        match q {
            QuadratureKey::Dephasing => Quadrature::Dephasing,
            QuadratureKey::Amplitude => Quadrature::Amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpecDoc {
    pub quadrature: QuadratureKey,
    pub alpha: f64,
    pub omega0_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teeth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpecDoc {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("noise spec documents always serialize")
    }

    pub fn to_spec(&self) -> Result<NoiseSpec> {
        let omega0 = TAU * self.omega0_hz;
        match (&self.p, &self.envelope) {
            (Some(p), None) => {
                let teeth = self.teeth.ok_or_else(|| {
                    Error::Config("`teeth` is required with a power-law `p`".into())
                })?;
                NoiseSpec::power_law(
                    self.quadrature.into(),
                    self.alpha,
                    omega0,
                    teeth,
                    *p,
                    self.seed,
                )
            }
            (None, Some(table)) => {
                if let Some(t) = self.teeth {
                    if t != table.len() {
                        return Err(Error::Config(format!(
                            "`teeth` = {t} disagrees with the {}-entry envelope table",
                            table.len()
                        )));
                    }
                }
                NoiseSpec::tabulated(
                    self.quadrature.into(),
                    self.alpha,
                    omega0,
                    table.clone(),
                    self.seed,
                )
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "give either `p` or `envelope`, not both".into(),
            )),
            (None, None) => Err(Error::Config("one of `p` or `envelope` is required".into())),
        }
    }

    pub fn from_spec(spec: &NoiseSpec) -> Self {
        let (teeth, p, envelope) = match spec.envelope() {
            Envelope::PowerLaw(p) => (Some(spec.teeth()), Some(*p), None),
            Envelope::Table(t) => (None, None, Some(t.clone())),
        };
        Self {
            quadrature: spec.quadrature().into(),
            alpha: spec.alpha(),
            omega0_hz: spec.omega0() / TAU,
            teeth,
            p,
            envelope,
            seed: spec.seed(),
        }
    }
}

pub fn parse_noise_spec(text: &str) -> Result<NoiseSpec> {
    NoiseSpecDoc::parse(text)?.to_spec()
}

impl NoiseSpec {
    /// Canonical key-value form of this spec.
    pub fn to_config_text(&self) -> String {
        NoiseSpecDoc::from_spec(self).to_text()
    }

    /// First 16 hex digits of the SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_config_text().as_bytes());
        hex::encode(&digest[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    /// Seconds.
    pub duration: f64,
    /// Control Rabi frequency Ω_C/2π in Hz.
    #[serde(default)]
    pub rabi_hz: f64,
    /// Control phase φ_C in rad.
    #[serde(default)]
    pub phase: f64,
    /// Static detuning Δ/2π in Hz.
    #[serde(default)]
    pub detuning_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramDoc {
    #[serde(rename = "segment")]
    pub segments: Vec<SegmentDoc>,
}

impl ProgramDoc {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("program documents always serialize")
    }

    pub fn to_program(&self) -> Result<ControlProgram> {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment::new(s.duration, TAU * s.rabi_hz, s.phase, TAU * s.detuning_hz))
            .collect::<Result<Vec<_>>>()?;
        ControlProgram::new(segments)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDoc {
    pub bright_mean: f64,
    pub dark_mean: f64,
    pub bright_std: f64,
    pub dark_std: f64,
}

impl CalibrationDoc {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_calibration(&self) -> Result<CountCalibration> {
        CountCalibration::new(
            self.bright_mean,
            self.dark_mean,
            self.bright_std,
            self.dark_std,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const WHITE: &str = "quadrature = \"dephasing\"\nalpha = 0.5\nomega0_hz = 4.0\nteeth = 750\np = 0.0\nseed = 7\n";

    #[test]
    fn parses_the_documented_schema() {
        let spec = parse_noise_spec(WHITE).unwrap();
        assert_eq!(spec.teeth(), 750);
        assert_eq!(spec.omega0(), TAU * 4.0);
        assert_eq!(spec.quadrature(), Quadrature::Dephasing);
        assert_eq!(spec.envelope(), &Envelope::PowerLaw(0.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_noise_spec(&format!("{WHITE}omega_hz = 3.0\n")).unwrap_err();
        assert_eq!(err.category(), "config");
        assert!(err.to_string().contains("omega_hz"));
    }

    #[test]
    fn envelope_and_p_are_exclusive() {
        let text =
            "quadrature = \"amplitude\"\nalpha = 0.1\nomega0_hz = 1.0\np = 0.0\nenvelope = [1.0]\n";
        assert!(parse_noise_spec(text).is_err());
        let text =
            "quadrature = \"amplitude\"\nalpha = 0.1\nomega0_hz = 1.0\nenvelope = [1.0, 0.5]\n";
        assert_eq!(parse_noise_spec(text).unwrap().teeth(), 2);
    }

    #[test]
    fn physical_violations_name_the_parameter() {
        let err = parse_noise_spec(&WHITE.replace("alpha = 0.5", "alpha = -1.0")).unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse_noise_spec(WHITE).unwrap();
        assert_eq!(a.hash(), parse_noise_spec(WHITE).unwrap().hash());
        assert_eq!(a.hash().len(), 16);
        assert_ne!(a.hash(), a.with_seed(8).hash());
    }

    #[test]
    fn program_and_calibration_documents() {
        let prog = ProgramDoc::parse(
            "[[segment]]\nduration = 2.5e-5\nrabi_hz = 10000.0\n\n[[segment]]\nduration = 1e-3\n",
        )
        .unwrap()
        .to_program()
        .unwrap();
        assert_eq!(prog.segments().len(), 2);
        let cal = CalibrationDoc::parse(
            "bright_mean = 20.0\ndark_mean = 4.0\nbright_std = 4.0\ndark_std = 2.0\n",
        )
        .unwrap()
        .to_calibration()
        .unwrap();
        assert_eq!(cal.bright_mean(), 20.0);
        assert!(CalibrationDoc::parse("bright_mean = 1.0\n").is_err());
    }

    proptest! {
        #[test]
        fn document_round_trip_is_identity(
            alpha in 0.0f64..10.0,
            hz in 1e-3f64..1e4,
            teeth in 1usize..2000,
            p in -3.0f64..3.0,
            seed in any::<u64>(),
            amplitude in any::<bool>(),
        ) {
            let doc = NoiseSpecDoc {
                quadrature: if amplitude { QuadratureKey::Amplitude } else { QuadratureKey::Dephasing },
                alpha,
                omega0_hz: hz,
                teeth: Some(teeth),
                p: Some(p),
                envelope: None,
                seed,
            };
            let once = NoiseSpecDoc::parse(&doc.to_text()).unwrap();
            prop_assert_eq!(&once, &doc);
            let twice = NoiseSpecDoc::parse(&once.to_text()).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
