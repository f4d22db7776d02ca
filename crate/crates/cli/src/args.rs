//! Flag and config-file parsing. Every subcommand's options can come from
//! `--config run.toml` (keys are the long flag names in snake_case) and
//! from flags; a flag always wins over the file. Unknown keys are errors.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use bathforge::config::{NoiseSpecDoc, ProgramDoc, QuadratureKey};
use bathforge::filter_theory::{chi_fid_comb, predicted_t2};
use bathforge::waveform::default_sample_rate;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::run::{ChiRun, ExportRun, RabiRun, RamseyRun, Request, ScanRun, SynthRun, VerifyPsdRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureArg {
    Dephasing,
    Amplitude,
}

impl From<QuadratureArg> for QuadratureKey {
    fn from(q: QuadratureArg) -> Self {
        match q {
            QuadratureArg::Dephasing => QuadratureKey::Dephasing,
            QuadratureArg::Amplitude => QuadratureKey::Amplitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyArg {
    PerRealization,
    PerPoint,
    Frozen,
}

impl From<PolicyArg> for bathforge::PhasePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::PerRealization => bathforge::PhasePolicy::PerRealization,
            PolicyArg::PerPoint => bathforge::PhasePolicy::PerPoint,
            PolicyArg::Frozen => bathforge::PhasePolicy::Frozen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Exponential,
    Gaussian,
}

impl From<ModelArg> for bathforge::analysis::DecayModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Exponential => bathforge::analysis::DecayModel::ExponentialFringe,
            ModelArg::Gaussian => bathforge::analysis::DecayModel::GaussianEnvelope,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeModeArg {
    Multiplicative,
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Csv,
    Binary,
    Both,
}

/// Declares a subcommand's option struct with the shared `--config`,
/// `--out` and noise-spec options, plus a field-wise overlay.
macro_rules! command_args {
    (
        $(#[$sm:meta])*
        $name:ident { $( $(#[$fm:meta])* $field:ident : $ty:ty ),* $(,)? }
    ) => {
        $(#[$sm])*
        #[derive(clap::Args, Serialize, Deserialize, Debug, Clone, Default)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            /// Run configuration file (TOML). Flags override its keys.
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<PathBuf>,
            /// Output directory [default: bathforge-out].
            #[arg(long, short)]
            pub out: Option<PathBuf>,
            /// Noise spec file (TOML). Without it the noise spec is built from
            /// the flags below.
            #[arg(long)]
            pub spec: Option<PathBuf>,
            /// Override the noise spec's quadrature.
            #[arg(long, value_enum)]
            pub quadrature: Option<QuadratureArg>,
            /// Override the noise strength α.
            #[arg(long, allow_hyphen_values = true)]
            pub alpha: Option<f64>,
            /// Override the comb spacing ω₀/2π in Hz [default: 4].
            #[arg(long)]
            pub omega0_hz: Option<f64>,
            /// Override the number of comb teeth J [default: 750].
            #[arg(long)]
            pub teeth: Option<usize>,
            /// Override the power-law exponent p [default: 0].
            #[arg(long, allow_hyphen_values = true)]
            pub p: Option<f64>,
            /// Override the seed [default: 0].
            #[arg(long)]
            pub seed: Option<u64>,
            $( $(#[$fm])* pub $field: Option<$ty>, )*
        }

        impl $name {
            /// Fills every unset field from `file`.
            fn overlay(&mut self, file: Self) {
                overlay_fields!(self, file; out, spec, quadrature, alpha, omega0_hz, teeth, p, seed $(, $field)*);
            }

            fn spec_overrides(&self) -> SpecOverrides {
                SpecOverrides {
                    path: self.spec.clone(),
                    quadrature: self.quadrature,
                    alpha: self.alpha,
                    omega0_hz: self.omega0_hz,
                    teeth: self.teeth,
                    p: self.p,
                    seed: self.seed,
                }
            }

            /// Reads `--config` if given and overlays it under the flags.
            pub fn load(mut self) -> CliResult<Self> {
                if let Some(path) = self.config.clone() {
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                    let mut file: Self = toml::from_str(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                    file.spec = file.spec.map(|s| relative_to(&path, s));
                    self.overlay(file);
                }
                Ok(self)
            }

            pub fn out_dir(&self) -> PathBuf {
                self.out.clone().unwrap_or_else(|| PathBuf::from("bathforge-out"))
            }
        }
    };
}

macro_rules! overlay_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

/// Paths inside a config file are relative to that file.
fn relative_to(config: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        config.parent().map(|d| d.join(&p)).unwrap_or(p)
    }
}

struct SpecOverrides {
    path: Option<PathBuf>,
    quadrature: Option<QuadratureArg>,
    alpha: Option<f64>,
    omega0_hz: Option<f64>,
    teeth: Option<usize>,
    p: Option<f64>,
    seed: Option<u64>,
}

impl SpecOverrides {
    /// For commands that sweep α themselves the base α is only a
    /// placeholder, so it defaults to 1 instead of being required.
    fn sweeping(mut self) -> Self {
        if self.path.is_none() && self.alpha.is_none() {
            self.alpha = Some(1.0);
        }
        self
    }

    /// The noise spec file (or built-in defaults) with flag overrides applied,
    /// validated by building the domain value once.
    fn resolve(&self, default_quadrature: QuadratureKey) -> CliResult<NoiseSpecDoc> {
        let mut doc = match &self.path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                NoiseSpecDoc::parse(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => NoiseSpecDoc {
                quadrature: default_quadrature,
                alpha: self
                    .alpha
                    .ok_or_else(|| CliError::Config("give --spec or --alpha".into()))?,
                omega0_hz: 4.0,
                teeth: Some(750),
                p: Some(0.0),
                envelope: None,
                seed: 0,
            },
        };
        if let Some(q) = self.quadrature {
            doc.quadrature = q.into();
        }
        if let Some(a) = self.alpha {
            doc.alpha = a;
        }
        if let Some(w) = self.omega0_hz {
            doc.omega0_hz = w;
        }
        if let Some(p) = self.p {
            // a power law replaces any tabulated envelope
            if let Some(table) = doc.envelope.take() {
                doc.teeth = doc.teeth.or(Some(table.len()));
            }
            doc.p = Some(p);
        }
        if let Some(j) = self.teeth {
            if doc.envelope.is_some() {
                return Err(CliError::Config(
                    "--teeth cannot resize a tabulated envelope".into(),
                ));
            }
            doc.teeth = Some(j);
        }
        if let Some(s) = self.seed {
            doc.seed = s;
        }
        doc.to_spec()?;
        Ok(doc)
    }
}

fn read_program(path: &Path) -> CliResult<ProgramDoc> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ProgramDoc::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `k·max/n` for `k = 1..=n`.
fn upper_grid(max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| max * k as f64 / n as f64).collect()
}

/// `k·max/(n−1)` for `k = 0..n`.
fn closed_grid(max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![max];
    }
    (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect()
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn at_least_one(name: &str, v: usize) -> CliResult<usize> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be at least 1")))
    }
}

fn sample_rate(spec: &NoiseSpecDoc, given: Option<f64>) -> CliResult<f64> {
    match given {
        Some(r) => positive("sample-rate-hz", r),
        None => Ok(default_sample_rate(&spec.to_spec()?)),
    }
}

command_args! {
    /// Generate noise realizations over whole base periods.
    SynthArgs {
        /// Number of realizations [default: 1].
        #[arg(long)]
        realizations: usize,
        /// Index of the first realization [default: 0].
        #[arg(long)]
        first_index: u64,
        /// Record length in base periods 2π/ω₀ [default: 1].
        #[arg(long)]
        periods: usize,
        /// Sample rate in Hz [default: 20× the highest tooth].
        #[arg(long)]
        sample_rate_hz: f64,
    }
}

impl SynthArgs {
    pub fn resolve(&self) -> CliResult<Request> {
        let spec = self.spec_overrides().resolve(QuadratureKey::Dephasing)?;
        Ok(Request::Synth(SynthRun {
            sample_rate_hz: sample_rate(&spec, self.sample_rate_hz)?,
            spec,
            realizations: at_least_one("realizations", self.realizations.unwrap_or(1))?,
            first_index: self.first_index.unwrap_or(0),
            periods: at_least_one("periods", self.periods.unwrap_or(1))?,
        }))
    }
}

command_args! {
    /// Compose a control program with one noise realization and export it
    /// as IQ samples.
    ExportArgs {
        /// Control program file (TOML, `[[segment]]` tables).
        #[arg(long)]
        program: PathBuf,
        /// Realization index [default: 0].
        #[arg(long)]
        realization: u64,
        /// Sample rate in Hz [default: 20× the larger of the top tooth and
        /// the peak Rabi frequency].
        #[arg(long, alias = "rate")]
        sample_rate_hz: f64,
        /// DAC resolution in bits [default: 16].
        #[arg(long)]
        bits: u32,
        /// Output format [default: both].
        #[arg(long, value_enum)]
        format: FormatArg,
        /// Full-scale amplitude in rad/s [default: just above the peak].
        #[arg(long)]
        full_scale: f64,
        /// How amplitude noise enters the drive [default: multiplicative].
        #[arg(long, value_enum)]
        amplitude_mode: AmplitudeModeArg,
    }
}

impl ExportArgs {
    pub fn resolve(&self) -> CliResult<Request> {
        let spec = self.spec_overrides().resolve(QuadratureKey::Dephasing)?;
        let path = self
            .program
            .as_ref()
            .ok_or_else(|| CliError::Usage("export needs --program".into()))?;
        let program = read_program(path)?;
        let peak_hz = program.to_program()?.peak_omega() / TAU;
        let rate = match self.sample_rate_hz {
            Some(r) => positive("sample-rate-hz", r)?,
            None => default_sample_rate(&spec.to_spec()?).max(20.0 * peak_hz),
        };
        Ok(Request::Export(ExportRun {
            spec,
            program,
            realization: self.realization.unwrap_or(0),
            sample_rate_hz: rate,
            bits: self.bits.unwrap_or(16),
            format: self.format.unwrap_or(FormatArg::Both),
            full_scale: self.full_scale,
            amplitude_mode: self
                .amplitude_mode
                .unwrap_or(AmplitudeModeArg::Multiplicative),
        }))
    }
}

command_args! {
    /// Estimate the PSD of an ensemble and compare it with the analytic
    /// comb, tooth by tooth.
    VerifyPsdArgs {
        /// Number of realizations averaged [default: 200].
        #[arg(long)]
        realizations: usize,
        /// Record length in base periods [default: 1].
        #[arg(long)]
        periods: usize,
        /// Sample rate in Hz [default: 20× the highest tooth].
        #[arg(long)]
        sample_rate_hz: f64,
    }
}

impl VerifyPsdArgs {
    pub fn resolve(&self) -> CliResult<Request> {
        let spec = self.spec_overrides().resolve(QuadratureKey::Dephasing)?;
        Ok(Request::VerifyPsd(VerifyPsdRun {
            sample_rate_hz: sample_rate(&spec, self.sample_rate_hz)?,
            spec,
            realizations: at_least_one("realizations", self.realizations.unwrap_or(200))?,
            periods: at_least_one("periods", self.periods.unwrap_or(1))?,
        }))
    }
}

command_args! {
    /// Ramsey fringes under dephasing noise.
    RamseyArgs {
        /// Run one sweep per α value; overrides the noise spec's α.
        #[arg(long, value_delimiter = ',')]
        alpha_scan: Vec<f64>,
        /// Explicit free-evolution times in seconds.
        #[arg(long, value_delimiter = ',')]
        taus: Vec<f64>,
        /// Longest free-evolution time in seconds [default: 20 ms].
        #[arg(long)]
        tau_max: f64,
        /// Number of τ points up to --tau-max [default: 50].
        #[arg(long)]
        points: usize,
        /// Fringe detuning in Hz [default: 1000].
        #[arg(long)]
        fringe_hz: f64,
        /// Rabi frequency of the π/2 pulses in Hz [default: 50000].
        #[arg(long)]
        pulse_rabi_hz: f64,
        /// Ensemble size [default: 500].
        #[arg(long)]
        realizations: usize,
        /// Mapping of (realization, τ point) onto phase draws
        /// [default: per-realization].
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// Apply the noise during the pulses too [default: true].
        #[arg(long)]
        pulse_noise: bool,
    }
}

impl RamseyArgs {
    pub fn resolve(&self) -> CliResult<Request> {
        let mut overrides = self.spec_overrides();
        if self.alpha_scan.as_ref().is_some_and(|a| !a.is_empty()) {
            overrides = overrides.sweeping();
        }
        let spec = overrides.resolve(QuadratureKey::Dephasing)?;
        let taus = match &self.taus {
            Some(t) if !t.is_empty() => t.clone(),
            _ => upper_grid(
                positive("tau-max", self.tau_max.unwrap_or(20e-3))?,
                at_least_one("points", self.points.unwrap_or(50))?,
            ),
        };
        let alphas = match &self.alpha_scan {
            Some(a) if !a.is_empty() => a.clone(),
            _ => vec![spec.alpha],
        };
        Ok(Request::SimulateRamsey(RamseyRun {
            spec,
            alphas,
            taus,
            fringe_hz: self.fringe_hz.unwrap_or(1e3),
            pulse_rabi_hz: positive("pulse-rabi-hz", self.pulse_rabi_hz.unwrap_or(50e3))?,
            realizations: at_least_one("realizations", self.realizations.unwrap_or(500))?,
            policy: self.policy.unwrap_or(PolicyArg::PerRealization),
            pulse_noise: self.pulse_noise.unwrap_or(true),
        }))
    }
}

command_args! {
    /// Rabi flopping under amplitude noise.
    RabiArgs {
        /// Nominal Rabi frequency Ω₀/2π in Hz [default: 10000].
        #[arg(long)]
        rabi_hz: f64,
        /// Explicit drive durations in seconds.
        #[arg(long, value_delimiter = ',')]
        durations: Vec<f64>,
        /// Longest drive in seconds [default: 1 ms].
        #[arg(long)]
        t_max: f64,
        /// Number of durations from 0 to --t-max [default: 201].
        #[arg(long)]
        points: usize,
        /// Ensemble size [default: 500].
        #[arg(long)]
        realizations: usize,
        /// Mapping of (realization, duration) onto phase draws
        /// [default: per-realization].
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// How the noise enters the drive [default: multiplicative].
        #[arg(long, value_enum)]
        mode: AmplitudeModeArg,
        /// Extra step subdivision [default: 1].
        #[arg(long)]
        refine: usize,
        /// Fit a Gaussian envelope and report it [default: true].
        #[arg(long)]
        fit: bool,
    }
}

impl RabiArgs {
    pub fn resolve(&self) -> CliResult<Request> {
        let spec = self.spec_overrides().resolve(QuadratureKey::Amplitude)?;
        let durations = match &self.durations {
            Some(d) if !d.is_empty() => d.clone(),
            _ => closed_grid(
                positive("t-max", self.t_max.unwrap_or(1e-3))?,
                at_least_one("points", self.points.unwrap_or(201))?,
            ),
        };
        Ok(Request::SimulateRabi(RabiRun {
            spec,
            rabi_hz: positive("rabi-hz", self.rabi_hz.unwrap_or(10e3))?,
            durations,
            realizations: at_least_one("realizations", self.realizations.unwrap_or(500))?,
            policy: self.policy.unwrap_or(PolicyArg::PerRealization),
            mode: self.mode.unwrap_or(AmplitudeModeArg::Multiplicative),
            refine: at_least_one("refine", self.refine.unwrap_or(1))?,
            fit: self.fit.unwrap_or(true),
        }))
    }
}

command_args! {
    /// Filter-function prediction χ(τ) and fidelity from the comb sum.
    ChiArgs {
        /// Explicit τ values in seconds.
        #[arg(long, value_delimiter = ',')]
        taus: Vec<f64>,
        /// Longest τ in seconds [default: 50 ms].
        #[arg(long)]
        tau_max: f64,
        /// Number of τ points up to --tau-max [default: 50].
        #[arg(long)]
        points: usize,
    }
}

impl ChiArgs {
    pub fn resolve(&self) -> CliResult<Request> {
        let spec = self.spec_overrides().resolve(QuadratureKey::Dephasing)?;
        let taus = match &self.taus {
            Some(t) if !t.is_empty() => t.clone(),
            _ => upper_grid(
                positive("tau-max", self.tau_max.unwrap_or(50e-3))?,
                at_least_one("points", self.points.unwrap_or(50))?,
            ),
        };
        Ok(Request::PredictChi(ChiRun { spec, taus }))
    }
}

command_args! {
    /// Ramsey scans over α, exponential fits, and the T₂ ∝ α^(−k) fit.
    ScanArgs {
        /// Noise strengths to scan.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        /// Alternatively, target coherence times in ms; α is solved from
        /// χ(T₂) = 1 for each.
        #[arg(long, value_delimiter = ',')]
        t2_targets_ms: Vec<f64>,
        /// Realizations per α [default: 500].
        #[arg(long)]
        realizations: usize,
        /// τ points per scan [default: 60].
        #[arg(long)]
        points: usize,
        /// τ window in units of the predicted T₂ [default: 3].
        #[arg(long)]
        window: f64,
        /// Fringes across the window [default: 4].
        #[arg(long)]
        fringes: f64,
        /// Rabi frequency of the π/2 pulses in Hz [default: 50000].
        #[arg(long)]
        pulse_rabi_hz: f64,
        /// Mapping of (realization, τ point) onto phase draws
        /// [default: per-point].
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// Apply the noise during the pulses too [default: true].
        #[arg(long)]
        pulse_noise: bool,
        /// Decay model [default: exponential].
        #[arg(long, value_enum)]
        model: ModelArg,
    }
}

impl ScanArgs {
    pub fn resolve(&self) -> CliResult<Request> {
        let spec = self
            .spec_overrides()
            .sweeping()
            .resolve(QuadratureKey::Dephasing)?;
        let alphas = match (&self.alphas, &self.t2_targets_ms) {
            (Some(a), _) if !a.is_empty() => a.clone(),
            (_, Some(t)) if !t.is_empty() => alphas_for_targets(&spec, t)?,
            _ => {
                return Err(CliError::Usage(
                    "scan-alpha needs --alphas or --t2-targets-ms".into(),
                ))
            }
        };
        Ok(Request::ScanAlpha(ScanRun {
            spec,
            alphas,
            realizations: at_least_one("realizations", self.realizations.unwrap_or(500))?,
            points: at_least_one("points", self.points.unwrap_or(60))?,
            window: positive("window", self.window.unwrap_or(3.0))?,
            fringes: positive("fringes", self.fringes.unwrap_or(4.0))?,
            pulse_rabi_hz: positive("pulse-rabi-hz", self.pulse_rabi_hz.unwrap_or(50e3))?,
            policy: self.policy.unwrap_or(PolicyArg::PerPoint),
            pulse_noise: self.pulse_noise.unwrap_or(true),
            model: self.model.unwrap_or(ModelArg::Exponential),
        }))
    }
}

/// χ scales as α², so the α giving χ(T) = 1 is `1/√χ₁(T)` with χ₁ the
/// value at unit α. The result is checked against the first crossing.
fn alphas_for_targets(spec: &NoiseSpecDoc, targets_ms: &[f64]) -> CliResult<Vec<f64>> {
    let unit = NoiseSpecDoc {
        alpha: 1.0,
        ..spec.clone()
    }
    .to_spec()?;
    targets_ms
        .iter()
        .map(|t| {
            let t = positive("t2-targets-ms", *t)? * 1e-3;
            let chi = chi_fid_comb(&unit, t)?;
            if chi.is_nan() || chi <= 0.0 {
                return Err(CliError::Usage(format!(
                    "χ vanishes at T₂ = {t} s; pick another target"
                )));
            }
            let alpha = 1.0 / chi.sqrt();
            let first = predicted_t2(&unit.with_alpha(alpha)?)?;
            if (first - t).abs() > 1e-6 * t {
                return Err(CliError::Usage(format!(
                    "target T₂ = {t} s is not the first χ = 1 crossing (that is at {first} s)"
                )));
            }
            Ok(alpha)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flags_win_over_config() {
        let mut flags = ChiArgs {
            alpha: Some(2.0),
            ..Default::default()
        };
        let file: ChiArgs = toml::from_str("alpha = 1.0\ntau_max = 0.01\npoints = 5\n").unwrap();
        flags.overlay(file);
        assert_eq!(flags.alpha, Some(2.0));
        assert_eq!(flags.tau_max, Some(0.01));
        match flags.resolve().unwrap() {
            Request::PredictChi(r) => {
                assert_eq!(r.taus.len(), 5);
                assert_eq!(r.spec.alpha, 2.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<ChiArgs>("tau_mx = 0.01\n").is_err());
    }

    #[test]
    fn t2_targets_become_alphas() {
        let args = ScanArgs {
            t2_targets_ms: Some(vec![2.0, 8.0]),
            ..Default::default()
        };
        let Request::ScanAlpha(run) = args.resolve().unwrap() else {
            panic!()
        };
        // white comb: χ ≈ (π ω₀/4) α² τ for small ω₀τ
        let approx = |t: f64| (4.0 / (PI * TAU * 4.0 * t)).sqrt();
        assert!((run.alphas[0] - approx(2e-3)).abs() < 0.02 * approx(2e-3));
        assert!(run.alphas[1] < run.alphas[0]);
    }

    #[test]
    fn grids() {
        assert_eq!(upper_grid(1.0, 4), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(closed_grid(1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
