//! Fully resolved runs. A [`Request`] holds every value a run depends on,
//! so it is what the manifest stores and what `rerun` executes.

use std::f64::consts::TAU;
use std::io::Write;

use bathforge::analysis::{fit_decay, scan_alpha, DecayModel, ScanSettings};
use bathforge::config::{NoiseSpecDoc, ProgramDoc};
use bathforge::filter_theory::{chi_fid_comb, coherence_curve, predicted_t2};
use bathforge::noise_synth::analytic_psd;
use bathforge::noise_synth::Envelope;
use bathforge::qubit_sim::{rabi, ramsey, ramsey_contrast, RabiConfig, RamseyConfig};
use bathforge::spectral::{estimate_psd_realizations, powerlaw_slope};
use bathforge::stats::fit_line;
use bathforge::waveform::{
    compose, continuity_report, quantize, snapped_grid, to_iq, AmplitudeMode, NoiseInputs,
};
use bathforge::{NoiseRealization, NoiseSpec, Quadrature, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::args::{AmplitudeModeArg, FormatArg, ModelArg, PolicyArg};
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Request {
    Synth(SynthRun),
    Export(ExportRun),
    VerifyPsd(VerifyPsdRun),
    SimulateRamsey(RamseyRun),
    SimulateRabi(RabiRun),
    PredictChi(ChiRun),
    ScanAlpha(ScanRun),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthRun {
    pub spec: NoiseSpecDoc,
    pub realizations: usize,
    pub first_index: u64,
    pub periods: usize,
    pub sample_rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRun {
    pub spec: NoiseSpecDoc,
    pub program: ProgramDoc,
    pub realization: u64,
    pub sample_rate_hz: f64,
    pub bits: u32,
    pub format: FormatArg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_scale: Option<f64>,
    pub amplitude_mode: AmplitudeModeArg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyPsdRun {
    pub spec: NoiseSpecDoc,
    pub realizations: usize,
    pub periods: usize,
    pub sample_rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseyRun {
    pub spec: NoiseSpecDoc,
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
    pub fringe_hz: f64,
    pub pulse_rabi_hz: f64,
    pub realizations: usize,
    pub policy: PolicyArg,
    pub pulse_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiRun {
    pub spec: NoiseSpecDoc,
    pub rabi_hz: f64,
    pub durations: Vec<f64>,
    pub realizations: usize,
    pub policy: PolicyArg,
    pub mode: AmplitudeModeArg,
    pub refine: usize,
    pub fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiRun {
    pub spec: NoiseSpecDoc,
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRun {
    pub spec: NoiseSpecDoc,
    pub alphas: Vec<f64>,
    pub realizations: usize,
    pub points: usize,
    pub window: f64,
    pub fringes: f64,
    pub pulse_rabi_hz: f64,
    pub policy: PolicyArg,
    pub pulse_noise: bool,
    pub model: ModelArg,
}

/// One file produced by a run.
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Files plus human-readable summary lines.
pub struct Outcome {
    pub outputs: Vec<Output>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            outputs: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn file(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.outputs.push(Output {
            name: name.into(),
            bytes,
        });
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

impl Request {
    pub fn spec_doc(&self) -> &NoiseSpecDoc {
        match self {
            Request::Synth(r) => &r.spec,
            Request::Export(r) => &r.spec,
            Request::VerifyPsd(r) => &r.spec,
            Request::SimulateRamsey(r) => &r.spec,
            Request::SimulateRabi(r) => &r.spec,
            Request::PredictChi(r) => &r.spec,
            Request::ScanAlpha(r) => &r.spec,
        }
    }

    /// Hashes of every spec the run evaluates, in output order.
    pub fn spec_hashes(&self) -> CliResult<Vec<String>> {
        let base = self.spec_doc().to_spec()?;
        let alphas = match self {
            Request::SimulateRamsey(r) => Some(&r.alphas),
            Request::ScanAlpha(r) => Some(&r.alphas),
            _ => None,
        };
        Ok(match alphas {
            Some(a) => a
                .iter()
                .map(|x| base.with_alpha(*x).map(|s| s.hash()))
                .collect::<Result<_, _>>()?,
            None => vec![base.hash()],
        })
    }

    pub fn execute(&self) -> CliResult<Outcome> {
        match self {
            Request::Synth(r) => synth(r),
            Request::Export(r) => export(r),
            Request::VerifyPsd(r) => verify_psd(r),
            Request::SimulateRamsey(r) => simulate_ramsey(r),
            Request::SimulateRabi(r) => simulate_rabi(r),
            Request::PredictChi(r) => predict_chi(r),
            Request::ScanAlpha(r) => run_scan(r),
        }
    }
}

fn periodic_grid(spec: &NoiseSpec, periods: usize, rate_hz: f64) -> CliResult<TimeGrid> {
    let per_period = (spec.period() * rate_hz).ceil().max(2.0) as usize;
    Ok(TimeGrid::periodic(spec.omega0(), periods, per_period)?)
}

fn synth(r: &SynthRun) -> CliResult<Outcome> {
    let spec = r.spec.to_spec()?;
    let grid = periodic_grid(&spec, r.periods, r.sample_rate_hz)?;
    let mut out = Outcome::new();
    for index in r.first_index..r.first_index + r.realizations as u64 {
        let real = NoiseRealization::generate(&spec, index, grid)?;
        let mut buf = Vec::new();
        real.write_csv(&mut buf)?;
        out.file(format!("realization_{index}.csv"), buf);
    }
    out.say(format!(
        "{} realization(s) of {} samples at dt = {:.3e} s, spec {}",
        r.realizations,
        grid.len(),
        grid.dt(),
        spec.hash()
    ));
    Ok(out)
}

fn export(r: &ExportRun) -> CliResult<Outcome> {
    let spec = r.spec.to_spec()?;
    let program = r.program.to_program()?;
    let grid = snapped_grid(program.duration(), spec.omega0(), r.sample_rate_hz)?;
    let noise = NoiseRealization::generate(&spec, r.realization, grid)?;
    let inputs = match (spec.quadrature(), r.amplitude_mode) {
        (Quadrature::Dephasing, _) => NoiseInputs {
            dephasing: Some(&noise),
            ..Default::default()
        },
        (Quadrature::Amplitude, AmplitudeModeArg::Multiplicative) => NoiseInputs {
            multiplicative: Some(&noise),
            ..Default::default()
        },
        (Quadrature::Amplitude, AmplitudeModeArg::Additive) => NoiseInputs {
            additive: Some(&noise),
            ..Default::default()
        },
    };
    let composed = compose(&program, inputs, &grid)?;
    let rate = 1.0 / grid.dt();
    let iq = to_iq(&composed.omega, &composed.phi, rate)?;
    let peak = iq.i.iter().chain(&iq.q).fold(0.0f64, |m, v| m.max(v.abs()));
    // +FS itself has no code, so leave 1.5 codes of headroom
    let full_scale = r.full_scale.unwrap_or_else(|| {
        if peak > 0.0 {
            peak / (1.0 - 1.5 / (1u64 << (r.bits.clamp(2, 24) - 1)) as f64)
        } else {
            1.0
        }
    });
    let iq = quantize(&iq.with_full_scale(full_scale)?, r.bits)?;
    let qz = iq.quantized.as_ref().expect("quantize fills the codes");

    let mut out = Outcome::new();
    if matches!(r.format, FormatArg::Csv | FormatArg::Both) {
        let mut buf = Vec::new();
        iq.write_csv(&mut buf)?;
        out.file("iq.csv", buf);
    }
    if matches!(r.format, FormatArg::Binary | FormatArg::Both) {
        let mut bin = Vec::new();
        iq.write_binary(&mut bin)?;
        out.file("iq.bin", bin);
        let mut side = Vec::new();
        iq.write_sidecar(&spec.hash(), &mut side)?;
        out.file("iq.toml", side);
    }
    let cont = continuity_report(&iq, 0.1 * full_scale);
    out.say(format!(
        "{} samples at {:.6e} Hz, {} bits, full scale {:.6e} rad/s",
        iq.len(),
        rate,
        qz.bits,
        full_scale
    ));
    out.say(format!(
        "quantization: max error {:.3e}, SNR {}",
        qz.max_error,
        qz.snr_db.map_or("n/a".into(), |s| format!("{s:.1} dB"))
    ));
    out.say(format!(
        "continuity: largest step I {:.3e}, Q {:.3e}; loop boundary I {:.3e}, Q {:.3e}{}",
        cont.max_jump_i,
        cont.max_jump_q,
        cont.boundary_jump_i,
        cont.boundary_jump_q,
        if cont.flagged { " [flagged]" } else { "" }
    ));
    Ok(out)
}

fn verify_psd(r: &VerifyPsdRun) -> CliResult<Outcome> {
    let spec = r.spec.to_spec()?;
    let grid = periodic_grid(&spec, r.periods, r.sample_rate_hz)?;
    let reals = (0..r.realizations as u64)
        .map(|i| NoiseRealization::generate(&spec, i, grid))
        .collect::<Result<Vec<_>, _>>()?;
    let est = estimate_psd_realizations(&reals)?;

    let mut out = Outcome::new();
    let mut psd = Vec::new();
    writeln!(
        psd,
        "# spec {} realizations {}",
        spec.hash(),
        r.realizations
    )?;
    writeln!(
        psd,
        "# two_sided: S(ω) with variance = (1/2π)∫S dω; one_sided_x2 = 2·S for ω > 0"
    )?;
    writeln!(psd, "omega,two_sided,one_sided_x2")?;
    for (w, s) in est.omega.iter().zip(&est.density) {
        writeln!(psd, "{w:e},{s:e},{:e}", 2.0 * s)?;
    }
    out.file("psd.csv", psd);

    let analytic = analytic_psd(&spec);
    let measured = est.tooth_weights(&spec)?;
    let mut teeth = Vec::new();
    writeln!(teeth, "omega,analytic,estimated,relative_error")?;
    let mut worst: f64 = 0.0;
    for (tooth, (w, m)) in analytic.teeth.iter().zip(&measured) {
        let rel = if tooth.weight > 0.0 {
            (m - tooth.weight) / tooth.weight
        } else {
            f64::NAN
        };
        if rel.is_finite() {
            worst = worst.max(rel.abs());
        }
        writeln!(teeth, "{w:e},{:e},{m:e},{rel:e}", tooth.weight)?;
    }
    out.file("teeth.csv", teeth);

    out.say(format!(
        "{} teeth, worst relative tooth error {:.3e} over {} realizations",
        measured.len(),
        worst,
        r.realizations
    ));
    if let Some(line) = powerlaw_slope(&measured) {
        let expected = match spec.envelope() {
            Envelope::PowerLaw(p) => format!(" (expected {p})"),
            Envelope::Table(_) => String::new(),
        };
        out.say(format!("tooth power slope {:.4}{expected}", line.slope));
    }
    Ok(out)
}

fn simulate_ramsey(r: &RamseyRun) -> CliResult<Outcome> {
    let base = r.spec.to_spec()?;
    let mut out = Outcome::new();
    let single = r.alphas.len() == 1;
    for (k, alpha) in r.alphas.iter().enumerate() {
        let spec = base.with_alpha(*alpha)?;
        let mut cfg = RamseyConfig::new(
            spec.clone(),
            TAU * r.fringe_hz,
            TAU * r.pulse_rabi_hz,
            r.taus.clone(),
            r.realizations,
        );
        cfg.policy = r.policy.into();
        cfg.noise_during_pulses = r.pulse_noise;
        let rec = ramsey(&cfg)?;
        let contrast = ramsey_contrast(&cfg)?;

        let mut buf = Vec::new();
        writeln!(
            buf,
            "# ramsey spec {} alpha {:e} realizations {}",
            rec.spec_hash, alpha, r.realizations
        )?;
        for n in &rec.notes {
            writeln!(buf, "# {n}")?;
        }
        writeln!(
            buf,
            "tau,p1,p1_stderr,visibility,visibility_stderr,predicted"
        )?;
        for i in 0..r.taus.len() {
            let predicted = (-chi_fid_comb(&spec, r.taus[i])?).exp();
            writeln!(
                buf,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                r.taus[i],
                rec.mean[i],
                rec.stderr[i],
                contrast.visibility[i],
                contrast.stderr[i],
                predicted
            )?;
        }
        let name = if single {
            "ramsey.csv".to_string()
        } else {
            format!("ramsey_{k}.csv")
        };
        out.say(format!(
            "{name}: α = {alpha}, {} τ points, visibility {:.4} → {:.4}",
            r.taus.len(),
            contrast.visibility.first().copied().unwrap_or(f64::NAN),
            contrast.visibility.last().copied().unwrap_or(f64::NAN)
        ));
        out.file(name, buf);
    }
    Ok(out)
}

fn simulate_rabi(r: &RabiRun) -> CliResult<Outcome> {
    let spec = r.spec.to_spec()?;
    let mut cfg = RabiConfig::new(spec, TAU * r.rabi_hz, r.durations.clone(), r.realizations);
    cfg.policy = r.policy.into();
    cfg.refine = r.refine;
    cfg.mode = match r.mode {
        AmplitudeModeArg::Multiplicative => AmplitudeMode::Multiplicative,
        AmplitudeModeArg::Additive => AmplitudeMode::Additive,
    };
    let rec = rabi(&cfg)?;
    let mut out = Outcome::new();
    let mut buf = Vec::new();
    rec.write_csv(&mut buf)?;
    out.file("rabi.csv", buf);
    out.say(format!(
        "{} durations, {} realizations",
        rec.sweep.len(),
        rec.realizations
    ));
    if r.fit {
        match fit_decay(&rec, DecayModel::GaussianEnvelope) {
            Ok(f) => out.say(format!(
                "Gaussian envelope: T = {:.4e} ± {:.2e} s, R² = {:.5}",
                f.t_decay(),
                f.t_decay_stderr(),
                f.r_squared
            )),
            Err(e) => out.say(format!("Gaussian envelope fit failed: {e}")),
        }
    }
    Ok(out)
}

fn predict_chi(r: &ChiRun) -> CliResult<Outcome> {
    let spec = r.spec.to_spec()?;
    let curve = coherence_curve(&spec, &r.taus)?;
    let mut out = Outcome::new();
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    out.file("chi.csv", buf);
    match predicted_t2(&spec) {
        Ok(t2) => out.say(format!("predicted T2 = {t2:.6e} s")),
        Err(e) => out.say(format!("no T2: {e}")),
    }
    if let Some(line) = fit_line(&r.taus, &curve.chi, None) {
        out.say(format!(
            "linear fit over [{:.3e}, {:.3e}] s: slope {:.6e} /s, R² = {:.6}",
            r.taus.iter().copied().fold(f64::INFINITY, f64::min),
            r.taus.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            line.slope,
            line.r_squared
        ));
    }
    out.say(format!(
        "regime {} (log-log slope {})",
        curve.regime.as_str(),
        curve.log_slope.map_or("n/a".into(), |s| format!("{s:.3}"))
    ));
    Ok(out)
}

fn run_scan(r: &ScanRun) -> CliResult<Outcome> {
    let base = r.spec.to_spec()?;
    let settings = ScanSettings {
        realizations: r.realizations,
        points: r.points,
        window: r.window,
        fringes: r.fringes,
        pulse_rabi: TAU * r.pulse_rabi_hz,
        policy: r.policy.into(),
        noise_during_pulses: r.pulse_noise,
        model: r.model.into(),
    };
    let scan = scan_alpha(&base, &r.alphas, &settings)?;
    let mut out = Outcome::new();
    let mut table = Vec::new();
    writeln!(table, "alpha,t2,t2_err,predicted_t2,r_squared")?;
    for (k, e) in scan.entries.iter().enumerate() {
        writeln!(
            table,
            "{:e},{:e},{:e},{:e},{:e}",
            e.alpha,
            e.fit.t_decay(),
            e.fit.t_decay_stderr(),
            e.predicted_t2,
            e.fit.r_squared
        )?;
        let mut buf = Vec::new();
        e.record.write_csv(&mut buf)?;
        out.file(format!("ramsey_{k}.csv"), buf);
    }
    out.file("scan.csv", table);
    out.say(format!(
        "exponent {:.4} ± {:.4} (95% CI ± {:.4}) over {} α values",
        scan.scaling.exponent,
        scan.scaling.exponent_stderr,
        scan.scaling.exponent_ci95,
        scan.entries.len()
    ));
    Ok(out)
}
