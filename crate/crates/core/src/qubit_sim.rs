//! Single-qubit evolution under engineered noise, and Ramsey / Rabi
//! ensembles.
//!
//! In the frame co-rotating with the carrier and the engineered phase the
//! Hamiltonian is
//!
//! ```text
//! H = ((Δ − β_z)/2) σ_z + (Ω/2)(cos φ_C σ_x + sin φ_C σ_y)
//! ```
//!
//! with `β_z = dφ_N/dt`. Each step of a piecewise-constant H is applied as
//! an exact Pauli exponential, and step coefficients are cell averages taken
//! from exact antiderivatives of the comb (`φ_N` for β_z, `∫β_Ω` for the
//! amplitude noise), so no sampling error enters through the noise itself.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise_synth::{
    amplitude_integral_sum, draw_phases, phase_sum, CombSum, NoiseSpec, PhaseDraw, PhasePolicy,
    Quadrature,
};
use crate::stats::mean_and_stderr;
use crate::waveform::AmplitudeMode;

/// Largest rotation angle any single term may contribute per step.
pub const MAX_STEP_ANGLE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl QubitState {
    pub fn ground() -> Self {
        Self {
            a0: Complex64::new(1.0, 0.0),
            a1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        Self {
            a0: Complex64::new(0.0, 0.0),
            a1: Complex64::new(1.0, 0.0),
        }
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus_x() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            a0: Complex64::new(h, 0.0),
            a1: Complex64::new(h, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    /// Population of |1⟩.
    pub fn p1(&self) -> f64 {
        self.a1.norm_sqr()
    }

    /// Bloch vector `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let c = self.a0.conj() * self.a1;
        [
            2.0 * c.re,
            2.0 * c.im,
            self.a0.norm_sqr() - self.a1.norm_sqr(),
        ]
    }

    /// Azimuth of the Bloch vector in the xy plane.
    pub fn azimuth(&self) -> f64 {
        let [x, y, _] = self.bloch();
        y.atan2(x)
    }
}

/// Piecewise-constant Hamiltonian coefficients for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HamiltonianSample {
    /// Engineered detuning noise β_z in rad/s; enters as `−β_z/2` on σ_z.
    pub noise_z: f64,
    /// Static detuning Δ in rad/s; enters as `+Δ/2` on σ_z.
    pub detuning: f64,
    /// Rabi rate Ω in rad/s.
    pub omega: f64,
    /// Drive phase φ_C in rad.
    pub phi: f64,
}

impl HamiltonianSample {
    fn z_rate(&self) -> f64 {
        self.detuning - self.noise_z
    }
}

/// `exp(−i (r·σ/2) dt)` applied to `s`, with `r = (Ω cos φ, Ω sin φ, Δ − β_z)`.
fn apply_step(s: QubitState, h: &HamiltonianSample, dt: f64) -> QubitState {
    let rx = h.omega * h.phi.cos();
    let ry = h.omega * h.phi.sin();
    let rz = h.z_rate();
    let norm = (rx * rx + ry * ry + rz * rz).sqrt();
    if norm == 0.0 {
        return s;
    }
    let half = 0.5 * norm * dt;
    let (sn, c) = half.sin_cos();
    let (nx, ny, nz) = (rx / norm, ry / norm, rz / norm);
    // U = c·I − i·sn·(n·σ)
    let u00 = Complex64::new(c, -sn * nz);
    let u11 = Complex64::new(c, sn * nz);
    let u01 = Complex64::new(-sn * ny, -sn * nx);
    let u10 = Complex64::new(sn * ny, -sn * nx);
    QubitState {
        a0: u00 * s.a0 + u01 * s.a1,
        a1: u10 * s.a0 + u11 * s.a1,
    }
}

/// Rotation about z by `angle`: `exp(−i angle σ_z / 2)`.
pub fn rotate_z(s: QubitState, angle: f64) -> QubitState {
    let (sn, c) = (0.5 * angle).sin_cos();
    QubitState {
        a0: s.a0 * Complex64::new(c, -sn),
        a1: s.a1 * Complex64::new(c, sn),
    }
}

fn check_step(h: &HamiltonianSample, dt: f64, index: usize) -> Result<()> {
    for (term, rate) in [("drive", h.omega), ("detuning noise", h.noise_z)] {
        let angle = rate.abs() * dt;
        if angle > MAX_STEP_ANGLE * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge {
                step: index,
                term,
                angle,
                limit: MAX_STEP_ANGLE,
            });
        }
    }
    Ok(())
}

/// Applies each sample for `dt` in turn.
pub fn propagate(state: QubitState, samples: &[HamiltonianSample], dt: f64) -> Result<QubitState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    samples.iter().enumerate().try_fold(state, |s, (k, h)| {
        check_step(h, dt, k)?;
        Ok(apply_step(s, h, dt))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Ramsey,
    Rabi,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Ramsey => "ramsey",
            ExperimentKind::Rabi => "rabi",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    /// τ for Ramsey, drive duration for Rabi, in seconds.
    pub sweep: Vec<f64>,
    /// Ensemble-mean P(|1⟩).
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
    pub spec_hash: String,
    pub alpha: f64,
    /// Human-readable remarks: degeneracies, timing ratios and so on.
    pub notes: Vec<String>,
}

impl ExperimentRecord {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# {} spec {} alpha {:e} realizations {}",
            self.kind.as_str(),
            self.spec_hash,
            self.alpha,
            self.realizations
        )?;
        for n in &self.notes {
            writeln!(out, "# {n}")?;
        }
        writeln!(out, "sweep,mean,stderr")?;
        for ((x, m), e) in self.sweep.iter().zip(&self.mean).zip(&self.stderr) {
            writeln!(out, "{x:e},{m:e},{e:e}")?;
        }
        Ok(())
    }
}

/// Sweep of fringe populations after π/2 – τ – π/2. Both pulses are about
/// x so that with no detuning and no noise the qubit ends in |1⟩, and
/// `P(τ) = ½[1 + V cos(Δτ)]`.
#[derive(Debug, Clone)]
pub struct RamseyConfig {
    pub spec: NoiseSpec,
    /// Static detuning Δ in rad/s.
    pub fringe_detuning: f64,
    /// Rabi rate of the π/2 pulses in rad/s.
    pub pulse_rabi: f64,
    pub taus: Vec<f64>,
    pub realizations: usize,
    pub policy: PhasePolicy,
    /// Apply the detuning noise during the pulses as well as between them.
    pub noise_during_pulses: bool,
}

impl RamseyConfig {
    pub fn new(
        spec: NoiseSpec,
        fringe_detuning: f64,
        pulse_rabi: f64,
        taus: Vec<f64>,
        realizations: usize,
    ) -> Self {
        Self {
            spec,
            fringe_detuning,
            pulse_rabi,
            taus,
            realizations,
            policy: PhasePolicy::default(),
            noise_during_pulses: true,
        }
    }

    pub fn pulse_duration(&self) -> f64 {
        FRAC_PI_2 / self.pulse_rabi
    }

    fn validate(&self) -> Result<()> {
        if self.spec.quadrature() != Quadrature::Dephasing {
            return Err(Error::invalid("spec", "Ramsey needs a dephasing spec"));
        }
        if self.realizations == 0 {
            return Err(Error::invalid(
                "realizations",
                "need at least one realization",
            ));
        }
        if !(self.pulse_rabi > 0.0) {
            return Err(Error::invalid("pulse_rabi", "must be positive"));
        }
        if self.taus.is_empty() || self.taus.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::invalid(
                "taus",
                "need one or more non-negative free-evolution times",
            ));
        }
        Ok(())
    }
}

/// Pulse about x from `t0` for `duration`, with detuning noise taken from
/// the phase comb `phi_n` if given.
fn noisy_pulse(
    mut s: QubitState,
    t0: f64,
    duration: f64,
    omega: f64,
    detuning: f64,
    phi_n: Option<&CombSum>,
    noise_bound: f64,
) -> Result<QubitState> {
    let rate = omega
        .abs()
        .max(if phi_n.is_some() { noise_bound } else { 0.0 });
    let steps = ((rate * duration / MAX_STEP_ANGLE).ceil() as usize).max(1);
    let dt = duration / steps as f64;
    let phases = phi_n.map(|c| c.sin_grid(t0, dt, steps + 1));
    for k in 0..steps {
        let noise_z = phases.as_ref().map_or(0.0, |p| (p[k + 1] - p[k]) / dt);
        let h = HamiltonianSample {
            noise_z,
            detuning,
            omega,
            phi: 0.0,
        };
        check_step(&h, dt, k)?;
        s = apply_step(s, &h, dt);
    }
    Ok(s)
}

/// State just before the second π/2 pulse.
fn ramsey_before_readout(cfg: &RamseyConfig, comb: &CombSum, tau: f64) -> Result<QubitState> {
    let tp = cfg.pulse_duration();
    let pulse_noise = cfg.noise_during_pulses.then_some(comb);
    let s = noisy_pulse(
        QubitState::ground(),
        0.0,
        tp,
        cfg.pulse_rabi,
        cfg.fringe_detuning,
        pulse_noise,
        cfg.spec.beta_bound(),
    )?;
    let accumulated = comb.sin_at(tp + tau) - comb.sin_at(tp);
    Ok(rotate_z(s, cfg.fringe_detuning * tau - accumulated))
}

/// Final |1⟩ population of one Ramsey shot with the comb phases `draw`.
pub fn ramsey_shot(cfg: &RamseyConfig, draw: &PhaseDraw, tau: f64) -> Result<f64> {
    let comb = phase_sum(&cfg.spec, draw);
    let tp = cfg.pulse_duration();
    let s = ramsey_before_readout(cfg, &comb, tau)?;
    let pulse_noise = cfg.noise_during_pulses.then_some(&comb);
    let s = noisy_pulse(
        s,
        tp + tau,
        tp,
        cfg.pulse_rabi,
        cfg.fringe_detuning,
        pulse_noise,
        cfg.spec.beta_bound(),
    )?;
    Ok(s.p1())
}

fn coherence(s: &QubitState) -> Complex64 {
    s.a0 * s.a1.conj()
}

/// Fringe contrast at each τ: what a scan of the second pulse's phase
/// would record, normalized so the noiseless sequence reads exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastRecord {
    pub taus: Vec<f64>,
    pub visibility: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
}

impl ContrastRecord {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tau,visibility,stderr")?;
        for ((t, v), e) in self.taus.iter().zip(&self.visibility).zip(&self.stderr) {
            writeln!(out, "{t:e},{v:e},{e:e}")?;
        }
        Ok(())
    }
}

/// Ensemble mean of the transverse coherence `a₀ a₁*` before readout,
/// divided by its noiseless value. The visibility is the modulus of that
/// mean; its standard error is taken along the mean's direction.
pub fn ramsey_contrast(cfg: &RamseyConfig) -> Result<ContrastRecord> {
    cfg.validate()?;
    let points = cfg.taus.len();
    let quiet = phase_sum(
        &cfg.spec.with_alpha(0.0)?,
        &PhaseDraw::zeros(cfg.spec.teeth()),
    );
    let reference: Vec<Complex64> = cfg
        .taus
        .iter()
        .map(|t| ramsey_before_readout(cfg, &quiet, *t).map(|s| coherence(&s)))
        .collect::<Result<_>>()?;
    if let Some(i) = reference.iter().position(|c| c.norm() < 1e-12) {
        return Err(Error::Degenerate(format!(
            "noiseless coherence vanishes at τ = {}",
            cfg.taus[i]
        )));
    }
    let rows: Vec<Vec<Complex64>> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            (0..points)
                .map(|i| {
                    let draw = draw_phases(&cfg.spec, cfg.policy.draw_index(r, i, points));
                    let comb = phase_sum(&cfg.spec, &draw);
                    ramsey_before_readout(cfg, &comb, cfg.taus[i])
                        .map(|s| coherence(&s) / reference[i])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let (visibility, stderr) = (0..points)
        .map(|i| {
            let re: Vec<f64> = rows.iter().map(|r| r[i].re).collect();
            let im: Vec<f64> = rows.iter().map(|r| r[i].im).collect();
            let m = Complex64::new(mean_and_stderr(&re).0, mean_and_stderr(&im).0);
            let dir = if m.norm() > 0.0 {
                m / m.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let along: Vec<f64> = rows.iter().map(|r| (r[i] * dir.conj()).re).collect();
            (m.norm(), mean_and_stderr(&along).1)
        })
        .unzip();
    Ok(ContrastRecord {
        taus: cfg.taus.clone(),
        visibility,
        stderr,
        realizations: cfg.realizations,
    })
}

fn reduce(per_realization: Vec<Vec<f64>>, points: usize) -> (Vec<f64>, Vec<f64>) {
    (0..points)
        .map(|i| {
            let col: Vec<f64> = per_realization.iter().map(|r| r[i]).collect();
            mean_and_stderr(&col)
        })
        .unzip()
}

pub fn ramsey(cfg: &RamseyConfig) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let points = cfg.taus.len();
    let rows: Vec<Vec<f64>> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let mut cached: Option<(u64, PhaseDraw)> = None;
            cfg.taus
                .iter()
                .enumerate()
                .map(|(i, tau)| {
                    let idx = cfg.policy.draw_index(r, i, points);
                    if cached.as_ref().map(|(k, _)| *k) != Some(idx) {
                        cached = Some((idx, draw_phases(&cfg.spec, idx)));
                    }
                    ramsey_shot(cfg, &cached.as_ref().expect("just filled").1, *tau)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = reduce(rows, points);

    let mut notes = vec![format!("policy {}", cfg.policy.as_str())];
    if cfg.fringe_detuning == 0.0 {
        log::warn!("fringe detuning is zero; the fringe phase is not identifiable in a fit");
        notes.push(
            "fringe detuning is zero: fringe fits are degenerate, populations give 1/2(1+V)".into(),
        );
    }
    if let Some(min_tau) = cfg
        .taus
        .iter()
        .copied()
        .filter(|t| *t > 0.0)
        .reduce(f64::min)
    {
        notes.push(format!(
            "pulse/tau ratio {:.3e}",
            cfg.pulse_duration() / min_tau
        ));
    }
    if !cfg.noise_during_pulses {
        notes.push("noise disabled during pulses".into());
    }
    Ok(ExperimentRecord {
        kind: ExperimentKind::Ramsey,
        sweep: cfg.taus.clone(),
        mean,
        stderr,
        realizations: cfg.realizations,
        spec_hash: cfg.spec.hash(),
        alpha: cfg.spec.alpha(),
        notes,
    })
}

/// Resonant drive about x for each duration in `durations`.
#[derive(Debug, Clone)]
pub struct RabiConfig {
    pub spec: NoiseSpec,
    /// Nominal Rabi rate Ω₀ in rad/s.
    pub omega0: f64,
    /// Drive durations in seconds, in any order.
    pub durations: Vec<f64>,
    pub realizations: usize,
    pub mode: AmplitudeMode,
    /// Ω₀ used to scale additive noise; defaults to `omega0`.
    pub additive_scale: Option<f64>,
    pub policy: PhasePolicy,
    /// Extra subdivision of every step (1 = the coarsest allowed step).
    pub refine: usize,
}

impl RabiConfig {
    pub fn new(spec: NoiseSpec, omega0: f64, durations: Vec<f64>, realizations: usize) -> Self {
        Self {
            spec,
            omega0,
            durations,
            realizations,
            mode: AmplitudeMode::Multiplicative,
            additive_scale: None,
            policy: PhasePolicy::default(),
            refine: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.spec.quadrature() != Quadrature::Amplitude {
            return Err(Error::invalid("spec", "Rabi needs an amplitude spec"));
        }
        if self.realizations == 0 {
            return Err(Error::invalid(
                "realizations",
                "need at least one realization",
            ));
        }
        if !(self.omega0 > 0.0) {
            return Err(Error::invalid("omega0", "must be positive"));
        }
        if self.refine == 0 {
            return Err(Error::invalid("refine", "must be at least 1"));
        }
        if self.durations.is_empty() || self.durations.iter().any(|t| !(*t >= 0.0 && t.is_finite()))
        {
            return Err(Error::invalid(
                "durations",
                "need one or more non-negative durations",
            ));
        }
        Ok(())
    }
}

/// Populations after each duration for one draw. A single trajectory is
/// integrated through the sorted durations.
pub fn rabi_trajectory(cfg: &RabiConfig, draw: &PhaseDraw) -> Result<Vec<f64>> {
    let integral = amplitude_integral_sum(&cfg.spec, draw);
    let scale = match cfg.mode {
        AmplitudeMode::Multiplicative => cfg.omega0,
        AmplitudeMode::Additive => cfg.additive_scale.unwrap_or(cfg.omega0),
    };
    let peak = cfg.omega0 + scale * cfg.spec.beta_bound();
    let max_dt = MAX_STEP_ANGLE / peak / cfg.refine as f64;

    let mut order: Vec<usize> = (0..cfg.durations.len()).collect();
    order.sort_by(|a, b| cfg.durations[*a].total_cmp(&cfg.durations[*b]));
    let mut out = vec![0.0; cfg.durations.len()];
    let mut state = QubitState::ground();
    let mut t = 0.0;
    let mut prev_int = integral.sin_at(0.0);
    for i in order {
        let target = cfg.durations[i];
        let span = target - t;
        if span > 0.0 {
            let steps = (span / max_dt).ceil() as usize;
            let dt = span / steps as f64;
            for k in 0..steps {
                let next_int = integral.sin_at(t + (k + 1) as f64 * dt);
                let beta = (next_int - prev_int) / dt;
                prev_int = next_int;
                let h = HamiltonianSample {
                    omega: cfg.omega0 + scale * beta,
                    ..Default::default()
                };
                check_step(&h, dt, k)?;
                state = apply_step(state, &h, dt);
            }
            t = target;
        }
        out[i] = state.p1();
    }
    Ok(out)
}

pub fn rabi(cfg: &RabiConfig) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let points = cfg.durations.len();
    let rows: Vec<Vec<f64>> = match cfg.policy {
        PhasePolicy::PerPoint => (0..cfg.realizations)
            .into_par_iter()
            .map(|r| {
                (0..points)
                    .map(|i| {
                        let draw = draw_phases(&cfg.spec, cfg.policy.draw_index(r, i, points));
                        let single = RabiConfig {
                            durations: vec![cfg.durations[i]],
                            ..cfg.clone()
                        };
                        Ok(rabi_trajectory(&single, &draw)?[0])
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?,
        _ => (0..cfg.realizations)
            .into_par_iter()
            .map(|r| {
                rabi_trajectory(
                    cfg,
                    &draw_phases(&cfg.spec, cfg.policy.draw_index(r, 0, points)),
                )
            })
            .collect::<Result<_>>()?,
    };
    let (mean, stderr) = reduce(rows, points);
    let mut notes = vec![
        format!("policy {}", cfg.policy.as_str()),
        format!(
            "mode {}",
            match cfg.mode {
                AmplitudeMode::Multiplicative => "multiplicative",
                AmplitudeMode::Additive => "additive",
            }
        ),
    ];
    if cfg.spec.may_invert_field() {
        notes.push("noise bound allows the field amplitude to change sign".into());
    }
    Ok(ExperimentRecord {
        kind: ExperimentKind::Rabi,
        sweep: cfg.durations.clone(),
        mean,
        stderr,
        realizations: cfg.realizations,
        spec_hash: cfg.spec.hash(),
        alpha: cfg.spec.alpha(),
        notes,
    })
}

/// Noise-free Rabi population `sin²(Ω₀ t / 2)`.
pub fn ideal_rabi(omega0: f64, t: f64) -> f64 {
    (0.5 * omega0 * t).sin().powi(2)
}

/// Noise-free π pulse duration.
pub fn pi_time(omega0: f64) -> f64 {
    PI / omega0
}
