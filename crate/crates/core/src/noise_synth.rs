//! Frequency-comb noise baths.
//!
//! A bath is a finite Fourier series with teeth at `ω_j = j·ω₀`,
//! `j = 1..=J`, an envelope `F(j)`, a global strength `α`, and one random
//! phase `ψ_j` per tooth:
//!
//! ```text
//! dephasing:  φ_N(t) = α Σ F(j) sin(ω_j t + ψ_j)
//!             β_z(t) = dφ_N/dt = α ω₀ Σ j F(j) cos(ω_j t + ψ_j)      [rad/s]
//! amplitude:  β_Ω(t) = α Σ F(j) cos(ω_j t + ψ_j)                     [fractional]
//! ```
//!
//! For a target power law `S(ω_j) ∝ ω_j^p` the envelope is `j^(p/2 − 1)`
//! (dephasing) or `j^(p/2)` (amplitude). The analytic autocorrelation and
//! two-sided PSD of each quadrature are exact finite sums over the teeth.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    Dephasing,
    Amplitude,
}

impl Quadrature {
    pub fn as_str(self) -> &'static str {
        match self {
            Quadrature::Dephasing => "dephasing",
            Quadrature::Amplitude => "amplitude",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    /// Exponent `p` of the target PSD `S(ω) ∝ ω^p`.
    PowerLaw(f64),
    /// Explicit `F(1), …, F(J)`.
    Table(Vec<f64>),
}

/// Full description of an engineered noise bath. The cutoff `J·ω₀` is
/// derived on demand and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    quadrature: Quadrature,
    alpha: f64,
    omega0: f64,
    teeth: usize,
    envelope: Envelope,
    seed: u64,
}

impl NoiseSpec {
    pub fn power_law(
        quadrature: Quadrature,
        alpha: f64,
        omega0: f64,
        teeth: usize,
        p: f64,
        seed: u64,
    ) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::invalid("p", "power-law exponent must be finite"));
        }
        Self::validated(
            quadrature,
            alpha,
            omega0,
            teeth,
            Envelope::PowerLaw(p),
            seed,
        )
    }

    pub fn tabulated(
        quadrature: Quadrature,
        alpha: f64,
        omega0: f64,
        table: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if let Some(j) = table.iter().position(|f| !f.is_finite()) {
            return Err(Error::invalid(
                "envelope",
                format!("F({}) is not finite", j + 1),
            ));
        }
        let teeth = table.len();
        Self::validated(
            quadrature,
            alpha,
            omega0,
            teeth,
            Envelope::Table(table),
            seed,
        )
    }

    fn validated(
        quadrature: Quadrature,
        alpha: f64,
        omega0: f64,
        teeth: usize,
        envelope: Envelope,
        seed: u64,
    ) -> Result<Self> {
        if teeth == 0 {
            return Err(Error::invalid("teeth", "need at least one comb tooth"));
        }
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::invalid(
                "omega0",
                format!("must be positive, got {omega0}"),
            ));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must be non-negative, got {alpha}"),
            ));
        }
        Ok(Self {
            quadrature,
            alpha,
            omega0,
            teeth,
            envelope,
            seed,
        })
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Base angular frequency ω₀ in rad/s.
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn teeth(&self) -> usize {
        self.teeth
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Upper cutoff `J·ω₀` in rad/s.
    pub fn cutoff(&self) -> f64 {
        self.teeth as f64 * self.omega0
    }

    /// Base period `2π/ω₀` after which every realization repeats.
    pub fn period(&self) -> f64 {
        TAU / self.omega0
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::validated(
            self.quadrature,
            alpha,
            self.omega0,
            self.teeth,
            self.envelope.clone(),
            self.seed,
        )
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// `F(1..=J)` for either envelope kind.
    pub fn envelope_table(&self) -> Vec<f64> {
        match &self.envelope {
            Envelope::PowerLaw(p) => power_law_table(self.quadrature, *p, self.teeth),
            Envelope::Table(t) => t.clone(),
        }
    }

    pub fn tooth_frequencies(&self) -> Vec<f64> {
        (1..=self.teeth).map(|j| j as f64 * self.omega0).collect()
    }

    /// Amplitude of each cosine in β(t): `α ω₀ j F(j)` for dephasing,
    /// `α F(j)` for amplitude noise.
    pub fn beta_amplitudes(&self) -> Vec<f64> {
        let f = self.envelope_table();
        match self.quadrature {
            Quadrature::Dephasing => f
                .iter()
                .enumerate()
                .map(|(i, f)| self.alpha * self.omega0 * (i + 1) as f64 * f)
                .collect(),
            Quadrature::Amplitude => f.iter().map(|f| self.alpha * f).collect(),
        }
    }

    /// Upper bound on |β(t)| over all times and phase draws.
    pub fn beta_bound(&self) -> f64 {
        self.beta_amplitudes().iter().map(|a| a.abs()).sum()
    }

    /// True when `α Σ|F(j)| ≥ 1`, i.e. multiplicative amplitude noise can
    /// drive the field amplitude negative.
    pub fn may_invert_field(&self) -> bool {
        self.quadrature == Quadrature::Amplitude && self.beta_bound() >= 1.0
    }

    fn check_nyquist(&self, grid: &TimeGrid) -> Result<()> {
        let limit = PI / self.cutoff();
        if grid.dt() > limit {
            return Err(Error::Nyquist {
                dt: grid.dt(),
                limit,
            });
        }
        Ok(())
    }

    fn require(&self, quadrature: Quadrature) -> Result<()> {
        if self.quadrature != quadrature {
            return Err(Error::invalid(
                "quadrature",
                format!(
                    "operation needs a {} spec, got {}",
                    quadrature.as_str(),
                    self.quadrature.as_str()
                ),
            ));
        }
        Ok(())
    }
}

fn power_law_table(quadrature: Quadrature, p: f64, teeth: usize) -> Vec<f64> {
    let exponent = match quadrature {
        Quadrature::Dephasing => p / 2.0 - 1.0,
        Quadrature::Amplitude => p / 2.0,
    };
    (1..=teeth).map(|j| (j as f64).powf(exponent)).collect()
}

/// Power-law envelope `F(j)`, `j = 1..=J`. Explicit tables are rejected;
/// use [`NoiseSpec::envelope_table`] to read those back.
pub fn envelope_values(spec: &NoiseSpec) -> Result<Vec<f64>> {
    match spec.envelope {
        Envelope::PowerLaw(p) => Ok(power_law_table(spec.quadrature, p, spec.teeth)),
        Envelope::Table(_) => Err(Error::invalid(
            "envelope",
            "envelope_values needs a power-law spec; this one carries an explicit table",
        )),
    }
}

/// One random phase per comb tooth.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDraw {
    psi: Vec<f64>,
}

impl PhaseDraw {
    /// All-zero phases, mostly useful for deterministic checks.
    pub fn zeros(teeth: usize) -> Self {
        Self {
            psi: vec![0.0; teeth],
        }
    }

    pub fn from_angles(psi: Vec<f64>) -> Result<Self> {
        if psi.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("psi", "phases must be finite"));
        }
        Ok(Self {
            psi: psi.into_iter().map(|p| p.rem_euclid(TAU)).collect(),
        })
    }

    pub fn angles(&self) -> &[f64] {
        &self.psi
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }
}

/// Uniform phases on `[0, 2π)` for realization `index`, drawn from the
/// stream keyed by `(spec.seed, index)`.
pub fn draw_phases(spec: &NoiseSpec, realization_index: u64) -> PhaseDraw {
    let mut rng = rng::stream(spec.seed, Domain::CombPhases, realization_index);
    let psi = (0..spec.teeth)
        .map(|_| {
            let a = TAU * rng.random::<f64>();
            if a >= TAU {
                0.0
            } else {
                a
            }
        })
        .collect();
    PhaseDraw { psi }
}

/// How sweep points of an experiment map onto phase draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhasePolicy {
    /// One draw per realization, held across the whole sweep.
    #[default]
    PerRealization,
    /// A fresh draw for every (realization, sweep point) pair.
    PerPoint,
    /// Draw 0 for every realization and point.
    Frozen,
}

impl PhasePolicy {
    pub fn draw_index(self, realization: usize, point: usize, points: usize) -> u64 {
        match self {
            PhasePolicy::PerRealization => realization as u64,
            PhasePolicy::PerPoint => (realization * points + point) as u64,
            PhasePolicy::Frozen => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PhasePolicy::PerRealization => "per-realization",
            PhasePolicy::PerPoint => "per-point",
            PhasePolicy::Frozen => "frozen",
        }
    }
}

/// A finite sum `Σ a_j e^{i(ω_j t + ψ_j)}` whose real or imaginary part is a
/// comb waveform.
#[derive(Debug, Clone)]
pub(crate) struct CombSum {
    amps: Vec<f64>,
    omegas: Vec<f64>,
    phases: Vec<f64>,
}

const REANCHOR: usize = 256;

impl CombSum {
    pub(crate) fn new(amps: Vec<f64>, omegas: Vec<f64>, phases: &[f64]) -> Self {
        debug_assert_eq!(amps.len(), omegas.len());
        debug_assert_eq!(amps.len(), phases.len());
        Self {
            amps,
            omegas,
            phases: phases.to_vec(),
        }
    }

    /// `Σ a_j sin(ω_j t + ψ_j)` at a single time.
    pub(crate) fn sin_at(&self, t: f64) -> f64 {
        self.amps
            .iter()
            .zip(&self.omegas)
            .zip(&self.phases)
            .map(|((a, w), p)| a * (w * t + p).sin())
            .sum()
    }

    /// Complex sum on a uniform grid via a per-tooth phasor recurrence,
    /// re-anchored from the closed form every 256 samples.
    fn eval_grid(&self, t0: f64, dt: f64, n: usize) -> Vec<Complex64> {
        let steps: Vec<Complex64> = self
            .omegas
            .iter()
            .map(|w| Complex64::from_polar(1.0, w * dt))
            .collect();
        let mut phasors = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            if k % REANCHOR == 0 {
                let t = t0 + k as f64 * dt;
                for ((z, w), p) in phasors.iter_mut().zip(&self.omegas).zip(&self.phases) {
                    *z = Complex64::from_polar(1.0, w * t + p);
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for ((z, a), s) in phasors.iter_mut().zip(&self.amps).zip(&steps) {
                acc += *z * *a;
                *z *= *s;
            }
            out.push(acc);
        }
        out
    }

    pub(crate) fn sin_grid(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        self.eval_grid(t0, dt, n)
            .into_iter()
            .map(|z| z.im)
            .collect()
    }

    pub(crate) fn cos_grid(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        self.eval_grid(t0, dt, n)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }
}

fn check_draw(spec: &NoiseSpec, draw: &PhaseDraw) -> Result<()> {
    if draw.len() != spec.teeth {
        return Err(Error::LengthMismatch {
            what: "phase draw vs comb teeth",
            left: draw.len(),
            right: spec.teeth,
        });
    }
    Ok(())
}

/// `φ_N(t) = α Σ F(j) sin(ω_j t + ψ_j)` as a reusable evaluator.
pub(crate) fn phase_sum(spec: &NoiseSpec, draw: &PhaseDraw) -> CombSum {
    let amps = spec
        .envelope_table()
        .iter()
        .map(|f| spec.alpha * f)
        .collect();
    CombSum::new(amps, spec.tooth_frequencies(), draw.angles())
}

/// `∫β_Ω dt = α Σ F(j) sin(ω_j t + ψ_j)/ω_j`, the antiderivative of the
/// amplitude waveform.
pub(crate) fn amplitude_integral_sum(spec: &NoiseSpec, draw: &PhaseDraw) -> CombSum {
    let omegas = spec.tooth_frequencies();
    let amps = spec
        .envelope_table()
        .iter()
        .zip(&omegas)
        .map(|(f, w)| spec.alpha * f / w)
        .collect();
    CombSum::new(amps, omegas, draw.angles())
}

fn beta_sum(spec: &NoiseSpec, draw: &PhaseDraw) -> CombSum {
    CombSum::new(
        spec.beta_amplitudes(),
        spec.tooth_frequencies(),
        draw.angles(),
    )
}

/// Engineered phase `φ_N(t)` in radians.
pub fn dephasing_phase_waveform(
    spec: &NoiseSpec,
    draw: &PhaseDraw,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    spec.require(Quadrature::Dephasing)?;
    check_draw(spec, draw)?;
    spec.check_nyquist(grid)?;
    Ok(phase_sum(spec, draw).sin_grid(grid.t0(), grid.dt(), grid.len()))
}

/// Detuning noise `β_z(t) = dφ_N/dt` in rad/s, evaluated from the analytic
/// derivative.
pub fn detuning_waveform(spec: &NoiseSpec, draw: &PhaseDraw, grid: &TimeGrid) -> Result<Vec<f64>> {
    spec.require(Quadrature::Dephasing)?;
    check_draw(spec, draw)?;
    spec.check_nyquist(grid)?;
    Ok(beta_sum(spec, draw).cos_grid(grid.t0(), grid.dt(), grid.len()))
}

/// Fractional amplitude noise `β_Ω(t)`; the driven field is `Ω₀(1 + β_Ω)`.
pub fn amplitude_waveform(spec: &NoiseSpec, draw: &PhaseDraw, grid: &TimeGrid) -> Result<Vec<f64>> {
    spec.require(Quadrature::Amplitude)?;
    check_draw(spec, draw)?;
    spec.check_nyquist(grid)?;
    if spec.may_invert_field() {
        log::warn!(
            "alpha·Σ|F(j)| = {:.3} ≥ 1: the modulated field amplitude can go negative",
            spec.beta_bound()
        );
    }
    Ok(beta_sum(spec, draw).cos_grid(grid.t0(), grid.dt(), grid.len()))
}

/// One δ-function tooth of a comb PSD: `weight · δ(ω − omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombTooth {
    pub omega: f64,
    pub weight: f64,
}

/// Positive-frequency teeth of a two-sided comb PSD. When `symmetric` is
/// set, an identical tooth at `−omega` is implied for each entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdComb {
    pub teeth: Vec<CombTooth>,
    pub symmetric: bool,
}

impl PsdComb {
    /// `C(0) = (1/2π) ∫ S(ω) dω`, summing both signs of every tooth.
    pub fn variance(&self) -> f64 {
        let sides = if self.symmetric { 2.0 } else { 1.0 };
        self.teeth.iter().map(|t| sides * t.weight).sum::<f64>() / TAU
    }
}

/// Analytic comb PSD: weights `(π α² ω₀²/2)(j F(j))²` for dephasing and
/// `(π α²/2) F(j)²` for amplitude noise.
pub fn analytic_psd(spec: &NoiseSpec) -> PsdComb {
    let teeth = spec
        .beta_amplitudes()
        .iter()
        .zip(spec.tooth_frequencies())
        .map(|(a, omega)| CombTooth {
            omega,
            weight: PI * a * a / 2.0,
        })
        .collect();
    PsdComb {
        teeth,
        symmetric: true,
    }
}

/// Time-averaged autocorrelation `⟨β(t)β(t+τ)⟩_t = ½ Σ a_j² cos(ω_j τ)`.
pub fn analytic_autocorrelation(spec: &NoiseSpec, tau: f64) -> f64 {
    spec.beta_amplitudes()
        .iter()
        .zip(spec.tooth_frequencies())
        .map(|(a, w)| 0.5 * a * a * (w * tau).cos())
        .sum()
}

/// A sampled noise trace together with the draw that produced it.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    pub spec: NoiseSpec,
    pub index: u64,
    pub draw: PhaseDraw,
    pub grid: TimeGrid,
    /// β_z in rad/s (dephasing) or fractional β_Ω (amplitude).
    pub beta: Vec<f64>,
    /// φ_N in rad, dephasing only.
    pub phi_n: Option<Vec<f64>>,
}

impl NoiseRealization {
    pub fn generate(spec: &NoiseSpec, index: u64, grid: TimeGrid) -> Result<Self> {
        let draw = draw_phases(spec, index);
        Self::with_draw(spec, index, draw, grid)
    }

    pub fn with_draw(
        spec: &NoiseSpec,
        index: u64,
        draw: PhaseDraw,
        grid: TimeGrid,
    ) -> Result<Self> {
        let (beta, phi_n) = match spec.quadrature {
            Quadrature::Dephasing => (
                detuning_waveform(spec, &draw, &grid)?,
                Some(dephasing_phase_waveform(spec, &draw, &grid)?),
            ),
            Quadrature::Amplitude => (amplitude_waveform(spec, &draw, &grid)?, None),
        };
        Ok(Self {
            spec: spec.clone(),
            index,
            draw,
            grid,
            beta,
            phi_n,
        })
    }

    /// CSV with a `# spec <hash>` header line and columns `t,beta[,phi_n]`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# spec {} realization {}",
            self.spec.hash(),
            self.index
        )?;
        match &self.phi_n {
            Some(phi) => {
                writeln!(out, "t,beta,phi_n")?;
                for (k, (b, p)) in self.beta.iter().zip(phi).enumerate() {
                    writeln!(out, "{:e},{:e},{:e}", self.grid.time(k), b, p)?;
                }
            }
            None => {
                writeln!(out, "t,beta")?;
                for (k, b) in self.beta.iter().enumerate() {
                    writeln!(out, "{:e},{:e}", self.grid.time(k), b)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn white(q: Quadrature, alpha: f64, teeth: usize) -> NoiseSpec {
        NoiseSpec::power_law(q, alpha, 1.0, teeth, 0.0, 7).unwrap()
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(NoiseSpec::power_law(Quadrature::Dephasing, 1.0, 1.0, 0, 0.0, 0).is_err());
        assert!(NoiseSpec::power_law(Quadrature::Dephasing, 1.0, 0.0, 3, 0.0, 0).is_err());
        assert!(NoiseSpec::power_law(Quadrature::Dephasing, -0.1, 1.0, 3, 0.0, 0).is_err());
        assert!(
            NoiseSpec::tabulated(Quadrature::Amplitude, 1.0, 1.0, vec![1.0, f64::INFINITY], 0)
                .is_err()
        );
        assert!(NoiseSpec::tabulated(Quadrature::Amplitude, 1.0, 1.0, vec![], 0).is_err());
    }

    #[test]
    fn envelope_examples() {
        let f = envelope_values(&white(Quadrature::Dephasing, 1.0, 3)).unwrap();
        assert_eq!(f, vec![1.0, 0.5, 1.0 / 3.0]);
        let f = envelope_values(&white(Quadrature::Amplitude, 1.0, 3)).unwrap();
        assert_eq!(f, vec![1.0, 1.0, 1.0]);
        let s = NoiseSpec::power_law(Quadrature::Dephasing, 1.0, 1.0, 4, -2.0, 0).unwrap();
        assert_eq!(envelope_values(&s).unwrap()[3], 0.0625);
    }

    #[test]
    fn explicit_envelope_is_rejected_by_power_law_accessor() {
        let s = NoiseSpec::tabulated(Quadrature::Amplitude, 1.0, 1.0, vec![0.3, 0.2], 0).unwrap();
        assert!(envelope_values(&s).is_err());
        assert_eq!(s.envelope_table(), vec![0.3, 0.2]);
        assert_eq!(s.teeth(), 2);
    }

    #[test]
    fn cutoff_is_derived() {
        let s = NoiseSpec::power_law(Quadrature::Dephasing, 1.0, 2.5, 4, 0.0, 0).unwrap();
        assert_eq!(s.cutoff(), 10.0);
    }

    #[test]
    fn phase_draws_are_deterministic_and_separated() {
        let s = white(Quadrature::Dephasing, 1.0, 16);
        assert_eq!(draw_phases(&s, 0), draw_phases(&s, 0));
        assert_ne!(draw_phases(&s, 0), draw_phases(&s, 1));
        assert!(draw_phases(&s, 3)
            .angles()
            .iter()
            .all(|p| (0.0..TAU).contains(p)));
    }

    #[test]
    fn zero_alpha_gives_zero_waveforms() {
        let grid = TimeGrid::new(0.0, 0.01, 50).unwrap();
        let d = white(Quadrature::Dephasing, 0.0, 5);
        let draw = draw_phases(&d, 0);
        assert!(dephasing_phase_waveform(&d, &draw, &grid)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        assert!(detuning_waveform(&d, &draw, &grid)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        let a = white(Quadrature::Amplitude, 0.0, 5);
        assert!(amplitude_waveform(&a, &draw, &grid)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        assert!(analytic_psd(&a).teeth.iter().all(|t| t.weight == 0.0));
    }

    #[test]
    fn single_tooth_peaks() {
        let omega0 = 3.0;
        let alpha = 0.7;
        let s = NoiseSpec::power_law(Quadrature::Dephasing, alpha, omega0, 1, 0.0, 0).unwrap();
        let draw = PhaseDraw::zeros(1);
        let t_peak = PI / (2.0 * omega0);
        let grid = TimeGrid::new(t_peak, 0.01, 1).unwrap();
        let phi = dephasing_phase_waveform(&s, &draw, &grid).unwrap();
        assert!((phi[0] - alpha).abs() < 1e-15);
        let grid0 = TimeGrid::new(0.0, 0.01, 1).unwrap();
        let beta = detuning_waveform(&s, &draw, &grid0).unwrap();
        assert!((beta[0] - alpha * omega0).abs() < 1e-15);
        let a = NoiseSpec::tabulated(Quadrature::Amplitude, alpha, omega0, vec![0.4], 0).unwrap();
        let b = amplitude_waveform(&a, &draw, &grid0).unwrap();
        assert!((b[0] - alpha * 0.4).abs() < 1e-15);
    }

    #[test]
    fn two_term_phase_sum() {
        let s = white(Quadrature::Dephasing, 0.1, 2);
        let grid = TimeGrid::new(1.0, 0.1, 1).unwrap();
        let phi = dephasing_phase_waveform(&s, &PhaseDraw::zeros(2), &grid).unwrap();
        let expected = 0.1 * (1.0f64.sin() + 0.5 * 2.0f64.sin());
        assert!((phi[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn nyquist_violation_is_rejected() {
        let s = white(Quadrature::Dephasing, 1.0, 10);
        let grid = TimeGrid::new(0.0, PI / 10.0 * 1.01, 8).unwrap();
        let draw = draw_phases(&s, 0);
        assert!(matches!(
            dephasing_phase_waveform(&s, &draw, &grid),
            Err(Error::Nyquist { .. })
        ));
        assert!(matches!(
            detuning_waveform(&s, &draw, &grid),
            Err(Error::Nyquist { .. })
        ));
    }

    #[test]
    fn wrong_quadrature_is_rejected() {
        let s = white(Quadrature::Amplitude, 1.0, 4);
        let grid = TimeGrid::new(0.0, 0.1, 4).unwrap();
        assert!(dephasing_phase_waveform(&s, &draw_phases(&s, 0), &grid).is_err());
    }

    #[test]
    fn recurrence_matches_closed_form_over_long_grids() {
        let s = NoiseSpec::power_law(Quadrature::Dephasing, 0.3, 2.0, 40, -1.0, 11).unwrap();
        let draw = draw_phases(&s, 5);
        let grid = TimeGrid::new(0.37, 1e-3, 5000).unwrap();
        let fast = dephasing_phase_waveform(&s, &draw, &grid).unwrap();
        let sum = phase_sum(&s, &draw);
        for (k, v) in fast.iter().enumerate().step_by(97) {
            assert!((v - sum.sin_at(grid.time(k))).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_weights_for_white_combs() {
        let d = NoiseSpec::power_law(Quadrature::Dephasing, 0.5, 2.0, 6, 0.0, 0).unwrap();
        for t in analytic_psd(&d).teeth {
            assert!((t.weight - PI * 0.25 * 4.0 / 2.0).abs() < 1e-12);
        }
        let a = NoiseSpec::power_law(Quadrature::Amplitude, 0.5, 2.0, 6, 0.0, 0).unwrap();
        for t in analytic_psd(&a).teeth {
            assert!((t.weight - PI * 0.25 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn autocorrelation_closed_form_and_periodicity() {
        let s = NoiseSpec::power_law(Quadrature::Dephasing, 0.4, 3.0, 9, -1.0, 0).unwrap();
        let f = s.envelope_table();
        let c0: f64 = f
            .iter()
            .enumerate()
            .map(|(i, f)| ((i + 1) as f64 * f).powi(2))
            .sum::<f64>()
            * 0.16
            * 9.0
            / 2.0;
        assert!((analytic_autocorrelation(&s, 0.0) - c0).abs() < 1e-12 * c0);
        let period = s.period();
        assert!((analytic_autocorrelation(&s, period) - c0).abs() < 1e-10 * c0);
        // Parseval with the 1/2π Wiener–Khintchine convention.
        assert!((analytic_psd(&s).variance() - c0).abs() < 1e-12 * c0);
    }

    #[test]
    fn field_inversion_flag() {
        let a = white(Quadrature::Amplitude, 0.01, 100);
        assert!(a.may_invert_field());
        let a = white(Quadrature::Amplitude, 0.001, 100);
        assert!(!a.may_invert_field());
    }

    #[test]
    fn csv_has_hash_header_and_columns() {
        let s = white(Quadrature::Dephasing, 0.2, 3);
        let r = NoiseRealization::generate(&s, 0, TimeGrid::periodic(1.0, 1, 16).unwrap()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with(&format!("# spec {}", s.hash())));
        assert_eq!(lines.next().unwrap(), "t,beta,phi_n");
        assert_eq!(lines.count(), 16);
    }
}
