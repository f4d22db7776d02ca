//! Control programs, noise composition and IQ waveforms.
//!
//! A program is a list of contiguous segments with constant control Rabi
//! amplitude Ω_C, phase φ_C and static detuning Δ. Composition adds the
//! engineered noise as `φ = φ_C + φ_N` and either `Ω = Ω_C(1 + β_Ω)`
//! (multiplicative) or `Ω = Ω_C + Ω₀β_Ω` (additive). The result is turned
//! into baseband `I = Ω cos φ`, `Q = Ω sin φ`.

use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise_synth::{NoiseRealization, NoiseSpec, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    duration: f64,
    omega_c: f64,
    phi_c: f64,
    detuning: f64,
}

impl Segment {
    pub fn new(duration: f64, omega_c: f64, phi_c: f64, detuning: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::invalid(
                "duration",
                format!("segment duration must be positive, got {duration}"),
            ));
        }
        if !(omega_c.is_finite() && phi_c.is_finite() && detuning.is_finite()) {
            return Err(Error::invalid(
                "segment",
                "amplitude, phase and detuning must be finite",
            ));
        }
        Ok(Self {
            duration,
            omega_c,
            phi_c,
            detuning,
        })
    }

    /// Resonant rotation by `angle` about the axis at azimuth `phase`.
    pub fn pulse(angle: f64, omega_c: f64, phase: f64) -> Result<Self> {
        if !(omega_c > 0.0) {
            return Err(Error::invalid(
                "omega_c",
                "pulse needs a positive Rabi rate",
            ));
        }
        Self::new(angle / omega_c, omega_c, phase, 0.0)
    }

    pub fn idle(duration: f64) -> Result<Self> {
        Self::new(duration, 0.0, 0.0, 0.0)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn phi_c(&self) -> f64 {
        self.phi_c
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn rotation_angle(&self) -> f64 {
        self.omega_c * self.duration
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlProgram {
    segments: Vec<Segment>,
}

impl ControlProgram {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("program", "needs at least one segment"));
        }
        Ok(Self { segments })
    }

    /// π/2 – idle(τ) – π/2, both pulses about x.
    pub fn ramsey(omega_c: f64, tau: f64) -> Result<Self> {
        let half = Segment::pulse(std::f64::consts::FRAC_PI_2, omega_c, 0.0)?;
        let mut segments = vec![half];
        if tau > 0.0 {
            segments.push(Segment::idle(tau)?);
        }
        segments.push(half);
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn peak_omega(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.omega_c.abs())
            .fold(0.0, f64::max)
    }

    /// Segment active at time `t` (measured from the program start); `None`
    /// before the start or after the end.
    pub fn segment_at(&self, t: f64) -> Option<&Segment> {
        if t < 0.0 {
            return None;
        }
        let mut start = 0.0;
        for s in &self.segments {
            if t < start + s.duration {
                return Some(s);
            }
            start += s.duration;
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeMode {
    Multiplicative,
    Additive,
}

/// Noise to fold into a program. At most one amplitude mode may be set.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoiseInputs<'a> {
    pub dephasing: Option<&'a NoiseRealization>,
    pub multiplicative: Option<&'a NoiseRealization>,
    pub additive: Option<&'a NoiseRealization>,
    /// Ω₀ for additive noise; defaults to the program's peak Ω_C.
    pub additive_scale: Option<f64>,
}

/// Sampled amplitude and phase ready for IQ conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedWaveform {
    pub grid: TimeGrid,
    pub omega: Vec<f64>,
    pub phi: Vec<f64>,
    pub amplitude_mode: Option<AmplitudeMode>,
}

fn check_noise(r: &NoiseRealization, grid: &TimeGrid, quadrature: Quadrature) -> Result<()> {
    if r.spec.quadrature() != quadrature {
        return Err(Error::invalid(
            "noise",
            format!("expected a {} realization", quadrature.as_str()),
        ));
    }
    if r.grid != *grid {
        return Err(Error::LengthMismatch {
            what: "noise grid vs composition grid",
            left: r.grid.len(),
            right: grid.len(),
        });
    }
    Ok(())
}

/// Sample `Ω(t)` and `φ(t)` on `grid`. Times past the end of the program are
/// idle (`Ω_C = 0`); noise is applied everywhere on the grid.
pub fn compose(
    program: &ControlProgram,
    noise: NoiseInputs<'_>,
    grid: &TimeGrid,
) -> Result<ComposedWaveform> {
    if noise.multiplicative.is_some() && noise.additive.is_some() {
        return Err(Error::invalid(
            "amplitude_mode",
            "multiplicative and additive amplitude noise cannot both be applied",
        ));
    }
    let tol = 1e-9 * program.duration();
    if grid.t0() > tol || grid.t0() + grid.span() < program.duration() - tol {
        return Err(Error::invalid(
            "grid",
            "grid does not cover the program duration",
        ));
    }
    if let Some(r) = noise.dephasing {
        check_noise(r, grid, Quadrature::Dephasing)?;
    }
    let (amp, mode) = match (noise.multiplicative, noise.additive) {
        (Some(r), None) => (Some(r), Some(AmplitudeMode::Multiplicative)),
        (None, Some(r)) => (Some(r), Some(AmplitudeMode::Additive)),
        _ => (None, None),
    };
    if let Some(r) = amp {
        check_noise(r, grid, Quadrature::Amplitude)?;
    }
    let scale = noise.additive_scale.unwrap_or_else(|| program.peak_omega());

    let mut omega = Vec::with_capacity(grid.len());
    let mut phi = Vec::with_capacity(grid.len());
    for (k, t) in grid.times().enumerate() {
        let (omega_c, phi_c) = program
            .segment_at(t)
            .map(|s| (s.omega_c, s.phi_c))
            .unwrap_or((0.0, 0.0));
        let w = match (amp, mode) {
            (Some(r), Some(AmplitudeMode::Multiplicative)) => omega_c * (1.0 + r.beta[k]),
            (Some(r), Some(AmplitudeMode::Additive)) => omega_c + scale * r.beta[k],
            _ => omega_c,
        };
        let p = phi_c
            + noise
                .dephasing
                .and_then(|r| r.phi_n.as_ref())
                .map_or(0.0, |phi_n| phi_n[k]);
        omega.push(w);
        phi.push(p);
    }
    Ok(ComposedWaveform {
        grid: *grid,
        omega,
        phi,
        amplitude_mode: mode,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub bits: u32,
    pub i_codes: Vec<i32>,
    pub q_codes: Vec<i32>,
    /// Largest |reconstructed − original| over both channels.
    pub max_error: f64,
    /// Signal-to-quantization-noise ratio; `None` for an all-zero signal.
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IqWaveform {
    pub sample_rate: f64,
    pub i: Vec<f64>,
    pub q: Vec<f64>,
    pub full_scale: Option<f64>,
    pub quantized: Option<Quantized>,
}

impl IqWaveform {
    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn with_full_scale(mut self, full_scale: f64) -> Result<Self> {
        if !(full_scale.is_finite() && full_scale > 0.0) {
            return Err(Error::invalid("full_scale", "must be positive"));
        }
        for (channel, xs) in [("I", &self.i), ("Q", &self.q)] {
            if let Some((index, v)) = xs.iter().enumerate().find(|(_, v)| v.abs() > full_scale) {
                return Err(Error::ExceedsFullScale {
                    channel,
                    index,
                    value: *v,
                    full_scale,
                });
            }
        }
        self.full_scale = Some(full_scale);
        Ok(self)
    }

    /// Writes `t,I,Q` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,I,Q")?;
        for (k, (i, q)) in self.i.iter().zip(&self.q).enumerate() {
            writeln!(out, "{:e},{:e},{:e}", k as f64 / self.sample_rate, i, q)?;
        }
        Ok(())
    }

    /// Interleaved little-endian signed 16-bit `I,Q` codes.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let qz = self.require_16bit()?;
        for (i, q) in qz.i_codes.iter().zip(&qz.q_codes) {
            out.write_all(&(*i as i16).to_le_bytes())?;
            out.write_all(&(*q as i16).to_le_bytes())?;
        }
        Ok(())
    }

    /// Sidecar text header for [`IqWaveform::write_binary`].
    pub fn write_sidecar<W: Write>(&self, spec_hash: &str, mut out: W) -> Result<()> {
        let qz = self.require_16bit()?;
        writeln!(out, "format = \"iq-interleaved-s16le\"")?;
        writeln!(out, "sample_rate = {:?}", self.sample_rate)?;
        writeln!(out, "full_scale = {:?}", self.full_scale.unwrap_or(1.0))?;
        writeln!(out, "bits = {}", qz.bits)?;
        writeln!(out, "samples = {}", self.len())?;
        writeln!(out, "spec = \"{spec_hash}\"")?;
        Ok(())
    }

    fn require_16bit(&self) -> Result<&Quantized> {
        match &self.quantized {
            Some(q) if q.bits <= 16 => Ok(q),
            Some(q) => Err(Error::invalid(
                "bits",
                format!("binary export holds 16-bit codes, waveform has {}", q.bits),
            )),
            None => Err(Error::invalid(
                "quantized",
                "binary export needs a quantized waveform",
            )),
        }
    }
}

/// Polar-to-Cartesian transform `I = Ω cos φ`, `Q = Ω sin φ`.
pub fn to_iq(omega: &[f64], phi: &[f64], sample_rate: f64) -> Result<IqWaveform> {
    if omega.len() != phi.len() {
        return Err(Error::LengthMismatch {
            what: "amplitude vs phase samples",
            left: omega.len(),
            right: phi.len(),
        });
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be positive"));
    }
    let (i, q) = omega
        .iter()
        .zip(phi)
        .map(|(w, p)| {
            let (s, c) = p.sin_cos();
            (w * c, w * s)
        })
        .unzip();
    Ok(IqWaveform {
        sample_rate,
        i,
        q,
        full_scale: None,
        quantized: None,
    })
}

/// Inverse of [`to_iq`]: amplitude `√(I² + Q²)` and phase in `[0, 2π)`.
pub fn to_polar(w: &IqWaveform) -> (Vec<f64>, Vec<f64>) {
    w.i.iter()
        .zip(&w.q)
        .map(|(i, q)| (i.hypot(*q), q.atan2(*i).rem_euclid(TAU)))
        .unzip()
}

/// Symmetric mid-tread quantizer: `code = round(x / FS · 2^(bits−1))`.
/// Codes must fit in `[−2^(bits−1), 2^(bits−1) − 1]`; anything outside is
/// an error, never clipped. The returned waveform carries the
/// reconstructed sample values alongside the codes, so quantizing it again
/// reproduces the same codes.
pub fn quantize(w: &IqWaveform, bits: u32) -> Result<IqWaveform> {
    if !(2..=24).contains(&bits) {
        return Err(Error::invalid(
            "bits",
            format!("supported range is 2..=24, got {bits}"),
        ));
    }
    let fs = w.full_scale.ok_or_else(|| {
        Error::invalid("full_scale", "declare a full-scale value before quantizing")
    })?;
    let levels = (1i64 << (bits - 1)) as f64;
    let (lo, hi) = (-(1i64 << (bits - 1)), (1i64 << (bits - 1)) - 1);

    let encode = |channel: &'static str, xs: &[f64]| -> Result<(Vec<i32>, Vec<f64>)> {
        let mut codes = Vec::with_capacity(xs.len());
        let mut recon = Vec::with_capacity(xs.len());
        for (index, x) in xs.iter().enumerate() {
            let c = (x / fs * levels).round();
            if !(c >= lo as f64 && c <= hi as f64) {
                return Err(Error::ExceedsFullScale {
                    channel,
                    index,
                    value: *x,
                    full_scale: fs,
                });
            }
            codes.push(c as i32);
            recon.push(c / levels * fs);
        }
        Ok((codes, recon))
    };
    let (i_codes, i) = encode("I", &w.i)?;
    let (q_codes, q) = encode("Q", &w.q)?;

    let mut max_error = 0.0f64;
    let mut signal = 0.0;
    let mut noise = 0.0;
    for (orig, rec) in w.i.iter().zip(&i).chain(w.q.iter().zip(&q)) {
        let e = rec - orig;
        max_error = max_error.max(e.abs());
        signal += orig * orig;
        noise += e * e;
    }
    let snr_db = (signal > 0.0).then(|| {
        if noise > 0.0 {
            10.0 * (signal / noise).log10()
        } else {
            f64::INFINITY
        }
    });

    Ok(IqWaveform {
        sample_rate: w.sample_rate,
        i,
        q,
        full_scale: w.full_scale,
        quantized: Some(Quantized {
            bits,
            i_codes,
            q_codes,
            max_error,
            snr_db,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityReport {
    pub max_jump_i: f64,
    pub max_jump_q: f64,
    /// Index `k` of the largest jump, between samples `k` and `k + 1`.
    pub max_jump_index: usize,
    /// |first − last|, the step seen when the waveform is looped.
    pub boundary_jump_i: f64,
    pub boundary_jump_q: f64,
    pub threshold: f64,
    pub flagged: bool,
}

/// Largest inter-sample steps, including the wrap from last to first sample.
pub fn continuity_report(w: &IqWaveform, threshold: f64) -> ContinuityReport {
    let mut max_i = 0.0f64;
    let mut max_q = 0.0f64;
    let mut at = 0;
    let mut best = 0.0;
    for k in 1..w.len() {
        let di = (w.i[k] - w.i[k - 1]).abs();
        let dq = (w.q[k] - w.q[k - 1]).abs();
        max_i = max_i.max(di);
        max_q = max_q.max(dq);
        if di.max(dq) > best {
            best = di.max(dq);
            at = k - 1;
        }
    }
    let (bi, bq) = match (w.i.first(), w.i.last(), w.q.first(), w.q.last()) {
        (Some(i0), Some(i1), Some(q0), Some(q1)) => ((i1 - i0).abs(), (q1 - q0).abs()),
        _ => (0.0, 0.0),
    };
    let flagged = [max_i, max_q, bi, bq].iter().any(|v| *v > threshold);
    ContinuityReport {
        max_jump_i: max_i,
        max_jump_q: max_q,
        max_jump_index: at,
        boundary_jump_i: bi,
        boundary_jump_q: bq,
        threshold,
        flagged,
    }
}

/// Sample rate in Hz at 20× the highest comb tooth.
pub fn default_sample_rate(spec: &NoiseSpec) -> f64 {
    20.0 * spec.cutoff() / TAU
}

/// Smallest grid covering `duration` that spans a whole number of base
/// periods `2π/ω₀`, sampled at roughly `sample_rate` Hz.
pub fn snapped_grid(duration: f64, omega0: f64, sample_rate: f64) -> Result<TimeGrid> {
    if !(duration > 0.0 && sample_rate > 0.0) {
        return Err(Error::invalid(
            "duration",
            "duration and sample rate must be positive",
        ));
    }
    let period = TAU / omega0;
    let periods = ((duration / period) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let per_period = (period * sample_rate).ceil().max(2.0) as usize;
    TimeGrid::periodic(omega0, periods, per_period)
}
