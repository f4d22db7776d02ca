//! Analytic coherence predictions for free-induction (Ramsey) decay.
//!
//! For a dephasing comb the ensemble fringe visibility is `exp(−χ(τ))`
//! with
//!
//! ```text
//! χ(τ) = (2/π) Σ_j w_j sin²(ω_j τ/2)/ω_j²  =  α² Σ_j F(j)² sin²(j ω₀ τ/2)
//! ```
//!
//! where `w_j` are the positive-frequency tooth weights of the two-sided
//! PSD of β_z. This is the variance of half the accumulated phase
//! difference, so it is exactly what a Gaussian phase average produces.
//! A white comb (`j F(j)` constant) with many teeth grows linearly as
//! `(π ω₀/4) α² τ` until `ω₀ τ` becomes appreciable, where the sum
//! `Σ sin²(jx/2)/j² = πx/4 − x²/8` bends it over.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::noise_synth::{analytic_psd, NoiseSpec, PsdComb, Quadrature};
use crate::stats::fit_line;

fn require_dephasing(spec: &NoiseSpec) -> Result<()> {
    if spec.quadrature() != Quadrature::Dephasing {
        return Err(Error::invalid(
            "spec",
            "coherence integrals need a dephasing spec",
        ));
    }
    Ok(())
}

/// Exact comb sum `α² Σ F(j)² sin²(j ω₀ τ/2)`. Independent of any phase
/// draw: it is an ensemble statement.
pub fn chi_fid_comb(spec: &NoiseSpec, tau: f64) -> Result<f64> {
    require_dephasing(spec)?;
    Ok(chi_sum(
        &spec.envelope_table(),
        spec.alpha(),
        spec.omega0(),
        tau,
    ))
}

fn chi_sum(table: &[f64], alpha: f64, omega0: f64, tau: f64) -> f64 {
    let half = 0.5 * omega0 * tau;
    alpha
        * alpha
        * table
            .iter()
            .enumerate()
            .map(|(i, f)| f * f * ((i + 1) as f64 * half).sin().powi(2))
            .sum::<f64>()
}

/// `χ = α²τ/2`, the continuum white-noise result with unit spectral
/// density normalization.
pub fn chi_white_analytic(alpha: f64, tau: f64) -> f64 {
    0.5 * alpha * alpha * tau
}

/// Linear slope dχ/dτ of a white, infinitely wide comb: `π ω₀ α²/4`.
pub fn white_comb_slope(alpha: f64, omega0: f64) -> f64 {
    0.25 * PI * omega0 * alpha * alpha
}

/// Closed form of the white comb sum with `J → ∞`,
/// `α² (πx/4 − x²/8)` with `x = ω₀τ` reduced to `[0, 2π]`.
pub fn chi_white_comb_limit(alpha: f64, omega0: f64, tau: f64) -> f64 {
    let x = (omega0 * tau.abs()).rem_euclid(2.0 * PI);
    alpha * alpha * (0.25 * PI * x - x * x / 8.0)
}

/// Small-angle form `α² (ω₀τ/2)² Σ j² F(j)²`, valid while `J ω₀ τ ≪ 1`.
pub fn chi_quadratic_limit(spec: &NoiseSpec, tau: f64) -> Result<f64> {
    require_dephasing(spec)?;
    if spec.cutoff() * tau > 0.5 {
        log::warn!(
            "J·ω₀·τ = {:.3} > 0.5: the quadratic small-angle form is not valid here",
            spec.cutoff() * tau
        );
    }
    let s: f64 = spec
        .envelope_table()
        .iter()
        .enumerate()
        .map(|(i, f)| ((i + 1) as f64 * f).powi(2))
        .sum();
    let a = spec.alpha();
    Ok(a * a * (0.5 * spec.omega0() * tau).powi(2) * s)
}

/// First-order averaged fidelity `½(1 + e^{−χ})`.
pub fn fidelity_from_chi(chi: f64) -> Result<f64> {
    if !(chi >= 0.0) {
        return Err(Error::invalid(
            "chi",
            format!("must be non-negative, got {chi}"),
        ));
    }
    Ok(0.5 * (1.0 + (-chi).exp()))
}

/// Free-induction filter `sin²(ωτ/2)/ω²`.
pub fn fid_filter(tau: f64) -> impl Fn(f64) -> f64 {
    move |w: f64| {
        if w == 0.0 {
            0.25 * tau * tau
        } else {
            (0.5 * w * tau).sin().powi(2) / (w * w)
        }
    }
}

/// `(2/π) ∫₀^∞ S(ω) G(ω) dω` against the δ teeth of `psd`, for any
/// caller-supplied filter `G`.
pub fn chi_from_comb(psd: &PsdComb, filter: impl Fn(f64) -> f64) -> f64 {
    2.0 / PI
        * psd
            .teeth
            .iter()
            .map(|t| t.weight * filter(t.omega))
            .sum::<f64>()
}

/// Convenience: [`chi_from_comb`] with the free-induction filter.
pub fn chi_from_spec_psd(spec: &NoiseSpec, tau: f64) -> Result<f64> {
    require_dephasing(spec)?;
    Ok(chi_from_comb(&analytic_psd(spec), fid_filter(tau)))
}

/// τ at which χ first reaches 1, by a scan over one base period followed by
/// bisection to `|χ − 1| < 1e-9`. χ is periodic in τ, so if it never
/// reaches 1 within a period it never does.
pub fn predicted_t2(spec: &NoiseSpec) -> Result<f64> {
    require_dephasing(spec)?;
    let table = spec.envelope_table();
    let (alpha, omega0) = (spec.alpha(), spec.omega0());
    let chi = |t: f64| chi_sum(&table, alpha, omega0, t);
    let period = spec.period();
    let n = (8 * spec.teeth()).max(4096);
    let h = period / n as f64;
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=n {
        let t = k as f64 * h;
        if chi(t) >= 1.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or(Error::OutOfRange { lo: h, hi: period })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = chi(mid);
        if (c - 1.0).abs() < 1e-9 {
            return Ok(mid);
        }
        if c >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Linear,
    Quadratic,
    Mixed,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Linear => "linear",
            Regime::Quadratic => "quadratic",
            Regime::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCurve {
    pub taus: Vec<f64>,
    pub chi: Vec<f64>,
    pub regime: Regime,
    /// Fitted d ln χ / d ln τ over the positive points.
    pub log_slope: Option<f64>,
}

impl CoherenceCurve {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# regime {}", self.regime.as_str())?;
        writeln!(out, "tau,chi,fidelity")?;
        for (t, c) in self.taus.iter().zip(&self.chi) {
            writeln!(out, "{t:e},{c:e},{:e}", fidelity_from_chi(*c)?)?;
        }
        Ok(())
    }
}

/// χ on a τ grid, annotated linear / quadratic when the log-log slope is
/// within 0.1 of 1 or 2.
pub fn coherence_curve(spec: &NoiseSpec, taus: &[f64]) -> Result<CoherenceCurve> {
    require_dephasing(spec)?;
    let chi: Vec<f64> = taus
        .iter()
        .map(|t| chi_fid_comb(spec, *t))
        .collect::<Result<_>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = taus
        .iter()
        .zip(&chi)
        .filter(|(t, c)| **t > 0.0 && **c > 0.0)
        .map(|(t, c)| (t.ln(), c.ln()))
        .unzip();
    let log_slope = fit_line(&x, &y, None).map(|f| f.slope);
    let regime = match log_slope {
        Some(s) if (s - 1.0).abs() <= 0.1 => Regime::Linear,
        Some(s) if (s - 2.0).abs() <= 0.1 => Regime::Quadratic,
        _ => Regime::Mixed,
    };
    Ok(CoherenceCurve {
        taus: taus.to_vec(),
        chi,
        regime,
        log_slope,
    })
}

/// Where a white comb's χ tracks the linear law `(π ω₀/4) α² τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearWindow {
    /// First τ at which `|χ/(κτ) − 1| ≤ tolerance`.
    pub onset: f64,
    /// First later τ at which the tolerance is exceeded again, if any
    /// within the scanned range.
    pub departure: Option<f64>,
}

/// Scans `points` log-spaced τ values from `1/(J ω₀)` to `tau_max`. The
/// comb must be white (`j F(j)` constant).
pub fn linear_window(
    spec: &NoiseSpec,
    tolerance: f64,
    tau_max: f64,
    points: usize,
) -> Result<LinearWindow> {
    require_dephasing(spec)?;
    let table = spec.envelope_table();
    let jf0 = table[0];
    if table
        .iter()
        .enumerate()
        .any(|(i, f)| ((i + 1) as f64 * f - jf0).abs() > 1e-12 * jf0.abs())
    {
        return Err(Error::invalid(
            "envelope",
            "linear window is defined for white combs only",
        ));
    }
    let kappa = white_comb_slope(spec.alpha() * jf0, spec.omega0());
    let t_min = 1.0 / spec.cutoff();
    if !(tau_max > t_min && points >= 2 && kappa > 0.0) {
        return Err(Error::invalid(
            "tau_max",
            "scan range is empty or the comb has no strength",
        ));
    }
    let ratio = (tau_max / t_min).ln();
    let mut onset = None;
    for k in 0..points {
        let t = t_min * (ratio * k as f64 / (points - 1) as f64).exp();
        let dev = (chi_sum(&table, spec.alpha(), spec.omega0(), t) / (kappa * t) - 1.0).abs();
        match onset {
            None if dev <= tolerance => onset = Some(t),
            Some(o) if dev > tolerance => {
                return Ok(LinearWindow {
                    onset: o,
                    departure: Some(t),
                })
            }
            _ => {}
        }
    }
    onset
        .map(|o| LinearWindow {
            onset: o,
            departure: None,
        })
        .ok_or(Error::OutOfRange {
            lo: t_min,
            hi: tau_max,
        })
}
