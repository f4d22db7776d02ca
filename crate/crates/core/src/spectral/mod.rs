//! Empirical power spectra and carrier sideband models.
//!
//! Densities are two-sided over angular frequency with the convention
//! `variance = (1/2π) ∫ S(ω) dω`. A record of `N` samples at spacing `dt`
//! gives `S_k = (dt/N)|X_k|²` at `ω_k = k·Δω`, `Δω = 2π/(N dt)`. A comb
//! tooth `w·δ(ω − ω_j)` lands entirely in one bin when the record spans a
//! whole number of base periods, where it reads `S_k·Δω = w`.
//!
//! Since `S dω/2π = S df`, the same numbers are also two-sided densities
//! per Hz; the one-sided density per Hz is `2S`.

mod bessel;

pub use bessel::{bessel_j, bessel_j_all, bessel_j_series};

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise_synth::{NoiseRealization, NoiseSpec, Quadrature};
use crate::stats::{fit_line, pairwise_sum, LineFit};

#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    /// Bin frequencies `k·Δω`, `k = 0..=N/2`, in rad/s.
    pub omega: Vec<f64>,
    /// Two-sided density at each bin.
    pub density: Vec<f64>,
    /// Bin spacing Δω in rad/s.
    pub resolution: f64,
    pub realizations: usize,
    /// Record length N in samples.
    pub samples: usize,
}

impl PsdEstimate {
    /// `Σ_k S_k Δω / 2π` over all `N` bins (negative frequencies by
    /// symmetry), which equals the mean square of the records.
    pub fn total_power(&self) -> f64 {
        let n = self.samples;
        let terms: Vec<f64> = self
            .density
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let mult = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                    1.0
                } else {
                    2.0
                };
                mult * s
            })
            .collect();
        pairwise_sum(&terms) * self.resolution / TAU
    }

    /// Integrated power in bin `k`, `S_k·Δω`, directly comparable to an
    /// analytic tooth weight.
    pub fn bin_weight(&self, k: usize) -> f64 {
        self.density[k] * self.resolution
    }

    /// Bin index of frequency `omega`, if it falls on the grid.
    pub fn bin_of(&self, omega: f64) -> Option<usize> {
        let k = omega / self.resolution;
        let r = k.round();
        ((k - r).abs() < 1e-6 && r >= 0.0 && (r as usize) < self.density.len())
            .then_some(r as usize)
    }

    /// Estimated weight of every analytic tooth of `spec`.
    pub fn tooth_weights(&self, spec: &NoiseSpec) -> Result<Vec<(f64, f64)>> {
        spec.tooth_frequencies()
            .into_iter()
            .map(|w| {
                self.bin_of(w)
                    .map(|k| (w, self.bin_weight(k)))
                    .ok_or_else(|| {
                        Error::invalid("record", format!("tooth at {w} rad/s is not on a bin"))
                    })
            })
            .collect()
    }

    /// Adds a constant density, e.g. an instrument floor for plots.
    pub fn with_floor(mut self, floor: f64) -> Self {
        for s in &mut self.density {
            *s += floor;
        }
        self
    }

    /// Writes `omega,density` rows, plus a `dbc` column (one-sided, per Hz)
    /// when a carrier power is given.
    pub fn write_csv<W: Write>(&self, mut out: W, carrier_power: Option<f64>) -> Result<()> {
        match carrier_power {
            Some(c) => {
                let one_sided: Vec<f64> = self.density.iter().map(|s| 2.0 * s).collect();
                let db = to_dbc(&one_sided, c, DEFAULT_FLOOR_DB)?;
                writeln!(out, "omega,density,dbc")?;
                for ((w, s), d) in self.omega.iter().zip(&self.density).zip(&db.values) {
                    writeln!(out, "{w:e},{s:e},{d:.6}")?;
                }
            }
            None => {
                writeln!(out, "omega,density")?;
                for (w, s) in self.omega.iter().zip(&self.density) {
                    writeln!(out, "{w:e},{s:e}")?;
                }
            }
        }
        Ok(())
    }
}

fn periodogram(x: &[f64], dt: f64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = x.len();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fft.process(&mut buf);
    buf[..=n / 2]
        .iter()
        .map(|z| z.norm_sqr() * dt / n as f64)
        .collect()
}

/// Averaged periodogram of equal-length records on `grid`. The grid must
/// span a whole number of base periods `2π/omega0`, so rectangular windows
/// are leakage-free for comb signals. Averaging is order independent.
pub fn estimate_psd(records: &[&[f64]], grid: &TimeGrid, omega0: f64) -> Result<PsdEstimate> {
    if records.is_empty() {
        return Err(Error::invalid("records", "need at least one record"));
    }
    let n = grid.len();
    if let Some(bad) = records.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch {
            what: "record vs grid",
            left: bad.len(),
            right: n,
        });
    }
    if grid.span() * omega0 < TAU * (1.0 - 1e-9) {
        return Err(Error::invalid("record", "shorter than one base period"));
    }
    if grid.whole_periods(omega0).is_none() {
        return Err(Error::invalid(
            "record",
            "length is not a whole number of base periods",
        ));
    }
    let dt = grid.dt();
    let spectra: Vec<Vec<f64>> = records
        .par_iter()
        .map_init(FftPlanner::new, |planner, r| periodogram(r, dt, planner))
        .collect();
    let bins = n / 2 + 1;
    let m = spectra.len() as f64;
    let density = (0..bins)
        .map(|k| {
            let col: Vec<f64> = spectra.iter().map(|s| s[k]).collect();
            pairwise_sum(&col) / m
        })
        .collect();
    let resolution = TAU / grid.span();
    Ok(PsdEstimate {
        omega: (0..bins).map(|k| k as f64 * resolution).collect(),
        density,
        resolution,
        realizations: records.len(),
        samples: n,
    })
}

/// [`estimate_psd`] over the β series of a set of realizations, which must
/// share one spec and grid.
pub fn estimate_psd_realizations(realizations: &[NoiseRealization]) -> Result<PsdEstimate> {
    let first = realizations
        .first()
        .ok_or_else(|| Error::invalid("realizations", "need at least one realization"))?;
    if realizations.iter().any(|r| r.grid != first.grid) {
        return Err(Error::invalid(
            "grid",
            "realizations must share one uniform grid",
        ));
    }
    let records: Vec<&[f64]> = realizations.iter().map(|r| r.beta.as_slice()).collect();
    estimate_psd(&records, &first.grid, first.spec.omega0())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sideband {
    /// Offset from the carrier in rad/s.
    pub offset: f64,
    /// Amplitude relative to the same units as the carrier amplitude.
    pub amplitude: f64,
}

/// Carrier plus sidebands of a modulated tone, written as
/// `carrier·cos(ω_μ t) + Σ amplitude·cos((ω_μ + offset) t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandComb {
    pub carrier: f64,
    pub sidebands: Vec<Sideband>,
    pub order: usize,
}

impl SidebandComb {
    pub fn total_power(&self) -> f64 {
        self.carrier * self.carrier
            + self
                .sidebands
                .iter()
                .map(|s| s.amplitude * s.amplitude)
                .sum::<f64>()
    }

    pub fn amplitude_at(&self, offset: f64) -> Option<f64> {
        self.sidebands
            .iter()
            .find(|s| (s.offset - offset).abs() <= 1e-12 * offset.abs().max(1.0))
            .map(|s| s.amplitude)
    }

    /// Time-domain synthesis on `grid` around a carrier at `omega_carrier`.
    pub fn synthesize(&self, omega_carrier: f64, grid: &TimeGrid) -> Vec<f64> {
        grid.times()
            .map(|t| {
                self.carrier * (omega_carrier * t).cos()
                    + self
                        .sidebands
                        .iter()
                        .map(|s| s.amplitude * ((omega_carrier + s.offset) * t).cos())
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Amplitude modulation `A_μ cos(ω_μ t) + A_m sin(ω_m t) sin(ω_μ t)`.
/// The product splits into `+A_m/2` at `−ω_m` and `−A_m/2` at `+ω_m`; the
/// magnitudes are equal and the signs record the sine convention.
pub fn am_sidebands(carrier_amp: f64, mod_amp: f64, omega_m: f64) -> Result<SidebandComb> {
    if !(carrier_amp > 0.0) {
        return Err(Error::invalid("carrier_amp", "must be positive"));
    }
    let sidebands = if mod_amp == 0.0 {
        Vec::new()
    } else {
        vec![
            Sideband {
                offset: -omega_m,
                amplitude: mod_amp / 2.0,
            },
            Sideband {
                offset: omega_m,
                amplitude: -mod_amp / 2.0,
            },
        ]
    };
    Ok(SidebandComb {
        carrier: carrier_amp,
        sidebands,
        order: 1,
    })
}

/// Phase modulation `A_μ cos(ω_μ t + Φ_m sin ω_m t)`
/// `= A_μ Σ_n J_n(Φ_m) cos((ω_μ + nω_m) t)`, truncated at `|n| ≤ n_max`.
/// Terms that vanish exactly are dropped.
pub fn pm_sidebands(
    carrier_amp: f64,
    depth: f64,
    omega_m: f64,
    n_max: usize,
) -> Result<SidebandComb> {
    if n_max < 1 {
        return Err(Error::invalid(
            "n_max",
            "truncation order must be at least 1",
        ));
    }
    let j = bessel_j_all(n_max, depth);
    let mut sidebands = Vec::with_capacity(2 * n_max);
    for n in (1..=n_max).rev() {
        let neg = if n % 2 == 1 { -j[n] } else { j[n] };
        if neg != 0.0 {
            sidebands.push(Sideband {
                offset: -(n as f64) * omega_m,
                amplitude: carrier_amp * neg,
            });
        }
    }
    for (n, v) in j.iter().enumerate().skip(1) {
        if *v != 0.0 {
            sidebands.push(Sideband {
                offset: n as f64 * omega_m,
                amplitude: carrier_amp * v,
            });
        }
    }
    Ok(SidebandComb {
        carrier: carrier_amp * j[0],
        sidebands,
        order: n_max,
    })
}

/// Exponent of the carrier phase-noise spectrum seen for a comb with
/// exponent `p`: phase modulation maps `p` to `p − 2`, amplitude
/// modulation leaves it unchanged.
pub fn powerlaw_map_pm(quadrature: Quadrature, p: f64) -> f64 {
    match quadrature {
        Quadrature::Dephasing => p - 2.0,
        Quadrature::Amplitude => p,
    }
}

/// Upper sideband power of each comb tooth imposed on a unit carrier, one
/// tooth at a time: phase modulation with depth `αF(j)` for dephasing
/// combs, amplitude modulation with depth `αF(j)` otherwise.
pub fn comb_sideband_powers(spec: &NoiseSpec, n_max: usize) -> Result<Vec<(f64, f64)>> {
    spec.envelope_table()
        .iter()
        .zip(spec.tooth_frequencies())
        .map(|(f, w)| {
            let depth = spec.alpha() * f;
            let comb = match spec.quadrature() {
                Quadrature::Dephasing => pm_sidebands(1.0, depth, w, n_max)?,
                Quadrature::Amplitude => am_sidebands(1.0, depth, w)?,
            };
            let a = comb.amplitude_at(w).unwrap_or(0.0);
            Ok((w, a * a))
        })
        .collect()
}

/// Log-log slope of `(frequency, power)` pairs.
pub fn powerlaw_slope(points: &[(f64, f64)]) -> Option<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(w, p)| *w > 0.0 && *p > 0.0)
        .map(|(w, p)| (w.ln(), p.ln()))
        .unzip();
    fit_line(&x, &y, None)
}

/// Level assigned to non-positive densities.
pub const DEFAULT_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DbcSeries {
    pub values: Vec<f64>,
    /// Indices whose density was zero or negative and were set to the floor.
    pub floored: Vec<usize>,
    pub floor_db: f64,
}

/// `10·log10(density / carrier_power)`.
pub fn to_dbc(density: &[f64], carrier_power: f64, floor_db: f64) -> Result<DbcSeries> {
    if !(carrier_power > 0.0 && carrier_power.is_finite()) {
        return Err(Error::invalid("carrier_power", "must be positive"));
    }
    let mut floored = Vec::new();
    let values = density
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if *s > 0.0 {
                10.0 * (s / carrier_power).log10()
            } else {
                floored.push(k);
                floor_db
            }
        })
        .collect();
    Ok(DbcSeries {
        values,
        floored,
        floor_db,
    })
}

/// Inverse of [`to_dbc`]; floored entries come back as zero.
pub fn from_dbc(series: &DbcSeries, carrier_power: f64) -> Vec<f64> {
    series
        .values
        .iter()
        .enumerate()
        .map(|(k, d)| {
            if series.floored.binary_search(&k).is_ok() {
                0.0
            } else {
                carrier_power * 10f64.powf(d / 10.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_records_give_zero_density() {
        let grid = TimeGrid::periodic(1.0, 1, 64).unwrap();
        let zeros = vec![0.0; 64];
        let est = estimate_psd(&[&zeros], &grid, 1.0).unwrap();
        assert!(est.density.iter().all(|s| *s == 0.0));
        assert_eq!(est.realizations, 1);
    }

    #[test]
    fn records_must_be_period_locked() {
        let grid = TimeGrid::new(0.0, 0.1, 70).unwrap();
        let x = vec![1.0; 70];
        assert!(estimate_psd(&[&x], &grid, 1.0).is_err());
        let short = TimeGrid::new(0.0, 0.01, 10).unwrap();
        assert!(estimate_psd(&[&x[..10]], &short, 1.0).is_err());
        let grid = TimeGrid::periodic(1.0, 1, 70).unwrap();
        assert!(estimate_psd(&[&x[..69]], &grid, 1.0).is_err());
    }

    #[test]
    fn single_cosine_lands_in_one_bin() {
        let grid = TimeGrid::periodic(2.0, 3, 32).unwrap();
        let x: Vec<f64> = grid.times().map(|t| 0.7 * (4.0 * t + 0.3).cos()).collect();
        let est = estimate_psd(&[&x], &grid, 2.0).unwrap();
        let k = est.bin_of(4.0).unwrap();
        // two-sided weight π a²/2 on each side
        assert!((est.bin_weight(k) - std::f64::consts::PI * 0.49 / 2.0).abs() < 1e-12);
        assert!((est.total_power() - 0.49 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn am_examples() {
        assert!(am_sidebands(1.0, 0.0, 3.0).unwrap().sidebands.is_empty());
        let c = am_sidebands(1.0, 0.2, 3.0).unwrap();
        assert_eq!(c.sidebands.len(), 2);
        assert!(c
            .sidebands
            .iter()
            .all(|s| (s.amplitude.abs() - 0.1).abs() < 1e-15));
        assert!(am_sidebands(0.0, 0.2, 3.0).is_err());
    }

    #[test]
    fn pm_examples() {
        let c = pm_sidebands(1.0, 0.0, 1.0, 3).unwrap();
        assert_eq!(c.carrier, 1.0);
        assert!(c.sidebands.is_empty());
        let c = pm_sidebands(2.0, 1.3, 1.0, 6).unwrap();
        for n in 1..=6 {
            let up = c.amplitude_at(n as f64).unwrap();
            let down = c.amplitude_at(-(n as f64)).unwrap();
            assert_eq!(up.abs(), down.abs());
        }
        assert!(pm_sidebands(1.0, 0.1, 1.0, 0).is_err());
    }

    #[test]
    fn mapping_examples() {
        assert_eq!(powerlaw_map_pm(Quadrature::Dephasing, 0.0), -2.0);
        assert_eq!(powerlaw_map_pm(Quadrature::Amplitude, -1.0), -1.0);
    }

    #[test]
    fn dbc_examples() {
        let d = to_dbc(&[2.0, 2e-8, 0.0], 2.0, -200.0).unwrap();
        assert!(d.values[0].abs() < 1e-12);
        assert!((d.values[1] + 80.0).abs() < 1e-9);
        assert_eq!(d.values[2], -200.0);
        assert_eq!(d.floored, vec![2]);
        let back = from_dbc(&d, 2.0);
        assert!((back[1] - 2e-8).abs() < 1e-12 * 2e-8);
        assert_eq!(back[2], 0.0);
        assert!(to_dbc(&[1.0], 0.0, -200.0).is_err());
    }
}
