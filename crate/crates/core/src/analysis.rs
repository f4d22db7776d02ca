//! Decay-envelope fits and the α-scaling study.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter_theory::predicted_t2;
use crate::noise_synth::{NoiseSpec, PhasePolicy};
use crate::qubit_sim::{ramsey, ExperimentRecord, RamseyConfig};
use crate::rng::{self, Domain};
use crate::stats::{fit_line, mean};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `A·exp(−t/T)·cos(δt + φ) + c`
    ExponentialFringe,
    /// `A·exp(−(t/T)²)·cos(δt + φ) + c`
    GaussianEnvelope,
}

impl DecayModel {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayModel::ExponentialFringe => "exponential",
            DecayModel::GaussianEnvelope => "gaussian",
        }
    }

    fn envelope(self, t: f64, tc: f64) -> f64 {
        match self {
            DecayModel::ExponentialFringe => (-t / tc).exp(),
            DecayModel::GaussianEnvelope => (-(t / tc).powi(2)).exp(),
        }
    }

    /// d envelope / d ln T.
    fn envelope_dlog(self, t: f64, tc: f64) -> f64 {
        match self {
            DecayModel::ExponentialFringe => (t / tc) * (-t / tc).exp(),
            DecayModel::GaussianEnvelope => 2.0 * (t / tc).powi(2) * (-(t / tc).powi(2)).exp(),
        }
    }
}

/// Parameter order used by [`DecayFit::params`] and the covariance.
pub const PARAM_NAMES: [&str; 5] = ["amplitude", "t_decay", "frequency", "phase", "offset"];

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    /// `[A, T, δ, φ, c]`.
    pub params: [f64; 5],
    pub covariance: [[f64; 5]; 5],
    /// `√Σ w r²` at the optimum.
    pub residual_norm: f64,
    /// Unweighted coefficient of determination on the fit window.
    pub r_squared: f64,
    /// False when the standard errors were unusable and an unweighted
    /// fit was done instead.
    pub weighted: bool,
    pub start: usize,
}

impl DecayFit {
    pub fn amplitude(&self) -> f64 {
        self.params[0]
    }

    /// 1/e time of the envelope.
    pub fn t_decay(&self) -> f64 {
        self.params[1]
    }

    pub fn t_decay_stderr(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }

    pub fn frequency(&self) -> f64 {
        self.params[2]
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let [a, tc, d, p, c] = self.params;
        a * self.model.envelope(t, tc) * (d * t + p).cos() + c
    }
}

struct Problem<'a> {
    t: &'a [f64],
    y: &'a [f64],
    sw: Vec<f64>,
    model: DecayModel,
}

impl Problem<'_> {
    // internal parameters: [A, ln T, δ, φ, c]
    fn value(&self, q: &[f64; 5], t: f64) -> f64 {
        let tc = q[1].exp();
        q[0] * self.model.envelope(t, tc) * (q[2] * t + q[3]).cos() + q[4]
    }

    fn residuals(&self, q: &[f64; 5]) -> DVector<f64> {
        DVector::from_iterator(
            self.t.len(),
            self.t
                .iter()
                .zip(self.y)
                .zip(&self.sw)
                .map(|((t, y), s)| s * (y - self.value(q, *t))),
        )
    }

    fn cost(&self, q: &[f64; 5]) -> f64 {
        self.residuals(q).norm_squared()
    }

    /// Jacobian of the model (not the residual) scaled by √w.
    fn jacobian(&self, q: &[f64; 5]) -> DMatrix<f64> {
        let tc = q[1].exp();
        let mut j = DMatrix::zeros(self.t.len(), 5);
        for (i, (t, s)) in self.t.iter().zip(&self.sw).enumerate() {
            let env = self.model.envelope(*t, tc);
            let (sn, cs) = (q[2] * t + q[3]).sin_cos();
            j[(i, 0)] = s * env * cs;
            j[(i, 1)] = s * q[0] * self.model.envelope_dlog(*t, tc) * cs;
            j[(i, 2)] = -s * q[0] * env * sn * t;
            j[(i, 3)] = -s * q[0] * env * sn;
            j[(i, 4)] = *s;
        }
        j
    }

    fn levenberg_marquardt(&self, mut q: [f64; 5]) -> Option<([f64; 5], f64)> {
        let mut lambda = 1e-3;
        let mut cost = self.cost(&q);
        if !cost.is_finite() {
            return None;
        }
        for _ in 0..500 {
            let j = self.jacobian(&q);
            let r = self.residuals(&q);
            let jtj = j.transpose() * &j;
            let g = j.transpose() * r;
            let mut improved = false;
            while lambda < 1e12 {
                let mut a = jtj.clone();
                for k in 0..5 {
                    a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
                }
                let Some(step) = a.lu().solve(&g) else {
                    lambda *= 10.0;
                    continue;
                };
                let mut trial = q;
                for k in 0..5 {
                    trial[k] += step[k];
                }
                trial[1] = trial[1].clamp(-60.0, 60.0);
                let c = self.cost(&trial);
                if c.is_finite() && c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    q = trial;
                    cost = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    if rel < 1e-13 || step.norm() < 1e-13 {
                        return Some((q, cost));
                    }
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                return Some((q, cost));
            }
        }
        Some((q, cost))
    }
}

/// Frequency with the largest DFT magnitude of `y − mean` over a scan, and
/// the phase of the matching component.
fn dft_peak(t: &[f64], y: &[f64]) -> (f64, f64) {
    let span = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - t.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut dts: Vec<f64> = t
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|d| *d > 0.0)
        .collect();
    dts.sort_by(f64::total_cmp);
    let min_dt = dts.first().copied().unwrap_or(span);
    let nyquist = PI / min_dt;
    let df = TAU / span / 8.0;
    let steps = ((nyquist / df) as usize).clamp(16, 20_000);
    let m = mean(y);
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for k in 0..=steps {
        let w = nyquist * k as f64 / steps as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (ti, yi) in t.iter().zip(y) {
            let (s, c) = (w * ti).sin_cos();
            re += (yi - m) * c;
            im -= (yi - m) * s;
        }
        let mag = re * re + im * im;
        if mag > best.2 {
            best = (w, im.atan2(re), mag);
        }
    }
    (best.0, best.1)
}

/// Weighted damped least squares with 8 deterministic starts.
pub fn fit_decay_data(
    t: &[f64],
    y: &[f64],
    stderr: Option<&[f64]>,
    model: DecayModel,
) -> Result<DecayFit> {
    let n = t.len();
    if n < 8 {
        return Err(Error::invalid(
            "points",
            format!("need at least 8 points, got {n}"),
        ));
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            what: "sweep vs values",
            left: n,
            right: y.len(),
        });
    }
    let weighted =
        stderr.is_some_and(|s| s.len() == n && s.iter().all(|e| *e > 0.0 && e.is_finite()));
    if let (Some(s), false) = (stderr, weighted) {
        // Exact points (zero spread, e.g. a Rabi sweep at t = 0) are routine.
        if s.len() == n && s.iter().all(|e| *e >= 0.0 && e.is_finite()) {
            log::info!("some standard errors are zero; using an unweighted fit");
        } else {
            log::warn!("standard errors are missing or invalid; using an unweighted fit");
        }
    }
    let sw: Vec<f64> = match (weighted, stderr) {
        (true, Some(s)) => s.iter().map(|e| 1.0 / e).collect(),
        _ => vec![1.0; n],
    };

    let c0 = mean(y);
    let amp0 = y.iter().map(|v| (v - c0).abs()).fold(0.0, f64::max);
    if !(amp0 > 1e-12) {
        return Err(Error::Degenerate(
            "constant signal: amplitude and decay time are unidentifiable".into(),
        ));
    }
    let (w0, phi0) = dft_peak(t, y);
    // Area under |y − c| approximates A·T (exponential) or A·T·√π/2
    // (Gaussian), with the oscillation averaging |cos| to 2/π.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|a, b| t[*a].total_cmp(&t[*b]));
    let area: f64 = idx
        .windows(2)
        .map(|w| 0.5 * ((y[w[0]] - c0).abs() + (y[w[1]] - c0).abs()) * (t[w[1]] - t[w[0]]))
        .sum();
    let osc = if w0 > 0.0 { 2.0 / PI } else { 1.0 };
    let span = t[idx[n - 1]] - t[idx[0]];
    let mut t0 = area / (amp0 * osc);
    if model == DecayModel::GaussianEnvelope {
        t0 /= PI.sqrt() / 2.0;
    }
    let t0 = t0.clamp(span / 50.0, span * 20.0);

    let problem = Problem { t, y, sw, model };
    let mut jitter = rng::stream(0, Domain::FitJitter, 0);
    let mut best: Option<([f64; 5], f64, usize)> = None;
    for start in 0..8 {
        let (tj, pj) = if start == 0 {
            (t0, phi0)
        } else {
            let z: f64 = StandardNormal.sample(&mut jitter);
            (t0 * (0.5 * z).exp(), phi0 + jitter.random_range(-PI..PI))
        };
        let q0 = [amp0, tj.ln(), w0, pj, c0];
        if let Some((q, c)) = problem.levenberg_marquardt(q0) {
            if best.as_ref().is_none_or(|b| c < b.1) {
                best = Some((q, c, start));
            }
        }
    }
    let (mut q, cost, start) = best.ok_or(Error::NoConvergence {
        starts: 8,
        best_residual: f64::NAN,
    })?;
    if q[0] < 0.0 {
        q[0] = -q[0];
        q[3] += PI;
    }
    if q[2] < 0.0 {
        q[2] = -q[2];
        q[3] = -q[3];
    }
    q[3] = q[3].rem_euclid(TAU);
    let tc = q[1].exp();
    if !(tc.is_finite() && tc > 0.0 && q[0] <= 1.05) {
        return Err(Error::NoConvergence {
            starts: 8,
            best_residual: cost.sqrt(),
        });
    }

    // Covariance in natural parameters: J_nat = J_int · diag(1, 1/T, 1, 1, 1).
    let jac = problem.jacobian(&q);
    let jtj = jac.transpose() * jac;
    let dof = n.saturating_sub(5).max(1) as f64;
    let s2 = cost / dof;
    let inv = jtj
        .clone()
        .try_inverse()
        .or_else(|| jtj.pseudo_inverse(1e-14).ok())
        .unwrap_or_else(|| DMatrix::from_element(5, 5, f64::NAN));
    let scale = [1.0, tc, 1.0, 1.0, 1.0];
    let mut covariance = [[0.0; 5]; 5];
    for (a, row) in covariance.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = inv[(a, b)] * scale[a] * scale[b] * s2;
        }
    }

    let params = [q[0], tc, q[2], q[3], q[4]];
    let fit = DecayFit {
        model,
        params,
        covariance,
        residual_norm: cost.sqrt(),
        r_squared: 0.0,
        weighted,
        start,
    };
    let ym = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let ss_res: f64 = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| (yi - fit.evaluate(*ti)).powi(2))
        .sum();
    Ok(DecayFit {
        r_squared: 1.0 - ss_res / ss_tot,
        ..fit
    })
}

pub fn fit_decay(record: &ExperimentRecord, model: DecayModel) -> Result<DecayFit> {
    fit_decay_data(&record.sweep, &record.mean, Some(&record.stderr), model)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub alpha: f64,
    pub t2: f64,
    pub t2_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    /// k in `1/T₂ ∝ α^k`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// 95% confidence half-width.
    pub exponent_ci95: f64,
    pub prefactor: f64,
    pub points: Vec<ScalingPoint>,
}

/// Log-log regression of `1/T₂` against α, weighted by the relative
/// T₂ errors when all of them are positive.
pub fn alpha_scaling(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 2 || points.iter().any(|p| !(p.alpha > 0.0 && p.t2 > 0.0)) {
        return Err(Error::invalid(
            "points",
            "need two or more points with positive α and T₂",
        ));
    }
    let x: Vec<f64> = points.iter().map(|p| p.alpha.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| -p.t2.ln()).collect();
    let w: Option<Vec<f64>> = points
        .iter()
        .all(|p| p.t2_err > 0.0 && p.t2_err.is_finite())
        .then(|| points.iter().map(|p| (p.t2 / p.t2_err).powi(2)).collect());
    let line = fit_line(&x, &y, w.as_deref()).ok_or_else(|| {
        Error::Degenerate("α values have no spread; the exponent is undefined".into())
    })?;
    Ok(ScalingFit {
        exponent: line.slope,
        exponent_stderr: line.slope_stderr,
        exponent_ci95: 1.96 * line.slope_stderr,
        prefactor: line.intercept.exp(),
        points: points.to_vec(),
    })
}

/// Simulation settings for [`scan_alpha`].
#[derive(Debug, Clone)]
pub struct ScanSettings {
    pub realizations: usize,
    pub points: usize,
    /// τ window as a multiple of the predicted T₂.
    pub window: f64,
    /// Fringes across the window; the fringe detuning is set from this.
    pub fringes: f64,
    pub pulse_rabi: f64,
    /// Defaults to a fresh draw per τ point, so the point errors are
    /// independent as the weighted fit assumes.
    pub policy: PhasePolicy,
    pub noise_during_pulses: bool,
    pub model: DecayModel,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            realizations: 500,
            points: 60,
            window: 3.0,
            fringes: 4.0,
            pulse_rabi: TAU * 50e3,
            policy: PhasePolicy::PerPoint,
            noise_during_pulses: true,
            model: DecayModel::ExponentialFringe,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub alpha: f64,
    pub predicted_t2: f64,
    pub fit: DecayFit,
    pub record: ExperimentRecord,
}

#[derive(Debug, Clone)]
pub struct AlphaScan {
    pub entries: Vec<ScanEntry>,
    pub scaling: ScalingFit,
}

/// Ramsey experiment plus fit at each α, then the power-law regression.
/// The τ window and fringe detuning at each α follow its predicted T₂.
pub fn scan_alpha(base: &NoiseSpec, alphas: &[f64], settings: &ScanSettings) -> Result<AlphaScan> {
    let entries: Vec<ScanEntry> = alphas
        .par_iter()
        .map(|&alpha| {
            let run = || -> Result<ScanEntry> {
                let spec = base.with_alpha(alpha)?;
                let t2 = predicted_t2(&spec)?;
                let tau_max = settings.window * t2;
                let taus: Vec<f64> = (0..settings.points)
                    .map(|k| tau_max * k as f64 / (settings.points - 1) as f64)
                    .collect();
                let detuning = TAU * settings.fringes / tau_max;
                let mut cfg = RamseyConfig::new(
                    spec,
                    detuning,
                    settings.pulse_rabi,
                    taus,
                    settings.realizations,
                );
                cfg.policy = settings.policy;
                cfg.noise_during_pulses = settings.noise_during_pulses;
                let record = ramsey(&cfg)?;
                let fit = fit_decay(&record, settings.model)?;
                Ok(ScanEntry {
                    alpha,
                    predicted_t2: t2,
                    fit,
                    record,
                })
            };
            run().map_err(|e| Error::AtAlpha {
                alpha,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let points: Vec<ScalingPoint> = entries
        .iter()
        .map(|e| ScalingPoint {
            alpha: e.alpha,
            t2: e.fit.t_decay(),
            t2_err: e.fit.t_decay_stderr(),
        })
        .collect();
    let scaling = alpha_scaling(&points)?;
    Ok(AlphaScan { entries, scaling })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fringe(model: DecayModel, t: &[f64], tc: f64, d: f64) -> Vec<f64> {
        let f = DecayFit {
            model,
            params: [0.5, tc, d, 0.3, 0.5],
            covariance: [[0.0; 5]; 5],
            residual_norm: 0.0,
            r_squared: 1.0,
            weighted: false,
            start: 0,
        };
        t.iter().map(|t| f.evaluate(*t)).collect()
    }

    #[test]
    fn recovers_noiseless_exponential_fringe() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 1.5e-4).collect();
        let y = fringe(DecayModel::ExponentialFringe, &t, 10e-3, TAU * 1e3);
        let fit =
            fit_decay_data(&t, &y, Some(&vec![0.0; 200]), DecayModel::ExponentialFringe).unwrap();
        assert!(!fit.weighted);
        assert!(
            (fit.t_decay() / 10e-3 - 1.0).abs() < 1e-3,
            "{}",
            fit.t_decay()
        );
        assert!((fit.frequency() / (TAU * 1e3) - 1.0).abs() < 1e-6);
        assert!(fit.r_squared > 0.999_999);
    }

    #[test]
    fn recovers_gaussian_envelope() {
        let t: Vec<f64> = (0..120).map(|k| k as f64 * 1e-5).collect();
        let y = fringe(DecayModel::GaussianEnvelope, &t, 4e-4, TAU * 1e4);
        let fit = fit_decay_data(&t, &y, None, DecayModel::GaussianEnvelope).unwrap();
        assert!((fit.t_decay() / 4e-4 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn constant_signal_is_degenerate() {
        let t: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let err = fit_decay_data(&t, &[0.4; 20], None, DecayModel::ExponentialFringe).unwrap_err();
        assert_eq!(err.category(), "degenerate");
        assert!(fit_decay_data(&t[..5], &[0.4; 5], None, DecayModel::ExponentialFringe).is_err());
    }

    #[test]
    fn scaling_regression_properties() {
        let pts: Vec<ScalingPoint> = [1.0, 1.5, 2.0, 3.0]
            .iter()
            .map(|a| ScalingPoint {
                alpha: *a,
                t2: 0.05 / (a * a),
                t2_err: 0.0,
            })
            .collect();
        let s = alpha_scaling(&pts).unwrap();
        assert!((s.exponent - 2.0).abs() < 1e-12);
        let doubled: Vec<ScalingPoint> = pts
            .iter()
            .map(|p| ScalingPoint {
                alpha: 2.0 * p.alpha,
                ..*p
            })
            .collect();
        assert!((alpha_scaling(&doubled).unwrap().exponent - 2.0).abs() < 1e-12);
        let mut shuffled = pts.clone();
        shuffled.reverse();
        assert!((alpha_scaling(&shuffled).unwrap().exponent - s.exponent).abs() < 1e-12);
        let same: Vec<ScalingPoint> = pts
            .iter()
            .map(|p| ScalingPoint { alpha: 1.0, ..*p })
            .collect();
        assert!(alpha_scaling(&same).is_err());
    }
}
