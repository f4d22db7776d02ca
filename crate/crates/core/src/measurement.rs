//! Photon-count readout and state estimation.
//!
//! The count for a qubit whose Bloch vector sits at polar angle θ is modelled
//! as Gaussian with mean `D + (B − D)θ/π` and standard deviation
//! `σ_D + (σ_B − σ_D)θ/π`. Two estimators are provided: a Bayesian
//! posterior over θ on a uniform grid, and the simple normalized average
//! `(E − D)/(B − D)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Default number of θ grid points.
pub const THETA_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountCalibration {
    bright_mean: f64,
    dark_mean: f64,
    bright_std: f64,
    dark_std: f64,
}

impl CountCalibration {
    pub fn new(bright_mean: f64, dark_mean: f64, bright_std: f64, dark_std: f64) -> Result<Self> {
        if !(dark_mean >= 0.0 && bright_mean > dark_mean && bright_mean.is_finite()) {
            return Err(Error::invalid(
                "bright_mean",
                format!(
                    "need bright_mean > dark_mean >= 0, got B = {bright_mean}, D = {dark_mean}"
                ),
            ));
        }
        if !(bright_std > 0.0 && dark_std > 0.0 && bright_std.is_finite() && dark_std.is_finite()) {
            return Err(Error::invalid(
                "bright_std",
                "count standard deviations must be positive",
            ));
        }
        Ok(Self {
            bright_mean,
            dark_mean,
            bright_std,
            dark_std,
        })
    }

    /// Fixed calibration used by the estimator tests and as the CLI default:
    /// B = 20, D = 4, σ_B = 4, σ_D = 2. Its single-shot assignment fidelity
    /// is about 99.1%.
    pub fn reference() -> Self {
        Self {
            bright_mean: 20.0,
            dark_mean: 4.0,
            bright_std: 4.0,
            dark_std: 2.0,
        }
    }

    pub fn bright_mean(&self) -> f64 {
        self.bright_mean
    }

    pub fn dark_mean(&self) -> f64 {
        self.dark_mean
    }

    pub fn bright_std(&self) -> f64 {
        self.bright_std
    }

    pub fn dark_std(&self) -> f64 {
        self.dark_std
    }

    pub fn count_mean(&self, theta: f64) -> f64 {
        self.dark_mean + (self.bright_mean - self.dark_mean) * theta / PI
    }

    pub fn count_std(&self, theta: f64) -> f64 {
        self.dark_std + (self.bright_std - self.dark_std) * theta / PI
    }

    /// Normalized Gaussian log-likelihood `ln P(c | θ)`.
    pub fn log_likelihood(&self, count: f64, theta: f64) -> f64 {
        let mu = self.count_mean(theta);
        let s = self.count_std(theta);
        let z = (count - mu) / s;
        -0.5 * z * z - s.ln() - 0.5 * (2.0 * PI).ln()
    }
}

/// One count draw. With `round` set the draw is rounded to the nearest
/// integer and floored at zero, mimicking a photon counter.
pub fn simulate_count<R: Rng + ?Sized>(
    theta: f64,
    calib: &CountCalibration,
    round: bool,
    rng: &mut R,
) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(
            "theta",
            format!("must lie in [0, π], got {theta}"),
        ));
    }
    let normal = Normal::new(calib.count_mean(theta), calib.count_std(theta))
        .map_err(|e| Error::invalid("calibration", e.to_string()))?;
    let c = normal.sample(rng);
    Ok(if round { c.round().max(0.0) } else { c })
}

/// `n` continuous count draws from the stream `(seed, index)`.
pub fn simulate_counts(
    theta: f64,
    calib: &CountCalibration,
    n: usize,
    seed: u64,
    index: u64,
) -> Result<Vec<f64>> {
    let mut rng = rng::stream(seed, Domain::PhotonCounts, index);
    (0..n)
        .map(|_| simulate_count(theta, calib, false, &mut rng))
        .collect()
}

fn trapezoid(h: f64, ys: &[f64]) -> f64 {
    match ys {
        [] => 0.0,
        [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Density over θ ∈ [0, π] on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPosterior {
    thetas: Vec<f64>,
    density: Vec<f64>,
}

impl ThetaPosterior {
    pub fn uniform(points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::invalid("points", "θ grid needs at least 3 points"));
        }
        let h = PI / (points - 1) as f64;
        Ok(Self {
            thetas: (0..points).map(|k| k as f64 * h).collect(),
            density: vec![1.0 / PI; points],
        })
    }

    /// Arbitrary non-negative density values on the uniform grid; they are
    /// normalized here.
    pub fn from_density(density: Vec<f64>) -> Result<Self> {
        let mut p = Self::uniform(density.len())?;
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("density", "must be finite and non-negative"));
        }
        let z = trapezoid(p.step(), &density);
        if !(z > 0.0) {
            return Err(Error::Degenerate("density integrates to zero".into()));
        }
        p.density = density.into_iter().map(|d| d / z).collect();
        Ok(p)
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    fn step(&self) -> f64 {
        PI / (self.thetas.len() - 1) as f64
    }

    /// `∫ f(θ) p(θ) dθ` by the trapezoidal rule.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        let ys: Vec<f64> = self
            .thetas
            .iter()
            .zip(&self.density)
            .map(|(t, d)| f(*t) * d)
            .collect();
        trapezoid(self.step(), &ys)
    }

    pub fn total(&self) -> f64 {
        trapezoid(self.step(), &self.density)
    }

    pub fn mean(&self) -> f64 {
        self.expect(|t| t)
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        self.expect(|t| (t - m) * (t - m)).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub posterior: ThetaPosterior,
    /// Set when the likelihood vanished wherever the prior has support; the
    /// prior is returned unchanged in that case.
    pub degenerate: bool,
}

/// Bayes' rule on the θ grid. The likelihood is evaluated in log space and
/// shifted by its maximum over the prior's support before exponentiating,
/// so counts far in the tails still produce a usable posterior.
pub fn bayes_update(prior: &ThetaPosterior, count: f64, calib: &CountCalibration) -> UpdateOutcome {
    let logl: Vec<f64> = prior
        .thetas
        .iter()
        .map(|t| calib.log_likelihood(count, *t))
        .collect();
    let peak = logl
        .iter()
        .zip(&prior.density)
        .filter(|(_, d)| **d > 0.0)
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let fallback = UpdateOutcome {
        posterior: prior.clone(),
        degenerate: true,
    };
    if !peak.is_finite() {
        return fallback;
    }
    let unnorm: Vec<f64> = logl
        .iter()
        .zip(&prior.density)
        .map(|(l, d)| d * (l - peak).exp())
        .collect();
    let evidence = trapezoid(prior.step(), &unnorm);
    if !(evidence > 0.0 && evidence.is_finite()) {
        return fallback;
    }
    UpdateOutcome {
        posterior: ThetaPosterior {
            thetas: prior.thetas.clone(),
            density: unnorm.into_iter().map(|u| u / evidence).collect(),
        },
        degenerate: false,
    }
}

/// Sequential updates from a uniform prior.
pub fn posterior_from_counts(
    counts: &[f64],
    calib: &CountCalibration,
    points: usize,
) -> Result<ThetaPosterior> {
    let mut post = ThetaPosterior::uniform(points)?;
    for c in counts {
        post = bayes_update(&post, *c, calib).posterior;
    }
    Ok(post)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationEstimate {
    pub mean: f64,
    pub std: f64,
}

/// Mean and spread of `P(|1⟩) = sin²(θ/2)` under the posterior.
pub fn population_from_theta(posterior: &ThetaPosterior) -> PopulationEstimate {
    let p = |t: f64| (t / 2.0).sin().powi(2);
    let mean = posterior.expect(p);
    let second = posterior.expect(|t| p(t).powi(2));
    PopulationEstimate {
        mean,
        std: (second - mean * mean).max(0.0).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleEstimate {
    pub clamped: f64,
    pub raw: f64,
}

/// `(E − D)/(B − D)`, clamped to [0, 1].
pub fn simple_normalize(mean_count: f64, calib: &CountCalibration) -> Result<SimpleEstimate> {
    let span = calib.bright_mean - calib.dark_mean;
    if !(span.abs() > 0.0) {
        return Err(Error::Degenerate("bright and dark means coincide".into()));
    }
    let raw = (mean_count - calib.dark_mean) / span;
    Ok(SimpleEstimate {
        clamped: raw.clamp(0.0, 1.0),
        raw,
    })
}

/// Single-shot bright/dark decision: bright when the posterior mean from a
/// uniform prior lies above π/2.
pub fn assign_bright(count: f64, calib: &CountCalibration, points: usize) -> Result<bool> {
    Ok(posterior_from_counts(&[count], calib, points)?.mean() > PI / 2.0)
}

/// Monte-Carlo single-shot assignment fidelity: the average of the correct
/// assignment rates for states prepared dark (θ = 0) and bright (θ = π).
pub fn assignment_fidelity(calib: &CountCalibration, shots: usize, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::invalid("shots", "need at least one shot"));
    }
    let mut correct = 0usize;
    for (index, theta, bright) in [(0u64, 0.0, false), (1, PI, true)] {
        for c in simulate_counts(theta, calib, shots, seed, index)? {
            if assign_bright(c, calib, THETA_POINTS)? == bright {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / (2 * shots) as f64)
}
