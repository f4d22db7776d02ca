use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Uniform sample grid `t_k = t0 + k·dt`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(
                "dt",
                format!("must be positive and finite, got {dt}"),
            ));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        if n == 0 {
            return Err(Error::invalid("n", "grid needs at least one sample"));
        }
        Ok(Self { t0, dt, n })
    }

    /// Grid spanning exactly `periods` base periods `2π/ω₀` with the end
    /// point excluded, so a comb with base frequency ω₀ wraps seamlessly.
    pub fn periodic(omega0: f64, periods: usize, samples_per_period: usize) -> Result<Self> {
        if !(omega0 > 0.0) {
            return Err(Error::invalid("omega0", "must be positive"));
        }
        if periods == 0 || samples_per_period == 0 {
            return Err(Error::invalid(
                "periods",
                "need at least one period and one sample",
            ));
        }
        Self::new(
            0.0,
            TAU / omega0 / samples_per_period as f64,
            periods * samples_per_period,
        )
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Length `n·dt` of the half-open interval the grid samples.
    pub fn span(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    /// Number of whole base periods covered, if the span is an integer
    /// multiple of `2π/ω₀` to within 1e-9 relative.
    pub fn whole_periods(&self, omega0: f64) -> Option<usize> {
        let periods = self.span() * omega0 / TAU;
        let rounded = periods.round();
        (rounded >= 1.0 && (periods - rounded).abs() <= 1e-9 * rounded).then_some(rounded as usize)
    }
}
