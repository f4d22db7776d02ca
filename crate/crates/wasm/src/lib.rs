//! Browser bindings for the demo page in `www/`. Each export takes plain
//! numbers (frequencies in Hz, times in seconds) and returns a [`Series`]
//! of equal-length columns ready for plotting.

use std::f64::consts::TAU;

use bathforge::filter_theory::{chi_fid_comb, coherence_curve, predicted_t2};
use bathforge::noise_synth::analytic_psd;
use bathforge::qubit_sim::{ramsey, RamseyConfig};
use bathforge::spectral::estimate_psd_realizations;
use bathforge::{NoiseRealization, NoiseSpec, Quadrature, TimeGrid};
use wasm_bindgen::prelude::*;

/// Named numeric columns plus a one-line note.
#[wasm_bindgen]
pub struct Series {
    columns: Vec<(String, Vec<f64>)>,
    note: String,
}

#[wasm_bindgen]
impl Series {
    /// Column by name; empty if absent.
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|(n, _)| n.clone()).collect()
    }

    #[wasm_bindgen(getter)]
    pub fn note(&self) -> String {
        self.note.clone()
    }
}

fn js_err(e: bathforge::Error) -> JsError {
    JsError::new(&format!("{}: {e}", e.category()))
}

fn spec(
    quadrature: Quadrature,
    alpha: f64,
    omega0_hz: f64,
    teeth: usize,
    p: f64,
    seed: u64,
) -> Result<NoiseSpec, JsError> {
    NoiseSpec::power_law(quadrature, alpha, TAU * omega0_hz, teeth, p, seed).map_err(js_err)
}

/// χ(τ) and the averaged fidelity on `points` τ values up to `tau_max`.
#[wasm_bindgen]
pub fn chi_curve(
    alpha: f64,
    omega0_hz: f64,
    teeth: usize,
    p: f64,
    tau_max: f64,
    points: usize,
) -> Result<Series, JsError> {
    let s = spec(Quadrature::Dephasing, alpha, omega0_hz, teeth, p, 0)?;
    let n = points.max(2);
    let taus: Vec<f64> = (1..=n).map(|k| tau_max * k as f64 / n as f64).collect();
    let curve = coherence_curve(&s, &taus).map_err(js_err)?;
    let fidelity = curve.chi.iter().map(|c| 0.5 * (1.0 + (-c).exp())).collect();
    let t2 = predicted_t2(&s)
        .map(|t| format!("T2 = {:.4} ms", t * 1e3))
        .unwrap_or_else(|_| "χ never reaches 1".into());
    Ok(Series {
        note: format!("{t2}; regime {}", curve.regime.as_str()),
        columns: vec![
            ("tau".into(), taus),
            ("chi".into(), curve.chi),
            ("fidelity".into(), fidelity),
        ],
    })
}

/// One realization over a base period, and the averaged periodogram of
/// `realizations` records against the analytic tooth weights.
#[wasm_bindgen]
pub fn noise_and_psd(
    amplitude: bool,
    alpha: f64,
    omega0_hz: f64,
    teeth: usize,
    p: f64,
    seed: u32,
    realizations: usize,
) -> Result<Series, JsError> {
    let q = if amplitude {
        Quadrature::Amplitude
    } else {
        Quadrature::Dephasing
    };
    let s = spec(q, alpha, omega0_hz, teeth, p, seed.into())?;
    let grid = TimeGrid::periodic(s.omega0(), 1, (8 * teeth).max(64)).map_err(js_err)?;
    let reals = (0..realizations.max(1) as u64)
        .map(|i| NoiseRealization::generate(&s, i, grid))
        .collect::<Result<Vec<_>, _>>()
        .map_err(js_err)?;
    let est = estimate_psd_realizations(&reals).map_err(js_err)?;
    let estimated: Vec<f64> = est
        .tooth_weights(&s)
        .map_err(js_err)?
        .into_iter()
        .map(|(_, w)| w)
        .collect();
    let analytic = analytic_psd(&s);
    Ok(Series {
        note: format!("{} samples per record, {} records", grid.len(), reals.len()),
        columns: vec![
            ("t".into(), grid.times().collect()),
            ("beta".into(), reals[0].beta.clone()),
            (
                "tooth_omega".into(),
                analytic.teeth.iter().map(|t| t.omega).collect(),
            ),
            (
                "tooth_analytic".into(),
                analytic.teeth.iter().map(|t| t.weight).collect(),
            ),
            ("tooth_estimated".into(), estimated),
        ],
    })
}

/// Monte-Carlo Ramsey populations with the filter-function envelope
/// `½(1 ± e^{−χ})` for comparison.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ramsey_fringes(
    alpha: f64,
    omega0_hz: f64,
    teeth: usize,
    seed: u32,
    fringe_hz: f64,
    tau_max: f64,
    points: usize,
    realizations: usize,
) -> Result<Series, JsError> {
    let s = spec(
        Quadrature::Dephasing,
        alpha,
        omega0_hz,
        teeth,
        0.0,
        seed.into(),
    )?;
    let n = points.max(2);
    let taus: Vec<f64> = (0..n)
        .map(|k| tau_max * k as f64 / (n - 1) as f64)
        .collect();
    let cfg = RamseyConfig::new(
        s.clone(),
        TAU * fringe_hz,
        TAU * 50e3,
        taus.clone(),
        realizations.max(1),
    );
    let rec = ramsey(&cfg).map_err(js_err)?;
    let decay: Vec<f64> = taus
        .iter()
        .map(|t| chi_fid_comb(&s, *t).map(|c| (-c).exp()))
        .collect::<Result<_, _>>()
        .map_err(js_err)?;
    Ok(Series {
        note: format!("{} realizations, spec {}", rec.realizations, rec.spec_hash),
        columns: vec![
            ("tau".into(), taus),
            ("p1".into(), rec.mean),
            ("stderr".into(), rec.stderr),
            (
                "upper".into(),
                decay.iter().map(|d| 0.5 * (1.0 + d)).collect(),
            ),
            (
                "lower".into(),
                decay.iter().map(|d| 0.5 * (1.0 - d)).collect(),
            ),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_have_matching_lengths() {
        let c = chi_curve(1.0, 4.0, 100, 0.0, 0.05, 20).unwrap();
        assert_eq!(c.column("tau").len(), 20);
        assert_eq!(c.column("fidelity").len(), 20);
        assert!(c.column("missing").is_empty());

        let n = noise_and_psd(false, 0.2, 4.0, 16, 0.0, 1, 4).unwrap();
        assert_eq!(n.column("t").len(), n.column("beta").len());
        let (a, e) = (n.column("tooth_analytic"), n.column("tooth_estimated"));
        assert_eq!(a.len(), 16);
        for (x, y) in a.iter().zip(&e) {
            assert!((x - y).abs() < 1e-9 * x);
        }

        let r = ramsey_fringes(0.0, 4.0, 10, 0, 1e3, 2e-3, 5, 2).unwrap();
        assert_eq!(r.column("upper"), vec![1.0; 5]);
    }
}
