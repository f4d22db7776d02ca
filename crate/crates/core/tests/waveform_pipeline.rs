use std::f64::consts::{PI, TAU};

use bathforge::config::{parse_noise_spec, ProgramDoc};
use bathforge::waveform::{
    compose, continuity_report, quantize, snapped_grid, to_iq, to_polar, ControlProgram,
    NoiseInputs, Segment,
};
use bathforge::{Error, NoiseRealization, NoiseSpec, Quadrature, TimeGrid};
use proptest::prelude::*;

fn wave(omega: &[f64], phi: &[f64]) -> bathforge::waveform::IqWaveform {
    to_iq(omega, phi, 1e6).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantizing_twice_changes_nothing(
        amps in prop::collection::vec(0.0f64..1.0, 1..64),
        bits in 2u32..=16,
    ) {
        let phi: Vec<f64> = (0..amps.len()).map(|k| 0.7 * k as f64).collect();
        let w = wave(&amps, &phi).with_full_scale(1.5).unwrap();
        let once = quantize(&w, bits).unwrap();
        let twice = quantize(&once, bits).unwrap();
        prop_assert_eq!(&once.quantized.as_ref().unwrap().i_codes, &twice.quantized.as_ref().unwrap().i_codes);
        prop_assert_eq!(&once.quantized.as_ref().unwrap().q_codes, &twice.quantized.as_ref().unwrap().q_codes);
        prop_assert_eq!(&once.i, &twice.i);
        // mid-tread rounding error is at most half a code step
        let step = 1.5 / (1u64 << (bits - 1)) as f64;
        prop_assert!(once.quantized.as_ref().unwrap().max_error <= 0.5 * step * (1.0 + 1e-12));
    }

    #[test]
    fn polar_round_trip(amps in prop::collection::vec(1e-3f64..10.0, 1..64), phases in prop::collection::vec(0.0f64..TAU, 64)) {
        let phi = &phases[..amps.len()];
        let w = wave(&amps, phi);
        let (a, p) = to_polar(&w);
        for k in 0..amps.len() {
            prop_assert!((a[k] - amps[k]).abs() <= 1e-12 * amps[k]);
            let d = (p[k] - phi[k]).rem_euclid(TAU);
            prop_assert!(d.min(TAU - d) <= 1e-9);
        }
    }
}

#[test]
fn out_of_range_samples_are_errors_not_clipped() {
    let w = wave(&[0.5, 2.0], &[0.0, 0.0]);
    match w.clone().with_full_scale(1.0) {
        Err(Error::ExceedsFullScale { index, .. }) => assert_eq!(index, 1),
        other => panic!("expected full-scale error, got {other:?}"),
    }
    // +FS maps to code 2^(b-1), one past the largest positive code
    let edge = wave(&[1.0], &[0.0]).with_full_scale(1.0).unwrap();
    assert!(matches!(
        quantize(&edge, 8),
        Err(Error::ExceedsFullScale { .. })
    ));
    let ok = wave(&[-1.0], &[0.0]).with_full_scale(1.0).unwrap();
    assert_eq!(
        quantize(&ok, 8).unwrap().quantized.unwrap().i_codes,
        vec![-128]
    );
}

#[test]
fn binary_export_layout() {
    let w = wave(&[0.5, 0.25], &[0.0, PI / 2.0])
        .with_full_scale(1.0)
        .unwrap();
    let q = quantize(&w, 16).unwrap();
    let mut bytes = Vec::new();
    q.write_binary(&mut bytes).unwrap();
    assert_eq!(bytes.len(), 8);
    assert_eq!(i16::from_le_bytes([bytes[0], bytes[1]]), 16384);
    assert_eq!(i16::from_le_bytes([bytes[6], bytes[7]]), 8192);
    let mut side = Vec::new();
    q.write_sidecar("abc", &mut side).unwrap();
    let side = String::from_utf8(side).unwrap();
    assert!(side.contains("bits = 16") && side.contains("samples = 2"));
    assert!(quantize(&w, 20).unwrap().write_binary(Vec::new()).is_err());
}

#[test]
fn composed_phase_carries_dephasing_noise() {
    let spec = NoiseSpec::power_law(Quadrature::Dephasing, 0.3, TAU * 50.0, 20, 0.0, 4).unwrap();
    let program =
        ControlProgram::new(vec![Segment::new(0.02, TAU * 1e3, 0.25, 0.0).unwrap()]).unwrap();
    let grid = snapped_grid(0.02, spec.omega0(), 1e5).unwrap();
    let noise = NoiseRealization::generate(&spec, 0, grid).unwrap();
    let c = compose(
        &program,
        NoiseInputs {
            dephasing: Some(&noise),
            ..Default::default()
        },
        &grid,
    )
    .unwrap();
    let phi_n = noise.phi_n.as_ref().unwrap();
    for (total, noise) in c.phi.iter().zip(phi_n) {
        assert!((total - 0.25 - noise).abs() < 1e-12);
    }
    let iq = to_iq(&c.omega, &c.phi, 1e5).unwrap();
    // one control segment covering a whole noise period loops cleanly
    let rep = continuity_report(&iq, TAU * 1e3 * 0.5);
    assert!(!rep.flagged, "{rep:?}");
}

#[test]
fn both_amplitude_modes_at_once_is_an_error() {
    let spec = NoiseSpec::power_law(Quadrature::Amplitude, 0.01, TAU * 100.0, 5, 0.0, 0).unwrap();
    let grid = TimeGrid::periodic(spec.omega0(), 1, 100).unwrap();
    let r = NoiseRealization::generate(&spec, 0, grid).unwrap();
    let program = ControlProgram::new(vec![Segment::idle(0.005).unwrap()]).unwrap();
    let inputs = NoiseInputs {
        multiplicative: Some(&r),
        additive: Some(&r),
        ..Default::default()
    };
    assert!(compose(&program, inputs, &grid).is_err());
}

#[test]
fn documents_build_domain_values() {
    let spec = parse_noise_spec("quadrature = \"dephasing\"\nalpha = 0.5\nomega0_hz = 4.0\nteeth = 750\np = 0.0\nseed = 7\n").unwrap();
    assert_eq!(spec.teeth(), 750);
    assert!((spec.omega0() - TAU * 4.0).abs() < 1e-12);
    let again = parse_noise_spec(&spec.to_config_text()).unwrap();
    assert_eq!(spec.hash(), again.hash());
    assert!(parse_noise_spec(
        "quadrature = \"dephasing\"\nalpha = 0.5\nomega0_hz = 4.0\nteeth = 3\np = 0.0\nbogus = 1\n"
    )
    .is_err());

    let prog = ProgramDoc::parse(
        "[[segment]]\nduration = 1e-5\nrabi_hz = 25000.0\n[[segment]]\nduration = 1e-3\n",
    )
    .unwrap()
    .to_program()
    .unwrap();
    assert_eq!(prog.segments().len(), 2);
    assert!((prog.duration() - 1.01e-3).abs() < 1e-15);
}
