use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bathforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bathforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = csv_rows(text);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i]).collect()
}

fn write(dir: &TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const WHITE: &str =
    "quadrature = \"dephasing\"\nalpha = 2.0\nomega0_hz = 4.0\nteeth = 750\np = 0.0\nseed = 3\n";

#[test]
fn ramsey_without_noise_has_flat_unit_visibility() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "white.toml", WHITE);
    let out = dir.path().join("run");
    let o = bathforge(&[
        "simulate",
        "ramsey",
        "--spec",
        path(&spec),
        "--alpha",
        "0",
        "--realizations",
        "8",
        "--points",
        "6",
        "-o",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("ramsey.csv")).unwrap();
    let v = column(&text, "visibility");
    assert_eq!(v.len(), 6);
    assert!(v.iter().all(|x| *x == 1.0), "{v:?}");
}

#[test]
fn rerun_reproduces_bytes_under_any_thread_count() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "white.toml", WHITE);
    let out = dir.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_bathforge"))
        .env("RAYON_NUM_THREADS", "1")
        .args([
            "simulate",
            "ramsey",
            "--spec",
            path(&spec),
            "--realizations",
            "40",
            "--points",
            "8",
            "--tau-max",
            "0.01",
            "-o",
            path(&out),
        ])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let re = dir.path().join("again");
    let o = Command::new(env!("CARGO_BIN_EXE_bathforge"))
        .env("RAYON_NUM_THREADS", "4")
        .args(["rerun", path(&out.join("manifest.toml")), "-o", path(&re)])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["ramsey.csv", "manifest.toml"] {
        assert_eq!(
            std::fs::read(out.join(f)).unwrap(),
            std::fs::read(re.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn tampered_outputs_are_detected_on_rerun() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    assert!(bathforge(&[
        "predict",
        "chi",
        "--alpha",
        "1",
        "--points",
        "5",
        "-o",
        path(&out)
    ])
    .status
    .success());
    let m = out.join("manifest.toml");
    let text = std::fs::read_to_string(&m).unwrap();
    let sha = text.lines().find(|l| l.starts_with("sha256")).unwrap();
    std::fs::write(&m, text.replace(sha, "sha256 = \"00\"")).unwrap();
    let o = bathforge(&["rerun", path(&m)]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"error\":\"reproducibility\""));
}

#[test]
fn predicted_chi_column_matches_the_comb_sum() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "white.toml", WHITE);
    let out = dir.path().join("chi");
    let o = bathforge(&[
        "predict",
        "chi",
        "--spec",
        path(&spec),
        "--tau-max",
        "0.05",
        "--points",
        "50",
        "-o",
        path(&out),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out.join("chi.csv")).unwrap();
    let taus = column(&text, "tau");
    let chi = column(&text, "chi");
    let fid = column(&text, "fidelity");
    let (alpha, w0) = (2.0f64, std::f64::consts::TAU * 4.0);
    for ((t, c), f) in taus.iter().zip(&chi).zip(&fid) {
        // F(j) = 1/j for white dephasing noise
        let oracle: f64 = (1..=750)
            .map(|j| (0.5 * j as f64 * w0 * t).sin().powi(2) / (j * j) as f64)
            .sum::<f64>()
            * alpha
            * alpha;
        assert!((c - oracle).abs() <= 1e-9 * oracle, "τ = {t}");
        assert!((f - 0.5 * (1.0 + (-c).exp())).abs() < 1e-6);
    }
}

#[test]
fn flags_override_config_and_typos_are_rejected() {
    let dir = TempDir::new().unwrap();
    write(&dir, "white.toml", WHITE);
    let cfg = write(
        &dir,
        "run.toml",
        "spec = \"white.toml\"\ntau_max = 0.02\npoints = 4\nalpha = 0.5\n",
    );
    let out = dir.path().join("chi");
    let o = bathforge(&[
        "predict",
        "chi",
        "--config",
        path(&cfg),
        "--alpha",
        "1.5",
        "-o",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("alpha = 1.5"), "{manifest}");
    assert!(
        manifest.contains("taus = [0.005, 0.01, 0.015, 0.02]"),
        "{manifest}"
    );

    let bad = write(&dir, "bad.toml", "spec = \"white.toml\"\ntau_mx = 0.02\n");
    let o = bathforge(&["predict", "chi", "--config", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"error\":\"config\""));

    let typo = write(
        &dir,
        "typo.toml",
        "quadrature = \"dephasing\"\nalpha = 1.0\nomega0_hz = 4.0\nteth = 10\np = 0.0\n",
    );
    let o = bathforge(&["predict", "chi", "--spec", path(&typo)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn physical_violations_name_the_parameter() {
    let o = bathforge(&["predict", "chi", "--alpha", "-0.5"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("\"error\":\"invalid-parameter\"") && err.contains("\"parameter\":\"alpha\""),
        "{err}"
    );

    // a Rabi run needs an amplitude spec
    let o = bathforge(&[
        "simulate",
        "rabi",
        "--alpha",
        "0.01",
        "--quadrature",
        "dephasing",
        "--realizations",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn export_writes_csv_binary_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let prog = write(
        &dir,
        "prog.toml",
        "[[segment]]\nduration = 2.5e-5\nrabi_hz = 10000.0\n[[segment]]\nduration = 1e-3\n",
    );
    let out = dir.path().join("iq");
    let o = bathforge(&[
        "export",
        "--alpha",
        "0.2",
        "--teeth",
        "20",
        "--omega0-hz",
        "500",
        "--program",
        path(&prog),
        "--bits",
        "12",
        "-o",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side = std::fs::read_to_string(out.join("iq.toml")).unwrap();
    let samples: usize = side
        .lines()
        .find_map(|l| l.strip_prefix("samples = "))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(
        std::fs::metadata(out.join("iq.bin")).unwrap().len() as usize,
        4 * samples
    );
    let csv = std::fs::read_to_string(out.join("iq.csv")).unwrap();
    assert_eq!(csv_rows(&csv).1.len(), samples);
}

#[test]
fn verify_psd_reports_every_tooth() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("psd");
    let o = bathforge(&[
        "verify-psd",
        "--alpha",
        "0.1",
        "--teeth",
        "30",
        "--p",
        "-2",
        "--quadrature",
        "amplitude",
        "--realizations",
        "10",
        "-o",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let teeth = std::fs::read_to_string(out.join("teeth.csv")).unwrap();
    let err = column(&teeth, "relative_error");
    assert_eq!(err.len(), 30);
    assert!(err.iter().all(|e| e.abs() < 1e-9));
    assert!(String::from_utf8_lossy(&o.stdout).contains("(expected -2)"));
}

#[test]
fn synth_writes_one_file_per_realization() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("syn");
    let o = bathforge(&[
        "synth",
        "--alpha",
        "0.1",
        "--teeth",
        "10",
        "--realizations",
        "3",
        "--first-index",
        "5",
        "-o",
        path(&out),
    ]);
    assert!(o.status.success());
    for i in 5..8 {
        let text = std::fs::read_to_string(out.join(format!("realization_{i}.csv"))).unwrap();
        assert!(text.lines().nth(1).unwrap() == "t,beta,phi_n");
    }
}

#[test]
fn scan_alpha_recovers_quadratic_scaling() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("scan");
    let o = bathforge(&[
        "scan-alpha",
        "--alpha",
        "1",
        "--teeth",
        "200",
        "--t2-targets-ms",
        "2,4,8",
        "--realizations",
        "60",
        "--points",
        "30",
        "-o",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("scan.csv")).unwrap();
    assert_eq!(column(&table, "alpha").len(), 3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let k: f64 = stdout
        .split_whitespace()
        .skip_while(|w| *w != "exponent")
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((k - 2.0).abs() < 0.3, "{stdout}");
}

#[test]
fn help_lists_every_subcommand() {
    let o = bathforge(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for s in [
        "synth",
        "export",
        "verify-psd",
        "simulate",
        "predict",
        "scan-alpha",
        "rerun",
    ] {
        assert!(text.contains(s), "{s}");
    }
}
