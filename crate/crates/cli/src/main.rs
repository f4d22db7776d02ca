mod args;
mod error;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::{ChiArgs, ExportArgs, RabiArgs, RamseyArgs, ScanArgs, SynthArgs, VerifyPsdArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{mismatches, write_run, RunManifest};
use crate::run::Request;

/// Engineered noise baths: synthesis, IQ export, spectral checks, qubit
/// simulation and filter-function prediction.
///
/// Frequencies on the command line and in config files are in Hz. Every
/// run writes its outputs and a manifest.toml into --out; `bathforge rerun`
/// reproduces a run from its manifest and checks the bytes. Errors are
/// reported on stderr as one JSON object with an `error` category.
#[derive(Parser, Debug)]
#[command(name = "bathforge", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    Synth(SynthArgs),
    Export(ExportArgs),
    VerifyPsd(VerifyPsdArgs),
    /// Monte-Carlo qubit experiments.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Analytic predictions.
    #[command(subcommand)]
    Predict(Predict),
    ScanAlpha(ScanArgs),
    /// Re-run from a manifest and verify that every output is identical.
    Rerun {
        manifest: PathBuf,
        /// Output directory [default: `rerun` next to the manifest].
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Simulate {
    Ramsey(RamseyArgs),
    Rabi(RabiArgs),
}

#[derive(Subcommand, Debug)]
enum Predict {
    Chi(ChiArgs),
}

fn resolve(command: Command) -> CliResult<Option<(Request, PathBuf)>> {
    macro_rules! go {
        ($a:expr) => {{
            let a = $a.load()?;
            Some((a.resolve()?, a.out_dir()))
        }};
    }
    Ok(match command {
        Command::Synth(a) => go!(a),
        Command::Export(a) => go!(a),
        Command::VerifyPsd(a) => go!(a),
        Command::Simulate(Simulate::Ramsey(a)) => go!(a),
        Command::Simulate(Simulate::Rabi(a)) => go!(a),
        Command::Predict(Predict::Chi(a)) => go!(a),
        Command::ScanAlpha(a) => go!(a),
        Command::Rerun { .. } => None,
    })
}

fn rerun(manifest_path: PathBuf, out: Option<PathBuf>) -> CliResult<()> {
    let expected = RunManifest::read(&manifest_path)?;
    let out = out.unwrap_or_else(|| {
        manifest_path
            .parent()
            .map_or_else(|| PathBuf::from("rerun"), |d| d.join("rerun"))
    });
    let outcome = expected.run.execute()?;
    write_run(&out, &expected.run, &outcome)?;
    let bad = mismatches(&expected, &outcome);
    if !bad.is_empty() {
        return Err(CliError::Reproducibility(format!(
            "outputs differ: {}",
            bad.join(", ")
        )));
    }
    println!(
        "reproduced {} file(s) into {}",
        outcome.outputs.len(),
        out.display()
    );
    Ok(())
}

fn main_inner() -> CliResult<()> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            e.print().map_err(CliError::from)?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_string())),
    };
    if let Command::Rerun { manifest, out } = cli.command {
        return rerun(manifest, out);
    }
    let (request, out) = resolve(cli.command)?.expect("rerun handled above");
    let outcome = request.execute()?;
    let manifest = write_run(&out, &request, &outcome)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    println!(
        "wrote {} file(s) and {}",
        outcome.outputs.len(),
        manifest.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
