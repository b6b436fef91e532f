use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use besovpnp::bundle::{write_bundle, Environment};
use besovpnp::experiments::run_experiment;
use besovpnp::spec::parse_spec;
use besovpnp::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "besovpnp", version, about = "Spectral Besov-norm and NSPNP experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Bundle directory; overrides `output` in the spec.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single-threaded, bit-reproducible run.
    #[arg(long)]
    serial: bool,
    /// Overrides `initial.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    HeatDecay(RunArgs),
    NspnpSimulate(RunArgs),
    NspnpDecay(RunArgs),
    LpCheck(RunArgs),
    BesovNorm(RunArgs),
    IdentityCheck(RunArgs),
    Sweep(RunArgs),
}

impl Command {
    fn split(self) -> (&'static str, RunArgs) {
        match self {
            Self::HeatDecay(a) => ("heat-decay", a),
            Self::NspnpSimulate(a) => ("nspnp-simulate", a),
            Self::NspnpDecay(a) => ("nspnp-decay", a),
            Self::LpCheck(a) => ("lp-check", a),
            Self::BesovNorm(a) => ("besov-norm", a),
            Self::IdentityCheck(a) => ("identity-check", a),
            Self::Sweep(a) => ("sweep", a),
        }
    }
}

fn threads(serial: bool) -> CliResult<Option<usize>> {
    if serial {
        return Ok(Some(1));
    }
    match std::env::var("BESOVPNP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Spec(format!("BESOVPNP_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(kind: &str, args: RunArgs) -> CliResult<bool> {
    if let Some(n) = threads(args.serial)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Spec(format!("thread pool: {e}")))?;
    }
    let mut spec = parse_spec(&args.spec)?;
    if spec.kind != kind {
        return Err(CliError::Spec(format!(
            "kind: spec declares `{}` but the subcommand is `{kind}`",
            spec.kind
        )));
    }
    if let Some(seed) = args.seed {
        spec.initial.seed = seed;
    }
    let out_dir = args
        .out
        .or_else(|| spec.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results").join(kind));
    let outcome = run_experiment(&spec)?;
    let summary = write_bundle(&out_dir, &spec, &outcome, &Environment::current(args.serial))?;
    for v in &summary.verdicts {
        let op = if v.lower_bound { ">=" } else { "<=" };
        println!(
            "{} {}: {:.6e} {op} {:.6e}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.limit
        );
    }
    println!("bundle: {}", out_dir.display());
    Ok(summary.pass)
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
