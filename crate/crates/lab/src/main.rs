use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varspace_lab::{run_named, ExperimentConfig, LabError, Report};

#[derive(Parser)]
#[command(name = "varspace", version, about = "Desk-scale experiments on variable-exponent function spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of a closed-form function on the configured grid.
    Norm(RunArgs),
    /// Admissibility audit of the configured weight sequence.
    AuditWeights(RunArgs),
    /// MR, IR and ER audit of the configured domain.
    AuditDomain(RunArgs),
    /// Sequence norms with cubes replaced by large subsets.
    VerifyQe(RunArgs),
    /// Function norm of synthesized atoms against the sequence norm.
    VerifySynthesis(RunArgs),
    /// Kernel convolution bounds across grid resolutions.
    VerifyConv(RunArgs),
    /// Synthesize one random coefficient sequence.
    Synthesize(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Where to write the JSON report; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Where to write per-trial ratios as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Self::Norm(a) => ("norm", a),
            Self::AuditWeights(a) => ("audit-weights", a),
            Self::AuditDomain(a) => ("audit-domain", a),
            Self::VerifyQe(a) => ("verify-qe", a),
            Self::VerifySynthesis(a) => ("verify-synthesis", a),
            Self::VerifyConv(a) => ("verify-conv", a),
            Self::Synthesize(a) => ("synthesize", a),
        }
    }
}

fn configure_threads() -> Result<(), LabError> {
    if let Ok(v) = std::env::var("VARSPACE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| LabError::Config(format!("VARSPACE_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(())
}

fn run(name: &str, args: &RunArgs) -> Result<Report, LabError> {
    configure_threads()?;
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let report = run_named(name, &cfg)?;
    let json = report.to_json()?;
    match &args.report {
        Some(path) => std::fs::write(path, json)?,
        None => std::io::stdout().write_all(json.as_bytes())?,
    }
    if let Some(path) = &args.csv {
        report.write_csv(File::create(path)?)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();
    match run(name, args) {
        Ok(report) => {
            for v in report.verdicts.iter().filter(|v| !v.pass) {
                eprintln!("verdict {} failed: {}", v.name, v.detail);
            }
            ExitCode::from(if report.passed() { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("varspace {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
