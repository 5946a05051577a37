use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use magobs::runner::{run, Command, ErrorReport, RunOptions};
use magobs::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    CheckMgcc,
    Gcc,
    Simulate,
    ObsConstant,
    SharpObs,
    ResolventScan,
    Quasimode,
    Witness,
    Control,
    Damped,
    NormalForm,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::CheckMgcc => Command::CheckMgcc,
            Cmd::Gcc => Command::Gcc,
            Cmd::Simulate => Command::Simulate,
            Cmd::ObsConstant => Command::ObsConstant,
            Cmd::SharpObs => Command::SharpObs,
            Cmd::ResolventScan => Command::ResolventScan,
            Cmd::Quasimode => Command::Quasimode,
            Cmd::Witness => Command::Witness,
            Cmd::Control => Command::Control,
            Cmd::Damped => Command::Damped,
            Cmd::NormalForm => Command::NormalForm,
        }
    }
}

/// Observability and quasimode experiments for magnetic Schrödinger
/// operators on the 2-torus.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    command: Cmd,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for automatic.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Audit directions beyond the geometric cutoff.
    #[arg(long)]
    verify_beyond_cutoff: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { out: cli.out, threads: cli.threads, verify_beyond_cutoff: cli.verify_beyond_cutoff };
    let result = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("{}: {e}", cli.config.display())))
        .and_then(|text| run(cli.command.into(), &text, &opts));
    match result {
        Ok(manifest) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = ErrorReport::new(&e);
            eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(report.exit_code as u8)
        }
    }
}
