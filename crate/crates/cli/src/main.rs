//! `stackq`: run simulator presets against a device config and write
//! CSV/JSON artifacts plus a run manifest.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use stackq::{Error, ErrorKind};

use commands::*;

#[derive(Parser, Debug)]
#[command(name = "stackq", version, about = "Stacked transmon processor simulator")]
struct Cli {
    /// Device config JSON; defaults to the built-in paper-like device.
    #[arg(long, global = true)]
    device: Option<PathBuf>,
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker thread cap.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum Command {
    /// Dressed coupler frequency over a flux grid.
    Spectrum(SpectrumArgs),
    /// Residual ZZ of a pair over a coupler flux grid.
    ZzScan(ZzScanArgs),
    /// Coupler flux where the residual ZZ vanishes.
    ZzZero(ZzZeroArgs),
    /// Effective qubit-qubit coupling.
    Geff(GeffArgs),
    /// |11>-|02> swap chevron.
    Chevron(ChevronArgs),
    /// Calibrate a CZ gate.
    CzCal(CzCalArgs),
    /// Score a calibrated CZ under decoherence.
    CzFid(CzFidArgs),
    /// Randomized benchmarking.
    Rb(RbArgs),
    /// State tomography of the prepared Bell state.
    Qst(QstArgs),
    /// Bell state preparation with the calibrated CZ.
    Bell(BellArgs),
    /// Equalize the star couplings and evolve the W state.
    Wstate(WstateArgs),
    /// Stacked-chip connectivity graphs.
    Topo(TopoArgs),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Spectrum(_) => "spectrum".into(),
            Command::ZzScan(_) => "zz-scan".into(),
            Command::ZzZero(_) => "zz-zero".into(),
            Command::Geff(_) => "geff".into(),
            Command::Chevron(_) => "chevron".into(),
            Command::CzCal(_) => "cz-cal".into(),
            Command::CzFid(_) => "cz-fid".into(),
            Command::Rb(a) => format!("rb {}", a.mode.name()),
            Command::Qst(_) => "qst".into(),
            Command::Bell(_) => "bell".into(),
            Command::Wstate(_) => "wstate".into(),
            Command::Topo(a) => format!("topo {}", a.action.name()),
        }
    }
}

fn run(cli: &Cli) -> stackq::Result<()> {
    let started = Instant::now();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::InvalidInput("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("cannot size the worker pool: {e}")))?;
    }
    let ctx = Context::new(cli.device.as_deref(), cli.seed)?;
    let mut out = output::Output::new(&cli.out)?;
    match &cli.command {
        Command::Spectrum(a) => spectrum(&ctx, a, &mut out)?,
        Command::ZzScan(a) => zz_scan(&ctx, a, &mut out)?,
        Command::ZzZero(a) => zz_zero(&ctx, a, &mut out)?,
        Command::Geff(a) => geff(&ctx, a, &mut out)?,
        Command::Chevron(a) => chevron(&ctx, a, &mut out)?,
        Command::CzCal(a) => cz_cal(&ctx, a, &mut out)?,
        Command::CzFid(a) => cz_fid(&ctx, a, &mut out)?,
        Command::Rb(a) => rb(&ctx, a, &mut out)?,
        Command::Qst(a) => qst(&ctx, a, &mut out)?,
        Command::Bell(a) => bell(&ctx, a, &mut out)?,
        Command::Wstate(a) => wstate(&ctx, a, &mut out)?,
        Command::Topo(a) => topo(a, &mut out)?,
    }
    output::write_manifest(
        &out,
        &cli.command.name(),
        cli.device.as_deref(),
        serde_json::to_value(&cli.command)?,
        cli.seed,
        started,
    )
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    kind: &'a str,
    message: String,
}

fn exit_code(kind: ErrorKind) -> (u8, &'static str) {
    match kind {
        ErrorKind::Input => (2, "input"),
        ErrorKind::Physics => (3, "physics"),
        ErrorKind::Internal => (1, "internal"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let diag = Diagnostic {
                error: "usage",
                kind: "input",
                message: e.kind().to_string(),
            };
            eprintln!("{}", serde_json::to_string(&diag).expect("diagnostic serializes"));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = exit_code(e.kind());
            let name = format!("{e:?}");
            let variant = name.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error");
            let diag = Diagnostic {
                error: variant,
                kind,
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&diag).expect("diagnostic serializes"));
            ExitCode::from(code)
        }
    }
}
