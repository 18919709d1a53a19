use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mqv::commands::{self, Output, DEFAULT_ETAS};
use mqv::config::{parse_complex, parse_complex_list, parse_spec, parse_tol};
use mqv::io::{read_point, to_json, write_atomic, write_json, LoadedPoint};
use mqv::{CliError, Report, RunConfig};
use mqv_core::linalg::c;
use mqv_core::reduction::DUAL_NOTICE;
use mqv_core::C64;

/// Verification suites for multiplicative quiver varieties of framed cyclic
/// quivers.
#[derive(Debug, Parser)]
#[command(name = "mqv", version)]
struct Cli {
    /// Model dimensions `m,d,n` (commands reading a point take them from the file).
    #[arg(long, global = true, default_value = "2,2,3")]
    spec: String,
    /// Deformation parameters `re,im;re,im;...`, one per cycle vertex.
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long, global = true)]
    tol: Vec<String>,
    /// Output path for the report (the point file for `gen`). Printed to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a random point on the moment-map level set.
    Gen,
    /// Moment map, moment blocks, moment property and spin identities at a point.
    Verify { point: PathBuf },
    /// Pairwise brackets within one family.
    Commute {
        point: PathBuf,
        #[arg(long)]
        family: String,
        /// Spectral parameter `re,im`; give two, or none for the defaults.
        #[arg(long)]
        eta: Vec<String>,
        /// Bracket magnitude table.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Conservation table along a flow.
    Flow {
        point: PathBuf,
        /// `trZ`, `trY`, `trT` or `family1`..`family4`.
        #[arg(long)]
        ham: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "1.0")]
        time: String,
        #[arg(long, default_value = "0.25,-0.15")]
        eta: String,
        /// RK4 steps over the whole time for family flows.
        #[arg(long, default_value_t = 400)]
        steps: usize,
        /// Number of sampled times after the start.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Numerical Jacobian rank of a reduced family.
    Rank {
        point: PathBuf,
        /// `F`, `G` or `H`.
        #[arg(long)]
        family: String,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Invariant-word table, H-invariance, locus tests and the lambda-gauge.
    Reduce {
        point: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Dual point and the duality checks.
    Dual {
        point: PathBuf,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        /// Where to write the dual point.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run verification suites over seeded random points.
    Report {
        /// Suite name; repeatable. All suites when absent.
        #[arg(long)]
        suite: Vec<String>,
    },
}

fn config(cli: &Cli, spec_override: Option<mqv_core::ModelSpec>, q_override: Option<Vec<C64>>) -> Result<RunConfig, CliError> {
    let spec = match spec_override {
        Some(s) => s,
        None => parse_spec(&cli.spec)?,
    };
    let q = match q_override {
        Some(q) => Some(q),
        None => cli.q.as_deref().map(parse_complex_list).transpose()?,
    };
    let tolerances = cli.tol.iter().map(|t| parse_tol(t)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunConfig::new(spec, q, cli.seed)?.with_tolerances(tolerances))
}

fn load(cli: &Cli, path: &Path) -> Result<(LoadedPoint, RunConfig), CliError> {
    let p = read_point(path)?;
    let cfg = config(cli, Some(p.spec), Some(p.q.clone()))?;
    Ok((p, cfg))
}

fn emit_report(cli: &Cli, report: &Report) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => write_json(path, report)?,
        None => print!("{}", to_json(report)),
    }
    eprintln!("{}", commands::summary_line(report));
    Ok(())
}

fn emit_output(cli: &Cli, out: Output, data: &Option<PathBuf>) -> Result<Report, CliError> {
    if let Some(path) = data {
        write_json(path, &out.data)?;
    }
    emit_report(cli, &out.report)?;
    Ok(out.report)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Gen => {
            let cfg = config(cli, None, None)?;
            let (file, report) = commands::gen(&cfg)?;
            match &cli.out {
                Some(path) => write_atomic(path, &to_json(&file))?,
                None => print!("{}", to_json(&file)),
            }
            eprintln!("{}", commands::summary_line(&report));
            Ok(report)
        }
        Command::Verify { point } => {
            let (p, cfg) = load(cli, point)?;
            let report = commands::verify(&p, &cfg);
            emit_report(cli, &report)?;
            Ok(report)
        }
        Command::Commute { point, family, eta, data } => {
            let (p, cfg) = load(cli, point)?;
            let etas = match eta.as_slice() {
                [] => (c(DEFAULT_ETAS[0].0, DEFAULT_ETAS[0].1), c(DEFAULT_ETAS[1].0, DEFAULT_ETAS[1].1)),
                [a, b] => (parse_complex(a)?, parse_complex(b)?),
                _ => return Err(CliError::Usage("--eta takes exactly two values".into())),
            };
            emit_output(cli, commands::commute(&p, commands::parse_family(family)?, etas, &cfg)?, data)
        }
        Command::Flow { point, ham, k, time, eta, steps, samples, data } => {
            let (p, cfg) = load(cli, point)?;
            let h = commands::parse_hamiltonian(ham, *k, parse_complex(eta)?)?;
            emit_output(cli, commands::flow(&p, h, parse_complex(time)?, *steps, *samples, &cfg)?, data)
        }
        Command::Rank { point, family, data } => {
            let (p, cfg) = load(cli, point)?;
            emit_output(cli, commands::rank(&p, commands::parse_reduced_family(family)?, &cfg)?, data)
        }
        Command::Reduce { point, max_len, data } => {
            let (p, cfg) = load(cli, point)?;
            emit_output(cli, commands::reduce(&p, *max_len, &cfg)?, data)
        }
        Command::Dual { point, pairs, data } => {
            let (p, cfg) = load(cli, point)?;
            let (file, report) = commands::dual(&p, *pairs, &cfg)?;
            eprintln!("note: {DUAL_NOTICE}");
            if let Some(path) = data {
                write_json(path, &file)?;
            }
            emit_report(cli, &report)?;
            Ok(report)
        }
        Command::Report { suite } => {
            let mut cfg = config(cli, None, None)?;
            cfg.suites = suite.clone();
            let report = commands::report(&cfg)?;
            emit_report(cli, &report)?;
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) if report.all_pass() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
