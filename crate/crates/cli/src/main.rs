use clap::{Parser, ValueEnum};
use jetstream_cli::{exit, load_config, run, CliError, Command, Request};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    SolveFixed,
    SolveFree,
    Classify,
    Sweep,
    Physmap,
    Verify,
}

/// Subsonic jet flows from a convergent nozzle.
#[derive(Debug, Parser)]
#[command(name = "jetstream", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Wall-end potential; defaults to the symmetric value.
    #[arg(long)]
    zeta: Option<f64>,
    /// Outlet potential for solve-fixed; defaults to zeta.
    #[arg(long)]
    xi: Option<f64>,
    /// Wall-end radius for classify; defaults to flow.R.
    #[arg(long)]
    radius: Option<f64>,
    /// Number of sweep points.
    #[arg(long)]
    n: Option<usize>,
    /// Worker threads for sweep.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory; overrides outputs.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// verify: plant known faults and report them.
    #[arg(long)]
    inject_faults: bool,
    /// Record wall-clock time in summary.kv.
    #[arg(long)]
    timings: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    let cmd = match args.command {
        Cmd::SolveFixed => Command::SolveFixed,
        Cmd::SolveFree => Command::SolveFree,
        Cmd::Classify => Command::Classify,
        Cmd::Sweep => Command::Sweep,
        Cmd::Physmap => Command::Physmap,
        Cmd::Verify => Command::Verify,
    };
    let req = Request {
        zeta: args.zeta,
        xi: args.xi,
        radius: args.radius,
        n: args.n,
        jobs: args.jobs,
        out: args.out,
        inject: args.inject_faults,
        timings: args.timings,
    };
    match load_config(&args.config).and_then(|p| run(cmd, &p, &req)) {
        Ok(o) => {
            print!("{}", o.stdout);
            if o.failed > 0 {
                eprintln!("jetstream: {}", CliError::ChecksFailed(o.failed));
                return ExitCode::from(exit::VERIFICATION as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("jetstream: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
