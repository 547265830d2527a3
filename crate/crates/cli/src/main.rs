use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod checks;
mod config;
mod error;
mod evolve;
mod kp;
mod num;

use checks::Suite;
use config::{KpConfig, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "shapeflow", version, about = "Shape evolution, Witt/Kirillov checks and KP sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// JSON config file (required by evolve, kp, tau, graph-dump).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the truncation order N.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Override the RK4 step h.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Override the horizon T.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep cells and check items.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    /// Print every reference identity check with its source location, then exit.
    #[arg(long)]
    dump_paper_examples: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a trajectory; writes a trajectory CSV and a conservation report.
    Evolve,
    /// Run an identity suite and print one JSON record per identity.
    Check {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Sweep ω_1, λ_1, the KP residual and τ over a time grid.
    Kp,
    /// Sweep τ over a time grid.
    Tau,
    /// Write the graph operator and basis as JSON.
    GraphDump,
}

fn need_config(cli: &Cli) -> Result<&Path, CliError> {
    cli.config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn load_kp(cli: &Cli) -> Result<(KpConfig, PathBuf), CliError> {
    let path = need_config(cli)?;
    let mut cfg: KpConfig = config::load(path)?;
    if let Some(n) = cli.order {
        cfg.order = n;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn dump_examples() -> Result<(), CliError> {
    let suites = [Suite::Witt, Suite::Bracket, Suite::Basis, Suite::Quadrature, Suite::Schur];
    let records: Vec<_> = suites.iter().flat_map(|&s| checks::run(s)).collect();
    for r in &records {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        println!("{}  {mark}  {}  ({})", r.location, r.name, r.detail);
    }
    finish(&records)
}

fn finish(records: &[checks::Record]) -> Result<(), CliError> {
    let failed = records.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: records.len(),
        });
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.dump_paper_examples {
        return dump_examples();
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Config("no command given; see --help".into()));
    };
    match command {
        Command::Evolve => {
            let mut cfg: RunConfig = config::load(need_config(cli)?)?;
            if let Some(n) = cli.order {
                cfg.order = n;
            }
            if let Some(h) = cli.step {
                cfg.step = h;
            }
            if let Some(t) = cli.horizon {
                cfg.horizon = t;
            }
            let report = evolve::run(&cfg, &out_dir(cli))?;
            eprintln!(
                "{} steps, worst relative drift {:e}",
                report.steps, report.worst_relative_drift
            );
        }
        Command::Check { suite } => {
            let records = checks::run(*suite);
            let json = serde_json::to_string_pretty(&records).expect("records serialize");
            println!("{json}");
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let path = dir.join(format!("check_{}.json", suite_name(*suite)));
                std::fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
            }
            finish(&records)?;
        }
        Command::Kp => {
            let (cfg, base) = load_kp(cli)?;
            eprintln!("wrote {}", kp::run_kp(&cfg, &base, &out_dir(cli))?.display());
        }
        Command::Tau => {
            let (cfg, base) = load_kp(cli)?;
            eprintln!("wrote {}", kp::run_tau(&cfg, &base, &out_dir(cli))?.display());
        }
        Command::GraphDump => {
            let (cfg, base) = load_kp(cli)?;
            eprintln!("wrote {}", kp::run_graph_dump(&cfg, &base, &out_dir(cli))?.display());
        }
    }
    Ok(())
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Witt => "witt",
        Suite::Bracket => "bracket",
        Suite::Basis => "basis",
        Suite::Quadrature => "quadrature",
        Suite::Schur => "schur",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.parallel.max(1))
        .build()
        .expect("thread pool");
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
