use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use thzmm_cli::acceptance::{self, Options};
use thzmm_cli::config::RunConfig;
use thzmm_cli::runner::{execute, write_csv, Engines, Metric, RunRequest};
use thzmm_cli::sweep::{parse_values, SweepSpec};
use thzmm_cli::CliError;
use thzmm_core::analysis::Analysis;

#[derive(Parser)]
#[command(name = "thzmm", version, about = "THz/mmWave hybrid network analysis and Monte Carlo validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a metric over a sweep and write CSV.
    Run {
        /// Configuration file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// KEY=VALUES[ UNIT], VALUES a comma list or start:stop:steps[:lin|log|db].
        #[arg(long)]
        sweep: Option<String>,
        /// coverage_thz, coverage_mm, coverage_hybrid, se_hybrid, association or absorption_coefficient.
        #[arg(long)]
        metric: Metric,
        /// SINR thresholds in dB, as a list or range.
        #[arg(long, allow_hyphen_values = true)]
        tau_db: Option<String>,
        /// analytic, mc or both (default: both, analytic for absorption_coefficient).
        #[arg(long)]
        engines: Option<Engines>,
        /// Monte Carlo trials per sweep point (overrides n_trials).
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed (overrides master_seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; a `.meta` sidecar is written next to it. Stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the resolved configuration and derived internal values.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(RunConfig::parse(&text)?)
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::Sweep("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Sweep(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[allow(clippy::too_many_arguments)]
fn run(
    config: Option<PathBuf>,
    sweep: Option<String>,
    metric: Metric,
    tau_db: Option<String>,
    engines: Option<Engines>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let mut config = load_config(config.as_deref())?;
    if let Some(n) = trials {
        config.n_trials = n;
    }
    if let Some(s) = seed {
        config.master_seed = s;
    }
    let sweep = sweep
        .as_deref()
        .map(SweepSpec::parse)
        .transpose()
        .map_err(CliError::Sweep)?;
    let tau_db = match tau_db {
        Some(t) => parse_values(&t).map_err(|e| CliError::Sweep(format!("--tau-db: {e}")))?,
        None => Vec::new(),
    };
    let engines = engines.unwrap_or(if metric.has_monte_carlo() {
        Engines::Both
    } else {
        Engines::Analytic
    });
    let req = RunRequest {
        config,
        sweep,
        metric,
        tau_db,
        engines,
    };
    req.check()?;
    info!("resolved configuration:\n{}", req.config.render());
    let rows = with_workers(workers, || execute(&req))??;
    match out {
        Some(path) => {
            let mut csv = Vec::new();
            write_csv(&rows, &mut csv).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            write_file(&path, &csv)?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta");
            write_file(Path::new(&meta), req.metadata().as_bytes())?;
            info!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            write_csv(&rows, io::stdout().lock()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
            eprint!("{}", req.metadata());
        }
    }
    Ok(())
}

fn validate(config: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = load_config(config.as_deref())?;
    print!("{}", cfg.render());
    let a = Analysis::with_quadrature(&cfg.params, cfg.quadrature).map_err(CliError::from_core)?;
    let noise = a.noise();
    println!("# derived");
    println!("# absorption_coefficient = {:e} /m", a.absorption_coefficient());
    println!("# epsilon = {:e}", a.epsilon());
    println!("# normalized THz noise = {:e}", noise.thz_hat_n);
    println!("# normalized mmWave noise = {:e}", noise.mm_sigma2);
    println!("# THz HPBW = {:e}, levels = {}", a.thz_pattern().hpbw(), a.thz_pattern().k());
    println!("# mmWave HPBW = {:e}, levels = {}", a.mmwave_pattern().hpbw(), a.mmwave_pattern().k());
    println!("# THz association probability = {:.9}", a.association_prob_thz());
    Ok(())
}

fn selftest(trials: usize, seed: u64, workers: Option<usize>) -> Result<(), CliError> {
    let opts = Options { trials, seed };
    let reports = with_workers(workers, || acceptance::run_all(&opts))?;
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Acceptance {
            failed,
            total: reports.len(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            sweep,
            metric,
            tau_db,
            engines,
            trials,
            seed,
            out,
            workers,
        } => run(config, sweep, metric, tau_db, engines, trials, seed, out, workers),
        Command::Validate { config } => validate(config),
        Command::Selftest {
            trials,
            seed,
            workers,
        } => selftest(trials, seed, workers),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
