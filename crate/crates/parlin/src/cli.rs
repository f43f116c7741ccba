//! `parlin` subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bench::{self, ProcessLauncher};
use crate::cluster::{exit, master_run, standalone_run, worker_run, JobResult};
use crate::config::Config;
use crate::data;

#[derive(Debug, Parser)]
#[command(name = "parlin", version, about = "Data-parallel linear regression on a local master/worker cluster")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Override every seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// error, warn, info or debug (default: $PARLIN_LOG, then warn).
    #[arg(long, global = true)]
    log_level: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic flight-delay CSV.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Join a master as a worker.
    Worker {
        #[arg(long)]
        master: String,
        #[arg(long)]
        rank: u32,
    },
    /// Coordinate a job over `cluster.expected_workers` workers.
    Master {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Run a job standalone, without workers.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the benchmark plan and write reports.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render reports from a saved records.csv.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_logging(level: Option<&str>) -> Result<(), String> {
    let level = level
        .map(str::to_owned)
        .or_else(|| std::env::var("PARLIN_LOG").ok())
        .unwrap_or_else(|| "warn".to_string());
    let filter = match level.to_ascii_lowercase().as_str() {
        "error" => log::LevelFilter::Error,
        "warn" => log::LevelFilter::Warn,
        "info" => log::LevelFilter::Info,
        "debug" => log::LevelFilter::Debug,
        other => return Err(format!("unknown log level `{other}` (error, warn, info, debug)")),
    };
    let _ = env_logger::Builder::new()
        .filter_level(filter)
        .target(env_logger::Target::Stderr)
        .try_init();
    Ok(())
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<Config, i32> {
    let mut config = Config::load(path).map_err(|e| {
        eprintln!("error: {e}");
        exit::DATA
    })?;
    if let Some(seed) = seed {
        config.override_seed(seed);
    }
    Ok(config)
}

/// Writes to stdout, ignoring a reader that has gone away.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn print_json<T: serde::Serialize>(value: &T) {
    emit(&(serde_json::to_string_pretty(value).expect("serializable output") + "\n"));
}

fn report_job(result: Result<JobResult, crate::cluster::ClusterError>) -> i32 {
    match result {
        Ok(r) => {
            print_json(&r);
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    exit::OK
                }
                _ => {
                    eprint!("{}", e.render());
                    exit::USAGE
                }
            };
        }
    };
    if let Err(e) = init_logging(cli.log_level.as_deref()) {
        eprintln!("error: {e}");
        return exit::USAGE;
    }
    match dispatch(cli) {
        Ok(()) => exit::OK,
        Err(code) => code,
    }
}

fn fail<E: std::fmt::Display>(code: i32) -> impl FnOnce(E) -> i32 {
    move |e| {
        eprintln!("error: {e}");
        code
    }
}

fn dispatch(cli: Cli) -> Result<(), i32> {
    match cli.command {
        Command::GenData { config, out } => {
            let config = load_config(&config, cli.seed)?;
            let summary = data::generate_synthetic(&config.dataset_spec(), &out).map_err(fail(exit::DATA))?;
            emit(&(serde_json::to_string(&summary).expect("summary serializes") + "\n"));
            Ok(())
        }
        Command::Worker { master, rank } => worker_run(&master, rank).map_err(|e| {
            eprintln!("error: worker {rank}: {e}");
            e.exit_code()
        }),
        Command::Master { config, port } => {
            let config = load_config(&config, cli.seed)?;
            let job = config
                .job_spec(config.cluster.expected_workers)
                .map_err(fail(exit::DATA))?;
            if job.expected_workers == 0 {
                eprintln!("error: cluster.expected_workers must be at least 1 for `master`; use `run`");
                return Err(exit::DATA);
            }
            match report_job(master_run(&job, port.unwrap_or(config.cluster.port))) {
                exit::OK => Ok(()),
                code => Err(code),
            }
        }
        Command::Run { config } => {
            let config = load_config(&config, cli.seed)?;
            let job = config.job_spec(0).map_err(fail(exit::DATA))?;
            match report_job(standalone_run(&job)) {
                exit::OK => Ok(()),
                code => Err(code),
            }
        }
        Command::Bench { config, out } => {
            let config = load_config(&config, cli.seed)?;
            let plan = config.plan().map_err(fail(exit::DATA))?;
            let out = out.unwrap_or_else(|| config.bench.output_dir.clone());
            std::fs::create_dir_all(&out).map_err(fail(exit::DATA))?;
            let launcher = ProcessLauncher::current_exe().map_err(fail(exit::JOB_FAILURE))?;
            let outcome = bench::run_plan(&plan, &launcher).map_err(|e| {
                eprintln!("error: {e}");
                e.exit_code()
            })?;
            bench::write_records(&outcome.records, &out.join("records.csv")).map_err(fail(exit::DATA))?;
            std::fs::write(
                out.join("runs.json"),
                serde_json::to_string_pretty(&outcome.results).expect("results serialize") + "\n",
            )
            .map_err(fail(exit::DATA))?;
            let (table, _) = bench::render(&outcome.records, &out).map_err(fail(exit::DATA))?;
            emit(&bench::format_table(&table));
            let report = bench::Report::from_table(&table).map_err(fail(exit::DATA))?;
            emit(&format!(
                "{} -> {}: {}% reduction\n",
                report.baseline.label, report.best.label, report.percent_reduction_display
            ));
            Ok(())
        }
        Command::Report { records, out } => {
            let records = bench::read_records(&records).map_err(fail(exit::DATA))?;
            let (table, paths) = bench::render(&records, &out).map_err(fail(exit::DATA))?;
            emit(&bench::format_table(&table));
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}
