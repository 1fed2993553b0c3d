use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use nbexpr::algorithms::{AlgoParams, DEFAULT_DAMPING, DEFAULT_ITERATIONS};
use nbexpr::engine::{ActivationPolicy, SyncPolicy};
use nbexpr::runner::{self, RunConfig, RunError, Theta, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use nbexpr::store::StoreMode;

#[derive(Parser)]
#[command(
    name = "nbexpr",
    version,
    about = "Run neighborhood-expression graph algorithms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an algorithm and write results and metrics.
    Run(RunArgs),
    /// Execute an algorithm and compare it with the reference oracle.
    Verify(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Activation {
    Auto,
    Neighbor,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sync {
    Critical,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Store {
    Memory,
    Disk,
}

#[derive(Args)]
struct RunArgs {
    /// Edge-pair or adjacency text file.
    #[arg(long)]
    input: PathBuf,
    /// One of bfs, cc, pr, ppr, core, color, mis, mm, tc.
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Absolute activation threshold (default n/50).
    #[arg(long, conflicts_with = "theta_frac")]
    theta: Option<u64>,
    /// Threshold as n divided by this denominator.
    #[arg(long)]
    theta_frac: Option<u64>,
    #[arg(long, value_enum, default_value_t = Activation::Auto)]
    activation: Activation,
    #[arg(long, value_enum, default_value_t = Sync::Critical)]
    sync: Sync,
    #[arg(long, value_enum, default_value_t = Store::Memory)]
    store: Store,
    /// Directory for disk-mode index segments (a temporary one if unset).
    #[arg(long)]
    store_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Source vertex for bfs and ppr.
    #[arg(long)]
    source: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_DAMPING)]
    damping: f64,
    /// Iteration count for pr and ppr.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: u32,
    #[arg(long)]
    results: Option<PathBuf>,
    /// Line-delimited JSON metrics.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Record every disk index read.
    #[arg(long)]
    audit: bool,
    #[arg(long)]
    max_supersteps: Option<u32>,
    /// Mirror every input edge.
    #[arg(long)]
    undirected: bool,
}

impl RunArgs {
    fn config(self) -> RunConfig {
        RunConfig {
            theta: match (self.theta, self.theta_frac) {
                (Some(t), _) => Theta::Absolute(t),
                (None, Some(d)) => Theta::Fraction(d),
                (None, None) => Theta::Default,
            },
            activation: match self.activation {
                Activation::Auto => ActivationPolicy::Auto,
                Activation::Neighbor => ActivationPolicy::Neighbor,
                Activation::All => ActivationPolicy::All,
            },
            sync: match self.sync {
                Sync::Critical => SyncPolicy::Critical,
                Sync::Full => SyncPolicy::Full,
            },
            store: match self.store {
                Store::Memory => StoreMode::Memory,
                Store::Disk => StoreMode::Disk,
            },
            store_dir: self.store_dir,
            workers: self.workers,
            seed: self.seed,
            params: AlgoParams {
                source: self.source,
                damping: self.damping,
                iterations: self.iterations,
                seed: self.seed,
            },
            results: self.results,
            metrics: self.metrics,
            audit: self.audit,
            max_supersteps: self.max_supersteps,
            undirected: self.undirected,
            ..RunConfig::new(self.input, &self.algo)
        }
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_OK as u8),
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match cli.command {
        Command::Run(args) => match runner::run(&args.config()) {
            Ok(out) => {
                let m = &out.metrics;
                println!(
                    "{}: {} supersteps, {} us, {} data bytes, {} messages",
                    m.algo,
                    m.superstep_count,
                    m.total_wall_time.as_micros(),
                    m.comm.bytes_data,
                    m.comm.messages
                );
                if let Some(t) = m.triangles {
                    println!("triangles: {t}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Verify(args) => match runner::verify(&args.config()) {
            Ok((_, report)) => {
                println!("{report}");
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_VERIFY as u8)
                }
            }
            Err(e) => fail(e),
        },
    }
}
