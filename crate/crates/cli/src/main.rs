use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use efm_cli::config::{RunConfig, CACHE_ENV};
use efm_cli::convergence::{cmd_convergence, write_table};
use efm_cli::kernels::cmd_kernel;
use efm_cli::output::write_json;
use efm_cli::run::cmd_run;
use efm_cli::verify::cmd_verify;
use efm_cli::CliError;

/// Spectral solvers (EFM, FGM, FCM) for the space-homogeneous Boltzmann equation.
#[derive(Parser)]
#[command(name = "efm", version)]
struct Cli {
    /// Worker threads for the numerical kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Replace a configuration value, e.g. `--override modes=64` or `--override problem.rho1=1.1`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let mut config = RunConfig::load(&self.config, &self.overrides)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = Some(out.clone());
        }
        let out = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("efm-out"));
        Ok((config, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write diagnostics, slices and a summary.
    Run(ConfigArgs),
    /// Error ladder against the exact BKW solution at t = 0.01.
    Convergence {
        #[command(flatten)]
        config: ConfigArgs,
        /// Mode counts, e.g. `16,32,64`.
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<usize>,
        /// Angular quadrature node counts to sweep (2D); defaults to the configured value.
        #[arg(long, value_delimiter = ',')]
        angular_nodes: Vec<usize>,
    },
    /// Run the small-grid oracle suite; exits with 4 on any failed check.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for `verify.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Negate one kernel mode before checking (fault injection).
        #[arg(long)]
        tamper_kernel: bool,
    },
    /// Build and persist kernels in the cache directory.
    Kernel {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<usize>,
        /// Angular (2D) or radial (3D) node counts.
        #[arg(long, value_delimiter = ',', default_values_t = [8])]
        nodes: Vec<usize>,
        #[arg(long, default_value_t = 6.0)]
        radius: f64,
        #[arg(long, env = CACHE_ENV)]
        cache: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {threads} threads: {e}")))?;
    }
    match cli.command {
        Command::Run(args) => {
            let (config, out) = args.load()?;
            let summary = cmd_run(&config, &out)?;
            println!(
                "{} steps in {:.2} s; max positivity error {:.3e}; results in {}",
                summary.steps,
                summary.seconds,
                summary.max_positivity_error,
                out.display()
            );
            if let Some(e) = summary.errors {
                println!("l1 {:.4e}  l2 {:.4e}  linf {:.4e}", e.l1, e.l2, e.linf);
            }
        }
        Command::Convergence {
            config,
            modes,
            angular_nodes,
        } => {
            let (template, out) = config.load()?;
            let table = cmd_convergence(&template, &modes, &angular_nodes)?;
            write_table(&table, &out)?;
            println!("{:>4} {:>5} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}", "M", "N", "l1", "rate", "l2", "rate", "linf", "rate");
            for r in &table.rows {
                let rate = |i: usize| r.rates.map(|x| format!("{:.2}", x[i])).unwrap_or_default();
                println!(
                    "{:>4} {:>5} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6}",
                    r.angular_nodes,
                    r.modes,
                    r.l1,
                    rate(0),
                    r.l2,
                    rate(1),
                    r.linf,
                    rate(2)
                );
            }
        }
        Command::Verify {
            seed,
            out,
            tamper_kernel,
        } => {
            let report = cmd_verify(seed, tamper_kernel)?;
            for c in &report.checks {
                println!(
                    "{} {}: {:.3e} {} {:.1e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.relation,
                    c.threshold
                );
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                write_json(&dir.join("verify.json"), &report)?;
            }
            let failures = report.failures();
            if !failures.is_empty() {
                return Err(CliError::Verification(format!("{} of {} checks failed", failures.len(), report.checks.len())));
            }
        }
        Command::Kernel {
            dim,
            modes,
            nodes,
            radius,
            cache,
        } => {
            for entry in cmd_kernel(&cache, dim, radius, &modes, &nodes)? {
                println!("{}D N={} nodes={} {} {}", entry.dim, entry.modes, entry.nodes, entry.status, entry.path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_env("RUST_LOG")
        .init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("efm: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
