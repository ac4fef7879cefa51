use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mli_dm::Execution;
use mli_dm_cli::config::{self, Overrides};
use mli_dm_cli::run::{run, Command, RunOptions};

/// Robust MLI leakage beamforming for secure directional modulation.
///
/// Settings come from the TOML file given by --config, then from MLIDM_<KEY>
/// environment variables, then from flags.
#[derive(Debug, Parser)]
#[command(name = "mli-dm", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML configuration file (Table II defaults when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Comma-separated subset of proposed,op,conventional.
    #[arg(long, global = true)]
    methods: Option<String>,

    #[arg(long, short, global = true)]
    quiet: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, conflicts_with = "sequential")]
    threads: Option<usize>,

    /// Run trials on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    /// Also write a matplotlib script next to the CSV.
    #[arg(long, global = true)]
    plot: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Design every method for the configured directions and write design.json.
    Design,
    /// BER versus receiver angle, written to ber_vs_angle.csv.
    BerSweep,
    /// Secrecy sum-rate versus SNR, written to ssr_vs_snr.csv.
    SsrSweep,
    /// Run the property and oracle checks.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        methods: cli.methods.clone(),
    };
    let cfg = match config::load(cli.config.as_deref(), std::env::vars(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mli-dm: config error: {e}");
            return ExitCode::from(2);
        }
    };
    let command = match cli.command {
        Cmd::Design => Command::Design,
        Cmd::BerSweep => Command::BerSweep,
        Cmd::SsrSweep => Command::SsrSweep,
        Cmd::Validate => Command::Validate,
    };
    let opts = RunOptions {
        out_dir: cli.out,
        quiet: cli.quiet,
        plot: cli.plot,
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };

    let mut stdout = std::io::stdout();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(command, &cfg, &opts, &mut stdout)),
            Err(e) => {
                eprintln!("mli-dm: cannot start {n} worker threads: {e}");
                return ExitCode::from(1);
            }
        },
        None => run(command, &cfg, &opts, &mut stdout),
    };
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mli-dm {}: {e}", command.as_str());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
