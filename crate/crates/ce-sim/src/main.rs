use std::path::PathBuf;
use std::process::ExitCode;

use ce_core::{Dimensions, PrecoderConfig, UpdateRule};
use clap::{Args, Parser, Subcommand};

use ce_sim::config::parse_config;
use ce_sim::rate::{db_to_linear, RateConfig, RateError, RateEvaluator};
use ce_sim::selfcheck;
use ce_sim::sweep::{render_csv, run_sweep};

#[derive(Parser)]
#[command(name = "ce-sim", version, about = "Constant-envelope precoding simulator")]
struct Cli {
    /// Worker threads (default: all processors). The CE_SIM_THREADS
    /// environment variable overrides this flag. Results do not depend
    /// on the value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config-driven (N, alpha) sweep and write a CSV.
    Run {
        /// Path to a flat key=value config file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in oracle suites; nonzero exit on any failure.
    Selfcheck,
    /// Evaluate a single operating point (debugging aid).
    Rate(RateArgs),
}

#[derive(Args)]
struct RateArgs {
    /// Transmit antennas.
    #[arg(long = "N")]
    num_antennas: usize,
    /// Single-antenna users.
    #[arg(long = "M")]
    num_users: usize,
    /// Channel taps.
    #[arg(long = "L")]
    channel_taps: usize,
    /// Block length (channel uses per frame).
    #[arg(long = "T")]
    block_length: usize,
    /// Phase-increment bound in units of pi, in (0, 1].
    #[arg(long)]
    alpha: f64,
    /// Operating P_T/sigma^2 in dB.
    #[arg(long)]
    snr_db: f64,
    /// Common symbol energy E'. Omit to optimize it.
    #[arg(long)]
    energy: Option<f64>,
    /// Master seed for channel and symbol draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Symbol frames per channel realization (default max(200, 4T)).
    #[arg(long)]
    frames: Option<usize>,
    /// Channel realizations for the ergodic average.
    #[arg(long, default_value_t = 50)]
    channels: usize,
}

fn configure_threads(flag: Option<usize>) {
    let from_env = std::env::var("CE_SIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = from_env.or(flag) {
        // A later duplicate init is harmless; first one wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run_command(cmd: Command) -> Result<(), String> {
    match cmd {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read config {}: {e}", config.display()))?;
            let spec = parse_config(&text).map_err(|e| e.to_string())?;
            let rows = run_sweep(&spec).map_err(|e| e.to_string())?;
            let csv = render_csv(&spec, &rows);
            std::fs::write(&spec.output, &csv)
                .map_err(|e| format!("cannot write {}: {e}", spec.output.display()))?;
            eprintln!("wrote {} rows to {}", rows.len(), spec.output.display());
            Ok(())
        }
        Command::Selfcheck => {
            let results = selfcheck::run_suites(UpdateRule::Exact);
            println!("{:<36} {:>7} {:>9} {:>8}  status", "suite", "checks", "failures", "secs");
            for suite in &results {
                println!(
                    "{:<36} {:>7} {:>9} {:>8.2}  {}",
                    suite.name,
                    suite.checks,
                    suite.failures,
                    suite.seconds,
                    if suite.passed() { "pass" } else { "FAIL" }
                );
            }
            if selfcheck::all_passed(&results) {
                Ok(())
            } else {
                Err("selfcheck failed".to_string())
            }
        }
        Command::Rate(args) => {
            let dims = Dimensions::new(
                args.num_antennas,
                args.num_users,
                args.channel_taps,
                args.block_length,
            )
            .map_err(|e| e.to_string())?;
            let precoder = PrecoderConfig::with_alpha(args.alpha).map_err(|e| e.to_string())?;
            let config = RateConfig {
                snr: db_to_linear(args.snr_db),
                frames_per_channel: args
                    .frames
                    .unwrap_or_else(|| 200.max(4 * args.block_length)),
                num_channels: args.channels,
                target_rate: 0.0,
            };
            let evaluator = RateEvaluator::new(dims, precoder, config, args.seed)
                .map_err(|e: RateError| e.to_string())?;
            let (energy, rate) = match args.energy {
                Some(e) => {
                    let r = evaluator
                        .per_user_ergodic_rate(e, config.snr)
                        .map_err(|e| e.to_string())?;
                    (e, r)
                }
                None => evaluator
                    .optimize_symbol_energy(config.snr)
                    .map_err(|e| e.to_string())?,
            };
            println!("snr_db = {}", args.snr_db);
            println!("energy = {energy}");
            println!("rate_bpcu = {rate}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
