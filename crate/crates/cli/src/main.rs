//! `rdpp` — simulate, estimate and verify the stochastic ratio-dependent
//! predator-prey model from a flat key-value config file.
//!
//! Exit status: 0 = PASS, 1 = FAIL, 2 = INCONCLUSIVE (from `verify`;
//! other subcommands exit 0 on success), 3 = usage error, 4 = config error,
//! 5 = precondition violation, 6 = I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rdpp::verify::TheoremId;
use rdpp_cli::commands::{cmd_convergence, cmd_ensemble, cmd_simulate, cmd_verify};
use rdpp_cli::config::{parse_config, RunManifest};

#[derive(Parser, Debug)]
#[command(
    name = "rdpp",
    version,
    about = "Stochastic ratio-dependent predator-prey simulator and bound checker",
    disable_help_subcommand = true
)]
struct Cli {
    /// Configuration file (flat `key = value` format).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override (config key `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Ensemble size override (config key `paths`).
    #[arg(long, global = true)]
    paths: Option<u64>,

    /// Output directory for emitted files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads (0 = auto).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Integrate a single path and write `path.csv`.
    Simulate,
    /// Run an ensemble and write `moments.csv`.
    Ensemble,
    /// Run one verification harness and write `report_<theorem_id>.txt`.
    Verify {
        /// One of T2_1_POSITIVITY, T3_2_MOMENT_ENVELOPE, T3_3_MOMENT_BOUND,
        /// T4_1_LOGGROWTH, T4_3_PREDATOR_EXTINCTION, T4_4_PREY_SOLO.
        theorem_id: String,
    },
    /// Estimate the strong convergence order and write `order.csv`.
    Convergence,
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return 3;
        }
    };

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("rdpp: cannot configure {} threads: {e}", cli.threads);
            return 3;
        }
    }

    let Some(config_path) = cli.config else {
        eprintln!("rdpp: --config <path> is required");
        return 3;
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("rdpp: cannot read {}: {e}", config_path.display());
            return 6;
        }
    };
    let mut parsed = match parse_config(&text) {
        Ok(parsed) => parsed,
        Err(e) => {
            eprintln!("rdpp: {}: {e}", config_path.display());
            return 4;
        }
    };
    if let Some(seed) = cli.seed {
        parsed.seed = seed;
    }
    if let Some(paths) = cli.paths {
        parsed.harness.n_paths = paths;
    }
    let manifest = RunManifest::new(parsed, cli.out);

    let outcome = match &cli.command {
        Cmd::Simulate => cmd_simulate(&manifest).map(|path| {
            println!("wrote {}", path.display());
            0
        }),
        Cmd::Ensemble => cmd_ensemble(&manifest).map(|path| {
            println!("wrote {}", path.display());
            0
        }),
        Cmd::Convergence => cmd_convergence(&manifest).map(|path| {
            println!("wrote {}", path.display());
            0
        }),
        Cmd::Verify { theorem_id } => {
            let id: TheoremId = match theorem_id.parse() {
                Ok(id) => id,
                Err(e) => {
                    eprintln!("rdpp: {e}");
                    return 3;
                }
            };
            cmd_verify(&manifest, id).map(|(report, files)| {
                for f in files {
                    println!("wrote {}", f.display());
                }
                println!("{} verdict: {}", id, report.verdict);
                report.verdict.exit_code()
            })
        }
    };

    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rdpp: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(u8::try_from(run()).unwrap_or(5))
}
