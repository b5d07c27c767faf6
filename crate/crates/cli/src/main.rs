use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phi_spectrum_cli::problem::Options;
use phi_spectrum_cli::selftest::{selftest, SelftestOptions};
use phi_spectrum_cli::{parse_problem, run, GRAMMAR};

#[derive(Parser)]
#[command(name = "phispec", version, about = "Relative orders and spectra of group endomorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the queries in a problem file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run the built-in invariant and cross-backend checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add a group with a corrupted table; the run must then fail.
        #[arg(long, hide = true)]
        inject_corrupt_table: bool,
    },
    /// Print the problem file grammar.
    Formats,
}

#[derive(Args)]
struct Flags {
    /// Orbit search horizon.
    #[arg(long)]
    horizon: Option<u64>,
    /// Cap on cosets defined during enumeration.
    #[arg(long)]
    coset_cap: Option<usize>,
    /// Cap on the size of finite quotients.
    #[arg(long)]
    quotient_cap: Option<usize>,
    /// Use the fully invariant core instead of the endomorphism-invariant one.
    #[arg(long)]
    strict_invariant_core: bool,
    /// One JSON record per query and line.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Formats => {
            print!("{GRAMMAR}");
            ExitCode::SUCCESS
        }
        Command::Selftest {
            seed,
            inject_corrupt_table,
        } => {
            let report = selftest(SelftestOptions {
                seed,
                inject_corrupt_table,
            });
            print!("{report}");
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Run { file, flags } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return ExitCode::from(1);
                }
            };
            let problem = match parse_problem(&text) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return ExitCode::from(1);
                }
            };
            let overrides = Options {
                horizon: flags.horizon,
                coset_cap: flags.coset_cap,
                quotient_cap: flags.quotient_cap,
                strict_invariant_core: flags.strict_invariant_core,
            };
            let report = run(&problem, &overrides);
            if flags.json {
                print!("{}", report.json_lines());
            } else {
                print!("{}", report.human());
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
