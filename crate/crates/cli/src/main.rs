//! `oligo`: command-line access to the finite invariants.
//!
//! Exit codes: 0 on success or PASS, 2 on FAIL (a certificate is printed),
//! 3 on INCONCLUSIVE, 1 on errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use oligo_core::groupoid::Policy;
use oligo_core::Error;

use oligo_cli::caps::CapArgs;
use oligo_cli::commands::{self, Context};
use oligo_cli::report;

#[derive(Parser, Debug)]
#[command(name = "oligo", version, about = "Finite invariants of homogeneous structures and their automorphism groups")]
struct Cli {
    /// What to print: the text report, the JSON mirror, or both
    #[arg(long, value_enum, default_value = "text", global = true)]
    output: OutputMode,
    /// Check amalgamation over bases up to this size and warn on failures
    #[arg(long, global = true, value_name = "SIZE")]
    check_amalgamation: Option<usize>,
    #[command(flatten)]
    caps: CapArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputMode {
    Text,
    Json,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Points,
    Essential,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::Points => Policy::PointStabilizers,
            PolicyArg::Essential => Policy::EssentialSubgroups,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count tuple orbits of each arity up to --arity
    Orbits {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        /// Print every orbit
        #[arg(long)]
        list: bool,
    },
    /// Orbit relabelings realized by automorphisms of the reduct, level by level
    Normalizer {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        arity: usize,
    },
    /// Algebraic closure of each orbit of the given arity
    Acl {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        arity: usize,
    },
    /// Decide no algebraicity over parameter tuples up to --arity
    NoAlgebraicity {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        arity: usize,
    },
    /// Merge the one-point orbits into a transitive structure
    Merge {
        file: PathBuf,
        /// Also search the merged structure for an algebraicity witness
        #[arg(long)]
        witness: bool,
    },
    /// Definable equivalences on tuples of the given arity
    Imaginaries {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        arity: usize,
    },
    /// Lattice of open subgroups above each tuple stabilizer
    Subgroups {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        arity: usize,
    },
    /// Classify subgroups above tuple stabilizers as irreducible or essential
    Essential {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        arity: usize,
    },
    /// Weak elimination of imaginaries for subgroups above tuple stabilizers
    Wei {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        arity: usize,
    },
    /// Coset-groupoid fingerprint over small acl-closed configurations
    Fingerprint {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "points")]
        policy: PolicyArg,
    },
    /// Compare two fingerprints; exit 2 when they differ
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value = "points")]
        policy: PolicyArg,
    },
    /// Emit the coset fragment of one acl-closed configuration as JSON
    Fragment {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "points")]
        policy: PolicyArg,
        /// Size of the configuration
        #[arg(long, default_value_t = 3)]
        size: usize,
        /// Which configuration of that size, in enumeration order
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Test whether a fragment automorphism can be inner, to a given depth
    InnCheck {
        /// Fragment JSON, as written by `fragment --output json`
        fragment: PathBuf,
        /// JSON object `{"images": [...]}`
        automorphism: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Accept permutations that do not preserve the fragment structure
        #[arg(long)]
        unchecked: bool,
    },
    /// The exponent-3 group with a non-inner limit of inner automorphisms
    Wu {
        #[command(subcommand)]
        action: WuAction,
    },
}

#[derive(Subcommand, Debug)]
enum WuAction {
    /// Run the full suite and print its certificates
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        support: usize,
        #[arg(long, default_value_t = 16)]
        max_k: usize,
    },
}

fn run(cli: Cli) -> oligo_core::Result<report::Report> {
    let mut cx = Context::new(cli.caps, cli.check_amalgamation);
    match cli.command {
        Command::Orbits { file, arity, list } => commands::orbits(&mut cx, &file, arity, list),
        Command::Normalizer { file, arity } => commands::normalizer(&mut cx, &file, arity),
        Command::Acl { file, arity } => commands::acl(&mut cx, &file, arity),
        Command::NoAlgebraicity { file, arity } => commands::no_algebraicity(&mut cx, &file, arity),
        Command::Merge { file, witness } => commands::merge(&mut cx, &file, witness),
        Command::Imaginaries { file, arity } => commands::imaginaries(&mut cx, &file, arity),
        Command::Subgroups { file, arity } => commands::subgroups(&mut cx, &file, arity),
        Command::Essential { file, arity } => commands::essential(&mut cx, &file, arity),
        Command::Wei { file, arity } => commands::wei(&mut cx, &file, arity),
        Command::Fingerprint { file, policy } => commands::fingerprint_cmd(&mut cx, &file, policy.into()),
        Command::Compare { first, second, policy } => commands::compare(&mut cx, &first, &second, policy.into()),
        Command::Fragment {
            file,
            policy,
            size,
            index,
        } => commands::fragment(&mut cx, &file, policy.into(), size, index),
        Command::InnCheck {
            fragment,
            automorphism,
            depth,
            unchecked,
        } => commands::inn_check(&mut cx, &fragment, &automorphism, depth, unchecked),
        Command::Wu {
            action:
                WuAction::Verify {
                    seed,
                    samples,
                    support,
                    max_k,
                },
        } => commands::wu_verify(&mut cx, seed, samples, support, max_k),
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::Validation(problems) => {
            let mut s = String::from("invalid presentation:");
            for p in problems {
                s += &format!("\n  - {p}");
            }
            s
        }
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = cli.output;
    match run(cli) {
        Ok(report) => {
            match mode {
                OutputMode::Text => print!("{}", report.text),
                OutputMode::Json => println!("{}", report.to_json()),
                OutputMode::Both => {
                    print!("{}", report.text);
                    println!("{}", report.to_json());
                }
            }
            ExitCode::from(report.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}
