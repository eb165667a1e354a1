//! `qrwd`: weight distributions of binary quadratic residue codes.

mod artifact;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qrwd::census::CensusError;
use qrwd::congruence::CongruenceError;

#[derive(Parser, Debug)]
#[command(
    name = "qrwd",
    version,
    about = "Weight distributions of binary quadratic residue codes"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Prime code length.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Directory for JSON artifacts; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for enumeration.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Lift the enumeration budgets.
    #[arg(long, global = true)]
    pub long_run: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the code family and report its parameters and generators.
    Construct,
    /// Report the group order and the subgroup generators.
    Group,
    /// Invariant subcodes, their weight counts and the combined congruences.
    Congruence {
        /// Even weights, as `a..b` (inclusive) or a single weight.
        #[arg(long)]
        weights: String,
    },
    /// Print the shard manifest for C(s, t) in blocks of M.
    ShardPlan {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
        #[arg(long = "M", alias = "block-size")]
        block_size: u64,
    },
    /// Count codewords of weight at most 2t.
    Census {
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = qrwd::census::DEFAULT_BLOCK_SIZE)]
        block_size: u64,
        /// Run a single work unit of the plan.
        #[arg(long, requires = "emit_fragment")]
        shard_index: Option<usize>,
        /// File receiving the fragment of `--shard-index`.
        #[arg(long, requires = "shard_index")]
        emit_fragment: Option<PathBuf>,
    },
    /// Merge census fragments into a census.
    CensusMerge {
        #[arg(required = true)]
        fragments: Vec<PathBuf>,
    },
    /// Complete the distribution from low-weight counts.
    Solve {
        /// Census artifact supplying low-weight counts.
        #[arg(long)]
        census: Option<PathBuf>,
        /// Extra counts `weight=count`, overriding the census.
        #[arg(long = "inject-a", value_parser = parse_injection)]
        inject: Vec<(usize, String)>,
        /// Declares A_w = 0 for 0 < w < d where not otherwise given.
        #[arg(long)]
        min_distance: Option<usize>,
        /// Congruence artifact (or bare constraint) for the top weight.
        #[arg(long)]
        constraint: Option<PathBuf>,
    },
    /// Re-run every invariant check on a stored distribution.
    Verify {
        #[arg(long)]
        table: PathBuf,
    },
    /// construct, congruence, census, solve and verify in sequence.
    Pipeline {
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = qrwd::census::DEFAULT_BLOCK_SIZE)]
        block_size: u64,
    },
    /// Replay the p = 137 derivation from the bundled published values.
    PaperRegression {
        /// Alternative fixture file.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Shift a published exact count, `weight=delta`.
        #[arg(long, value_parser = parse_shift)]
        perturb: Option<(usize, i64)>,
        /// Replace the top-weight congruence with the one below it.
        #[arg(long)]
        swap_top_congruence: bool,
    },
}

fn parse_injection(s: &str) -> Result<(usize, String), String> {
    let (w, c) = s.split_once('=').ok_or("expected weight=count")?;
    let w = w.trim().parse().map_err(|_| format!("bad weight {w:?}"))?;
    let c = c.trim();
    c.parse::<num_bigint::BigInt>()
        .map_err(|_| format!("bad count {c:?}"))?;
    Ok((w, c.to_string()))
}

fn parse_shift(s: &str) -> Result<(usize, i64), String> {
    let (w, d) = s.split_once('=').ok_or("expected weight=delta")?;
    Ok((
        w.trim().parse().map_err(|_| format!("bad weight {w:?}"))?,
        d.trim().parse().map_err(|_| format!("bad delta {d:?}"))?,
    ))
}

/// How a command failed, which selects the exit status.
#[derive(Debug)]
pub enum Failure {
    Check(String),
    Usage(String),
    Budget(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Budget(m) => m,
        }
    }

    /// Prefixes the message with the stage that failed.
    pub fn at(self, stage: &str) -> Self {
        match self {
            Failure::Check(m) => Failure::Check(format!("{stage}: {m}")),
            Failure::Usage(m) => Failure::Usage(format!("{stage}: {m}")),
            Failure::Budget(m) => Failure::Budget(format!("{stage}: {m}")),
        }
    }
}

impl From<qrwd::Error> for Failure {
    fn from(e: qrwd::Error) -> Self {
        use qrwd::Error as E;
        let msg = e.to_string();
        match e {
            E::Census(CensusError::BudgetExceeded { .. }) | E::Congruence(CongruenceError::BudgetExceeded { .. }) => {
                Failure::Budget(msg)
            }
            E::Code(_) | E::Group(_) | E::Fixture(_) => Failure::Usage(msg),
            E::Gleason(qrwd::gleason::GleasonError::UnsupportedPrime { .. }) => Failure::Usage(msg),
            _ => Failure::Check(msg),
        }
    }
}

macro_rules! impl_failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                qrwd::Error::from(e).into()
            }
        }
    )*};
}
impl_failure_from!(
    qrwd::qrcode::QrCodeError,
    qrwd::psl2::Psl2Error,
    CongruenceError,
    CensusError,
    qrwd::gleason::GleasonError,
    qrwd::fixtures::FixtureError
);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
