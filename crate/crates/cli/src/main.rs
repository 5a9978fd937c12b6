//! `baker`: experiments on the irreversible baker map family.
//!
//! Exit codes: 0 success, 1 usage or i/o error, 2 numeric or convergence
//! failure, 3 self-test failure.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Selftest(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Selftest(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Selftest(m) => write!(f, "self-test failure: {m}"),
        }
    }
}

impl From<baker_core::Error> for CliError {
    fn from(e: baker_core::Error) -> Self {
        match e {
            baker_core::Error::Io(m) => CliError::Usage(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Value enums double as config-file values, so they parse and print through clap.
macro_rules! value_enum_str {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <Self as ValueEnum>::from_str(s, false)
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
            }
        }
    )*};
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Reversible,
    Irreversible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Mc,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Q4,
    Q3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Equilibrium,
    Stationary,
}

/// Cell layout for π_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// `paired` for exact lattice input, `atoms` on the raw axis, else `tiling`.
    Auto,
    /// Cells of width 2δ centred on multiples of 2δ.
    Tiling,
    /// One cell per lattice atom.
    Atoms,
    /// Cells of an even number of atoms, width close to 2δ.
    Paired,
}

value_enum_str!(Variant, Source, Scheme, Mode, Grid);

#[derive(Parser, Debug)]
#[command(
    name = "baker",
    version,
    about = "Baker map ensembles, fluctuation statistics and transport"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// Width of region A, in (0, 1/4].
    #[arg(long)]
    ell: Option<f64>,
    /// Dissipation parameter, in [0, 1/2).
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// Left edge of the flip strip (default ell).
    #[arg(long)]
    strip_x: Option<f64>,
    /// Width of the flip strip (default 1/2 - ell).
    #[arg(long)]
    strip_eps: Option<f64>,
    /// Segment length.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_ens: Option<usize>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Half-width of the π_n cells.
    #[arg(long)]
    delta: Option<f64>,
    /// Histogram bins per axis.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, value_enum)]
    source: Option<Source>,
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    /// Output directory.
    #[arg(long, default_value = "baker-out")]
    out: PathBuf,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct FrArgs {
    #[arg(long, value_enum)]
    grid: Option<Grid>,
    /// Largest |p| on the grid.
    #[arg(long)]
    p_max: Option<f64>,
    /// Minimum Monte Carlo count for a cell to enter the check.
    #[arg(long)]
    min_count: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariant density histogram and marginals.
    Density {
        #[command(flatten)]
        common: Common,
    },
    /// Mean contraction rate over an (ell, q) grid.
    Surface {
        #[command(flatten)]
        common: Common,
        /// Grid points in ell, at ell = i / (4 k) for i = 1..k (ignored with --ell).
        #[arg(long)]
        ell_points: Option<usize>,
        /// Grid points in q, at q = j / (2 k) for j = 0..k-1 (ignored with --q).
        #[arg(long)]
        q_points: Option<usize>,
    },
    /// π_n and the fluctuation relation check.
    Fr {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fr: FrArgs,
    },
    /// π_n, the rate function ζ_n and its parabola fit.
    Ratefunc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fr: FrArgs,
    },
    /// Coarse detailed-balance report.
    Db {
        #[command(flatten)]
        common: Common,
    },
    /// Green-Kubo estimate, exact coarse-chain sum and optional bias sweep.
    Transport {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Comma separated bias values for a sweep.
        #[arg(long, allow_hyphen_values = true)]
        biases: Option<String>,
    },
    /// Analytic invariant battery.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

fn put<T: ToString>(map: &mut BTreeMap<String, String>, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v.to_string());
    }
}

impl Common {
    fn flag_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        put(&mut m, "ell", &self.ell);
        put(&mut m, "q", &self.q);
        put(&mut m, "variant", &self.variant);
        put(&mut m, "strip-x", &self.strip_x);
        put(&mut m, "strip-eps", &self.strip_eps);
        put(&mut m, "n", &self.n);
        put(&mut m, "n-ens", &self.n_ens);
        put(&mut m, "n-iter", &self.n_iter);
        put(&mut m, "burn-in", &self.burn_in);
        put(&mut m, "seed", &self.seed);
        put(&mut m, "delta", &self.delta);
        put(&mut m, "bins", &self.bins);
        put(&mut m, "source", &self.source);
        put(&mut m, "scheme", &self.scheme);
        m
    }
}

impl FrArgs {
    fn extend(&self, m: &mut BTreeMap<String, String>) {
        put(m, "grid", &self.grid);
        put(m, "p-max", &self.p_max);
        put(m, "min-count", &self.min_count);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, mut flags) = match &cli.command {
        Command::Density { common } | Command::Db { common } | Command::Selftest { common } => {
            (cli.command.name(), common, common.flag_map())
        }
        Command::Surface {
            common,
            ell_points,
            q_points,
        } => {
            let mut m = common.flag_map();
            put(&mut m, "ell-points", ell_points);
            put(&mut m, "q-points", q_points);
            ("surface", common, m)
        }
        Command::Fr { common, fr } | Command::Ratefunc { common, fr } => {
            let mut m = common.flag_map();
            fr.extend(&mut m);
            (cli.command.name(), common, m)
        }
        Command::Transport {
            common,
            mode,
            biases,
        } => {
            let mut m = common.flag_map();
            put(&mut m, "mode", mode);
            put(&mut m, "biases", biases);
            ("transport", common, m)
        }
    };
    flags.retain(|_, v| !v.is_empty());
    let settings = config::Settings::new(flags, common.config.as_deref())?;
    commands::run(name, settings, &common.out)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Density { .. } => "density",
            Command::Surface { .. } => "surface",
            Command::Fr { .. } => "fr",
            Command::Ratefunc { .. } => "ratefunc",
            Command::Db { .. } => "db",
            Command::Transport { .. } => "transport",
            Command::Selftest { .. } => "selftest",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("baker: {e}");
            ExitCode::from(e.code())
        }
    }
}
