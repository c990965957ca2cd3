//! Command-line arguments and the validated [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgraph_core::fixtures::{self, RandomGraphParams};
use kgraph_core::{Degree, Path, Skeleton, SkeletonDoc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "kgraph",
    version,
    about = "Validate k-graph skeletons and check their Toeplitz-Cuntz-Krieger families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Skeleton JSON file.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Built-in skeleton used instead of --input.
    #[arg(long, global = true, value_enum)]
    pub fixture: Option<FixtureName>,
    /// Parameter of the ex43 fixture.
    #[arg(long, global = true, default_value_t = 2)]
    pub m: usize,
    /// Loops per color for the loops and free2 fixtures.
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,
    /// Degree bound N as comma-separated coordinates.
    #[arg(long, global = true, value_name = "a,b,...")]
    pub bound: Option<String>,
    /// Tolerance for iterative norm estimates.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed for the random fixture and for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the skeleton axioms.
    Validate,
    /// Minimal common extensions of two paths.
    Mce { mu: String, nu: String },
    /// The closure of a path set under minimal common extensions.
    Vee {
        #[arg(required = true)]
        paths: Vec<String>,
    },
    /// Generator-pair and bounded finite-alignment statistics.
    Align,
    /// Relations, Nica products, partition and removal identities.
    Check {
        /// Number of sampled path sets.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// The product of complements of finite range projections at a vertex.
    Faithful {
        #[arg(long)]
        vertex: String,
        /// A degree and its paths, as `a,b=path,path`; repeatable.
        #[arg(long = "set", value_name = "DEG=PATHS")]
        sets: Vec<String>,
    },
    /// Print a built-in skeleton as JSON.
    Fixture,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    Ex43,
    Loops,
    Free2,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Debug)]
pub enum Input {
    File(PathBuf),
    Fixture(FixtureName),
}

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: Input,
    pub m: usize,
    pub n: usize,
    pub bound: Option<Degree>,
    pub tol: f64,
    pub seed: u64,
    pub format: Format,
}

impl RunConfig {
    pub fn from_args(args: CommonArgs) -> Result<Self, CliError> {
        let input = match (args.input, args.fixture) {
            (Some(p), None) => Input::File(p),
            (None, Some(f)) => Input::Fixture(f),
            (None, None) => return Err(CliError::Usage("one of --input or --fixture is required".into())),
            (Some(_), Some(_)) => return Err(CliError::Usage("--input and --fixture are exclusive".into())),
        };
        if !(args.tol > 0.0 && args.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", args.tol)));
        }
        if args.m == 0 || args.n == 0 {
            return Err(CliError::Usage("--m and --n must be at least 1".into()));
        }
        let bound = args
            .bound
            .map(|b| b.parse::<Degree>().map_err(|e| CliError::Usage(e.to_string())))
            .transpose()?;
        Ok(RunConfig {
            input,
            m: args.m,
            n: args.n,
            bound,
            tol: args.tol,
            seed: args.seed,
            format: args.format,
        })
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// The skeleton document, before any validation.
    pub fn document(&self) -> Result<SkeletonDoc, CliError> {
        match &self.input {
            Input::File(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("parse error: {e}")))
            }
            Input::Fixture(FixtureName::Ex43) => Ok(fixtures::ex43_doc(self.m)),
            Input::Fixture(FixtureName::Loops) => Ok(fixtures::loops_doc(self.n)),
            Input::Fixture(FixtureName::Free2) => Ok(fixtures::free_doc(self.n, 2)),
            Input::Fixture(FixtureName::Random) => {
                Ok(fixtures::random_2graph_doc(&mut self.rng(), &RandomGraphParams::default()))
            }
        }
    }

    /// The validated skeleton; any axiom failure is a validation error.
    pub fn skeleton(&self) -> Result<Skeleton, CliError> {
        Skeleton::from_doc(&self.document()?).map_err(|e| CliError::Invalid(e.to_string()))
    }

    /// The bound, defaulting to `(2, ..., 2)`, checked against the rank.
    pub fn bound_for(&self, sk: &Skeleton) -> Result<Degree, CliError> {
        let bound = self
            .bound
            .clone()
            .unwrap_or_else(|| Degree::from_coords(vec![2; sk.k()]));
        if bound.rank() != sk.k() {
            return Err(CliError::Usage(format!(
                "--bound has {} coordinates but the skeleton has k = {}",
                bound.rank(),
                sk.k()
            )));
        }
        Ok(bound)
    }
}

pub fn parse_path(sk: &Skeleton, literal: &str) -> Result<Path, CliError> {
    sk.parse_path(literal)
        .map_err(|e| CliError::Usage(format!("unknown path literal {literal:?}: {e}")))
}

/// Parses `a,b=p,q` into a degree and its paths; an empty right side is the
/// empty set.
pub fn parse_set(sk: &Skeleton, text: &str) -> Result<(Degree, Vec<Path>), CliError> {
    let (deg, paths) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("malformed set {text:?}: expected DEG=PATHS")))?;
    let deg: Degree = deg
        .trim()
        .parse()
        .map_err(|e: kgraph_core::DegreeError| CliError::Usage(format!("malformed set {text:?}: {e}")))?;
    let paths = paths
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_path(sk, s))
        .collect::<Result<_, _>>()?;
    Ok((deg, paths))
}
