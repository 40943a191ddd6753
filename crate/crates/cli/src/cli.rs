use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jps_core::coeffs::Functional;
use jps_core::mcverify::Suite;
use jps_core::{DistributionSpec, GFunction, Ranker, WeightScheme};

#[derive(Debug, Parser)]
#[command(name = "jps", version, about = "Judgment post-stratification estimation toolkit")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    Jps,
    Brss,
    Srs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Mean,
    Variance,
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Vs {
    Srs,
    Brss,
    Ff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Table1,
    Table2,
    Table3,
    Table4,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoeffMethod {
    Auto,
    Enumerate,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankByArg {
    X,
    Y,
}

fn parse_dist(s: &str) -> Result<DistributionSpec, String> {
    s.parse().map_err(|e: jps_core::Error| e.to_string())
}

fn parse_g(s: &str) -> Result<GFunction, String> {
    s.parse().map_err(|e: jps_core::Error| e.to_string())
}

fn parse_scheme(s: &str) -> Result<WeightScheme, String> {
    s.parse().map_err(|e: jps_core::Error| e.to_string())
}

fn parse_ranker(s: &str) -> Result<Ranker, String> {
    s.parse().map_err(|e: jps_core::Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: jps_core::Error| e.to_string())
}

fn parse_functional(s: &str) -> Result<Functional, String> {
    s.parse().map_err(|e: jps_core::Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NList(pub Vec<u64>);

/// `a:b:step` or a comma list.
pub fn parse_n_list(s: &str) -> Result<NList, String> {
    let bad = |_| format!("bad n-list `{s}` (use a:b:step or a,b,c)");
    let parts: Vec<&str> = s.split(':').collect();
    let list: Vec<u64> = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (u64, u64, u64) =
                (a.parse().map_err(bad)?, b.parse().map_err(bad)?, step.parse().map_err(bad)?);
            if step == 0 || a > b {
                return Err(format!("bad n-list `{s}`"));
            }
            (a..=b).step_by(step as usize).collect()
        }
        [_] => s.split(',').map(|t| t.trim().parse().map_err(bad)).collect::<Result<_, _>>()?,
        _ => return Err(format!("bad n-list `{s}`")),
    };
    if list.contains(&0) {
        return Err("n must be positive".into());
    }
    Ok(NList(list))
}

fn positive(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one sample and write its rows.
    Simulate {
        #[arg(long, value_enum, default_value_t = Design::Jps)]
        design: Design,
        #[arg(long, value_parser = parse_dist)]
        dist: DistributionSpec,
        /// Measured units (JPS, SRS).
        #[arg(long, value_parser = positive)]
        n: Option<u64>,
        /// Cycles (BRSS).
        #[arg(long, value_parser = positive)]
        m: Option<u64>,
        #[arg(long, value_parser = positive, default_value_t = 3)]
        h: u64,
        #[arg(long, value_parser = parse_ranker, default_value = "perfect")]
        ranker: Ranker,
    },
    /// Estimate from a CSV file with `x,rank` columns.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = positive)]
        h: u64,
        #[arg(long, value_parser = parse_scheme, default_value = "jps")]
        scheme: WeightScheme,
        #[arg(long, value_enum, default_value_t = Target::Mean)]
        target: Target,
        #[arg(long, value_parser = parse_g, default_value = "identity")]
        g: GFunction,
        /// Evaluation points for `--target cdf`.
        #[arg(long, value_delimiter = ',')]
        at: Vec<f64>,
    },
    /// Weight-scheme coefficients for (n, H).
    Coeffs {
        #[arg(long, value_parser = parse_scheme)]
        scheme: WeightScheme,
        #[arg(long, value_parser = positive)]
        n: u64,
        #[arg(long, value_parser = positive)]
        h: u64,
        #[arg(long, value_enum, default_value_t = CoeffMethod::Auto)]
        method: CoeffMethod,
        #[arg(long, value_parser = positive, default_value_t = jps_core::coeffs::DEFAULT_MC_REPS)]
        reps: u64,
        /// Simulate a single functional instead of the full set.
        #[arg(long, value_parser = parse_functional)]
        functional: Option<Functional>,
    },
    /// Judgment-stratum moments of g(X).
    Moments {
        #[arg(long, value_parser = parse_dist)]
        dist: DistributionSpec,
        #[arg(long, value_parser = parse_g, default_value = "identity")]
        g: GFunction,
        #[arg(long, value_parser = positive)]
        h: u64,
        #[arg(long, value_enum, default_value_t = RankByArg::X)]
        rank_by: RankByArg,
        #[arg(long, value_parser = positive, default_value_t = 10_000_000)]
        reps: u64,
    },
    /// Relative efficiency of one design against another.
    Re {
        #[arg(long, value_enum)]
        vs: Vs,
        #[arg(long, value_parser = parse_scheme, default_value = "jps")]
        scheme: WeightScheme,
        #[arg(long, value_parser = parse_dist)]
        dist: DistributionSpec,
        #[arg(long, value_parser = parse_g, default_value = "identity")]
        g: GFunction,
        #[arg(long, value_parser = positive)]
        n: u64,
        #[arg(long, value_parser = positive)]
        hj: u64,
        /// BRSS class size; defaults to `--hj`.
        #[arg(long, value_parser = positive)]
        hb: Option<u64>,
    },
    /// Efficiency tables and figure data.
    ReTable {
        #[arg(long, value_enum)]
        which: Which,
        /// Restrict rows to these distributions.
        #[arg(long, value_parser = parse_dist)]
        dist: Vec<DistributionSpec>,
        #[arg(long, value_parser = positive, default_value_t = jps_core::tables::DEFAULT_H_MAX as u64)]
        h_max: u64,
    },
    /// Class size maximising the 2-dp rounded RE against SRS.
    OptimalH {
        #[arg(long, value_parser = parse_dist)]
        dist: DistributionSpec,
        #[arg(long, value_parser = parse_n_list, default_value = "5:50:5")]
        n_list: NList,
        #[arg(long, value_parser = positive, default_value_t = jps_core::tables::DEFAULT_H_MAX as u64)]
        h_max: u64,
        #[arg(long, value_parser = parse_scheme, default_value = "jps")]
        scheme: WeightScheme,
    },
    /// Monte Carlo verification suites.
    Verify {
        #[arg(long, value_parser = parse_suite, default_value = "all")]
        suite: Suite,
        #[arg(long, value_parser = positive)]
        reps: Option<u64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Estimate { .. } => "estimate",
            Command::Coeffs { .. } => "coeffs",
            Command::Moments { .. } => "moments",
            Command::Re { .. } => "re",
            Command::ReTable { .. } => "re-table",
            Command::OptimalH { .. } => "optimal-h",
            Command::Verify { .. } => "verify",
        }
    }
}

pub const SUBCOMMANDS: [&str; 8] = ["simulate", "estimate", "coeffs", "moments", "re", "re-table", "optimal-h", "verify"];
