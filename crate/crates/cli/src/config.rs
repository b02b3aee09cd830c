//! Command-line grammar and the validated run configuration.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use smva_core::Alternative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsChoice {
    Binary,
    Row,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// axis, eigenvalue, share
    Screeplot,
    /// variable, axis1, axis2 (correlations with the scores)
    Circle,
    /// id, s1, s2, ...
    Scores,
    /// id, s1, s2, lag_s1, lag_s2
    Arrows,
    /// id, z, z_lag, cooks_d
    Scatter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    Greater,
    Less,
    TwoSided,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
            AlternativeArg::TwoSided => Alternative::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Pca,
    Bca,
    Poly,
    Mem,
    Ms,
}

impl Analysis {
    pub fn label(self) -> &'static str {
        match self {
            Analysis::Pca => "PCA",
            Analysis::Bca => "BCA",
            Analysis::Poly => "POLY",
            Analysis::Mem => "MEM",
            Analysis::Ms => "MS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Principal component analysis of the standardized table
    Pca,
    /// Between-class analysis on the partition
    Bca,
    /// PCA on instrumental variables: orthogonal polynomial of the coordinates
    PcaivPoly,
    /// PCA on instrumental variables: leading Moran's eigenvector maps
    PcaivMem,
    /// Multivariate spatial analysis based on Moran's index
    Multispati,
    /// Moran's coefficient with a permutation test, for each variable
    Moran {
        /// Restrict to one variable
        #[arg(long)]
        variable: Option<String>,
        #[arg(long, value_enum, default_value = "greater")]
        alternative: AlternativeArg,
    },
    /// Moran scatterplot data of one variable
    MoranScatter {
        #[arg(long)]
        variable: String,
    },
    /// Moran's eigenvector maps of the weights
    Mem,
    /// Attainable range of Moran's coefficient for the weights
    McBounds,
    /// Pairwise Procrustes concordance of analysis scores
    Procrustes {
        /// Analyses to compare
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "pca,bca,poly,mem,ms"
        )]
        analyses: Vec<Analysis>,
    },
    /// Every headline number of the bundled example in one document
    ReproducePaper,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pca => "pca",
            Command::Bca => "bca",
            Command::PcaivPoly => "pcaiv-poly",
            Command::PcaivMem => "pcaiv-mem",
            Command::Multispati => "multispati",
            Command::Moran { .. } => "moran",
            Command::MoranScatter { .. } => "moran-scatter",
            Command::Mem => "mem",
            Command::McBounds => "mc-bounds",
            Command::Procrustes { .. } => "procrustes",
            Command::ReproducePaper => "reproduce-paper",
        }
    }
}

/// Spatially constrained multivariate analysis.
///
/// Without --data the bundled 85-département example is used, together with
/// its border graph, regions and centroids.
#[derive(Debug, Parser)]
#[command(name = "smva", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Dataset CSV: header row, id in the first column
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Edge list: two ids per line
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    /// Partition CSV: id,group
    #[arg(long, global = true)]
    partition: Option<PathBuf>,
    /// Coordinates CSV: id,x,y
    #[arg(long, global = true)]
    coords: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 999, value_parser = clap::value_parser!(u64).range(1..))]
    permutations: u64,
    /// Defaults to $SMVA_SEED, then 0
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    axes: u64,
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=3))]
    degree: u64,
    #[arg(long, global = true, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    mem_count: u64,
    #[arg(long, global = true, value_enum, default_value = "row")]
    weights: WeightsChoice,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit plot data of this kind (CSV) instead of the report
    #[arg(long, global = true, value_enum)]
    plot: Option<PlotKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub data: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub partition: Option<PathBuf>,
    pub coords: Option<PathBuf>,
    pub permutations: usize,
    pub seed: u64,
    pub axes: usize,
    pub degree: usize,
    pub mem_count: usize,
    pub weights: WeightsChoice,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub plot: Option<PlotKind>,
}

impl RunConfig {
    /// Configuration with every default for `command`.
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            data: None,
            edges: None,
            partition: None,
            coords: None,
            permutations: 999,
            seed: 0,
            axes: 2,
            degree: 2,
            mem_count: 10,
            weights: WeightsChoice::Row,
            format: Format::Json,
            out: None,
            plot: None,
        }
    }
}

pub enum Parsed {
    Run(Box<RunConfig>),
    /// Help or version text, printed with success.
    Info(String),
    /// Usage error with its message.
    Usage(String),
}

/// Parse arguments; `env_seed` is the value of `SMVA_SEED`, if set.
pub fn parse_args<I, T>(args: I, env_seed: Option<String>) -> Parsed
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Parsed::Info(text),
                _ => Parsed::Usage(text),
            };
        }
    };
    let seed = match (cli.seed, env_seed) {
        (Some(s), _) => s,
        (None, Some(v)) => match v.trim().parse() {
            Ok(s) => s,
            Err(_) => {
                return Parsed::Usage(format!(
                    "error: SMVA_SEED `{v}` is not an unsigned integer\n"
                ))
            }
        },
        (None, None) => 0,
    };
    Parsed::Run(Box::new(RunConfig {
        command: cli.command,
        data: cli.data,
        edges: cli.edges,
        partition: cli.partition,
        coords: cli.coords,
        permutations: cli.permutations as usize,
        seed,
        axes: cli.axes as usize,
        degree: cli.degree as usize,
        mem_count: cli.mem_count as usize,
        weights: cli.weights,
        format: cli.format,
        out: cli.out,
        plot: cli.plot,
    }))
}
