use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pud_cli::commands::{self, QuerySpec, RankingFlags};
use pud_cli::index::DescriptorKind;
use pud_cli::CliError;
use pud_core::{Protocol, RankMethod, SolverKind};

/// Perceptual-uniform descriptor extraction and manifold-ranking retrieval.
#[derive(Parser)]
#[command(name = "pud", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a dataset directory or manifest file and validate every entry
    Ingest {
        /// Dataset directory (class per subdirectory) or TSV manifest file
        path: PathBuf,
        /// Drop undecodable entries instead of aborting
        #[arg(long)]
        skip_bad: bool,
        /// Write the normalized TSV manifest here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract descriptors for a dataset into a binary feature index
    Extract {
        /// Dataset directory or TSV manifest file
        path: PathBuf,
        /// Output index file
        #[arg(long)]
        out: PathBuf,
        /// Descriptor to extract
        #[arg(long, value_enum, default_value_t = DescriptorKind::Pud)]
        descriptor: DescriptorKind,
        /// Weight of the color block
        #[arg(long, default_value_t = 0.1)]
        beta1: f64,
        /// Weight of the edge-orientation block
        #[arg(long, default_value_t = 0.75)]
        beta2: f64,
        /// Drop failing entries instead of aborting
        #[arg(long)]
        skip_bad: bool,
    },
    /// Rank an index against a query image
    Query {
        /// Feature index file
        index: PathBuf,
        /// Query by image id inside the index
        #[arg(long, group = "query")]
        id: Option<String>,
        /// Query by external image file (l1/l2 only)
        #[arg(long, group = "query")]
        image: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::L1)]
        method: MethodArg,
        /// Number of results to print
        #[arg(long, default_value_t = 20)]
        returns: usize,
        #[command(flatten)]
        ranking: RankingArgs,
    },
    /// Evaluate retrieval quality with every image as query
    Evaluate {
        /// Feature index file
        index: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::L1)]
        method: MethodArg,
        /// Number of returns n for precision/recall
        #[arg(long, default_value_t = 20)]
        returns: usize,
        /// pr: precision/recall only; ns: also the top-4 N-S score
        #[arg(long, value_enum, default_value_t = ProtocolArg::Pr)]
        protocol: ProtocolArg,
        /// Write a JSON report (a .txt table lands next to it)
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        ranking: RankingArgs,
    },
}

#[derive(Args)]
struct RankingArgs {
    /// Neighborhood size for the affinity graph
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Diffusion damping in [0,1)
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    /// Gaussian kernel bandwidth
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Manifold-ranking solver
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,
    /// Iterative solver stopping tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iterative solver iteration cap
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
}

impl RankingArgs {
    fn to_flags(&self) -> RankingFlags {
        RankingFlags {
            k: self.k,
            alpha: self.alpha,
            sigma: self.sigma,
            solver: self.solver.into(),
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    L1,
    L2,
    Mr1,
    Mr2,
}

impl From<MethodArg> for RankMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::L1 => RankMethod::L1,
            MethodArg::L2 => RankMethod::L2,
            MethodArg::Mr1 => RankMethod::Mr1,
            MethodArg::Mr2 => RankMethod::Mr2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Auto,
    Direct,
    Iterative,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Auto => SolverKind::Auto,
            SolverArg::Direct => SolverKind::Direct,
            SolverArg::Iterative => SolverKind::Iterative,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ProtocolArg {
    Pr,
    Ns,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Pr => Protocol::PrecisionRecall,
            ProtocolArg::Ns => Protocol::NsScore,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { path, skip_bad, out } => {
            commands::cmd_ingest(&path, skip_bad, out.as_deref())
        }
        Command::Extract {
            path,
            out,
            descriptor,
            beta1,
            beta2,
            skip_bad,
        } => commands::cmd_extract(&path, descriptor, beta1, beta2, &out, skip_bad),
        Command::Query {
            index,
            id,
            image,
            method,
            returns,
            ranking,
        } => {
            let spec = match (id, image) {
                (Some(id), None) => QuerySpec::Id(id),
                (None, Some(path)) => QuerySpec::Image(path),
                _ => {
                    return Err(CliError::Usage(
                        "exactly one of --id or --image is required".into(),
                    ))
                }
            };
            commands::cmd_query(&index, &spec, method.into(), ranking.to_flags(), returns)
        }
        Command::Evaluate {
            index,
            method,
            returns,
            protocol,
            report,
            ranking,
        } => commands::cmd_evaluate(
            &index,
            method.into(),
            ranking.to_flags(),
            returns,
            protocol.into(),
            report.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
