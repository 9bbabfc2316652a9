use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod input;

/// Crystal text codec, evaluation metrics and preference-pair rounds.
#[derive(Parser, Debug)]
#[command(name = "wyckit", version)]
struct Cli {
    /// TOML file with round settings; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for data-parallel steps. Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Crystals (JSONL or coordinate blocks) to Wyckoff or coordinate blocks.
    Encode {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = BlockFormat::Wyckoff)]
        format: BlockFormat,
        #[arg(long)]
        sym_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Text blocks to crystal JSONL.
    Decode {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural and compositional validity per block.
    Validate {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Space group per block.
    Detect {
        input: PathBuf,
        #[arg(long)]
        sym_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group blocks into classes of equal structures, or test them against a
    /// reference corpus.
    Match {
        input: PathBuf,
        /// JSONL rows `{"id", "text"}`.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convex-hull queries against a JSONL reference file.
    Hull {
        #[command(subcommand)]
        action: HullAction,
    },
    /// Preference pairs from scored samples.
    Pairs {
        samples: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        non_tiered: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// S.U.N. or S.S.U.N. report from scored samples.
    Metrics {
        samples: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricsMode::Sun)]
        mode: MetricsMode,
        /// Conditioned group; repeatable. Defaults to every group present.
        #[arg(long)]
        target: Vec<u16>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One sample/score/pair iteration through the configured plugins.
    Round(RoundArgs),
    /// Sampler plugin that replays fixed generations.
    ReplaySampler {
        /// JSONL rows `{"id", "attempt", "text"}`.
        #[arg(long)]
        file: PathBuf,
    },
    /// Scorer plugin that looks energies up by id.
    LookupScorer {
        /// JSONL rows `{"id", "energy_per_atom"}`.
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum HullAction {
    /// Hull energy at each formula, and energy above hull when energies are
    /// given in the same order.
    Query {
        #[arg(long)]
        hull: PathBuf,
        #[arg(long, required = true)]
        formula: Vec<String>,
        #[arg(long, allow_negative_numbers = true)]
        energy: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct TolArgs {
    #[arg(long)]
    ltol: Option<f64>,
    #[arg(long)]
    stol: Option<f64>,
    #[arg(long)]
    angle_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct RoundArgs {
    #[arg(long, default_value_t = 0)]
    iteration: u32,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    temp_base: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    temp_step: Option<f64>,
    #[arg(long)]
    non_tiered: bool,
    #[arg(long)]
    rmax: Option<u32>,
    #[arg(long)]
    hull: Option<PathBuf>,
    #[arg(long)]
    novelty_corpus: Option<PathBuf>,
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    scorer: Option<String>,
    #[arg(long)]
    unconditional: Option<usize>,
    #[arg(long)]
    per_spacegroup: Option<usize>,
    /// Comma-separated group numbers for the conditioned prompts.
    #[arg(long, value_delimiter = ',')]
    spacegroups: Option<Vec<u16>>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BlockFormat {
    Wyckoff,
    Coords,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MetricsMode {
    Sun,
    Ssun,
}

/// 0 success, 1 some records failed, 2 usage or configuration error,
/// 3 plugin or I/O failure.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = configure_pool(cli.jobs) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let (Failure::Usage(e) | Failure::Io(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_pool(jobs: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = jobs {
        anyhow::ensure!(n > 0, "--jobs must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(jobs: Option<usize>) -> anyhow::Result<()> {
    anyhow::ensure!(jobs != Some(0), "--jobs must be at least 1");
    Ok(())
}
