//! Command-line surface for the tm-rbe engine.
//!
//! Subcommands: `gen-artificial`, `train`, `sweep`, `embed`, `rbe`, `probe`.
//! Every command honors `--seed`, writes under `--out-dir`, and accepts a
//! flat `key=value` config file that flags override. Exit codes: 0 success,
//! 1 usage/config, 2 data, 3 internal invariant violation.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod error;
pub mod out;

mod commands;

use config::ConfigFile;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "tm-rbe",
    version,
    about = "Tsetlin Machine engine: classification, single-word embedding, and literal state-space analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the artificial benchmark dataset pair (train/test caches).
    GenArtificial(GenArgs),
    /// Train a classifier and append an accuracy report row.
    Train(TrainArgs),
    /// Accuracy sweep over s or T: one training run per value.
    Sweep(SweepArgs),
    /// Embed a single target word from a text corpus.
    Embed(EmbedArgs),
    /// Clause-composition grid over (s, T) setups.
    Rbe(RbeArgs),
    /// State-space sweep: literal depth summaries across epochs, s, or T.
    Probe(ProbeArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// RNG seed (fallback: config file, then TM_RBE_SEED, then 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving every output file.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Flat key=value config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for sweep/grid cells (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Force serial cell execution.
    #[arg(long)]
    deterministic: bool,
    /// Record wall-clock times in reports; off writes 0 so outputs stay
    /// byte-stable across runs.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Clause count n.
    #[arg(long)]
    clauses: Option<usize>,
    /// Voting margin T.
    #[arg(long)]
    margin: Option<i64>,
    /// Specificity s (>= 1).
    #[arg(long)]
    s: Option<f64>,
    /// Automaton half-range N; states span 0..2N-1.
    #[arg(long)]
    states: Option<u32>,
    /// Boost true-positive memorization (default true).
    #[arg(long)]
    boost: Option<bool>,
    /// Initial automaton state (default N-1); sensitivity checks only.
    #[arg(long)]
    init_state: Option<u32>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Feature count m.
    #[arg(long)]
    features: Option<usize>,
    /// Training examples.
    #[arg(long)]
    train_n: Option<usize>,
    /// Test examples.
    #[arg(long)]
    test_n: Option<usize>,
    /// Bit-flip probability for owned features.
    #[arg(long)]
    noise: Option<f64>,
    /// Scale on the flip probability of non-owned features.
    #[arg(long)]
    background_rate: Option<f64>,
    /// Characterizing features per class.
    #[arg(long)]
    unique: Option<usize>,
    /// Class count.
    #[arg(long)]
    classes: Option<u32>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Training set: .tmds cache or label<TAB>text lines.
    #[arg(long)]
    train: PathBuf,
    /// Test set in the same format.
    #[arg(long)]
    test: PathBuf,
    /// Shuffled passes over the training set.
    #[arg(long)]
    epochs: Option<usize>,
    /// Vocabulary cap when ingesting raw text.
    #[arg(long)]
    max_vocab: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    train_args: TrainArgs,
    /// Swept hyperparameter: s or T.
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values.
    #[arg(long)]
    values: String,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Text corpus, one document per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Target word to embed.
    #[arg(long)]
    tw: String,
    /// Documents sampled per round.
    #[arg(long)]
    window: Option<usize>,
    /// Sample this proportion of the pool instead of a fixed count.
    #[arg(long)]
    window_proportion: Option<f64>,
    /// Training epochs (rounds = epochs x rounds-per-epoch).
    #[arg(long)]
    epochs: Option<usize>,
    /// Total rounds; overrides --epochs when set.
    #[arg(long)]
    rounds: Option<usize>,
    /// Rounds per epoch (default: corpus size).
    #[arg(long)]
    rounds_per_epoch: Option<usize>,
    /// Probability of target value 1 per round.
    #[arg(long)]
    q1_prob: Option<f64>,
    /// Vocabulary cap for the corpus.
    #[arg(long)]
    max_vocab: Option<usize>,
    /// Write per-epoch state and histogram CSVs for the probed clause.
    #[arg(long)]
    probe: bool,
    /// Clause observed by --probe.
    #[arg(long)]
    probe_clause: Option<usize>,
}

#[derive(Args, Debug)]
struct RbeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Training set: .tmds cache or label<TAB>text lines.
    #[arg(long)]
    train: PathBuf,
    /// Test set in the same format.
    #[arg(long)]
    test: PathBuf,
    /// Comma-separated s:T setups, e.g. `1:256,3:128,10:32,50:8`.
    #[arg(long)]
    setups: String,
    /// Shuffled passes over the training set per setup.
    #[arg(long)]
    epochs: Option<usize>,
    /// Count features only over the top-k clauses by |weight|.
    #[arg(long)]
    top_k: Option<usize>,
    /// Vocabulary cap when ingesting raw text.
    #[arg(long)]
    max_vocab: Option<usize>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Text corpus, one document per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Target word to embed.
    #[arg(long)]
    tw: String,
    /// Swept axis: epochs, s, or T.
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values.
    #[arg(long)]
    values: String,
    /// Documents sampled per round.
    #[arg(long)]
    window: Option<usize>,
    /// Fixed epochs for the s and T axes.
    #[arg(long)]
    epochs: Option<usize>,
    /// Rounds per epoch (default: corpus size).
    #[arg(long)]
    rounds_per_epoch: Option<usize>,
    /// Epochs between snapshots.
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Probe the mean over all clauses instead of one clause.
    #[arg(long)]
    all_clauses: bool,
    /// Clause to probe (default 0).
    #[arg(long)]
    probe_clause: Option<usize>,
    /// Probability of target value 1 per round.
    #[arg(long)]
    q1_prob: Option<f64>,
    /// Vocabulary cap for the corpus.
    #[arg(long)]
    max_vocab: Option<usize>,
}

/// Parses and runs a full command line (`argv[0]` included).
pub fn run<I, A>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::usage(e.to_string())),
    };
    match cli.command {
        Command::GenArtificial(args) => commands::gen_artificial(args),
        Command::Train(args) => commands::train(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Embed(args) => commands::embed(args),
        Command::Rbe(args) => commands::rbe(args),
        Command::Probe(args) => commands::probe(args),
    }
}

impl CommonArgs {
    /// Loads the config file and resolves the shared fields.
    fn resolve(&self) -> CliResult<Resolved> {
        let cfg = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let seed = config::resolve_seed(self.seed, &cfg)?;
        let out_dir = match &self.out_dir {
            Some(p) => p.clone(),
            None => PathBuf::from(cfg.get::<String>("out-dir")?.unwrap_or_else(|| "out".into())),
        };
        let deterministic =
            self.deterministic || cfg.get::<bool>("deterministic")?.unwrap_or(false);
        let threads = if deterministic {
            1
        } else {
            config::resolve(self.threads, &cfg, "threads", 0)?
        };
        let timing = self.timing || cfg.get::<bool>("timing")?.unwrap_or(false);
        if threads > 0 {
            // Best effort: the global pool can only be sized once per process.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
        Ok(Resolved {
            cfg,
            seed,
            out_dir,
            timing,
        })
    }
}

struct Resolved {
    cfg: ConfigFile,
    seed: u64,
    out_dir: PathBuf,
    timing: bool,
}

impl ModelArgs {
    fn resolve(&self, cfg: &ConfigFile) -> CliResult<tm_rbe::ModelParams> {
        let params = tm_rbe::ModelParams {
            clauses: config::resolve(self.clauses, cfg, "clauses", 100)?,
            margin: config::resolve(self.margin, cfg, "margin", 128)?,
            specificity: config::resolve(self.s, cfg, "s", 5.0)?,
            boundary: config::resolve(self.states, cfg, "states", 2048)?,
            boost_true_positive: config::resolve(self.boost, cfg, "boost", true)?,
            init_state: match self.init_state {
                Some(v) => Some(v),
                None => cfg.get("init-state")?,
            },
        };
        params.validate().map_err(CliError::from)?;
        Ok(params)
    }
}
