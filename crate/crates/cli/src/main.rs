//! Entry point: argument parsing, thread-pool setup, and the mapping
//! from error kinds to exit classes. Exit 0 is success, 2 a problem
//! with the invocation or configuration, 3 a problem in the data files,
//! 4 an inconsistency hit while running.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polysense::{AlgorithmSpec, Error, Result};

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "polysense",
    version,
    about = "Word sense disambiguation over a lexical knowledge base"
)]
struct Cli {
    /// Cap worker threads; default is one per available core.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an algorithm on the tagged corpus and save its model
    Train(TrainArgs),
    /// Answer every target occurrence, from a model or the knowledge base
    Apply(ApplyArgs),
    /// Cross-validate the configured algorithms and print the score grid
    Compare(CompareArgs),
    /// Auto-tag a raw corpus using topic signatures
    Bootstrap(BootstrapArgs),
    /// Check that the configured data files parse and validate
    Validate(ValidateArgs),
}

/// Settings shared by every subcommand. Values given here override the
/// config file.
#[derive(Args, Debug)]
struct CommonArgs {
    /// TOML config file with [paths], [run] and [params] sections.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Run on the bundled miniature dataset instead of configured paths.
    #[arg(long, conflicts_with_all = [
        "inventory", "taxonomy", "glosses", "corpus",
        "classes", "collections", "raw_corpus",
    ])]
    fixture: bool,

    /// Sense inventory file.
    #[arg(long, value_name = "FILE")]
    inventory: Option<PathBuf>,

    /// Taxonomy file (child-parent synset pairs).
    #[arg(long, value_name = "FILE")]
    taxonomy: Option<PathBuf>,

    /// Gloss file (synset to definition lemmas).
    #[arg(long, value_name = "FILE")]
    glosses: Option<PathBuf>,

    /// Sense-tagged corpus in the nine-column format.
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,

    /// Sense-to-class assignment file.
    #[arg(long, value_name = "FILE")]
    classes: Option<PathBuf>,

    /// Directory of per-sense document collections.
    #[arg(long, value_name = "DIR")]
    collections: Option<PathBuf>,

    /// Untagged corpus for bootstrapping.
    #[arg(long, value_name = "FILE")]
    raw_corpus: Option<PathBuf>,

    /// Algorithms to compare, e.g. `mfs,dl:local,topsig`.
    #[arg(long, value_name = "SPECS", value_delimiter = ',')]
    algorithms: Option<Vec<String>>,

    /// `all-polysemous-nouns` or a comma-separated lemma list.
    #[arg(long, value_name = "TARGETS")]
    targets: Option<String>,

    /// Cross-validation folds.
    #[arg(long, value_name = "N")]
    k: Option<usize>,

    /// Seed behind every pseudo-random choice in the run.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// `error` aborts on corpus tags missing from the inventory,
    /// `warn` reports them and drops the tag.
    #[arg(long, value_name = "POLICY")]
    tag_policy: Option<String>,
}

impl CommonArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            config: self.config,
            fixture: self.fixture,
            inventory: self.inventory,
            taxonomy: self.taxonomy,
            glosses: self.glosses,
            corpus: self.corpus,
            classes: self.classes,
            collections: self.collections,
            raw_corpus: self.raw_corpus,
            algorithms: self.algorithms,
            targets: self.targets,
            k: self.k,
            seed: self.seed,
            tag_policy: self.tag_policy,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Algorithm to train: `mfs`, `dl:<set>`, `semclass` or `selpref`.
    #[arg(long, value_name = "SPEC")]
    algorithm: String,
    /// Where to write the model file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Algorithm to apply, e.g. `overlap` or `dl:combined`.
    #[arg(long, value_name = "SPEC")]
    algorithm: String,
    /// Trained model file; required for trainable algorithms.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Write answers here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Rendering for standard output.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Also write the report here, always tab-separated.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Where to write the auto-tagged corpus.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Tsv,
}

impl From<OutputFormat> for commands::Format {
    fn from(format: OutputFormat) -> commands::Format {
        match format {
            OutputFormat::Table => commands::Format::Table,
            OutputFormat::Tsv => commands::Format::Tsv,
        }
    }
}

fn exit_class(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::UnknownAlgorithm(_)
        | Error::NotTrainable(_)
        | Error::BadFoldCount(_)
        | Error::MissingResource(_) => 2,
        Error::Parse { .. }
        | Error::TaxonomyCycle { .. }
        | Error::DuplicateSense(_)
        | Error::NonContiguousRanks { .. }
        | Error::UnknownSynset(_)
        | Error::UnknownSenseTag { .. }
        | Error::EmptySenseCollection(_)
        | Error::TooFewSenseCollections { .. }
        | Error::NoInstances
        | Error::Io(_) => 3,
        Error::MissingGold(_) | Error::ExtractorMismatch { .. } => 4,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train(args) => {
            let config = RunConfig::resolve(args.common.into_overrides())?;
            config.require_lkb()?;
            config.require_corpus()?;
            let algorithm = AlgorithmSpec::parse(&args.algorithm)?;
            let inputs = config.load_inputs()?;
            commands::train(&config, &inputs, &algorithm, &args.out)
        }
        Command::Apply(args) => {
            let config = RunConfig::resolve(args.common.into_overrides())?;
            config.require_lkb()?;
            config.require_corpus()?;
            let algorithm = AlgorithmSpec::parse(&args.algorithm)?;
            let inputs = config.load_inputs()?;
            commands::apply(
                &config,
                &inputs,
                &algorithm,
                args.model.as_deref(),
                args.out.as_deref(),
            )
        }
        Command::Compare(args) => {
            let config = RunConfig::resolve(args.common.into_overrides())?;
            config.require_lkb()?;
            config.require_corpus()?;
            let inputs = config.load_inputs()?;
            commands::compare(&config, &inputs, args.format.into(), args.out.as_deref())
        }
        Command::Bootstrap(args) => {
            let config = RunConfig::resolve(args.common.into_overrides())?;
            config.require_lkb()?;
            config.require_collections()?;
            config.require_raw_corpus()?;
            let inputs = config.load_inputs()?;
            commands::bootstrap(&config, &inputs, &args.out)
        }
        Command::Validate(args) => {
            let config = RunConfig::resolve(args.common.into_overrides())?;
            config.require_lkb()?;
            let inputs = config.load_inputs()?;
            commands::validate(&config, &inputs)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        // Sets the process-global pool once; later calls cannot race it.
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {err}");
            return ExitCode::from(4);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_class(&err))
        }
    }
}
