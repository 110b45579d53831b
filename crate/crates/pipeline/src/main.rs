use clap::{Args, Parser, Subcommand, ValueEnum};
use mvmol::commands;
use mvmol::commands::prompts::PromptKind;
use mvmol::config::{load_config, Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Multi-view molecular property prediction: rule features, prompt
/// embeddings, and structure insights fused with per-molecule attention.
#[derive(Parser)]
#[command(name = "mvmol", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Replace the configured seed list with this one seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Enable only these views (comma-separated: structure,task,rule).
    #[arg(long)]
    views: Option<String>,
    /// Write artifacts here instead of the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the embedding provider (only `mock`).
    #[arg(long)]
    provider: Option<String>,
}

impl CommonArgs {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let overrides = Overrides {
            seed: self.seed,
            views: self.views.clone(),
            out: self.out.clone(),
            provider: self.provider.clone(),
        };
        load_config(&self.config, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile the rule file into per-molecule features and fix the scaffold split.
    Featurize(CommonArgs),
    /// Build prompts and fill the embedding cache.
    Embed(CommonArgs),
    /// Train one fusion model per configured seed.
    Train(CommonArgs),
    /// Score trained checkpoints on the validation and test splits.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Score this checkpoint instead of the configured seeds' checkpoints.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Report per-molecule view attention from a trained checkpoint.
    Contributions {
        #[command(flatten)]
        common: CommonArgs,
        /// Read this checkpoint instead of the first configured seed's.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Write the exact prompt texts for the first molecule, one file each.
    Prompts {
        #[command(flatten)]
        common: CommonArgs,
        /// Write only this prompt family instead of every available one.
        #[arg(long, value_enum)]
        only: Option<PromptFamily>,
    },
}

/// CLI names for the prompt families.
#[derive(Clone, Copy, ValueEnum)]
enum PromptFamily {
    Structure,
    Task,
    RulesSci,
    RulesData,
}

impl From<PromptFamily> for PromptKind {
    fn from(family: PromptFamily) -> PromptKind {
        match family {
            PromptFamily::Structure => PromptKind::Structure,
            PromptFamily::Task => PromptKind::Task,
            PromptFamily::RulesSci => PromptKind::RulesSci,
            PromptFamily::RulesData => PromptKind::RulesData,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Featurize(common) => commands::featurize::run(&common.load()?),
        Command::Embed(common) => commands::embed::run(&common.load()?),
        Command::Train(common) => commands::train::run(&common.load()?),
        Command::Evaluate { common, checkpoint } => {
            commands::evaluate::run(&common.load()?, checkpoint.as_deref())
        }
        Command::Contributions { common, checkpoint } => {
            commands::contributions::run(&common.load()?, checkpoint.as_deref())
        }
        Command::Prompts { common, only } => {
            commands::prompts::run(&common.load()?, only.map(PromptKind::from))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
