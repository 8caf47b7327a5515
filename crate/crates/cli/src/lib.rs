//! Command-line entry points for tagging, bootstrapping, evaluation, corpus
//! generation and relevance-gate training.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cyberrel::corpus::CorpusFormat;
use cyberrel::oracle::OracleMode;

mod commands;
pub mod service;

pub use commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "cyberrel", version, about = "Bootstrapped relation extraction for security text")]
pub struct Cli {
    /// Log progress at info level.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tag entities in a corpus and write the mentions as JSON.
    Tag(TagArgs),
    /// Learn patterns and relations from seeds over a corpus.
    Bootstrap(BootstrapArgs),
    /// Score extracted relations against gold relations.
    Eval(EvalArgs),
    /// Write a synthetic corpus with planted relations.
    Generate(GenerateArgs),
    /// Train the document relevance gate from labeled documents.
    TrainGate(TrainGateArgs),
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "data/gazetteers")]
    pub gazetteers: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "auto", value_parser = parse_format)]
    pub format: CorpusFormat,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// A seed file, or a directory of them.
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long, default_value = "data/gazetteers")]
    pub gazetteers: PathBuf,
    /// JSON file with bootstrap settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// auto, interactive, serve or scripted:PATH. Overrides the config file.
    #[arg(long)]
    pub oracle: Option<OracleMode>,
    /// Relevance gate model; without one every document is kept.
    #[arg(long)]
    pub relevance: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value = "auto", value_parser = parse_format)]
    pub format: CorpusFormat,
    /// Address of the review service in serve mode.
    #[arg(long, default_value = "127.0.0.1:8750")]
    pub bind: String,
    /// Directory of review UI assets to serve under /ui.
    #[arg(long)]
    pub ui: Option<PathBuf>,
    /// Seconds to wait for answers in serve mode before treating them as don't know.
    #[arg(long)]
    pub answer_timeout: Option<f64>,
    /// Keep the service up after the run until interrupted.
    #[arg(long)]
    pub keep_serving: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub extracted: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    /// Complete relation set of fully labeled documents, for recall.
    #[arg(long)]
    pub labeled: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "data/gazetteers")]
    pub gazetteers: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub num_docs: usize,
    #[arg(long, default_value_t = 2)]
    pub relations_per_doc: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise_rate: f64,
    #[arg(long, default_value = cyberrel::evalgen::DEFAULT_TEMPLATE_SET)]
    pub template_set: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainGateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "data/gazetteers")]
    pub gazetteers: PathBuf,
    /// JSON map of document id to true/false; overrides labels in the corpus.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub l2: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value = "auto", value_parser = parse_format)]
    pub format: CorpusFormat,
}

fn parse_format(s: &str) -> Result<CorpusFormat, String> {
    s.parse()
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Tag(a) => commands::tag(&a),
        Command::Bootstrap(a) => commands::bootstrap(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::TrainGate(a) => commands::train_gate(&a),
    }
}
