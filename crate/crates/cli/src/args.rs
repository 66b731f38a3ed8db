use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bullyscope", version, about = "Cyberbullying detection and prediction pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for fold evaluation (results do not depend on it)
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus file and report ingestion warnings
    Ingest(IngestArgs),
    /// Keep sessions with enough comments and at least one profane comment
    Filter(FilterArgs),
    /// Aggregate rater votes into session labels
    Labels(LabelsArgs),
    /// Write descriptive analysis reports
    Analyze(AnalyzeArgs),
    /// Fit features and a classifier on all labelled sessions
    Train(TrainArgs),
    /// Cross-validated detection or prediction experiment
    Eval(EvalArgs),
    /// Score sessions with a trained model
    Predict(PredictArgs),
    /// Generate a synthetic corpus with rater and image labels
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Bullying,
    Aggression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Svm,
    Logistic,
    Maxent,
    NaiveBayes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Image,
    User,
    PostTime,
    Caption,
    Comments,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Corpus JSONL file
    #[arg(long)]
    pub corpus: PathBuf,
    /// Write the normalized corpus here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Minimum number of comments per session
    #[arg(long, default_value_t = 15)]
    pub min_comments: usize,
    /// Profanity lexicon, one pattern per line (default: bundled list)
    #[arg(long)]
    pub profanity: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabelsArgs {
    /// Rater vote records (JSONL)
    #[arg(long)]
    pub labels: PathBuf,
    /// Aggregated labels output (JSONL)
    #[arg(long)]
    pub out: PathBuf,
    /// Aggregation report output (JSON); defaults to <out>.report.json
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Minimum trust-weighted confidence to keep a session
    #[arg(long, default_value_t = 0.6)]
    pub confidence: f64,
    /// Label whose confidence is thresholded
    #[arg(long, value_enum, default_value_t = TargetArg::Bullying)]
    pub target: TargetArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Aggregated labels (JSONL)
    #[arg(long)]
    pub labels: PathBuf,
    /// Image label records; falls back to votes stored in the corpus
    #[arg(long)]
    pub image_labels: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Reports to write (default: all)
    #[arg(long, value_delimiter = ',')]
    pub reports: Vec<String>,
    #[arg(long)]
    pub profanity: Option<PathBuf>,
    /// LIWC-style category lexicon, `category: word word*` per line (default: bundled demo)
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Interarrival thresholds in seconds (default: 1m,5m,15m,30m,1h,1d,1w,30d,180d)
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<i64>,
    /// Label used for LIWC ratios
    #[arg(long, value_enum, default_value_t = TargetArg::Bullying)]
    pub target: TargetArg,
    /// Also write x/y series files for plotting
    #[arg(long)]
    pub plot_data: bool,
}

#[derive(Debug, Args, Clone)]
pub struct TextArgs {
    /// Highest n-gram order (1 or 2)
    #[arg(long, default_value_t = 2)]
    pub ngrams: usize,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub stopwords: Switch,
    /// L1-normalize term counts per session
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub normalize: Switch,
    /// LSA rank; 0 disables LSA
    #[arg(long, default_value_t = 100)]
    pub lsa_rank: usize,
    /// Minimum document frequency for a term
    #[arg(long, default_value_t = 2)]
    pub min_df: usize,
    /// Stopword list (default: bundled English list)
    #[arg(long)]
    pub stopword_list: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ClassifierArg::Svm)]
    pub classifier: ClassifierArg,
    /// L2 regularization strength
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Mini-batch size for logistic and MaxEnt
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Initial step for logistic and MaxEnt (decays as 1/sqrt(1+epoch))
    #[arg(long, default_value_t = 0.5)]
    pub learning_rate: f64,
    /// Standardize continuous features on the training data
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub standardize: Switch,
    #[arg(long, value_enum, default_value_t = TargetArg::Bullying)]
    pub target: TargetArg,
}

#[derive(Debug, Args, Clone)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Aggregated labels (JSONL)
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Oversample the minority class in each training fold
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub oversample: Switch,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub protocol: EvalProtocol,
}

#[derive(Debug, Subcommand)]
pub enum EvalProtocol {
    /// Detection from comment text
    Detect(DetectArgs),
    /// Prediction ladder at image post time
    Predict(PredictEvalArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: ProtocolArgs,
    /// Include the caption in the text features
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    pub caption: Switch,
    /// Permute labels before evaluation (null control)
    #[arg(long)]
    pub shuffle_labels: bool,
}

#[derive(Debug, Args)]
pub struct PredictEvalArgs {
    #[command(flatten)]
    pub common: ProtocolArgs,
    /// Image label records; falls back to votes stored in the corpus
    #[arg(long)]
    pub image_labels: Option<PathBuf>,
    /// Highest ladder rung; every rung below it is reported too
    #[arg(long, value_enum, default_value_t = LevelArg::Comments)]
    pub level: LevelArg,
    /// Comments visible at the comments rung
    #[arg(long, default_value_t = 15)]
    pub k_comments: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Directory receiving pipeline.json and model.json
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Use prediction-ladder features at this rung instead of detection features
    #[arg(long, value_enum)]
    pub level: Option<LevelArg>,
    #[arg(long, default_value_t = 15)]
    pub k_comments: usize,
    #[arg(long)]
    pub image_labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub oversample: Switch,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Directory written by `train`
    #[arg(long)]
    pub model_dir: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub image_labels: Option<PathBuf>,
    /// Predictions output (JSONL)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImageSignalArg {
    None,
    Perfect,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub sessions: usize,
    #[arg(long, default_value_t = 0.3)]
    pub positive_fraction: f64,
    /// Share of a positive session's commenter tokens drawn from the bullying vocabulary
    #[arg(long, default_value_t = 0.3)]
    pub bully_token_rate: f64,
    #[arg(long, default_value_t = 5)]
    pub raters: usize,
    /// Probability a rater's vote disagrees with the truth
    #[arg(long, default_value_t = 0.1)]
    pub flip_rate: f64,
    #[arg(long, value_enum, default_value_t = ImageSignalArg::None)]
    pub image_signal: ImageSignalArg,
}
