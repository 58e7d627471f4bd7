use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "semcarto", version, about = "Word-embedding cartography for text corpora")]
#[command(args_override_self = true, propagate_version = true)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Write the CSV result here instead of standard output.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// `key = value` file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Normalize a corpus, build and prune its document-term matrix.
    Preprocess(PreprocessArgs),
    /// Restrict two document-term matrices to their shared vocabulary.
    Intersect(IntersectArgs),
    /// Train PPMI + SVD embeddings on a corpus.
    Train(TrainArgs),
    /// Procrustes-align a sequence of embedding spaces.
    Align(AlignArgs),
    /// Cosine of a term with probe terms in each space.
    Drift(DriftArgs),
    /// Build a semantic direction from a pair set.
    Direction(DirectionArgs),
    /// Project terms onto a semantic direction.
    Project(ProjectArgs),
    /// Document-to-document transport distances.
    Docdist(DocdistArgs),
    /// Concept engagement scores per document.
    Cmd(CmdArgs),
    /// Cosine similarity between two terms.
    Cosine(CosineArgs),
    /// Nearest neighbors of a term or a vector expression.
    Neighbors(NeighborsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Preprocess(_) => "preprocess",
            Command::Intersect(_) => "intersect",
            Command::Train(_) => "train",
            Command::Align(_) => "align",
            Command::Drift(_) => "drift",
            Command::Direction(_) => "direction",
            Command::Project(_) => "project",
            Command::Docdist(_) => "docdist",
            Command::Cmd(_) => "cmd",
            Command::Cosine(_) => "cosine",
            Command::Neighbors(_) => "neighbors",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NormalizeArgs {
    /// Corpus file (`id<TAB>text` or plain lines) or directory of text files.
    #[arg(long, value_name = "PATH")]
    pub corpus: PathBuf,
    /// Metadata CSV with columns id,date,source,group.
    #[arg(long, value_name = "PATH")]
    pub meta: Option<PathBuf>,
    /// Stopword list, one term per line (default: bundled Snowball list).
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    /// Contraction table CSV contraction,expanded (default: bundled table).
    #[arg(long, value_name = "PATH")]
    pub contractions: Option<PathBuf>,
    #[arg(long)]
    pub keep_non_ascii: bool,
    #[arg(long)]
    pub keep_urls_html: bool,
    #[arg(long)]
    pub keep_numerals: bool,
    #[arg(long)]
    pub keep_case: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub normalize: NormalizeArgs,
    /// Remove terms absent from at least this fraction of documents.
    #[arg(long, default_value_t = 0.999, value_name = "FRACTION")]
    pub sparsity: f64,
    /// Output prefix for `<prefix>.mtx`, `<prefix>.vocab`, `<prefix>.meta.csv`.
    #[arg(long, value_name = "PREFIX")]
    pub dtm: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct IntersectArgs {
    #[arg(long, value_name = "PREFIX")]
    pub a: PathBuf,
    #[arg(long, value_name = "PREFIX")]
    pub b: PathBuf,
    #[arg(long, value_name = "PREFIX")]
    pub out_a: PathBuf,
    #[arg(long, value_name = "PREFIX")]
    pub out_b: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub normalize: NormalizeArgs,
    /// Co-occurrence window (tokens on each side).
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = WeightingArg::Uniform)]
    pub weighting: WeightingArg,
    /// Embedding dimensionality.
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    /// Subtracted from PMI before clipping at zero.
    #[arg(long, default_value_t = 0.0)]
    pub ppmi_shift: f64,
    /// Drop terms absent from at least this fraction of documents before counting.
    #[arg(long, value_name = "FRACTION")]
    pub sparsity: Option<f64>,
    /// Where to write the embedding (text format).
    #[arg(long, value_name = "PATH")]
    pub save: PathBuf,
    /// Label stored with the space (default: file stem of `--save`).
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainArg {
    ToFirst,
    ToPrevious,
}

#[derive(Debug, Clone, Args)]
pub struct AlignArgs {
    /// Embedding files in order; the first is the reference for `to-first`.
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',', value_name = "PATH")]
    pub emb: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ChainArg::ToFirst)]
    pub mode: ChainArg,
    /// Treat the spaces as already aligned.
    #[arg(long)]
    pub no_align: bool,
    /// Fit a uniform scale factor as well as the rotation.
    #[arg(long)]
    pub scale: bool,
    /// Directory for the aligned spaces (`<label>.txt`).
    #[arg(long, value_name = "DIR")]
    pub save_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DriftArgs {
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',', value_name = "PATH")]
    pub emb: Vec<PathBuf>,
    /// Focal term.
    #[arg(long)]
    pub term: String,
    /// Probe terms; without probes the focal term is compared with itself
    /// across spaces after alignment.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub probes: Vec<String>,
    #[arg(long, value_enum, default_value_t = ChainArg::ToFirst)]
    pub mode: ChainArg,
    #[arg(long)]
    pub no_align: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PairSource {
    /// Pair-set CSV whose header names the two poles.
    #[arg(long, value_name = "PATH", conflicts_with = "bundled")]
    pub pairs: Option<PathBuf>,
    /// Bundled pair set: immigrant_citizen, affluence_poverty, black_white, good_evil.
    #[arg(long, value_name = "NAME")]
    pub bundled: Option<String>,
    /// Length-normalize term vectors before subtracting.
    #[arg(long)]
    pub pre_normalize: bool,
    /// Normalize each pair difference before averaging.
    #[arg(long)]
    pub per_pair_normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DirectionArgs {
    #[arg(long, value_name = "PATH")]
    pub emb: PathBuf,
    #[command(flatten)]
    pub source: PairSource,
    /// Write the direction as a one-row embedding file.
    #[arg(long, value_name = "PATH")]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(long, value_name = "PATH")]
    pub emb: PathBuf,
    #[command(flatten)]
    pub source: PairSource,
    /// Terms to project.
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Emd,
    Rwmd,
    LcRwmd,
    Wcd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroundArg {
    Euclidean,
    CosineDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidednessArg {
    QueryToCorpus,
    CorpusToQuery,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Nbow,
    RawCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimilarityArg {
    NegateZscore,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    Source,
    Group,
    Year,
}

#[derive(Debug, Clone, Args)]
pub struct TransportArgs {
    #[arg(long, value_enum, default_value_t = GroundArg::Euclidean)]
    pub ground: GroundArg,
    /// Use unit-length term vectors for Euclidean ground distances.
    #[arg(long)]
    pub normalize_vectors: bool,
    /// Largest combined support accepted by the exact solver.
    #[arg(long, default_value_t = 64)]
    pub oracle_cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DocdistArgs {
    #[arg(long, value_name = "PATH")]
    pub emb: PathBuf,
    /// Query documents (DTM prefix).
    #[arg(long, value_name = "PREFIX")]
    pub dtm: PathBuf,
    /// Corpus documents (DTM prefix); defaults to the query documents.
    #[arg(long, value_name = "PREFIX")]
    pub against: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::LcRwmd)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = SidednessArg::Max)]
    pub sidedness: SidednessArg,
    #[arg(long, value_enum, default_value_t = WeightsArg::Nbow)]
    pub weights: WeightsArg,
    /// Report similarities instead of distances.
    #[arg(long, value_enum)]
    pub similarity: Option<SimilarityArg>,
    /// Average over blocks keyed by this metadata field on both sides.
    #[arg(long, value_enum)]
    pub group_by: Option<GroupArg>,
    #[command(flatten)]
    pub transport: TransportArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CmdMethodArg {
    Exact,
    Rwmd,
    LcRwmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BucketArg {
    Month,
    Year,
    Decade,
}

#[derive(Debug, Clone, Args)]
pub struct CmdArgs {
    #[arg(long, value_name = "PATH")]
    pub emb: PathBuf,
    #[arg(long, value_name = "PREFIX")]
    pub dtm: PathBuf,
    /// Single-term concept.
    #[arg(long, conflicts_with_all = ["compound", "concepts"])]
    pub concept: Option<String>,
    /// Compound concept, uniform over the listed terms.
    #[arg(long, num_args = 1.., value_delimiter = ',', conflicts_with = "concepts")]
    pub compound: Vec<String>,
    /// Concept file: CSV label,kind,payload (kind: term, compound, centroid, pole+, pole-).
    #[arg(long, value_name = "PATH")]
    pub concepts: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CmdMethodArg::LcRwmd)]
    pub method: CmdMethodArg,
    /// Aggregate standardized scores by date bucket.
    #[arg(long, value_enum)]
    pub bucket: Option<BucketArg>,
    /// With `--bucket`, add the change from the previous bucket.
    #[arg(long, requires = "bucket")]
    pub deltas: bool,
    #[command(flatten)]
    pub transport: TransportArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CosineArgs {
    #[arg(long, value_name = "PATH")]
    pub emb: PathBuf,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
}

#[derive(Debug, Clone, Args)]
pub struct NeighborsArgs {
    #[arg(long, value_name = "PATH")]
    pub emb: PathBuf,
    #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
    pub term: Option<String>,
    /// Signed expression such as "+king -man +woman"; input terms are excluded.
    #[arg(long, allow_hyphen_values = true)]
    pub expr: Option<String>,
    #[arg(long, short, default_value_t = 10)]
    pub k: usize,
}
