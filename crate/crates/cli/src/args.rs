use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "adaptkit", version, about = "Language models, phrase tables and text tools for dialectal SMT")]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "ADAPTKIT_THREADS")]
    pub threads: Option<usize>,

    /// Append the run manifest to this file instead of the error stream
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Clean informal text: markup, emoticons, elongations, rewrite rules
    Normalize(NormalizeArgs),
    /// Count n-grams and estimate a modified Kneser-Ney ARPA model
    LmTrain(LmTrainArgs),
    /// Perplexity of a corpus under an ARPA model
    LmPpl(LmPplArgs),
    /// Fit linear interpolation weights for several models with EM
    LmInterp(LmInterpArgs),
    /// Fit group weights, then root weights over the groups
    LmHierInterp(LmHierInterpArgs),
    /// Bake an interpolated mixture into one ARPA model
    LmBake(LmBakeArgs),
    /// Induce word classes with the exchange algorithm
    Classes(ClassesArgs),
    /// Replace words by their class tokens
    MapClasses(MapClassesArgs),
    /// Add out-of-domain rows for source phrases the in-domain table lacks
    PtBackoff(PtPairArgs),
    /// Union two phrase tables with provenance indicator features
    PtMerge(PtPairArgs),
    /// Union two reordering tables, in-domain rows first
    RtMerge(RtMergeArgs),
    /// Concatenate parallel corpora
    CatBitext(CatBitextArgs),
    /// Mine transliteration pairs from a word-pair list
    TranslitMine(TranslitMineArgs),
    /// Generate transliteration candidates
    TranslitGen(TranslitGenArgs),
    /// Write a synthetic word-pair list with known labels
    TranslitSynth(TranslitSynthArgs),
    /// Kernel density estimate of sentence lengths
    Kde(KdeArgs),
    /// Keep sentence pairs whose sides both fall within length bounds
    FilterTune(FilterTuneArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Normalize(_) => "normalize",
            Command::LmTrain(_) => "lm-train",
            Command::LmPpl(_) => "lm-ppl",
            Command::LmInterp(_) => "lm-interp",
            Command::LmHierInterp(_) => "lm-hier-interp",
            Command::LmBake(_) => "lm-bake",
            Command::Classes(_) => "classes",
            Command::MapClasses(_) => "map-classes",
            Command::PtBackoff(_) => "pt-backoff",
            Command::PtMerge(_) => "pt-merge",
            Command::RtMerge(_) => "rt-merge",
            Command::CatBitext(_) => "cat-bitext",
            Command::TranslitMine(_) => "translit-mine",
            Command::TranslitGen(_) => "translit-gen",
            Command::TranslitSynth(_) => "translit-synth",
            Command::Kde(_) => "kde",
            Command::FilterTune(_) => "filter-tune",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct NormalizeArgs {
    /// Input text (default: standard input)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output text (default: standard output)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Keep only the text before the first occurrence of this delimiter
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Whole-token markup pattern to drop (repeatable)
    #[arg(long = "tag")]
    pub tags: Vec<String>,
    /// Emoticon pattern to protect (repeatable; default: built-in set)
    #[arg(long = "emoticon")]
    pub emoticons: Vec<String>,
    /// Do not protect emoticons
    #[arg(long)]
    pub no_emoticons: bool,
    #[arg(long)]
    pub keep_tatweel: bool,
    #[arg(long)]
    pub keep_elongation: bool,
    /// Map alef variants to bare alef and final alef maksura to ya
    #[arg(long)]
    pub normalize_alef_ya: bool,
    /// Character rewrite rules, `pattern<TAB>replacement` per line
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LmTrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// ARPA output
    #[arg(long)]
    pub output: PathBuf,
    /// Extra vocabulary, whitespace-separated words
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Also write raw n-gram counts here
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Use one absolute discount for every order instead of modified KN
    #[arg(long)]
    pub fixed_discount: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OovMode {
    /// Leave unknown words unscored
    Skip,
    /// Score unknown words as <unk>
    Unk,
}

#[derive(Debug, Args, Serialize)]
pub struct LmPplArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = OovMode::Skip)]
    pub oov: OovMode,
}

#[derive(Debug, Args, Serialize)]
pub struct EmArgs {
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Stop when the per-token log10 likelihood gain falls below this
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LmInterpArgs {
    /// Component ARPA model (repeat for each)
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub heldout: PathBuf,
    /// Weights file output
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub em: EmArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct LmHierInterpArgs {
    /// `group<TAB>model-path` lines
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(long)]
    pub heldout: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub em: EmArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct LmBakeArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Order of the baked model (default: highest component order)
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassesArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of classes
    #[arg(long, short = 'k')]
    pub num_classes: usize,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `word<TAB>class` output
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MapClassesArgs {
    #[arg(long)]
    pub classes: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PtPairArgs {
    #[arg(long)]
    pub in_domain: PathBuf,
    #[arg(long)]
    pub out_domain: PathBuf,
    /// Output table, gzip-compressed if it ends in .gz
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RtMergeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tables: PtPairArgs,
    /// Orientation probabilities per block
    #[arg(long, default_value_t = adaptkit::phrasetable::DEFAULT_BLOCK_SIZE)]
    pub block_size: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CatBitextArgs {
    /// Source side of a corpus (repeat, paired with --tgt by position)
    #[arg(long = "src", required = true)]
    pub src: Vec<PathBuf>,
    #[arg(long = "tgt", required = true)]
    pub tgt: Vec<PathBuf>,
    #[arg(long)]
    pub out_src: PathBuf,
    #[arg(long)]
    pub out_tgt: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TranslitMineArgs {
    /// `src<TAB>tgt` word pairs
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = adaptkit::translit::DEFAULT_ITERS)]
    pub iters: usize,
    #[arg(long, default_value_t = adaptkit::translit::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Where to write the trained model
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labelled pairs (default: standard output)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TranslitGenArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Words to transliterate, one per line (default: standard input)
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, short = 'k', default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = adaptkit::translit::DEFAULT_BEAM)]
    pub beam: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TranslitSynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub n_translit: usize,
    #[arg(long, default_value_t = 200)]
    pub n_random: usize,
    /// `src<TAB>tgt` pairs
    #[arg(long)]
    pub output: PathBuf,
    /// One 1/0 label per pair
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct KdeArgs {
    /// Sentence lengths are token counts of the non-empty lines
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = adaptkit::tuneselect::DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
    #[arg(long, default_value_t = adaptkit::tuneselect::DEFAULT_GRID)]
    pub grid: usize,
    /// `length,density` CSV (default: standard output)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FilterTuneArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub out_src: PathBuf,
    #[arg(long)]
    pub out_tgt: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub min_len: usize,
    #[arg(long, default_value_t = 25)]
    pub max_len: usize,
}
