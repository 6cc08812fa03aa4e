use std::path::PathBuf;

use clap::Parser;

/// Suggest MeSH terms for systematic-review Boolean queries and evaluate the
/// resulting retrieval runs.
///
/// Without --evaluate_run, every topic of --dataset is stripped of its MeSH
/// terms, the keywords are sent to --method, the suggestions are attached back
/// and the query is run against PubMed. With --evaluate_run, the run in
/// --output_file is scored against --qrel_file.
#[derive(Debug, Parser)]
#[command(name = "meshsuggest", version, rename_all = "snake_case")]
pub struct Args {
    /// Predefined MeSH Term Suggestion method or new method
    /// (ATM, MetaMap, UMLS, Atomic-BERT, Fragment-BERT, Semantic-BERT, Original, NEW)
    #[arg(long, help_heading = "Basic")]
    pub method: Option<String>,

    /// Pre-defined Dataset or data folder name (MINI, CLEF-2017, CLEF-2018 or a folder with topics.jsonl)
    #[arg(long, help_heading = "Basic")]
    pub dataset: Option<String>,

    /// MeSH Term file path
    #[arg(long, help_heading = "Basic")]
    pub mesh_file: Option<PathBuf>,

    /// [Optional] path of encoded MeSH Terms
    #[arg(long, help_heading = "Neural")]
    pub mesh_encoding: Option<PathBuf>,

    /// Tokenizer for Neural Methods (forwarded to the encoder endpoint)
    #[arg(long, help_heading = "Neural")]
    pub tokenizer_name_or_path: Option<String>,

    /// Neural Model path or name: a keyword-embedding file, or an encoder endpoint URL
    #[arg(long, help_heading = "Neural")]
    pub model_dir: Option<String>,

    /// query keyword maximum length after tokenization (forwarded to the encoder endpoint)
    #[arg(long, help_heading = "Neural")]
    pub q_max_len: Option<usize>,

    /// MeSH Term maximum length after tokenization (forwarded to the encoder endpoint)
    #[arg(long, help_heading = "Neural")]
    pub p_max_len: Option<usize>,

    /// Path of w2v Model for semantic grouping
    #[arg(long, help_heading = "Group")]
    pub semantic_model_path: Option<PathBuf>,

    /// Cut-off of each keyword for interpolation
    #[arg(long, default_value_t = 20, help_heading = "Group")]
    pub interpolation_depth: usize,

    /// Cut-off for number of MeSH Term retrieved for each group
    #[arg(long, default_value_t = 1, help_heading = "Group")]
    pub depth: usize,

    /// Similarity threshold for merging keyword groups
    #[arg(long, default_value_t = 0.7, help_heading = "Group")]
    pub tau: f64,

    /// Path of query result output
    #[arg(long, help_heading = "PubMed")]
    pub output_file: Option<PathBuf>,

    /// Path of date restriction file for each topic
    #[arg(long, help_heading = "PubMed")]
    pub date_file: Option<PathBuf>,

    /// Email for calling E-utilities API for literature retrieval
    #[arg(long, help_heading = "PubMed")]
    pub email: Option<String>,

    /// Whether evaluate the output result
    #[arg(long, help_heading = "Evaluate")]
    pub evaluate_run: bool,

    /// Path to file containing relevance judgments
    #[arg(long, alias = "qrel", help_heading = "Evaluate")]
    pub qrel_file: Option<PathBuf>,

    /// Second run to test against with a paired two-tailed t-test
    #[arg(long, help_heading = "Evaluate")]
    pub baseline_run: Option<PathBuf>,

    /// Number of comparisons for the Bonferroni correction
    #[arg(long, default_value_t = 1, help_heading = "Evaluate")]
    pub comparisons: usize,

    /// Concept mapper for MetaMap: an endpoint URL or a keyword<TAB>ids table
    #[arg(long, help_heading = "Resources")]
    pub metamap: Option<String>,

    /// Directory holding the CLEF-2017 and CLEF-2018 dataset folders
    #[arg(long, help_heading = "Resources")]
    pub data_dir: Option<PathBuf>,

    /// Serve HTTP requests from a recorded cassette instead of the network
    #[arg(long, conflicts_with = "record", help_heading = "Testing")]
    pub replay: Option<PathBuf>,

    /// Record every HTTP exchange to a cassette file
    #[arg(long, help_heading = "Testing")]
    pub record: Option<PathBuf>,
}
