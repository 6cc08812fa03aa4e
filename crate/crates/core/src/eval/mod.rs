//! Retrieval-based evaluation of suggestion methods.
//!
//! For each topic the MeSH headings are stripped from the original Boolean
//! query, the remaining keywords are sent to a suggestion method, the
//! suggestions are attached back and the rebuilt query is run against PubMed.
//! Runs are scored with set-based precision, recall and F1.

mod metrics;
mod pipeline;
mod topics;

use std::io;

use thiserror::Error;

pub use metrics::{
    compare, f1, format_report, format_significance, paired_t_test, score, score_sets, Evaluation,
    MeanScores, PairedTTest, Qrels, Run, TopicScore,
};
pub use pipeline::{
    build_query, queries_path, run_pipeline, PipelineConfig, RunMethod, RunOutput, TopicOutcome,
};
pub use topics::{
    apply_date_file, load_topics, parse_topics, resolve_dataset, DatasetSource, Topic, TopicSet,
    DATA_DIR_ENV, MINI_QRELS, MINI_TOPICS,
};

/// First line of every run file.
pub const RUN_HEADER: &str = "topic\tpmid";
/// First line of every constructed-queries file.
pub const QUERIES_HEADER: &str = "topic\tquery";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("file not found: {0}")]
    MissingFile(String),
    #[error("no topic could be loaded ({0} skipped)")]
    AllTopicsFailed(usize),
    #[error("{file} line {line}: {reason}")]
    Malformed {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("topic {0} is in the run but not in the relevance judgments")]
    UnjudgedTopic(String),
    #[error("unknown dataset {0}")]
    UnknownDataset(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
