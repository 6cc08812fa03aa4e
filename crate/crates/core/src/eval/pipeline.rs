use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use log::{info, warn};

use super::topics::Topic;
use super::{QUERIES_HEADER, RUN_HEADER};
use crate::pubmed::{PubmedClient, SearchSpec};
use crate::query::{attach_mesh, strip_mesh, StructuredQuery};
use crate::suggest::{
    Method, MethodRegistry, Resources, SuggestionRequest, DEFAULT_DEPTH,
    DEFAULT_INTERPOLATION_DEPTH,
};

/// What produces the query sent to PubMed for each topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunMethod {
    /// The topic's query, unmodified.
    Original,
    Suggest(Method),
}

impl RunMethod {
    pub fn parse(name: &str) -> Result<Self, crate::suggest::SuggestError> {
        if name.trim().eq_ignore_ascii_case("original") {
            Ok(RunMethod::Original)
        } else {
            Ok(RunMethod::Suggest(name.parse()?))
        }
    }

    pub fn name(&self) -> &str {
        match self {
            RunMethod::Original => "Original",
            RunMethod::Suggest(m) => m.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub depth: usize,
    pub interpolation_depth: usize,
    pub email: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            depth: DEFAULT_DEPTH,
            interpolation_depth: DEFAULT_INTERPOLATION_DEPTH,
            email: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicOutcome {
    pub topic: String,
    /// The query sent to PubMed, when one was built.
    pub query: Option<String>,
    pub pmids: Vec<String>,
    pub error: Option<String>,
}

impl TopicOutcome {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutput {
    pub outcomes: Vec<TopicOutcome>,
}

impl RunOutput {
    pub fn succeeded(&self) -> usize {
        self.outcomes.iter().filter(|o| o.succeeded()).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.succeeded()
    }

    /// `topic<TAB>pmid` records of successful topics, in topic order.
    pub fn run_tsv(&self) -> String {
        let mut out = format!("{RUN_HEADER}\n");
        for o in self.outcomes.iter().filter(|o| o.succeeded()) {
            for pmid in &o.pmids {
                let _ = writeln!(out, "{}\t{}", o.topic, pmid);
            }
        }
        out
    }

    /// `topic<TAB>query` lines for every topic whose query was built.
    pub fn queries_tsv(&self) -> String {
        let mut out = format!("{QUERIES_HEADER}\n");
        for o in &self.outcomes {
            if let Some(q) = &o.query {
                let _ = writeln!(out, "{}\t{}", o.topic, q);
            }
        }
        out
    }

    /// Writes the run file and its sibling `.queries.tsv`.
    pub fn write(&self, run_path: &Path) -> std::io::Result<()> {
        std::fs::File::create(run_path)?.write_all(self.run_tsv().as_bytes())?;
        std::fs::write(queries_path(run_path), self.queries_tsv())
    }
}

/// `out.tsv` → `out.queries.tsv`.
pub fn queries_path(run_path: &Path) -> std::path::PathBuf {
    let stem = run_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    run_path.with_file_name(format!("{stem}.queries.tsv"))
}

/// Builds the query a method sends to PubMed for one topic. Suggestions are
/// requested clause by clause so every group attaches to the clause whose
/// keywords produced it.
pub fn build_query(
    topic: &Topic,
    method: &RunMethod,
    registry: &MethodRegistry,
    resources: &Resources,
    config: &PipelineConfig,
) -> Result<String, String> {
    let method = match method {
        RunMethod::Original => return Ok(topic.raw_query.clone()),
        RunMethod::Suggest(m) => m,
    };
    let stripped = strip_mesh(&topic.query).map_err(|e| e.to_string())?;
    let mut clauses = Vec::with_capacity(stripped.clauses().len());
    for clause in stripped.clauses() {
        let request = SuggestionRequest::new(clause.keywords().to_vec(), method.clone())
            .with_depths(config.depth, config.interpolation_depth);
        let groups = registry
            .dispatch(&request, resources)
            .map_err(|e| e.to_string())?;
        let single = StructuredQuery::new(vec![clause.clone()]).map_err(|e| e.to_string())?;
        let attached = attach_mesh(&single, &groups).map_err(|e| e.to_string())?;
        clauses.extend(attached.clauses().iter().cloned());
    }
    Ok(StructuredQuery::new(clauses)
        .map_err(|e| e.to_string())?
        .render())
}

/// Runs every topic; a failing topic is logged and marked, the rest go on.
pub fn run_pipeline(
    topics: &[Topic],
    method: &RunMethod,
    registry: &MethodRegistry,
    resources: &Resources,
    pubmed: &PubmedClient,
    config: &PipelineConfig,
) -> RunOutput {
    let mut outcomes = Vec::with_capacity(topics.len());
    for topic in topics {
        let query = build_query(topic, method, registry, resources, config);
        let outcome = match query {
            Err(error) => TopicOutcome {
                topic: topic.id.clone(),
                query: None,
                pmids: Vec::new(),
                error: Some(error),
            },
            Ok(query) => {
                let spec = SearchSpec::new(query.clone(), config.email.clone())
                    .with_dates(topic.mindate.clone(), topic.maxdate.clone());
                match pubmed.esearch(&spec) {
                    Ok(result) => TopicOutcome {
                        topic: topic.id.clone(),
                        query: Some(query),
                        pmids: result.pmids,
                        error: None,
                    },
                    Err(e) => TopicOutcome {
                        topic: topic.id.clone(),
                        query: Some(query),
                        pmids: Vec::new(),
                        error: Some(e.to_string()),
                    },
                }
            }
        };
        match &outcome.error {
            Some(e) => warn!("topic {} failed: {e}", outcome.topic),
            None => info!("topic {}: {} documents", outcome.topic, outcome.pmids.len()),
        }
        outcomes.push(outcome);
    }
    RunOutput { outcomes }
}
