use std::collections::{HashMap, HashSet};
use std::io;
use std::path::{Path, PathBuf};

use log::warn;
use serde::Deserialize;

use super::EvalError;
use crate::pubmed::is_valid_date;
use crate::query::{parse_query, StructuredQuery};

/// One evaluation topic: a Boolean query with an optional date window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    /// The query exactly as written in the topic file.
    pub raw_query: String,
    pub query: StructuredQuery,
    pub mindate: Option<String>,
    pub maxdate: Option<String>,
}

#[derive(Deserialize)]
struct TopicRecord {
    id: String,
    query: String,
    #[serde(default)]
    mindate: Option<String>,
    #[serde(default)]
    maxdate: Option<String>,
}

/// Topics that parsed, plus one message per record that did not.
#[derive(Debug, Clone, Default)]
pub struct TopicSet {
    pub topics: Vec<Topic>,
    pub warnings: Vec<String>,
}

fn check_date(d: Option<String>, what: &str) -> Result<Option<String>, String> {
    match d.map(|s| s.trim().to_string()).filter(|s| !s.is_empty()) {
        Some(s) if !is_valid_date(&s) => Err(format!("invalid {what} {s:?}")),
        other => Ok(other),
    }
}

/// Parses JSON-lines topics. Records that fail are skipped with a warning;
/// an input with no usable topic is an error.
pub fn parse_topics(content: &str) -> Result<TopicSet, EvalError> {
    let mut set = TopicSet::default();
    let mut ids = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let record: TopicRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                set.warnings.push(format!("line {line_no}: {e}"));
                continue;
            }
        };
        if !ids.insert(record.id.clone()) {
            set.warnings
                .push(format!("line {line_no}: duplicate topic id {}", record.id));
            continue;
        }
        let dates = check_date(record.mindate, "mindate")
            .and_then(|lo| Ok((lo, check_date(record.maxdate, "maxdate")?)));
        let (mindate, maxdate) = match dates {
            Ok(d) => d,
            Err(e) => {
                set.warnings.push(format!("topic {}: {e}", record.id));
                continue;
            }
        };
        match parse_query(&record.query) {
            Ok(query) => set.topics.push(Topic {
                id: record.id,
                raw_query: record.query,
                query,
                mindate,
                maxdate,
            }),
            Err(e) => set.warnings.push(format!("topic {}: {e}", record.id)),
        }
    }
    for w in &set.warnings {
        warn!("skipping {w}");
    }
    if set.topics.is_empty() {
        return Err(EvalError::AllTopicsFailed(set.warnings.len()));
    }
    Ok(set)
}

pub fn load_topics(path: impl AsRef<Path>) -> Result<TopicSet, EvalError> {
    parse_topics(&read(path.as_ref())?)
}

pub(crate) fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => EvalError::MissingFile(path.display().to_string()),
        _ => EvalError::Io(e),
    })
}

/// Overrides topic dates from a `topic<TAB>mindate<TAB>maxdate` file. Empty
/// fields clear the corresponding bound.
pub fn apply_date_file(topics: &mut [Topic], path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    let content = read(path)?;
    let mut dates: HashMap<&str, (Option<String>, Option<String>)> = HashMap::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let malformed = |reason: String| EvalError::Malformed {
            file: path.display().to_string(),
            line: i + 1,
            reason,
        };
        if fields.len() != 3 {
            return Err(malformed("expected topic<TAB>mindate<TAB>maxdate".into()));
        }
        let lo = check_date(Some(fields[1].to_string()), "mindate").map_err(malformed)?;
        let hi = check_date(Some(fields[2].to_string()), "maxdate").map_err(malformed)?;
        dates.insert(fields[0].trim(), (lo, hi));
    }
    for topic in topics {
        if let Some((lo, hi)) = dates.get(topic.id.as_str()) {
            topic.mindate = lo.clone();
            topic.maxdate = hi.clone();
        }
    }
    Ok(())
}

pub const MINI_TOPICS: &str = include_str!("../../data/mini/topics.jsonl");
pub const MINI_QRELS: &str = include_str!("../../data/mini/qrels.txt");

/// Where a named dataset's topics come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    /// The miniature dataset compiled into the crate.
    Bundled,
    Directory(PathBuf),
}

/// Environment variable pointing at the directory holding `CLEF-2017/` and
/// `CLEF-2018/`.
pub const DATA_DIR_ENV: &str = "MESHSUGGEST_DATA_DIR";

/// `MINI` is always available. `CLEF-2017` and `CLEF-2018` live under the
/// data directory. Any other name is taken as a folder path containing
/// `topics.jsonl`.
pub fn resolve_dataset(name: &str, data_dir: Option<&Path>) -> Result<DatasetSource, EvalError> {
    if name.eq_ignore_ascii_case("MINI") {
        return Ok(DatasetSource::Bundled);
    }
    if name.eq_ignore_ascii_case("CLEF-2017") || name.eq_ignore_ascii_case("CLEF-2018") {
        let base = data_dir
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .ok_or_else(|| {
                EvalError::UnknownDataset(format!(
                    "{name} needs a data directory (--data_dir or {DATA_DIR_ENV})"
                ))
            })?;
        return Ok(DatasetSource::Directory(
            base.join(name.to_ascii_uppercase()),
        ));
    }
    let dir = PathBuf::from(name);
    if dir.is_dir() {
        Ok(DatasetSource::Directory(dir))
    } else {
        Err(EvalError::UnknownDataset(name.to_string()))
    }
}

impl DatasetSource {
    pub fn load_topics(&self) -> Result<TopicSet, EvalError> {
        match self {
            DatasetSource::Bundled => parse_topics(MINI_TOPICS),
            DatasetSource::Directory(dir) => load_topics(dir.join("topics.jsonl")),
        }
    }
}
