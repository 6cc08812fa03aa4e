//! Set-based precision, recall and F1 over Boolean runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::topics::read;
use super::EvalError;

/// Relevant PMIDs per topic. A topic judged with no relevant document maps to
/// an empty set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    topics: BTreeMap<String, BTreeSet<String>>,
}

impl Qrels {
    pub fn new(topics: BTreeMap<String, BTreeSet<String>>) -> Self {
        Self { topics }
    }

    /// TREC format: `topic iteration pmid relevance`, relevance > 0 counts.
    pub fn parse(content: &str) -> Result<Self, EvalError> {
        let mut topics: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |reason: &str| EvalError::Malformed {
                file: "qrels".into(),
                line: i + 1,
                reason: reason.into(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(malformed("expected 4 columns"));
            }
            let rel: i64 = fields[3]
                .parse()
                .map_err(|_| malformed("relevance is not an integer"))?;
            let docs = topics.entry(fields[0].to_string()).or_default();
            if rel > 0 {
                docs.insert(fields[2].to_string());
            }
        }
        Ok(Self { topics })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        Self::parse(&read(path.as_ref())?)
    }

    pub fn relevant(&self, topic: &str) -> Option<&BTreeSet<String>> {
        self.topics.get(topic)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }
}

/// Retrieved PMIDs per topic with set semantics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Run {
    topics: BTreeMap<String, BTreeSet<String>>,
}

impl Run {
    pub fn from_records<'a>(records: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut topics: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (t, d) in records {
            topics
                .entry(t.to_string())
                .or_default()
                .insert(d.to_string());
        }
        Self { topics }
    }

    /// Reads the `topic<TAB>pmid` run format written by the pipeline.
    pub fn parse(content: &str) -> Result<Self, EvalError> {
        let mut records = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || (i == 0 && line == super::RUN_HEADER) {
                continue;
            }
            let (t, d) = line.split_once('\t').ok_or_else(|| EvalError::Malformed {
                file: "run".into(),
                line: i + 1,
                reason: "expected topic<TAB>pmid".into(),
            })?;
            records.push((t.trim(), d.trim()));
        }
        Ok(Self::from_records(records))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        Self::parse(&read(path.as_ref())?)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn retrieved(&self, topic: &str) -> Option<&BTreeSet<String>> {
        self.topics.get(topic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicScore {
    pub topic: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub retrieved: usize,
    pub relevant: usize,
}

impl TopicScore {
    /// Topics without relevant documents are left out of the means.
    pub fn included(&self) -> bool {
        self.relevant > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub topics: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub per_topic: Vec<TopicScore>,
    pub mean: MeanScores,
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Scores a retrieved set against a relevant set.
pub fn score_sets(
    topic: &str,
    retrieved: &BTreeSet<String>,
    relevant: &BTreeSet<String>,
) -> TopicScore {
    let hits = retrieved.intersection(relevant).count();
    let precision = if retrieved.is_empty() {
        0.0
    } else {
        hits as f64 / retrieved.len() as f64
    };
    let recall = if relevant.is_empty() {
        0.0
    } else {
        hits as f64 / relevant.len() as f64
    };
    TopicScore {
        topic: topic.to_string(),
        precision,
        recall,
        f1: f1(precision, recall),
        retrieved: retrieved.len(),
        relevant: relevant.len(),
    }
}

/// Scores every topic in the run; each must be judged in the qrels.
pub fn score(run: &Run, qrels: &Qrels) -> Result<Evaluation, EvalError> {
    let mut per_topic = Vec::new();
    for (topic, retrieved) in &run.topics {
        let relevant = qrels
            .relevant(topic)
            .ok_or_else(|| EvalError::UnjudgedTopic(topic.clone()))?;
        per_topic.push(score_sets(topic, retrieved, relevant));
    }
    let included: Vec<&TopicScore> = per_topic.iter().filter(|s| s.included()).collect();
    let n = included.len();
    let mean_of = |f: fn(&TopicScore) -> f64| {
        if n == 0 {
            0.0
        } else {
            included.iter().map(|s| f(s)).sum::<f64>() / n as f64
        }
    };
    let mean = MeanScores {
        precision: mean_of(|s| s.precision),
        recall: mean_of(|s| s.recall),
        f1: mean_of(|s| s.f1),
        topics: n,
    };
    Ok(Evaluation { per_topic, mean })
}

/// Two-tailed paired t-test result with a Bonferroni-adjusted p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub t: f64,
    pub p: f64,
    pub p_adjusted: f64,
}

/// Paired two-tailed t-test on per-topic scores. Returns `None` for fewer
/// than two pairs. Identical samples give `t = 0`, `p = 1`.
pub fn paired_t_test(a: &[f64], b: &[f64], comparisons: usize) -> Option<PairedTTest> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let (t, p) = if var == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (var / n).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n - 1.0).ok()?;
        (t, 2.0 * (1.0 - dist.cdf(t.abs())))
    };
    Some(PairedTTest {
        t,
        p,
        p_adjusted: (p * comparisons.max(1) as f64).min(1.0),
    })
}

/// Per-measure paired t-tests between a run and a baseline over the topics
/// both include.
pub fn compare(
    run: &Evaluation,
    baseline: &Evaluation,
    comparisons: usize,
) -> [Option<PairedTTest>; 3] {
    let base: BTreeMap<&str, &TopicScore> = baseline
        .per_topic
        .iter()
        .filter(|s| s.included())
        .map(|s| (s.topic.as_str(), s))
        .collect();
    let pairs: Vec<(&TopicScore, &TopicScore)> = run
        .per_topic
        .iter()
        .filter(|s| s.included())
        .filter_map(|s| base.get(s.topic.as_str()).map(|b| (s, *b)))
        .collect();
    let test = |f: fn(&TopicScore) -> f64| {
        let a: Vec<f64> = pairs.iter().map(|(x, _)| f(x)).collect();
        let b: Vec<f64> = pairs.iter().map(|(_, y)| f(y)).collect();
        paired_t_test(&a, &b, comparisons)
    };
    [test(|s| s.precision), test(|s| s.f1), test(|s| s.recall)]
}

/// TSV report: one row per included topic, then the macro means, columns in
/// P, F1, R order.
pub fn format_report(eval: &Evaluation) -> String {
    let mut out = String::from("topic\tP\tF1\tR\n");
    for s in eval.per_topic.iter().filter(|s| s.included()) {
        let _ = writeln!(
            out,
            "{}\t{:.4}\t{:.4}\t{:.4}",
            s.topic, s.precision, s.f1, s.recall
        );
    }
    let m = &eval.mean;
    let _ = writeln!(out, "all\t{:.4}\t{:.4}\t{:.4}", m.precision, m.f1, m.recall);
    out
}

pub fn format_significance(tests: &[Option<PairedTTest>; 3]) -> String {
    let cell =
        |t: &Option<PairedTTest>| t.map_or("-".to_string(), |t| format!("{:.4}", t.p_adjusted));
    format!(
        "p-value\t{}\t{}\t{}\n",
        cell(&tests[0]),
        cell(&tests[1]),
        cell(&tests[2])
    )
}
