//! The MeSH vocabulary: loading, name lookup and tree navigation.
//!
//! Vocabulary files are tab-separated, one descriptor per line:
//!
//! ```text
//! uid <TAB> preferred name <TAB> entry;terms <TAB> tree;numbers
//! ```
//!
//! Entry terms and tree numbers may be empty. Blank lines are ignored and
//! lines starting with `#` are comments; a `# edition: <label>` comment
//! records which MeSH release the file was exported from.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary file not found: {0}")]
    MissingFile(String),
    #[error("malformed vocabulary record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate uid {0}")]
    DuplicateUid(String),
    #[error("unknown uid {0}")]
    UnknownUid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One descriptor of the controlled vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshTerm {
    pub uid: String,
    pub name: String,
    pub entry_terms: Vec<String>,
    pub tree_numbers: Vec<String>,
}

/// An immutable, indexed MeSH vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    edition: Option<String>,
    terms: BTreeMap<String, MeshTerm>,
    name_index: HashMap<String, String>,
    tree_index: BTreeMap<String, String>,
}

/// Checks the `A01.456.505` shape: one letter, then dot-separated groups of
/// two or three digits.
pub fn is_valid_tree_number(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    let rest = chars.as_str();
    if rest.is_empty() {
        return false;
    }
    // The first group follows the letter directly, later ones follow a dot.
    rest.split('.')
        .all(|group| (2..=3).contains(&group.len()) && group.bytes().all(|b| b.is_ascii_digit()))
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl Vocabulary {
    /// Builds a vocabulary from terms, validating every invariant.
    pub fn from_terms(terms: impl IntoIterator<Item = MeshTerm>) -> Result<Self, VocabError> {
        let mut vocab = Vocabulary::default();
        for (i, term) in terms.into_iter().enumerate() {
            vocab.insert(term, i + 1)?;
        }
        vocab.build_name_index();
        Ok(vocab)
    }

    pub fn parse(content: &str) -> Result<Self, VocabError> {
        let mut vocab = Vocabulary::default();
        for (idx, raw) in content.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(edition) = comment.trim().strip_prefix("edition:") {
                    vocab.edition = Some(edition.trim().to_string());
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(VocabError::MalformedRecord {
                    line: line_no,
                    reason: format!("expected 4 tab-separated fields, found {}", fields.len()),
                });
            }
            let term = MeshTerm {
                uid: fields[0].trim().to_string(),
                name: fields[1].trim().to_string(),
                entry_terms: split_list(fields[2]),
                tree_numbers: split_list(fields[3]),
            };
            vocab.insert(term, line_no)?;
        }
        vocab.build_name_index();
        Ok(vocab)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VocabError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => VocabError::MissingFile(path.display().to_string()),
            _ => VocabError::Io(e),
        })?;
        Self::parse(&content)
    }

    fn insert(&mut self, term: MeshTerm, line: usize) -> Result<(), VocabError> {
        let malformed = |reason: String| VocabError::MalformedRecord { line, reason };
        if term.uid.is_empty() {
            return Err(malformed("empty uid".into()));
        }
        if term.name.is_empty() {
            return Err(malformed("empty preferred name".into()));
        }
        if term.uid.contains(['\t', '\n']) || term.name.contains(['\t', '\n']) {
            return Err(malformed("field contains a tab or newline".into()));
        }
        if self.terms.contains_key(&term.uid) {
            return Err(VocabError::DuplicateUid(term.uid));
        }
        for tn in &term.tree_numbers {
            if !is_valid_tree_number(tn) {
                return Err(malformed(format!("invalid tree number {tn:?}")));
            }
            if let Some(other) = self.tree_index.get(tn) {
                return Err(malformed(format!(
                    "tree number {tn} already used by {other}"
                )));
            }
        }
        for tn in &term.tree_numbers {
            self.tree_index.insert(tn.clone(), term.uid.clone());
        }
        self.terms.insert(term.uid.clone(), term);
        Ok(())
    }

    /// Preferred names take precedence over entry terms; within each tier the
    /// lowest uid wins. `terms` iterates in uid order, so first insert wins.
    fn build_name_index(&mut self) {
        let mut index = HashMap::new();
        for term in self.terms.values() {
            index
                .entry(normalize(&term.name))
                .or_insert_with(|| term.uid.clone());
        }
        let preferred: std::collections::HashSet<String> = index.keys().cloned().collect();
        for term in self.terms.values() {
            for entry in &term.entry_terms {
                let key = normalize(entry);
                if key.is_empty() || preferred.contains(&key) {
                    continue;
                }
                index.entry(key).or_insert_with(|| term.uid.clone());
            }
        }
        self.name_index = index;
    }

    pub fn edition(&self) -> Option<&str> {
        self.edition.as_deref()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, uid: &str) -> Option<&MeshTerm> {
        self.terms.get(uid)
    }

    pub fn contains(&self, uid: &str) -> bool {
        self.terms.contains_key(uid)
    }

    /// Terms in ascending uid order.
    pub fn terms(&self) -> impl Iterator<Item = &MeshTerm> {
        self.terms.values()
    }

    /// Resolves a preferred name or entry term to its uid.
    pub fn lookup_by_name(&self, name: &str) -> Option<&str> {
        let key = normalize(name);
        if key.is_empty() {
            return None;
        }
        self.name_index.get(&key).map(String::as_str)
    }

    pub fn lookup_tree_number(&self, tree_number: &str) -> Option<&str> {
        self.tree_index.get(tree_number).map(String::as_str)
    }

    /// Direct descendants: terms with a tree number one dot-group below any of
    /// `uid`'s tree numbers, ordered by that tree number.
    pub fn children(&self, uid: &str) -> Result<Vec<String>, VocabError> {
        let term = self
            .terms
            .get(uid)
            .ok_or_else(|| VocabError::UnknownUid(uid.to_string()))?;
        let mut hits: Vec<(&str, &str)> = Vec::new();
        for parent in &term.tree_numbers {
            let prefix = format!("{parent}.");
            for (tn, child) in self.tree_index.range(prefix.clone()..) {
                let Some(rest) = tn.strip_prefix(&prefix) else {
                    break;
                };
                if !rest.contains('.') {
                    hits.push((tn, child));
                }
            }
        }
        hits.sort();
        let mut out: Vec<String> = Vec::with_capacity(hits.len());
        for (_, child) in hits {
            if !out.iter().any(|c| c == child) {
                out.push(child.to_string());
            }
        }
        Ok(out)
    }

    pub fn parents(&self, uid: &str) -> Result<Vec<String>, VocabError> {
        let term = self
            .terms
            .get(uid)
            .ok_or_else(|| VocabError::UnknownUid(uid.to_string()))?;
        let mut out: Vec<String> = Vec::new();
        for tn in &term.tree_numbers {
            if let Some((parent, _)) = tn.rsplit_once('.') {
                if let Some(p) = self.tree_index.get(parent) {
                    if !out.contains(p) {
                        out.push(p.clone());
                    }
                }
            }
        }
        Ok(out)
    }

    /// Serializes back to the TSV form accepted by [`Vocabulary::parse`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        if let Some(edition) = &self.edition {
            let _ = writeln!(out, "# edition: {edition}");
        }
        for t in self.terms.values() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                t.uid,
                t.name,
                t.entry_terms.join(";"),
                t.tree_numbers.join(";")
            );
        }
        out
    }
}
