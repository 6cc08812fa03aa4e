//! PubMed Boolean queries restricted to an AND of OR-clauses.
//!
//! The accepted grammar is deliberately small: atoms with an optional field
//! tag, `AND`/`OR` (case-insensitive) and parentheses. After flattening the
//! query must be a conjunction of disjunctions of atoms. `NOT` and mixed
//! operators at one level are reported as [`QueryError::UnsupportedStructure`]
//! rather than guessed at.
//!
//! Atoms tagged `[MeSH]`, `[MeSH Terms]` or `[mh]` are MeSH headings; atoms
//! tagged `[tiab]`, `[Title/Abstract]` or untagged are keywords.

use std::fmt;

use thiserror::Error;

use crate::suggest::SuggestionGroup;
use crate::text::normalize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at byte {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unsupported query structure: {0}")]
    UnsupportedStructure(String),
    #[error("query has no keywords left after removing MeSH terms")]
    EmptyAfterStrip,
    #[error("no single clause contains all of the keywords {0:?}")]
    UnmatchedGroup(Vec<String>),
    #[error("a clause needs at least one keyword or MeSH term")]
    EmptyClause,
    #[error("a query needs at least one clause")]
    NoClauses,
}

/// A disjunction of keywords and MeSH headings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanClause {
    keywords: Vec<String>,
    mesh_terms: Vec<String>,
}

impl BooleanClause {
    pub fn new(keywords: Vec<String>, mesh_terms: Vec<String>) -> Result<Self, QueryError> {
        if keywords.is_empty() && mesh_terms.is_empty() {
            return Err(QueryError::EmptyClause);
        }
        Ok(Self {
            keywords,
            mesh_terms,
        })
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn mesh_terms(&self) -> &[String] {
        &self.mesh_terms
    }

    /// Appends headings not already present (compared after normalisation).
    pub fn add_mesh_terms<'a>(&mut self, terms: impl IntoIterator<Item = &'a str>) {
        for term in terms {
            let key = normalize(term);
            if !self.mesh_terms.iter().any(|m| normalize(m) == key) {
                self.mesh_terms.push(term.to_string());
            }
        }
    }
}

/// A conjunction of [`BooleanClause`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredQuery {
    clauses: Vec<BooleanClause>,
}

impl StructuredQuery {
    pub fn new(clauses: Vec<BooleanClause>) -> Result<Self, QueryError> {
        if clauses.is_empty() {
            return Err(QueryError::NoClauses);
        }
        Ok(Self { clauses })
    }

    pub fn clauses(&self) -> &[BooleanClause] {
        &self.clauses
    }

    /// Every keyword in clause order.
    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.clauses
            .iter()
            .flat_map(|c| c.keywords.iter().map(String::as_str))
    }

    pub fn parse(text: &str) -> Result<Self, QueryError> {
        parse_query(text)
    }

    pub fn render(&self) -> String {
        render_query(self)
    }
}

impl fmt::Display for StructuredQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_query(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Keyword,
    Mesh,
}

fn field_for_tag(tag: &str) -> Option<Field> {
    match tag.trim().to_ascii_lowercase().as_str() {
        "tiab" | "title/abstract" => Some(Field::Keyword),
        "mesh" | "mesh terms" | "mh" => Some(Field::Mesh),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    And,
    Or,
    Not,
    Atom { text: String, field: Field },
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn syntax(position: usize, message: impl Into<String>) -> QueryError {
    QueryError::SyntaxError {
        position,
        message: message.into(),
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn read_word(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | '"') {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn tokens(mut self) -> Result<Vec<(usize, Token)>, QueryError> {
        let mut out = Vec::new();
        // Words accumulated into the atom currently being read.
        let mut pending: Vec<String> = Vec::new();
        let mut pending_start = 0usize;

        let flush = |pending: &mut Vec<String>, start: usize, out: &mut Vec<(usize, Token)>| {
            if !pending.is_empty() {
                out.push((
                    start,
                    Token::Atom {
                        text: pending.join(" "),
                        field: Field::Keyword,
                    },
                ));
                pending.clear();
            }
        };

        loop {
            self.skip_ws();
            let at = self.pos;
            let Some(c) = self.peek() else { break };
            match c {
                '(' | ')' => {
                    flush(&mut pending, pending_start, &mut out);
                    self.pos += 1;
                    out.push((
                        at,
                        if c == '(' {
                            Token::LParen
                        } else {
                            Token::RParen
                        },
                    ));
                }
                ']' => return Err(syntax(at, "unexpected ']'")),
                '[' => {
                    if pending.is_empty() {
                        return Err(syntax(at, "field tag without a term"));
                    }
                    let close = self.src[at..]
                        .find(']')
                        .ok_or_else(|| syntax(at, "unterminated field tag"))?;
                    let tag = &self.src[at + 1..at + close];
                    let field = field_for_tag(tag)
                        .ok_or_else(|| syntax(at, format!("unsupported field tag [{tag}]")))?;
                    self.pos = at + close + 1;
                    out.push((
                        pending_start,
                        Token::Atom {
                            text: pending.join(" "),
                            field,
                        },
                    ));
                    pending.clear();
                }
                '"' => {
                    let close = self.src[at + 1..]
                        .find('"')
                        .ok_or_else(|| syntax(at, "unterminated quote"))?;
                    let inner = self.src[at + 1..at + 1 + close].trim();
                    if inner.is_empty() {
                        return Err(syntax(at, "empty quoted term"));
                    }
                    if pending.is_empty() {
                        pending_start = at;
                    }
                    pending.push(inner.to_string());
                    self.pos = at + close + 2;
                }
                _ => {
                    let word = self.read_word();
                    let op = match word.to_ascii_uppercase().as_str() {
                        "AND" => Some(Token::And),
                        "OR" => Some(Token::Or),
                        "NOT" => Some(Token::Not),
                        _ => None,
                    };
                    match op {
                        Some(op) => {
                            flush(&mut pending, pending_start, &mut out);
                            out.push((at, op));
                        }
                        None => {
                            if pending.is_empty() {
                                pending_start = at;
                            }
                            pending.push(word.to_string());
                        }
                    }
                }
            }
        }
        flush(&mut pending, pending_start, &mut out);
        Ok(out)
    }
}

#[derive(Debug)]
enum Node {
    Atom(String, Field),
    And(Vec<Node>),
    Or(Vec<Node>),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    next: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.next)
    }

    fn position(&self) -> usize {
        self.peek().map_or(self.end, |(p, _)| *p)
    }

    fn primary(&mut self) -> Result<Node, QueryError> {
        let pos = self.position();
        match self.tokens.get(self.next).cloned() {
            Some((_, Token::Atom { text, field })) => {
                self.next += 1;
                Ok(Node::Atom(text, field))
            }
            Some((_, Token::LParen)) => {
                self.next += 1;
                let inner = self.sequence()?;
                match self.peek() {
                    Some((_, Token::RParen)) => {
                        self.next += 1;
                        Ok(inner)
                    }
                    _ => Err(syntax(self.position(), "expected ')'")),
                }
            }
            Some((_, Token::Not)) => Err(QueryError::UnsupportedStructure(
                "NOT is not supported".into(),
            )),
            Some((_, t)) => Err(syntax(pos, format!("expected a term, found {t:?}"))),
            None => Err(syntax(pos, "expected a term, found end of query")),
        }
    }

    /// `primary (op primary)*` with a single operator kind per level.
    fn sequence(&mut self) -> Result<Node, QueryError> {
        let first = self.primary()?;
        let mut items = vec![first];
        let mut op: Option<Token> = None;
        loop {
            let (pos, tok) = match self.peek() {
                None | Some((_, Token::RParen)) => break,
                Some((p, t)) => (*p, t.clone()),
            };
            match tok {
                Token::And | Token::Or => {
                    if let Some(prev) = &op {
                        if *prev != tok {
                            return Err(QueryError::UnsupportedStructure(format!(
                                "AND and OR mixed without parentheses at byte {pos}"
                            )));
                        }
                    }
                    op = Some(tok);
                    self.next += 1;
                    items.push(self.primary()?);
                }
                Token::Not => {
                    return Err(QueryError::UnsupportedStructure(
                        "NOT is not supported".into(),
                    ))
                }
                _ => return Err(syntax(pos, "expected AND, OR or ')'")),
            }
        }
        Ok(match op {
            None => items.pop().expect("one item"),
            Some(Token::And) => Node::And(items),
            Some(_) => Node::Or(items),
        })
    }
}

fn collect_or(node: Node, clause: &mut (Vec<String>, Vec<String>)) -> Result<(), QueryError> {
    match node {
        Node::Atom(text, Field::Keyword) => clause.0.push(text),
        Node::Atom(text, Field::Mesh) => clause.1.push(text),
        Node::Or(children) => {
            for child in children {
                collect_or(child, clause)?;
            }
        }
        Node::And(_) => {
            return Err(QueryError::UnsupportedStructure(
                "AND nested inside OR".into(),
            ))
        }
    }
    Ok(())
}

fn collect_and(node: Node, clauses: &mut Vec<BooleanClause>) -> Result<(), QueryError> {
    match node {
        Node::And(children) => {
            for child in children {
                collect_and(child, clauses)?;
            }
        }
        other => {
            let mut parts = (Vec::new(), Vec::new());
            collect_or(other, &mut parts)?;
            clauses.push(BooleanClause::new(parts.0, parts.1)?);
        }
    }
    Ok(())
}

pub fn parse_query(text: &str) -> Result<StructuredQuery, QueryError> {
    let tokens = Lexer { src: text, pos: 0 }.tokens()?;
    if tokens.is_empty() {
        return Err(syntax(0, "empty query"));
    }
    let mut parser = Parser {
        tokens,
        next: 0,
        end: text.len(),
    };
    let root = parser.sequence()?;
    if let Some((pos, _)) = parser.peek() {
        return Err(syntax(*pos, "unbalanced ')'"));
    }
    let mut clauses = Vec::new();
    collect_and(root, &mut clauses)?;
    StructuredQuery::new(clauses)
}

/// Removes every MeSH heading and drops clauses left without keywords.
pub fn strip_mesh(query: &StructuredQuery) -> Result<StructuredQuery, QueryError> {
    let clauses: Vec<BooleanClause> = query
        .clauses
        .iter()
        .filter(|c| !c.keywords.is_empty())
        .map(|c| BooleanClause {
            keywords: c.keywords.clone(),
            mesh_terms: Vec::new(),
        })
        .collect();
    if clauses.is_empty() {
        return Err(QueryError::EmptyAfterStrip);
    }
    Ok(StructuredQuery { clauses })
}

/// Attaches each group's suggested headings to the one clause containing all
/// of the group's keywords.
pub fn attach_mesh(
    query: &StructuredQuery,
    groups: &[SuggestionGroup],
) -> Result<StructuredQuery, QueryError> {
    let mut out = query.clone();
    for group in groups {
        let wanted: Vec<String> = group.keywords.iter().map(|k| normalize(k)).collect();
        let matching: Vec<usize> = out
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                let have: Vec<String> = c.keywords.iter().map(|k| normalize(k)).collect();
                wanted.iter().all(|w| have.contains(w))
            })
            .map(|(i, _)| i)
            .collect();
        if wanted.is_empty() || matching.len() != 1 {
            return Err(QueryError::UnmatchedGroup(group.keywords.clone()));
        }
        out.clauses[matching[0]].add_mesh_terms(group.terms.iter().map(|t| t.name.as_str()));
    }
    Ok(out)
}

fn needs_quotes(term: &str) -> bool {
    term.is_empty()
        || term
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']'))
        || matches!(term.to_ascii_uppercase().as_str(), "AND" | "OR" | "NOT")
}

fn render_atom(out: &mut String, term: &str, tag: &str) {
    if needs_quotes(term) {
        out.push('"');
        out.push_str(term);
        out.push('"');
    } else {
        out.push_str(term);
    }
    out.push('[');
    out.push_str(tag);
    out.push(']');
}

/// Renders `(k1[Title/Abstract] OR ... OR m1[MeSH Terms])` clauses joined by
/// ` AND `.
pub fn render_query(query: &StructuredQuery) -> String {
    let mut out = String::new();
    for (i, clause) in query.clauses.iter().enumerate() {
        if i > 0 {
            out.push_str(" AND ");
        }
        out.push('(');
        let atoms = clause
            .keywords
            .iter()
            .map(|k| (k, "Title/Abstract"))
            .chain(clause.mesh_terms.iter().map(|m| (m, "MeSH Terms")));
        for (j, (term, tag)) in atoms.enumerate() {
            if j > 0 {
                out.push_str(" OR ");
            }
            render_atom(&mut out, term, tag);
        }
        out.push(')');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suggest::{Method, SuggestedTerm};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn clause(k: &[&str], m: &[&str]) -> BooleanClause {
        BooleanClause::new(s(k), s(m)).unwrap()
    }

    #[test]
    fn parses_and_of_ors() {
        let q = parse_query("(TB[tiab] OR tuberculosis[tiab]) AND (child[tiab])").unwrap();
        assert_eq!(
            q.clauses(),
            &[
                clause(&["TB", "tuberculosis"], &[]),
                clause(&["child"], &[])
            ]
        );
    }

    #[test]
    fn routes_mesh_atoms() {
        let q = parse_query("TB[tiab] OR extensively drug-resistant tuberculosis[MeSH]").unwrap();
        assert_eq!(
            q.clauses(),
            &[clause(
                &["TB"],
                &["extensively drug-resistant tuberculosis"]
            )]
        );
        let q =
            parse_query("\"Tuberculosis\"[MeSH Terms] or tb[mh] OR lung[Title/Abstract]").unwrap();
        assert_eq!(q.clauses(), &[clause(&["lung"], &["Tuberculosis", "tb"])]);
    }

    #[test]
    fn untagged_terms_are_keywords() {
        let q = parse_query("(a OR b) and c").unwrap();
        assert_eq!(
            q.clauses(),
            &[clause(&["a", "b"], &[]), clause(&["c"], &[])]
        );
    }

    #[test]
    fn nested_ands_flatten() {
        let q = parse_query("a AND (b AND (c OR d))").unwrap();
        assert_eq!(q.clauses().len(), 3);
    }

    #[test]
    fn rejects_not_and_mixed_operators() {
        assert!(matches!(
            parse_query("A[tiab] NOT B[tiab]"),
            Err(QueryError::UnsupportedStructure(_))
        ));
        assert!(matches!(
            parse_query("A AND B OR C"),
            Err(QueryError::UnsupportedStructure(_))
        ));
        assert!(matches!(
            parse_query("A OR (B AND C)"),
            Err(QueryError::UnsupportedStructure(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(parse_query("(a OR b"), Err(syntax(7, "expected ')'")));
        assert!(matches!(
            parse_query("a)"),
            Err(QueryError::SyntaxError { position: 1, .. })
        ));
        assert!(matches!(
            parse_query(""),
            Err(QueryError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_query("a OR"),
            Err(QueryError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_query("a[tw]"),
            Err(QueryError::SyntaxError { position: 1, .. })
        ));
        assert!(matches!(
            parse_query("a[tiab] b[tiab]"),
            Err(QueryError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_query("\"open"),
            Err(QueryError::SyntaxError { .. })
        ));
    }

    #[test]
    fn strip_mesh_cases() {
        let q = StructuredQuery::new(vec![clause(&["TB"], &["X"])]).unwrap();
        assert_eq!(strip_mesh(&q).unwrap().clauses(), &[clause(&["TB"], &[])]);

        let pure = StructuredQuery::new(vec![clause(&[], &["X"])]).unwrap();
        assert_eq!(strip_mesh(&pure), Err(QueryError::EmptyAfterStrip));

        let mixed =
            StructuredQuery::new(vec![clause(&[], &["X"]), clause(&["a", "b"], &[])]).unwrap();
        assert_eq!(
            strip_mesh(&mixed).unwrap().clauses(),
            &[clause(&["a", "b"], &[])]
        );

        let plain = parse_query("(a OR b) AND c").unwrap();
        assert_eq!(strip_mesh(&plain).unwrap(), plain);
    }

    fn group(keywords: &[&str], terms: &[&str]) -> SuggestionGroup {
        SuggestionGroup {
            keywords: s(keywords),
            method: Method::AtomicBert,
            terms: terms
                .iter()
                .enumerate()
                .map(|(i, t)| SuggestedTerm {
                    rank: i,
                    name: t.to_string(),
                    uid: format!("U{i}"),
                })
                .collect(),
        }
    }

    #[test]
    fn attach_mesh_cases() {
        let q = StructuredQuery::new(vec![clause(&["TB", "tuberculosis"], &[])]).unwrap();
        let out = attach_mesh(&q, &[group(&["tb"], &["T1"])]).unwrap();
        assert_eq!(out.clauses(), &[clause(&["TB", "tuberculosis"], &["T1"])]);

        let out = attach_mesh(
            &q,
            &[group(&["TB"], &["T1"]), group(&["tuberculosis"], &["T1"])],
        )
        .unwrap();
        assert_eq!(out.clauses()[0].mesh_terms(), &s(&["T1"]));

        let two = parse_query("a AND b").unwrap();
        assert_eq!(
            attach_mesh(&two, &[group(&["a", "b"], &["T"])]),
            Err(QueryError::UnmatchedGroup(s(&["a", "b"])))
        );
    }

    #[test]
    fn renders_canonical_tags() {
        let q = StructuredQuery::new(vec![clause(
            &["TB"],
            &["extensively drug-resistant tuberculosis"],
        )])
        .unwrap();
        assert_eq!(
            render_query(&q),
            "(TB[Title/Abstract] OR \"extensively drug-resistant tuberculosis\"[MeSH Terms])"
        );
        let q = parse_query("a[tiab] AND (b[mh] OR c)").unwrap();
        let r = render_query(&q);
        assert_eq!(
            r,
            "(a[Title/Abstract]) AND (c[Title/Abstract] OR b[MeSH Terms])"
        );
        assert_eq!(r.matches(" AND ").count(), 1);
    }

    #[test]
    fn operator_words_are_quoted() {
        let q = StructuredQuery::new(vec![clause(&["and", "x(y)"], &[])]).unwrap();
        let r = render_query(&q);
        assert_eq!(r, "(\"and\"[Title/Abstract] OR \"x(y)\"[Title/Abstract])");
        assert_eq!(parse_query(&r).unwrap(), q);
    }
}
