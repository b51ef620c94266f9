//! Retrieval quality measures and the comparison of decomposition modes.

mod compare;
mod metrics;
pub mod synthetic;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use compare::{compare_modes, paired_t_test, run_queries, CompareReport, ModeReport, TTest};
pub use metrics::{metrics, Metrics, TopicMetrics};

/// Relevant entity names per topic.
pub type Qrels = BTreeMap<String, BTreeSet<String>>;

/// Ranked entity names per topic.
pub type Run = BTreeMap<String, Vec<String>>;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("topic {0:?} is in the run but not in the relevance judgments")]
    UnknownTopic(String),
    #[error("topic {0:?} has no relevant entities")]
    EmptyTopic(String),
    #[error("topic {topic:?} lists {entity:?} twice")]
    DuplicateEntity { topic: String, entity: String },
    #[error("topic {topic:?}: {source}")]
    Query {
        topic: String,
        source: crate::query::QueryError,
    },
    #[error(transparent)]
    Index(#[from] crate::index::IndexError),
}

fn tsv_records(text: &str) -> impl Iterator<Item = (usize, Result<(&str, &str), EvalError>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        let rec = match line.split_once('\t') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok((a.trim(), b.trim()))
            }
            _ => Err(EvalError::Malformed {
                line: i + 1,
                reason: "expected `topic<TAB>value`".into(),
            }),
        };
        Some((i + 1, rec))
    })
}

/// Parses `topic<TAB>entity` lines.
pub fn parse_qrels(text: &str) -> Result<Qrels, EvalError> {
    let mut qrels = Qrels::new();
    for (_, rec) in tsv_records(text) {
        let (topic, entity) = rec?;
        qrels
            .entry(topic.to_string())
            .or_default()
            .insert(entity.to_string());
    }
    Ok(qrels)
}

/// Parses `topic<TAB>query` lines, keeping file order.
pub fn parse_queries(text: &str) -> Result<Vec<(String, String)>, EvalError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (line, rec) in tsv_records(text) {
        let (topic, query) = rec?;
        if out.iter().any(|(t, _)| t == topic) {
            return Err(EvalError::Malformed {
                line,
                reason: format!("duplicate topic {topic:?}"),
            });
        }
        out.push((topic.to_string(), query.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_parsing() {
        let q = parse_qrels("# comment\nt1\tBroccoli\nt1\tRhubarb\n\nt2\tItaly\n").unwrap();
        assert_eq!(q["t1"].len(), 2);
        assert!(parse_qrels("t1 Broccoli\n").is_err());
        let qs = parse_queries("t1\tclass:Plant (occurs-with edible)\n").unwrap();
        assert_eq!(qs[0].1, "class:Plant (occurs-with edible)");
        assert!(parse_queries("a\tx\na\ty\n").is_err());
    }
}
