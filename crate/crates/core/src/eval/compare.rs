use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{metrics, EvalError, Metrics, Qrels, Run};
use crate::corpus::Corpus;
use crate::index::{build_index, Index, IndexConfig};
use crate::nlp::{decompose, DecomposeOptions, Mode};
use crate::ontology::Ontology;
use crate::query::{evaluate, parse_query};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub mode: String,
    pub contexts: u32,
    pub metrics: Metrics,
}

/// Paired two-tailed Student's t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub modes: Vec<ModeReport>,
    /// Per-topic F1 of contexts against sentences.
    pub f1_t_test: Option<TTest>,
}

/// Runs each query and records the ranked entity names per topic.
pub fn run_queries(queries: &[(String, String)], index: &Index) -> Result<Run, EvalError> {
    let ontology = index.ontology();
    let mut run = Run::new();
    for (topic, text) in queries {
        let q = parse_query(text, ontology).map_err(|source| EvalError::Query {
            topic: topic.clone(),
            source,
        })?;
        let results = evaluate(&q, index).map_err(|source| EvalError::Query {
            topic: topic.clone(),
            source,
        })?;
        let names = results
            .groups
            .iter()
            .map(|g| ontology.entity_name(g.entity).to_string())
            .collect();
        run.insert(topic.clone(), names);
    }
    Ok(run)
}

/// Builds a contexts, sentences and sections index over the corpus and
/// measures the queries on each.
pub fn compare_modes(
    queries: &[(String, String)],
    qrels: &Qrels,
    corpus: &Corpus,
    ontology: &Ontology,
    config: &IndexConfig,
) -> Result<CompareReport, EvalError> {
    let mut modes = Vec::new();
    for mode in Mode::ALL {
        let contexts = decompose(corpus, ontology, &DecomposeOptions::with_mode(mode));
        let index = build_index(&contexts, ontology, Some(corpus), config)?;
        let run = run_queries(queries, &index)?;
        modes.push(ModeReport {
            mode: mode.to_string(),
            contexts: index.num_contexts(),
            metrics: metrics(&run, qrels)?,
        });
    }
    let f1 = |m: &ModeReport| m.metrics.topics.iter().map(|t| t.f1).collect::<Vec<_>>();
    let f1_t_test = paired_t_test(&f1(&modes[0]), &f1(&modes[1]));
    Ok(CompareReport { modes, f1_t_test })
}

/// `None` with fewer than two pairs.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Option<TTest> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        let (t, p) = if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), 0.0)
        };
        return Some(TTest { t, df, p });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64).ok()?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Some(TTest { t, df, p })
}

const COLUMNS: [&str; 11] = [
    "mode",
    "contexts",
    "FP",
    "FN",
    "precision",
    "recall",
    "F1",
    "P@10",
    "R-Prec",
    "MAP",
    "nDCG",
];

impl CompareReport {
    fn rows(&self) -> Vec<[String; 11]> {
        self.modes
            .iter()
            .map(|m| {
                let x = &m.metrics;
                [
                    m.mode.clone(),
                    m.contexts.to_string(),
                    x.fp.to_string(),
                    x.fn_.to_string(),
                    format!("{:.3}", x.precision),
                    format!("{:.3}", x.recall),
                    format!("{:.3}", x.f1),
                    format!("{:.3}", x.p_at_10),
                    format!("{:.3}", x.r_prec),
                    format!("{:.3}", x.map),
                    format!("{:.3}", x.ndcg),
                ]
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = COLUMNS.join("\t");
        out.push('\n');
        for row in self.rows() {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let rows = self.rows();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|i| {
                rows.iter()
                    .map(|r| r[i].len())
                    .chain([COLUMNS[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |cells: Vec<&str>, out: &mut String| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            out.push_str(padded.join("  ").trim_end());
            out.push('\n');
        };
        line(COLUMNS.to_vec(), &mut out);
        for row in &rows {
            line(row.iter().map(String::as_str).collect(), &mut out);
        }
        match &self.f1_t_test {
            _ if self.modes.len() < 2 => {}
            Some(t) => {
                let _ = writeln!(
                    out,
                    "F1 contexts vs sentences: t = {:.3}, df = {}, p = {:.4}",
                    t.t, t.df, t.p
                );
            }
            None => out.push_str("F1 contexts vs sentences: too few topics for a t-test\n"),
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_test_matches_hand_computation() {
        // d = [0.1, 0.2, 0.3]: mean 0.2, sd 0.1, t = 0.2 / (0.1 / sqrt 3) = 2 sqrt 3.
        let t = paired_t_test(&[0.6, 0.7, 0.8], &[0.5, 0.5, 0.5]).unwrap();
        assert!((t.t - 2.0 * 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(t.df, 2);
        // Two-tailed p for t = 3.4641 with 2 df is 0.0742 (closed form for df = 2).
        let closed = 1.0 - t.t / (2.0 + t.t * t.t).sqrt();
        assert!((t.p - closed).abs() < 1e-9);
        assert_eq!(paired_t_test(&[1.0, 1.0], &[1.0, 1.0]).unwrap().p, 1.0);
        assert!(paired_t_test(&[1.0], &[0.0]).is_none());
    }
}
