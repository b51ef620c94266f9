use std::collections::BTreeSet;

use serde::Serialize;

use super::{EvalError, Qrels, Run};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicMetrics {
    pub topic: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub p_at_10: f64,
    pub r_prec: f64,
    pub ap: f64,
    pub ndcg: f64,
}

/// FP and FN are summed over topics; the rest are macro averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub topics: Vec<TopicMetrics>,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub p_at_10: f64,
    pub r_prec: f64,
    pub map: f64,
    pub ndcg: f64,
}

/// Binary-relevance measures for every judged topic. A judged topic missing
/// from the run counts as an empty result; precision of an empty result is 0.
pub fn metrics(run: &Run, qrels: &Qrels) -> Result<Metrics, EvalError> {
    if let Some(topic) = run.keys().find(|t| !qrels.contains_key(*t)) {
        return Err(EvalError::UnknownTopic(topic.clone()));
    }
    let empty = Vec::new();
    let mut topics = Vec::with_capacity(qrels.len());
    for (topic, relevant) in qrels {
        if relevant.is_empty() {
            return Err(EvalError::EmptyTopic(topic.clone()));
        }
        let ranked = run.get(topic).unwrap_or(&empty);
        let mut seen = BTreeSet::new();
        if let Some(dup) = ranked.iter().find(|e| !seen.insert(e.as_str())) {
            return Err(EvalError::DuplicateEntity {
                topic: topic.clone(),
                entity: dup.clone(),
            });
        }
        topics.push(topic_metrics(topic, ranked, relevant));
    }
    let n = topics.len().max(1) as f64;
    let mean = |f: fn(&TopicMetrics) -> f64| topics.iter().map(f).sum::<f64>() / n;
    Ok(Metrics {
        fp: topics.iter().map(|t| t.fp).sum(),
        fn_: topics.iter().map(|t| t.fn_).sum(),
        precision: mean(|t| t.precision),
        recall: mean(|t| t.recall),
        f1: mean(|t| t.f1),
        p_at_10: mean(|t| t.p_at_10),
        r_prec: mean(|t| t.r_prec),
        map: mean(|t| t.ap),
        ndcg: mean(|t| t.ndcg),
        topics,
    })
}

fn topic_metrics(topic: &str, ranked: &[String], relevant: &BTreeSet<String>) -> TopicMetrics {
    let hit: Vec<bool> = ranked.iter().map(|e| relevant.contains(e)).collect();
    let tp = hit.iter().filter(|&&h| h).count();
    let r = relevant.len();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, ranked.len());
    let recall = ratio(tp, r);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let hits_in = |k: usize| hit.iter().take(k).filter(|&&h| h).count();

    let mut found = 0;
    let mut ap_sum = 0.0;
    let mut dcg = 0.0;
    for (i, &h) in hit.iter().enumerate() {
        if h {
            found += 1;
            ap_sum += found as f64 / (i + 1) as f64;
            dcg += 1.0 / ((i + 2) as f64).log2();
        }
    }
    let idcg: f64 = (0..r).map(|i| 1.0 / ((i + 2) as f64).log2()).sum();

    TopicMetrics {
        topic: topic.to_string(),
        tp,
        fp: ranked.len() - tp,
        fn_: r - tp,
        precision,
        recall,
        f1,
        p_at_10: hits_in(10) as f64 / 10.0,
        r_prec: ratio(hits_in(r), r),
        ap: ap_sum / r as f64,
        ndcg: dcg / idcg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn worked_example() {
        let qrels = Qrels::from([(
            "t".into(),
            ["a", "b", "c"].iter().map(|s| s.to_string()).collect(),
        )]);
        let run = Run::from([("t".into(), strings(&["a", "x", "b"]))]);
        let m = metrics(&run, &qrels).unwrap();
        let t = &m.topics[0];
        assert!((t.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((t.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((t.r_prec - 2.0 / 3.0).abs() < 1e-12);
        assert!((t.ap - 5.0 / 9.0).abs() < 1e-12);
        assert_eq!((t.fp, t.fn_), (1, 1));
    }

    #[test]
    fn missing_and_unknown_topics() {
        let qrels = Qrels::from([("t".into(), ["a"].iter().map(|s| s.to_string()).collect())]);
        let m = metrics(&Run::new(), &qrels).unwrap();
        assert_eq!((m.precision, m.recall, m.fn_), (0.0, 0.0, 1));
        let bad = Run::from([("u".into(), strings(&["a"]))]);
        assert!(matches!(
            metrics(&bad, &qrels),
            Err(EvalError::UnknownTopic(_))
        ));
        let dup = Run::from([("t".into(), strings(&["a", "a"]))]);
        assert!(metrics(&dup, &qrels).is_err());
    }
}
