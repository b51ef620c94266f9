mod common;

use proptest::prelude::*;
use semfts_core::eval::synthetic::{generate, SyntheticConfig};
use semfts_core::eval::{
    compare_modes, metrics, paired_t_test, parse_qrels, parse_queries, EvalError, Qrels, Run,
};
use semfts_core::index::IndexConfig;

fn qrels(topics: &[(&str, &[&str])]) -> Qrels {
    topics
        .iter()
        .map(|(t, rel)| (t.to_string(), rel.iter().map(|s| s.to_string()).collect()))
        .collect()
}

fn run(topics: &[(&str, &[&str])]) -> Run {
    topics
        .iter()
        .map(|(t, ranked)| {
            (
                t.to_string(),
                ranked.iter().map(|s| s.to_string()).collect(),
            )
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn five_topic_fixture() {
    let q = qrels(&[
        ("t1", &["a", "b"]),
        ("t2", &["a", "b", "c"]),
        ("t3", &["a"]),
        ("t4", &["a"]),
        ("t5", &["a", "b"]),
    ]);
    let r = run(&[
        ("t1", &["a", "b"]),
        ("t2", &["a", "x", "b"]),
        ("t3", &[]),
        ("t4", &["x", "y"]),
        ("t5", &["x", "a", "b", "y"]),
    ]);
    let m = metrics(&r, &q).unwrap();
    let t = &m.topics;

    assert_eq!(
        (
            t[0].precision,
            t[0].recall,
            t[0].f1,
            t[0].r_prec,
            t[0].ap,
            t[0].ndcg
        ),
        (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    );
    assert!(close(t[1].ap, 5.0 / 9.0) && (t[1].ap - 0.5556).abs() < 1e-4);
    assert!(close(t[1].precision, 2.0 / 3.0) && close(t[1].r_prec, 2.0 / 3.0));
    let l3 = 3f64.log2();
    assert!(close(t[1].ndcg, 1.5 / (1.5 + 1.0 / l3)));
    assert_eq!((t[2].precision, t[2].recall, t[2].fn_), (0.0, 0.0, 1));
    assert_eq!((t[3].fp, t[3].f1, t[3].ndcg), (2, 0.0, 0.0));
    assert!(close(t[4].precision, 0.5) && close(t[4].f1, 2.0 / 3.0));
    assert!(close(t[4].r_prec, 0.5) && close(t[4].ap, 7.0 / 12.0));
    assert!(close(t[4].ndcg, (1.0 / l3 + 0.5) / (1.0 + 1.0 / l3)));

    assert_eq!((m.fp, m.fn_), (5, 3));
    assert!(close(m.precision, 13.0 / 30.0));
    assert!(close(m.recall, 8.0 / 15.0));
    assert!(close(m.f1, 7.0 / 15.0));
    assert!(close(m.r_prec, 13.0 / 30.0));
    assert!(close(m.map, 77.0 / 180.0));
    assert!(close(m.p_at_10, 0.12));
}

#[test]
fn perfect_run_scores_one() {
    let q = qrels(&[("t", &["a", "b", "c"])]);
    let m = metrics(&run(&[("t", &["c", "a", "b"])]), &q).unwrap();
    assert_eq!((m.fp, m.fn_), (0, 0));
    for v in [m.precision, m.recall, m.f1, m.map, m.ndcg, m.r_prec] {
        assert!(close(v, 1.0));
    }
}

#[test]
fn malformed_inputs() {
    assert!(matches!(
        metrics(&run(&[("zz", &["a"])]), &qrels(&[("t", &["a"])])),
        Err(EvalError::UnknownTopic(_))
    ));
    assert!(matches!(
        metrics(&run(&[("t", &["a", "a"])]), &qrels(&[("t", &["a"])])),
        Err(EvalError::DuplicateEntity { .. })
    ));
    assert!(matches!(
        parse_qrels("t1\tBroccoli\nno tab here\n"),
        Err(EvalError::Malformed { line: 2, .. })
    ));
    let queries = parse_queries("# comment\nq1\tclass:Plant\n\n").unwrap();
    assert_eq!(queries, [("q1".to_string(), "class:Plant".to_string())]);
}

#[test]
fn fixture_modes_compare() {
    let (ontology, corpus) = common::load();
    let queries = parse_queries(&common::fixture("queries.tsv")).unwrap();
    let qrels = parse_qrels(&common::fixture("qrels.tsv")).unwrap();
    let report = compare_modes(
        &queries,
        &qrels,
        &corpus,
        &ontology,
        &IndexConfig::default(),
    )
    .unwrap();
    let [contexts, sentences, sections] = &report.modes[..] else {
        panic!()
    };
    assert_eq!(contexts.metrics.fp, 0);
    assert!(sentences.metrics.fp >= 1);
    assert!(sections.metrics.fp >= sentences.metrics.fp);
    assert!(sections.metrics.recall >= sentences.metrics.recall);
    assert!(sentences.metrics.recall >= contexts.metrics.recall);
    assert!(report.to_table().contains("contexts"));
    assert_eq!(report.to_tsv().lines().count(), 4);
}

#[test]
fn planted_distractors_order_the_modes() {
    let config = SyntheticConfig::default();
    let c = generate(&config);
    let report = compare_modes(
        &c.queries,
        &c.qrels,
        &c.corpus,
        &c.ontology,
        &IndexConfig::default(),
    )
    .unwrap();
    let fp: Vec<usize> = report.modes.iter().map(|m| m.metrics.fp).collect();
    assert_eq!(
        fp,
        [
            0,
            config.topics * config.sentence_distractors,
            config.topics * (config.sentence_distractors + config.section_distractors)
        ]
    );
    assert!(report.modes.iter().all(|m| m.metrics.fn_ == 0));
}

#[test]
fn one_clause_sentences_make_modes_agree() {
    let config = SyntheticConfig {
        sentence_distractors: 0,
        section_distractors: 0,
        ..Default::default()
    };
    let c = generate(&config);
    let report = compare_modes(
        &c.queries,
        &c.qrels,
        &c.corpus,
        &c.ontology,
        &IndexConfig::default(),
    )
    .unwrap();
    let f1: Vec<f64> = report.modes.iter().map(|m| m.metrics.f1).collect();
    assert_eq!(f1, [1.0, 1.0, 1.0]);
}

#[test]
fn t_test_on_known_differences() {
    // Differences 1, 2, 3, 4: mean 2.5, sd sqrt(5/3), t = 2.5 / (sd / 2).
    let t = paired_t_test(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4]).unwrap();
    assert!(close(t.t, 2.5 / ((5.0f64 / 3.0).sqrt() / 2.0)));
    assert_eq!(t.df, 3);
    assert!(t.p > 0.0 && t.p < 0.05);
    assert!(paired_t_test(&[1.0], &[0.0]).is_none());
}

fn entity() -> impl Strategy<Value = String> {
    (0u8..12).prop_map(|i| format!("e{i}"))
}

proptest! {
    #[test]
    fn metric_invariants(
        relevant in prop::collection::btree_set(entity(), 1..6),
        ranked in prop::collection::btree_set(entity(), 0..10)
            .prop_map(|s| s.into_iter().collect::<Vec<_>>())
            .prop_shuffle(),
    ) {
        let q = Qrels::from([("t".to_string(), relevant.clone())]);
        let r = Run::from([("t".to_string(), ranked.clone())]);
        let m = metrics(&r, &q).unwrap();
        let t = &m.topics[0];
        for v in [t.precision, t.recall, t.f1, t.p_at_10, t.r_prec, t.ap, t.ndcg] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
        prop_assert_eq!(t.fp + t.tp, ranked.len());
        prop_assert_eq!(t.fn_ + t.tp, relevant.len());

        // Relevant first, tail permuted: R-Prec is unchanged and nDCG is 1.
        let mut ideal: Vec<String> = relevant.iter().cloned().collect();
        let mut tail: Vec<String> = ranked.iter().filter(|e| !relevant.contains(*e)).cloned().collect();
        let base = ideal.clone();
        ideal.extend(tail.clone());
        tail.reverse();
        let mut other = base;
        other.extend(tail);
        let a = metrics(&Run::from([("t".to_string(), ideal)]), &q).unwrap();
        let b = metrics(&Run::from([("t".to_string(), other)]), &q).unwrap();
        prop_assert_eq!(a.topics[0].r_prec, b.topics[0].r_prec);
        prop_assert!((a.topics[0].ndcg - 1.0).abs() < 1e-12);
    }
}
