//! Generated collections with planted false co-occurrences.
//!
//! Every topic asks for fruits described by one attribute word. Relevant
//! fruits have the word in the same clause. Sentence distractors have it in
//! another clause of the same sentence, section distractors in another
//! sentence of the same section. A contexts index should return no
//! distractors, a sentences index the sentence distractors, a sections index
//! both kinds.

use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde_json::json;

use super::Qrels;
use crate::corpus::Corpus;
use crate::ontology::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub topics: usize,
    pub relevant: usize,
    pub sentence_distractors: usize,
    pub section_distractors: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            topics: 5,
            relevant: 3,
            sentence_distractors: 2,
            section_distractors: 2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub ontology_tsv: String,
    pub corpus_jsonl: String,
    pub ontology: Ontology,
    pub corpus: Corpus,
    pub queries: Vec<(String, String)>,
    pub qrels: Qrels,
}

fn attribute(topic: usize) -> String {
    let letters = [
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
    ];
    let vowels = ["a", "e", "i", "o", "u"];
    let mut word = String::from("qu");
    let mut n = topic;
    loop {
        word.push_str(letters[n % letters.len()]);
        word.push_str(vowels[(n / letters.len()) % vowels.len()]);
        n /= letters.len() * vowels.len();
        if n == 0 {
            break;
        }
    }
    word
}

fn link(entity: &str) -> serde_json::Value {
    json!([{ "first_token": 0, "last_token": 0, "entity": entity }])
}

pub fn generate(config: &SyntheticConfig) -> SyntheticCollection {
    let mut rng = StdRng::seed_from_u64(config.seed);
    let per_topic = config.relevant + config.sentence_distractors + config.section_distractors;
    let mut fruits: Vec<String> = (0..config.topics * per_topic)
        .map(|i| format!("Fruit{i:04}"))
        .collect();
    fruits.shuffle(&mut rng);

    let mut ontology_tsv = String::from("class\tFruit\tsubclass-of\tEntity\n");
    for f in &fruits {
        let _ = writeln!(ontology_tsv, "instance\t{f}\tis-a\tFruit");
    }

    let mut docs = Vec::new();
    let mut queries = Vec::new();
    let mut qrels = Qrels::new();
    let mut pool = fruits.iter();
    for t in 0..config.topics {
        let topic = format!("T{t}");
        let word = attribute(t);
        queries.push((topic.clone(), format!("class:Fruit (occurs-with {word})")));
        for _ in 0..config.relevant {
            let f = pool.next().expect("pool sized for all topics");
            qrels.entry(topic.clone()).or_default().insert(f.clone());
            let parse = format!("(S (NP (NNP {f})) (VP (VBZ has) (NP (NN {word}))) (. .))");
            let sentence =
                json!({ "text": format!("{f} has {word} ."), "parse": parse, "links": link(f) });
            docs.push(json!({ "sections": [{ "sentences": [sentence] }] }));
        }
        for _ in 0..config.sentence_distractors {
            let f = pool.next().expect("pool sized for all topics");
            let parse = format!(
                "(S (S (NP (NNP {f})) (VP (VBZ is) (ADJP (JJ red)))) (, ,) (CC but) \
                 (S (NP (DT the) (NN soil)) (VP (VBZ has) (NP (NN {word})))) (. .))"
            );
            let text = format!("{f} is red , but the soil has {word} .");
            let sentence = json!({ "text": text, "parse": parse, "links": link(f) });
            docs.push(json!({ "sections": [{ "sentences": [sentence] }] }));
        }
        for _ in 0..config.section_distractors {
            let f = pool.next().expect("pool sized for all topics");
            let first = json!({
                "text": format!("{f} is red ."),
                "parse": format!("(S (NP (NNP {f})) (VP (VBZ is) (ADJP (JJ red))) (. .))"),
                "links": link(f),
            });
            let second = json!({
                "text": format!("The soil has {word} ."),
                "parse": format!("(S (NP (DT The) (NN soil)) (VP (VBZ has) (NP (NN {word}))) (. .))"),
            });
            docs.push(json!({ "sections": [{ "sentences": [first, second] }] }));
        }
    }
    docs.shuffle(&mut rng);

    let mut corpus_jsonl = String::new();
    for (i, mut doc) in docs.into_iter().enumerate() {
        doc["id"] = json!(format!("d{i}"));
        doc["title"] = json!(format!("Orchard note {i}"));
        corpus_jsonl.push_str(&doc.to_string());
        corpus_jsonl.push('\n');
    }
    let ontology = Ontology::parse_tsv(&ontology_tsv).expect("generated ontology is valid");
    let corpus = Corpus::parse_jsonl(&corpus_jsonl, &ontology)
        .expect("generated corpus is valid")
        .corpus;
    SyntheticCollection {
        ontology_tsv,
        corpus_jsonl,
        ontology,
        corpus,
        queries,
        qrels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_words_are_distinct_tokens() {
        let words: std::collections::BTreeSet<String> = (0..500).map(attribute).collect();
        assert_eq!(words.len(), 500);
        assert!(words.iter().all(|w| crate::nlp::tokenize(w).len() == 1));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&SyntheticConfig::default());
        let b = generate(&SyntheticConfig::default());
        assert_eq!(a.corpus_jsonl, b.corpus_jsonl);
        assert_eq!(a.qrels.len(), 5);
        assert_eq!(a.corpus.documents().len(), 5 * 7);
    }
}
