#![allow(dead_code)]

use semfts_core::corpus::Corpus;
use semfts_core::nlp::{Context, Item};
use semfts_core::ontology::Ontology;

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn load() -> (Ontology, Corpus) {
    let ontology = Ontology::parse_tsv(&fixture("ontology.tsv")).unwrap();
    let loaded = Corpus::parse_jsonl(&fixture("corpus.jsonl"), &ontology).unwrap();
    assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
    (ontology, loaded.corpus)
}

pub fn item_text(ontology: &Ontology, c: &Context) -> String {
    c.items
        .iter()
        .map(|it| match &it.item {
            Item::Word(w) => w.clone(),
            Item::Entity(e) => format!("#{}", ontology.entity_name(*e)),
        })
        .collect::<Vec<_>>()
        .join(" ")
}
