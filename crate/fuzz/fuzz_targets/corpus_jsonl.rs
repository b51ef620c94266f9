#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use semfts_core::corpus::Corpus;
use semfts_core::nlp::{decompose, DecomposeOptions};
use semfts_core::ontology::Ontology;

fn ontology() -> &'static Ontology {
    static O: OnceLock<Ontology> = OnceLock::new();
    O.get_or_init(|| {
        Ontology::parse_tsv(include_str!("../../crates/core/fixtures/ontology.tsv")).unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(loaded) = Corpus::parse_jsonl(text, ontology()) {
        let _ = decompose(&loaded.corpus, ontology(), &DecomposeOptions::default());
    }
});
