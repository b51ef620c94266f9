#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use semfts_core::ontology::Ontology;
use semfts_core::query::{parse_query, parse_raw, NodePath};

fn ontology() -> &'static Ontology {
    static O: OnceLock<Ontology> = OnceLock::new();
    O.get_or_init(|| {
        Ontology::parse_tsv(include_str!("../../crates/core/fixtures/ontology.tsv")).unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = text.parse::<NodePath>();
    if parse_raw(text).is_err() {
        return;
    }
    if let Ok(q) = parse_query(text, ontology()) {
        let again = parse_query(&q.to_text(ontology()), ontology()).unwrap();
        assert_eq!(again, q);
    }
});
