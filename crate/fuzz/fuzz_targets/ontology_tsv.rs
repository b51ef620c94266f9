#![no_main]

use libfuzzer_sys::fuzz_target;
use semfts_core::ontology::Ontology;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(o) = Ontology::parse_tsv(text) {
        let back = Ontology::from_parts(o.to_parts()).unwrap();
        assert_eq!(back.num_entities(), o.num_entities());
    }
});
