#![no_main]

use libfuzzer_sys::fuzz_target;
use semfts_core::nlp::scr::recombine_bounded;
use semfts_core::nlp::{build_sci_tree, ParseNode, SciRules};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tree) = ParseNode::parse(text) {
        let n = tree.leaves().len() as u32;
        let sci = build_sci_tree(&tree, &SciRules::default());
        if let Some(contexts) = recombine_bounded(&sci, 256) {
            assert!(contexts.iter().flatten().all(|&t| t < n));
        }
    }
});
