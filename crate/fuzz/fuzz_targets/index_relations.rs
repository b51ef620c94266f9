#![no_main]

use libfuzzer_sys::fuzz_target;
use semfts_core::index::format::decode_relations;

fuzz_target!(|data: &[u8]| {
    let _ = decode_relations(data);
});
