#![no_main]

use libfuzzer_sys::fuzz_target;
use semfts_core::index::format::decode_contexts;

fuzz_target!(|data: &[u8]| {
    let _ = decode_contexts(data);
});
