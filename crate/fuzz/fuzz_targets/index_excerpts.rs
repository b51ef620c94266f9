#![no_main]

use libfuzzer_sys::fuzz_target;
use semfts_core::index::format::decode_excerpts;

fuzz_target!(|data: &[u8]| {
    let _ = decode_excerpts(data);
});
