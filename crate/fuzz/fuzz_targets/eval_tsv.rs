#![no_main]

use libfuzzer_sys::fuzz_target;
use semfts_core::eval::{parse_qrels, parse_queries};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_qrels(text);
    let _ = parse_queries(text);
});
