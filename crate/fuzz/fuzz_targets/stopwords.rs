#![no_main]

use libfuzzer_sys::fuzz_target;
use sgdtext::{clean_text, StopWords};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let stop = StopWords::parse(text);
    for token in clean_text(text, &stop) {
        assert!(!stop.contains(&token));
    }
});
