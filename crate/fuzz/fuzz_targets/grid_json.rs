#![no_main]

use libfuzzer_sys::fuzz_target;
use sgdtext::{enumerate, GridSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = GridSpec::from_json(text) {
        if spec.candidate_count() <= 10_000 {
            if let Ok(points) = enumerate(&spec) {
                assert_eq!(points.len(), spec.candidate_count());
            }
        }
    }
});
