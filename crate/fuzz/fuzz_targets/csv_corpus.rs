#![no_main]

use libfuzzer_sys::fuzz_target;
use sgdtext::corpus::read_corpus;
use sgdtext::{Schema, StopWords};

fuzz_target!(|data: &[u8]| {
    let stop = StopWords::english();
    for schema in [Schema::generic(), Schema::gtd()] {
        if let Ok(loaded) = read_corpus(data, &schema, &stop) {
            for doc in &loaded.corpus.documents {
                assert!(!doc.is_empty());
                assert!(doc.iter().all(|t| t.bytes().all(|b| b.is_ascii_lowercase())));
            }
        }
    }
});
