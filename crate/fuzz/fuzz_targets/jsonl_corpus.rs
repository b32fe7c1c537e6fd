#![no_main]

use std::collections::BTreeMap;

use libfuzzer_sys::fuzz_target;
use sgdtext::LabeledCorpus;

fuzz_target!(|data: &[u8]| {
    if let Ok(corpus) = LabeledCorpus::read_jsonl(data, BTreeMap::new()) {
        let mut out = Vec::new();
        corpus.write_jsonl(&mut out).unwrap();
        let again = LabeledCorpus::read_jsonl(&out[..], BTreeMap::new()).unwrap();
        assert_eq!(again, corpus);
    }
});
