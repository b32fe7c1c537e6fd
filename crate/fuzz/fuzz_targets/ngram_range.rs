#![no_main]

use libfuzzer_sys::fuzz_target;
use sgdtext::NgramRange;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(range) = text.parse::<NgramRange>() {
        assert!(range.lo() >= 1 && range.lo() <= range.hi());
        assert_eq!(range.to_string().parse::<NgramRange>().unwrap(), range);
    }
});
