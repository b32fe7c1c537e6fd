#![no_main]

use libfuzzer_sys::fuzz_target;
use sgdtext::LinearModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = LinearModel::from_json(text) {
        let again = LinearModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(again, model);
    }
});
