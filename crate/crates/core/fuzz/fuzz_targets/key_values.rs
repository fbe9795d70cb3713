#![no_main]

use libfuzzer_sys::fuzz_target;
use staircase::models::{KeyValues, ModelSpec};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let Ok(kv) = KeyValues::parse(&text) else {
        return;
    };
    for model in ["mutex", "hess", "ncd"] {
        // Validation only; generation at fuzzed sizes would dominate the run.
        let _ = ModelSpec::from_key_values(model, &kv, 0);
    }
});
