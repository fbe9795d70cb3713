#![no_main]

use libfuzzer_sys::fuzz_target;
use staircase::mtx::{format_matrix_market, parse_matrix_market};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_matrix_market(text) {
        // Anything accepted must survive a write/parse cycle unchanged.
        let again = parse_matrix_market(&format_matrix_market(&m)).expect("reparse");
        assert_eq!(again.nnz(), m.nnz());
        let _ = staircase::canonicalize(m);
    }
});
