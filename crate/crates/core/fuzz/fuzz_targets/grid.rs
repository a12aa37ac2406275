#![no_main]

use libfuzzer_sys::fuzz_target;
use stackq::grid::{parse_grid, MAX_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_grid(text) {
        assert!(!values.is_empty() && values.len() <= MAX_POINTS);
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
