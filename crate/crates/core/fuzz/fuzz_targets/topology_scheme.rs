#![no_main]

use libfuzzer_sys::fuzz_target;
use stackq::topology::{parse_dims, parse_edge_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((r, c)) = parse_dims(text) {
        assert!(r > 0 && c > 0);
    }
    if let Ok(edges) = parse_edge_list(text) {
        assert!(edges.iter().all(|(a, b)| !a.is_empty() && !b.is_empty()));
    }
});
