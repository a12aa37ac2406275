#![no_main]

use libfuzzer_sys::fuzz_target;
use stackq::device::{load_device, save_device};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(device) = load_device(text) {
        let again = load_device(&save_device(&device)).expect("saved config reloads");
        assert_eq!(save_device(&again), save_device(&device));
    }
});
