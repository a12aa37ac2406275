#![no_main]

use libfuzzer_sys::fuzz_target;
use stackq::dynamics::CzCalibration;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cal) = CzCalibration::from_json(text) {
        if let Ok(again) = CzCalibration::from_json(&cal.to_json()) {
            assert_eq!(again.to_json(), cal.to_json());
        }
    }
});
