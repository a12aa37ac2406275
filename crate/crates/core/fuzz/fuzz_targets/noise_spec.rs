#![no_main]

use libfuzzer_sys::fuzz_target;
use stackq::dynamics::NoiseSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<NoiseSpec>(data) else { return };
    if spec.validate().is_ok() {
        for id in spec.modes.keys() {
            let (g1, gphi) = spec.rates(id);
            assert!(g1 >= 0.0 && gphi >= 0.0);
        }
    }
});
