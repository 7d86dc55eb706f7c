#![no_main]

use libfuzzer_sys::fuzz_target;
use ptmap::path::codec::decode_raw;

fuzz_target!(|data: &[u8]| {
    if let Ok(raw) = decode_raw(data) {
        assert_eq!(raw.values.len(), raw.n * raw.dim);
        assert!(raw.values.iter().all(|v| v.is_finite()));
    }
});
