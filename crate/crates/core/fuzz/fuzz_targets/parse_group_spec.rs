#![no_main]

use libfuzzer_sys::fuzz_target;
use ptmap::lie::GroupSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = GroupSpec::parse(text) {
        if let Ok(group) = spec.build() {
            assert!(group.algebra().dim() > 0);
        }
    }
});
