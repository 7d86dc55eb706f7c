#![no_main]

use libfuzzer_sys::fuzz_target;
use ptmap::experiment::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::parse(text) {
        let again = ExperimentConfig::parse(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(config, again);
    }
});
