#![no_main]

use libfuzzer_sys::fuzz_target;
use ptmap::experiment::{diff_reports, parse_report};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = parse_report(text) {
        let _ = report.to_json();
        let _ = report.exit_status();
        assert!(diff_reports(&report, &report).identical());
    }
});
