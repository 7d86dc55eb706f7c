use std::time::Instant;

use ptmap::experiment::{entries, run_catalog_entry, ExitStatus, ResultBody, RunOptions};

#[test]
fn every_entry_reaches_its_expected_verdict() {
    for entry in entries() {
        let start = Instant::now();
        let report = run_catalog_entry(entry, None, &RunOptions::default()).unwrap();
        let secs = start.elapsed().as_secs_f64();
        for item in &report.results {
            match &item.body {
                ResultBody::Verdict { report: v } => {
                    let summary: Vec<String> =
                        v.evidence.iter().map(|e| format!("{}={:.3e}/{:.0e}", e.check, e.value, e.tolerance)).collect();
                    eprintln!("{:28} {:18} {:?} [{}] {secs:.2}s", entry.name, item.key, v.verdict, summary.join(", "));
                }
                ResultBody::Error { message } => eprintln!("{:28} error: {message}", entry.name),
                ResultBody::Spectrum { .. } => {}
            }
        }
        assert_eq!(report.exit_status(), ExitStatus::Success, "{}", entry.name);
        assert!(report.verdicts().count() > 0, "{}", entry.name);
    }
}
