//! Replays the checked-in fuzz seeds through the same checks as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use ptmap::experiment::{diff_reports, parse_report, ExperimentConfig};
use ptmap::lie::GroupSpec;
use ptmap::path::codec::decode_raw;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn group_spec_seeds() {
    let mut built = 0;
    for (_, bytes) in seeds("parse_group_spec") {
        let Ok(spec) = GroupSpec::parse(std::str::from_utf8(&bytes).unwrap()) else { continue };
        if let Ok(group) = spec.build() {
            assert!(group.algebra().dim() > 0);
            built += 1;
        }
    }
    assert!(built >= 5);
}

#[test]
fn experiment_config_seeds() {
    let mut parsed = 0;
    for (name, bytes) in seeds("parse_experiment_config") {
        let Ok(config) = ExperimentConfig::parse(std::str::from_utf8(&bytes).unwrap()) else { continue };
        let again = ExperimentConfig::parse(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(config, again, "{name}");
        parsed += 1;
    }
    assert!(parsed >= 8);
}

#[test]
fn vgpt_seeds() {
    let mut decoded = Vec::new();
    for (name, bytes) in seeds("decode_vgpt") {
        if let Ok(raw) = decode_raw(&bytes) {
            assert_eq!(raw.values.len(), raw.n * raw.dim);
            assert!(raw.values.iter().all(|v| v.is_finite()));
            decoded.push(name);
        }
    }
    assert_eq!(decoded, ["su2_n4.vgpt", "t1_n2.vgpt"]);
}

#[test]
fn report_seeds() {
    for (name, bytes) in seeds("parse_report") {
        let report = parse_report(std::str::from_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(diff_reports(&report, &report).identical());
        assert_eq!(parse_report(&report.to_json()).unwrap(), report, "{name}");
    }
}
