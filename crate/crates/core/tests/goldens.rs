use std::path::PathBuf;

use xyf_core::goldens::{render, verify_goldens, verify_with, GoldenFormat, GOLDENS};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../goldens")
}

#[test]
fn checked_in_goldens_match() {
    let report = verify_goldens(&golden_dir()).unwrap();
    assert_eq!(report.checked, GOLDENS.len());
    assert!(report.ok(), "stale goldens: {:?}", report.mismatches);
}

#[test]
fn every_golden_is_in_the_manifest() {
    let readme = std::fs::read_to_string(golden_dir().join("README.md")).unwrap();
    for g in GOLDENS {
        assert!(readme.contains(g.name), "{} missing from goldens/README.md", g.name);
        assert!(readme.contains(g.command), "{} command missing", g.name);
    }
}

#[test]
fn goldens_parse_back() {
    for g in GOLDENS {
        let text = std::fs::read_to_string(golden_dir().join(g.name)).unwrap();
        match g.format {
            GoldenFormat::CircuitText => {
                let c = xyf_core::circuit::parse_text(&text).unwrap();
                assert_eq!(xyf_core::circuit::emit_text(&c), text);
            }
            GoldenFormat::GraphJson => {
                xyf_core::syndrome::parse_graph_json(&text).unwrap();
            }
        }
    }
}

#[test]
fn perturbations_are_detected() {
    let dir = tempfile::tempdir().unwrap();
    for g in GOLDENS {
        std::fs::write(dir.path().join(g.name), render(g).unwrap()).unwrap();
    }
    assert!(verify_goldens(dir.path()).unwrap().ok());

    // A shifted schedule phase in the circuits, a renamed key in the graph.
    let report = verify_with(dir.path(), |g| {
        let text = render(g)?;
        Ok(match g.format {
            GoldenFormat::CircuitText => text.replacen("LAYER 2 phase=1", "LAYER 2 phase=2", 1),
            GoldenFormat::GraphJson => text.replacen("\"nodes\"", "\"vertices\"", 1),
        })
    })
    .unwrap();
    assert_eq!(report.mismatches.len(), GOLDENS.len());
    for (name, line) in &report.mismatches {
        assert!(*line > 1, "{name}");
    }
}
