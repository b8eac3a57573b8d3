//! Checked-in reference artifacts and their regeneration.

use std::path::Path;

use crate::circuit::{build_circuit, emit_text, Basis, Init};
use crate::error::{Error, Result};
use crate::lattice::{GeometrySpec, SpacetimeLattice};
use crate::syndrome::build_detector_graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoldenFormat {
    CircuitText,
    GraphJson,
}

#[derive(Clone, Copy, Debug)]
pub struct GoldenArtifact {
    pub name: &'static str,
    pub format: GoldenFormat,
    pub geometry: GeometrySpec,
    /// Command that writes the file from the repository root.
    pub command: &'static str,
    pub note: &'static str,
}

pub const GOLDENS: &[GoldenArtifact] = &[
    GoldenArtifact {
        name: "torus_2x2_T1.circuit.txt",
        format: GoldenFormat::CircuitText,
        geometry: GeometrySpec { kind: crate::lattice::GeometryKind::Torus, l1: 2, l2: 2, rounds: 1, l: 0, t0: 0, t1: 0 },
        command: "xyf export circuit-text --geometry torus --l1 2 --l2 2 --rounds 1 --out goldens/torus_2x2_T1.circuit.txt",
        note: "one period: XX/ZZ layer, two CX layers, XX/ZZ layer, two CX layers; Z-basis prep and readout",
    },
    GoldenArtifact {
        name: "torus_2x2_T1.graph.json",
        format: GoldenFormat::GraphJson,
        geometry: GeometrySpec { kind: crate::lattice::GeometryKind::Torus, l1: 2, l2: 2, rounds: 1, l: 0, t0: 0, t1: 0 },
        command: "xyf export detector-graph-json --geometry torus --l1 2 --l2 2 --rounds 1 --out goldens/torus_2x2_T1.graph.json",
        note: "e nodes on vertices, m nodes on cubes, one edge per elementary fault",
    },
    GoldenArtifact {
        name: "rectangle_3x3_T2.circuit.txt",
        format: GoldenFormat::CircuitText,
        geometry: GeometrySpec { kind: crate::lattice::GeometryKind::Rectangle, l1: 3, l2: 3, rounds: 2, l: 0, t0: 0, t1: 0 },
        command: "xyf export circuit-text --geometry rectangle --l1 3 --l2 3 --rounds 2 --out goldens/rectangle_3x3_T2.circuit.txt",
        note: "boundary single-qubit MZ and idle green qubits next to the rough sides",
    },
];

/// Regenerate the text of an artifact.
pub fn render(g: &GoldenArtifact) -> Result<String> {
    let c = build_circuit(&SpacetimeLattice::new(g.geometry)?, Some(Init::Z), Some(Basis::Z))?;
    Ok(match g.format {
        GoldenFormat::CircuitText => emit_text(&c),
        GoldenFormat::GraphJson => build_detector_graph(&c)?.to_json(&c),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldenReport {
    pub checked: usize,
    /// Name and first differing line (1-based) of each mismatch.
    pub mismatches: Vec<(String, usize)>,
}

impl GoldenReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// First differing line, 1-based.
pub fn first_difference(a: &str, b: &str) -> Option<usize> {
    let (mut la, mut lb) = (a.lines(), b.lines());
    let mut n = 1;
    loop {
        match (la.next(), lb.next()) {
            (None, None) => return None,
            (x, y) if x != y => return Some(n),
            _ => n += 1,
        }
    }
}

/// Compare every golden in `dir` with a fresh rendering.
pub fn verify_goldens(dir: &Path) -> Result<GoldenReport> {
    verify_with(dir, render)
}

/// As [`verify_goldens`] with a custom renderer.
pub fn verify_with(dir: &Path, render: impl Fn(&GoldenArtifact) -> Result<String>) -> Result<GoldenReport> {
    let mut report = GoldenReport::default();
    for g in GOLDENS {
        let path = dir.join(g.name);
        let on_disk = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(line) = first_difference(&on_disk, &render(g)?) {
            report.mismatches.push((g.name.to_string(), line));
        }
        report.checked += 1;
    }
    Ok(report)
}
