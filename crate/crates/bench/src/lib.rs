//! Fixtures shared by the benchmarks.

use xyf_core::circuit::{build_circuit, Basis, Circuit, Init};
use xyf_core::decoder::{build_matching_graph, MatchingGraph};
use xyf_core::lattice::{GeometrySpec, SpacetimeLattice};
use xyf_core::syndrome::{build_detector_graph, DetectorGraph};

/// Z-basis memory on the `l x l` rectangle for `l` periods.
pub fn memory(l: u32) -> (Circuit, DetectorGraph, MatchingGraph) {
    let c = build_circuit(&SpacetimeLattice::new(GeometrySpec::rectangle(l, l, l)).unwrap(), Some(Init::Z), Some(Basis::Z))
        .unwrap();
    let g = build_detector_graph(&c).unwrap();
    let mg = build_matching_graph(&g).unwrap();
    (c, g, mg)
}
