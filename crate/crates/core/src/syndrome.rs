//! Detector graph: spacetime vertices (`e`) and cubes (`m`) with the labels
//! whose segments end there, and one edge per elementary fault.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::frame::{propagate, FrameProgram, Frames};
use crate::lattice::{Coord, GeometrySpec, SpacetimeLattice};
use crate::noise::{apply_lane, enumerate_elementary_faults, Fault, Pauli1};
use crate::observables::{default_observables, parity, Observable};
use crate::segments::{endpoint_set, AnyonSpecies, SegmentMap};
use crate::stabilizer::{symbolic_run, SymbolicRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VirtualKind {
    RoughLo,
    RoughHi,
    SmoothLo,
    SmoothHi,
    /// Removed bridge cubes before the merge window.
    WallPre,
    /// Removed bridge cubes after the merge window.
    WallPost,
    Initial,
    Final,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub species: AnyonSpecies,
    pub cell: Coord,
    pub labels: Vec<usize>,
    #[serde(rename = "virtual")]
    pub virtual_kind: Option<VirtualKind>,
    /// Noiseless parity of `labels` (real nodes only).
    pub offset: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultEdge {
    pub fault: Fault,
    pub species: AnyonSpecies,
    /// Odd-multiplicity endpoint nodes.
    pub nodes: Vec<usize>,
    /// Bit `k` set when the fault flips observable `k`.
    pub obs_mask: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorGraph {
    pub nodes: Vec<Node>,
    pub index: BTreeMap<(AnyonSpecies, Coord), usize>,
    pub edges: Vec<FaultEdge>,
    pub observables: Vec<Observable>,
    /// Real node ids, in node order.
    pub real: Vec<usize>,
}

fn virtual_kind(lat: &SpacetimeLattice, sp: AnyonSpecies, c: Coord) -> Option<VirtualKind> {
    match sp {
        AnyonSpecies::E => {
            if !lat.rough_removed(c) {
                None
            } else if c.u2 <= 0 {
                Some(VirtualKind::RoughLo)
            } else {
                Some(VirtualKind::RoughHi)
            }
        }
        AnyonSpecies::M => {
            if lat.cube_present(c) {
                return None;
            }
            if let Some((zb, lo, _)) = lat.bridge() {
                if c.z2 == zb {
                    return Some(if c.t4 < lo { VirtualKind::WallPre } else { VirtualKind::WallPost });
                }
            }
            if c.z2 < 1 {
                Some(VirtualKind::SmoothLo)
            } else {
                Some(VirtualKind::SmoothHi)
            }
        }
    }
}

/// Label sets and endpoint maps shared by construction and checks.
pub struct GraphBuilder<'a> {
    pub c: &'a Circuit,
    pub segs: SegmentMap<'a>,
    pub run: SymbolicRun,
}

impl<'a> GraphBuilder<'a> {
    pub fn new(c: &'a Circuit) -> Self {
        GraphBuilder { c, segs: SegmentMap::new(c), run: symbolic_run(c) }
    }
}

pub fn build_detector_graph(c: &Circuit) -> Result<DetectorGraph> {
    let obs = default_observables(c)?;
    build_detector_graph_with(c, obs)
}

pub fn build_detector_graph_with(c: &Circuit, observables: Vec<Observable>) -> Result<DetectorGraph> {
    if observables.len() > 64 {
        return Err(Error::Graph("at most 64 observables".into()));
    }
    let b = GraphBuilder::new(c);
    let lat = &b.segs.lat;
    let mut labels_at: BTreeMap<(AnyonSpecies, Coord), BTreeSet<usize>> = BTreeMap::new();
    for l in 0..c.num_measurements {
        let segs = b.segs.for_outcome(l)?;
        for key in endpoint_set(lat, &segs) {
            let set = labels_at.entry(key).or_default();
            if !set.insert(l) {
                set.remove(&l);
            }
        }
    }
    let faults: Vec<Fault> = enumerate_elementary_faults(c)
        .into_iter()
        .filter(|f| !matches!(f, Fault::Pauli { p: Pauli1::Y, .. }))
        .collect();
    let mut fault_ends = Vec::with_capacity(faults.len());
    for f in &faults {
        let ends = endpoint_set(lat, &b.segs.for_fault(f)?);
        for k in &ends {
            labels_at.entry(*k).or_default();
        }
        fault_ends.push(ends);
    }
    let t_end = lat.t4_end();
    let mut nodes = Vec::with_capacity(labels_at.len());
    let mut index = BTreeMap::new();
    for ((sp, cell), set) in labels_at {
        let labels: Vec<usize> = set.into_iter().collect();
        let mut vk = virtual_kind(lat, sp, cell);
        let mut offset = false;
        if vk.is_none() {
            let p = parity(&b.run, &labels);
            if labels.is_empty() || !p.is_deterministic() {
                vk = if cell.t4 <= 0 {
                    Some(VirtualKind::Initial)
                } else if cell.t4 >= t_end - 2 {
                    Some(VirtualKind::Final)
                } else {
                    return Err(Error::NotClosed(format!(
                        "{sp:?} node {cell} has a random parity away from the time boundaries"
                    )));
                };
            } else {
                offset = p.constant;
            }
        }
        index.insert((sp, cell), nodes.len());
        nodes.push(Node { species: sp, cell, labels, virtual_kind: vk, offset });
    }
    let masks = fault_observable_masks(c, &faults, &observables);
    let mut edges = Vec::with_capacity(faults.len());
    for ((f, ends), mask) in faults.iter().zip(fault_ends).zip(masks) {
        for sp in [AnyonSpecies::E, AnyonSpecies::M] {
            let ids: Vec<usize> = ends.iter().filter(|k| k.0 == sp).map(|k| index[k]).collect();
            let species_mask = if ids.is_empty() && ends.iter().any(|k| k.0 != sp) { 0 } else { mask };
            if ids.is_empty() && species_mask == 0 {
                continue;
            }
            edges.push(FaultEdge { fault: *f, species: sp, nodes: ids, obs_mask: species_mask });
        }
    }
    let real = (0..nodes.len()).filter(|&i| nodes[i].virtual_kind.is_none()).collect();
    Ok(DetectorGraph { nodes, index, edges, observables, real })
}

/// Observable flips of each fault, by 64-lane frame propagation.
pub fn fault_observable_masks(c: &Circuit, faults: &[Fault], obs: &[Observable]) -> Vec<u64> {
    let flips = fault_label_flips(c, faults);
    flips
        .iter()
        .map(|fl| {
            let mut m = 0u64;
            for (k, o) in obs.iter().enumerate() {
                if o.labels.iter().filter(|l| fl.binary_search(l).is_ok()).count() % 2 == 1 {
                    m |= 1 << k;
                }
            }
            m
        })
        .collect()
}

/// Sorted flipped labels of each single fault.
pub fn fault_label_flips(c: &Circuit, faults: &[Fault]) -> Vec<Vec<usize>> {
    let prog = FrameProgram::new(c);
    let mut out = Vec::with_capacity(faults.len());
    let mut flips = vec![0u64; c.num_measurements];
    for chunk in faults.chunks(64) {
        let mut frames = Frames::new(c.num_qubits());
        let mut meas = vec![0u64; c.num_measurements];
        let mut per_layer: Vec<Vec<(usize, Pauli1, u64)>> = vec![Vec::new(); c.layers.len()];
        for (lane, f) in chunk.iter().enumerate() {
            match *f {
                Fault::Pauli { layer, qubit, p } => per_layer[layer].push((qubit, p, 1 << lane)),
                Fault::MeasFlip { label } => meas[label] |= 1 << lane,
            }
        }
        propagate(
            &prog,
            &mut frames,
            |li, fr| {
                for &(q, p, bit) in &per_layer[li] {
                    apply_lane(fr, q, p, bit);
                }
            },
            |l| meas[l],
            &mut flips,
        );
        for lane in 0..chunk.len() {
            out.push((0..c.num_measurements).filter(|&l| (flips[l] >> lane) & 1 == 1).collect());
        }
    }
    out
}

impl DetectorGraph {
    /// Real nodes fired by a set of flipped labels.
    pub fn fired(&self, flipped: &[bool]) -> Vec<usize> {
        self.real
            .iter()
            .copied()
            .filter(|&i| self.nodes[i].labels.iter().filter(|&&l| flipped[l]).count() % 2 == 1)
            .collect()
    }

    pub fn num_species_nodes(&self, sp: AnyonSpecies) -> usize {
        self.nodes.iter().filter(|n| n.species == sp).count()
    }

    /// Largest number of real nodes on any single fault edge.
    pub fn max_real_degree(&self) -> usize {
        self.edges
            .iter()
            .map(|e| e.nodes.iter().filter(|&&i| self.nodes[i].virtual_kind.is_none()).count())
            .max()
            .unwrap_or(0)
    }
}

pub const GRAPH_FORMAT: &str = "xyf-detector-graph";
pub const GRAPH_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    #[serde(flatten)]
    pub node: Node,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: usize,
    #[serde(flatten)]
    pub edge: FaultEdge,
}

/// JSON form of a detector graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub format: String,
    pub version: u32,
    pub geometry: GeometrySpec,
    pub num_measurements: usize,
    pub observables: Vec<Observable>,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

impl DetectorGraph {
    pub fn to_document(&self, c: &Circuit) -> GraphDocument {
        GraphDocument {
            format: GRAPH_FORMAT.into(),
            version: GRAPH_VERSION,
            geometry: c.spec,
            num_measurements: c.num_measurements,
            observables: self.observables.clone(),
            nodes: self.nodes.iter().enumerate().map(|(id, n)| NodeDoc { id, node: n.clone() }).collect(),
            edges: self.edges.iter().enumerate().map(|(id, e)| EdgeDoc { id, edge: e.clone() }).collect(),
        }
    }

    pub fn to_json(&self, c: &Circuit) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document(c)).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self> {
        if doc.format != GRAPH_FORMAT || doc.version != GRAPH_VERSION {
            return Err(Error::Graph(format!("unsupported graph format {} v{}", doc.format, doc.version)));
        }
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        let mut index = BTreeMap::new();
        for (i, n) in doc.nodes.into_iter().enumerate() {
            if n.id != i {
                return Err(Error::Graph(format!("node id {} at position {i}", n.id)));
            }
            if n.node.labels.iter().any(|&l| l >= doc.num_measurements) {
                return Err(Error::Graph(format!("node {i} names an unknown label")));
            }
            if index.insert((n.node.species, n.node.cell), i).is_some() {
                return Err(Error::Graph(format!("duplicate node {i}")));
            }
            nodes.push(n.node);
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (i, e) in doc.edges.into_iter().enumerate() {
            if e.id != i || e.edge.nodes.iter().any(|&k| k >= nodes.len()) {
                return Err(Error::Graph(format!("bad edge {i}")));
            }
            edges.push(e.edge);
        }
        let real = (0..nodes.len()).filter(|&i| nodes[i].virtual_kind.is_none()).collect();
        Ok(DetectorGraph { nodes, index, edges, observables: doc.observables, real })
    }
}

pub fn parse_graph_json(text: &str) -> Result<DetectorGraph> {
    DetectorGraph::from_document(serde_json::from_str(text)?)
}

/// Fired nodes from a record and its noiseless reference.
pub fn syndrome(g: &DetectorGraph, rec: &[bool], reference: &[bool]) -> Result<Vec<usize>> {
    if rec.len() != reference.len() {
        return Err(Error::LengthMismatch { expected: reference.len(), got: rec.len() });
    }
    let flipped: Vec<bool> = rec.iter().zip(reference).map(|(a, b)| a ^ b).collect();
    Ok(g.fired(&flipped))
}

/// For every elementary fault, compare the simulated syndrome with the
/// segment endpoints. Returns `(agreeing, total)` and the first mismatch.
pub fn check_fault_duality(c: &Circuit, g: &DetectorGraph) -> Result<(usize, usize, Option<String>)> {
    let segs = SegmentMap::new(c);
    let faults = enumerate_elementary_faults(c);
    let flips = fault_label_flips(c, &faults);
    let mut ok = 0;
    let mut first = None;
    for (f, fl) in faults.iter().zip(&flips) {
        let mut flipped = vec![false; c.num_measurements];
        for &l in fl {
            flipped[l] = true;
        }
        let sim = g.fired(&flipped);
        let mut geo: Vec<usize> = endpoint_set(&segs.lat, &segs.for_fault(f)?)
            .iter()
            .filter_map(|k| g.index.get(k).copied())
            .filter(|&i| g.nodes[i].virtual_kind.is_none())
            .collect();
        geo.sort();
        if sim == geo {
            ok += 1;
        } else if first.is_none() {
            first = Some(format!("{f:?}: simulated {sim:?} vs segments {geo:?}"));
        }
    }
    Ok((ok, faults.len(), first))
}
