//! Worldline segments of measurement outcomes and faults.
//!
//! A `-1` outcome of `MXX` puts an `e` worldline on the two green edges just
//! below and above its xy face; a `-1` outcome of `MZZ` or boundary `MZ`
//! puts an `m` worldline on purple faces next to its z edge. Faults are
//! pushed forward to the next measurement layer and mapped there.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Layer, Op, Phase};
use crate::error::{Error, Result};
use crate::lattice::{CellKind, Coord, QubitId, SpacetimeLattice, Species};
use crate::noise::{Fault, Pauli1};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnyonSpecies {
    E,
    M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub species: AnyonSpecies,
    pub cell: Coord,
}

pub type SegmentSet = Vec<Segment>;

/// Reduce a segment list mod 2 and sort it.
pub fn canonical(mut s: SegmentSet) -> SegmentSet {
    s.sort();
    let mut out: SegmentSet = Vec::with_capacity(s.len());
    for seg in s {
        if out.last() == Some(&seg) {
            out.pop();
        } else {
            out.push(seg);
        }
    }
    out
}

fn e(cell: Coord) -> Segment {
    Segment { species: AnyonSpecies::E, cell }
}

fn m(cell: Coord) -> Segment {
    Segment { species: AnyonSpecies::M, cell }
}

/// Endpoints of a segment: vertices of an edge, cubes on either side of a face.
pub fn endpoints(lat: &SpacetimeLattice, s: &Segment) -> Vec<Coord> {
    let v = match s.species {
        AnyonSpecies::E => {
            debug_assert_eq!(s.cell.kind().rank(), 1);
            s.cell.boundary()
        }
        AnyonSpecies::M => {
            debug_assert_eq!(s.cell.kind().rank(), 2);
            s.cell.coboundary()
        }
    };
    v.into_iter().map(|c| lat.wrap(c)).collect()
}

/// Odd-multiplicity endpoints of a set, per species, sorted.
pub fn endpoint_set(lat: &SpacetimeLattice, set: &SegmentSet) -> Vec<(AnyonSpecies, Coord)> {
    let mut all: Vec<(AnyonSpecies, Coord)> =
        set.iter().flat_map(|s| endpoints(lat, s).into_iter().map(move |c| (s.species, c))).collect();
    all.sort();
    let mut out: Vec<(AnyonSpecies, Coord)> = Vec::new();
    for x in all {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// Shared lookup of labels to layer and op.
pub struct SegmentMap<'a> {
    pub c: &'a Circuit,
    pub lat: SpacetimeLattice,
    sites: Vec<(usize, Op)>,
}

impl<'a> SegmentMap<'a> {
    pub fn new(c: &'a Circuit) -> Self {
        let sites = c.meas_sites().into_iter().map(|s| (s.layer, c.layers[s.layer].ops[s.op])).collect();
        SegmentMap { c, lat: c.lattice(), sites }
    }

    fn present(&self, cells: impl IntoIterator<Item = Coord>) -> Vec<Coord> {
        cells.into_iter().map(|c| self.lat.wrap(c)).filter(|c| self.lat.present(*c)).collect()
    }

    pub fn for_outcome(&self, label: usize) -> Result<SegmentSet> {
        let (li, op) = *self.sites.get(label).ok_or(Error::UnknownLabel(label))?;
        let layer = &self.c.layers[li];
        Ok(self.outcome_segments(layer, &op))
    }

    fn outcome_segments(&self, layer: &Layer, op: &Op) -> SegmentSet {
        let lat = &self.lat;
        let t4 = layer.t4;
        let readout = layer.phase == Phase::Readout;
        let out = match *op {
            Op::MXX { a, .. } => {
                let f = lat.green_face(t4, a);
                let lo = QubitId::new(a.z2, f.u2 - 1);
                self.present([lat.green_edge(t4 - 1, lo), lat.green_edge(t4 + 1, lo)]).into_iter().map(e).collect()
            }
            Op::MZZ { a, .. } => {
                let ed = lat.purple_zedge(t4, a);
                let lo = QubitId::new(a.z2, ed.u2 - 1);
                self.present([lat.purple_face(t4 - 1, lo), lat.purple_face(t4 + 1, lo)]).into_iter().map(m).collect()
            }
            Op::MZ { q, .. } if readout => match q.species() {
                Species::Purple => self.present([lat.purple_face(t4 - 1, q)]).into_iter().map(m).collect(),
                Species::Green => self.present([lat.green_face(t4, q)]).into_iter().map(m).collect(),
            },
            Op::MZ { q, .. } => {
                self.present([lat.purple_face(t4 - 1, q), lat.purple_face(t4 + 1, q)]).into_iter().map(m).collect()
            }
            Op::MX { q, .. } if readout => match q.species() {
                Species::Purple => self.present([lat.purple_zedge(t4, q)]).into_iter().map(e).collect(),
                Species::Green => self.present([lat.green_edge(t4 - 1, q)]).into_iter().map(e).collect(),
            },
            Op::MX { q, .. } => self.present([lat.purple_zedge(t4 - 1, q)]).into_iter().map(e).collect(),
            _ => vec![],
        };
        canonical(out)
    }

    fn before_measurement(&self, t4: i32, q: QubitId, p: Pauli1) -> SegmentSet {
        let lat = &self.lat;
        let mut out = Vec::new();
        match q.species() {
            Species::Green => {
                if p.has_x() {
                    out.extend(self.present([lat.green_face(t4, q)]).into_iter().map(m));
                }
                if p.has_z() {
                    out.extend(self.present([lat.green_edge(t4 - 1, q)]).into_iter().map(e));
                }
            }
            Species::Purple => {
                if p.has_x() {
                    out.extend(self.present([lat.purple_face(t4 - 1, q)]).into_iter().map(m));
                }
                if p.has_z() {
                    out.extend(self.present([lat.purple_zedge(t4, q)]).into_iter().map(e));
                }
            }
        }
        out
    }

    /// Segments of a fault: measurement flips reuse the outcome map, Pauli
    /// faults are conjugated through the following CX layers first.
    pub fn for_fault(&self, f: &Fault) -> Result<SegmentSet> {
        match *f {
            Fault::MeasFlip { label } => self.for_outcome(label),
            Fault::Pauli { layer, qubit, p } => {
                if layer >= self.c.layers.len() || qubit >= self.c.num_qubits() {
                    return Err(Error::FaultLocation(format!("{f:?}")));
                }
                let n = self.c.num_qubits();
                let mut xs = vec![false; n];
                let mut zs = vec![false; n];
                xs[qubit] = p.has_x();
                zs[qubit] = p.has_z();
                let mut out = Vec::new();
                let mut li = layer + 1;
                let t_next = loop {
                    let Some(l) = self.c.layers.get(li) else {
                        break self.lat.t4_end();
                    };
                    if l.is_measurement_layer() || l.phase == Phase::Readout {
                        break l.t4;
                    }
                    for op in &l.ops {
                        match *op {
                            Op::MX { q, .. } => {
                                let i = self.c.qubit_index(q);
                                if zs[i] {
                                    out.extend(self.outcome_segments(l, op));
                                }
                                xs[i] = false;
                                zs[i] = false;
                            }
                            Op::PrepPlus { q } | Op::PrepZero { q } => {
                                let i = self.c.qubit_index(q);
                                xs[i] = false;
                                zs[i] = false;
                            }
                            Op::CX { control, target } => {
                                let (ci, ti) = (self.c.qubit_index(control), self.c.qubit_index(target));
                                xs[ti] ^= xs[ci];
                                zs[ci] ^= zs[ti];
                            }
                            _ => {}
                        }
                    }
                    li += 1;
                };
                for i in 0..n {
                    let p = match (xs[i], zs[i]) {
                        (true, true) => Pauli1::Y,
                        (true, false) => Pauli1::X,
                        (false, true) => Pauli1::Z,
                        _ => continue,
                    };
                    out.extend(self.before_measurement(t_next, self.c.qubits[i], p));
                }
                Ok(canonical(out))
            }
        }
    }
}

/// Whether a segment (edge, or dual edge of a face) stays at constant `z2`.
pub fn in_xt_plane(s: &Segment) -> bool {
    match s.species {
        AnyonSpecies::E => s.cell.kind() != CellKind::EdgeZ,
        AnyonSpecies::M => s.cell.kind() != CellKind::FaceXY,
    }
}

pub fn segments_for_outcome(c: &Circuit, label: usize) -> Result<SegmentSet> {
    SegmentMap::new(c).for_outcome(label)
}

pub fn segments_for_error(c: &Circuit, f: &Fault) -> Result<SegmentSet> {
    SegmentMap::new(c).for_fault(f)
}
