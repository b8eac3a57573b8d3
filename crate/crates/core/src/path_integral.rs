//! Exact evaluation of the toric-code path integral with anyon worldlines.
//!
//! Variables `A` live on edges, parity constraints on faces:
//! `sum_{e in f} A(e) = W_m(f)` and a weight `(-1)^{A(e) W_e(e)}` per edge.
//! An instance may be cut out of a larger lattice. Bonds from an inside
//! cell to an outside one become legs whose values the caller supplies.
//! State-boundary edges are legs as well.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::lattice::{CellKind, Coord, GeometryKind, GeometrySpec, QubitId, SpacetimeLattice, Species};
use crate::segments::{AnyonSpecies, Segment};

pub const DEFAULT_CAP: usize = 30;

/// `W_e` on edges and `W_m` on faces, as sets of cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnyonConfig {
    pub e: BTreeSet<Coord>,
    pub m: BTreeSet<Coord>,
}

impl AnyonConfig {
    pub fn toggle_e(&mut self, c: Coord) {
        if !self.e.remove(&c) {
            self.e.insert(c);
        }
    }

    pub fn toggle_m(&mut self, c: Coord) {
        if !self.m.remove(&c) {
            self.m.insert(c);
        }
    }

    /// Sum of segments mod 2.
    pub fn from_segments<'a>(segs: impl IntoIterator<Item = &'a Segment>) -> Self {
        let mut a = AnyonConfig::default();
        for s in segs {
            match s.species {
                AnyonSpecies::E => a.toggle_e(s.cell),
                AnyonSpecies::M => a.toggle_m(s.cell),
            }
        }
        a
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty() && self.m.is_empty()
    }
}

/// An externally supplied index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Leg {
    /// Bond from an inside face to an outside edge; carries the edge value.
    FaceToEdge { face: Coord, edge: Coord },
    /// Bond from an inside edge to an outside face; equals the edge value.
    EdgeToFace { edge: Coord, face: Coord },
    /// State-boundary edge with a prescribed value, shared by all its faces.
    Fixed { edge: Coord },
}

#[derive(Clone, Copy, Debug)]
enum Term {
    Var(usize),
    Leg(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Topology {
    /// Cubic coordinates, periodic with the given doubled periods (0 = open).
    Cubic([i32; 3]),
    Lattice(GeometrySpec),
}

/// A finite patch of the path integral.
#[derive(Clone, Debug)]
pub struct PathIntegralInstance {
    topology: Topology,
    /// Free edge variables.
    pub edges: Vec<Coord>,
    /// Constraint faces.
    pub faces: Vec<Coord>,
    pub legs: Vec<Leg>,
    edge_ix: HashMap<Coord, usize>,
    face_ix: HashMap<Coord, usize>,
    leg_ix: HashMap<Leg, usize>,
    terms: Vec<Vec<Term>>,
    /// Time window of a lattice instance.
    window: Option<(i32, i32)>,
    solver: OnceLock<Solver>,
    pub cap: usize,
}

impl PathIntegralInstance {
    fn canon(&self, c: Coord) -> Coord {
        match self.topology {
            Topology::Cubic(p) => {
                let mut x = c.xyz();
                for a in 0..3 {
                    if p[a] > 0 {
                        x[a] = x[a].rem_euclid(p[a]);
                    }
                }
                Coord::from_xyz(x)
            }
            Topology::Lattice(spec) => SpacetimeLattice { spec }.wrap(c),
        }
    }

    /// Assemble from edge and face lists. Bonds to cells outside the lists
    /// become legs when `outside(cell)` says the cell exists; fixed edges are
    /// given separately.
    fn assemble(
        topology: Topology,
        edges: Vec<Coord>,
        faces: Vec<Coord>,
        fixed: Vec<Coord>,
        outside: impl Fn(Coord) -> bool,
        window: Option<(i32, i32)>,
    ) -> Self {
        let mut inst = PathIntegralInstance {
            topology,
            edge_ix: edges.iter().enumerate().map(|(i, &c)| (c, i)).collect(),
            face_ix: faces.iter().enumerate().map(|(i, &c)| (c, i)).collect(),
            edges,
            faces,
            legs: vec![],
            leg_ix: HashMap::new(),
            terms: vec![],
            window,
            solver: OnceLock::new(),
            cap: DEFAULT_CAP,
        };
        let fixed: BTreeSet<Coord> = fixed.into_iter().collect();
        let mut legs = BTreeSet::new();
        for &edge in &fixed {
            legs.insert(Leg::Fixed { edge });
        }
        for &f in &inst.faces {
            for e in f.boundary().into_iter().map(|e| inst.canon(e)) {
                if !inst.edge_ix.contains_key(&e) && !fixed.contains(&e) && outside(e) {
                    legs.insert(Leg::FaceToEdge { face: f, edge: e });
                }
            }
        }
        for &e in &inst.edges {
            for f in e.coboundary().into_iter().map(|f| inst.canon(f)) {
                if !inst.face_ix.contains_key(&f) && outside(f) {
                    legs.insert(Leg::EdgeToFace { edge: e, face: f });
                }
            }
        }
        inst.legs = legs.into_iter().collect();
        inst.leg_ix = inst.legs.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let terms = inst
            .faces
            .iter()
            .map(|&f| {
                f.boundary()
                    .into_iter()
                    .filter_map(|e| {
                        let e = inst.canon(e);
                        if let Some(&i) = inst.edge_ix.get(&e) {
                            Some(Term::Var(i))
                        } else if let Some(&k) = inst.leg_ix.get(&Leg::Fixed { edge: e }) {
                            Some(Term::Leg(k))
                        } else {
                            inst.leg_ix.get(&Leg::FaceToEdge { face: f, edge: e }).map(|&k| Term::Leg(k))
                        }
                    })
                    .collect()
            })
            .collect();
        inst.terms = terms;
        inst
    }

    /// Closed cubic lattice of `n[0] x n[1] x n[2]` cubes, periodic in every axis.
    pub fn periodic(n: [u32; 3]) -> Result<Self> {
        if n.contains(&0) {
            return Err(Error::Config("periodic lattice needs positive sizes".into()));
        }
        let p = n.map(|k| 2 * k as i32);
        let (edges, faces) = cubic_cells([0, 0, 0], [p[0] - 1, p[1] - 1, p[2] - 1]);
        Ok(Self::assemble(Topology::Cubic(p), edges, faces, vec![], |_| false, None))
    }

    /// Slab of `n1 x n2 x depth` cubes, periodic in x and y. The bottom plane
    /// is a smooth boundary; the x/y edges of the top plane form the state
    /// boundary, one leg each.
    pub fn slab(n1: u32, n2: u32, depth: u32) -> Result<Self> {
        if n1 == 0 || n2 == 0 || depth == 0 {
            return Err(Error::Config("slab needs positive sizes".into()));
        }
        let (p1, p2, top) = (2 * n1 as i32, 2 * n2 as i32, 2 * depth as i32);
        let (edges, faces) = cubic_cells([0, 0, 0], [p1 - 1, p2 - 1, top]);
        let (fixed, edges): (Vec<Coord>, Vec<Coord>) = edges.into_iter().partition(|c| c.xyz()[2] == top);
        Ok(Self::assemble(Topology::Cubic([p1, p2, 0]), edges, faces, fixed, |_| false, None))
    }

    /// All present edges and faces of `lat` with `t4` in `[lo, hi]`. Bonds
    /// that leave the window are legs.
    pub fn window(lat: &SpacetimeLattice, lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::Config(format!("empty window [{lo}, {hi}]")));
        }
        let mut edges = Vec::new();
        let mut faces = Vec::new();
        for c in lat.cells_in_window(lo, hi) {
            if !lat.present(c) {
                continue;
            }
            match c.kind().rank() {
                1 => edges.push(c),
                2 => faces.push(c),
                _ => {}
            }
        }
        let spec = lat.spec;
        Ok(Self::assemble(Topology::Lattice(spec), edges, faces, vec![], |c| lat.present(c), Some((lo, hi))))
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn leg_index(&self, leg: Leg) -> Option<usize> {
        self.leg_ix.get(&self.canon_leg(leg)).copied()
    }

    fn canon_leg(&self, leg: Leg) -> Leg {
        match leg {
            Leg::FaceToEdge { face, edge } => Leg::FaceToEdge { face: self.canon(face), edge: self.canon(edge) },
            Leg::EdgeToFace { edge, face } => Leg::EdgeToFace { edge: self.canon(edge), face: self.canon(face) },
            Leg::Fixed { edge } => Leg::Fixed { edge: self.canon(edge) },
        }
    }

    /// Leg carrying qubit `q` into (`top == false`) or out of a window that
    /// starts at an even and ends at an odd `t4`.
    pub fn qubit_leg(&self, q: QubitId, top: bool) -> Result<usize> {
        let Topology::Lattice(spec) = self.topology else {
            return Err(Error::Oracle("qubit legs need a lattice window".into()));
        };
        let (lo, hi) = self.window.expect("lattice window");
        if lo.rem_euclid(2) != 0 || hi.rem_euclid(2) != 1 {
            return Err(Error::Oracle(format!("window [{lo}, {hi}] does not cut qubit bonds")));
        }
        let lat = SpacetimeLattice { spec };
        let leg = match (q.species(), top) {
            (Species::Green, false) => Leg::FaceToEdge { face: lat.green_face(lo, q), edge: lat.green_edge(lo - 1, q) },
            (Species::Purple, false) => Leg::EdgeToFace { edge: lat.purple_zedge(lo, q), face: lat.purple_face(lo - 1, q) },
            (Species::Green, true) => Leg::EdgeToFace { edge: lat.green_edge(hi, q), face: lat.green_face(hi + 1, q) },
            (Species::Purple, true) => Leg::FaceToEdge { face: lat.purple_face(hi, q), edge: lat.purple_zedge(hi + 1, q) },
        };
        self.leg_index(leg).ok_or_else(|| Error::Oracle(format!("no leg for qubit {q} ({leg:?})")))
    }
}

/// Edges and faces with cubic coordinates in the inclusive box `[lo, hi]`.
fn cubic_cells(lo: [i32; 3], hi: [i32; 3]) -> (Vec<Coord>, Vec<Coord>) {
    let mut edges = Vec::new();
    let mut faces = Vec::new();
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                let c = Coord::from_xyz([x, y, z]);
                match c.kind().rank() {
                    1 => edges.push(c),
                    2 => faces.push(c),
                    _ => {}
                }
            }
        }
    }
    edges.sort();
    faces.sort();
    (edges, faces)
}

/// Constraint system in reduced row-echelon form. Equations are the faces
/// followed by one `A(e) = leg` equation per `EdgeToFace` leg.
#[derive(Clone, Debug)]
struct Solver {
    neq: usize,
    /// Pivot variable of each reduced row and the equations summed into it.
    pivots: Vec<(usize, BitVec)>,
    /// Equation sums with no variables left: consistency conditions.
    checks: Vec<BitVec>,
    kernel: Vec<BitVec>,
}

impl Solver {
    fn new(nvars: usize, eqs: &[Vec<usize>]) -> Self {
        let neq = eqs.len();
        let width = nvars + neq;
        let mut rows: Vec<BitVec> = eqs
            .iter()
            .enumerate()
            .map(|(k, vars)| {
                let mut r = BitVec::from_indices(width, vars.iter().copied());
                r.flip(nvars + k);
                r
            })
            .collect();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for col in 0..nvars {
            let Some(k) = (r..rows.len()).find(|&k| rows[k].get(col)) else {
                continue;
            };
            rows.swap(r, k);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(col) {
                    row.xor_with(&pivot);
                }
            }
            pivot_cols.push(col);
            r += 1;
        }
        let tail = |row: &BitVec| BitVec::from_indices(neq, row.ones().filter(|&i| i >= nvars).map(|i| i - nvars));
        let pivots: Vec<(usize, BitVec)> = pivot_cols.iter().zip(&rows).map(|(&c, row)| (c, tail(row))).collect();
        let checks = rows[r..].iter().map(tail).collect();
        let mut kernel = Vec::new();
        for free in (0..nvars).filter(|c| !pivot_cols.contains(c)) {
            let mut v = BitVec::zeros(nvars);
            v.set(free, true);
            for (row, &pc) in rows.iter().zip(&pivot_cols) {
                if row.get(free) {
                    v.set(pc, true);
                }
            }
            kernel.push(v);
        }
        Solver { neq, pivots, checks, kernel }
    }
}

/// Anyon data placed on the instance.
struct Placed {
    /// `W_e` on variables.
    we: BitVec,
    /// Right-hand side of every equation.
    rhs: BitVec,
    /// Sign from `W_e` on outside edges.
    sign: bool,
}

impl PathIntegralInstance {
    fn equations(&self) -> Vec<Vec<usize>> {
        let mut eqs: Vec<Vec<usize>> = self
            .terms
            .iter()
            .map(|ts| ts.iter().filter_map(|t| if let Term::Var(i) = t { Some(*i) } else { None }).collect())
            .collect();
        for leg in &self.legs {
            if let Leg::EdgeToFace { edge, .. } = leg {
                eqs.push(vec![self.edge_ix[edge]]);
            }
        }
        eqs
    }

    fn solver(&self) -> &Solver {
        self.solver.get_or_init(|| Solver::new(self.edges.len(), &self.equations()))
    }

    /// Dimension of the solution space of the homogeneous constraints.
    pub fn kernel_dim(&self) -> usize {
        self.solver().kernel.len()
    }

    fn legs_on(&self, outside: Coord) -> Vec<usize> {
        self.legs
            .iter()
            .enumerate()
            .filter(|(_, l)| match **l {
                Leg::FaceToEdge { edge, .. } | Leg::Fixed { edge } => edge == outside,
                Leg::EdgeToFace { face, .. } => face == outside,
            })
            .map(|(k, _)| k)
            .collect()
    }

    fn place(&self, anyons: &AnyonConfig, legs: &[bool]) -> Result<Placed> {
        if legs.len() != self.legs.len() {
            return Err(Error::LengthMismatch { expected: self.legs.len(), got: legs.len() });
        }
        let nf = self.faces.len();
        let mut eq_of_leg = HashMap::new();
        for (k, leg) in self.legs.iter().enumerate() {
            if matches!(leg, Leg::EdgeToFace { .. }) {
                eq_of_leg.insert(k, nf + eq_of_leg.len());
            }
        }
        let mut rhs = BitVec::zeros(nf + eq_of_leg.len());
        for (f, ts) in self.terms.iter().enumerate() {
            for t in ts {
                if let Term::Leg(k) = t {
                    if legs[*k] {
                        rhs.flip(f);
                    }
                }
            }
        }
        for (&k, &q) in &eq_of_leg {
            rhs.set(q, legs[k]);
        }
        let mut we = BitVec::zeros(self.edges.len());
        let mut sign = false;
        for &c in &anyons.e {
            let c = self.canon(c);
            if let Some(&i) = self.edge_ix.get(&c) {
                we.flip(i);
                continue;
            }
            match self.legs_on(c).as_slice() {
                [k] if !matches!(self.legs[*k], Leg::EdgeToFace { .. }) => sign ^= legs[*k],
                _ => return Err(Error::Oracle(format!("e worldline on edge {c} outside the instance"))),
            }
        }
        for &c in &anyons.m {
            let c = self.canon(c);
            if let Some(&i) = self.face_ix.get(&c) {
                rhs.flip(i);
                continue;
            }
            match self.legs_on(c).as_slice() {
                [k] if matches!(self.legs[*k], Leg::EdgeToFace { .. }) => rhs.flip(eq_of_leg[k]),
                _ => return Err(Error::Oracle(format!("m worldline on face {c} outside the instance"))),
            }
        }
        Ok(Placed { we, rhs, sign })
    }

    /// Particular solution, kernel signs and the constant sign, or `None`
    /// if the constraints are inconsistent.
    fn affine(&self, p: &Placed) -> Option<(bool, Vec<bool>)> {
        let s = self.solver();
        debug_assert_eq!(s.neq, p.rhs.len());
        if s.checks.iter().any(|c| c.and_parity(&p.rhs)) {
            return None;
        }
        let mut sign = p.sign;
        for (col, combo) in &s.pivots {
            if combo.and_parity(&p.rhs) && p.we.get(*col) {
                sign = !sign;
            }
        }
        Some((sign, s.kernel.iter().map(|k| k.and_parity(&p.we)).collect()))
    }

    /// Exact value. The solutions form an affine space `A0 + K`, so the sum
    /// of `(-1)^{W_e . A}` is `±2^{dim K}` when `W_e` vanishes on `K` and 0
    /// otherwise.
    pub fn evaluate(&self, anyons: &AnyonConfig, legs: &[bool]) -> Result<i64> {
        let p = self.place(anyons, legs)?;
        let Some((sign, ks)) = self.affine(&p) else {
            return Ok(0);
        };
        if ks.len() > 62 {
            return Err(Error::CapExceeded { n: ks.len(), cap: 62 });
        }
        if ks.iter().any(|&b| b) {
            return Ok(0);
        }
        let v = 1i64 << ks.len();
        Ok(if sign { -v } else { v })
    }

    /// Same value by enumerating the kernel, Gray-code order.
    pub fn evaluate_enumerated(&self, anyons: &AnyonConfig, legs: &[bool]) -> Result<i64> {
        let p = self.place(anyons, legs)?;
        let dim = self.kernel_dim();
        if dim > self.cap {
            return Err(Error::CapExceeded { n: dim, cap: self.cap });
        }
        let Some((mut sign, ks)) = self.affine(&p) else {
            return Ok(0);
        };
        let mut total = 0i64;
        for i in 0u64..(1u64 << dim) {
            if i > 0 {
                sign ^= ks[i.trailing_zeros() as usize];
            }
            total += if sign { -1 } else { 1 };
        }
        Ok(total)
    }

    /// Sum over every assignment of every variable. Only for tiny instances.
    pub fn evaluate_naive(&self, anyons: &AnyonConfig, legs: &[bool]) -> Result<i64> {
        let n = self.edges.len();
        if n > self.cap.min(26) {
            return Err(Error::CapExceeded { n, cap: self.cap.min(26) });
        }
        let p = self.place(anyons, legs)?;
        let eqs = self.equations();
        let mut total = 0i64;
        for a in 0u64..(1u64 << n) {
            let ok = eqs.iter().enumerate().all(|(k, vars)| {
                vars.iter().fold(false, |acc, &i| acc ^ ((a >> i) & 1 == 1)) == p.rhs.get(k)
            });
            if ok {
                let neg = p.we.ones().fold(p.sign, |acc, i| acc ^ ((a >> i) & 1 == 1));
                total += if neg { -1 } else { 1 };
            }
        }
        Ok(total)
    }
}

/// Worldline endpoints that the instance cannot absorb.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    /// Vertices and cubes checked.
    pub nodes: usize,
    /// Nodes met by an odd number of segments of their species.
    pub odd: Vec<(AnyonSpecies, Coord)>,
}

impl ClosureReport {
    pub fn is_closed(&self) -> bool {
        self.odd.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HomologyLabel {
    /// Winding parities of `W_e` and `W_m` along x, y, z.
    Periodic { e: [bool; 3], m: [bool; 3] },
    /// Parity of `m` worldlines crossing the surgery bridge.
    Surgery { m: bool },
}

impl PathIntegralInstance {
    /// Does `c` exist in the surrounding lattice?
    fn exists(&self, c: Coord) -> bool {
        match self.topology {
            Topology::Cubic(_) => {
                self.edge_ix.contains_key(&c) || self.face_ix.contains_key(&c) || !self.legs_on(c).is_empty()
            }
            Topology::Lattice(spec) => SpacetimeLattice { spec }.present(c),
        }
    }

    /// A vertex whose every edge is a variable with no outside face: an `e`
    /// worldline may not end there.
    fn is_e_node(&self, v: Coord) -> bool {
        v.coboundary().into_iter().map(|e| self.canon(e)).all(|e| {
            if !self.edge_ix.contains_key(&e) {
                return !self.exists(e);
            }
            e.coboundary().into_iter().all(|f| {
                let f = self.canon(f);
                self.face_ix.contains_key(&f) || !self.exists(f)
            })
        })
    }

    /// A cube whose faces are all constraints and whose edges are all
    /// variables (or absent): an `m` worldline may not end there.
    fn is_m_node(&self, q: Coord) -> bool {
        q.boundary().into_iter().map(|f| self.canon(f)).all(|f| self.face_ix.contains_key(&f))
            && q.boundary().into_iter().flat_map(|f| f.boundary()).all(|e| {
                let e = self.canon(e);
                self.edge_ix.contains_key(&e) || !self.exists(e)
            })
    }

    pub fn is_closed(&self, anyons: &AnyonConfig) -> ClosureReport {
        let verts: BTreeSet<Coord> =
            self.edges.iter().flat_map(|e| e.boundary()).map(|v| self.canon(v)).filter(|&v| self.is_e_node(v)).collect();
        let cubes: BTreeSet<Coord> =
            self.faces.iter().flat_map(|f| f.coboundary()).map(|q| self.canon(q)).filter(|&q| self.is_m_node(q)).collect();
        let e: BTreeSet<Coord> = anyons.e.iter().map(|&c| self.canon(c)).collect();
        let m: BTreeSet<Coord> = anyons.m.iter().map(|&c| self.canon(c)).collect();
        let mut odd = Vec::new();
        for &v in &verts {
            if v.coboundary().into_iter().filter(|&x| e.contains(&self.canon(x))).count() % 2 == 1 {
                odd.push((AnyonSpecies::E, v));
            }
        }
        for &q in &cubes {
            if q.boundary().into_iter().filter(|&x| m.contains(&self.canon(x))).count() % 2 == 1 {
                odd.push((AnyonSpecies::M, q));
            }
        }
        ClosureReport { nodes: verts.len() + cubes.len(), odd }
    }

    /// Winding parities on reference cuts at coordinate 0 (periodic lattice)
    /// or the bridge crossing (surgery window).
    pub fn homology_label(&self, anyons: &AnyonConfig) -> Result<HomologyLabel> {
        let report = self.is_closed(anyons);
        if !report.is_closed() {
            return Err(Error::NotClosed(format!("{} odd nodes, first {:?}", report.odd.len(), report.odd[0])));
        }
        match self.topology {
            Topology::Cubic(p) if p.iter().all(|&x| x > 0) => {
                let mut e = [false; 3];
                let mut m = [false; 3];
                for a in 0..3 {
                    // an a-edge has one odd coordinate, an a-normal face two
                    for c in &anyons.e {
                        let x = self.canon(*c).xyz();
                        if x[a] == 1 && x.iter().filter(|v| v.rem_euclid(2) == 1).count() == 1 {
                            e[a] ^= true;
                        }
                    }
                    for c in &anyons.m {
                        let x = self.canon(*c).xyz();
                        if x[a] == 0 && x.iter().filter(|v| v.rem_euclid(2) == 1).count() == 2 {
                            m[a] ^= true;
                        }
                    }
                }
                Ok(HomologyLabel::Periodic { e, m })
            }
            Topology::Lattice(spec) if spec.kind == GeometryKind::Surgery => {
                let lat = SpacetimeLattice { spec };
                let (zb, _, _) = lat.bridge().expect("surgery bridge");
                let m = anyons
                    .m
                    .iter()
                    .filter(|c| {
                        c.z2 == zb - 1
                            && c.kind() == CellKind::FaceXY
                            && lat.cube_present(Coord::new(c.t4, c.u2, zb))
                            && lat.cube_present(Coord::new(c.t4, c.u2, zb - 2))
                    })
                    .count()
                    % 2
                    == 1;
                Ok(HomologyLabel::Surgery { m })
            }
            _ => Err(Error::Oracle("no homology reference for this instance".into())),
        }
    }

    /// Faces whose boundary consists of variables: `W_e += ∂f` multiplies
    /// the value by `(-1)^{W_m(f)}`.
    pub fn e_move_faces(&self) -> Vec<Coord> {
        self.faces
            .iter()
            .copied()
            .filter(|f| f.boundary().into_iter().all(|e| self.edge_ix.contains_key(&self.canon(e))))
            .collect()
    }

    /// Variables whose faces are all constraints: `W_m += δe` multiplies the
    /// value by `(-1)^{W_e(e)}`.
    pub fn m_move_edges(&self) -> Vec<Coord> {
        self.edges
            .iter()
            .copied()
            .filter(|e| {
                e.coboundary().into_iter().all(|f| {
                    let f = self.canon(f);
                    self.face_ix.contains_key(&f) || !self.exists(f)
                })
            })
            .collect()
    }

    /// Apply an e move; returns whether the value flips sign.
    pub fn e_move(&self, a: &mut AnyonConfig, f: Coord) -> bool {
        let f = self.canon(f);
        for e in f.boundary() {
            a.toggle_e(self.canon(e));
        }
        a.m.contains(&f)
    }

    /// Apply an m move; returns whether the value flips sign.
    pub fn m_move(&self, a: &mut AnyonConfig, e: Coord) -> bool {
        let e = self.canon(e);
        for f in e.coboundary().into_iter().map(|f| self.canon(f)) {
            if self.face_ix.contains_key(&f) {
                a.toggle_m(f);
            }
        }
        a.e.contains(&e)
    }

    /// Value for every assignment of the legs, leg `k` as bit `k`.
    pub fn ground_state_amplitudes(&self, anyons: &AnyonConfig) -> Result<Vec<i64>> {
        let n = self.legs.len();
        if n > 20 {
            return Err(Error::CapExceeded { n, cap: 20 });
        }
        (0u32..1 << n)
            .map(|x| {
                let legs: Vec<bool> = (0..n).map(|k| (x >> k) & 1 == 1).collect();
                self.evaluate(anyons, &legs)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn none() -> AnyonConfig {
        AnyonConfig::default()
    }

    #[test]
    fn single_periodic_cube_is_eight() {
        let p = PathIntegralInstance::periodic([1, 1, 1]).unwrap();
        assert_eq!(p.edges.len(), 3);
        assert_eq!(p.evaluate_naive(&none(), &[]).unwrap(), 8);
        assert_eq!(p.evaluate(&none(), &[]).unwrap(), 8);
    }

    #[test]
    fn three_evaluators_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lat = SpacetimeLattice::new(GeometrySpec::torus(2, 2, 1)).unwrap();
        let insts = [PathIntegralInstance::periodic([2, 2, 1]).unwrap(), PathIntegralInstance::window(&lat, 0, 1).unwrap()];
        for p in &insts {
            let mut nonzero = 0;
            for _ in 0..300 {
                let mut a = none();
                for &e in &p.edges {
                    if rng.gen_bool(0.15) {
                        a.toggle_e(e);
                    }
                }
                for &f in &p.faces {
                    if rng.gen_bool(0.15) {
                        a.toggle_m(f);
                    }
                }
                let legs: Vec<bool> = (0..p.num_legs()).map(|_| rng.gen()).collect();
                let v = p.evaluate(&a, &legs).unwrap();
                assert_eq!(v, p.evaluate_enumerated(&a, &legs).unwrap());
                assert_eq!(v, p.evaluate_naive(&a, &legs).unwrap());
                nonzero += (v != 0) as usize;
            }
            assert!(nonzero > 0);
        }
    }

    #[test]
    fn slab_gives_loop_state() {
        let p = PathIntegralInstance::slab(2, 2, 1).unwrap();
        assert_eq!(p.num_legs(), 8);
        let amps = p.ground_state_amplitudes(&none()).unwrap();
        // closed-loop condition on the top plane, checked directly
        let top_faces: Vec<Coord> = p.faces.iter().copied().filter(|f| f.kind() == CellKind::FaceXY && f.xyz()[2] == 2).collect();
        assert_eq!(top_faces.len(), 4);
        let mut support = 0;
        for (x, &v) in amps.iter().enumerate() {
            let closed = top_faces.iter().all(|f| {
                f.boundary().iter().filter(|&&e| (x >> p.leg_index(Leg::Fixed { edge: e }).unwrap()) & 1 == 1).count() % 2 == 0
            });
            assert_eq!(v != 0, closed, "config {x:08b}");
            if closed {
                assert_eq!(v, amps[0]);
                support += 1;
            }
        }
        assert_eq!(support, 32);
    }

    fn top_parity(p: &PathIntegralInstance, x: usize, f: Coord) -> usize {
        f.boundary().iter().filter(|&&e| (x >> p.leg_index(Leg::Fixed { edge: e }).unwrap()) & 1 == 1).count() % 2
    }

    #[test]
    fn m_pair_moves_the_support() {
        let p = PathIntegralInstance::slab(2, 2, 1).unwrap();
        // dual path: top plaquette, down into a cube, across, up to the next plaquette
        let (f1, f2) = (Coord::from_xyz([1, 1, 2]), Coord::from_xyz([3, 1, 2]));
        let mut a = none();
        a.toggle_m(f1);
        a.toggle_m(Coord::from_xyz([2, 1, 1]));
        a.toggle_m(f2);
        assert!(p.is_closed(&a).is_closed());
        let amps = p.ground_state_amplitudes(&a).unwrap();
        let support: Vec<usize> = (0..amps.len()).filter(|&x| amps[x] != 0).collect();
        assert_eq!(support.len(), 32);
        for x in support {
            assert_eq!((top_parity(&p, x, f1), top_parity(&p, x, f2)), (1, 1));
            assert_eq!(amps[x].abs(), amps[support_first(&amps)].abs());
        }
    }

    fn support_first(amps: &[i64]) -> usize {
        amps.iter().position(|&v| v != 0).unwrap()
    }

    #[test]
    fn piercing_e_gives_relative_sign() {
        let p = PathIntegralInstance::slab(2, 2, 1).unwrap();
        // down a z edge, along the smooth bottom, back up: ends on two state-boundary vertices
        let mut a = none();
        a.toggle_e(Coord::from_xyz([0, 0, 1]));
        a.toggle_e(Coord::from_xyz([1, 0, 0]));
        a.toggle_e(Coord::from_xyz([2, 0, 1]));
        assert!(p.is_closed(&a).is_closed());
        let plain = p.ground_state_amplitudes(&none()).unwrap();
        let amps = p.ground_state_amplitudes(&a).unwrap();
        let k = p.leg_index(Leg::Fixed { edge: Coord::from_xyz([1, 0, 2]) }).unwrap();
        let mut signs = [0, 0];
        for (x, (&v, &w)) in amps.iter().zip(&plain).enumerate() {
            let s = if (x >> k) & 1 == 1 { -1 } else { 1 };
            assert_eq!(v, s * w);
            if w != 0 {
                signs[(s < 0) as usize] += 1;
            }
        }
        assert_eq!(signs, [16, 16]);
        // stopping at the smooth bottom is not allowed
        let mut open = none();
        open.toggle_e(Coord::from_xyz([0, 0, 1]));
        assert_eq!(p.is_closed(&open).odd, vec![(AnyonSpecies::E, Coord::from_xyz([0, 0, 0]))]);
        assert!(p.ground_state_amplitudes(&open).unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn open_configs_vanish() {
        let p = PathIntegralInstance::periodic([2, 2, 2]).unwrap();
        for &e in &p.edges {
            let mut a = none();
            a.toggle_e(e);
            assert_eq!(p.is_closed(&a).odd.len(), 2);
            assert_eq!(p.evaluate(&a, &[]).unwrap(), 0);
        }
        for &f in &p.faces {
            let mut a = none();
            a.toggle_m(f);
            assert_eq!(p.is_closed(&a).odd.len(), 2);
            assert_eq!(p.evaluate(&a, &[]).unwrap(), 0);
        }
    }

    #[test]
    fn moves_change_value_by_the_predicted_sign() {
        let mut p = PathIntegralInstance::periodic([3, 3, 2]).unwrap();
        p.cap = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fs = p.e_move_faces();
        let es = p.m_move_edges();
        assert_eq!((fs.len(), es.len()), (p.faces.len(), p.edges.len()));
        let mut a = none();
        let mut value = p.evaluate(&a, &[]).unwrap();
        let mut flips = 0;
        for _ in 0..200 {
            let flip = if rng.gen() { p.e_move(&mut a, *fs.choose(&mut rng).unwrap()) } else { p.m_move(&mut a, *es.choose(&mut rng).unwrap()) };
            if flip {
                value = -value;
                flips += 1;
            }
            assert_eq!(p.evaluate(&a, &[]).unwrap(), value);
            assert!(p.is_closed(&a).is_closed());
        }
        assert!(flips > 0);
        assert_eq!(p.homology_label(&a).unwrap(), HomologyLabel::Periodic { e: [false; 3], m: [false; 3] });
    }

    #[test]
    fn winding_loop_label() {
        let p = PathIntegralInstance::periodic([2, 2, 2]).unwrap();
        let mut a = none();
        for z in [1, 3] {
            a.toggle_e(Coord::from_xyz([0, 0, z]));
        }
        assert_eq!(p.homology_label(&a).unwrap(), HomologyLabel::Periodic { e: [false, false, true], m: [false; 3] });
        // a non-contractible e loop is killed by the flat sectors of A
        assert_eq!(p.evaluate(&a, &[]).unwrap(), 0);
        let mut b = a.clone();
        p.e_move(&mut b, Coord::from_xyz([1, 0, 1]));
        assert_eq!(p.homology_label(&b).unwrap(), p.homology_label(&a).unwrap());
        let mut open = none();
        open.toggle_e(Coord::from_xyz([0, 0, 1]));
        assert!(matches!(p.homology_label(&open), Err(Error::NotClosed(_))));
    }

    #[test]
    fn duality_swaps_species() {
        let p = PathIntegralInstance::periodic([2, 2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fs = p.e_move_faces();
        let es = p.m_move_edges();
        let shift = |c: Coord| {
            let x = c.xyz();
            Coord::from_xyz([x[0] + 1, x[1] + 1, x[2] + 1])
        };
        let mut seen = [0, 0];
        for _ in 0..100 {
            let mut a = none();
            for _ in 0..rng.gen_range(1..5) {
                p.e_move(&mut a, *fs.choose(&mut rng).unwrap());
                p.m_move(&mut a, *es.choose(&mut rng).unwrap());
            }
            let mut d = none();
            for &e in &a.e {
                d.toggle_m(p.canon(shift(e)));
            }
            for &f in &a.m {
                d.toggle_e(p.canon(shift(f)));
            }
            let v = p.evaluate(&a, &[]).unwrap();
            assert_eq!(v, p.evaluate(&d, &[]).unwrap());
            seen[(v < 0) as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
    }
}
