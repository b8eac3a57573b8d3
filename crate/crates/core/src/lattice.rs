//! Spacetime cubic lattice traversed along `t = x + y`.
//!
//! All positions use doubled integer coordinates. A cell of the cubic
//! lattice sits at `(X, Y, Z)` where an odd entry means the cell extends
//! along that axis. The circuit works in the rotated frame
//! `t4 = X + Y` (quarter periods), `u2 = Y - X` (doubled `x̄`), `z2 = Z`.
//! One period of the circuit spans `t4 -> t4 + 4`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Position in the rotated frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub t4: i32,
    pub u2: i32,
    pub z2: i32,
}

impl Coord {
    pub const fn new(t4: i32, u2: i32, z2: i32) -> Self {
        Coord { t4, u2, z2 }
    }

    /// Cubic coordinates `(X, Y, Z)`. Requires `t4 ≡ u2 (mod 2)`.
    pub fn xyz(self) -> [i32; 3] {
        debug_assert_eq!((self.t4 - self.u2).rem_euclid(2), 0, "{self:?}");
        [(self.t4 - self.u2).div_euclid(2), (self.t4 + self.u2).div_euclid(2), self.z2]
    }

    pub fn from_xyz(p: [i32; 3]) -> Self {
        Coord { t4: p[0] + p[1], u2: p[1] - p[0], z2: p[2] }
    }

    pub fn is_cell(self) -> bool {
        (self.t4 - self.u2).rem_euclid(2) == 0
    }

    pub fn kind(self) -> CellKind {
        let [x, y, z] = self.xyz();
        let o = |v: i32| v.rem_euclid(2) == 1;
        match (o(x), o(y), o(z)) {
            (false, false, false) => CellKind::Vertex,
            (true, false, false) => CellKind::EdgeX,
            (false, true, false) => CellKind::EdgeY,
            (false, false, true) => CellKind::EdgeZ,
            (true, true, false) => CellKind::FaceXY,
            (true, false, true) => CellKind::FaceXZ,
            (false, true, true) => CellKind::FaceYZ,
            (true, true, true) => CellKind::Cube,
        }
    }

    /// Cells one rank lower (the boundary), in cubic-axis order.
    pub fn boundary(self) -> Vec<Coord> {
        self.neighbours(true)
    }

    /// Cells one rank higher containing this cell.
    pub fn coboundary(self) -> Vec<Coord> {
        self.neighbours(false)
    }

    fn neighbours(self, odd_axes: bool) -> Vec<Coord> {
        let p = self.xyz();
        let mut out = Vec::with_capacity(6);
        for ax in 0..3 {
            if (p[ax].rem_euclid(2) == 1) == odd_axes {
                for d in [-1, 1] {
                    let mut q = p;
                    q[ax] += d;
                    out.push(Coord::from_xyz(q));
                }
            }
        }
        out
    }

    /// All cubes containing this cell (itself if it is a cube).
    pub fn containing_cubes(self) -> Vec<Coord> {
        let p = self.xyz();
        let mut out = vec![p];
        for ax in 0..3 {
            if p[ax].rem_euclid(2) == 0 {
                out = out
                    .into_iter()
                    .flat_map(|q| {
                        let mut a = q;
                        let mut b = q;
                        a[ax] -= 1;
                        b[ax] += 1;
                        [a, b]
                    })
                    .collect();
            }
        }
        out.into_iter().map(Coord::from_xyz).collect()
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.t4, self.u2, self.z2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Vertex,
    EdgeX,
    EdgeY,
    EdgeZ,
    FaceXY,
    FaceXZ,
    FaceYZ,
    Cube,
}

impl CellKind {
    pub fn rank(self) -> u8 {
        match self {
            CellKind::Vertex => 0,
            CellKind::EdgeX | CellKind::EdgeY | CellKind::EdgeZ => 1,
            CellKind::FaceXY | CellKind::FaceXZ | CellKind::FaceYZ => 2,
            CellKind::Cube => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryClass {
    Bulk,
    Smooth,
    Rough,
    Corner,
    Removed,
    StateInitial,
    StateFinal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Torus,
    Rectangle,
    Surgery,
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeometryKind::Torus => "torus",
            GeometryKind::Rectangle => "rectangle",
            GeometryKind::Surgery => "surgery",
        })
    }
}

impl std::str::FromStr for GeometryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(GeometryKind::Torus),
            "rectangle" => Ok(GeometryKind::Rectangle),
            "surgery" => Ok(GeometryKind::Surgery),
            _ => Err(Error::Config(format!("unknown geometry '{s}'"))),
        }
    }
}

/// User-facing geometry description.
///
/// `l1` counts unit cells along `z̄`, `l2` along `x̄`. For surgery only `l`,
/// `t0`, `t1` are read and the merged block is `l × (2l+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    pub l1: u32,
    pub l2: u32,
    pub rounds: u32,
    pub l: u32,
    pub t0: u32,
    pub t1: u32,
}

impl GeometrySpec {
    pub fn torus(l1: u32, l2: u32, rounds: u32) -> Self {
        GeometrySpec { kind: GeometryKind::Torus, l1, l2, rounds, l: 0, t0: 0, t1: 0 }
    }

    pub fn rectangle(l1: u32, l2: u32, rounds: u32) -> Self {
        GeometrySpec { kind: GeometryKind::Rectangle, l1, l2, rounds, l: 0, t0: 0, t1: 0 }
    }

    pub fn surgery(l: u32, t0: u32, t1: u32, rounds: u32) -> Self {
        GeometrySpec {
            kind: GeometryKind::Surgery,
            l1: 2 * l + 1,
            l2: l,
            rounds,
            l,
            t0,
            t1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GeometryKind::Torus => {
                if self.l1 < 2 || self.l2 < 2 {
                    return Err(Error::DimensionTooSmall(format!(
                        "torus needs l1, l2 >= 2 (got {}x{})",
                        self.l1, self.l2
                    )));
                }
                if self.l2 % 2 == 1 {
                    return Err(Error::DimensionTooSmall(format!(
                        "torus needs even l2 for a t-preserving identification (got {})",
                        self.l2
                    )));
                }
            }
            GeometryKind::Rectangle => {
                if self.l1 < 1 || self.l2 < 2 {
                    return Err(Error::DimensionTooSmall(format!(
                        "rectangle needs l1 >= 1, l2 >= 2 (got {}x{})",
                        self.l1, self.l2
                    )));
                }
            }
            GeometryKind::Surgery => {
                if self.l < 2 {
                    return Err(Error::DimensionTooSmall(format!("surgery needs l >= 2 (got {})", self.l)));
                }
                if self.l1 != 2 * self.l + 1 || self.l2 != self.l {
                    return Err(Error::DimensionTooSmall(
                        "surgery block must be l x (2l+1)".to_string(),
                    ));
                }
                if self.t0 < 1 || self.t1 <= self.t0 || self.t1 > self.rounds {
                    return Err(Error::MergeWindow(format!(
                        "need 1 <= t0 < t1 <= rounds (got t0={}, t1={}, rounds={})",
                        self.t0, self.t1, self.rounds
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    Green,
    Purple,
}

/// Qubit position on the projected lattice, doubled `(z̄, x̄)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitId {
    pub z2: i32,
    pub x2: i32,
}

impl QubitId {
    pub const fn new(z2: i32, x2: i32) -> Self {
        QubitId { z2, x2 }
    }

    pub fn species(self) -> Species {
        if self.z2.rem_euclid(2) == 0 {
            Species::Green
        } else {
            Species::Purple
        }
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.species() {
            Species::Green => 'g',
            Species::Purple => 'p',
        };
        write!(f, "{s}({},{})", self.z2, self.x2)
    }
}

/// Spacetime lattice for one geometry. Cells are answered by predicate
/// rather than stored; all queries are cheap and pure.
#[derive(Clone, Debug)]
pub struct SpacetimeLattice {
    pub spec: GeometrySpec,
}

/// Time range of tensor cells of the circuit: `[0, 4T-1]`.
impl SpacetimeLattice {
    pub fn new(spec: GeometrySpec) -> Result<Self> {
        spec.validate()?;
        Ok(SpacetimeLattice { spec })
    }

    pub fn periodic(&self) -> bool {
        self.spec.kind == GeometryKind::Torus
    }

    /// `u2` period (torus) or extent.
    pub fn u_extent(&self) -> i32 {
        2 * self.spec.l2 as i32
    }

    pub fn z_extent(&self) -> i32 {
        2 * self.spec.l1 as i32
    }

    pub fn t4_end(&self) -> i32 {
        4 * self.spec.rounds as i32
    }

    /// Bridge cube column `z2` and the inclusive `t4` window of bridge cubes.
    pub fn bridge(&self) -> Option<(i32, i32, i32)> {
        if self.spec.kind != GeometryKind::Surgery {
            return None;
        }
        let l = self.spec.l as i32;
        Some((2 * l + 1, 4 * self.spec.t0 as i32, 4 * self.spec.t1 as i32 - 4))
    }

    /// `t4` of the merge measurement layer and the split measurement layer.
    pub fn merge_split_t4(&self) -> Option<(i32, i32)> {
        self.bridge().map(|(_, lo, hi)| (lo - 2, hi + 2))
    }

    /// Canonical representative of a coordinate (wraps the torus).
    pub fn wrap(&self, c: Coord) -> Coord {
        if !self.periodic() {
            return c;
        }
        let pu = self.u_extent();
        let pz = self.z_extent();
        Coord { t4: c.t4, u2: c.u2.rem_euclid(pu), z2: c.z2.rem_euclid(pz) }
    }

    pub fn wrap_qubit(&self, q: QubitId) -> QubitId {
        if !self.periodic() {
            return q;
        }
        QubitId { z2: q.z2.rem_euclid(self.z_extent()), x2: q.x2.rem_euclid(self.u_extent()) }
    }

    pub fn cube_present(&self, c: Coord) -> bool {
        let c = self.wrap(c);
        if self.periodic() {
            return true;
        }
        if c.z2 < 1 || c.z2 > self.z_extent() - 1 || c.u2 < 0 || c.u2 > self.u_extent() {
            return false;
        }
        if let Some((zb, lo, hi)) = self.bridge() {
            if c.z2 == zb && (c.t4 < lo || c.t4 > hi) {
                return false;
            }
        }
        true
    }

    /// Cells cut away by the rough boundary at `x̄ = 0` and `x̄ = L2`.
    pub fn rough_removed(&self, c: Coord) -> bool {
        if self.periodic() {
            return false;
        }
        match c.kind() {
            CellKind::Cube | CellKind::FaceXY => false,
            _ => c.u2 <= 0 || c.u2 >= self.u_extent(),
        }
    }

    pub fn present(&self, c: Coord) -> bool {
        if c.kind() == CellKind::Cube {
            return self.cube_present(c);
        }
        if self.rough_removed(c) {
            return false;
        }
        c.containing_cubes().into_iter().any(|q| self.cube_present(q))
    }

    fn in_range(&self, c: Coord) -> bool {
        if !c.is_cell() || c.t4 < -2 || c.t4 > self.t4_end() + 1 {
            return false;
        }
        if self.periodic() {
            return true;
        }
        c.z2 >= -1 && c.z2 <= self.z_extent() + 1 && c.u2 >= -1 && c.u2 <= self.u_extent() + 1
    }

    fn on_smooth_plane(&self, c: Coord) -> bool {
        if c.z2 == 0 || c.z2 == self.z_extent() {
            return true;
        }
        if let Some((zb, lo, hi)) = self.bridge() {
            let outside = c.t4 < lo - 2 || c.t4 > hi + 2;
            if outside && (c.z2 == zb - 1 || c.z2 == zb + 1 || c.z2 == zb) {
                return true;
            }
        }
        false
    }

    pub fn classify_cell(&self, c: Coord) -> Result<BoundaryClass> {
        if !self.in_range(c) {
            return Err(Error::OutOfRange(format!("cell {c} outside lattice range")));
        }
        let k = c.kind();
        if self.rough_removed(c) {
            return Ok(if k.rank() == 1 && self.on_smooth_plane(c) {
                BoundaryClass::Corner
            } else {
                BoundaryClass::Rough
            });
        }
        if !self.present(c) {
            return Ok(BoundaryClass::Removed);
        }
        if c.t4 < 0 {
            return Ok(BoundaryClass::StateInitial);
        }
        if c.t4 >= self.t4_end() {
            return Ok(BoundaryClass::StateFinal);
        }
        if k != CellKind::Cube && c.containing_cubes().into_iter().any(|q| !self.cube_present(q)) {
            return Ok(BoundaryClass::Smooth);
        }
        Ok(BoundaryClass::Bulk)
    }

    /// Enumerate all in-range cells with `t4` in `[lo, hi]` (canonical, unwrapped for the
    /// rectangle, one representative per torus class).
    pub fn cells_in_window(&self, lo: i32, hi: i32) -> Vec<Coord> {
        let (u_lo, u_hi, z_lo, z_hi) = if self.periodic() {
            (0, self.u_extent() - 1, 0, self.z_extent() - 1)
        } else {
            (-1, self.u_extent() + 1, -1, self.z_extent() + 1)
        };
        let mut out = Vec::new();
        for t4 in lo..=hi {
            for z2 in z_lo..=z_hi {
                for u2 in u_lo..=u_hi {
                    let c = Coord::new(t4, u2, z2);
                    if c.is_cell() {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// Green worldline cell at odd `t4`: the x/y edge carrying the qubit.
    pub fn green_edge(&self, t4: i32, q: QubitId) -> Coord {
        debug_assert!(t4.rem_euclid(2) == 1);
        Coord::new(t4, q.x2, q.z2)
    }

    /// Purple worldline cell at odd `t4`: the xz/yz face carrying the qubit.
    pub fn purple_face(&self, t4: i32, q: QubitId) -> Coord {
        debug_assert!(t4.rem_euclid(2) == 1);
        Coord::new(t4, q.x2, q.z2)
    }

    /// The xy face a green qubit passes through at even `t4`.
    pub fn green_face(&self, t4: i32, q: QubitId) -> Coord {
        let u = if (q.x2 - 1 - (t4 + 2)).rem_euclid(4) == 0 { q.x2 - 1 } else { q.x2 + 1 };
        self.wrap(Coord::new(t4, u, q.z2))
    }

    /// The z edge a purple qubit meets at even `t4`.
    pub fn purple_zedge(&self, t4: i32, q: QubitId) -> Coord {
        let u = if (q.x2 - 1 - t4).rem_euclid(4) == 0 { q.x2 - 1 } else { q.x2 + 1 };
        self.wrap(Coord::new(t4, u, q.z2))
    }

    pub fn layout(&self) -> SpatialLayout {
        let pu = self.u_extent();
        let pz = self.z_extent();
        let (z_max, periodic) = if self.periodic() { (pz - 1, true) } else { (pz, false) };
        let mut qubits = Vec::new();
        for z2 in 0..=z_max {
            if !periodic && z2 % 2 == 1 && z2 > pz - 1 {
                continue;
            }
            let mut x2 = 1;
            while x2 < pu {
                qubits.push(QubitId::new(z2, x2));
                x2 += 2;
            }
        }
        qubits.sort();
        let bridge = self.bridge().map(|(zb, _, _)| zb);
        let unused_outside_window = qubits.iter().map(|q| Some(q.z2) == bridge).collect();
        SpatialLayout { qubits, unused_outside_window, periodic, u_period: pu, z_period: pz }
    }
}

/// Qubits of the projected lattice in canonical `(z2, x2)` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpatialLayout {
    pub qubits: Vec<QubitId>,
    /// Bridge qubits of the surgery geometry, idle outside the merge window.
    pub unused_outside_window: Vec<bool>,
    pub periodic: bool,
    pub u_period: i32,
    pub z_period: i32,
}

impl SpatialLayout {
    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn index(&self, q: QubitId) -> Option<usize> {
        self.qubits.binary_search(&q).ok()
    }

    /// Green neighbours of a purple qubit (its two CX partners).
    pub fn green_neighbours(&self, p: QubitId) -> Vec<QubitId> {
        [p.z2 - 1, p.z2 + 1]
            .into_iter()
            .map(|z| self.canon(QubitId::new(z, p.x2)))
            .filter(|q| self.index(*q).is_some())
            .collect()
    }

    pub fn canon(&self, q: QubitId) -> QubitId {
        if self.periodic {
            QubitId::new(q.z2.rem_euclid(self.z_period), q.x2.rem_euclid(self.u_period))
        } else {
            q
        }
    }

    /// Whether a two-qubit op may join `a` and `b`.
    pub fn adjacent(&self, a: QubitId, b: QubitId) -> bool {
        let dz = self.delta(a.z2, b.z2, self.z_period);
        let dx = self.delta(a.x2, b.x2, self.u_period);
        (a.species() == b.species() && dz == 0 && dx == 2)
            || (a.species() != b.species() && dz == 1 && dx == 0)
    }

    fn delta(&self, a: i32, b: i32, p: i32) -> i32 {
        let d = (a - b).abs();
        if self.periodic {
            let d = d.rem_euclid(p);
            d.min(p - d)
        } else {
            d
        }
    }
}

pub fn build_spacetime_lattice(spec: GeometrySpec) -> Result<SpacetimeLattice> {
    SpacetimeLattice::new(spec)
}

pub fn project_spatial(lat: &SpacetimeLattice) -> SpatialLayout {
    lat.layout()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_kinds_follow_parity() {
        assert_eq!(Coord::new(0, 0, 0).kind(), CellKind::Vertex);
        assert_eq!(Coord::new(0, 2, 1).kind(), CellKind::Cube);
        assert_eq!(Coord::new(2, 0, 0).kind(), CellKind::FaceXY);
        assert_eq!(Coord::new(0, 0, 1).kind(), CellKind::EdgeZ);
        assert_eq!(Coord::new(1, 1, 0).kind(), CellKind::EdgeY);
        assert_eq!(Coord::new(1, -1, 0).kind(), CellKind::EdgeX);
    }

    #[test]
    fn boundary_of_boundary_is_even() {
        let c = Coord::new(0, 2, 1);
        let mut count = std::collections::HashMap::new();
        for f in c.boundary() {
            for e in f.boundary() {
                *count.entry(e).or_insert(0) += 1;
            }
        }
        assert_eq!(count.len(), 12);
        assert!(count.values().all(|v| v % 2 == 0));
    }

    #[test]
    fn torus_rejects_odd_l2() {
        assert!(SpacetimeLattice::new(GeometrySpec::torus(3, 3, 1)).is_err());
        assert!(SpacetimeLattice::new(GeometrySpec::torus(3, 4, 1)).is_ok());
    }

    #[test]
    fn torus_cubes_per_period() {
        for (l1, l2) in [(2, 2), (3, 4), (4, 2)] {
            let lat = SpacetimeLattice::new(GeometrySpec::torus(l1, l2, 2)).unwrap();
            let cubes = lat.cells_in_window(4, 7).into_iter().filter(|c| c.kind() == CellKind::Cube).count();
            assert_eq!(cubes as u32, l1 * l2);
        }
    }

    #[test]
    fn rectangle_qubit_count() {
        let lat = SpacetimeLattice::new(GeometrySpec::rectangle(3, 3, 1)).unwrap();
        assert_eq!(lat.layout().len(), 7 * 3);
    }

    #[test]
    fn rough_vertices_and_corners() {
        let lat = SpacetimeLattice::new(GeometrySpec::rectangle(2, 2, 2)).unwrap();
        assert_eq!(lat.classify_cell(Coord::new(1, -1, 0)).unwrap(), BoundaryClass::Corner);
        assert_eq!(lat.classify_cell(Coord::new(1, -1, 2)).unwrap(), BoundaryClass::Rough);
        assert_eq!(lat.classify_cell(Coord::new(0, 0, 1)).unwrap(), BoundaryClass::Rough);
        assert_eq!(lat.classify_cell(Coord::new(2, 0, 0)).unwrap(), BoundaryClass::Smooth);
        assert_eq!(lat.classify_cell(Coord::new(2, 2, 1)).unwrap(), BoundaryClass::Bulk);
    }
}
