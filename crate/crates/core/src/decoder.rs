//! Minimum-weight perfect matching decoder over the detector graph.
//!
//! Each species is decoded on its own. All virtual nodes of a species are
//! merged into one boundary node; a fired node either pairs with another
//! fired node or with the boundary, whichever is cheaper.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::blossom::min_weight_perfect_matching;
use crate::error::{Error, Result};
use crate::segments::AnyonSpecies;
use crate::syndrome::DetectorGraph;

pub const INF: u16 = u16::MAX;

/// Shortest-path metric for one species.
#[derive(Clone, Debug)]
pub struct SpeciesGraph {
    pub species: AnyonSpecies,
    /// Detector-graph node id of each local real node.
    pub nodes: Vec<usize>,
    /// Local index of the merged boundary (`nodes.len()`).
    pub boundary: usize,
    /// Adjacency: (neighbour, fault edge id).
    pub adj: Vec<Vec<(usize, usize)>>,
    dist: Vec<u16>,
    mask: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub species: Vec<SpeciesGraph>,
    /// Detector node id to (species slot, local index).
    pub local: Vec<Option<(usize, usize)>>,
    pub num_observables: usize,
}

impl SpeciesGraph {
    fn width(&self) -> usize {
        self.nodes.len() + 1
    }

    /// Fault count of a shortest path, `INF` if disconnected.
    pub fn distance(&self, a: usize, b: usize) -> u16 {
        self.dist[a * self.width() + b]
    }

    /// Observable flips along the chosen shortest path.
    pub fn path_mask(&self, a: usize, b: usize) -> u64 {
        self.mask[a * self.width() + b]
    }

    /// Fault edges of a shortest path from `a` to `b` (BFS witness).
    pub fn path(&self, g: &DetectorGraph, a: usize, b: usize) -> Vec<usize> {
        let n = self.width();
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut q = VecDeque::from([a]);
        seen[a] = true;
        while let Some(u) = q.pop_front() {
            if u == b {
                break;
            }
            for &(v, e) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = e;
                    q.push_back(v);
                }
            }
        }
        let mut out = Vec::new();
        let mut v = b;
        while v != a {
            let e = prev[v];
            if e == usize::MAX {
                return vec![];
            }
            out.push(e);
            v = self.other_end(g, e, v);
        }
        out.reverse();
        out
    }

    fn other_end(&self, g: &DetectorGraph, e: usize, v: usize) -> usize {
        let ends = self.local_ends(g, e);
        if ends[0] == v {
            ends[1]
        } else {
            ends[0]
        }
    }

    fn local_ends(&self, g: &DetectorGraph, e: usize) -> [usize; 2] {
        let mut real = g.edges[e]
            .nodes
            .iter()
            .filter(|&&i| g.nodes[i].virtual_kind.is_none())
            .map(|&i| self.nodes.binary_search(&i).expect("species node"));
        let a = real.next().unwrap_or(self.boundary);
        let b = real.next().unwrap_or(self.boundary);
        [a, b]
    }
}

/// Build the per-species all-pairs shortest-path tables.
pub fn build_matching_graph(g: &DetectorGraph) -> Result<MatchingGraph> {
    let mut local = vec![None; g.nodes.len()];
    let mut species = Vec::new();
    for (slot, sp) in [AnyonSpecies::E, AnyonSpecies::M].into_iter().enumerate() {
        let nodes: Vec<usize> = g.real.iter().copied().filter(|&i| g.nodes[i].species == sp).collect();
        for (k, &i) in nodes.iter().enumerate() {
            local[i] = Some((slot, k));
        }
        let boundary = nodes.len();
        let n = boundary + 1;
        let mut adj = vec![Vec::new(); n];
        let mut sg = SpeciesGraph { species: sp, nodes, boundary, adj: vec![], dist: vec![], mask: vec![] };
        for (ei, e) in g.edges.iter().enumerate() {
            if e.species != sp {
                continue;
            }
            let reals = e.nodes.iter().filter(|&&i| g.nodes[i].virtual_kind.is_none()).count();
            if reals > 2 {
                return Err(Error::Graph(format!("fault edge {ei} touches {reals} detectors")));
            }
            let [a, b] = sg.local_ends(g, ei);
            if a == b {
                continue;
            }
            adj[a].push((b, ei));
            adj[b].push((a, ei));
        }
        sg.adj = adj;
        let rows: Vec<(Vec<u16>, Vec<u64>)> = (0..n).into_par_iter().map(|s| bfs(&sg.adj, g, s)).collect();
        let mut dist = Vec::with_capacity(n * n);
        let mut mask = Vec::with_capacity(n * n);
        for (d, m) in rows {
            dist.extend(d);
            mask.extend(m);
        }
        sg.dist = dist;
        sg.mask = mask;
        for a in 0..boundary {
            if (0..n).all(|b| b == a || sg.dist[a * n + b] == INF) {
                return Err(Error::Graph(format!("detector {} cannot be matched", sg.nodes[a])));
            }
        }
        species.push(sg);
    }
    Ok(MatchingGraph { species, local, num_observables: g.observables.len() })
}

fn bfs(adj: &[Vec<(usize, usize)>], g: &DetectorGraph, s: usize) -> (Vec<u16>, Vec<u64>) {
    let n = adj.len();
    let mut dist = vec![INF; n];
    let mut mask = vec![0u64; n];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &(v, e) in &adj[u] {
            if dist[v] == INF {
                dist[v] = dist[u] + 1;
                mask[v] = mask[u] ^ g.edges[e].obs_mask;
                q.push_back(v);
            }
        }
    }
    (dist, mask)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// Matched detector-node pairs; `None` is the boundary.
    pub pairs: Vec<(usize, Option<usize>)>,
    /// Predicted observable flips, bit `k` for observable `k`.
    pub predicted: u64,
    pub weight: u64,
}

/// Decode a list of fired detector nodes.
pub fn decode(mg: &MatchingGraph, fired: &[usize]) -> Result<DecodeResult> {
    let mut out = DecodeResult::default();
    for (slot, sg) in mg.species.iter().enumerate() {
        let mut xs = Vec::new();
        for &f in fired {
            match mg.local.get(f).copied().flatten() {
                Some((s, k)) if s == slot => xs.push(k),
                Some(_) => {}
                None => return Err(Error::Graph(format!("node {f} is not a detector"))),
            }
        }
        decode_species(sg, &xs, &mut out)?;
    }
    Ok(out)
}

const BIG: i64 = 1 << 40;

fn decode_species(sg: &SpeciesGraph, xs: &[usize], out: &mut DecodeResult) -> Result<()> {
    if xs.is_empty() {
        return Ok(());
    }
    let b = sg.boundary;
    let k = xs.len();
    let n = k + (k % 2);
    // Pairing through the boundary costs both boundary legs.
    let cost = |i: usize, j: usize| -> i64 {
        if i >= k || j >= k {
            let a = xs[i.min(j)];
            let d = sg.distance(a, b);
            return if d == INF { BIG } else { d as i64 };
        }
        let (a, c) = (xs[i], xs[j]);
        let direct = sg.distance(a, c);
        let (da, dc) = (sg.distance(a, b), sg.distance(c, b));
        let via = if da == INF || dc == INF { BIG } else { da as i64 + dc as i64 };
        let dir = if direct == INF { BIG } else { direct as i64 };
        dir.min(via)
    };
    for (i, j) in min_weight_perfect_matching(n, cost) {
        let w = cost(i, j);
        if w >= BIG {
            return Err(Error::Infeasible("a fired detector has no partner".into()));
        }
        out.weight += w as u64;
        if j >= k {
            let a = xs[i];
            out.predicted ^= sg.path_mask(a, b);
            out.pairs.push((sg.nodes[a], None));
            continue;
        }
        let (a, c) = (xs[i], xs[j]);
        let direct = sg.distance(a, c);
        if direct != INF && direct as i64 == w {
            out.predicted ^= sg.path_mask(a, c);
            out.pairs.push((sg.nodes[a], Some(sg.nodes[c])));
        } else {
            out.predicted ^= sg.path_mask(a, b) ^ sg.path_mask(c, b);
            out.pairs.push((sg.nodes[a], None));
            out.pairs.push((sg.nodes[c], None));
        }
    }
    Ok(())
}

/// Failure bits: decoded flip against the true frame flip.
pub fn logical_failure(dr: &DecodeResult, truth: u64) -> u64 {
    dr.predicted ^ truth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_circuit, Basis, Init};
    use crate::lattice::{GeometrySpec, SpacetimeLattice};
    use crate::noise::enumerate_elementary_faults;
    use crate::syndrome::{build_detector_graph, fault_label_flips};

    fn weight_one(spec: GeometrySpec, init: Init, ro: Basis) -> (usize, usize) {
        let c = build_circuit(&SpacetimeLattice::new(spec).unwrap(), Some(init), Some(ro)).unwrap();
        let g = build_detector_graph(&c).unwrap();
        let mg = build_matching_graph(&g).unwrap();
        let faults = enumerate_elementary_faults(&c);
        let flips = fault_label_flips(&c, &faults);
        let mut bad = 0;
        for fl in &flips {
            let mut flipped = vec![false; c.num_measurements];
            for &l in fl {
                flipped[l] = true;
            }
            let truth = g.observables.iter().enumerate().fold(0u64, |m, (k, o)| {
                m | ((o.labels.iter().filter(|&&l| flipped[l]).count() as u64 & 1) << k)
            });
            let dr = decode(&mg, &g.fired(&flipped)).unwrap();
            if logical_failure(&dr, truth) != 0 {
                bad += 1;
            }
        }
        (bad, faults.len())
    }

    #[test]
    fn empty_syndrome() {
        let c = build_circuit(&SpacetimeLattice::new(GeometrySpec::rectangle(2, 2, 2)).unwrap(), Some(Init::Z), Some(Basis::Z)).unwrap();
        let g = build_detector_graph(&c).unwrap();
        let mg = build_matching_graph(&g).unwrap();
        assert_eq!(decode(&mg, &[]).unwrap(), DecodeResult::default());
    }

    #[test]
    fn corrects_every_single_fault() {
        for spec in [GeometrySpec::rectangle(3, 3, 3), GeometrySpec::torus(4, 4, 3), GeometrySpec::surgery(3, 1, 3, 5)] {
            for (init, ro) in [(Init::Z, Basis::Z), (Init::X, Basis::X)] {
                let (bad, n) = weight_one(spec, init, ro);
                assert_eq!(bad, 0, "{spec:?} {init:?}: {bad}/{n} single faults miscorrected");
            }
        }
    }
}
