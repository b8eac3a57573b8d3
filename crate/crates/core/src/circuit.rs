//! Layered circuit description and the schedule compiler.
//!
//! The compiler reads the spacetime lattice cell by cell: an xy face with
//! four green legs becomes `MXX`, a z edge with four purple legs becomes
//! `MZZ`, a purple whose z edge is cut by the rough boundary is measured in
//! `Z`, and `CX` is emitted wherever a green edge meets a purple face. The
//! merge and split layers of the surgery geometry fall out of the same rule
//! applied to the two-legged z edges at the bridge wall.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{Coord, GeometryKind, GeometrySpec, QubitId, SpacetimeLattice, Species};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    CX { control: QubitId, target: QubitId },
    MXX { label: usize, a: QubitId, b: QubitId },
    MZZ { label: usize, a: QubitId, b: QubitId },
    MZ { label: usize, q: QubitId },
    MX { label: usize, q: QubitId },
    PrepPlus { q: QubitId },
    PrepZero { q: QubitId },
}

impl Op {
    pub fn qubits(&self) -> Vec<QubitId> {
        match *self {
            Op::CX { control, target } => vec![control, target],
            Op::MXX { a, b, .. } | Op::MZZ { a, b, .. } => vec![a, b],
            Op::MZ { q, .. } | Op::MX { q, .. } | Op::PrepPlus { q } | Op::PrepZero { q } => vec![q],
        }
    }

    pub fn label(&self) -> Option<usize> {
        match *self {
            Op::MXX { label, .. } | Op::MZZ { label, .. } | Op::MZ { label, .. } | Op::MX { label, .. } => {
                Some(label)
            }
            _ => None,
        }
    }

    fn set_label(&mut self, l: usize) {
        match self {
            Op::MXX { label, .. } | Op::MZZ { label, .. } | Op::MZ { label, .. } | Op::MX { label, .. } => {
                *label = l
            }
            _ => {}
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Op::CX { .. } | Op::MXX { .. } | Op::MZZ { .. })
    }

    fn sort_key(&self) -> (QubitId, u8) {
        let rank = match self {
            Op::PrepZero { .. } => 0,
            Op::PrepPlus { .. } => 1,
            Op::CX { .. } => 2,
            Op::MXX { .. } => 3,
            Op::MZZ { .. } => 4,
            Op::MZ { .. } => 5,
            Op::MX { .. } => 6,
        };
        (self.qubits()[0], rank)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Init,
    Bulk(u8),
    Readout,
}

/// `t4` offset of each bulk phase inside a period.
pub const PHASE_T4: [i32; 6] = [0, 1, 1, 2, 3, 3];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub index: usize,
    pub phase: Phase,
    pub t4: i32,
    pub ops: Vec<Op>,
}

impl Layer {
    pub fn is_measurement_layer(&self) -> bool {
        matches!(self.phase, Phase::Bulk(0) | Phase::Bulk(3))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Init {
    Z,
    X,
    /// `Z` preparation whose first period is treated as noiseless.
    Stabilizer,
}

impl Init {
    pub fn basis(self) -> Basis {
        match self {
            Init::X => Basis::X,
            Init::Z | Init::Stabilizer => Basis::Z,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub spec: GeometrySpec,
    pub init: Option<Init>,
    pub readout: Option<Basis>,
    pub qubits: Vec<QubitId>,
    pub layers: Vec<Layer>,
    pub num_measurements: usize,
}

/// Where a measurement sits: layer index and position in the layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasSite {
    pub layer: usize,
    pub op: usize,
}

impl Circuit {
    pub fn lattice(&self) -> SpacetimeLattice {
        SpacetimeLattice { spec: self.spec }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubit_index(&self, q: QubitId) -> usize {
        self.qubits.binary_search(&q).unwrap_or_else(|_| panic!("qubit {q} not in layout"))
    }

    pub fn meas_sites(&self) -> Vec<MeasSite> {
        let mut out = vec![MeasSite { layer: 0, op: 0 }; self.num_measurements];
        for (li, layer) in self.layers.iter().enumerate() {
            for (oi, op) in layer.ops.iter().enumerate() {
                if let Some(l) = op.label() {
                    out[l] = MeasSite { layer: li, op: oi };
                }
            }
        }
        out
    }

    pub fn op_of_label(&self, label: usize) -> Result<(&Layer, Op)> {
        for layer in &self.layers {
            for op in &layer.ops {
                if op.label() == Some(label) {
                    return Ok((layer, *op));
                }
            }
        }
        Err(Error::UnknownLabel(label))
    }

    /// Qubits holding state after each layer, as sorted qubit indices.
    ///
    /// A qubit is live from its preparation (or from the start when its first
    /// op is not a preparation) until a destructive measurement: `MX`, any
    /// readout measurement, or an `MZ` not followed by further use.
    pub fn live_after(&self) -> Vec<Vec<usize>> {
        let n = self.num_qubits();
        let mut first_is_prep = vec![None; n];
        let mut uses: Vec<Vec<(usize, Op)>> = vec![Vec::new(); n];
        for (li, layer) in self.layers.iter().enumerate() {
            for op in &layer.ops {
                for q in op.qubits() {
                    let i = self.qubit_index(q);
                    if first_is_prep[i].is_none() {
                        first_is_prep[i] = Some(matches!(op, Op::PrepPlus { .. } | Op::PrepZero { .. }));
                    }
                    uses[i].push((li, *op));
                }
            }
        }
        let mut live: Vec<bool> = (0..n).map(|i| first_is_prep[i] == Some(false)).collect();
        // destructive flags per (qubit, layer)
        let mut kills: Vec<Vec<usize>> = vec![Vec::new(); self.layers.len()];
        for (i, u) in uses.iter().enumerate() {
            for (k, (li, op)) in u.iter().enumerate() {
                let next = u.get(k + 1).map(|x| x.1);
                let destructive = match op {
                    Op::MX { .. } => true,
                    Op::MZ { .. } => {
                        self.layers[*li].phase == Phase::Readout
                            || matches!(next, None | Some(Op::PrepPlus { .. }) | Some(Op::PrepZero { .. }))
                    }
                    _ => false,
                };
                if destructive {
                    kills[*li].push(i);
                }
            }
        }
        let mut out = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            for op in &layer.ops {
                if let Op::PrepPlus { q } | Op::PrepZero { q } = op {
                    live[self.qubit_index(*q)] = true;
                }
            }
            for &i in &kills[li] {
                live[i] = false;
            }
            out.push((0..n).filter(|&i| live[i]).collect());
        }
        out
    }

    /// Qubits live before the first layer.
    pub fn live_at_start(&self) -> Vec<usize> {
        let n = self.num_qubits();
        let mut first: Vec<Option<bool>> = vec![None; n];
        for layer in &self.layers {
            for op in &layer.ops {
                for q in op.qubits() {
                    let i = self.qubit_index(q);
                    if first[i].is_none() {
                        first[i] = Some(matches!(op, Op::PrepPlus { .. } | Op::PrepZero { .. }));
                    }
                }
            }
        }
        (0..n).filter(|&i| first[i] == Some(false)).collect()
    }
}

/// Memory circuit on a torus or rectangle.
pub fn build_memory_circuit(
    lat: &SpacetimeLattice,
    init: Option<Init>,
    readout: Option<Basis>,
) -> Result<Circuit> {
    if lat.spec.kind == GeometryKind::Surgery {
        return Err(Error::UnsupportedLayout("memory circuit needs a torus or rectangle".into()));
    }
    compile(lat, init, readout)
}

/// Lattice-surgery circuit: two `l × l` blocks merged through the bridge for
/// periods `[t0, t1]`.
pub fn build_surgery_circuit(
    lat: &SpacetimeLattice,
    init: Option<Init>,
    readout: Option<Basis>,
) -> Result<Circuit> {
    if lat.spec.kind != GeometryKind::Surgery {
        return Err(Error::UnsupportedLayout("surgery circuit needs the surgery geometry".into()));
    }
    compile(lat, init, readout)
}

pub fn build_circuit(lat: &SpacetimeLattice, init: Option<Init>, readout: Option<Basis>) -> Result<Circuit> {
    compile(lat, init, readout)
}

struct Emitter {
    layers: Vec<Layer>,
}

impl Emitter {
    fn push(&mut self, li: usize, op: Op) {
        self.layers[li].ops.push(op);
    }
}

fn compile(lat: &SpacetimeLattice, init: Option<Init>, readout: Option<Basis>) -> Result<Circuit> {
    let layout = lat.layout();
    let qubits = layout.qubits.clone();
    let t_end = lat.t4_end();
    let periods = lat.spec.rounds as usize;

    let mut layers = Vec::new();
    let offset = usize::from(init.is_some());
    if init.is_some() {
        layers.push(Layer { index: 0, phase: Phase::Init, t4: -1, ops: vec![] });
    }
    for k in 0..periods {
        for (p, dt) in PHASE_T4.iter().enumerate() {
            layers.push(Layer {
                index: layers.len(),
                phase: Phase::Bulk(p as u8),
                t4: 4 * k as i32 + dt,
                ops: vec![],
            });
        }
    }
    if readout.is_some() {
        layers.push(Layer { index: layers.len(), phase: Phase::Readout, t4: t_end, ops: vec![] });
    }
    let mut em = Emitter { layers };
    // Layer index of measurement layer at even t4, and c/d layers at odd t4.
    let m_layer = |t4: i32| offset + 6 * (t4 / 4) as usize + if t4 % 4 == 0 { 0 } else { 3 };
    let c_layer = |t4: i32| offset + 6 * (t4 / 4) as usize + if t4 % 4 == 1 { 1 } else { 4 };
    let d_layer = |t4: i32| c_layer(t4) + 1;

    let greens: Vec<QubitId> = qubits.iter().copied().filter(|q| q.species() == Species::Green).collect();
    let purples: Vec<QubitId> = qubits.iter().copied().filter(|q| q.species() == Species::Purple).collect();
    let has = |q: QubitId| layout.index(q).is_some();
    let g_alive = |t4: i32, g: QubitId| lat.present(lat.green_edge(t4, g));
    let p_alive = |t4: i32, p: QubitId| lat.present(lat.purple_face(t4, p));

    let mut pending_prep: Vec<(i32, QubitId)> = Vec::new();
    let mut pending_mx: Vec<(i32, QubitId)> = Vec::new();

    for t4 in 0..t_end {
        if t4 % 2 == 0 {
            let li = m_layer(t4);
            // xy faces
            let mut done = std::collections::HashSet::new();
            for &g in &greens {
                let f = lat.green_face(t4, g);
                if !done.insert(f) || !lat.present(f) {
                    continue;
                }
                let lo = layout.canon(QubitId::new(g.z2, f.u2 - 1));
                let hi = layout.canon(QubitId::new(g.z2, f.u2 + 1));
                let legs: Vec<(QubitId, bool, bool)> = [lo, hi]
                    .into_iter()
                    .filter(|q| has(*q))
                    .map(|q| (q, g_alive(t4 - 1, q), g_alive(t4 + 1, q)))
                    .collect();
                let n_in = legs.iter().filter(|l| l.1).count();
                let n_out = legs.iter().filter(|l| l.2).count();
                match (n_in, n_out) {
                    (2, 2) => em.push(li, Op::MXX { label: 0, a: lo, b: hi }),
                    (1, 1) if legs.iter().any(|l| l.1 && l.2) => {}
                    (0, 0) => {}
                    _ => {
                        return Err(Error::UnsupportedLayout(format!(
                            "xy face {f} with legs {legs:?}"
                        )))
                    }
                }
            }
            // z edges and rough-cut purples
            let mut done = std::collections::HashSet::new();
            for &p in &purples {
                let e = lat.purple_zedge(t4, p);
                let pin = p_alive(t4 - 1, p);
                let pout = p_alive(t4 + 1, p);
                if !lat.present(e) {
                    match (pin, pout) {
                        (true, _) => em.push(li, Op::MZ { label: 0, q: p }),
                        (false, true) => em.push(li, Op::PrepZero { q: p }),
                        (false, false) => {}
                    }
                    continue;
                }
                if !done.insert(e) {
                    continue;
                }
                let lo = layout.canon(QubitId::new(p.z2, e.u2 - 1));
                let hi = layout.canon(QubitId::new(p.z2, e.u2 + 1));
                let legs: Vec<(QubitId, bool, bool)> = [lo, hi]
                    .into_iter()
                    .filter(|q| has(*q))
                    .map(|q| (q, p_alive(t4 - 1, q), p_alive(t4 + 1, q)))
                    .collect();
                let n_in = legs.iter().filter(|l| l.1).count();
                let n_out = legs.iter().filter(|l| l.2).count();
                match (legs.len(), n_in, n_out) {
                    (2, 2, 2) => em.push(li, Op::MZZ { label: 0, a: lo, b: hi }),
                    (2, 0, 2) => {
                        em.push(li, Op::MZZ { label: 0, a: lo, b: hi });
                        pending_prep.push((t4, lo));
                        pending_prep.push((t4, hi));
                    }
                    (2, 2, 0) => {
                        em.push(li, Op::MZZ { label: 0, a: lo, b: hi });
                        pending_mx.push((t4, lo));
                        pending_mx.push((t4, hi));
                    }
                    (_, 1, 1) if legs.iter().any(|l| l.1 && l.2) => {}
                    (_, 0, 0) => {}
                    _ => {
                        return Err(Error::UnsupportedLayout(format!(
                            "z edge {e} with legs {legs:?}"
                        )))
                    }
                }
            }
        } else {
            for (li, dz) in [(c_layer(t4), 1), (d_layer(t4), -1)] {
                for &g in &greens {
                    if !g_alive(t4, g) {
                        continue;
                    }
                    let p = layout.canon(QubitId::new(g.z2 + dz, g.x2));
                    if has(p) && p_alive(t4, p) {
                        em.push(li, Op::CX { control: g, target: p });
                    }
                }
            }
        }
    }
    for (t4, q) in pending_prep {
        let li = if t4 == 0 {
            if init.is_none() {
                return Err(Error::MergeWindow("bridge preparation before the first layer".into()));
            }
            0
        } else {
            d_layer(t4 - 1)
        };
        em.push(li, Op::PrepPlus { q });
    }
    for (t4, q) in pending_mx {
        if t4 + 1 >= t_end {
            if let Some(rl) = readout.map(|_| em.layers.len() - 1) {
                let _ = rl;
            }
            return Err(Error::MergeWindow("bridge readout after the last layer".into()));
        }
        em.push(c_layer(t4 + 1), Op::MX { label: 0, q });
    }
    if let Some(b) = init {
        for &q in &qubits {
            let alive = match q.species() {
                Species::Green => g_alive(-1, q),
                Species::Purple => p_alive(-1, q),
            };
            if alive {
                em.push(
                    0,
                    match b.basis() {
                        Basis::Z => Op::PrepZero { q },
                        Basis::X => Op::PrepPlus { q },
                    },
                );
            }
        }
    }
    if let Some(b) = readout {
        let li = em.layers.len() - 1;
        for &q in &qubits {
            let alive = match q.species() {
                Species::Green => g_alive(t_end - 1, q),
                Species::Purple => p_alive(t_end - 1, q),
            };
            if alive {
                em.push(
                    li,
                    match b {
                        Basis::Z => Op::MZ { label: 0, q },
                        Basis::X => Op::MX { label: 0, q },
                    },
                );
            }
        }
    }
    let mut layers = em.layers;
    let mut next = 0;
    for layer in &mut layers {
        layer.ops.sort_by_key(|o| o.sort_key());
        for op in &mut layer.ops {
            if op.label().is_some() {
                op.set_label(next);
                next += 1;
            }
        }
        let mut seen = std::collections::HashSet::new();
        for op in &layer.ops {
            for q in op.qubits() {
                if !seen.insert(q) {
                    return Err(Error::UnsupportedLayout(format!(
                        "qubit {q} used twice in layer {}",
                        layer.index
                    )));
                }
            }
        }
    }
    Ok(Circuit { spec: lat.spec, init, readout, qubits, layers, num_measurements: next })
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

fn fmt_basis(b: Option<Basis>) -> &'static str {
    match b {
        None => "none",
        Some(Basis::Z) => "z",
        Some(Basis::X) => "x",
    }
}

pub fn emit_text(c: &Circuit) -> String {
    let mut s = String::new();
    s.push_str("XYFLOQUET v1\n");
    let _ = writeln!(s, "QUBITS {}", c.qubits.len());
    let init = match c.init {
        None => "none",
        Some(Init::Z) => "z",
        Some(Init::X) => "x",
        Some(Init::Stabilizer) => "stabilizer",
    };
    let sp = &c.spec;
    let _ = writeln!(
        s,
        "GEOMETRY {} l1={} l2={} rounds={} l={} t0={} t1={} init={} readout={}",
        sp.kind,
        sp.l1,
        sp.l2,
        sp.rounds,
        sp.l,
        sp.t0,
        sp.t1,
        init,
        fmt_basis(c.readout)
    );
    for layer in &c.layers {
        let ph = match layer.phase {
            Phase::Init => "init".to_string(),
            Phase::Bulk(p) => p.to_string(),
            Phase::Readout => "readout".to_string(),
        };
        let _ = writeln!(s, "LAYER {} phase={}", layer.index, ph);
        for op in &layer.ops {
            let _ = match *op {
                Op::CX { control, target } => writeln!(s, "CX {control} {target}"),
                Op::MXX { label, a, b } => writeln!(s, "MXX {label} {a} {b}"),
                Op::MZZ { label, a, b } => writeln!(s, "MZZ {label} {a} {b}"),
                Op::MZ { label, q } => writeln!(s, "MZ {label} {q}"),
                Op::MX { label, q } => writeln!(s, "MX {label} {q}"),
                Op::PrepPlus { q } => writeln!(s, "PREP+ {q}"),
                Op::PrepZero { q } => writeln!(s, "PREP0 {q}"),
            };
        }
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_qubit(tok: &str, line: usize) -> Result<QubitId> {
    let body = tok
        .strip_prefix("g(")
        .or_else(|| tok.strip_prefix("p("))
        .or_else(|| tok.strip_prefix("q("))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| perr(line, format!("bad qubit '{tok}'")))?;
    let mut it = body.split(',');
    let z2 = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr(line, format!("bad qubit '{tok}'")))?;
    let x2 = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr(line, format!("bad qubit '{tok}'")))?;
    if it.next().is_some() {
        return Err(perr(line, format!("bad qubit '{tok}'")));
    }
    let q = QubitId::new(z2, x2);
    let expect = match q.species() {
        Species::Green => 'g',
        Species::Purple => 'p',
    };
    let got = tok.chars().next().unwrap_or('?');
    if got != 'q' && got != expect {
        return Err(perr(line, format!("species mismatch in '{tok}'")));
    }
    Ok(q)
}

fn kv<'a>(tok: &'a str, key: &str, line: usize) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| perr(line, format!("expected {key}=...")))
}

pub fn parse_text(text: &str) -> Result<Circuit> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, h) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    if h.trim() != "XYFLOQUET v1" {
        return Err(perr(ln, "missing header 'XYFLOQUET v1'"));
    }
    let (ln, q) = lines.next().ok_or_else(|| perr(2, "missing QUBITS"))?;
    let n: usize = q
        .strip_prefix("QUBITS ")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| perr(ln, "expected 'QUBITS n'"))?;
    let (ln, g) = lines.next().ok_or_else(|| perr(3, "missing GEOMETRY"))?;
    let toks: Vec<&str> = g.split_whitespace().collect();
    if toks.len() != 10 || toks[0] != "GEOMETRY" {
        return Err(perr(ln, "expected GEOMETRY line"));
    }
    let kind: GeometryKind = toks[1].parse().map_err(|_| perr(ln, "bad geometry kind"))?;
    let num = |i: usize, key: &str| -> Result<u32> {
        kv(toks[i], key, ln)?.parse().map_err(|_| perr(ln, format!("bad {key}")))
    };
    let spec = GeometrySpec {
        kind,
        l1: num(2, "l1")?,
        l2: num(3, "l2")?,
        rounds: num(4, "rounds")?,
        l: num(5, "l")?,
        t0: num(6, "t0")?,
        t1: num(7, "t1")?,
    };
    let init = match kv(toks[8], "init", ln)? {
        "none" => None,
        "z" => Some(Init::Z),
        "x" => Some(Init::X),
        "stabilizer" => Some(Init::Stabilizer),
        o => return Err(perr(ln, format!("bad init '{o}'"))),
    };
    let readout = match kv(toks[9], "readout", ln)? {
        "none" => None,
        "z" => Some(Basis::Z),
        "x" => Some(Basis::X),
        o => return Err(perr(ln, format!("bad readout '{o}'"))),
    };
    let lat = SpacetimeLattice::new(spec).map_err(|e| perr(ln, e.to_string()))?;
    let qubits = lat.layout().qubits;
    if qubits.len() != n {
        return Err(perr(2, format!("QUBITS {n} does not match geometry ({})", qubits.len())));
    }
    let mut layers: Vec<Layer> = Vec::new();
    let mut period: i32 = -1;
    let mut last_phase: i32 = 6;
    let mut labels = 0usize;
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let nq = |i: usize| -> Result<QubitId> {
            let t = toks.get(i).ok_or_else(|| perr(ln, "missing operand"))?;
            let q = parse_qubit(t, ln)?;
            if qubits.binary_search(&q).is_err() {
                return Err(perr(ln, format!("qubit {q} not in layout")));
            }
            Ok(q)
        };
        let lab = || -> Result<usize> {
            toks.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| perr(ln, "bad measurement id"))
        };
        let arity = |k: usize| -> Result<()> {
            if toks.len() != k {
                Err(perr(ln, format!("'{}' expects {} operands", toks[0], k - 1)))
            } else {
                Ok(())
            }
        };
        if toks[0] == "LAYER" {
            if toks.len() != 3 {
                return Err(perr(ln, "expected 'LAYER k phase=j'"));
            }
            let index: usize = toks[1].parse().map_err(|_| perr(ln, "bad layer index"))?;
            if index != layers.len() {
                return Err(perr(ln, format!("layer index {index} out of sequence")));
            }
            let (phase, t4) = match kv(toks[2], "phase", ln)? {
                "init" => (Phase::Init, -1),
                "readout" => (Phase::Readout, 4 * (period + 1)),
                p => {
                    let p: u8 = p.parse().ok().filter(|v| *v < 6).ok_or_else(|| perr(ln, "bad phase"))?;
                    if (p as i32) <= last_phase {
                        period += 1;
                    }
                    last_phase = p as i32;
                    (Phase::Bulk(p), 4 * period + PHASE_T4[p as usize])
                }
            };
            layers.push(Layer { index, phase, t4, ops: vec![] });
            continue;
        }
        let layer = layers.last_mut().ok_or_else(|| perr(ln, "op before first LAYER"))?;
        let op = match toks[0] {
            "CX" => {
                arity(3)?;
                Op::CX { control: nq(1)?, target: nq(2)? }
            }
            "MXX" => {
                arity(4)?;
                Op::MXX { label: lab()?, a: nq(2)?, b: nq(3)? }
            }
            "MZZ" => {
                arity(4)?;
                Op::MZZ { label: lab()?, a: nq(2)?, b: nq(3)? }
            }
            "MZ" => {
                arity(3)?;
                Op::MZ { label: lab()?, q: nq(2)? }
            }
            "MX" => {
                arity(3)?;
                Op::MX { label: lab()?, q: nq(2)? }
            }
            "PREP+" => {
                arity(2)?;
                Op::PrepPlus { q: nq(1)? }
            }
            "PREP0" => {
                arity(2)?;
                Op::PrepZero { q: nq(1)? }
            }
            other => return Err(perr(ln, format!("unknown op '{other}'"))),
        };
        if let Some(l) = op.label() {
            if l != labels {
                return Err(perr(ln, format!("measurement id {l} out of sequence (expected {labels})")));
            }
            labels += 1;
        }
        layer.ops.push(op);
    }
    Ok(Circuit { spec, init, readout, qubits, layers, num_measurements: labels })
}

/// Op multiset per layer keyed by kind, for coarse comparisons.
pub fn op_histogram(c: &Circuit) -> BTreeMap<(usize, &'static str), usize> {
    let mut h = BTreeMap::new();
    for layer in &c.layers {
        for op in &layer.ops {
            let k = match op {
                Op::CX { .. } => "CX",
                Op::MXX { .. } => "MXX",
                Op::MZZ { .. } => "MZZ",
                Op::MZ { .. } => "MZ",
                Op::MX { .. } => "MX",
                Op::PrepPlus { .. } => "PREP+",
                Op::PrepZero { .. } => "PREP0",
            };
            *h.entry((layer.index, k)).or_insert(0) += 1;
        }
    }
    h
}

#[allow(dead_code)]
fn coord_of(q: QubitId, t4: i32) -> Coord {
    Coord::new(t4, q.x2, q.z2)
}
