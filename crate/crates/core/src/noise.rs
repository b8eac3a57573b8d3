//! Circuit-level noise: parameters, fault instances, sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Init, Op, Phase};
use crate::error::{Error, Result};
use crate::frame::Frames;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli1 {
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub const ALL: [Pauli1; 3] = [Pauli1::X, Pauli1::Y, Pauli1::Z];

    pub fn has_x(self) -> bool {
        matches!(self, Pauli1::X | Pauli1::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli1::Z | Pauli1::Y)
    }

    fn from_bits(x: bool, z: bool) -> Option<Self> {
        match (x, z) {
            (true, false) => Some(Pauli1::X),
            (true, true) => Some(Pauli1::Y),
            (false, true) => Some(Pauli1::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p_gate: f64,
    pub p_idle: f64,
    pub p_meas: f64,
    pub p_prep: f64,
    /// Idle noise on surgery bridge qubits while they are unused.
    #[serde(default)]
    pub idle_unused_bridge: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { p_gate: 0.0, p_idle: 0.0, p_meas: 0.0, p_prep: 0.0, idle_unused_bridge: false }
    }
}

impl NoiseParams {
    pub fn gate_and_meas(p: f64) -> Self {
        NoiseParams { p_gate: p, p_meas: p, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_gate", self.p_gate), ("p_idle", self.p_idle), ("p_meas", self.p_meas), ("p_prep", self.p_prep)]
        {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// One fault. Pauli faults act right after layer `layer`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Fault {
    Pauli { layer: usize, qubit: usize, p: Pauli1 },
    MeasFlip { label: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInstance {
    pub faults: Vec<Fault>,
}

impl ErrorInstance {
    pub fn single(f: Fault) -> Self {
        ErrorInstance { faults: vec![f] }
    }

    pub fn validate(&self, c: &Circuit) -> Result<()> {
        for f in &self.faults {
            match *f {
                Fault::Pauli { layer, qubit, .. } => {
                    if layer >= c.layers.len() || qubit >= c.num_qubits() {
                        return Err(Error::FaultLocation(format!("{f:?}")));
                    }
                }
                Fault::MeasFlip { label } => {
                    if label >= c.num_measurements {
                        return Err(Error::FaultLocation(format!("{f:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Per-layer Pauli injections and per-label flips, for frame propagation.
    pub fn split(&self, c: &Circuit) -> (Vec<Vec<(usize, Pauli1)>>, Vec<bool>) {
        let mut per_layer = vec![Vec::new(); c.layers.len()];
        let mut flips = vec![false; c.num_measurements];
        for f in &self.faults {
            match *f {
                Fault::Pauli { layer, qubit, p } => per_layer[layer].push((qubit, p)),
                Fault::MeasFlip { label } => flips[label] ^= true,
            }
        }
        (per_layer, flips)
    }
}

/// Every X/Y/Z on each live qubit after each non-readout layer, then every
/// measurement flip.
pub fn enumerate_elementary_faults(c: &Circuit) -> Vec<Fault> {
    let live = c.live_after();
    let mut out = Vec::new();
    for (li, layer) in c.layers.iter().enumerate() {
        if layer.phase == Phase::Readout {
            continue;
        }
        for &q in &live[li] {
            for p in Pauli1::ALL {
                out.push(Fault::Pauli { layer: li, qubit: q, p });
            }
        }
    }
    out.extend((0..c.num_measurements).map(|label| Fault::MeasFlip { label }));
    out
}

/// A fault source: fires with probability `prob`, then picks one outcome
/// uniformly.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    pub layer: usize,
    pub prob: f64,
    pub kind: MechKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MechKind {
    /// Uniform over the 15 nonidentity two-qubit Paulis.
    Two(usize, usize),
    /// Uniform over X, Y, Z.
    One(usize),
    /// A fixed Pauli.
    Fixed(usize, Pauli1),
    Flip(usize),
}

/// All noise mechanisms of `c` under `np`, in layer order.
pub fn mechanisms(c: &Circuit, np: &NoiseParams) -> Vec<Mechanism> {
    let live = c.live_after();
    let noiseless_until = if c.init == Some(Init::Stabilizer) {
        // init layer plus the first period
        c.layers.iter().position(|l| l.t4 >= 4).unwrap_or(c.layers.len())
    } else {
        0
    };
    let lat = c.lattice();
    let bridge = lat.bridge();
    let mut out = Vec::new();
    for (li, layer) in c.layers.iter().enumerate() {
        let quiet = li < noiseless_until;
        let mut touched = vec![false; c.num_qubits()];
        for op in &layer.ops {
            for q in op.qubits() {
                touched[c.qubit_index(q)] = true;
            }
            if quiet {
                continue;
            }
            match *op {
                Op::CX { control: a, target: b } | Op::MXX { a, b, .. } | Op::MZZ { a, b, .. } if np.p_gate > 0.0 => {
                    out.push(Mechanism { layer: li, prob: np.p_gate, kind: MechKind::Two(c.qubit_index(a), c.qubit_index(b)) });
                }
                Op::PrepZero { q } if np.p_prep > 0.0 => {
                    out.push(Mechanism { layer: li, prob: np.p_prep, kind: MechKind::Fixed(c.qubit_index(q), Pauli1::X) });
                }
                Op::PrepPlus { q } if np.p_prep > 0.0 => {
                    out.push(Mechanism { layer: li, prob: np.p_prep, kind: MechKind::Fixed(c.qubit_index(q), Pauli1::Z) });
                }
                _ => {}
            }
            if let Some(l) = op.label() {
                if np.p_meas > 0.0 {
                    out.push(Mechanism { layer: li, prob: np.p_meas, kind: MechKind::Flip(l) });
                }
            }
        }
        if quiet || np.p_idle == 0.0 || layer.phase == Phase::Readout || layer.phase == Phase::Init {
            continue;
        }
        for &q in &live[li] {
            if !touched[q] {
                out.push(Mechanism { layer: li, prob: np.p_idle, kind: MechKind::One(q) });
            }
        }
        if np.idle_unused_bridge {
            if let Some((zb, _, _)) = bridge {
                for (qi, qid) in c.qubits.iter().enumerate() {
                    if qid.z2 == zb && !touched[qi] && live[li].binary_search(&qi).is_err() {
                        out.push(Mechanism { layer: li, prob: np.p_idle, kind: MechKind::One(qi) });
                    }
                }
            }
        }
    }
    out
}

fn two_qubit_pauli(k: u32) -> (Option<Pauli1>, Option<Pauli1>) {
    let k = k + 1; // 1..=15
    let pa = Pauli1::from_bits(k & 1 == 1, k & 2 == 2);
    let pb = Pauli1::from_bits(k & 4 == 4, k & 8 == 8);
    (pa, pb)
}

/// Draw an error instance.
pub fn sample_errors<R: Rng>(c: &Circuit, np: &NoiseParams, rng: &mut R) -> ErrorInstance {
    let mut faults = Vec::new();
    for m in mechanisms(c, np) {
        if !rng.gen_bool(m.prob) {
            continue;
        }
        match m.kind {
            MechKind::Two(a, b) => {
                let (pa, pb) = two_qubit_pauli(rng.gen_range(0..15));
                if let Some(p) = pa {
                    faults.push(Fault::Pauli { layer: m.layer, qubit: a, p });
                }
                if let Some(p) = pb {
                    faults.push(Fault::Pauli { layer: m.layer, qubit: b, p });
                }
            }
            MechKind::One(q) => {
                let p = Pauli1::ALL[rng.gen_range(0..3)];
                faults.push(Fault::Pauli { layer: m.layer, qubit: q, p });
            }
            MechKind::Fixed(q, p) => faults.push(Fault::Pauli { layer: m.layer, qubit: q, p }),
            MechKind::Flip(label) => faults.push(Fault::MeasFlip { label }),
        }
    }
    ErrorInstance { faults }
}

/// Mechanisms grouped for the 64-lane sampler.
#[derive(Clone, Debug)]
pub struct LaneSampler {
    pub per_layer: Vec<Vec<Mechanism>>,
    pub flips: Vec<Vec<Mechanism>>,
}

impl LaneSampler {
    pub fn new(c: &Circuit, np: &NoiseParams) -> Self {
        let mut per_layer = vec![Vec::new(); c.layers.len()];
        let mut flips = vec![Vec::new(); c.num_measurements];
        for m in mechanisms(c, np) {
            match m.kind {
                MechKind::Flip(l) => flips[l].push(m),
                _ => per_layer[m.layer].push(m),
            }
        }
        LaneSampler { per_layer, flips }
    }
}

/// Lanes (bits of a word) that fire independently with probability `p`.
pub fn bernoulli_word<R: Rng>(p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return u64::MAX;
    }
    if p > 0.25 {
        let mut w = 0u64;
        for i in 0..64 {
            if rng.gen_bool(p) {
                w |= 1 << i;
            }
        }
        return w;
    }
    // geometric skips
    let ln1p = (1.0 - p).ln();
    let mut w = 0u64;
    let mut i: f64 = -1.0;
    loop {
        let u: f64 = rng.gen::<f64>();
        let skip = ((1.0 - u).ln() / ln1p).floor();
        i += skip + 1.0;
        if i >= 64.0 {
            break;
        }
        w |= 1 << (i as u32);
    }
    w
}

/// Apply one layer's mechanisms to 64-lane frames.
pub fn inject_lanes<R: Rng>(mechs: &[Mechanism], frames: &mut Frames, rng: &mut R) {
    for m in mechs {
        let mut fire = bernoulli_word(m.prob, rng);
        while fire != 0 {
            let lane = fire.trailing_zeros();
            fire &= fire - 1;
            let bit = 1u64 << lane;
            match m.kind {
                MechKind::Two(a, b) => {
                    let (pa, pb) = two_qubit_pauli(rng.gen_range(0..15));
                    for (q, p) in [(a, pa), (b, pb)] {
                        if let Some(p) = p {
                            apply_lane(frames, q, p, bit);
                        }
                    }
                }
                MechKind::One(q) => apply_lane(frames, q, Pauli1::ALL[rng.gen_range(0..3)], bit),
                MechKind::Fixed(q, p) => apply_lane(frames, q, p, bit),
                MechKind::Flip(_) => {}
            }
        }
    }
}

#[inline]
pub fn apply_lane(frames: &mut Frames, q: usize, p: Pauli1, bit: u64) {
    if p.has_x() {
        frames.x[q] ^= bit;
    }
    if p.has_z() {
        frames.z[q] ^= bit;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_memory_circuit, Basis};
    use crate::lattice::{GeometrySpec, SpacetimeLattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus22() -> Circuit {
        let lat = SpacetimeLattice::new(GeometrySpec::torus(2, 2, 1)).unwrap();
        build_memory_circuit(&lat, Some(Init::Z), Some(Basis::Z)).unwrap()
    }

    #[test]
    fn elementary_count_formula() {
        let c = torus22();
        let n = c.num_qubits();
        let layers = c.layers.len() - 1; // readout carries no Pauli faults
        assert_eq!(enumerate_elementary_faults(&c).len(), 3 * n * layers + c.num_measurements);
    }

    #[test]
    fn zero_noise_is_empty() {
        let c = torus22();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_errors(&c, &NoiseParams::default(), &mut rng).faults.is_empty());
    }

    #[test]
    fn all_two_qubit_paulis_distinct() {
        let mut seen = std::collections::HashSet::new();
        for k in 0..15 {
            let p = two_qubit_pauli(k);
            assert!(p.0.is_some() || p.1.is_some());
            assert!(seen.insert(p));
        }
    }

    #[test]
    fn bernoulli_word_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = 0.01;
        let n = 20000;
        let ones: u32 = (0..n).map(|_| bernoulli_word(p, &mut rng).count_ones()).sum();
        let mean = ones as f64 / (64.0 * n as f64);
        let sd = (p * (1.0 - p) / (64.0 * n as f64)).sqrt();
        assert!((mean - p).abs() < 4.0 * sd, "{mean}");
    }
}
