//! Bit-packed Pauli frame propagation, 64 lanes per word.

use crate::circuit::{Circuit, Op, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameOp {
    Cx(usize, usize),
    /// Measure `Z` on qubit; flag marks destructive measurements.
    Mz(usize, usize, bool),
    Mx(usize, usize),
    Mzz(usize, usize, usize),
    Mxx(usize, usize, usize),
    Reset(usize),
}

/// Circuit lowered to qubit indices, one op list per layer.
#[derive(Clone, Debug)]
pub struct FrameProgram {
    pub num_qubits: usize,
    pub num_measurements: usize,
    pub layers: Vec<Vec<FrameOp>>,
}

impl FrameProgram {
    pub fn new(c: &Circuit) -> Self {
        let live = c.live_after();
        let ix = |q| c.qubit_index(q);
        let layers = c
            .layers
            .iter()
            .enumerate()
            .map(|(li, layer)| {
                layer
                    .ops
                    .iter()
                    .map(|op| match *op {
                        Op::CX { control, target } => FrameOp::Cx(ix(control), ix(target)),
                        Op::MZ { label, q } => {
                            let i = ix(q);
                            let dead = layer.phase == Phase::Readout || live[li].binary_search(&i).is_err();
                            FrameOp::Mz(label, i, dead)
                        }
                        Op::MX { label, q } => FrameOp::Mx(label, ix(q)),
                        Op::MZZ { label, a, b } => FrameOp::Mzz(label, ix(a), ix(b)),
                        Op::MXX { label, a, b } => FrameOp::Mxx(label, ix(a), ix(b)),
                        Op::PrepPlus { q } | Op::PrepZero { q } => FrameOp::Reset(ix(q)),
                    })
                    .collect()
            })
            .collect();
        FrameProgram { num_qubits: c.num_qubits(), num_measurements: c.num_measurements, layers }
    }
}

#[derive(Clone, Debug)]
pub struct Frames {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl Frames {
    pub fn new(n: usize) -> Self {
        Frames { x: vec![0; n], z: vec![0; n] }
    }

    pub fn clear(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
    }
}

/// Propagate frames through `prog`. `inject(layer, frames)` runs after each
/// layer and `meas_flip(label)` gives extra outcome flips. Returns per-label
/// flip words.
pub fn propagate(
    prog: &FrameProgram,
    frames: &mut Frames,
    mut inject: impl FnMut(usize, &mut Frames),
    mut meas_flip: impl FnMut(usize) -> u64,
    flips: &mut [u64],
) {
    for (li, ops) in prog.layers.iter().enumerate() {
        for op in ops {
            match *op {
                FrameOp::Cx(c, t) => {
                    frames.x[t] ^= frames.x[c];
                    frames.z[c] ^= frames.z[t];
                }
                FrameOp::Mz(l, q, dead) => {
                    flips[l] = frames.x[q] ^ meas_flip(l);
                    if dead {
                        frames.x[q] = 0;
                        frames.z[q] = 0;
                    }
                }
                FrameOp::Mx(l, q) => {
                    flips[l] = frames.z[q] ^ meas_flip(l);
                    frames.x[q] = 0;
                    frames.z[q] = 0;
                }
                FrameOp::Mzz(l, a, b) => flips[l] = frames.x[a] ^ frames.x[b] ^ meas_flip(l),
                FrameOp::Mxx(l, a, b) => flips[l] = frames.z[a] ^ frames.z[b] ^ meas_flip(l),
                FrameOp::Reset(q) => {
                    frames.x[q] = 0;
                    frames.z[q] = 0;
                }
            }
        }
        inject(li, frames);
    }
}
