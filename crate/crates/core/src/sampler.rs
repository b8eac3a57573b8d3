//! Noisy shots, 64 at a time, by Pauli frame propagation.

use rand::Rng;

use crate::circuit::Circuit;
use crate::frame::{propagate, FrameProgram, Frames};
use crate::noise::{bernoulli_word, inject_lanes, LaneSampler, NoiseParams};
use crate::syndrome::DetectorGraph;

pub struct FrameSampler<'g> {
    prog: FrameProgram,
    lanes: LaneSampler,
    graph: &'g DetectorGraph,
}

/// One batch of 64 shots.
#[derive(Clone, Debug)]
pub struct Batch {
    /// Per real detector (in `graph.real` order), the lanes where it fired.
    pub detectors: Vec<u64>,
    /// Per observable, the lanes where it flipped.
    pub observables: Vec<u64>,
}

impl Batch {
    pub fn fired(&self, g: &DetectorGraph, lane: u32) -> Vec<usize> {
        self.detectors
            .iter()
            .zip(&g.real)
            .filter(|(w, _)| (**w >> lane) & 1 == 1)
            .map(|(_, &i)| i)
            .collect()
    }

    pub fn truth(&self, lane: u32) -> u64 {
        self.observables.iter().enumerate().fold(0, |m, (k, w)| m | (((w >> lane) & 1) << k))
    }
}

impl<'g> FrameSampler<'g> {
    pub fn new(c: &Circuit, np: &NoiseParams, graph: &'g DetectorGraph) -> Self {
        FrameSampler { prog: FrameProgram::new(c), lanes: LaneSampler::new(c, np), graph }
    }

    pub fn label_flips<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        let n = self.prog.num_measurements;
        let meas: Vec<u64> = self
            .lanes
            .flips
            .iter()
            .map(|ms| ms.iter().fold(0, |w, m| w ^ bernoulli_word(m.prob, rng)))
            .collect();
        let mut frames = Frames::new(self.prog.num_qubits);
        let mut flips = vec![0u64; n];
        propagate(&self.prog, &mut frames, |li, fr| inject_lanes(&self.lanes.per_layer[li], fr, rng), |l| meas[l], &mut flips);
        flips
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Batch {
        let flips = self.label_flips(rng);
        let g = self.graph;
        let par = |labels: &[usize]| labels.iter().fold(0u64, |w, &l| w ^ flips[l]);
        Batch {
            detectors: g.real.iter().map(|&i| par(&g.nodes[i].labels)).collect(),
            observables: g.observables.iter().map(|o| par(&o.labels)).collect(),
        }
    }
}
