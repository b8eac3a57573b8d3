#![allow(dead_code)]

use num_complex::Complex64;
use xyf_core::circuit::{build_circuit, Circuit};
use xyf_core::lattice::{GeometrySpec, SpacetimeLattice};
use xyf_core::path_integral::{AnyonConfig, PathIntegralInstance};
use xyf_core::statevector::{apply_forced, DenseState};

/// One period of the 2x2 torus, no state preparation or readout.
pub fn torus_period() -> (Circuit, PathIntegralInstance) {
    let lat = SpacetimeLattice::new(GeometrySpec::torus(2, 2, 1)).unwrap();
    let c = build_circuit(&lat, None, None).unwrap();
    let inst = PathIntegralInstance::window(&lat, 0, 3).unwrap();
    (c, inst)
}

/// `op[out][in]` of the forced circuit.
pub fn circuit_operator(c: &Circuit, record: &[bool]) -> Vec<Vec<Complex64>> {
    let n = c.num_qubits();
    let dim = 1usize << n;
    let mut op = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        let mut s = DenseState::zero(n);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[i] = Complex64::new(1.0, 0.0);
        apply_forced(c, 0..c.layers.len(), &mut s, record).unwrap();
        for (o, a) in s.amps.iter().enumerate() {
            op[o][i] = *a;
        }
    }
    op
}

/// `op[out][in]` of the path-integral window, qubit `j` as bit `j`.
pub fn oracle_operator(c: &Circuit, inst: &PathIntegralInstance, anyons: &AnyonConfig) -> Vec<Vec<f64>> {
    let n = c.num_qubits();
    let ins: Vec<usize> = c.qubits.iter().map(|&q| inst.qubit_leg(q, false).unwrap()).collect();
    let outs: Vec<usize> = c.qubits.iter().map(|&q| inst.qubit_leg(q, true).unwrap()).collect();
    assert_eq!(inst.num_legs(), 2 * n, "every leg is a qubit");
    let dim = 1usize << n;
    let mut op = vec![vec![0.0; dim]; dim];
    let mut legs = vec![false; inst.num_legs()];
    for i in 0..dim {
        for o in 0..dim {
            for j in 0..n {
                legs[ins[j]] = (i >> j) & 1 == 1;
                legs[outs[j]] = (o >> j) & 1 == 1;
            }
            op[o][i] = inst.evaluate(anyons, &legs).unwrap() as f64;
        }
    }
    op
}

/// Factor `f` with `circuit = f * oracle`, taken at the largest oracle entry.
pub fn global_factor(circ: &[Vec<Complex64>], orc: &[Vec<f64>]) -> Complex64 {
    let mut best = (0.0, Complex64::new(0.0, 0.0));
    for (cr, or) in circ.iter().zip(orc) {
        for (c, &o) in cr.iter().zip(or) {
            if o.abs() > best.0 {
                best = (o.abs(), c / o);
            }
        }
    }
    best.1
}

/// Largest entrywise deviation of `circuit - f * oracle`.
pub fn deviation(circ: &[Vec<Complex64>], orc: &[Vec<f64>], f: Complex64) -> f64 {
    circ.iter()
        .zip(orc)
        .flat_map(|(cr, or)| cr.iter().zip(or).map(move |(c, &o)| (c - f * o).norm()))
        .fold(0.0, f64::max)
}
