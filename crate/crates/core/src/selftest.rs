//! Quick oracle-equivalence checks, run by `xyf selftest`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{build_circuit, Basis, Circuit, Init, Layer, Op, Phase};
use crate::decoder::{build_matching_graph, decode, logical_failure};
use crate::error::Result;
use crate::lattice::{GeometrySpec, QubitId, SpacetimeLattice};
use crate::noise::enumerate_elementary_faults;
use crate::path_integral::{AnyonConfig, PathIntegralInstance};
use crate::segments::SegmentMap;
use crate::stabilizer::symbolic_run;
use crate::statevector::{apply_forced, run_statevector, DenseState, Policy};
use crate::syndrome::{build_detector_graph, check_fault_duality, fault_label_flips};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Random circuit on `n` qubits: preparations in layer 0, then `depth`
/// layers of CX and one- and two-qubit Pauli measurements.
pub fn random_circuit<R: Rng>(n: usize, depth: usize, rng: &mut R) -> Circuit {
    let qubits: Vec<QubitId> = (0..n as i32).map(|i| QubitId::new(0, 2 * i)).collect();
    let mut layers = vec![Layer {
        index: 0,
        phase: Phase::Init,
        t4: 0,
        ops: qubits
            .iter()
            .map(|&q| if rng.gen() { Op::PrepPlus { q } } else { Op::PrepZero { q } })
            .collect(),
    }];
    let mut label = 0;
    for d in 1..=depth {
        let mut ops = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let a = qubits[rng.gen_range(0..n)];
            let mut b = qubits[rng.gen_range(0..n)];
            while n > 1 && b == a {
                b = qubits[rng.gen_range(0..n)];
            }
            let kind = if n == 1 { 2 + rng.gen_range(0..2) } else { rng.gen_range(0..6) };
            let op = match kind {
                0 | 1 => Op::CX { control: a, target: b },
                2 => Op::MZ { label, q: a },
                3 => Op::MX { label, q: a },
                4 => Op::MZZ { label, a, b },
                _ => Op::MXX { label, a, b },
            };
            if op.label().is_some() {
                label += 1;
            }
            ops.push(op);
        }
        layers.push(Layer { index: d, phase: Phase::Bulk(0), t4: d as i32, ops });
    }
    Circuit {
        spec: GeometrySpec::torus(2, 2, 1),
        init: None,
        readout: None,
        qubits,
        layers,
        num_measurements: label,
    }
}

/// Sample the statevector and check every outcome against the symbolic
/// tableau: same determinism, and deterministic values equal to the
/// affine sign evaluated on the earlier random outcomes.
pub fn compare_stabilizer_statevector<R: Rng>(c: &Circuit, rng: &mut R) -> Result<Option<String>> {
    let sym = symbolic_run(c);
    let mut st = DenseState::zero(c.num_qubits());
    let sv = run_statevector(c, 0..c.layers.len(), &mut st, Policy::Sample(rng), 16)?;
    let mut coins = vec![false; sym.num_coins];
    for l in 0..c.num_measurements {
        let minus = sv.record[l].expect("measured");
        let det_sv = sv.deterministic[l].expect("measured");
        if det_sv != sym.coin_of_label[l].is_none() {
            return Ok(Some(format!("label {l}: statevector deterministic={det_sv}, tableau disagrees")));
        }
        match sym.coin_of_label[l] {
            Some(k) => coins[k] = minus,
            None => {
                if sym.outcomes[l].eval(&coins) != minus {
                    return Ok(Some(format!("label {l}: deterministic value differs")));
                }
            }
        }
    }
    let randoms = sym.coin_of_label.iter().filter(|k| k.is_some()).count();
    if (sv.probability - 0.5f64.powi(randoms as i32)).abs() > 1e-9 {
        return Ok(Some(format!("branch probability {} with {randoms} random outcomes", sv.probability)));
    }
    Ok(None)
}

/// `op[out][in]` of `c` with forced outcomes.
pub fn forced_operator(c: &Circuit, record: &[bool]) -> Result<Vec<Vec<Complex64>>> {
    let n = c.num_qubits();
    let dim = 1usize << n;
    let mut op = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        let mut s = DenseState::zero(n);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[i] = Complex64::new(1.0, 0.0);
        apply_forced(c, 0..c.layers.len(), &mut s, record)?;
        for (o, a) in s.amps.iter().enumerate() {
            op[o][i] = *a;
        }
    }
    Ok(op)
}

/// `op[out][in]` of a window whose legs are exactly the qubit cuts.
pub fn window_operator(c: &Circuit, inst: &PathIntegralInstance, anyons: &AnyonConfig) -> Result<Vec<Vec<f64>>> {
    let n = c.num_qubits();
    let ins = c.qubits.iter().map(|&q| inst.qubit_leg(q, false)).collect::<Result<Vec<_>>>()?;
    let outs = c.qubits.iter().map(|&q| inst.qubit_leg(q, true)).collect::<Result<Vec<_>>>()?;
    let dim = 1usize << n;
    let mut op = vec![vec![0.0; dim]; dim];
    let mut legs = vec![false; inst.num_legs()];
    for i in 0..dim {
        for o in 0..dim {
            for j in 0..n {
                legs[ins[j]] = (i >> j) & 1 == 1;
                legs[outs[j]] = (o >> j) & 1 == 1;
            }
            op[o][i] = inst.evaluate(anyons, &legs)? as f64;
        }
    }
    Ok(op)
}

/// Max deviation of `circ - f * orc`, with `f` fixed at the largest entry
/// of `reference`.
fn deviation(circ: &[Vec<Complex64>], orc: &[Vec<f64>], f: Complex64) -> f64 {
    circ.iter()
        .zip(orc)
        .flat_map(|(cr, or)| cr.iter().zip(or).map(move |(c, &o)| (c - f * o).norm()))
        .fold(0.0, f64::max)
}

fn factor(circ: &[Vec<Complex64>], orc: &[Vec<f64>]) -> Complex64 {
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

fn check_stabilizer(seed: u64, trials: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let n = rng.gen_range(1..=8);
        let c = random_circuit(n, rng.gen_range(1..=12), &mut rng);
        if let Some(msg) = compare_stabilizer_statevector(&c, &mut rng)? {
            return Ok(Check { name: "stabilizer-vs-statevector", passed: false, detail: format!("circuit {t}: {msg}") });
        }
    }
    Ok(Check { name: "stabilizer-vs-statevector", passed: true, detail: format!("{trials} random circuits") })
}

fn check_path_integral() -> Result<Check> {
    let lat = SpacetimeLattice::new(GeometrySpec::torus(2, 2, 1))?;
    let c = build_circuit(&lat, None, None)?;
    let inst = PathIntegralInstance::window(&lat, 0, 3)?;
    let plus = forced_operator(&c, &vec![false; c.num_measurements])?;
    let f = factor(&plus, &window_operator(&c, &inst, &AnyonConfig::default())?);
    let map = SegmentMap::new(&c);
    let mut worst = deviation(&plus, &window_operator(&c, &inst, &AnyonConfig::default())?, f);
    for l in 0..c.num_measurements {
        let mut rec = vec![false; c.num_measurements];
        rec[l] = true;
        let anyons = AnyonConfig::from_segments(&map.for_outcome(l)?);
        worst = worst.max(deviation(&forced_operator(&c, &rec)?, &window_operator(&c, &inst, &anyons)?, f));
    }
    Ok(Check {
        name: "path-integral-vs-circuit",
        passed: f.norm() > 0.0 && worst < 1e-9,
        detail: format!("2x2 torus period, {} outcome patterns, max deviation {worst:.1e}", c.num_measurements + 1),
    })
}

fn check_evaluators(seed: u64, trials: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = PathIntegralInstance::periodic([2, 2, 1])?;
    let edges: Vec<_> = inst.edges.clone();
    let faces: Vec<_> = inst.faces.clone();
    let mut nonzero = 0;
    for _ in 0..trials {
        let mut a = AnyonConfig::default();
        for _ in 0..rng.gen_range(0..4) {
            a.toggle_e(edges[rng.gen_range(0..edges.len())]);
        }
        for _ in 0..rng.gen_range(0..4) {
            a.toggle_m(faces[rng.gen_range(0..faces.len())]);
        }
        let v = inst.evaluate(&a, &[])?;
        if v != inst.evaluate_enumerated(&a, &[])? || v != inst.evaluate_naive(&a, &[])? {
            return Ok(Check { name: "evaluators-agree", passed: false, detail: format!("{a:?}") });
        }
        nonzero += (v != 0) as usize;
    }
    Ok(Check {
        name: "evaluators-agree",
        passed: nonzero > 0,
        detail: format!("{trials} anyon configurations, {nonzero} nonzero"),
    })
}

fn check_duality() -> Result<Check> {
    let mut total = (0, 0);
    for spec in [GeometrySpec::torus(4, 2, 2), GeometrySpec::rectangle(3, 3, 2)] {
        let c = build_circuit(&SpacetimeLattice::new(spec)?, Some(Init::Z), Some(Basis::Z))?;
        let (ok, n, first) = check_fault_duality(&c, &build_detector_graph(&c)?)?;
        if let Some(msg) = first {
            return Ok(Check { name: "fault-duality", passed: false, detail: msg });
        }
        total = (total.0 + ok, total.1 + n);
    }
    Ok(Check { name: "fault-duality", passed: true, detail: format!("{}/{} elementary faults", total.0, total.1) })
}

fn check_single_faults() -> Result<Check> {
    let mut bad = 0;
    let mut total = 0;
    for (init, ro) in [(Init::Z, Basis::Z), (Init::X, Basis::X)] {
        let c = build_circuit(&SpacetimeLattice::new(GeometrySpec::rectangle(3, 3, 3))?, Some(init), Some(ro))?;
        let g = build_detector_graph(&c)?;
        let mg = build_matching_graph(&g)?;
        let faults = enumerate_elementary_faults(&c);
        for fl in fault_label_flips(&c, &faults) {
            let mut flipped = vec![false; c.num_measurements];
            for l in fl {
                flipped[l] = true;
            }
            let truth = g.observables.iter().enumerate().fold(0u64, |m, (k, o)| {
                m | ((o.labels.iter().filter(|&&l| flipped[l]).count() as u64 & 1) << k)
            });
            if logical_failure(&decode(&mg, &g.fired(&flipped))?, truth) != 0 {
                bad += 1;
            }
            total += 1;
        }
    }
    Ok(Check {
        name: "single-fault-decoding",
        passed: bad == 0,
        detail: format!("{bad}/{total} single faults miscorrected on the 3x3 rectangle"),
    })
}

/// Run every check. An internal error counts as a failed check.
pub fn run_all(seed: u64) -> Vec<Check> {
    let runs: Vec<(&'static str, Result<Check>)> = vec![
        ("stabilizer-vs-statevector", check_stabilizer(seed, 200)),
        ("path-integral-vs-circuit", check_path_integral()),
        ("evaluators-agree", check_evaluators(seed, 100)),
        ("fault-duality", check_duality()),
        ("single-fault-decoding", check_single_faults()),
    ];
    runs.into_iter()
        .map(|(name, r)| r.unwrap_or_else(|e| Check { name, passed: false, detail: format!("error: {e}") }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_circuits_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let c = random_circuit(rng.gen_range(1..=6), 10, &mut rng);
            let mut seen = vec![0; c.num_measurements];
            for op in c.layers.iter().flat_map(|l| &l.ops) {
                if let Some(l) = op.label() {
                    seen[l] += 1;
                }
            }
            assert!(seen.iter().all(|&k| k == 1));
        }
    }

    #[test]
    fn all_checks_pass() {
        for c in run_all(1) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
