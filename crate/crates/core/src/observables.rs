//! Logical observables as measurement-label sets.

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, Circuit, Init, Op, Phase};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, EchelonBasis};
use crate::lattice::{GeometryKind, QubitId, Species};
use crate::stabilizer::{symbolic_run_with, AffineSign, Pauli, Sign, SymbolicRun, Tableau};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub labels: Vec<usize>,
    /// Noiseless value (outcome bit) of the label parity.
    pub offset: bool,
}

/// Symbolic run that also keeps the tableau just before the readout layer.
pub fn run_keeping_pre_readout(c: &Circuit) -> (SymbolicRun, Tableau<AffineSign>) {
    let stop = c.layers.iter().position(|l| l.phase == Phase::Readout).unwrap_or(c.layers.len());
    let mut pre = None;
    if stop == 0 {
        pre = Some(Tableau::new(c.num_qubits()));
    }
    let run = symbolic_run_with(c, Tableau::new(c.num_qubits()), |li, t| {
        if li + 1 == stop {
            pre = Some(t.clone());
        }
    });
    (run, pre.unwrap_or_else(|| run_final_clone(c)))
}

fn run_final_clone(c: &Circuit) -> Tableau<AffineSign> {
    symbolic_run_with(c, Tableau::new(c.num_qubits()), |_, _| {}).final_tableau
}

/// XOR of symbolic outcomes over `labels`.
pub fn parity(run: &SymbolicRun, labels: &[usize]) -> AffineSign {
    let mut s = AffineSign::default();
    for &l in labels {
        s.xor_assign(&run.outcomes[l]);
    }
    s
}

/// Cancel coins by folding in the labels that introduced them.
pub fn make_deterministic(run: &SymbolicRun, labels: &[usize]) -> Result<(Vec<usize>, bool)> {
    let mut set: std::collections::BTreeSet<usize> = labels.iter().copied().collect();
    let mut by_coin = vec![None; run.num_coins];
    for (l, c) in run.coin_of_label.iter().enumerate() {
        if let Some(c) = c {
            by_coin[*c] = Some(l);
        }
    }
    let p = parity(run, labels);
    for coin in p.coin_indices() {
        let l = by_coin[coin].ok_or_else(|| Error::NotClosed(format!("coin {coin} comes from a preparation")))?;
        if !set.remove(&l) {
            set.insert(l);
        }
    }
    let labels: Vec<usize> = set.into_iter().collect();
    let p = parity(run, &labels);
    if !p.is_deterministic() {
        return Err(Error::NotClosed("observable parity still random".into()));
    }
    Ok((labels, p.constant))
}

fn to_row(p: &Pauli) -> BitVec {
    let n = p.x.len();
    BitVec::from_indices(2 * n, p.x.ones().chain(p.z.ones().map(|i| i + n)))
}

fn from_row(r: &BitVec, n: usize) -> Pauli {
    Pauli {
        x: BitVec::from_indices(n, r.ones().filter(|&i| i < n)),
        z: BitVec::from_indices(n, r.ones().filter(|&i| i >= n).map(|i| i - n)),
    }
}

/// Intersection of two row spaces (Zassenhaus).
pub fn intersect(a: &[BitVec], b: &[BitVec]) -> Vec<BitVec> {
    let m = a.first().or(b.first()).map_or(0, |v| v.len());
    let mut basis = EchelonBasis::new(a.len() + b.len());
    for v in a {
        basis.insert(&BitVec::from_indices(2 * m, v.ones().chain(v.ones().map(|i| i + m))));
    }
    for v in b {
        basis.insert(&BitVec::from_indices(2 * m, v.ones()));
    }
    basis
        .rows()
        .iter()
        .filter(|r| r.first_one().is_some_and(|p| p >= m))
        .map(|r| BitVec::from_indices(m, r.ones().map(|i| i - m)))
        .collect()
}

fn other_init(c: &Circuit) -> Init {
    match c.init {
        Some(Init::X) => Init::Z,
        _ => Init::X,
    }
}

/// Readout label of each qubit index, if measured in the readout layer.
fn readout_labels(c: &Circuit) -> Vec<Option<usize>> {
    let mut out = vec![None; c.num_qubits()];
    if let Some(layer) = c.layers.iter().find(|l| l.phase == Phase::Readout) {
        for op in &layer.ops {
            if let Op::MZ { label, q } | Op::MX { label, q } = *op {
                out[c.qubit_index(q)] = Some(label);
            }
        }
    }
    out
}

/// Logical operators of the readout basis that the init fixes, found as
/// stabilizer-group elements outside the instantaneous stabilizer group.
pub fn generic_logicals(c: &Circuit) -> Result<Vec<Pauli>> {
    let Some(basis) = c.readout else {
        return Ok(vec![]);
    };
    let n = c.num_qubits();
    let (_, g1) = run_keeping_pre_readout(c);
    let mut alt = c.clone();
    alt.init = Some(other_init(c));
    if let Some(l0) = alt.layers.first_mut().filter(|l| l.phase == Phase::Init) {
        for op in &mut l0.ops {
            *op = match (*op, alt.init) {
                (Op::PrepZero { q } | Op::PrepPlus { q }, Some(Init::X)) => Op::PrepPlus { q },
                (Op::PrepZero { q } | Op::PrepPlus { q }, _) => Op::PrepZero { q },
                (o, _) => o,
            };
        }
    } else {
        return Err(Error::UnsupportedLayout("logical search needs an init layer".into()));
    }
    let (_, g2) = run_keeping_pre_readout(&alt);
    let rows1: Vec<BitVec> = g1.stabilizers().iter().map(|(p, _)| to_row(p)).collect();
    let rows2: Vec<BitVec> = g2.stabilizers().iter().map(|(p, _)| to_row(p)).collect();
    let isg = intersect(&rows1, &rows2);
    // rows of g1 with no component outside the readout basis
    let mut ech = EchelonBasis::new(rows1.len());
    let permute = |r: &BitVec| -> BitVec {
        // put the forbidden half first so pivots land there
        match basis {
            Basis::Z => r.clone(),
            Basis::X => BitVec::from_indices(2 * n, r.ones().map(|i| if i < n { i + n } else { i - n })),
        }
    };
    for r in &rows1 {
        ech.insert(&permute(r));
    }
    let candidates: Vec<BitVec> =
        ech.rows().iter().filter(|r| r.first_one().is_some_and(|p| p >= n)).map(&permute).collect();
    let mut quotient = EchelonBasis::new(isg.len() + candidates.len());
    for r in &isg {
        quotient.insert(r);
    }
    let mut out = Vec::new();
    for cand in candidates {
        if quotient.insert(&cand) {
            out.push(from_row(&cand, n));
        }
    }
    Ok(out)
}

fn observable_from_qubits(c: &Circuit, run: &SymbolicRun, name: &str, qs: &[usize]) -> Result<Observable> {
    let ro = readout_labels(c);
    let labels: Vec<usize> = qs
        .iter()
        .map(|&q| ro[q].ok_or_else(|| Error::NotClosed(format!("qubit {} not read out", c.qubits[q]))))
        .collect::<Result<_>>()?;
    let (labels, offset) = make_deterministic(run, &labels)?;
    Ok(Observable { name: name.to_string(), labels, offset })
}

pub fn column(c: &Circuit, z2: i32) -> Vec<usize> {
    (0..c.num_qubits()).filter(|&i| c.qubits[i].z2 == z2).collect()
}

pub fn green_row(c: &Circuit, x2: i32, zlo: i32, zhi: i32) -> Vec<usize> {
    (0..c.num_qubits())
        .filter(|&i| {
            let q: QubitId = c.qubits[i];
            q.species() == Species::Green && q.x2 == x2 && q.z2 >= zlo && q.z2 <= zhi
        })
        .collect()
}

/// Observables tracked for a circuit with a readout layer.
pub fn default_observables(c: &Circuit) -> Result<Vec<Observable>> {
    let Some(basis) = c.readout else {
        return Ok(vec![]);
    };
    let run = symbolic_run_with(c, Tableau::new(c.num_qubits()), |_, _| {});
    let tag = match basis {
        Basis::Z => "Z",
        Basis::X => "X",
    };
    match c.spec.kind {
        GeometryKind::Surgery => {
            let l = c.spec.l as i32;
            let zb = 2 * l + 2;
            let mut out = Vec::new();
            match basis {
                Basis::Z => {
                    out.push(observable_from_qubits(c, &run, "ZA", &column(c, 0))?);
                    out.push(observable_from_qubits(c, &run, "ZB", &column(c, zb))?);
                }
                Basis::X => {
                    let mut qs = green_row(c, 1, 0, 2 * l);
                    qs.extend(green_row(c, 1, zb, 4 * l + 2));
                    out.push(observable_from_qubits(c, &run, "XAXB", &qs)?);
                }
            }
            Ok(out)
        }
        _ => {
            let logicals = generic_logicals(c)?;
            logicals
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let sup: Vec<usize> = match basis {
                        Basis::Z => p.z.ones().collect(),
                        Basis::X => p.x.ones().collect(),
                    };
                    observable_from_qubits(c, &run, &format!("{tag}{k}"), &sup)
                })
                .collect()
        }
    }
}

/// Labels whose parity is the logical `Z_A Z_B` outcome of the surgery, and
/// its constant offset. Read from the merged sign in an X-basis-init run.
pub fn surgery_outcome_labels(c: &Circuit) -> Result<Observable> {
    if c.spec.kind != GeometryKind::Surgery {
        return Err(Error::UnsupportedLayout("surgery outcome needs the surgery geometry".into()));
    }
    let lat = c.lattice();
    let mut alt = c.clone();
    alt.readout = None;
    alt.layers.retain(|l| l.phase != Phase::Readout);
    // readout labels come last
    alt.num_measurements = alt.layers.iter().flat_map(|l| &l.ops).filter(|op| op.label().is_some()).count();
    let init_ops: Vec<Op> = c
        .qubits
        .iter()
        .filter(|q| {
            if q.species() == Species::Green {
                lat.present(lat.green_edge(-1, **q))
            } else {
                lat.present(lat.purple_face(-1, **q))
            }
        })
        .map(|&q| Op::PrepPlus { q })
        .collect();
    match alt.layers.first_mut() {
        Some(l0) if l0.phase == Phase::Init => l0.ops = init_ops,
        _ => {
            alt.layers.insert(
                0,
                crate::circuit::Layer { index: 0, phase: Phase::Init, t4: -1, ops: init_ops },
            );
            for (i, l) in alt.layers.iter_mut().enumerate() {
                l.index = i;
            }
        }
    }
    alt.init = Some(Init::X);
    let run = symbolic_run_with(&alt, Tableau::new(alt.num_qubits()), |_, _| {});
    let l = c.spec.l as i32;
    let mut zz: Vec<usize> = column(c, 0);
    zz.extend(column(c, 2 * l + 2));
    let p = Pauli::z_on(c.num_qubits(), &zz);
    let sign = run
        .final_tableau
        .peek(&p)
        .ok_or_else(|| Error::NotClosed("Z_A Z_B not fixed after the split".into()))?;
    let mut labels = Vec::new();
    for coin in sign.coin_indices() {
        let l = run
            .coin_of_label
            .iter()
            .position(|c| *c == Some(coin))
            .ok_or_else(|| Error::NotClosed(format!("surgery outcome depends on preparation coin {coin}")))?;
        labels.push(l);
    }
    labels.sort();
    Ok(Observable { name: "M".into(), labels, offset: sign.constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_circuit;
    use crate::lattice::{GeometrySpec, SpacetimeLattice};

    fn circ(spec: GeometrySpec, init: Init, ro: Basis) -> Circuit {
        build_circuit(&SpacetimeLattice::new(spec).unwrap(), Some(init), Some(ro)).unwrap()
    }

    #[test]
    fn torus_has_two_logicals_per_basis() {
        for b in [Basis::Z, Basis::X] {
            let init = if b == Basis::Z { Init::Z } else { Init::X };
            let c = circ(GeometrySpec::torus(2, 4, 2), init, b);
            let obs = default_observables(&c).unwrap();
            assert_eq!(obs.len(), 2, "{b:?}");
        }
    }

    #[test]
    fn rectangle_has_one_logical_per_basis() {
        for (init, b) in [(Init::Z, Basis::Z), (Init::X, Basis::X)] {
            let c = circ(GeometrySpec::rectangle(3, 3, 2), init, b);
            assert_eq!(default_observables(&c).unwrap().len(), 1);
        }
    }
}
