//! Dense state-vector simulation for small circuits. Used as ground truth
//! for the tableau engine and to read off logical channels.

use num_complex::Complex64;
use rand::Rng;
use std::ops::Range;

use crate::circuit::{Circuit, Op};
use crate::error::{Error, Result};
use crate::observables::green_row;

pub const DEFAULT_CAP: usize = 20;
const TOL: f64 = 1e-12;

/// Pauli as bit masks, `P = i^{|x&z|} X^x Z^z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PauliMask {
    pub x: u64,
    pub z: u64,
}

impl PauliMask {
    pub fn z_on(qs: &[usize]) -> Self {
        PauliMask { x: 0, z: qs.iter().fold(0, |m, &q| m | 1 << q) }
    }

    pub fn x_on(qs: &[usize]) -> Self {
        PauliMask { x: qs.iter().fold(0, |m, &q| m | 1 << q), z: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        DenseState { n, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= s);
        }
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1usize << c, 1usize << t);
        let (lo, hi) = (c.min(t), c.max(t));
        for k in 0..self.amps.len() >> 2 {
            let i = insert_zero(insert_zero(k, lo), hi) | cb;
            self.amps.swap(i, i | tb);
        }
    }

    /// Several CX gates in sequence. Disjoint gates form an involution on
    /// basis indices and are applied in one pass.
    pub fn cx_many(&mut self, gates: &[(usize, usize)]) {
        let mut used = 0usize;
        let disjoint = gates.iter().all(|&(c, t)| {
            let m = (1 << c) | (1 << t);
            let ok = used & m == 0;
            used |= m;
            ok
        });
        if !disjoint {
            for &(c, t) in gates {
                self.cx(c, t);
            }
            return;
        }
        for i in 0..self.amps.len() {
            let j = gates.iter().fold(i, |j, &(c, t)| j ^ (((i >> c) & 1) << t));
            if i < j {
                self.amps.swap(i, j);
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        let b = 1usize << q;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & b == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | b]);
                self.amps[i] = (a0 + a1) * r;
                self.amps[i | b] = (a0 - a1) * r;
            }
        }
    }

    /// Amplitude factor taking `|i>` to `P|i>`.
    #[inline]
    fn phase(c0: Complex64, z: u64, i: usize) -> Complex64 {
        if ((i as u64) & z).count_ones() % 2 == 1 {
            -c0
        } else {
            c0
        }
    }

    fn c0(p: PauliMask) -> Complex64 {
        Complex64::new(0.0, 1.0).powu((p.x & p.z).count_ones() % 4)
    }

    pub fn apply_pauli(&mut self, p: PauliMask) {
        let c0 = Self::c0(p);
        let x = p.x as usize;
        if x == 0 {
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= Self::phase(c0, p.z, i);
            }
            return;
        }
        let hb = 1usize << (63 - (x as u64).leading_zeros());
        for i in 0..self.amps.len() {
            if i & hb == 0 {
                let j = i ^ x;
                let (ai, aj) = (self.amps[i], self.amps[j]);
                self.amps[j] = Self::phase(c0, p.z, i) * ai;
                self.amps[i] = Self::phase(c0, p.z, j) * aj;
            }
        }
    }

    /// `<psi|P|psi>` (not divided by the norm).
    pub fn expectation(&self, p: PauliMask) -> f64 {
        let c0 = Self::c0(p);
        let x = p.x as usize;
        if x == 0 {
            return self
                .amps
                .iter()
                .enumerate()
                .map(|(i, a)| if ((i as u64) & p.z).count_ones() % 2 == 1 { -a.norm_sqr() } else { a.norm_sqr() })
                .sum::<f64>()
                * c0.re;
        }
        if p.z == 0 {
            // pure X: pairs (i, i^x) with the top bit of x clear
            let hb = top_bit(x);
            let mut s = 0.0;
            for k in 0..self.amps.len() >> 1 {
                let i = insert_zero(k, hb);
                let (a, b) = (self.amps[i], self.amps[i ^ x]);
                s += a.re * b.re + a.im * b.im;
            }
            return 2.0 * s;
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            s += self.amps[i ^ x].conj() * Self::phase(c0, p.z, i) * a;
        }
        s.re
    }

    /// Apply `(1 + (-1)^minus P) / 2` without renormalizing.
    pub fn project_raw(&mut self, p: PauliMask, minus: bool) {
        let c0 = Self::c0(p);
        let s = if minus { -c0 } else { c0 };
        let x = p.x as usize;
        if x == 0 {
            // diagonal: keep the matching eigenspace
            let odd_kept = minus;
            for (i, a) in self.amps.iter_mut().enumerate() {
                if (((i as u64) & p.z).count_ones() % 2 == 1) != odd_kept {
                    *a = Complex64::new(0.0, 0.0);
                }
            }
            return;
        }
        if p.z == 0 {
            let hb = top_bit(x);
            let sg = if minus { -1.0 } else { 1.0 };
            for k in 0..self.amps.len() >> 1 {
                let i = insert_zero(k, hb);
                let j = i ^ x;
                let (ai, aj) = (self.amps[i], self.amps[j]);
                self.amps[i] = (ai + aj * sg) * 0.5;
                self.amps[j] = (aj + ai * sg) * 0.5;
            }
            return;
        }
        let hb = 1usize << (63 - (x as u64).leading_zeros());
        for i in 0..self.amps.len() {
            if i & hb == 0 {
                let j = i ^ x;
                let (ai, aj) = (self.amps[i], self.amps[j]);
                self.amps[i] = (ai + Self::phase(s, p.z, j) * aj) * 0.5;
                self.amps[j] = (aj + Self::phase(s, p.z, i) * ai) * 0.5;
            }
        }
    }

    /// Apply `(1 + (-1)^minus P) / 2`, renormalize, return the probability.
    pub fn project(&mut self, p: PauliMask, minus: bool) -> f64 {
        let before = self.norm_sqr();
        self.project_raw(p, minus);
        let after = self.norm_sqr();
        let prob = if before > 0.0 { after / before } else { 0.0 };
        if prob > TOL {
            let f = (before / after).sqrt();
            self.amps.iter_mut().for_each(|a| *a *= f);
        }
        prob
    }

    /// Re-prepare a qubit that is not entangled with the rest.
    pub fn reset(&mut self, q: usize, plus: bool) -> Result<()> {
        let b = 1usize << q;
        let (mut n0, mut n1, mut ov) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for i in 0..self.amps.len() {
            if i & b == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | b]);
                n0 += a0.norm_sqr();
                n1 += a1.norm_sqr();
                ov += a0.conj() * a1;
            }
        }
        if n0 + n1 == 0.0 {
            return Ok(());
        }
        if (ov.norm_sqr() - n0 * n1).abs() > 1e-9 * (n0 + n1).powi(2) {
            return Err(Error::Oracle(format!("reset of entangled qubit {q}")));
        }
        let (take_one, scale) = if n0 >= n1 { (false, ((n0 + n1) / n0).sqrt()) } else { (true, ((n0 + n1) / n1).sqrt()) };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & b == 0 {
                let a = if take_one { self.amps[i | b] } else { self.amps[i] } * scale;
                if plus {
                    self.amps[i] = a * r;
                    self.amps[i | b] = a * r;
                } else {
                    self.amps[i] = a;
                    self.amps[i | b] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(())
    }
}

/// Spread `k` by inserting a zero bit at position `b`.
#[inline]
fn insert_zero(k: usize, b: usize) -> usize {
    let low = k & ((1 << b) - 1);
    ((k >> b) << (b + 1)) | low
}

#[inline]
fn top_bit(x: usize) -> usize {
    63 - (x as u64).leading_zeros() as usize
}

pub enum Policy<'a, R: Rng> {
    Sample(&'a mut R),
    /// Forced outcome per label, `true` meaning `-1`.
    Force(&'a [bool]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvRun {
    /// Probability of the produced (or forced) record.
    pub probability: f64,
    /// Outcome per measured label, `true` meaning `-1`.
    pub record: Vec<Option<bool>>,
    /// Whether each measured label was deterministic.
    pub deterministic: Vec<Option<bool>>,
}

/// Measured Pauli of a circuit op, in qubit-index bits.
pub fn op_mask(c: &Circuit, op: &Op) -> Option<PauliMask> {
    let ix = |q| c.qubit_index(q);
    match *op {
        Op::MZ { q, .. } => Some(PauliMask::z_on(&[ix(q)])),
        Op::MX { q, .. } => Some(PauliMask::x_on(&[ix(q)])),
        Op::MZZ { a, b, .. } => Some(PauliMask::z_on(&[ix(a), ix(b)])),
        Op::MXX { a, b, .. } => Some(PauliMask::x_on(&[ix(a), ix(b)])),
        _ => None,
    }
}

/// Run layers `range` of `c` on `state`. Measurements are projectors; a
/// forced outcome of probability zero ends the run with probability 0.
pub fn run_statevector<R: Rng>(
    c: &Circuit,
    range: Range<usize>,
    state: &mut DenseState,
    mut policy: Policy<'_, R>,
    cap: usize,
) -> Result<SvRun> {
    let n = c.num_qubits();
    if n > cap || n > 30 {
        return Err(Error::CapExceeded { n, cap });
    }
    if state.n != n {
        return Err(Error::LengthMismatch { expected: n, got: state.n });
    }
    let mut run = SvRun {
        probability: 1.0,
        record: vec![None; c.num_measurements],
        deterministic: vec![None; c.num_measurements],
    };
    for layer in &c.layers[range] {
        for op in &layer.ops {
            match *op {
                Op::CX { control, target } => state.cx(c.qubit_index(control), c.qubit_index(target)),
                Op::PrepZero { q } => state.reset(c.qubit_index(q), false)?,
                Op::PrepPlus { q } => state.reset(c.qubit_index(q), true)?,
                _ => {
                    let p = op_mask(c, op).expect("measurement");
                    let l = op.label().expect("label");
                    let p_plus = ((1.0 + state.expectation(p) / state.norm_sqr()) / 2.0).clamp(0.0, 1.0);
                    let minus = match &mut policy {
                        Policy::Sample(rng) => rng.gen::<f64>() >= p_plus,
                        Policy::Force(rec) => rec[l],
                    };
                    let pr = if minus { 1.0 - p_plus } else { p_plus };
                    run.record[l] = Some(minus);
                    run.deterministic[l] = Some(p_plus < 1e-9 || p_plus > 1.0 - 1e-9);
                    if pr < 1e-9 {
                        run.probability = 0.0;
                        return Ok(run);
                    }
                    run.probability *= pr;
                    state.project(p, minus);
                }
            }
        }
    }
    Ok(run)
}

/// Apply layers `range` with each measurement replaced by its forced
/// projector, without renormalizing. Resets are rejected.
pub fn apply_forced(c: &Circuit, range: Range<usize>, state: &mut DenseState, record: &[bool]) -> Result<()> {
    for layer in &c.layers[range] {
        for op in &layer.ops {
            match *op {
                Op::CX { control, target } => state.cx(c.qubit_index(control), c.qubit_index(target)),
                Op::PrepZero { .. } | Op::PrepPlus { .. } => {
                    return Err(Error::Oracle("forced operator of a layer with resets".into()))
                }
                _ => {
                    let p = op_mask(c, op).expect("measurement");
                    state.project_raw(p, record[op.label().expect("label")]);
                }
            }
        }
    }
    Ok(())
}

/// Gram matrix `<K psi_i | K psi_j>` of one forced branch over a set of
/// logical inputs. For a branch acting as `c V P` with `V` unitary on the
/// logical space this is `|c|^2 P`.
pub fn branch_gram(
    c: &Circuit,
    range: Range<usize>,
    inputs: &[DenseState],
    record: &[bool],
    cap: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let mut outs = Vec::with_capacity(inputs.len());
    for psi in inputs {
        let mut s = psi.clone();
        let run = run_statevector::<rand::rngs::ThreadRng>(c, range.clone(), &mut s, Policy::Force(record), cap)?;
        // keep the unnormalized branch amplitude
        let w = run.probability.sqrt();
        s.amps.iter_mut().for_each(|a| *a *= w);
        outs.push(s);
    }
    Ok(outs.iter().map(|a| outs.iter().map(|b| a.inner(b)).collect()).collect())
}

/// Logical basis `|ab>` of the two surgery blocks (index `2a + b`).
/// Runs the first `prefix` layers of `c` from `|0...0>`, then applies the
/// green-row `X` strings of block A (`a`) and block B (`b`).
/// Also returns the record of the preparation.
pub fn surgery_logical_inputs<R: Rng>(
    c: &Circuit,
    prefix: usize,
    rng: &mut R,
    cap: usize,
) -> Result<(Vec<DenseState>, Vec<Option<bool>>)> {
    let l = c.spec.l as i32;
    let mut base = DenseState::zero(c.num_qubits());
    let run = run_statevector(c, 0..prefix, &mut base, Policy::Sample(rng), cap)?;
    let xa = PauliMask::x_on(&green_row(c, 1, 0, 2 * l));
    let xb = PauliMask::x_on(&green_row(c, 1, 2 * l + 2, 4 * l + 2));
    let mut out = Vec::with_capacity(4);
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        let mut s = base.clone();
        if a {
            s.apply_pauli(xa);
        }
        if b {
            s.apply_pauli(xb);
        }
        out.push(s);
    }
    Ok((out, run.record))
}

/// One leaf of the outcome tree: its record and the Gram matrix
/// `<K psi_i | K psi_j>` of the unnormalized branch states.
#[derive(Clone, Debug)]
pub struct Branch {
    pub record: Vec<Option<bool>>,
    pub gram: Vec<Vec<Complex64>>,
}

/// Every outcome branch of layers `range` with nonzero weight on at least
/// one input. Inputs are carried together, unnormalized, depth first.
pub fn enumerate_branches(c: &Circuit, range: Range<usize>, inputs: &[DenseState], cap: usize) -> Result<Vec<Branch>> {
    let n = c.num_qubits();
    if n > cap || n > 30 {
        return Err(Error::CapExceeded { n, cap });
    }
    let ops: Vec<Op> = c.layers[range].iter().flat_map(|l| l.ops.iter().copied()).collect();
    let norms: Vec<f64> = inputs.iter().map(|s| s.norm_sqr()).collect();
    let total: f64 = norms.iter().sum();
    let mut out = Vec::new();
    let mut record = vec![None; c.num_measurements];
    let mut w = Walk { c, ops: &ops, floor: total * 1e-12, skip: total * 1e-24, out: &mut out };
    w.walk(0, inputs.to_vec(), norms, &mut record)?;
    Ok(out)
}

struct Walk<'a> {
    c: &'a Circuit,
    ops: &'a [Op],
    /// Branches lighter than this are dropped.
    floor: f64,
    /// A discarded weight below this needs no projection.
    skip: f64,
    out: &'a mut Vec<Branch>,
}

impl Walk<'_> {
    fn walk(
        &mut self,
        mut pos: usize,
        mut states: Vec<DenseState>,
        mut norms: Vec<f64>,
        record: &mut Vec<Option<bool>>,
    ) -> Result<()> {
        let c = self.c;
        while pos < self.ops.len() {
            let op = self.ops[pos];
            pos += 1;
            match op {
                Op::CX { control, target } => {
                    let mut gates = vec![(c.qubit_index(control), c.qubit_index(target))];
                    while let Some(Op::CX { control, target }) = self.ops.get(pos) {
                        gates.push((c.qubit_index(*control), c.qubit_index(*target)));
                        pos += 1;
                    }
                    // one pass per run of disjoint gates
                    let mut start = 0;
                    while start < gates.len() {
                        let mut used = 0usize;
                        let mut end = start;
                        while end < gates.len() && used & ((1 << gates[end].0) | (1 << gates[end].1)) == 0 {
                            used |= (1 << gates[end].0) | (1 << gates[end].1);
                            end += 1;
                        }
                        states.iter_mut().for_each(|s| s.cx_many(&gates[start..end]));
                        start = end;
                    }
                }
                Op::PrepZero { q } | Op::PrepPlus { q } => {
                    let plus = matches!(op, Op::PrepPlus { .. });
                    for s in states.iter_mut() {
                        s.reset(c.qubit_index(q), plus)?;
                    }
                }
                _ => {
                    let p = op_mask(c, &op).expect("measurement");
                    let l = op.label().expect("label");
                    let exps: Vec<f64> = states.iter().map(|s| s.expectation(p)).collect();
                    let split = |minus: bool| -> Vec<f64> {
                        norms.iter().zip(&exps).map(|(n, e)| if minus { (n - e) / 2.0 } else { (n + e) / 2.0 }).collect()
                    };
                    let (plus_w, minus_w) = (split(false), split(true));
                    let (wp, wm): (f64, f64) = (plus_w.iter().sum(), minus_w.iter().sum());
                    if wp > self.floor && wm > self.floor {
                        let mut other = states.clone();
                        other.iter_mut().for_each(|s| s.project_raw(p, true));
                        record[l] = Some(true);
                        self.walk(pos, other, minus_w.clone(), record)?;
                    }
                    let minus = wp <= self.floor;
                    let (kept, dropped) = if minus { (minus_w, wp) } else { (plus_w, wm) };
                    if dropped > self.skip {
                        states.iter_mut().for_each(|s| s.project_raw(p, minus));
                    }
                    norms = kept;
                    record[l] = Some(minus);
                }
            }
        }
        let gram = states.iter().map(|a| states.iter().map(|b| a.inner(b)).collect()).collect();
        self.out.push(Branch { record: record.clone(), gram });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cx_many_matches_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = DenseState::zero(6);
        for a in s.amps.iter_mut() {
            *a = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for gates in [vec![(0, 1), (2, 5), (4, 3)], vec![(0, 1), (1, 2), (2, 0)]] {
            let mut a = s.clone();
            let mut b = s.clone();
            a.cx_many(&gates);
            for &(c, t) in &gates {
                b.cx(c, t);
            }
            assert_eq!(a, b);
        }
    }

    #[test]
    fn xx_on_zero_gives_bell() {
        let mut s = DenseState::zero(2);
        let p = s.project(PauliMask::x_on(&[0, 1]), false);
        assert!((p - 0.5).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (a, e) in s.amps.iter().zip([c(r), c(0.0), c(0.0), c(r)]) {
            assert!((a - e).norm() < 1e-12);
        }
        // projecting again changes nothing
        assert!((s.project(PauliMask::x_on(&[0, 1]), false) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn y_expectation_and_reset() {
        let mut s = DenseState::zero(1);
        s.h(0);
        // |+> has <Y> = 0 and <X> = 1
        assert!(s.expectation(PauliMask { x: 1, z: 1 }).abs() < 1e-12);
        assert!((s.expectation(PauliMask::x_on(&[0])) - 1.0).abs() < 1e-12);
        s.reset(0, false).unwrap();
        assert!((s.expectation(PauliMask::z_on(&[0])) - 1.0).abs() < 1e-12);
        let mut bell = DenseState::zero(2);
        bell.project(PauliMask::x_on(&[0, 1]), false);
        assert!(bell.reset(0, false).is_err());
    }

    fn tree(s: &DenseState, ps: &[PauliMask]) -> f64 {
        let Some((p, rest)) = ps.split_first() else {
            return 1.0;
        };
        let mut total = 0.0;
        for minus in [false, true] {
            let mut t = s.clone();
            let pr = t.project(*p, minus);
            if pr > 1e-12 {
                total += pr * tree(&t, rest);
            }
        }
        total
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let n = 5;
            let mut s = DenseState::zero(n);
            for q in 0..n {
                if rng.gen() {
                    s.h(q);
                }
            }
            let ps: Vec<PauliMask> = (0..10)
                .map(|_| PauliMask { x: rng.gen_range(0..1 << n), z: rng.gen_range(0..1 << n) })
                .filter(|p| p.x | p.z != 0)
                .collect();
            assert!((tree(&s, &ps) - 1.0).abs() < 1e-9);
        }
    }
}
