//! Stabilizer tableau with destabilizers.
//!
//! The tableau is generic over its sign type. With `bool` signs it is an
//! ordinary simulator driven by an rng. With `AffineSign` every random
//! outcome introduces a fresh coin variable, and deterministic outcomes come
//! out as an affine function of earlier coins. The symbolic run is what the
//! detector and observable construction is built on.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Op};
use crate::gf2::BitVec;

pub trait Sign: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn xor_assign(&mut self, o: &Self);
    fn flip(&mut self);
}

impl Sign for bool {
    fn zero() -> Self {
        false
    }
    fn xor_assign(&mut self, o: &Self) {
        *self ^= *o;
    }
    fn flip(&mut self) {
        *self = !*self;
    }
}

/// `c ⊕ Σ coins[k]`, with a growable coin mask.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineSign {
    pub constant: bool,
    pub coins: Vec<u64>,
}

impl AffineSign {
    pub fn coin(k: usize) -> Self {
        let mut s = AffineSign::default();
        s.coins.resize(k / 64 + 1, 0);
        s.coins[k / 64] |= 1 << (k % 64);
        s
    }

    pub fn is_deterministic(&self) -> bool {
        self.coins.iter().all(|w| *w == 0)
    }

    pub fn coin_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, &w) in self.coins.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(64 * k + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    pub fn eval(&self, coins: &[bool]) -> bool {
        self.coin_indices().into_iter().fold(self.constant, |a, k| a ^ coins[k])
    }
}

impl Sign for AffineSign {
    fn zero() -> Self {
        AffineSign::default()
    }
    fn xor_assign(&mut self, o: &Self) {
        self.constant ^= o.constant;
        if self.coins.len() < o.coins.len() {
            self.coins.resize(o.coins.len(), 0);
        }
        for (a, b) in self.coins.iter_mut().zip(&o.coins) {
            *a ^= b;
        }
    }
    fn flip(&mut self) {
        self.constant = !self.constant;
    }
}

/// Pauli operator as `(x, z)` bit vectors; `(1, 1)` is `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pauli {
    pub x: BitVec,
    pub z: BitVec,
}

impl Pauli {
    pub fn identity(n: usize) -> Self {
        Pauli { x: BitVec::zeros(n), z: BitVec::zeros(n) }
    }

    pub fn z_on(n: usize, qs: &[usize]) -> Self {
        Pauli { x: BitVec::zeros(n), z: BitVec::from_indices(n, qs.iter().copied()) }
    }

    pub fn x_on(n: usize, qs: &[usize]) -> Self {
        Pauli { x: BitVec::from_indices(n, qs.iter().copied()), z: BitVec::zeros(n) }
    }

    pub fn anticommutes(&self, o: &Pauli) -> bool {
        self.x.and_parity(&o.z) ^ self.z.and_parity(&o.x)
    }
}

/// Phase exponent (mod 4) picked up by `P_i * P_h` relative to the bit form.
fn product_phase(xi: &BitVec, zi: &BitVec, xh: &BitVec, zh: &BitVec) -> u32 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for k in 0..xi.words().len() {
        let (x1, z1, x2, z2) = (xi.words()[k], zi.words()[k], xh.words()[k], zh.words()[k]);
        let y1 = x1 & z1;
        let xo = x1 & !z1;
        let zo = z1 & !x1;
        plus += (y1 & z2 & !x2).count_ones() + (xo & z2 & x2).count_ones() + (zo & x2 & !z2).count_ones();
        minus += (y1 & x2 & !z2).count_ones() + (xo & z2 & !x2).count_ones() + (zo & x2 & z2).count_ones();
    }
    (plus + 4 * 64 * xi.words().len() as u32 - minus) % 4
}

#[derive(Clone, Debug)]
pub struct Tableau<S: Sign> {
    n: usize,
    /// Rows `0..n` are destabilizers, `n..2n` stabilizers.
    xs: Vec<BitVec>,
    zs: Vec<BitVec>,
    signs: Vec<S>,
}

impl<S: Sign> Tableau<S> {
    /// `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        let mut xs = Vec::with_capacity(2 * n);
        let mut zs = Vec::with_capacity(2 * n);
        for i in 0..n {
            xs.push(BitVec::from_indices(n, [i]));
            zs.push(BitVec::zeros(n));
        }
        for i in 0..n {
            xs.push(BitVec::zeros(n));
            zs.push(BitVec::from_indices(n, [i]));
        }
        Tableau { n, xs, zs, signs: vec![S::zero(); 2 * n] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizer(&self, i: usize) -> (Pauli, S) {
        let r = self.n + i;
        (Pauli { x: self.xs[r].clone(), z: self.zs[r].clone() }, self.signs[r].clone())
    }

    pub fn stabilizers(&self) -> Vec<(Pauli, S)> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for r in 0..2 * self.n {
            let (xc, zt) = (self.xs[r].get(c), self.zs[r].get(t));
            if xc && zt && (self.xs[r].get(t) == self.zs[r].get(c)) {
                self.signs[r].flip();
            }
            if xc {
                self.xs[r].flip(t);
            }
            if zt {
                self.zs[r].flip(c);
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        for r in 0..2 * self.n {
            let (x, z) = (self.xs[r].get(q), self.zs[r].get(q));
            if x && z {
                self.signs[r].flip();
            }
            self.xs[r].set(q, z);
            self.zs[r].set(q, x);
        }
    }

    /// Multiply the sign of every row anticommuting with `p` by `s`.
    pub fn apply_pauli_conditional(&mut self, p: &Pauli, s: &S) {
        for r in 0..2 * self.n {
            if self.xs[r].and_parity(&p.z) ^ self.zs[r].and_parity(&p.x) {
                self.signs[r].xor_assign(s);
            }
        }
    }

    pub fn apply_pauli(&mut self, p: &Pauli) {
        for r in 0..2 * self.n {
            if self.xs[r].and_parity(&p.z) ^ self.zs[r].and_parity(&p.x) {
                self.signs[r].flip();
            }
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let ph = product_phase(&self.xs[i], &self.zs[i], &self.xs[h], &self.zs[h]);
        let (si, xi, zi) = (self.signs[i].clone(), self.xs[i].clone(), self.zs[i].clone());
        self.signs[h].xor_assign(&si);
        if ph == 2 {
            self.signs[h].flip();
        }
        self.xs[h].xor_with(&xi);
        self.zs[h].xor_with(&zi);
    }

    fn anti(&self, r: usize, p: &Pauli) -> bool {
        self.xs[r].and_parity(&p.z) ^ self.zs[r].and_parity(&p.x)
    }

    /// Outcome sign of `p` if it is in the stabilizer group (up to sign).
    pub fn peek(&self, p: &Pauli) -> Option<S> {
        if (self.n..2 * self.n).any(|r| self.anti(r, p)) {
            return None;
        }
        let mut x = BitVec::zeros(self.n);
        let mut z = BitVec::zeros(self.n);
        let mut s = S::zero();
        for i in 0..self.n {
            if self.anti(i, p) {
                let r = self.n + i;
                if product_phase(&self.xs[r], &self.zs[r], &x, &z) == 2 {
                    s.flip();
                }
                s.xor_assign(&self.signs[r]);
                x.xor_with(&self.xs[r]);
                z.xor_with(&self.zs[r]);
            }
        }
        debug_assert!(x == p.x && z == p.z);
        Some(s)
    }

    /// Measure `p`. `coin` supplies the outcome when it is random. Returns
    /// the outcome and whether it was random.
    pub fn measure(&mut self, p: &Pauli, coin: &mut impl FnMut() -> S) -> (S, bool) {
        let Some(pr) = (self.n..2 * self.n).find(|&r| self.anti(r, p)) else {
            return (self.peek(p).expect("commuting Pauli must be in the group"), false);
        };
        for r in 0..2 * self.n {
            if r != pr && self.anti(r, p) {
                self.rowsum(r, pr);
            }
        }
        let d = pr - self.n;
        self.xs[d] = self.xs[pr].clone();
        self.zs[d] = self.zs[pr].clone();
        self.signs[d] = self.signs[pr].clone();
        self.xs[pr] = p.x.clone();
        self.zs[pr] = p.z.clone();
        let s = coin();
        self.signs[pr] = s.clone();
        (s, true)
    }

    /// Reset qubit `q` to `|0⟩` (`plus = false`) or `|+⟩`.
    pub fn reset(&mut self, q: usize, plus: bool, coin: &mut impl FnMut() -> S) {
        let n = self.n;
        let (m, fix) = if plus {
            (Pauli::x_on(n, &[q]), Pauli::z_on(n, &[q]))
        } else {
            (Pauli::z_on(n, &[q]), Pauli::x_on(n, &[q]))
        };
        let (s, _) = self.measure(&m, coin);
        self.apply_pauli_conditional(&fix, &s);
    }
}

/// Source of random outcomes for the symbolic run.
#[derive(Default)]
pub struct CoinCounter {
    pub next: usize,
}

impl CoinCounter {
    pub fn fresh(&mut self) -> AffineSign {
        let s = AffineSign::coin(self.next);
        self.next += 1;
        s
    }
}

/// Measurement outcomes of a noiseless circuit as affine functions of coins.
#[derive(Clone, Debug)]
pub struct SymbolicRun {
    pub outcomes: Vec<AffineSign>,
    pub num_coins: usize,
    /// Which coin each random measurement label introduced.
    pub coin_of_label: Vec<Option<usize>>,
    pub final_tableau: Tableau<AffineSign>,
}

fn op_pauli(c: &Circuit, op: &Op) -> Option<Pauli> {
    let n = c.num_qubits();
    let ix = |q| c.qubit_index(q);
    match *op {
        Op::MXX { a, b, .. } => Some(Pauli::x_on(n, &[ix(a), ix(b)])),
        Op::MZZ { a, b, .. } => Some(Pauli::z_on(n, &[ix(a), ix(b)])),
        Op::MZ { q, .. } => Some(Pauli::z_on(n, &[ix(q)])),
        Op::MX { q, .. } => Some(Pauli::x_on(n, &[ix(q)])),
        _ => None,
    }
}

/// Run `c` on a tableau, with `hook(layer, tableau)` called after each layer.
pub fn simulate<S: Sign>(
    c: &Circuit,
    tab: &mut Tableau<S>,
    coin: &mut impl FnMut() -> S,
    mut after_layer: impl FnMut(usize, &mut Tableau<S>, &[Option<S>]),
) -> (Vec<S>, Vec<bool>) {
    let mut outcomes: Vec<Option<S>> = vec![None; c.num_measurements];
    let mut random = vec![false; c.num_measurements];
    for (li, layer) in c.layers.iter().enumerate() {
        for op in &layer.ops {
            match *op {
                Op::CX { control, target } => tab.cx(c.qubit_index(control), c.qubit_index(target)),
                Op::PrepZero { q } => tab.reset(c.qubit_index(q), false, coin),
                Op::PrepPlus { q } => tab.reset(c.qubit_index(q), true, coin),
                _ => {
                    let p = op_pauli(c, op).unwrap();
                    let (s, r) = tab.measure(&p, coin);
                    let l = op.label().unwrap();
                    outcomes[l] = Some(s);
                    random[l] = r;
                }
            }
        }
        after_layer(li, tab, &outcomes);
    }
    (outcomes.into_iter().map(|o| o.expect("every label measured")).collect(), random)
}

/// Noiseless symbolic run from `|0…0⟩`.
pub fn symbolic_run(c: &Circuit) -> SymbolicRun {
    symbolic_run_with(c, Tableau::new(c.num_qubits()), |_, _| {})
}

/// Symbolic run from a given starting tableau, with a per-layer hook.
pub fn symbolic_run_with(
    c: &Circuit,
    mut tab: Tableau<AffineSign>,
    mut hook: impl FnMut(usize, &mut Tableau<AffineSign>),
) -> SymbolicRun {
    let mut counter = CoinCounter::default();
    let (outcomes, random) = {
        let mut fresh = || counter.fresh();
        simulate(c, &mut tab, &mut fresh, |li, t, _| hook(li, t))
    };
    let coin_of_label = random
        .iter()
        .zip(&outcomes)
        .map(|(r, o)| if *r { o.coin_indices().first().copied() } else { None })
        .collect();
    let num_coins = counter.next;
    SymbolicRun { outcomes, num_coins, coin_of_label, final_tableau: tab }
}

/// Noiseless sampled run with an rng.
pub fn sample_run<R: Rng>(c: &Circuit, rng: &mut R) -> Vec<bool> {
    let mut tab = Tableau::<bool>::new(c.num_qubits());
    let mut coin = || rng.gen::<bool>();
    simulate(c, &mut tab, &mut coin, |_, _, _| {}).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::<bool>::new(2);
        t.h(0);
        t.cx(0, 1);
        assert_eq!(t.peek(&Pauli::z_on(2, &[0, 1])), Some(false));
        assert_eq!(t.peek(&Pauli::x_on(2, &[0, 1])), Some(false));
        let mut yy = Pauli::x_on(2, &[0, 1]);
        yy.z = BitVec::from_indices(2, [0, 1]);
        assert_eq!(t.peek(&yy), Some(true));
    }

    #[test]
    fn symbolic_outcome_tracks_coins() {
        let mut t = Tableau::<AffineSign>::new(2);
        let mut ctr = CoinCounter::default();
        let mut f = || ctr.fresh();
        let (a, ra) = t.measure(&Pauli::x_on(2, &[0]), &mut f);
        assert!(ra);
        t.cx(0, 1);
        let (b, rb) = t.measure(&Pauli::z_on(2, &[0, 1]), &mut f);
        assert!(!rb && b.is_deterministic() && !b.constant);
        let (c, _) = t.measure(&Pauli::x_on(2, &[0, 1]), &mut f);
        assert_eq!(c, a);
    }

    #[test]
    fn reset_forces_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut t = Tableau::<bool>::new(1);
            t.h(0);
            let mut coin = || rng.gen::<bool>();
            t.reset(0, false, &mut coin);
            assert_eq!(t.peek(&Pauli::z_on(1, &[0])), Some(false));
            t.reset(0, true, &mut coin);
            assert_eq!(t.peek(&Pauli::x_on(1, &[0])), Some(false));
        }
    }
}
