//! Dense GF(2) vectors and elimination.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        let m = 1u64 << (i & 63);
        if b {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    #[inline]
    pub fn xor_with(&mut self, o: &BitVec) {
        debug_assert_eq!(self.len, o.len);
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= b;
        }
    }

    pub fn and_parity(&self, o: &BitVec) -> bool {
        self.words.iter().zip(&o.words).fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones()) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(64 * k + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(64 * k + t)
                }
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Row-echelon basis supporting incremental insertion and reduction.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
    /// For each row, which inserted vectors it combines.
    combos: Vec<BitVec>,
    inserted: usize,
    cap: usize,
}

impl EchelonBasis {
    /// `cap` bounds the number of insertions tracked in `combos`.
    pub fn new(cap: usize) -> Self {
        EchelonBasis { cap, ..Default::default() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    /// Reduce `v` against the basis. Returns the residue and the combination used.
    pub fn reduce(&self, v: &BitVec) -> (BitVec, BitVec) {
        let mut r = v.clone();
        let mut c = BitVec::zeros(self.cap);
        for (k, row) in self.rows.iter().enumerate() {
            if r.get(self.pivots[k]) {
                r.xor_with(row);
                c.xor_with(&self.combos[k]);
            }
        }
        (r, c)
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Insert `v`; returns true when it was independent.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert!(self.inserted < self.cap, "echelon basis capacity exceeded");
        let (mut r, mut c) = self.reduce(v);
        c.flip(self.inserted);
        self.inserted += 1;
        let Some(p) = r.first_one() else {
            return false;
        };
        // keep fully reduced: clear pivot p from existing rows
        for k in 0..self.rows.len() {
            if self.rows[k].get(p) {
                let (a, b) = (&mut self.rows[k], &r);
                a.xor_with(b);
                let cc = c.clone();
                self.combos[k].xor_with(&cc);
            }
        }
        self.rows.push(std::mem::take(&mut r));
        self.pivots.push(p);
        self.combos.push(std::mem::take(&mut c));
        true
    }
}

/// Solve `A x = b` where `A` is given by columns. Returns one solution.
pub fn solve_columns(cols: &[BitVec], b: &BitVec) -> Option<BitVec> {
    let mut basis = EchelonBasis::new(cols.len());
    for c in cols {
        basis.insert(c);
    }
    let (r, combo) = basis.reduce(b);
    if r.is_zero() {
        Some(combo)
    } else {
        None
    }
}

/// Rank of a list of vectors.
pub fn rank(vs: &[BitVec]) -> usize {
    let mut basis = EchelonBasis::new(vs.len());
    for v in vs {
        basis.insert(v);
    }
    basis.rank()
}

/// Basis of the null space of the matrix whose rows are `rows` (vectors of length `n`).
pub fn nullspace(rows: &[BitVec], n: usize) -> Vec<BitVec> {
    let mut m: Vec<BitVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(k) = (r..m.len()).find(|&k| m[k].get(col)) else {
            continue;
        };
        m.swap(r, k);
        let pr = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k != r && row.get(col) {
                row.xor_with(&pr);
            }
        }
        pivots.push(col);
        r += 1;
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = BitVec::zeros(n);
        v.set(free, true);
        for (k, &p) in pivots.iter().enumerate() {
            if m[k].get(free) {
                v.set(p, true);
            }
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(bits: &[u8]) -> BitVec {
        BitVec::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, b)| **b == 1).map(|(i, _)| i))
    }

    #[test]
    fn solve_small() {
        let cols = vec![bv(&[1, 0, 1]), bv(&[0, 1, 1])];
        let x = solve_columns(&cols, &bv(&[1, 1, 0])).unwrap();
        assert!(x.get(0) && x.get(1));
        assert!(solve_columns(&cols, &bv(&[1, 0, 0])).is_none());
    }

    proptest! {
        #[test]
        fn nullspace_is_annihilated(rows in prop::collection::vec(prop::collection::vec(0u8..2, 9), 0..7)) {
            let rows: Vec<BitVec> = rows.iter().map(|r| bv(r)).collect();
            let ns = nullspace(&rows, 9);
            prop_assert_eq!(ns.len() + rank(&rows), 9);
            for v in &ns {
                for r in &rows {
                    prop_assert!(!r.and_parity(v));
                }
            }
        }

        #[test]
        fn solve_reproduces_rhs(cols in prop::collection::vec(prop::collection::vec(0u8..2, 70), 1..10), pick in prop::collection::vec(0u8..2, 10)) {
            let cols: Vec<BitVec> = cols.iter().map(|c| bv(c)).collect();
            let mut b = BitVec::zeros(70);
            for (c, p) in cols.iter().zip(&pick) {
                if *p == 1 { b.xor_with(c); }
            }
            let x = solve_columns(&cols, &b).unwrap();
            let mut acc = BitVec::zeros(70);
            for i in x.ones() { acc.xor_with(&cols[i]); }
            prop_assert_eq!(acc, b);
        }
    }
}
