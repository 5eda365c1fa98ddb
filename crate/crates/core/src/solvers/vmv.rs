use std::collections::HashMap;

use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::matrix::SparseVector;

use super::ring::Ring;

/// Row and column wiring of one Kronecker factor: for each index, the gates
/// it touches with their coefficients.
#[derive(Clone, Debug)]
struct Block<V> {
    rows: u64,
    cols: u64,
    gates: u64,
    row_adj: Vec<Vec<(u32, V)>>,
    col_adj: Vec<Vec<(u32, V)>>,
}

impl<V: Clone> Block<V> {
    fn new<R: Ring<V = V>>(ring: &R, c: &Circuit) -> Result<Self> {
        let mut row_adj = vec![Vec::new(); c.n_rows as usize];
        let mut col_adj = vec![Vec::new(); c.n_cols as usize];
        for (g, gate) in c.gates.iter().enumerate() {
            for (i, v) in gate.u.entries() {
                row_adj[*i as usize].push((g as u32, ring.embed(c.semiring, v)?));
            }
            for (j, v) in gate.v.entries() {
                col_adj[*j as usize].push((g as u32, ring.embed(c.semiring, v)?));
            }
        }
        Ok(Block { rows: c.n_rows, cols: c.n_cols, gates: c.gates.len() as u64, row_adj, col_adj })
    }
}

/// The circuit C^{⊗l} ⊗ C'^{⊗r} for M^{⊗d}, kept factored. C computes
/// M^{⊗d0}, C' computes M, and l = ⌊d/d0⌋, r = d mod d0. Middle gates are
/// addressed by their path of per-factor gate indices.
#[derive(Clone, Debug)]
pub struct VmvPlan<R: Ring> {
    ring: R,
    blocks: Vec<Block<R::V>>,
    strides: Vec<u128>,
    pub l: u32,
    pub r: u32,
    pub d0: u32,
}

/// Sparse middle-layer vector, sorted by gate path.
#[derive(Clone, Debug, PartialEq)]
pub struct Accum<V> {
    pub entries: Vec<(u128, V)>,
    pub wires: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VmvResult<V> {
    pub value: V,
    /// Wires enumerated on both sides plus inner-product steps.
    pub work: u64,
    pub gates_x: usize,
    pub gates_y: usize,
}

impl<R: Ring> VmvPlan<R> {
    pub fn new(ring: R, base: &Circuit, d0: u32, tail: Option<&Circuit>, d: u32) -> Result<Self> {
        if d0 == 0 || d == 0 {
            return Err(Error::Invalid("levels must be positive".into()));
        }
        let (l, r) = (d / d0, d % d0);
        if r > 0 {
            let t = tail.ok_or_else(|| Error::Invalid(format!("d = {d} is not a multiple of {d0}; a tail circuit is needed")))?;
            if t.semiring != base.semiring {
                return Err(Error::Semiring(format!("base over {}, tail over {}", base.semiring, t.semiring)));
            }
            if t.n_rows.checked_pow(d0) != Some(base.n_rows) || t.n_cols.checked_pow(d0) != Some(base.n_cols) {
                return Err(Error::Shape(format!(
                    "base is {}x{}, tail {}x{} does not give it at level {d0}",
                    base.n_rows, base.n_cols, t.n_rows, t.n_cols
                )));
            }
        }
        let b = Block::new(&ring, base)?;
        let mut blocks = vec![b; l as usize];
        if r > 0 {
            blocks.extend(std::iter::repeat_n(Block::new(&ring, tail.expect("checked"))?, r as usize));
        }
        Self::from_blocks(ring, blocks, l, r, d0)
    }

    /// A single unfactored circuit.
    pub fn flat(ring: R, c: &Circuit) -> Result<Self> {
        let b = Block::new(&ring, c)?;
        Self::from_blocks(ring, vec![b], 1, 0, 1)
    }

    fn from_blocks(ring: R, blocks: Vec<Block<R::V>>, l: u32, r: u32, d0: u32) -> Result<Self> {
        let mut strides = vec![1u128; blocks.len()];
        let mut acc = 1u128;
        let mut rows = 1u128;
        let mut cols = 1u128;
        for (k, b) in blocks.iter().enumerate().rev() {
            strides[k] = acc;
            let over = || Error::Invalid("plan dimensions overflow".into());
            acc = acc.checked_mul(b.gates as u128).ok_or_else(over)?;
            rows = rows.checked_mul(b.rows as u128).ok_or_else(over)?;
            cols = cols.checked_mul(b.cols as u128).ok_or_else(over)?;
        }
        if rows > u64::MAX as u128 || cols > u64::MAX as u128 {
            return Err(Error::Invalid("index space exceeds 64 bits".into()));
        }
        Ok(VmvPlan { ring, blocks, strides, l, r, d0 })
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn n_rows(&self) -> u64 {
        self.blocks.iter().map(|b| b.rows).product()
    }

    pub fn n_cols(&self) -> u64 {
        self.blocks.iter().map(|b| b.cols).product()
    }

    pub fn embed_vector(&self, x: &SparseVector, sr: crate::semiring::Semiring) -> Result<Vec<(u64, R::V)>> {
        x.entries().iter().map(|(i, v)| Ok((*i, self.ring.embed(sr, v)?))).collect()
    }

    fn wiring(&self, idx: u64, rows: bool) -> Vec<&[(u32, R::V)]> {
        let mut lists = vec![&[][..]; self.blocks.len()];
        let mut y = idx;
        for (k, b) in self.blocks.iter().enumerate().rev() {
            let n = if rows { b.rows } else { b.cols };
            let digit = (y % n) as usize;
            y /= n;
            lists[k] = if rows { &b.row_adj[digit] } else { &b.col_adj[digit] };
        }
        lists
    }

    /// Wires of one row (or column): gate path and product of coefficients.
    pub fn for_each_wire(&self, idx: u64, rows: bool, mut f: impl FnMut(u128, &R::V)) {
        let lists = self.wiring(idx, rows);
        if lists.iter().any(|l| l.is_empty()) {
            return;
        }
        let k = lists.len();
        let mut pos = vec![0usize; k];
        let mut prefix: Vec<(u128, R::V)> = Vec::with_capacity(k + 1);
        // odometer with cached prefix products
        let mut depth = 0;
        loop {
            while depth < k {
                let (g, c) = &lists[depth][pos[depth]];
                let (key, val) = match prefix.last() {
                    Some((key, val)) => (key + *g as u128 * self.strides[depth], self.ring.mul(val, c)),
                    None => (*g as u128 * self.strides[depth], c.clone()),
                };
                prefix.push((key, val));
                depth += 1;
            }
            let (key, val) = prefix.last().expect("non-empty");
            f(*key, val);
            loop {
                prefix.pop();
                depth -= 1;
                pos[depth] += 1;
                if pos[depth] < lists[depth].len() {
                    break;
                }
                pos[depth] = 0;
                if depth == 0 {
                    return;
                }
            }
        }
    }

    /// x^T U as a sparse gate vector.
    pub fn accumulate(&self, x: &[(u64, R::V)], rows: bool) -> Accum<R::V> {
        let limit = if rows { self.n_rows() } else { self.n_cols() };
        let (map, wires) = x
            .par_chunks(64)
            .fold(
                || (HashMap::<u128, R::V>::new(), 0u64),
                |(mut acc, mut wires), chunk| {
                    for (i, xv) in chunk {
                        assert!(*i < limit, "index {i} outside the plan's {limit} indices");
                        if self.ring.is_zero(xv) {
                            continue;
                        }
                        self.for_each_wire(*i, rows, |key, c| {
                            wires += 1;
                            let t = self.ring.mul(xv, c);
                            match acc.get_mut(&key) {
                                Some(e) => self.ring.add_assign(e, &t),
                                None => {
                                    acc.insert(key, t);
                                }
                            }
                        });
                    }
                    (acc, wires)
                },
            )
            .reduce(
                || (HashMap::new(), 0),
                |(a, wa), (b, wb)| {
                    let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
                    for (k, v) in small {
                        match big.get_mut(&k) {
                            Some(e) => self.ring.add_assign(e, &v),
                            None => {
                                big.insert(k, v);
                            }
                        }
                    }
                    (big, wa + wb)
                },
            );
        let mut entries: Vec<(u128, R::V)> = map.into_iter().filter(|(_, v)| !self.ring.is_zero(v)).collect();
        entries.sort_unstable_by_key(|e| e.0);
        Accum { entries, wires }
    }

    /// Sorted-merge inner product of two gate vectors, with its step count.
    pub fn inner(&self, a: &Accum<R::V>, b: &Accum<R::V>) -> (R::V, u64) {
        let mut s = self.ring.zero();
        let (mut i, mut j, mut steps) = (0, 0, 0u64);
        while i < a.entries.len() && j < b.entries.len() {
            steps += 1;
            match a.entries[i].0.cmp(&b.entries[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    self.ring.add_assign(&mut s, &self.ring.mul(&a.entries[i].1, &b.entries[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        (s, steps)
    }
}

/// x^T M^{⊗d} y through the factored circuit.
pub fn sparse_vmv<R: Ring>(plan: &VmvPlan<R>, x: &[(u64, R::V)], y: &[(u64, R::V)]) -> VmvResult<R::V> {
    let ax = plan.accumulate(x, true);
    let ay = plan.accumulate(y, false);
    let (value, steps) = plan.inner(&ax, &ay);
    VmvResult { value, work: ax.wires + ay.wires + steps, gates_x: ax.entries.len(), gates_y: ay.entries.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{disjointness_pair_partition, yates_pair};
    use crate::matrix::MatrixSpec;
    use crate::semiring::{Scalar, Semiring};
    use crate::solvers::ring::{Boolean, Counting, Exact};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r1() -> Circuit {
        Circuit::row_decomposition(&MatrixSpec::Disjointness(1).generate_in(Semiring::Par).unwrap())
    }

    #[test]
    fn empty_set_pair() {
        let plan = VmvPlan::new(Counting, &disjointness_pair_partition(Semiring::Par), 2, Some(&r1()), 7).unwrap();
        assert_eq!((plan.l, plan.r), (3, 1));
        let r = sparse_vmv(&plan, &[(0, 1)], &[(0, 1)]);
        assert_eq!(r.value, 1);
    }

    #[test]
    fn matches_dense() {
        for d in [9, 10] {
            dense_check(d);
        }
    }

    fn dense_check(d: u32) {
        let plan = VmvPlan::new(Counting, &disjointness_pair_partition(Semiring::Par), 2, Some(&r1()), d).unwrap();
        let bplan = VmvPlan::new(Boolean, &disjointness_pair_partition(Semiring::Or), 2, Some(&r1().convert(Semiring::Or).unwrap()), d).unwrap();
        let m = MatrixSpec::Disjointness(d).generate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut x: Vec<(u64, u128)> = (0..100).map(|_| (rng.gen_range(0..1u64 << d), rng.gen_range(1..4))).collect();
            let y: Vec<(u64, u128)> = (0..100).map(|_| (rng.gen_range(0..1u64 << d), rng.gen_range(1..4))).collect();
            x.sort_unstable();
            x.dedup_by_key(|e| e.0);
            let dense: u128 = m
                .entries()
                .iter()
                .map(|(i, j, _)| {
                    let a: u128 = x.iter().filter(|e| e.0 == *i).map(|e| e.1).sum();
                    let b: u128 = y.iter().filter(|e| e.0 == *j).map(|e| e.1).sum();
                    a * b
                })
                .sum();
            assert_eq!(sparse_vmv(&plan, &x, &y).value, dense);
            let xb: Vec<(u64, bool)> = x.iter().map(|e| (e.0, true)).collect();
            let yb: Vec<(u64, bool)> = y.iter().map(|e| (e.0, true)).collect();
            assert_eq!(sparse_vmv(&bplan, &xb, &yb).value, dense > 0);
        }
    }

    #[test]
    fn cyclotomic_dft() {
        let m = 3;
        let f = MatrixSpec::Dft { m, d: 1 }.generate().unwrap();
        let sr = Semiring::Cyclotomic(m);
        let plan = VmvPlan::new(Exact(sr), &yates_pair(&f), 2, Some(&Circuit::row_decomposition(&f)), 3).unwrap();
        let full = MatrixSpec::Dft { m, d: 3 };
        let x = vec![(5u64, sr.one()), (13, sr.from_i64(2))];
        let y = vec![(7u64, sr.one()), (26, sr.one())];
        let mut want = sr.zero();
        for (i, a) in &x {
            for (j, b) in &y {
                want = sr.add(&want, &sr.mul(&sr.mul(a, &full.entry(*i, *j)), b));
            }
        }
        assert_eq!(sparse_vmv(&plan, &x, &y).value, want);
        let _: Scalar = want;
    }
}
