use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::semiring::{Cyclo, Scalar, Semiring};

pub const DEFAULT_CAP: u64 = 1 << 26;

/// Entry budget for anything that materializes matrices; `KRONSYNTH_CAP`
/// overrides the default.
pub fn materialization_cap() -> u64 {
    std::env::var("KRONSYNTH_CAP").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_CAP)
}

pub(crate) fn check_cap(needed: u128) -> Result<()> {
    let cap = materialization_cap();
    if needed > cap as u128 {
        return Err(Error::CapExceeded { needed, cap });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseVector {
    pub len: u64,
    entries: Vec<(u64, Scalar)>,
}

impl SparseVector {
    /// Sorts, merges repeated indices and drops zeros.
    pub fn new(len: u64, mut entries: Vec<(u64, Scalar)>, sr: Semiring) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(u64, Scalar)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            if i >= len {
                return Err(Error::Shape(format!("index {i} outside vector of length {len}")));
            }
            if !sr.belongs(&v) {
                return Err(Error::Semiring(format!("{v:?} is not a {sr} value")));
            }
            match out.last_mut() {
                Some((j, w)) if *j == i => *w = sr.add(w, &v),
                _ => out.push((i, v)),
            }
        }
        out.retain(|(_, v)| !sr.is_zero(v));
        Ok(SparseVector { len, entries: out })
    }

    pub fn ones(len: u64, idx: impl IntoIterator<Item = u64>, sr: Semiring) -> Self {
        let entries = idx.into_iter().map(|i| (i, sr.one())).collect();
        Self::new(len, entries, sr).expect("indices in range")
    }

    pub fn entries(&self) -> &[(u64, Scalar)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn get(&self, i: u64) -> Option<&Scalar> {
        self.entries.binary_search_by_key(&i, |e| e.0).ok().map(|k| &self.entries[k].1)
    }

    pub fn kron(&self, o: &SparseVector, sr: Semiring) -> SparseVector {
        let mut entries = Vec::with_capacity(self.nnz() * o.nnz());
        for (i, a) in &self.entries {
            for (j, b) in &o.entries {
                entries.push((i * o.len + j, sr.mul(a, b)));
            }
        }
        entries.retain(|(_, v)| !sr.is_zero(v));
        SparseVector { len: self.len * o.len, entries }
    }

    /// Keeps only entries whose index passes `keep`.
    pub fn restrict(&self, keep: impl Fn(u64) -> bool) -> SparseVector {
        SparseVector { len: self.len, entries: self.entries.iter().filter(|e| keep(e.0)).cloned().collect() }
    }

    pub fn map_values(&self, sr: Semiring, f: impl Fn(u64, &Scalar) -> Scalar) -> SparseVector {
        let entries = self.entries.iter().map(|(i, v)| (*i, f(*i, v))).collect();
        Self::new(self.len, entries, sr).expect("same support")
    }

    pub fn relabel(&self, sr: Semiring, f: impl Fn(u64) -> u64) -> SparseVector {
        let entries = self.entries.iter().map(|(i, v)| (f(*i), v.clone())).collect();
        Self::new(self.len, entries, sr).expect("permutation stays in range")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub n_rows: u64,
    pub n_cols: u64,
    pub semiring: Semiring,
    entries: Vec<(u64, u64, Scalar)>,
}

impl SparseMatrix {
    pub fn from_entries(n_rows: u64, n_cols: u64, semiring: Semiring, mut entries: Vec<(u64, u64, Scalar)>) -> Result<Self> {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut out: Vec<(u64, u64, Scalar)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            if i >= n_rows || j >= n_cols {
                return Err(Error::Shape(format!("entry ({i},{j}) outside {n_rows}x{n_cols}")));
            }
            match out.last_mut() {
                Some((a, b, w)) if *a == i && *b == j => *w = semiring.add(w, &v),
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|e| !semiring.is_zero(&e.2));
        Ok(SparseMatrix { n_rows, n_cols, semiring, entries: out })
    }

    pub fn zero(n_rows: u64, n_cols: u64, semiring: Semiring) -> Self {
        SparseMatrix { n_rows, n_cols, semiring, entries: Vec::new() }
    }

    pub fn identity(n: u64, semiring: Semiring) -> Result<Self> {
        check_cap(n as u128)?;
        let entries = (0..n).map(|i| (i, i, semiring.one())).collect();
        Ok(SparseMatrix { n_rows: n, n_cols: n, semiring, entries })
    }

    /// Dense input, row-major, integer entries.
    pub fn from_dense_i64(rows: &[Vec<i64>], semiring: Semiring) -> Self {
        let n_rows = rows.len() as u64;
        let n_cols = rows.first().map_or(0, |r| r.len()) as u64;
        let mut entries = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                entries.push((i as u64, j as u64, semiring.from_i64(v)));
            }
        }
        Self::from_entries(n_rows, n_cols, semiring, entries).expect("dense input is in range")
    }

    pub fn entries(&self) -> &[(u64, u64, Scalar)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: u64, j: u64) -> Scalar {
        match self.entries.binary_search_by_key(&(i, j), |e| (e.0, e.1)) {
            Ok(k) => self.entries[k].2.clone(),
            Err(_) => self.semiring.zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut d = vec![vec![self.semiring.zero(); self.n_cols as usize]; self.n_rows as usize];
        for (i, j, v) in &self.entries {
            d[*i as usize][*j as usize] = v.clone();
        }
        d
    }

    pub fn transpose(&self) -> SparseMatrix {
        let entries = self.entries.iter().map(|(i, j, v)| (*j, *i, v.clone())).collect();
        Self::from_entries(self.n_cols, self.n_rows, self.semiring, entries).expect("transpose in range")
    }

    pub fn convert(&self, to: Semiring) -> Result<SparseMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|(i, j, v)| Ok((*i, *j, to.convert(self.semiring, v)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(self.n_rows, self.n_cols, to, entries)
    }

    pub fn mul_vec(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() as u64 != self.n_cols {
            return Err(Error::Shape(format!("vector length {} vs {} columns", x.len(), self.n_cols)));
        }
        let sr = self.semiring;
        let mut y = vec![sr.zero(); self.n_rows as usize];
        for (i, j, v) in &self.entries {
            let t = sr.mul(v, &x[*j as usize]);
            y[*i as usize] = sr.add(&y[*i as usize], &t);
        }
        Ok(y)
    }

    pub fn matmul(&self, o: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_cols != o.n_rows || self.semiring != o.semiring {
            return Err(Error::Shape(format!(
                "{}x{} ({}) times {}x{} ({})",
                self.n_rows, self.n_cols, self.semiring, o.n_rows, o.n_cols, o.semiring
            )));
        }
        let sr = self.semiring;
        let mut by_row: HashMap<u64, Vec<(u64, &Scalar)>> = HashMap::new();
        for (i, j, v) in &o.entries {
            by_row.entry(*i).or_default().push((*j, v));
        }
        let mut acc: HashMap<(u64, u64), Scalar> = HashMap::new();
        let mut work: u128 = 0;
        for (i, k, a) in &self.entries {
            if let Some(row) = by_row.get(k) {
                work += row.len() as u128;
                for (j, b) in row {
                    let t = sr.mul(a, b);
                    let e = acc.entry((*i, *j)).or_insert_with(|| sr.zero());
                    *e = sr.add(e, &t);
                }
            }
            if work > 4 * materialization_cap() as u128 {
                check_cap(work)?;
            }
        }
        Self::from_entries(self.n_rows, o.n_cols, sr, acc.into_iter().map(|((i, j), v)| (i, j, v)).collect())
    }

    pub fn rows_of(&self) -> HashMap<u64, Vec<(u64, Scalar)>> {
        let mut m: HashMap<u64, Vec<(u64, Scalar)>> = HashMap::new();
        for (i, j, v) in &self.entries {
            m.entry(*i).or_default().push((*j, v.clone()));
        }
        m
    }
}

/// Kronecker product with the (i_a, i_b) ↦ i_a·n_b + i_b convention.
pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    if a.semiring != b.semiring {
        return Err(Error::Semiring(format!("{} vs {}", a.semiring, b.semiring)));
    }
    check_cap(a.nnz() as u128 * b.nnz() as u128)?;
    let sr = a.semiring;
    let mut entries = Vec::with_capacity(a.nnz() * b.nnz());
    for (i1, j1, v1) in &a.entries {
        for (i2, j2, v2) in &b.entries {
            entries.push((i1 * b.n_rows + i2, j1 * b.n_cols + j2, sr.mul(v1, v2)));
        }
    }
    SparseMatrix::from_entries(a.n_rows * b.n_rows, a.n_cols * b.n_cols, sr, entries)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatrixSpec {
    Disjointness(u32),
    Hadamard(u32),
    Dft { m: u32, d: u32 },
    /// Values of f on {0,1}^n, indexed by bitmask; entry (x, y) is f(x ∨ y).
    OrCirculant(Vec<BigRational>),
    Identity(u64),
    Literal(SparseMatrix),
}

impl MatrixSpec {
    pub fn dims(&self) -> (u64, u64) {
        match self {
            MatrixSpec::Disjointness(d) | MatrixSpec::Hadamard(d) => (1 << d, 1 << d),
            MatrixSpec::Dft { m, d } => {
                let n = (*m as u64).pow(*d);
                (n, n)
            }
            MatrixSpec::OrCirculant(f) => (f.len() as u64, f.len() as u64),
            MatrixSpec::Identity(n) => (*n, *n),
            MatrixSpec::Literal(m) => (m.n_rows, m.n_cols),
        }
    }

    pub fn natural_semiring(&self) -> Semiring {
        match self {
            MatrixSpec::Dft { m, .. } => Semiring::Cyclotomic(*m),
            MatrixSpec::Literal(m) => m.semiring,
            _ => Semiring::Rational,
        }
    }

    /// True for 0/1 targets, which are the ones OR/PAR semantics apply to.
    pub fn is_boolean(&self) -> bool {
        match self {
            MatrixSpec::Disjointness(_) | MatrixSpec::Identity(_) => true,
            MatrixSpec::OrCirculant(f) => f.iter().all(|v| v.is_zero() || *v == BigRational::from_integer(1.into())),
            MatrixSpec::Literal(m) => m.entries().iter().all(|e| {
                m.semiring.convert(m.semiring, &e.2).ok().is_some_and(|v| v == m.semiring.one())
            }),
            _ => false,
        }
    }

    /// A single entry computed on the fly, in the spec's natural semiring.
    pub fn entry(&self, i: u64, j: u64) -> Scalar {
        let sr = self.natural_semiring();
        match self {
            MatrixSpec::Disjointness(_) => sr.from_i64((i & j == 0) as i64),
            MatrixSpec::Hadamard(_) => sr.from_i64(if (i & j).count_ones().is_multiple_of(2) { 1 } else { -1 }),
            MatrixSpec::Dft { m, d } => {
                let (mut a, mut b, mut e) = (i, j, 0u64);
                for _ in 0..*d {
                    e += (a % *m as u64) * (b % *m as u64);
                    a /= *m as u64;
                    b /= *m as u64;
                }
                Scalar::Cyc(Cyclo::root_power(*m, e))
            }
            MatrixSpec::OrCirculant(f) => Scalar::Rat(f[(i | j) as usize].clone()),
            MatrixSpec::Identity(_) => sr.from_i64((i == j) as i64),
            MatrixSpec::Literal(m) => m.get(i, j),
        }
    }

    /// Count of stored entries `generate` would produce, used for the cap.
    fn nnz_bound(&self) -> u128 {
        match self {
            MatrixSpec::Disjointness(d) => 3u128.pow(*d),
            MatrixSpec::Identity(n) => *n as u128,
            MatrixSpec::Literal(m) => m.nnz() as u128,
            _ => {
                let (r, c) = self.dims();
                r as u128 * c as u128
            }
        }
    }

    pub fn generate(&self) -> Result<SparseMatrix> {
        check_cap(self.nnz_bound())?;
        let sr = self.natural_semiring();
        let (n_rows, n_cols) = self.dims();
        match self {
            MatrixSpec::Disjointness(d) => {
                let full = (1u64 << d) - 1;
                let mut entries = Vec::with_capacity(3usize.pow(*d));
                for s in 0..=full {
                    let comp = full & !s;
                    // all subsets of the complement, increasing
                    let mut t = 0u64;
                    loop {
                        entries.push((s, t, sr.one()));
                        if t == comp {
                            break;
                        }
                        t = (t.wrapping_sub(comp)) & comp;
                    }
                }
                Ok(SparseMatrix { n_rows, n_cols, semiring: sr, entries })
            }
            MatrixSpec::Identity(n) => SparseMatrix::identity(*n, sr),
            MatrixSpec::Literal(m) => Ok(m.clone()),
            _ => {
                let mut entries = Vec::new();
                for i in 0..n_rows {
                    for j in 0..n_cols {
                        entries.push((i, j, self.entry(i, j)));
                    }
                }
                SparseMatrix::from_entries(n_rows, n_cols, sr, entries)
            }
        }
    }

    /// `generate` followed by a conversion into `sr`.
    pub fn generate_in(&self, sr: Semiring) -> Result<SparseMatrix> {
        self.generate()?.convert(sr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(m: &SparseMatrix) -> Vec<Vec<i64>> {
        m.to_dense()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| match v {
                        Scalar::Rat(q) => i64::try_from(q.to_integer()).unwrap(),
                        Scalar::Count(c) => c as i64,
                        other => panic!("{other:?}"),
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn disjointness_small() {
        assert_eq!(ints(&MatrixSpec::Disjointness(1).generate().unwrap()), vec![vec![1, 1], vec![1, 0]]);
        assert_eq!(ints(&MatrixSpec::Disjointness(0).generate().unwrap()), vec![vec![1]]);
        assert_eq!(MatrixSpec::Disjointness(4).generate().unwrap().nnz(), 81);
    }

    #[test]
    fn kron_matches_printed_r2() {
        let r1 = MatrixSpec::Disjointness(1).generate().unwrap();
        let r2 = kron(&r1, &r1).unwrap();
        assert_eq!(ints(&r2), vec![vec![1, 1, 1, 1], vec![1, 0, 1, 0], vec![1, 1, 0, 0], vec![1, 0, 0, 0]]);
        assert_eq!(r2, MatrixSpec::Disjointness(2).generate().unwrap());
    }

    #[test]
    fn identity_kron() {
        let i2 = SparseMatrix::identity(2, Semiring::Rational).unwrap();
        assert_eq!(kron(&i2, &i2).unwrap(), SparseMatrix::identity(4, Semiring::Rational).unwrap());
    }

    #[test]
    fn hadamard_square() {
        let h1 = MatrixSpec::Hadamard(1).generate().unwrap();
        let h2 = kron(&h1, &h1).unwrap();
        assert_eq!(h2, MatrixSpec::Hadamard(2).generate().unwrap());
        // H_2 H_2 = 4 I, so rank 4.
        let sq = h2.matmul(&h2).unwrap();
        let four = Semiring::Rational.from_i64(4);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { four.clone() } else { Semiring::Rational.zero() };
                assert_eq!(sq.get(i, j), want);
            }
        }
    }

    #[test]
    fn dft_kron_power() {
        let f1 = MatrixSpec::Dft { m: 3, d: 1 }.generate().unwrap();
        let f2 = kron(&f1, &f1).unwrap();
        assert_eq!(f2, MatrixSpec::Dft { m: 3, d: 2 }.generate().unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(MatrixSpec::Disjointness(20).generate(), Err(Error::CapExceeded { .. })));
    }
}
