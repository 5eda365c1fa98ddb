use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interval::{alpha_volume_terms, Interval};
use crate::matrix::{check_cap, MatrixSpec, SparseMatrix, SparseVector};
use crate::semiring::{Scalar, Semiring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub u: SparseVector,
    pub v: SparseVector,
}

/// A depth-2 circuit: the matrix Σ_g u_g v_g^T.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub n_rows: u64,
    pub n_cols: u64,
    pub semiring: Semiring,
    pub gates: Vec<Gate>,
}

#[derive(Clone, Debug)]
pub struct Measure {
    pub size: u128,
    pub max_row_degree: u64,
    pub max_col_degree: u64,
    pub alpha_volume: Interval,
}

impl Measure {
    pub fn degree(&self) -> u64 {
        self.max_row_degree.max(self.max_col_degree)
    }
}

impl Circuit {
    pub fn new(n_rows: u64, n_cols: u64, semiring: Semiring, gates: Vec<Gate>) -> Result<Self> {
        for (k, g) in gates.iter().enumerate() {
            if g.u.len != n_rows || g.v.len != n_cols {
                return Err(Error::Shape(format!(
                    "gate {k} has vectors of length {}/{}, circuit is {n_rows}x{n_cols}",
                    g.u.len, g.v.len
                )));
            }
        }
        Ok(Circuit { n_rows, n_cols, semiring, gates })
    }

    pub fn identity(n: u64, semiring: Semiring) -> Self {
        let gates = (0..n)
            .map(|i| Gate { u: SparseVector::ones(n, [i], semiring), v: SparseVector::ones(n, [i], semiring) })
            .collect();
        Circuit { n_rows: n, n_cols: n, semiring, gates }
    }

    /// One gate per row: u = e_i, v = row i.
    pub fn row_decomposition(m: &SparseMatrix) -> Self {
        let sr = m.semiring;
        let rows: BTreeMap<u64, Vec<(u64, Scalar)>> = m.rows_of().into_iter().collect();
        let gates = rows
            .into_iter()
            .map(|(i, row)| Gate {
                u: SparseVector::ones(m.n_rows, [i], sr),
                v: SparseVector::new(m.n_cols, row, sr).expect("row of a valid matrix"),
            })
            .collect();
        Circuit { n_rows: m.n_rows, n_cols: m.n_cols, semiring: sr, gates }
    }

    pub fn column_decomposition(m: &SparseMatrix) -> Self {
        Self::row_decomposition(&m.transpose()).transpose()
    }

    pub fn size(&self) -> u128 {
        self.gates.iter().map(|g| (g.u.nnz() + g.v.nnz()) as u128).sum()
    }

    pub fn gate_sizes(&self) -> Vec<(u128, u128)> {
        self.gates.iter().map(|g| (g.u.nnz() as u128, g.v.nnz() as u128)).collect()
    }

    pub fn row_degrees(&self) -> HashMap<u64, u64> {
        let mut m = HashMap::new();
        for g in &self.gates {
            for i in g.u.indices() {
                *m.entry(i).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn col_degrees(&self) -> HashMap<u64, u64> {
        let mut m = HashMap::new();
        for g in &self.gates {
            for j in g.v.indices() {
                *m.entry(j).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn transpose(&self) -> Circuit {
        let gates = self.gates.iter().map(|g| Gate { u: g.v.clone(), v: g.u.clone() }).collect();
        Circuit { n_rows: self.n_cols, n_cols: self.n_rows, semiring: self.semiring, gates }
    }

    pub fn convert(&self, to: Semiring) -> Result<Circuit> {
        let conv = |x: &SparseVector| -> Result<SparseVector> {
            let entries = x
                .entries()
                .iter()
                .map(|(i, v)| Ok((*i, to.convert(self.semiring, v)?)))
                .collect::<Result<Vec<_>>>()?;
            SparseVector::new(x.len, entries, to)
        };
        let gates = self.gates.iter().map(|g| Ok(Gate { u: conv(&g.u)?, v: conv(&g.v)? })).collect::<Result<_>>()?;
        Ok(Circuit { n_rows: self.n_rows, n_cols: self.n_cols, semiring: to, gates })
    }

    pub fn apply(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() as u64 != self.n_cols {
            return Err(Error::Shape(format!("vector length {} vs {} columns", x.len(), self.n_cols)));
        }
        check_cap(self.n_rows as u128)?;
        let sr = self.semiring;
        let mut y = vec![sr.zero(); self.n_rows as usize];
        for g in &self.gates {
            let mut s = sr.zero();
            for (j, v) in g.v.entries() {
                s = sr.add(&s, &sr.mul(v, &x[*j as usize]));
            }
            if sr.is_zero(&s) {
                continue;
            }
            for (i, u) in g.u.entries() {
                y[*i as usize] = sr.add(&y[*i as usize], &sr.mul(u, &s));
            }
        }
        Ok(y)
    }

    pub fn materialize(&self) -> Result<SparseMatrix> {
        let work: u128 = self.gates.iter().map(|g| (g.u.nnz() * g.v.nnz()) as u128).sum();
        check_cap(work)?;
        let sr = self.semiring;
        let mut acc: HashMap<(u64, u64), Scalar> = HashMap::with_capacity(work as usize);
        for g in &self.gates {
            for (i, a) in g.u.entries() {
                for (j, b) in g.v.entries() {
                    let t = sr.mul(a, b);
                    match acc.get_mut(&(*i, *j)) {
                        Some(e) => *e = sr.add(e, &t),
                        None => {
                            acc.insert((*i, *j), t);
                        }
                    }
                }
            }
        }
        SparseMatrix::from_entries(self.n_rows, self.n_cols, sr, acc.into_iter().map(|((i, j), v)| (i, j, v)).collect())
    }

    pub fn measure(&self, alpha: &Interval) -> Measure {
        let mut counts: BTreeMap<(u128, u128), u128> = BTreeMap::new();
        for g in &self.gates {
            *counts.entry((g.u.nnz() as u128, g.v.nnz() as u128)).or_insert(0) += 1;
        }
        Measure {
            size: self.size(),
            max_row_degree: self.row_degrees().values().copied().max().unwrap_or(0),
            max_col_degree: self.col_degrees().values().copied().max().unwrap_or(0),
            alpha_volume: alpha_volume_terms(counts.into_iter().map(|((a, b), m)| (a, b, m)), alpha),
        }
    }

    /// Circuit value at one entry.
    fn entry_with(&self, index: &HashMap<u64, Vec<usize>>, i: u64, j: u64) -> Scalar {
        let sr = self.semiring;
        let mut s = sr.zero();
        if let Some(gs) = index.get(&i) {
            for &g in gs {
                let gate = &self.gates[g];
                if let Some(b) = gate.v.get(j) {
                    let a = gate.u.get(i).expect("indexed row");
                    s = sr.add(&s, &sr.mul(a, b));
                }
            }
        }
        s
    }

    fn row_index(&self) -> HashMap<u64, Vec<usize>> {
        let mut idx: HashMap<u64, Vec<usize>> = HashMap::new();
        for (k, g) in self.gates.iter().enumerate() {
            for i in g.u.indices() {
                idx.entry(i).or_default().push(k);
            }
        }
        idx
    }
}

pub fn circuit_kron(c1: &Circuit, c2: &Circuit) -> Result<Circuit> {
    if c1.semiring != c2.semiring {
        return Err(Error::Semiring(format!("{} vs {}", c1.semiring, c2.semiring)));
    }
    let sr = c1.semiring;
    check_cap(c1.size() * c2.size())?;
    let mut gates = Vec::with_capacity(c1.gates.len() * c2.gates.len());
    for g1 in &c1.gates {
        for g2 in &c2.gates {
            gates.push(Gate { u: g1.u.kron(&g2.u, sr), v: g1.v.kron(&g2.v, sr) });
        }
    }
    Ok(Circuit { n_rows: c1.n_rows * c2.n_rows, n_cols: c1.n_cols * c2.n_cols, semiring: sr, gates })
}

pub fn circuit_power(c: &Circuit, k: u32) -> Result<Circuit> {
    let mut out = Circuit::identity(1, c.semiring);
    for _ in 0..k {
        out = circuit_kron(&out, c)?;
    }
    Ok(out)
}

pub fn circuit_sum(c1: &Circuit, c2: &Circuit) -> Result<Circuit> {
    if (c1.n_rows, c1.n_cols) != (c2.n_rows, c2.n_cols) {
        return Err(Error::Shape(format!("{}x{} vs {}x{}", c1.n_rows, c1.n_cols, c2.n_rows, c2.n_cols)));
    }
    if c1.semiring != c2.semiring {
        return Err(Error::Semiring(format!("{} vs {}", c1.semiring, c2.semiring)));
    }
    let mut gates = c1.gates.clone();
    gates.extend(c2.gates.iter().cloned());
    Ok(Circuit { n_rows: c1.n_rows, n_cols: c1.n_cols, semiring: c1.semiring, gates })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyScope {
    Exhaustive,
    Sampled { seed: u64, samples: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub row: u64,
    pub col: u64,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub mode: Semiring,
    pub scope: VerifyScope,
    pub checked: u64,
    pub counterexample: Option<Counterexample>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "PASS ({} mode, {} entries checked)", self.mode, self.checked),
            Some(c) => write!(
                f,
                "FAIL ({} mode) at row {} col {}: expected {}, circuit gives {}",
                self.mode, c.row, c.col, c.expected, c.got
            ),
        }
    }
}

/// Compares one entry under the semantics of `mode`. `want` is in the
/// target's natural semiring, `got` in the circuit's.
fn entry_ok(mode: Semiring, want: &Scalar, want_sr: Semiring, got: &Scalar, got_sr: Semiring) -> Result<bool> {
    match mode {
        Semiring::Or => Ok(want_sr.is_zero(want) == got_sr.is_zero(got)),
        Semiring::Par => {
            let w = Semiring::Par.convert(want_sr, want)?;
            let g = Semiring::Par.convert(got_sr, got)?;
            Ok(w == g)
        }
        _ => {
            let w = mode.convert(want_sr, want).or_else(|_| if want_sr == mode { Ok(want.clone()) } else { Err(()) });
            let g = mode.convert(got_sr, got);
            match (w, g) {
                (Ok(w), Ok(g)) => Ok(w == g),
                _ => Err(Error::Semiring(format!("cannot compare {want_sr} target with {got_sr} circuit in {mode}"))),
            }
        }
    }
}

/// Checks that `c` computes `target` under `mode`: entrywise equality for
/// fields, equal supports for OR, exact multiplicities for PAR.
pub fn verify(c: &Circuit, target: &MatrixSpec, mode: Semiring, scope: VerifyScope) -> Result<VerifyReport> {
    let (tr, tc) = target.dims();
    if (tr, tc) != (c.n_rows, c.n_cols) {
        return Err(Error::Shape(format!("circuit is {}x{}, target is {tr}x{tc}", c.n_rows, c.n_cols)));
    }
    let want_sr = target.natural_semiring();
    let fail = |i: u64, j: u64, w: &Scalar, g: &Scalar| Counterexample {
        row: i,
        col: j,
        expected: want_sr.format_value(w),
        got: c.semiring.format_value(g),
    };
    let mut report = VerifyReport { mode, scope, checked: 0, counterexample: None };
    match scope {
        VerifyScope::Exhaustive => {
            check_cap(tr as u128 * tc as u128)?;
            let got = c.materialize()?;
            let want = target.generate()?;
            // Walk both sorted entry lists; every key present in either is checked.
            let (a, b) = (want.entries(), got.entries());
            let (mut p, mut q) = (0, 0);
            let zw = want_sr.zero();
            let zg = c.semiring.zero();
            while p < a.len() || q < b.len() {
                let ka = a.get(p).map(|e| (e.0, e.1));
                let kb = b.get(q).map(|e| (e.0, e.1));
                let (key, w, g) = match (ka, kb) {
                    (Some(x), Some(y)) if x == y => {
                        p += 1;
                        q += 1;
                        (x, &a[p - 1].2, &b[q - 1].2)
                    }
                    (Some(x), Some(y)) if x < y => {
                        p += 1;
                        (x, &a[p - 1].2, &zg)
                    }
                    (Some(x), None) => {
                        p += 1;
                        (x, &a[p - 1].2, &zg)
                    }
                    (_, Some(y)) => {
                        q += 1;
                        (y, &zw, &b[q - 1].2)
                    }
                    (None, None) => unreachable!(),
                };
                report.checked += 1;
                if !entry_ok(mode, w, want_sr, g, c.semiring)? {
                    report.counterexample = Some(fail(key.0, key.1, w, g));
                    return Ok(report);
                }
            }
            report.checked = tr * tc;
        }
        VerifyScope::Sampled { seed, samples } => {
            let idx = c.row_index();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for k in 0..samples {
                let (i, j) = if k % 2 == 0 {
                    (rng.gen_range(0..tr), rng.gen_range(0..tc))
                } else {
                    sample_support(target, &mut rng)
                };
                let w = target.entry(i, j);
                let g = c.entry_with(&idx, i, j);
                report.checked += 1;
                if !entry_ok(mode, &w, want_sr, &g, c.semiring)? {
                    report.counterexample = Some(fail(i, j, &w, &g));
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// A random position biased towards the target's support where that is
/// cheap to describe.
fn sample_support(target: &MatrixSpec, rng: &mut ChaCha8Rng) -> (u64, u64) {
    let (tr, tc) = target.dims();
    match target {
        MatrixSpec::Disjointness(d) => {
            let (mut s, mut t) = (0u64, 0u64);
            for b in 0..*d {
                match rng.gen_range(0..3) {
                    0 => s |= 1 << b,
                    1 => t |= 1 << b,
                    _ => {}
                }
            }
            (s, t)
        }
        MatrixSpec::Identity(n) => {
            let i = rng.gen_range(0..*n);
            (i, i)
        }
        _ => (rng.gen_range(0..tr), rng.gen_range(0..tc)),
    }
}

/// Yates' depth-2 circuit for M^{⊗2}: U = M ⊗ I, V = (I ⊗ M)^T, one gate
/// per (g1, g2) in [n_cols] × [n_rows].
pub fn yates_pair(m: &SparseMatrix) -> Circuit {
    let sr = m.semiring;
    let (r, c) = (m.n_rows, m.n_cols);
    let cols = m.transpose().rows_of();
    let rows = m.rows_of();
    let mut gates = Vec::new();
    for g1 in 0..c {
        for g2 in 0..r {
            let u: Vec<(u64, Scalar)> =
                cols.get(&g1).into_iter().flatten().map(|(i1, v)| (i1 * r + g2, v.clone())).collect();
            let v: Vec<(u64, Scalar)> =
                rows.get(&g2).into_iter().flatten().map(|(j2, w)| (g1 * c + j2, w.clone())).collect();
            if u.is_empty() || v.is_empty() {
                continue;
            }
            gates.push(Gate {
                u: SparseVector::new(r * r, u, sr).expect("in range"),
                v: SparseVector::new(c * c, v, sr).expect("in range"),
            });
        }
    }
    Circuit { n_rows: r * r, n_cols: c * c, semiring: sr, gates }
}

/// The four-rectangle partition of R^{⊗2}: all rows × {∅}, {∅} × the
/// other three columns, and the two singletons {1}×{0}, {0}×{1}.
pub fn disjointness_pair_partition(sr: Semiring) -> Circuit {
    let g = |rows: &[u64], cols: &[u64]| Gate {
        u: SparseVector::ones(4, rows.iter().copied(), sr),
        v: SparseVector::ones(4, cols.iter().copied(), sr),
    };
    let gates = vec![g(&[0, 1, 2, 3], &[0]), g(&[0], &[1, 2, 3]), g(&[1], &[2]), g(&[2], &[1])];
    Circuit { n_rows: 4, n_cols: 4, semiring: sr, gates }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[Scalar]) -> Vec<i64> {
        v.iter()
            .map(|s| match s {
                Scalar::Rat(q) => i64::try_from(q.to_integer()).unwrap(),
                Scalar::Count(c) => *c as i64,
                Scalar::Bool(b) => *b as i64,
                o => panic!("{o:?}"),
            })
            .collect()
    }

    #[test]
    fn pair_partition_apply_and_degrees() {
        let c = disjointness_pair_partition(Semiring::Rational);
        let x: Vec<Scalar> = (0..4).map(|_| Semiring::Rational.one()).collect();
        assert_eq!(ints(&c.apply(&x).unwrap()), vec![4, 2, 2, 1]);
        let rd = c.row_degrees();
        let cd = c.col_degrees();
        assert_eq!((0..4).map(|i| rd[&i]).collect::<Vec<_>>(), vec![2, 2, 2, 1]);
        assert_eq!((0..4).map(|i| cd[&i]).collect::<Vec<_>>(), vec![1, 2, 2, 1]);
    }

    #[test]
    fn pair_partition_is_exact() {
        let c = disjointness_pair_partition(Semiring::Par);
        let r = verify(&c, &MatrixSpec::Disjointness(2), Semiring::Par, VerifyScope::Exhaustive).unwrap();
        assert!(r.passed(), "{r}");
        let m = c.materialize().unwrap();
        assert!(m.entries().iter().all(|e| e.2 == Scalar::Count(1)));
        let f = disjointness_pair_partition(Semiring::Rational).materialize().unwrap();
        assert_eq!(f, MatrixSpec::Disjointness(2).generate().unwrap());
    }

    #[test]
    fn missing_gate_is_located() {
        let mut c = disjointness_pair_partition(Semiring::Par);
        c.gates.pop();
        let r = verify(&c, &MatrixSpec::Disjointness(2), Semiring::Par, VerifyScope::Exhaustive).unwrap();
        let ce = r.counterexample.unwrap();
        assert_eq!((ce.row, ce.col), (2, 1));
    }

    #[test]
    fn kron_degrees_multiply() {
        let c = disjointness_pair_partition(Semiring::Par);
        let cc = circuit_kron(&c, &c).unwrap();
        assert_eq!(cc.gates.len(), 16);
        let r1 = c.row_degrees();
        let r2 = cc.row_degrees();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r2[&(i * 4 + j)], r1[&i] * r1[&j]);
            }
        }
        let rep = verify(&cc, &MatrixSpec::Disjointness(4), Semiring::Par, VerifyScope::Exhaustive).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn unit_kron_is_isomorphic() {
        let c = disjointness_pair_partition(Semiring::Rational);
        let one = Circuit::identity(1, Semiring::Rational);
        assert_eq!(circuit_kron(&c, &one).unwrap(), c);
    }

    #[test]
    fn sum_adds_sizes() {
        let c = disjointness_pair_partition(Semiring::Rational);
        let a = Circuit { gates: vec![c.gates[0].clone()], ..c.clone() };
        let b = Circuit { gates: vec![c.gates[1].clone()], ..c.clone() };
        let s = circuit_sum(&a, &b).unwrap();
        assert_eq!(s.gates.len(), 2);
        assert_eq!(s.size(), a.size() + b.size());
    }

    #[test]
    fn empty_circuit_is_zero() {
        let c = Circuit::new(3, 2, Semiring::Rational, vec![]).unwrap();
        assert_eq!(c.materialize().unwrap().nnz(), 0);
    }

    #[test]
    fn measure_pair_partition() {
        let c = disjointness_pair_partition(Semiring::Par);
        let m = c.measure(&Interval::from_ratio(1, 2));
        // gate sizes (4,1),(1,3),(1,1),(1,1)
        let want = Interval::from_u128(3).sqrt().add(&Interval::from_u128(4));
        assert!(m.alpha_volume.overlaps(&want) && m.alpha_volume.width() < 1e-40);
        assert_eq!(m.size, 13);
        assert!(c.measure(&Interval::zero()).alpha_volume.contains(6.0));
        assert!(c.measure(&Interval::one()).alpha_volume.contains(7.0));
    }

    #[test]
    fn yates_for_disjointness() {
        let r1 = MatrixSpec::Disjointness(1).generate_in(Semiring::Par).unwrap();
        let y = yates_pair(&r1);
        let rep = verify(&y, &MatrixSpec::Disjointness(2), Semiring::Par, VerifyScope::Exhaustive).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(y.size(), 12);
        let f = MatrixSpec::Dft { m: 3, d: 1 }.generate().unwrap();
        let y = yates_pair(&f);
        let rep = verify(&y, &MatrixSpec::Dft { m: 3, d: 2 }, Semiring::Cyclotomic(3), VerifyScope::Exhaustive).unwrap();
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn or_covering_apply() {
        // Two overlapping rectangles covering R^{⊗2}'s first row and column.
        let sr = Semiring::Or;
        let g = |r: &[u64], c: &[u64]| Gate { u: SparseVector::ones(4, r.iter().copied(), sr), v: SparseVector::ones(4, c.iter().copied(), sr) };
        let c = Circuit::new(4, 4, sr, vec![g(&[0, 1, 2, 3], &[0]), g(&[0], &[0, 1, 2, 3]), g(&[1], &[2]), g(&[2], &[1])]).unwrap();
        let rep = verify(&c, &MatrixSpec::Disjointness(2), Semiring::Or, VerifyScope::Exhaustive).unwrap();
        assert!(rep.passed());
        let par = verify(&c.convert(Semiring::Par).unwrap(), &MatrixSpec::Disjointness(2), Semiring::Par, VerifyScope::Exhaustive).unwrap();
        assert!(!par.passed());
        let x: Vec<Scalar> = [0, 0, 1, 0].iter().map(|&b| sr.from_i64(b)).collect();
        let dense = MatrixSpec::Disjointness(2).generate_in(sr).unwrap();
        assert_eq!(c.apply(&x).unwrap(), dense.mul_vec(&x).unwrap());
    }
}
