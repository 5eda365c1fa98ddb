use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::combinatorics::{binom, weight_subsets};
use crate::error::{Error, Result};
use crate::interval::{alpha_volume_terms, Interval};
use crate::matrix::{check_cap, SparseVector};
use crate::semiring::Semiring;

/// One side of a rectangle: subsets of [d] given either by listing them
/// or by a predicate `must ⊆ X`, `X ∩ forbid = ∅`, `min_w ≤ |X| ≤ max_w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    List(Vec<u64>),
    Pred { must: u64, forbid: u64, min_w: u32, max_w: u32 },
}

impl Side {
    pub fn single(x: u64) -> Side {
        Side::List(vec![x])
    }

    pub fn avoiding(forbid: u64, min_w: u32, d: u32) -> Side {
        Side::Pred { must: 0, forbid, min_w, max_w: d }
    }

    pub fn count(&self, d: u32) -> u128 {
        match self {
            Side::List(v) => v.len() as u128,
            Side::Pred { must, forbid, min_w, max_w } => {
                if must & forbid != 0 {
                    return 0;
                }
                let m = must.count_ones();
                let free = d - (must | forbid).count_ones();
                let lo = min_w.saturating_sub(m);
                let hi = max_w.saturating_sub(m).min(free);
                if *max_w < m || lo > hi {
                    return 0;
                }
                (lo..=hi).map(|k| binom(free, k)).sum()
            }
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        match self {
            Side::List(v) => v.binary_search(&x).is_ok(),
            Side::Pred { must, forbid, min_w, max_w } => {
                let w = x.count_ones();
                x & must == *must && x & forbid == 0 && w >= *min_w && w <= *max_w
            }
        }
    }

    /// Members in increasing order.
    pub fn members(&self, d: u32) -> Vec<u64> {
        match self {
            Side::List(v) => v.clone(),
            Side::Pred { must, forbid, min_w, max_w } => {
                let universe = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
                let free = universe & !(must | forbid);
                let nfree = free.count_ones();
                let m = must.count_ones();
                let mut out = Vec::new();
                if must & forbid != 0 || *max_w < m {
                    return out;
                }
                for k in min_w.saturating_sub(m)..=max_w.saturating_sub(m).min(nfree) {
                    out.extend(weight_subsets(nfree, k).map(|x| must | crate::combinatorics::deposit(x, free)));
                }
                out.sort_unstable();
                out
            }
        }
    }

    fn normalized(mut self) -> Side {
        if let Side::List(v) = &mut self {
            v.sort_unstable();
            v.dedup();
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub rows: Side,
    pub cols: Side,
}

impl Rect {
    pub fn new(rows: Side, cols: Side) -> Rect {
        Rect { rows: rows.normalized(), cols: cols.normalized() }
    }

    pub fn transpose(&self) -> Rect {
        Rect { rows: self.cols.clone(), cols: self.rows.clone() }
    }

    pub fn shape(&self, d: u32) -> (u128, u128) {
        (self.rows.count(d), self.cols.count(d))
    }

    pub fn contains(&self, s: u64, t: u64) -> bool {
        self.rows.contains(s) && self.cols.contains(t)
    }

    /// Whether some (S, T) in the rectangle has S ∩ T ≠ ∅. Exact for
    /// list×list and list×predicate sides.
    pub fn has_intersecting_pair(&self, d: u32) -> Result<Option<(u64, u64)>> {
        match (&self.rows, &self.cols) {
            (Side::List(a), Side::List(b)) => {
                for &s in a {
                    for &t in b {
                        if s & t != 0 {
                            return Ok(Some((s, t)));
                        }
                    }
                }
                Ok(None)
            }
            (Side::List(a), p @ Side::Pred { .. }) => Ok(list_vs_pred(a, p, d)),
            (p @ Side::Pred { .. }, Side::List(b)) => Ok(list_vs_pred(b, p, d).map(|(t, s)| (s, t))),
            _ => Err(Error::Invalid("rectangle with two predicate sides cannot be checked structurally".into())),
        }
    }
}

fn list_vs_pred(list: &[u64], p: &Side, d: u32) -> Option<(u64, u64)> {
    let Side::Pred { must, forbid, min_w, max_w } = *p else { unreachable!() };
    if p.count(d) == 0 {
        return None;
    }
    for &s in list {
        let mut risky = s & !forbid;
        while risky != 0 {
            let e = risky & risky.wrapping_neg();
            risky ^= e;
            let with_e = Side::Pred { must: must | e, forbid, min_w, max_w };
            if with_e.count(d) > 0 {
                let t = with_e.members(d)[0];
                return Some((s, t));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectangleFamily {
    pub d: u32,
    pub rects: Vec<Rect>,
}

impl RectangleFamily {
    pub fn new(d: u32, rects: Vec<Rect>) -> Self {
        RectangleFamily { d, rects }
    }

    pub fn transpose(&self) -> Self {
        RectangleFamily { d: self.d, rects: self.rects.iter().map(Rect::transpose).collect() }
    }

    pub fn shapes(&self) -> Vec<(u128, u128)> {
        self.rects.iter().map(|r| r.shape(self.d)).collect()
    }

    /// Σ |rows|·|cols|; equals 3^d for a partition of R^{⊗d}.
    pub fn covered(&self) -> u128 {
        self.shapes().iter().map(|(a, b)| a * b).sum()
    }

    /// (a, b, multiplicity) over distinct rectangle shapes.
    pub fn shape_histogram(&self) -> Vec<(u128, u128, u128)> {
        let mut h: BTreeMap<(u128, u128), u128> = BTreeMap::new();
        for s in self.shapes() {
            *h.entry(s).or_insert(0) += 1;
        }
        h.into_iter().map(|((a, b), m)| (a, b, m)).collect()
    }

    /// α-volume counted from the rectangles themselves.
    pub fn alpha_volume(&self, alpha: &Interval) -> Interval {
        alpha_volume_terms(self.shape_histogram(), alpha)
    }

    /// Lists every side explicitly.
    pub fn expanded(&self) -> Result<Self> {
        let total: u128 = self.shapes().iter().map(|(a, b)| a + b).sum();
        check_cap(total)?;
        let rects = self
            .rects
            .iter()
            .map(|r| Rect { rows: Side::List(r.rows.members(self.d)), cols: Side::List(r.cols.members(self.d)) })
            .collect();
        Ok(RectangleFamily { d: self.d, rects })
    }

    pub fn to_circuit(&self, sr: Semiring) -> Result<Circuit> {
        let total: u128 = self.shapes().iter().map(|(a, b)| a + b).sum();
        check_cap(total)?;
        let n = 1u64 << self.d;
        let gates = self
            .rects
            .iter()
            .map(|r| Gate {
                u: SparseVector::ones(n, r.rows.members(self.d), sr),
                v: SparseVector::ones(n, r.cols.members(self.d), sr),
            })
            .filter(|g| g.u.nnz() > 0 && g.v.nnz() > 0)
            .collect();
        Circuit::new(n, n, sr, gates)
    }

    /// Reads a 0/1 circuit back as rectangles.
    pub fn from_circuit(d: u32, c: &Circuit) -> Result<Self> {
        if c.n_rows != 1 << d || c.n_cols != 1 << d {
            return Err(Error::Shape(format!("circuit is not over subsets of [{d}]")));
        }
        let one = c.semiring.one();
        let mut rects = Vec::with_capacity(c.gates.len());
        for g in &c.gates {
            if g.u.entries().iter().chain(g.v.entries()).any(|e| e.1 != one) {
                return Err(Error::Invalid("circuit has non-unit coefficients".into()));
            }
            rects.push(Rect::new(Side::List(g.u.indices().collect()), Side::List(g.v.indices().collect())));
        }
        Ok(RectangleFamily { d, rects })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Exhaustive,
    CountingSample { seed: u64, samples: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionFailure {
    /// Rectangle `rect` contains the intersecting pair (row, col).
    Intersecting { rect: usize, row: u64, col: u64 },
    /// A disjoint pair covered the wrong number of times.
    Multiplicity { row: u64, col: u64, count: u64 },
    /// Σ|rows|·|cols| differs from 3^d.
    Count { covered: u128, expected: u128 },
}

#[derive(Clone, Debug)]
pub struct PartitionReport {
    pub d: u32,
    pub mode: ValidationMode,
    pub covered: u128,
    pub checked: u64,
    pub failure: Option<PartitionFailure>,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for PartitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "PASS d={} covered={} (3^d={}) pairs checked={}", self.d, self.covered, 3u128.pow(self.d), self.checked),
            Some(PartitionFailure::Intersecting { rect, row, col }) => {
                write!(f, "FAIL rectangle {rect} contains intersecting pair row {row} col {col}")
            }
            Some(PartitionFailure::Multiplicity { row, col, count }) => {
                write!(f, "FAIL pair row {row} col {col} covered {count} times")
            }
            Some(PartitionFailure::Count { covered, expected }) => {
                write!(f, "FAIL covered {covered} entries, expected {expected}")
            }
        }
    }
}

/// Base-3 code of a disjoint pair: digit 1 for S, 2 for T.
fn pair_code(s: u64, t: u64, pow3: &[u64]) -> usize {
    let mut code = 0u64;
    let (mut s, mut t) = (s, t);
    while s != 0 {
        let b = s.trailing_zeros();
        code += pow3[b as usize];
        s &= s - 1;
    }
    while t != 0 {
        let b = t.trailing_zeros();
        code += 2 * pow3[b as usize];
        t &= t - 1;
    }
    code as usize
}

fn pair_decode(mut code: u64, d: u32) -> (u64, u64) {
    let (mut s, mut t) = (0u64, 0u64);
    for b in 0..d {
        match code % 3 {
            1 => s |= 1 << b,
            2 => t |= 1 << b,
            _ => {}
        }
        code /= 3;
    }
    (s, t)
}

pub fn validate_partition(fam: &RectangleFamily, mode: ValidationMode) -> Result<PartitionReport> {
    let d = fam.d;
    let expected = 3u128.pow(d);
    let covered = fam.covered();
    let mut report = PartitionReport { d, mode, covered, checked: 0, failure: None };
    for (k, r) in fam.rects.iter().enumerate() {
        if let Some((s, t)) = r.has_intersecting_pair(d)? {
            report.failure = Some(PartitionFailure::Intersecting { rect: k, row: s, col: t });
            return Ok(report);
        }
    }
    match mode {
        ValidationMode::Exhaustive => {
            check_cap(expected)?;
            let pow3: Vec<u64> = (0..d).map(|b| 3u64.pow(b)).collect();
            let mut counts = vec![0u8; expected as usize];
            for r in &fam.rects {
                let rows = r.rows.members(d);
                let cols = r.cols.members(d);
                for &s in &rows {
                    for &t in &cols {
                        let c = &mut counts[pair_code(s, t, &pow3)];
                        *c = c.saturating_add(1);
                    }
                }
            }
            report.checked = expected as u64;
            if let Some((code, &c)) = counts.iter().enumerate().find(|(_, &c)| c != 1) {
                let (s, t) = pair_decode(code as u64, d);
                report.failure = Some(PartitionFailure::Multiplicity { row: s, col: t, count: c as u64 });
            }
        }
        ValidationMode::CountingSample { seed, samples } => {
            if covered != expected {
                report.failure = Some(PartitionFailure::Count { covered, expected });
                return Ok(report);
            }
            let index = SideIndex::build(fam);
            const CHUNK: u64 = 1 << 14;
            let chunks = samples.div_ceil(CHUNK);
            let bad = (0..chunks).into_par_iter().find_map_first(|ch| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(ch);
                let n = CHUNK.min(samples - ch * CHUNK);
                for _ in 0..n {
                    let (mut s, mut t) = (0u64, 0u64);
                    for b in 0..d {
                        match rng.gen_range(0..3) {
                            0 => s |= 1 << b,
                            1 => t |= 1 << b,
                            _ => {}
                        }
                    }
                    let c = index.multiplicity(fam, s, t);
                    if c != 1 {
                        return Some(PartitionFailure::Multiplicity { row: s, col: t, count: c });
                    }
                }
                None
            });
            report.checked = samples;
            report.failure = bad;
        }
    }
    Ok(report)
}

/// Finds the rectangles containing a pair through whichever side is listed.
struct SideIndex {
    by_row: HashMap<u64, Vec<u32>>,
    by_col: HashMap<u64, Vec<u32>>,
    other: Vec<u32>,
}

impl SideIndex {
    fn build(fam: &RectangleFamily) -> Self {
        let mut ix = SideIndex { by_row: HashMap::new(), by_col: HashMap::new(), other: Vec::new() };
        for (k, r) in fam.rects.iter().enumerate() {
            match (&r.rows, &r.cols) {
                (Side::List(a), _) => a.iter().for_each(|s| ix.by_row.entry(*s).or_default().push(k as u32)),
                (_, Side::List(b)) => b.iter().for_each(|t| ix.by_col.entry(*t).or_default().push(k as u32)),
                _ => ix.other.push(k as u32),
            }
        }
        ix
    }

    fn multiplicity(&self, fam: &RectangleFamily, s: u64, t: u64) -> u64 {
        let mut c = 0;
        for &k in self.by_row.get(&s).into_iter().flatten() {
            c += fam.rects[k as usize].cols.contains(t) as u64;
        }
        for &k in self.by_col.get(&t).into_iter().flatten() {
            c += fam.rects[k as usize].rows.contains(s) as u64;
        }
        for &k in &self.other {
            c += fam.rects[k as usize].contains(s, t) as u64;
        }
        c
    }
}
