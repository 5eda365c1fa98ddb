use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{circuit_power, Circuit, Gate};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::matrix::{check_cap, MatrixSpec, SparseVector};
use crate::semiring::Semiring;

use super::density::DensityPoly;

pub const RETRY_LIMIT: usize = 64;

/// Groups of permutations with coefficients that fix the target matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// S_n permuting coordinates of subset masks, the same on rows and
    /// columns; fixes R^{⊗n} and every weight class.
    Coordinates { n: u32 },
    /// Z_2^d × Z_2^d translations with signs; fixes H^{⊗d}.
    HadamardTranslations { d: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupElement {
    Perm(Vec<u32>),
    Translate { k: u64, h: u64 },
}

fn dot_parity(a: u64, b: u64) -> i64 {
    if (a & b).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl Symmetry {
    pub fn sample(&self, rng: &mut impl Rng) -> GroupElement {
        match self {
            Symmetry::Coordinates { n } => {
                let mut p: Vec<u32> = (0..*n).collect();
                p.shuffle(rng);
                GroupElement::Perm(p)
            }
            Symmetry::HadamardTranslations { d } => {
                let m = (1u64 << d) - 1;
                GroupElement::Translate { k: rng.gen::<u64>() & m, h: rng.gen::<u64>() & m }
            }
        }
    }

    /// g·x and the coefficient a_x with A_g e_x = a_x e_{g·x}.
    pub fn act_row(&self, g: &GroupElement, x: u64) -> (u64, i64) {
        match g {
            GroupElement::Perm(p) => (permute(p, x), 1),
            GroupElement::Translate { k, h } => (x ^ k, dot_parity(x, *h) * dot_parity(*k, *h)),
        }
    }

    pub fn act_col(&self, g: &GroupElement, y: u64) -> (u64, i64) {
        match g {
            GroupElement::Perm(p) => (permute(p, y), 1),
            GroupElement::Translate { k, h } => (y ^ h, dot_parity(*k, y)),
        }
    }

    fn signed(&self) -> bool {
        matches!(self, Symmetry::HadamardTranslations { .. })
    }
}

fn permute(p: &[u32], x: u64) -> u64 {
    let mut out = 0;
    let mut y = x;
    while y != 0 {
        let i = y.trailing_zeros();
        out |= 1 << p[i as usize];
        y &= y - 1;
    }
    out
}

/// F_{x,y} ≤ 2^{log(xy)/log(1/3ε) + 1} − 1, enclosed.
pub fn copy_bound(x: u64, y: u64, eps: f64) -> Interval {
    let xy = Interval::from_u128(x as u128 * y as u128);
    let base = Interval::one().div(&Interval::point(eps).mul(&Interval::from_u128(3)));
    xy.log2().div(&base.log2()).add(&Interval::one()).exp2().sub(&Interval::one())
}

#[derive(Clone, Debug)]
pub struct HoleFix {
    pub circuit: Circuit,
    pub copies: usize,
    /// Total group elements drawn, including rejected ones.
    pub draws: usize,
    /// Largest copy count the recursion bound allows.
    pub bound: u64,
}

fn map_vector(v: &SparseVector, sr: Semiring, keep: &HashSet<u64>, act: impl Fn(u64) -> (u64, i64)) -> Result<SparseVector> {
    let mut e = Vec::new();
    for (i, val) in v.entries() {
        let (j, a) = act(*i);
        if keep.contains(&j) {
            let val = if a == 1 { val.clone() } else { sr.mul(&sr.from_i64(a), val) };
            e.push((j, val));
        }
    }
    SparseVector::new(v.len, e, sr)
}

/// Rebuilds a circuit for M restricted to `rows × cols` from `broken`,
/// which computes it except on the hole rows and columns. Each piece of the
/// recursion is covered by (g·broken) restricted to S' × T' with
/// S' = S ∖ g·S0 and T' = T ∖ g·T0, for a random g meeting the overlap
/// conditions |g·S0 ∩ S| < 3ε|S| and |g·T0 ∩ T| < 3ε|T|.
#[allow(clippy::too_many_arguments)]
pub fn hole_fix(
    broken: &Circuit,
    rows: &[u64],
    cols: &[u64],
    row_holes: &[u64],
    col_holes: &[u64],
    sym: &Symmetry,
    eps: f64,
    seed: u64,
) -> Result<HoleFix> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::Invalid(format!("ε must lie in (0, 1/4], got {eps}")));
    }
    if sym.signed() && !broken.semiring.is_field() {
        return Err(Error::Semiring(format!("signed symmetry needs a field, circuit is over {}", broken.semiring)));
    }
    let (xs, ys): (HashSet<u64>, HashSet<u64>) = (rows.iter().copied().collect(), cols.iter().copied().collect());
    if row_holes.iter().any(|x| !xs.contains(x)) || col_holes.iter().any(|y| !ys.contains(y)) {
        return Err(Error::Invalid("holes must lie inside the row and column sets".into()));
    }
    if row_holes.len() as f64 > eps * rows.len() as f64 || col_holes.len() as f64 > eps * cols.len() as f64 {
        return Err(Error::Invalid(format!(
            "{} row and {} column holes exceed the ε = {eps} budget",
            row_holes.len(),
            col_holes.len()
        )));
    }
    let bound = copy_bound(rows.len() as u64, cols.len() as u64, eps).hi().floor() as u64;
    let sr = broken.semiring;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    let (mut copies, mut draws) = (0, 0);
    if row_holes.is_empty() && col_holes.is_empty() {
        return Ok(HoleFix { circuit: broken.clone(), copies: 1, draws: 0, bound });
    }
    let mut stack: Vec<(Vec<u64>, Vec<u64>)> = vec![(rows.to_vec(), cols.to_vec())];
    while let Some((s, t)) = stack.pop() {
        if s.is_empty() || t.is_empty() {
            continue;
        }
        let mut found = None;
        for _ in 0..RETRY_LIMIT {
            draws += 1;
            let g = sym.sample(&mut rng);
            let gs: HashSet<u64> = row_holes.iter().map(|&x| sym.act_row(&g, x).0).collect();
            let gt: HashSet<u64> = col_holes.iter().map(|&y| sym.act_col(&g, y).0).collect();
            let hit_s = s.iter().filter(|x| gs.contains(x)).count();
            let hit_t = t.iter().filter(|y| gt.contains(y)).count();
            if (hit_s as f64) < 3.0 * eps * s.len() as f64 && (hit_t as f64) < 3.0 * eps * t.len() as f64 {
                found = Some((g, gs, gt));
                break;
            }
        }
        let (g, gs, gt) = found.ok_or(Error::RetryLimit(RETRY_LIMIT))?;
        if rows.iter().any(|&x| !xs.contains(&sym.act_row(&g, x).0)) || cols.iter().any(|&y| !ys.contains(&sym.act_col(&g, y).0)) {
            return Err(Error::Invalid("symmetry does not preserve the row and column sets".into()));
        }
        let (s1, s0): (Vec<u64>, Vec<u64>) = s.iter().partition(|x| !gs.contains(x));
        let (t1, t0): (Vec<u64>, Vec<u64>) = t.iter().partition(|y| !gt.contains(y));
        if !s1.is_empty() && !t1.is_empty() {
            copies += 1;
            let keep_s: HashSet<u64> = s1.iter().copied().collect();
            let keep_t: HashSet<u64> = t1.iter().copied().collect();
            for gate in &broken.gates {
                let u = map_vector(&gate.u, sr, &keep_s, |x| sym.act_row(&g, x))?;
                if u.nnz() == 0 {
                    continue;
                }
                let v = map_vector(&gate.v, sr, &keep_t, |y| sym.act_col(&g, y))?;
                if v.nnz() > 0 {
                    gates.push(Gate { u, v });
                }
            }
        }
        stack.push((s1, t0));
        stack.push((s0, t));
    }
    Ok(HoleFix { circuit: Circuit::new(broken.n_rows, broken.n_cols, sr, gates)?, copies, draws, bound })
}

/// Restricts `c` to `rows × cols` and additionally removes a random
/// `frac` share of those rows and columns. Returns the broken circuit and
/// the hole sets.
pub fn punch_holes(c: &Circuit, rows: &[u64], cols: &[u64], frac: f64, seed: u64) -> Result<(Circuit, Vec<u64>, Vec<u64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |v: &[u64]| {
        let k = (frac * v.len() as f64).floor() as usize;
        let mut h: Vec<u64> = v.choose_multiple(&mut rng, k).copied().collect();
        h.sort_unstable();
        h
    };
    let (s0, t0) = (pick(rows), pick(cols));
    let broken = restrict(c, rows, cols, &s0, &t0)?;
    Ok((broken, s0, t0))
}

fn restrict(c: &Circuit, rows: &[u64], cols: &[u64], s0: &[u64], t0: &[u64]) -> Result<Circuit> {
    let hs: HashSet<u64> = s0.iter().copied().collect();
    let ht: HashSet<u64> = t0.iter().copied().collect();
    let keep_r: HashSet<u64> = rows.iter().copied().filter(|x| !hs.contains(x)).collect();
    let keep_c: HashSet<u64> = cols.iter().copied().filter(|y| !ht.contains(y)).collect();
    let gates = c
        .gates
        .iter()
        .filter_map(|g| {
            let u = g.u.restrict(|i| keep_r.contains(&i));
            let v = g.v.restrict(|j| keep_c.contains(&j));
            (u.nnz() > 0 && v.nnz() > 0).then_some(Gate { u, v })
        })
        .collect();
    Circuit::new(c.n_rows, c.n_cols, c.semiring, gates)
}

/// Checks that `c` equals `target` on `rows × cols` and vanishes elsewhere,
/// comparing in `mode` (supports for OR, counts for PAR, values otherwise).
pub fn verify_restricted(c: &Circuit, target: &MatrixSpec, rows: &[u64], cols: &[u64], mode: Semiring) -> Result<bool> {
    check_cap(rows.len() as u128 * cols.len() as u128)?;
    let m = c.materialize()?;
    let (rs, cs): (HashSet<u64>, HashSet<u64>) = (rows.iter().copied().collect(), cols.iter().copied().collect());
    let sr = c.semiring;
    let want_sr = target.natural_semiring();
    let same = |got: &crate::semiring::Scalar, want: &crate::semiring::Scalar| -> Result<bool> {
        Ok(match mode {
            Semiring::Or => !sr.is_zero(got) == !want_sr.is_zero(want),
            _ => mode.convert(sr, got)? == mode.convert(want_sr, want)?,
        })
    };
    let mut seen = 0usize;
    for (i, j, v) in m.entries() {
        if !rs.contains(i) || !cs.contains(j) {
            return Ok(false);
        }
        if !same(v, &target.entry(*i, *j))? {
            return Ok(false);
        }
        seen += 1;
    }
    // entries the circuit leaves at zero must be zero in the target
    let mut nonzero = 0usize;
    for &i in rows {
        for &j in cols {
            if !want_sr.is_zero(&target.entry(i, j)) {
                nonzero += 1;
            }
        }
    }
    Ok(nonzero == seen)
}

#[derive(Clone, Debug)]
pub struct PruneResult {
    pub broken: Circuit,
    pub rows: Vec<u64>,
    pub cols: Vec<u64>,
    pub row_holes: Vec<u64>,
    pub col_holes: Vec<u64>,
    /// Per-block log2-degree cut-offs, 𝒟(p) + ε.
    pub row_cutoff: f64,
    pub col_cutoff: f64,
}

impl PruneResult {
    pub fn row_hole_fraction(&self) -> f64 {
        self.row_holes.len() as f64 / self.rows.len().max(1) as f64
    }

    pub fn col_hole_fraction(&self) -> f64 {
        self.col_holes.len() as f64 / self.cols.len().max(1) as f64
    }
}

fn class_members(base: u64, n: u32, orbit: &[usize], ty: &[u32]) -> Result<Vec<u64>> {
    let total = (base as u128).checked_pow(n).ok_or(Error::CapExceeded { needed: u128::MAX, cap: 0 })?;
    check_cap(total)?;
    Ok((0..total as u64)
        .filter(|&x| {
            let mut t = vec![0u32; ty.len()];
            let mut y = x;
            for _ in 0..n {
                t[orbit[(y % base) as usize]] += 1;
                y /= base;
            }
            t == ty
        })
        .collect())
}

fn power_degree(deg: &std::collections::HashMap<u64, u64>, x: u64, block: u64, k: u32) -> u64 {
    let mut y = x;
    let mut r = 1u64;
    for _ in 0..k {
        r = r.saturating_mul(deg.get(&(y % block)).copied().unwrap_or(0));
        y /= block;
    }
    r
}

/// Typical-degree pruning of C^{⊗k} on one type class. `c` computes
/// M^{⊗level} with M of shape `base`; the class has the given orbit counts
/// over N = level·k coordinates. Rows whose log2 degree per block exceeds
/// 𝒟^r(type/N) + ε become holes, and likewise for columns.
#[allow(clippy::too_many_arguments)]
pub fn prune_atypical(
    c: &Circuit,
    base: (u64, u64),
    level: u32,
    k: u32,
    orbits: (&[usize], &[usize]),
    types: (&[u32], &[u32]),
    eps: f64,
) -> Result<PruneResult> {
    let n = level * k;
    for ty in [types.0, types.1] {
        if ty.iter().sum::<u32>() != n {
            return Err(Error::Invalid(format!("type {ty:?} does not sum to N = {n}")));
        }
    }
    let dr = DensityPoly::rows(c, base.0, level, orbits.0)?;
    let dc = DensityPoly::cols(c, base.1, level, orbits.1)?;
    let frac = |ty: &[u32]| ty.iter().map(|&i| i as f64 / n as f64).collect::<Vec<_>>();
    let row_cutoff = dr.eval(&frac(types.0)) + eps;
    let col_cutoff = dc.eval(&frac(types.1)) + eps;
    let rows = class_members(base.0, n, orbits.0, types.0)?;
    let cols = class_members(base.1, n, orbits.1, types.1)?;
    let (rd, cd) = (c.row_degrees(), c.col_degrees());
    let (br, bc) = (base.0.pow(level), base.1.pow(level));
    let atypical = |r: u64, cut: f64| r > 1 && (r as f64).log2() / k as f64 > cut + 1e-12;
    let row_holes: Vec<u64> = rows.iter().copied().filter(|&x| atypical(power_degree(&rd, x, br, k), row_cutoff)).collect();
    let col_holes: Vec<u64> = cols.iter().copied().filter(|&y| atypical(power_degree(&cd, y, bc, k), col_cutoff)).collect();
    let full = circuit_power(c, k)?;
    let broken = restrict(&full, &rows, &cols, &row_holes, &col_holes)?;
    Ok(PruneResult { broken, rows, cols, row_holes, col_holes, row_cutoff, col_cutoff })
}
