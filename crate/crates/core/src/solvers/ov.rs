use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::circuit::{disjointness_pair_partition, yates_pair, Circuit};
use crate::combinatorics::{binom, deposit, supersets_of_weight, weight_subsets};
use crate::degree::{cover_size, hole_fix, prune_atypical, random_cover, CoverCheck, CoverOptions, CoveringPlan, Symmetry, WeightType};
use crate::error::{Error, Result};
use crate::matrix::MatrixSpec;
use crate::semiring::Semiring;

use super::ring::{Counting, GroupRing, Ring};
use super::stack::disjointness_base;
use super::vmv::{Accum, VmvPlan};

/// A multiset of d-dimensional vectors over Z_m (m = 2 for binary). Point
/// k is stored as Σ digit_i · m^i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    pub d: u32,
    pub m: u32,
    pub points: Vec<u64>,
}

impl PointSet {
    pub fn new(d: u32, m: u32, points: Vec<u64>) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(Error::Invalid("need m ≥ 1 and d ≥ 1".into()));
        }
        let size = (m as u64).checked_pow(d).filter(|&s| s <= 1 << 62).ok_or_else(|| Error::Invalid(format!("{m}^{d} indices do not fit")))?;
        if let Some(p) = points.iter().find(|&&p| p >= size) {
            return Err(Error::Invalid(format!("point {p} outside [0, {m}^{d})")));
        }
        Ok(PointSet { d, m, points })
    }

    pub fn from_digits(m: u32, rows: &[Vec<u32>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len() as u32);
        let mut points = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() as u32 != d {
                return Err(Error::Invalid("points of different dimensions".into()));
            }
            if let Some(x) = r.iter().find(|&&x| x >= m) {
                return Err(Error::Invalid(format!("digit {x} outside Z_{m}")));
            }
            points.push(r.iter().rev().fold(0u64, |acc, &x| acc * m as u64 + x as u64));
        }
        Self::new(d.max(1), m, points)
    }

    pub fn digits(&self, k: usize) -> Vec<u32> {
        let mut p = self.points[k];
        (0..self.d)
            .map(|_| {
                let x = (p % self.m as u64) as u32;
                p /= self.m as u64;
                x
            })
            .collect()
    }

    /// One vector per line; binary digits are written together, larger
    /// alphabets space-separated.
    pub fn parse(text: &str, m: u32) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = if line.contains(char::is_whitespace) {
                line.split_whitespace().collect()
            } else {
                line.split("").filter(|s| !s.is_empty()).collect()
            };
            let r = toks
                .iter()
                .map(|t| t.parse::<u32>().map_err(|_| Error::Parse { line: ln + 1, msg: format!("bad digit '{t}'") }))
                .collect::<Result<Vec<_>>>()?;
            rows.push(r);
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 0, msg: "no points".into() });
        }
        Self::from_digits(m, &rows)
    }

    pub fn to_text(&self) -> String {
        let sep = if self.m == 2 { "" } else { " " };
        (0..self.points.len())
            .map(|k| self.digits(k).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep) + "\n")
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn binary(&self) -> Result<()> {
        if self.m != 2 {
            return Err(Error::Invalid(format!("expected binary points, alphabet is Z_{}", self.m)));
        }
        if self.d > 62 {
            return Err(Error::Invalid("d must be at most 62".into()));
        }
        Ok(())
    }

    /// Multiplicities keyed by point, grouped by Hamming weight.
    fn by_weight(&self) -> BTreeMap<u32, Vec<(u64, u128)>> {
        let mut counts: BTreeMap<u64, u128> = BTreeMap::new();
        for &p in &self.points {
            *counts.entry(p).or_default() += 1;
        }
        let mut out: BTreeMap<u32, Vec<(u64, u128)>> = BTreeMap::new();
        for (p, c) in counts {
            out.entry(p.count_ones()).or_default().push((p, c));
        }
        out
    }
}

fn same_shape(u: &PointSet, v: &PointSet) -> Result<()> {
    if (u.d, u.m) != (v.d, v.m) {
        return Err(Error::Invalid(format!("point sets differ: d {} vs {}, m {} vs {}", u.d, v.d, u.m, v.m)));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OvOutcome<T> {
    pub answer: T,
    /// Circuit wires enumerated plus inner-product steps.
    pub work: u64,
    /// Index probes spent locating wires (coverings only).
    pub probes: u64,
    pub classes: usize,
}

#[derive(Clone, Debug)]
pub enum CountMethod {
    /// Powers of the four-rectangle partition of R^{⊗2}.
    Partition,
    /// A caller-supplied PAR circuit for R^{⊗d0}, with R_1 as the tail.
    Custom { base: Circuit, d0: u32 },
    /// Per weight class: prune atypical rows and columns of the partition
    /// power, then fix the holes under coordinate permutations. Needs even d.
    HoleFixed { prune_eps: f64, fix_eps: f64, seed: u64 },
}

fn r1(sr: Semiring) -> Result<Circuit> {
    Ok(Circuit::row_decomposition(&MatrixSpec::Disjointness(1).generate_in(sr)?))
}

fn pair_count(plan: &VmvPlan<Counting>, u: &PointSet, v: &PointSet, restrict: Option<(u32, u32)>) -> (u128, u64, usize) {
    let (wu, wv) = (u.by_weight(), v.by_weight());
    let keep = |a: u32, b: u32| restrict.is_none_or(|r| r == (a, b));
    let acc = |m: &BTreeMap<u32, Vec<(u64, u128)>>, rows: bool, other: &BTreeMap<u32, Vec<(u64, u128)>>| {
        m.iter()
            .filter(|(w, _)| other.keys().any(|o| *w + o <= u.d && if rows { keep(**w, *o) } else { keep(*o, **w) }))
            .map(|(w, x)| (*w, plan.accumulate(x, rows)))
            .collect::<BTreeMap<u32, Accum<u128>>>()
    };
    let (au, av) = (acc(&wu, true, &wv), acc(&wv, false, &wu));
    let mut work: u64 = au.values().chain(av.values()).map(|a| a.wires).sum();
    let (mut total, mut classes) = (0u128, 0usize);
    for (a, x) in &au {
        for (b, y) in av.range(..=u.d - a) {
            if !keep(*a, *b) {
                continue;
            }
            let (s, steps) = plan.inner(x, y);
            total += s;
            work += steps;
            classes += 1;
        }
    }
    (total, work, classes)
}

/// #{(i, j) : ⟨u_i, v_j⟩ = 0}, counting multiplicities.
pub fn ov_count(u: &PointSet, v: &PointSet) -> Result<OvOutcome<u128>> {
    ov_count_with(u, v, &CountMethod::Partition)
}

pub fn ov_count_with(u: &PointSet, v: &PointSet, method: &CountMethod) -> Result<OvOutcome<u128>> {
    same_shape(u, v)?;
    u.binary()?;
    let d = u.d;
    let tail = r1(Semiring::Par)?;
    let single = |plan: VmvPlan<Counting>| {
        let (answer, work, classes) = pair_count(&plan, u, v, None);
        OvOutcome { answer, work, probes: 0, classes }
    };
    match method {
        CountMethod::Partition => {
            Ok(single(VmvPlan::new(Counting, &disjointness_pair_partition(Semiring::Par), 2, Some(&tail), d)?))
        }
        CountMethod::Custom { base, d0 } => {
            let base = base.convert(Semiring::Par)?;
            Ok(single(VmvPlan::new(Counting, &base, *d0, Some(&tail), d)?))
        }
        CountMethod::HoleFixed { prune_eps, fix_eps, seed } => {
            if d % 2 == 1 || d > 16 {
                return Err(Error::Invalid(format!("hole-fixed counting needs even d ≤ 16, got {d}")));
            }
            let base = disjointness_base(2, Semiring::Par)?;
            let (wu, wv) = (u.by_weight(), v.by_weight());
            let mut out = OvOutcome { answer: 0, work: 0, probes: 0, classes: 0 };
            for &a in wu.keys() {
                for &b in wv.keys().filter(|&&b| a + b <= d) {
                    let types = ([d - a, a], [d - b, b]);
                    let pr = prune_atypical(&base, (2, 2), 2, d / 2, (&[0, 1], &[0, 1]), (&types.0, &types.1), *prune_eps)?;
                    let class_seed = seed ^ ((a as u64) << 32 | b as u64);
                    let sym = Symmetry::Coordinates { n: d };
                    let circuit =
                        match hole_fix(&pr.broken, &pr.rows, &pr.cols, &pr.row_holes, &pr.col_holes, &sym, *fix_eps, class_seed) {
                            Ok(f) => f.circuit,
                            // too many holes for the budget: keep the unpruned restriction
                            Err(Error::Invalid(_)) => {
                                prune_atypical(&base, (2, 2), 2, d / 2, (&[0, 1], &[0, 1]), (&types.0, &types.1), f64::INFINITY)?
                                    .broken
                            }
                            Err(e) => return Err(e),
                        };
                    let plan = VmvPlan::flat(Counting, &circuit)?;
                    let (s, w, _) = pair_count(&plan, u, v, Some((a, b)));
                    out.answer += s;
                    out.work += w;
                    out.classes += 1;
                }
            }
            Ok(out)
        }
    }
}

/// Total middle-gate visits E[r] + E[c] of a covering with this μ.
fn cover_cost(wt: WeightType, mu_w: u32) -> Option<f64> {
    let t = cover_size(wt, mu_w).ok()? as f64;
    let total = binom(wt.d, mu_w) as f64;
    let er = t * binom(wt.d - wt.row_w, mu_w - wt.row_w) as f64 / total;
    let ec = t * binom(wt.d - wt.col_w, wt.d - mu_w - wt.col_w) as f64 / total;
    Some(er + ec)
}

/// μ·d for a class: the feasible value minimizing E[r] + E[c], ties broken
/// towards d/2.
pub fn class_mu(wt: WeightType) -> u32 {
    let (lo, hi) = (wt.row_w, wt.d - wt.col_w);
    (lo..=hi)
        .filter_map(|mu| cover_cost(wt, mu).map(|c| (mu, c)))
        .min_by(|x, y| x.1.total_cmp(&y.1).then((2 * x.0).abs_diff(wt.d).cmp(&(2 * y.0).abs_diff(wt.d))))
        .map_or(lo, |x| x.0)
}

/// OV decision over per-class random coverings, with the coverings cached
/// across calls. Deterministic given the seed.
pub struct OvDecider {
    pub seed: u64,
    pub check: CoverCheck,
    cache: Mutex<HashMap<WeightType, Arc<CoveringPlan>>>,
}

impl OvDecider {
    pub fn new(seed: u64) -> Self {
        Self::with_check(seed, CoverCheck::Sampled { samples: 1024 })
    }

    pub fn with_check(seed: u64, check: CoverCheck) -> Self {
        OvDecider { seed, check, cache: Mutex::new(HashMap::new()) }
    }

    pub fn plan(&self, wt: WeightType) -> Result<Arc<CoveringPlan>> {
        if let Some(p) = self.cache.lock().expect("cache lock").get(&wt) {
            return Ok(p.clone());
        }
        let seed = self.seed ^ (wt.d as u64) << 48 ^ (wt.row_w as u64) << 32 ^ (wt.col_w as u64) << 16;
        let plan = Arc::new(random_cover(wt, class_mu(wt), seed, CoverOptions { check: self.check, ..CoverOptions::default() })?);
        self.cache.lock().expect("cache lock").insert(wt, plan.clone());
        Ok(plan)
    }

    pub fn decide(&self, u: &PointSet, v: &PointSet) -> Result<OvOutcome<bool>> {
        same_shape(u, v)?;
        u.binary()?;
        let d = u.d;
        let full = (1u64 << d) - 1;
        let (wu, wv) = (u.by_weight(), v.by_weight());
        let mut out = OvOutcome { answer: false, work: 0, probes: 0, classes: 0 };
        for (&a, xs) in &wu {
            for (&b, ys) in wv.range(..=d - a) {
                let plan = self.plan(WeightType { d, row_w: a, col_w: b })?;
                let sets = &plan.sets;
                let mu = plan.mu_w;
                let range = |s: u64| sets.partition_point(|&x| x < s)..sets.partition_point(|&x| x <= s);
                let mut hit = vec![0u64; sets.len().div_ceil(64)];
                let (mut work, mut probes) = (0u64, 0u64);
                for &(x, _) in xs {
                    for s in supersets_of_weight(x, full, mu) {
                        probes += 1;
                        for g in range(s) {
                            hit[g / 64] |= 1 << (g % 64);
                            work += 1;
                        }
                    }
                }
                let (w, p, found) = ys
                    .par_iter()
                    .map(|&(y, _)| {
                        let comp = full & !y;
                        let (mut w, mut p, mut f) = (0u64, 0u64, false);
                        for s in weight_subsets(d - b, mu).map(|z| deposit(z, comp)) {
                            p += 1;
                            for g in range(s) {
                                w += 1;
                                f |= hit[g / 64] >> (g % 64) & 1 == 1;
                            }
                        }
                        (w, p, f)
                    })
                    .reduce(|| (0, 0, false), |a, b| (a.0 + b.0, a.1 + b.1, a.2 || b.2));
                out.answer |= found;
                out.work += work + w;
                out.probes += probes + p;
                out.classes += 1;
            }
        }
        Ok(out)
    }
}

pub fn ov_decide(u: &PointSet, v: &PointSet, seed: u64) -> Result<OvOutcome<bool>> {
    OvDecider::new(seed).decide(u, v)
}

/// #{(i, j) : ⟨u_i, v_j⟩ ≡ 0 mod m} as (1/m) Σ_k x^{(k)T} DFT^{⊗d} y, with
/// x^{(k)} the multiset {k·u_i}. Uses Yates' circuit unless `base` (a
/// circuit for DFT^{⊗d0}) is given.
pub fn ov_count_mod(u: &PointSet, v: &PointSet, base: Option<(&Circuit, u32)>) -> Result<OvOutcome<u128>> {
    same_shape(u, v)?;
    let (d, m) = (u.d, u.m);
    let f = MatrixSpec::Dft { m, d: 1 }.generate()?;
    let tail = Circuit::row_decomposition(&f);
    let yates = yates_pair(&f);
    let (base, d0) = base.unwrap_or((&yates, 2));
    let ring = GroupRing { m };
    let plan = VmvPlan::new(ring, base, d0, Some(&tail), d)?;
    let counts = |pts: &PointSet, k: u64| {
        let mut c: BTreeMap<u64, i128> = BTreeMap::new();
        for i in 0..pts.len() {
            let idx = pts.digits(i).iter().rev().fold(0u64, |acc, &x| acc * m as u64 + (x as u64 * k) % m as u64);
            *c.entry(idx).or_default() += 1;
        }
        c.into_iter().map(|(i, n)| (i, ring.monomial(0, n))).collect::<Vec<_>>()
    };
    let ay = plan.accumulate(&counts(v, 1), false);
    let mut work = ay.wires;
    let mut sum = ring.zero();
    for k in 0..m as u64 {
        let ax = plan.accumulate(&counts(u, k), true);
        let (s, steps) = plan.inner(&ax, &ay);
        work += ax.wires + steps;
        ring.add_assign(&mut sum, &s);
    }
    // common denominator: the projected sum is m times the count
    let total = ring.project(&sum);
    let c = &total.coeffs[0];
    if !total.is_integer() || c % m != num_bigint::BigInt::from(0) {
        return Err(Error::Invalid(format!("character sum {total} is not a multiple of {m}")));
    }
    let answer = num_traits::ToPrimitive::to_u128(&(c / m)).ok_or_else(|| Error::Invalid("count out of range".into()))?;
    Ok(OvOutcome { answer, work, probes: 0, classes: m as usize })
}
