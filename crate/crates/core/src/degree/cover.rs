use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combinatorics::{binom, deposit, supersets_of_weight, weight_subsets};
use crate::error::{Error, Result};
use crate::matrix::check_cap;
use crate::partitions::{Rect, RectangleFamily, Side};

/// The weight class R^{⊗d} restricted to rows of weight `row_w` and
/// columns of weight `col_w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeightType {
    pub d: u32,
    pub row_w: u32,
    pub col_w: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverCheck {
    Exhaustive,
    Sampled { samples: u64 },
    Skip,
}

#[derive(Clone, Copy, Debug)]
pub struct CoverOptions {
    pub check: CoverCheck,
    pub max_retries: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions { check: CoverCheck::Exhaustive, max_retries: 16 }
    }
}

/// t random μd-sets U; rectangle i is {S ⊆ U_i} × {T ⊆ [d] ∖ U_i}.
#[derive(Clone, Debug)]
pub struct CoveringPlan {
    pub wt: WeightType,
    pub mu_w: u32,
    pub t: u64,
    pub seed: u64,
    /// Index of the successful attempt (fresh randomness per attempt).
    pub attempt: usize,
    /// Sorted, so equal sets are adjacent.
    pub sets: Vec<u64>,
    pub check: CoverCheck,
    pub max_row_cover: u64,
    pub max_col_cover: u64,
    pub expected_row_cover: f64,
    pub expected_col_cover: f64,
}

const CHUNK: u64 = 1024;

/// ⌈10d / P⌉ with P = C(d−p−q, μ−p) / C(d, μ).
pub fn cover_size(wt: WeightType, mu_w: u32) -> Result<u64> {
    check_params(wt, mu_w)?;
    let num = 10 * wt.d as u128 * binom(wt.d, mu_w);
    let den = binom(wt.d - wt.row_w - wt.col_w, mu_w - wt.row_w);
    u64::try_from(num.div_ceil(den)).map_err(|_| Error::Invalid("rectangle count overflows".into()))
}

fn check_params(wt: WeightType, mu_w: u32) -> Result<()> {
    if wt.d > 63 || wt.row_w + wt.col_w > wt.d || mu_w < wt.row_w || mu_w > wt.d - wt.col_w {
        return Err(Error::Invalid(format!(
            "need p ≤ μ ≤ 1−q: row weight {}, col weight {}, μd = {mu_w}, d = {}",
            wt.row_w, wt.col_w, wt.d
        )));
    }
    Ok(())
}

fn sample_sets(d: u32, mu_w: u32, t: u64, seed: u64, attempt: usize) -> Vec<u64> {
    let chunks = t.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((attempt as u64) << 40) | c);
            let n = CHUNK.min(t - c * CHUNK);
            (0..n)
                .map(|_| sample(&mut rng, d as usize, mu_w as usize).iter().fold(0u64, |m, i| m | (1 << i)))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn full(d: u32) -> u64 {
    (1u64 << d) - 1
}

fn colex_rank(x: u64, table: &[Vec<u64>]) -> usize {
    let mut y = x;
    let (mut r, mut i) = (0u64, 1usize);
    while y != 0 {
        r += table[y.trailing_zeros() as usize][i];
        y &= y - 1;
        i += 1;
    }
    r as usize
}

/// Per-member coverage counts of one side: members of weight `w` inside
/// each of the given supports (with multiplicity), indexed by colex rank.
fn coverage(d: u32, w: u32, supports: impl IndexedParallelIterator<Item = (u64, u64)>) -> Vec<u64> {
    let table: Vec<Vec<u64>> = (0..=d).map(|n| (0..=d).map(|k| binom(n, k) as u64).collect()).collect();
    let counts: Vec<AtomicU64> = (0..binom(d, w)).map(|_| AtomicU64::new(0)).collect();
    supports.for_each(|(u, m)| {
        for x in weight_subsets(u.count_ones(), w) {
            counts[colex_rank(deposit(x, u), &table)].fetch_add(m, Ordering::Relaxed);
        }
    });
    counts.into_iter().map(|a| a.into_inner()).collect()
}

fn covers_exhaustive(wt: WeightType, sets: &[u64]) -> Result<bool> {
    let rows: Vec<u64> = weight_subsets(wt.d, wt.row_w).collect();
    let cols: Vec<u64> = weight_subsets(wt.d, wt.col_w).collect();
    check_cap(rows.len() as u128 * cols.len() as u128)?;
    let nc = cols.len();
    let bits: Vec<AtomicU64> = (0..(rows.len() * nc).div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
    sets.par_iter().for_each(|&u| {
        let comp = full(wt.d) & !u;
        let ts: Vec<usize> = weight_subsets(comp.count_ones(), wt.col_w)
            .map(|x| cols.binary_search(&deposit(x, comp)).expect("column"))
            .collect();
        for x in weight_subsets(u.count_ones(), wt.row_w) {
            let i = rows.binary_search(&deposit(x, u)).expect("row");
            for &j in &ts {
                let b = i * nc + j;
                bits[b / 64].fetch_or(1 << (b % 64), Ordering::Relaxed);
            }
        }
    });
    for (i, &s) in rows.iter().enumerate() {
        for (j, &t) in cols.iter().enumerate() {
            if s & t == 0 {
                let b = i * nc + j;
                if bits[b / 64].load(Ordering::Relaxed) >> (b % 64) & 1 == 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Random disjoint pairs (S, T) of the class; (S, T) is covered iff some
/// sampled U satisfies S ⊆ U ⊆ [d] ∖ T.
fn covers_sampled(wt: WeightType, mu_w: u32, sets: &[u64], samples: u64, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..samples).all(|_| {
        let s = sample(&mut rng, wt.d as usize, wt.row_w as usize).iter().fold(0u64, |m, i| m | (1 << i));
        let comp = full(wt.d) & !s;
        let pick = sample(&mut rng, comp.count_ones() as usize, wt.col_w as usize).iter().fold(0u64, |m, i| m | (1 << i));
        let t = deposit(pick, comp);
        supersets_of_weight(s, full(wt.d) & !t, mu_w).any(|u| sets.binary_search(&u).is_ok())
    })
}

pub fn random_cover(wt: WeightType, mu_w: u32, seed: u64, opts: CoverOptions) -> Result<CoveringPlan> {
    let t = cover_size(wt, mu_w)?;
    let (d, p, q) = (wt.d, wt.row_w, wt.col_w);
    let total = binom(d, mu_w) as f64;
    let expected_row_cover = t as f64 * binom(d - p, mu_w - p) as f64 / total;
    let expected_col_cover = t as f64 * binom(d - q, d - mu_w - q) as f64 / total;
    for attempt in 0..opts.max_retries.max(1) {
        let mut sets = sample_sets(d, mu_w, t, seed, attempt);
        sets.par_sort_unstable();
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for &u in &sets {
            match runs.last_mut() {
                Some((v, m)) if *v == u => *m += 1,
                _ => runs.push((u, 1)),
            }
        }
        let ok = match opts.check {
            CoverCheck::Exhaustive => covers_exhaustive(wt, runs.iter().map(|r| r.0).collect::<Vec<_>>().as_slice())?,
            CoverCheck::Sampled { samples } => covers_sampled(wt, mu_w, &sets, samples, seed.wrapping_add(attempt as u64)),
            CoverCheck::Skip => true,
        };
        if !ok {
            continue;
        }
        let rows = coverage(d, p, runs.par_iter().copied());
        let cols = coverage(d, q, runs.par_iter().map(|&(u, m)| (full(d) & !u, m)));
        return Ok(CoveringPlan {
            wt,
            mu_w,
            t,
            seed,
            attempt,
            max_row_cover: rows.into_iter().max().unwrap_or(0),
            max_col_cover: cols.into_iter().max().unwrap_or(0),
            sets,
            check: opts.check,
            expected_row_cover,
            expected_col_cover,
        });
    }
    Err(Error::RetryLimit(opts.max_retries))
}

impl CoveringPlan {
    pub fn rect(&self, u: u64) -> Rect {
        let d = self.wt.d;
        Rect::new(
            Side::Pred { must: 0, forbid: full(d) & !u, min_w: self.wt.row_w, max_w: self.wt.row_w },
            Side::Pred { must: 0, forbid: u, min_w: self.wt.col_w, max_w: self.wt.col_w },
        )
    }

    pub fn to_family(&self) -> RectangleFamily {
        RectangleFamily::new(self.wt.d, self.sets.iter().map(|&u| self.rect(u)).collect())
    }

    /// (|𝒮_U|, |𝒯_U|), the same for every rectangle.
    pub fn shape(&self) -> (u128, u128) {
        (binom(self.mu_w, self.wt.row_w), binom(self.wt.d - self.mu_w, self.wt.col_w))
    }
}

/// Binary entropy with 0 log 0 = 0.
pub fn entropy2(x: f64) -> f64 {
    let h = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
    let x = x.clamp(0.0, 1.0);
    h(x) + h(1.0 - x)
}

/// `a · H(b / a)`, zero when a = 0.
fn scaled_h(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else {
        a * entropy2(b / a)
    }
}

/// log2 of the per-class circuit size of a random covering.
pub fn f_size(p: f64, q: f64, mu: f64) -> f64 {
    entropy2(mu) - scaled_h(1.0 - p - q, mu - p) + scaled_h(mu, p).max(scaled_h(1.0 - mu, q))
}

/// log2 of the per-class maximal degree of a random covering.
pub fn f_degree(p: f64, q: f64, mu: f64) -> f64 {
    scaled_h(1.0 - p, mu - p).max(scaled_h(1.0 - q, 1.0 - mu - q)) - scaled_h(1.0 - p - q, mu - p)
}

#[derive(Clone, Copy, Debug)]
pub struct CoverOptimum {
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    /// log2 of the optimal base.
    pub exponent: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CoverExponents {
    pub sigma_or: CoverOptimum,
    pub delta_or: CoverOptimum,
}

/// inf over μ ∈ [p, 1−q]: a 64-point scan, then golden section around the
/// best bracket.
fn inner_inf(f: &dyn Fn(f64, f64, f64) -> f64, p: f64, q: f64) -> (f64, f64) {
    let (lo, hi) = (p, 1.0 - q);
    if hi - lo < 1e-15 {
        return (lo, f(p, q, lo));
    }
    const N: usize = 64;
    let at = |i: usize| lo + (hi - lo) * i as f64 / N as f64;
    let best = (0..=N).min_by(|&a, &b| f(p, q, at(a)).total_cmp(&f(p, q, at(b)))).expect("non-empty");
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(N)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(p, q, c), f(p, q, d));
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(p, q, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(p, q, d);
        }
    }
    let mu = 0.5 * (a + b);
    (mu, f(p, q, mu))
}

/// sup over p, q ≥ 0, p + q ≤ 1 of the inner infimum: a grid of step 1/50
/// and then a compass search over eight directions with shrinking step.
fn sup_inf(f: &dyn Fn(f64, f64, f64) -> f64) -> CoverOptimum {
    let g = |p: f64, q: f64| -> Option<(f64, f64)> {
        if p < 0.0 || q < 0.0 || p + q > 1.0 {
            None
        } else {
            Some(inner_inf(f, p, q))
        }
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for i in 0..=50 {
        for j in 0..=(50 - i) {
            let (p, q) = (i as f64 / 50.0, j as f64 / 50.0);
            let (mu, v) = g(p, q).expect("in triangle");
            if v > best.0 {
                best = (v, p, q, mu);
            }
        }
    }
    let dirs = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    let mut step = 1.0 / 50.0;
    while step > 1e-13 {
        let mut moved = false;
        for (dp, dq) in dirs {
            if let Some((mu, v)) = g(best.1 + dp * step, best.2 + dq * step) {
                if v > best.0 {
                    best = (v, best.1 + dp * step, best.2 + dq * step, mu);
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    CoverOptimum { p: best.1, q: best.2, mu: best.3, exponent: best.0, value: best.0.exp2() }
}

pub fn cover_exponents() -> CoverExponents {
    CoverExponents { sigma_or: sup_inf(&f_size), delta_or: sup_inf(&f_degree) }
}
