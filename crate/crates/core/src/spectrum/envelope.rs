use std::collections::HashMap;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::interval::Interval;

use super::profile::AlphaProfile;

/// Pointwise minimum of the per-level normalized α-volumes.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub profiles: Vec<AlphaProfile>,
}

/// A maximal α-interval on which one profile attains the envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub profile: usize,
}

#[derive(Clone, Debug)]
pub struct ArgMax {
    /// Dyadic point k / 2^20 with the best certified envelope value seen.
    pub alpha_num: u64,
    pub value: Interval,
    /// Encloses sup_α C(α).
    pub sup: Interval,
}

pub const ARGMAX_DEPTH: u32 = 20;

impl ArgMax {
    pub fn alpha(&self) -> f64 {
        self.alpha_num as f64 / (1u64 << ARGMAX_DEPTH) as f64
    }

    pub fn alpha_interval(&self) -> Interval {
        Interval::from_ratio(self.alpha_num as i64, 1i64 << ARGMAX_DEPTH)
    }
}

impl Envelope {
    pub fn new(profiles: Vec<AlphaProfile>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::Invalid("envelope needs at least one profile".into()));
        }
        Ok(Envelope { profiles })
    }

    pub fn eval(&self, alpha: &Interval) -> Interval {
        self.profiles.iter().map(|p| p.normalized(alpha)).reduce(|a, b| a.min(&b)).expect("non-empty")
    }

    pub fn log2_f64(&self, alpha: f64) -> f64 {
        self.profiles.iter().map(|p| p.log2_normalized_f64(alpha)).fold(f64::INFINITY, f64::min)
    }

    pub fn argmin_f64(&self, alpha: f64) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (t, p) in self.profiles.iter().enumerate() {
            let v = p.log2_normalized_f64(alpha);
            if v < best.0 {
                best = (v, t);
            }
        }
        best.1
    }

    /// The division points α_0 = 0 < ... < α_r = 1 with the profile that is
    /// minimal on each piece. Changes closer together than 1/resolution may
    /// be missed.
    pub fn pieces(&self, resolution: usize) -> Vec<Piece> {
        let res = resolution.max(2);
        let mut out: Vec<Piece> = Vec::new();
        let mut prev_a = 0.0;
        let mut prev_t = self.argmin_f64(0.0);
        let mut start = 0.0;
        for k in 1..=res {
            let a = k as f64 / res as f64;
            let t = self.argmin_f64(a);
            if t != prev_t {
                let (mut lo, mut hi) = (prev_a, a);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.profiles[prev_t].log2_normalized_f64(mid) <= self.profiles[t].log2_normalized_f64(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let cut = 0.5 * (lo + hi);
                out.push(Piece { lo: start, hi: cut, profile: prev_t });
                start = cut;
                prev_t = t;
            }
            prev_a = a;
        }
        out.push(Piece { lo: start, hi: 1.0, profile: prev_t });
        out
    }
}

pub fn envelope_eval(env: &Envelope, alpha: &Interval) -> Interval {
    env.eval(alpha)
}

/// Certified branch-and-bound for sup_α C(α) on dyadic cells, refined to
/// width 2^-20. Each normalized ρ_t is log-convex, so on a cell [a, b] it is
/// bounded by max(ρ_t(a), ρ_t(b)) and the envelope by the min over t.
pub fn envelope_argmax(env: &Envelope, grid_size: u32) -> ArgMax {
    let full = 1u64 << ARGMAX_DEPTH;
    let g = (grid_size.max(1) as u64).next_power_of_two().min(full);
    let step = full / g;
    let mut cache: HashMap<u64, Vec<Interval>> = HashMap::new();
    let values = |k: u64, cache: &mut HashMap<u64, Vec<Interval>>| {
        cache
            .entry(k)
            .or_insert_with(|| {
                let a = Interval::from_ratio(k as i64, full as i64);
                env.profiles.iter().map(|p| p.normalized(&a)).collect()
            })
            .clone()
    };
    let min_of = |v: &[Interval]| v.iter().cloned().reduce(|a, b| a.min(&b)).expect("non-empty");

    let mut cells: Vec<(u64, u64)> = (0..g).map(|i| (i * step, (i + 1) * step)).collect();
    let mut best: Option<(u64, Interval)> = None;
    let mut bound = Interval::zero();
    let slack = Interval::point(1.0 + 2f64.powi(-40));
    const MAX_CELLS: usize = 1 << 16;
    loop {
        let mut uppers = Vec::with_capacity(cells.len());
        for &(a, b) in &cells {
            let va = values(a, &mut cache);
            let vb = values(b, &mut cache);
            for (k, v) in [(a, &va), (b, &vb)] {
                let e = min_of(v);
                let better = match &best {
                    None => true,
                    Some((_, cur)) => cur.lower_end().certainly_lt(&e.lower_end()),
                };
                if better {
                    best = Some((k, e));
                }
            }
            let up = va.iter().zip(&vb).map(|(x, y)| x.max(y).upper_end()).reduce(|x, y| x.min(&y)).expect("non-empty");
            uppers.push(up);
        }
        let threshold = best.as_ref().expect("evaluated").1.lower_end().mul(&slack);
        let mut next = Vec::new();
        for (&(a, b), up) in cells.iter().zip(&uppers) {
            if up.certainly_le(&threshold) || b - a == 1 || cells.len() > MAX_CELLS {
                bound = bound.max(up);
            } else {
                let m = (a + b) / 2;
                next.push((a, m));
                next.push((m, b));
            }
        }
        if next.is_empty() {
            break;
        }
        cells = next;
    }
    let (k, value) = best.expect("evaluated");
    let sup = Interval::hull(&value.lower_end(), &bound.max(&value.upper_end()));
    ArgMax { alpha_num: k, value, sup }
}

/// C(α)^n · λ^(1−α), a lower bound on the skew size S(λ, T) of every
/// rebalancing tree built from the family. With ρ_t(α) = Σ a^α b^(1−α) the
/// λ exponent is 1−α; n = 0 gives λ^(1−α) ≤ 1 + λ.
pub fn weak_duality_bound(env: &Envelope, alpha: &Interval, n: u32, lambda: &BigRational) -> Interval {
    let lam = Interval::from_rational(lambda).powf(&Interval::one().sub(alpha));
    if n == 0 {
        return lam;
    }
    let c = env.eval(alpha);
    c.log2().scale_u128(n as u128).exp2().mul(&lam)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1() -> Envelope {
        Envelope::new(vec![
            AlphaProfile::from_terms("row", 1, [(1, 2, 1), (1, 1, 1)]),
            AlphaProfile::from_terms("col", 1, [(2, 1, 1), (1, 1, 1)]),
        ])
        .unwrap()
    }

    #[test]
    fn r1_peak_is_one_plus_sqrt2() {
        let m = envelope_argmax(&r1(), 64);
        assert_eq!(m.alpha_num, 1 << 19);
        let v = 1.0 + 2f64.sqrt();
        assert!((m.value.mid() - v).abs() < 1e-12);
        assert!(m.sup.lo() <= v && v <= m.sup.hi());
        assert!(m.sup.width() < 1e-5);
    }

    #[test]
    fn constant_profile_is_flat() {
        let env = Envelope::new(vec![AlphaProfile::from_terms("two", 1, [(1, 1, 2)])]).unwrap();
        let m = envelope_argmax(&env, 16);
        assert!((m.value.mid() - 2.0).abs() < 1e-12);
        assert!(m.sup.hi() < 2.0 + 1e-9);
        for a in [0.0, 0.3, 1.0] {
            assert!((env.eval(&Interval::point(a)).mid() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn r1_pieces_split_at_half() {
        let p = r1().pieces(1000);
        assert_eq!(p.len(), 2);
        // ρ_col(0) = 2 < ρ_row(0) = 3
        assert_eq!(p[0].profile, 1);
        assert!((p[0].hi - 0.5).abs() < 1e-9);
    }

    #[test]
    fn weak_duality_examples() {
        let env = r1();
        let half = Interval::from_ratio(1, 2);
        let one = BigRational::from_integer(1.into());
        let b = weak_duality_bound(&env, &half, 1, &one);
        assert!((b.mid() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        let b0 = weak_duality_bound(&env, &Interval::zero(), 3, &BigRational::new(1.into(), 8.into()));
        // C(0) = min(3, 2), so 2^3 · (1/8)
        assert!((b0.mid() - 1.0).abs() < 1e-12);
    }
}
