use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::matrix::check_cap;
use crate::semiring::format_rational;

/// An exact real of the form Σ c_p · log2 p over primes p, c_p rational.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogCoeff(pub BTreeMap<u64, BigRational>);

fn factor(mut n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl LogCoeff {
    pub fn log2_of(n: u64) -> Self {
        let mut c = LogCoeff::default();
        for (p, e) in factor(n) {
            c.0.insert(p, BigRational::from_integer(e.into()));
        }
        c
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &LogCoeff) -> LogCoeff {
        let mut out = self.0.clone();
        for (p, c) in &o.0 {
            let e = out.entry(*p).or_insert_with(BigRational::zero);
            *e += c;
            if e.is_zero() {
                out.remove(p);
            }
        }
        LogCoeff(out)
    }

    pub fn scale(&self, s: &BigRational) -> LogCoeff {
        if s.is_zero() {
            return LogCoeff::default();
        }
        LogCoeff(self.0.iter().map(|(p, c)| (*p, c * s)).collect())
    }

    /// The value when it is rational, i.e. only the prime 2 appears.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => self.0.get(&2).cloned(),
            _ => None,
        }
    }

    pub fn to_interval(&self) -> Interval {
        let mut acc = Interval::zero();
        for (p, c) in &self.0 {
            acc = acc.add(&Interval::from_u128(*p as u128).log2().mul(&Interval::from_rational(c)));
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.0.iter().map(|(p, c)| (*p as f64).log2() * c.to_f64().unwrap_or(f64::NAN)).sum()
    }

    fn abs_bound(&self) -> f64 {
        self.0.iter().map(|(p, c)| (*p as f64).log2() * c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
    }
}

/// A polynomial on the simplex Δ^k, homogeneous of degree `degree`, with
/// exponent vectors as keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityPoly {
    pub k: usize,
    pub degree: u32,
    pub terms: BTreeMap<Vec<u32>, LogCoeff>,
}

impl fmt::Display for LogCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", format_rational(&r));
        }
        for (i, (p, c)) in self.0.iter().enumerate() {
            let sep = if i == 0 { "" } else { " + " };
            write!(f, "{sep}{}·log2({p})", format_rational(c))?;
        }
        Ok(())
    }
}

/// Terms as `(coefficient)·p0^e0·p1^e1...`, zero exponents omitted.
impl fmt::Display for DensityPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (j, x) in e.iter().enumerate().filter(|(_, x)| **x > 0) {
                write!(f, "·p{j}^{x}")?;
            }
        }
        Ok(())
    }
}

fn compositions(k: usize, total: u32) -> Vec<Vec<u32>> {
    if k == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(k - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial(e: &[u32]) -> BigInt {
    let mut acc = BigInt::one();
    let mut n = 0u64;
    for &x in e {
        for i in 1..=x as u64 {
            n += 1;
            acc = acc * BigInt::from(n) / BigInt::from(i);
        }
    }
    acc
}

impl DensityPoly {
    /// 𝒟 for one side of `c`, which computes M^{⊗level}. `orbit[i]` is the
    /// orbit of base index i; `degrees` gives r_C or c_C per full index.
    /// Zero-degree indices contribute log 1 = 0.
    fn from_degrees(degrees: &HashMap<u64, u64>, base: u64, level: u32, orbit: &[usize]) -> Result<Self> {
        if orbit.len() as u64 != base {
            return Err(Error::Shape(format!("{} orbit labels for a base dimension of {base}", orbit.len())));
        }
        let k = orbit.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0u64; k];
        for &o in orbit {
            sizes[o] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::Invalid("orbit labels must be 0..k without gaps".into()));
        }
        let total = (base as u128).checked_pow(level).ok_or(Error::CapExceeded { needed: u128::MAX, cap: 0 })?;
        check_cap(total)?;
        let mut sums: HashMap<Vec<u32>, LogCoeff> = HashMap::new();
        for x in 0..total as u64 {
            let mut t = vec![0u32; k];
            let mut y = x;
            for _ in 0..level {
                t[orbit[(y % base) as usize]] += 1;
                y /= base;
            }
            let r = degrees.get(&x).copied().unwrap_or(0);
            if r > 1 {
                let e = sums.entry(t).or_default();
                *e = e.add(&LogCoeff::log2_of(r));
            } else {
                sums.entry(t).or_default();
            }
        }
        let mut terms = BTreeMap::new();
        for (t, s) in sums {
            let mut den = BigInt::one();
            for (j, &i) in t.iter().enumerate() {
                den *= BigInt::from(sizes[j]).pow(i);
            }
            let c = s.scale(&BigRational::new(BigInt::one(), den));
            if !c.is_zero() {
                terms.insert(t, c);
            }
        }
        Ok(DensityPoly { k, degree: level, terms })
    }

    pub fn rows(c: &Circuit, base_rows: u64, level: u32, orbit: &[usize]) -> Result<Self> {
        Self::from_degrees(&c.row_degrees(), base_rows, level, orbit)
    }

    pub fn cols(c: &Circuit, base_cols: u64, level: u32, orbit: &[usize]) -> Result<Self> {
        Self::from_degrees(&c.col_degrees(), base_cols, level, orbit)
    }

    pub fn from_terms(k: usize, degree: u32, terms: impl IntoIterator<Item = (Vec<u32>, LogCoeff)>) -> Self {
        let terms = terms.into_iter().filter(|(e, c)| e.len() == k && e.iter().sum::<u32>() == degree && !c.is_zero()).collect();
        DensityPoly { k, degree, terms }
    }

    /// The same function on the simplex, multiplied by (Σ p)^(to − degree).
    pub fn homogenize(&self, to: u32) -> Self {
        assert!(to >= self.degree);
        let extra = compositions(self.k, to - self.degree);
        let mut terms: BTreeMap<Vec<u32>, LogCoeff> = BTreeMap::new();
        for (e, c) in &self.terms {
            for f in &extra {
                let m = BigRational::from_integer(multinomial(f));
                let key: Vec<u32> = e.iter().zip(f).map(|(a, b)| a + b).collect();
                let cur = terms.remove(&key).unwrap_or_default();
                let next = cur.add(&c.scale(&m));
                if !next.is_zero() {
                    terms.insert(key, next);
                }
            }
        }
        DensityPoly { k: self.k, degree: to, terms }
    }

    /// Sum as functions on the simplex.
    pub fn add(&self, o: &DensityPoly) -> Result<DensityPoly> {
        if self.k != o.k {
            return Err(Error::Shape(format!("{} vs {} orbits", self.k, o.k)));
        }
        let deg = self.degree.max(o.degree);
        let (a, b) = (self.homogenize(deg), o.homogenize(deg));
        let mut terms = a.terms;
        for (e, c) in b.terms {
            let next = terms.remove(&e).unwrap_or_default().add(&c);
            if !next.is_zero() {
                terms.insert(e, next);
            }
        }
        Ok(DensityPoly { k: self.k, degree: deg, terms })
    }

    /// Exact equality as functions on the simplex.
    pub fn same_on_simplex(&self, o: &DensityPoly) -> bool {
        let deg = self.degree.max(o.degree);
        self.k == o.k && self.homogenize(deg) == o.homogenize(deg)
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c.to_f64() * e.iter().zip(p).map(|(&i, &x)| x.powi(i as i32)).product::<f64>()).sum()
    }

    pub fn eval_interval(&self, p: &[Interval]) -> Interval {
        let mut acc = Interval::zero();
        for (e, c) in &self.terms {
            let mut m = c.to_interval();
            for (&i, x) in e.iter().zip(p) {
                for _ in 0..i {
                    m = m.mul(x);
                }
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// Coefficients when every one is rational.
    pub fn rational_terms(&self) -> Option<BTreeMap<Vec<u32>, BigRational>> {
        self.terms.iter().map(|(e, c)| Some((e.clone(), c.as_rational()?))).collect()
    }

    pub fn eval_rational(&self, p: &[BigRational]) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (e, c) in self.rational_terms()? {
            let mut m = c;
            for (&i, x) in e.iter().zip(p) {
                for _ in 0..i {
                    m *= x;
                }
            }
            acc += m;
        }
        Some(acc)
    }

    /// Bound on |f(p) − f(p')| / ‖p − p'‖_1 over the simplex.
    fn lipschitz(&self) -> f64 {
        self.degree as f64 * self.terms.values().map(|c| c.abs_bound()).sum::<f64>()
    }
}

pub fn density_eval(poly: &DensityPoly, p: &[f64]) -> Result<f64> {
    if p.len() != poly.k || p.iter().any(|&x| x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid("point is not on the simplex".into()));
    }
    Ok(poly.eval(p))
}

#[derive(Clone, Debug)]
pub struct DensitySup {
    /// Best point found.
    pub point: Vec<f64>,
    pub value: f64,
    /// Certified upper bound on the sup: grid maximum plus a Lipschitz term.
    pub upper: f64,
}

pub const GRID_STEPS: u32 = 256;

fn project(x: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let rest = 1.0 - p.iter().sum::<f64>();
    if rest >= 0.0 {
        p.push(rest);
    } else {
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        p.push(0.0);
    }
    p
}

/// Grid search on the simplex (step 1/256, coarser when k > 3) followed by
/// a Nelder–Mead polish of the best grid point in the first k−1 coordinates.
pub fn density_sup(poly: &DensityPoly) -> DensitySup {
    let k = poly.k.max(1);
    if k == 1 {
        let v = poly.eval(&[1.0]);
        return DensitySup { point: vec![1.0], value: v, upper: v };
    }
    let mut steps = GRID_STEPS;
    while steps > 4 && (steps as f64 + 1.0).powi(k as i32 - 1) > 2e6 {
        steps /= 2;
    }
    let mut best = (f64::NEG_INFINITY, vec![]);
    for c in compositions(k, steps) {
        let p: Vec<f64> = c.iter().map(|&i| i as f64 / steps as f64).collect();
        let v = poly.eval(&p);
        if v > best.0 {
            best = (v, p);
        }
    }
    let h = 1.0 / steps as f64;
    let upper = best.0 + poly.lipschitz() * (k - 1) as f64 * h + 1e-12;
    let f = |x: &[f64]| poly.eval(&project(x));
    let n = k - 1;
    let start: Vec<f64> = best.1[..n].to_vec();
    let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
    for i in 0..n {
        let mut v = start.clone();
        v[i] += h;
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    for _ in 0..50 {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };
        let r = along(-1.0);
        let fr = f(&r);
        if fr > vals[0] {
            let e = along(-2.0);
            let fe = f(&e);
            if fe > fr {
                simplex[n] = e;
                vals[n] = fe;
            } else {
                simplex[n] = r;
                vals[n] = fr;
            }
        } else if fr > vals[n - 1] {
            simplex[n] = r;
            vals[n] = fr;
        } else {
            let c = along(0.5);
            let fc = f(&c);
            if fc > vals[n] {
                simplex[n] = c;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n).map(|j| 0.5 * (simplex[0][j] + simplex[i][j])).collect();
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let (i, _) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    let (point, value) = if vals[i] > best.0 { (project(&simplex[i]), vals[i]) } else { (best.1, best.0) };
    DensitySup { point, value, upper: upper.max(value) }
}

/// Exact maximum over the simplex for two orbits and degree ≤ 2 with
/// rational coefficients: point (q, 1−q) and value.
pub fn exact_sup_two_orbits(poly: &DensityPoly) -> Option<(BigRational, BigRational)> {
    if poly.k != 2 || poly.degree > 2 {
        return None;
    }
    let h = poly.homogenize(2);
    let t = h.rational_terms()?;
    let get = |e: [u32; 2]| t.get(e.as_slice()).cloned().unwrap_or_else(BigRational::zero);
    // f(q) = A q² + B q(1−q) + C (1−q)² = (A − B + C) q² + (B − 2C) q + C
    let (a, b, c) = (get([2, 0]), get([1, 1]), get([0, 2]));
    let qa = &a - &b + &c;
    let qb = &b - BigRational::from_integer(2.into()) * &c;
    let f = |q: &BigRational| &qa * q * q + &qb * q + &c;
    let mut cands = vec![BigRational::zero(), BigRational::one()];
    if qa < BigRational::zero() {
        let v = -&qb / (BigRational::from_integer(2.into()) * &qa);
        if v > BigRational::zero() && v < BigRational::one() {
            cands.push(v);
        }
    }
    cands.into_iter().map(|q| (f(&q), q)).max_by(|x, y| x.0.cmp(&y.0)).map(|(v, q)| (q, v))
}

/// Row and column density polynomials of one circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensitySpec {
    pub rows: DensityPoly,
    pub cols: DensityPoly,
}

impl DensitySpec {
    pub fn new(c: &Circuit, base: (u64, u64), level: u32, row_orbit: &[usize], col_orbit: &[usize]) -> Result<Self> {
        Ok(DensitySpec {
            rows: DensityPoly::rows(c, base.0, level, row_orbit)?,
            cols: DensityPoly::cols(c, base.1, level, col_orbit)?,
        })
    }

    /// The density of the Kronecker product circuit.
    pub fn kron(&self, o: &DensitySpec) -> Result<Self> {
        Ok(DensitySpec { rows: self.rows.add(&o.rows)?, cols: self.cols.add(&o.cols)? })
    }

    pub fn transpose(&self) -> Self {
        DensitySpec { rows: self.cols.clone(), cols: self.rows.clone() }
    }
}
