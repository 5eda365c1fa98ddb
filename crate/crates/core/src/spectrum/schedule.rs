use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::formats::write_krc;
use crate::matrix::{check_cap, SparseVector};
use crate::semiring::{format_rational, parse_rational, Semiring};

use super::envelope::Envelope;
use super::profile::AlphaProfile;
use super::recurrence::{FTable, DEFAULT_STATE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Exact,
    /// Threshold selection on the hull-adjusted envelope; `mixing` is the
    /// number of factors in a mixed profile.
    Asymptotic { mixing: u32 },
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Strategy::Exact),
            "asymptotic" => Ok(Strategy::Asymptotic { mixing: 8 }),
            _ => Err(Error::Invalid(format!("unknown strategy '{s}' (exact|asymptotic)"))),
        }
    }
}

/// A rebalancing tree stored by state: at remaining level `rem` and skew
/// parameter λ the node expands with `composites[states[(rem, λ)]]`, a
/// sequence of base decompositions applied one after another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RebalanceSchedule {
    pub n: u32,
    pub lambda: BigRational,
    pub levels: Vec<u32>,
    /// sha256 of each profile's `.krc` text, or "-" when built from bare profiles.
    pub hashes: Vec<String>,
    pub composites: Vec<Vec<usize>>,
    pub states: BTreeMap<(u32, BigRational), usize>,
}

pub fn profile_hash(c: &Circuit) -> String {
    let d = Sha256::digest(write_krc(c).as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn rat(v: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("finite").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn ln_rat(r: &BigRational) -> f64 {
    ln_big(r.numer()) - ln_big(r.denom())
}

fn reachable(levels: &[u32], n: u32) -> Vec<bool> {
    let mut ok = vec![false; n as usize + 1];
    ok[0] = true;
    for m in 1..=n as usize {
        ok[m] = levels.iter().any(|&l| (l as usize) <= m && ok[m - l as usize]);
    }
    ok
}

impl RebalanceSchedule {
    fn composite_level(&self, c: usize) -> u32 {
        self.composites[c].iter().map(|&t| self.levels[t]).sum()
    }

    fn lookup(&self, rem: u32, lambda: &BigRational) -> Result<usize> {
        self.states
            .get(&(rem, lambda.clone()))
            .copied()
            .ok_or_else(|| Error::Invalid(format!("schedule has no state (rem {rem}, λ {})", format_rational(lambda))))
    }

    /// Σ over leaves of weight(path) · leaf(λ_leaf), where each edge through
    /// a gate of shape (a, b) multiplies by edge(a).
    fn fold(
        &self,
        profiles: &[AlphaProfile],
        edge: &dyn Fn(u128) -> BigRational,
        leaf: &dyn Fn(&BigRational) -> BigRational,
    ) -> Result<BigRational> {
        if profiles.len() != self.levels.len() {
            return Err(Error::Invalid("profile count does not match schedule".into()));
        }
        let mut memo: HashMap<(u32, BigRational), BigRational> = HashMap::new();
        self.fold_state(profiles, edge, leaf, self.n, &self.lambda, &mut memo)
    }

    fn fold_state(
        &self,
        profiles: &[AlphaProfile],
        edge: &dyn Fn(u128) -> BigRational,
        leaf: &dyn Fn(&BigRational) -> BigRational,
        rem: u32,
        lambda: &BigRational,
        memo: &mut HashMap<(u32, BigRational), BigRational>,
    ) -> Result<BigRational> {
        if rem == 0 {
            return Ok(leaf(lambda));
        }
        if let Some(v) = memo.get(&(rem, lambda.clone())) {
            return Ok(v.clone());
        }
        let c = self.lookup(rem, lambda)?;
        let after = rem - self.composite_level(c);
        let v = self.fold_factors(profiles, edge, leaf, &self.composites[c], after, lambda, memo)?;
        memo.insert((rem, lambda.clone()), v.clone());
        Ok(v)
    }

    #[allow(clippy::too_many_arguments)]
    fn fold_factors(
        &self,
        profiles: &[AlphaProfile],
        edge: &dyn Fn(u128) -> BigRational,
        leaf: &dyn Fn(&BigRational) -> BigRational,
        factors: &[usize],
        after: u32,
        lambda: &BigRational,
        memo: &mut HashMap<(u32, BigRational), BigRational>,
    ) -> Result<BigRational> {
        let Some((&t, rest)) = factors.split_first() else {
            return self.fold_state(profiles, edge, leaf, after, lambda, memo);
        };
        let mut total = BigRational::zero();
        for &(a, b, m) in &profiles[t].terms {
            let child = lambda * rat(b) / rat(a);
            total += rat(m) * edge(a) * self.fold_factors(profiles, edge, leaf, rest, after, &child, memo)?;
        }
        Ok(total)
    }

    /// S(λ, T) = Σ_leaves nnz(A_y) + λ nnz(B_y), exactly.
    pub fn skew(&self, profiles: &[AlphaProfile]) -> Result<BigRational> {
        self.fold(profiles, &rat, &|l| BigRational::one() + l)
    }

    /// Σ_leaves nnz(A_y) + nnz(B_y): the size of the expanded circuit.
    pub fn size(&self, profiles: &[AlphaProfile]) -> Result<BigRational> {
        let l0 = self.lambda.clone();
        self.fold(profiles, &rat, &move |l| BigRational::one() + l / &l0)
    }

    pub fn leaf_count(&self, profiles: &[AlphaProfile]) -> Result<BigRational> {
        self.fold(profiles, &|_| BigRational::one(), &|_| BigRational::one())
    }
}

pub fn build_schedule(profiles: &[AlphaProfile], n: u32, lambda: &BigRational, strategy: Strategy) -> Result<RebalanceSchedule> {
    if profiles.is_empty() {
        return Err(Error::Invalid("no profiles".into()));
    }
    if lambda <= &BigRational::zero() {
        return Err(Error::Invalid("λ must be positive".into()));
    }
    let levels: Vec<u32> = profiles.iter().map(|p| p.level).collect();
    if !reachable(&levels, n)[n as usize] {
        return Err(Error::Invalid(format!("no combination of profile levels reaches n = {n}")));
    }
    let mut s = RebalanceSchedule {
        n,
        lambda: lambda.clone(),
        levels,
        hashes: vec!["-".into(); profiles.len()],
        composites: Vec::new(),
        states: BTreeMap::new(),
    };
    match strategy {
        Strategy::Exact => build_exact(profiles, &mut s)?,
        Strategy::Asymptotic { mixing } => build_asymptotic(profiles, &mut s, mixing.max(1))?,
    }
    Ok(s)
}

fn children(profiles: &[AlphaProfile], factors: &[usize], lambda: &BigRational) -> BTreeSet<BigRational> {
    let mut cur = BTreeSet::from([lambda.clone()]);
    for &t in factors {
        let mut next = BTreeSet::new();
        for l in &cur {
            for &(a, b, _) in &profiles[t].terms {
                next.insert(l * rat(b) / rat(a));
            }
        }
        cur = next;
    }
    cur
}

fn build_exact(profiles: &[AlphaProfile], s: &mut RebalanceSchedule) -> Result<()> {
    s.composites = (0..profiles.len()).map(|t| vec![t]).collect();
    let mut table = FTable::new(profiles, DEFAULT_STATE_CAP);
    let mut stack = vec![(s.n, s.lambda.clone())];
    while let Some((rem, l)) = stack.pop() {
        if rem == 0 || s.states.contains_key(&(rem, l.clone())) {
            continue;
        }
        let t = table.choice(rem, &l)?.expect("reachability checked");
        let after = rem - profiles[t].level;
        for c in children(profiles, &[t], &l) {
            stack.push((after, c));
        }
        s.states.insert((rem, l), t);
    }
    Ok(())
}

/// One stretch of the β-axis (β = 1 − α) assigned to a composite.
#[derive(Clone, Debug)]
struct Stretch {
    lo: f64,
    hi: f64,
    factors: Vec<usize>,
}

/// Per-level ln ρ of a composite, as a function of β.
fn curve(profiles: &[AlphaProfile], factors: &[usize], beta: f64) -> f64 {
    let level: u32 = factors.iter().map(|&t| profiles[t].level).sum();
    factors.iter().map(|&t| profiles[t].rho_f64(1.0 - beta).ln()).sum::<f64>() / level as f64
}

fn slope(profiles: &[AlphaProfile], s: &Stretch) -> f64 {
    (curve(profiles, &s.factors, s.hi) - curve(profiles, &s.factors, s.lo)) / (s.hi - s.lo)
}

/// Division points of the envelope in β, then repeated merging of the two
/// stretches around any vertex where the slopes fail to decrease. The merged
/// stretch gets a Kronecker mixture s^{⊗a} ⊗ t^{⊗(k−a)} whose level-weighted
/// share x of s makes the mixture's excess over the envelope equal at both
/// ends (found by bisection), rounded to the nearest a/k share.
fn hull_adjusted(profiles: &[AlphaProfile], mixing: u32) -> Vec<Stretch> {
    let mirrored: Vec<AlphaProfile> = profiles.iter().map(|p| p.transpose()).collect();
    let env = Envelope::new(mirrored).expect("non-empty");
    let mut st: Vec<Stretch> = env
        .pieces(4096)
        .into_iter()
        .map(|p| Stretch { lo: p.lo, hi: p.hi, factors: vec![p.profile] })
        .collect();
    loop {
        let th: Vec<f64> = st.iter().map(|s| slope(profiles, s)).collect();
        let Some(i) = (0..st.len().saturating_sub(1)).find(|&i| th[i] <= th[i + 1] + 1e-12) else {
            break;
        };
        let (s, t) = (&st[i], &st[i + 1]);
        let (lo, hi) = (s.lo, t.hi);
        let (sl, sh) = (curve(profiles, &s.factors, lo), curve(profiles, &s.factors, hi));
        let (tl, th_) = (curve(profiles, &t.factors, lo), curve(profiles, &t.factors, hi));
        let excess_gap = |x: f64| (x * sl + (1.0 - x) * tl - sl) - (x * sh + (1.0 - x) * th_ - th_);
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if excess_gap(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let x = 0.5 * (a + b);
        let ls: u32 = s.factors.iter().map(|&f| profiles[f].level).sum();
        let lt: u32 = t.factors.iter().map(|&f| profiles[f].level).sum();
        let share = |k: u32| {
            let w = (k * ls) as f64;
            w / (w + ((mixing - k) * lt) as f64)
        };
        let k = (0..=mixing).min_by(|&p, &q| (share(p) - x).abs().total_cmp(&(share(q) - x).abs())).expect("range");
        let mut factors = Vec::new();
        for _ in 0..k {
            factors.extend_from_slice(&s.factors);
        }
        for _ in k..mixing {
            factors.extend_from_slice(&t.factors);
        }
        st.splice(i..=i + 1, [Stretch { lo, hi, factors }]);
    }
    st
}

fn build_asymptotic(profiles: &[AlphaProfile], s: &mut RebalanceSchedule, mixing: u32) -> Result<()> {
    let stretches = hull_adjusted(profiles, mixing);
    let theta: Vec<f64> = stretches.iter().map(|x| slope(profiles, x)).collect();
    let ok = reachable(&s.levels, s.n);
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut intern = |f: Vec<usize>, comps: &mut Vec<Vec<usize>>| {
        *index.entry(f.clone()).or_insert_with(|| {
            comps.push(f);
            comps.len() - 1
        })
    };
    let mut stack = vec![(s.n, s.lambda.clone())];
    while let Some((rem, l)) = stack.pop() {
        if rem == 0 || s.states.contains_key(&(rem, l.clone())) {
            continue;
        }
        if s.states.len() >= DEFAULT_STATE_CAP {
            return Err(Error::StateCap(DEFAULT_STATE_CAP));
        }
        // Threshold rule: stretch i is chosen when λ lies between
        // exp(−(θ_{i−1}+θ_i)·rem/2) and exp(−(θ_i+θ_{i+1})·rem/2).
        let ll = ln_rat(&l);
        let i = (0..theta.len() - 1).filter(|&j| ll >= -(theta[j] + theta[j + 1]) * rem as f64 / 2.0).count();
        let mut factors = stretches[i].factors.clone();
        let lvl: u32 = factors.iter().map(|&t| s.levels[t]).sum();
        if lvl > rem || !ok[(rem - lvl) as usize] {
            let lf = ll.exp();
            factors = vec![(0..profiles.len())
                .filter(|&t| s.levels[t] <= rem && ok[(rem - s.levels[t]) as usize])
                .min_by(|&p, &q| {
                    let cost = |t: usize| profiles[t].terms.iter().map(|&(a, b, m)| m as f64 * (a as f64 + lf * b as f64)).sum::<f64>();
                    cost(p).total_cmp(&cost(q))
                })
                .expect("reachability checked")];
        }
        let after = rem - factors.iter().map(|&t| s.levels[t]).sum::<u32>();
        for c in children(profiles, &factors, &l) {
            stack.push((after, c));
        }
        let c = intern(factors, &mut s.composites);
        s.states.insert((rem, l), c);
    }
    Ok(())
}

fn check_circuits(s: &RebalanceSchedule, circuits: &[Circuit]) -> Result<Semiring> {
    if circuits.len() != s.levels.len() {
        return Err(Error::Invalid(format!("schedule has {} profiles, got {} circuits", s.levels.len(), circuits.len())));
    }
    let sr = circuits[0].semiring;
    let (r0, c0, l0) = (BigInt::from(circuits[0].n_rows), BigInt::from(circuits[0].n_cols), s.levels[0]);
    for (t, c) in circuits.iter().enumerate() {
        if c.semiring != sr {
            return Err(Error::Semiring(format!("profile {t} is over {}, profile 0 over {sr}", c.semiring)));
        }
        let l = s.levels[t];
        if BigInt::from(c.n_rows).pow(l0) != r0.pow(l) || BigInt::from(c.n_cols).pow(l0) != c0.pow(l) {
            return Err(Error::Shape(format!("profile {t} is not a power of the same base matrix")));
        }
        if c.gates.iter().any(|g| g.u.nnz() == 0 || g.v.nnz() == 0) {
            return Err(Error::Invalid(format!("profile {t} has an empty gate")));
        }
        if s.hashes[t] != "-" && s.hashes[t] != profile_hash(c) {
            return Err(Error::Invalid(format!("profile {t} does not match the hash recorded in the schedule")));
        }
    }
    Ok(sr)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    s: &RebalanceSchedule,
    circuits: &[Circuit],
    sr: Semiring,
    rem: u32,
    lambda: &BigRational,
    pending: &[usize],
    u: &SparseVector,
    v: &SparseVector,
    f: &mut dyn FnMut(Gate),
) -> Result<()> {
    let Some((&t, rest)) = pending.split_first() else {
        if rem == 0 {
            f(Gate { u: u.clone(), v: v.clone() });
            return Ok(());
        }
        let c = s.lookup(rem, lambda)?;
        return walk(s, circuits, sr, rem - s.composite_level(c), lambda, &s.composites[c], u, v, f);
    };
    for g in &circuits[t].gates {
        let child = lambda * rat(g.v.nnz() as u128) / rat(g.u.nnz() as u128);
        walk(s, circuits, sr, rem, &child, rest, &u.kron(&g.u, sr), &v.kron(&g.v, sr), f)?;
    }
    Ok(())
}

/// Streams the gates of the expanded tree leaf by leaf, in tree order.
pub fn for_each_gate(s: &RebalanceSchedule, circuits: &[Circuit], mut f: impl FnMut(Gate)) -> Result<()> {
    let sr = check_circuits(s, circuits)?;
    let one = SparseVector::ones(1, [0], sr);
    walk(s, circuits, sr, s.n, &s.lambda, &[], &one, &one, &mut f)
}

/// Materializes the expanded circuit. Root branches expand in parallel and
/// are concatenated in tree order.
pub fn expand_schedule(s: &RebalanceSchedule, circuits: &[Circuit]) -> Result<Circuit> {
    let sr = check_circuits(s, circuits)?;
    let profiles: Vec<AlphaProfile> =
        circuits.iter().zip(&s.levels).map(|(c, &l)| AlphaProfile::from_circuit("", l, c)).collect();
    let size = s.size(&profiles)?;
    check_cap(size.to_integer().to_u128().unwrap_or(u128::MAX))?;
    let (rows, cols) = (
        BigInt::from(circuits[0].n_rows).pow(s.n) .nth_root(s.levels[0]),
        BigInt::from(circuits[0].n_cols).pow(s.n).nth_root(s.levels[0]),
    );
    let dim = |x: BigInt| x.to_u64().ok_or(Error::CapExceeded { needed: u128::MAX, cap: u64::MAX });
    let (n_rows, n_cols) = (dim(rows)?, dim(cols)?);
    let one = SparseVector::ones(1, [0], sr);
    let gates = if s.n == 0 {
        vec![Gate { u: one.clone(), v: one }]
    } else {
        let c = s.lookup(s.n, &s.lambda)?;
        let rem = s.n - s.composite_level(c);
        let factors = &s.composites[c];
        let (t, rest) = factors.split_first().expect("non-empty composite");
        let parts: Vec<Result<Vec<Gate>>> = circuits[*t]
            .gates
            .par_iter()
            .map(|g| {
                let mut out = Vec::new();
                let child = &s.lambda * rat(g.v.nnz() as u128) / rat(g.u.nnz() as u128);
                walk(s, circuits, sr, rem, &child, rest, &one.kron(&g.u, sr), &one.kron(&g.v, sr), &mut |x| out.push(x))?;
                Ok(out)
            })
            .collect();
        let mut gates = Vec::new();
        for p in parts {
            gates.extend(p?);
        }
        gates
    };
    Circuit::new(n_rows, n_cols, sr, gates)
}

pub fn write_ksched(s: &RebalanceSchedule) -> String {
    let mut o = String::new();
    writeln!(o, "ksched v1 {} {}", s.n, s.levels.len()).unwrap();
    for (t, (l, h)) in s.levels.iter().zip(&s.hashes).enumerate() {
        writeln!(o, "profile {t} {l} {h}").unwrap();
    }
    writeln!(o, "lambda {}", format_rational(&s.lambda)).unwrap();
    for (c, f) in s.composites.iter().enumerate() {
        let f: Vec<String> = f.iter().map(|t| t.to_string()).collect();
        writeln!(o, "composite {c} {}", f.join(",")).unwrap();
    }
    for ((rem, l), c) in &s.states {
        writeln!(o, "state {rem} {} {c}", format_rational(l)).unwrap();
    }
    o
}

pub fn read_ksched(text: &str) -> Result<RebalanceSchedule> {
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.into() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "ksched" || h[1] != "v1" {
        return Err(perr(ln, "expected 'ksched v1 <n> <n_profiles>'"));
    }
    let n: u32 = h[2].parse().map_err(|_| perr(ln, "bad n"))?;
    let k: usize = h[3].parse().map_err(|_| perr(ln, "bad profile count"))?;
    let mut s = RebalanceSchedule {
        n,
        lambda: BigRational::one(),
        levels: Vec::new(),
        hashes: Vec::new(),
        composites: Vec::new(),
        states: BTreeMap::new(),
    };
    let mut seen_lambda = false;
    for (ln, line) in lines {
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.as_slice() {
            ["profile", i, l, hash] => {
                if i.parse::<usize>().ok() != Some(s.levels.len()) {
                    return Err(perr(ln, "profile indices must be consecutive"));
                }
                s.levels.push(l.parse().ok().filter(|&l: &u32| l > 0).ok_or_else(|| perr(ln, "bad level"))?);
                s.hashes.push(hash.to_string());
            }
            ["lambda", l] if !seen_lambda => {
                s.lambda = parse_rational(l).filter(|l| l > &BigRational::zero()).ok_or_else(|| perr(ln, "bad λ"))?;
                seen_lambda = true;
            }
            ["composite", i, f] => {
                if i.parse::<usize>().ok() != Some(s.composites.len()) {
                    return Err(perr(ln, "composite indices must be consecutive"));
                }
                let f: Option<Vec<usize>> = f.split(',').map(|x| x.parse().ok().filter(|&t| t < k)).collect();
                s.composites.push(f.ok_or_else(|| perr(ln, "bad composite"))?);
            }
            ["state", rem, l, c] => {
                let rem: u32 = rem.parse().map_err(|_| perr(ln, "bad level"))?;
                let l = parse_rational(l).ok_or_else(|| perr(ln, "bad λ"))?;
                let c: usize = c.parse().ok().filter(|&c| c < s.composites.len()).ok_or_else(|| perr(ln, "bad composite index"))?;
                if s.states.insert((rem, l), c).is_some() {
                    return Err(perr(ln, "duplicate state"));
                }
            }
            _ => return Err(perr(ln, "unrecognized line")),
        }
    }
    if s.levels.len() != k || !seen_lambda {
        return Err(perr(0, "missing profile or lambda lines"));
    }
    for ((rem, _), &c) in &s.states {
        if s.composite_level(c) > *rem {
            return Err(perr(0, "state chooses a composite above its remaining level"));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_power, verify, VerifyScope};
    use crate::matrix::{MatrixSpec, SparseMatrix};
    use crate::spectrum::f_exact;

    fn r1_circuits() -> Vec<Circuit> {
        let m = SparseMatrix::from_dense_i64(&[vec![1, 1], vec![1, 0]], Semiring::Par);
        vec![Circuit::row_decomposition(&m), Circuit::column_decomposition(&m)]
    }

    fn profiles(cs: &[Circuit]) -> Vec<AlphaProfile> {
        cs.iter().enumerate().map(|(i, c)| AlphaProfile::from_circuit(format!("p{i}"), 1, c)).collect()
    }

    fn one() -> BigRational {
        BigRational::one()
    }

    #[test]
    fn exact_skew_matches_dp_and_expansion_verifies() {
        let cs = r1_circuits();
        let ps = profiles(&cs);
        for n in 1..=6 {
            let s = build_schedule(&ps, n, &one(), Strategy::Exact).unwrap();
            assert_eq!(s.skew(&ps).unwrap(), f_exact(&ps, n, &one()).unwrap());
            let c = expand_schedule(&s, &cs).unwrap();
            assert_eq!(BigRational::from_integer(c.size().into()), s.size(&ps).unwrap());
            assert_eq!(BigRational::from_integer(c.gates.len().into()), s.leaf_count(&ps).unwrap());
            let r = verify(&c, &MatrixSpec::Disjointness(n), Semiring::Par, VerifyScope::Exhaustive).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn asymptotic_expansion_verifies() {
        let cs = r1_circuits();
        let ps = profiles(&cs);
        let s = build_schedule(&ps, 5, &one(), Strategy::Asymptotic { mixing: 4 }).unwrap();
        let c = expand_schedule(&s, &cs).unwrap();
        assert!(verify(&c, &MatrixSpec::Disjointness(5), Semiring::Par, VerifyScope::Exhaustive).unwrap().passed());
        assert!(s.skew(&ps).unwrap() >= f_exact(&ps, 5, &one()).unwrap());
    }

    #[test]
    fn single_profile_is_plain_power() {
        let cs = vec![r1_circuits().remove(0)];
        let ps = profiles(&cs);
        for strat in [Strategy::Exact, Strategy::Asymptotic { mixing: 8 }] {
            let s = build_schedule(&ps, 4, &one(), strat).unwrap();
            assert_eq!(expand_schedule(&s, &cs).unwrap(), circuit_power(&cs[0], 4).unwrap());
        }
    }

    #[test]
    fn streaming_matches_materialized() {
        let cs = r1_circuits();
        let ps = profiles(&cs);
        let s = build_schedule(&ps, 4, &BigRational::new(1.into(), 3.into()), Strategy::Exact).unwrap();
        let mut streamed = Vec::new();
        for_each_gate(&s, &cs, |g| streamed.push(g)).unwrap();
        assert_eq!(streamed, expand_schedule(&s, &cs).unwrap().gates);
    }

    #[test]
    fn ksched_round_trip_and_hash_check() {
        let cs = r1_circuits();
        let ps = profiles(&cs);
        let mut s = build_schedule(&ps, 5, &BigRational::new(2.into(), 3.into()), Strategy::Asymptotic { mixing: 4 }).unwrap();
        s.hashes = cs.iter().map(profile_hash).collect();
        let text = write_ksched(&s);
        let back = read_ksched(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(write_ksched(&back), text);
        let swapped = vec![cs[1].clone(), cs[0].clone()];
        assert!(expand_schedule(&back, &swapped).is_err());
        assert!(read_ksched(&text.replace("lambda", "lamda")).is_err());
    }
}
