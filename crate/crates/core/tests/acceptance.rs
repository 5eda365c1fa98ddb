//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//! Runs with its own main so the lines always reach the console.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use kronsynth::circuit::{circuit_power, disjointness_pair_partition};
use kronsynth::combinatorics::{binom, supersets_of_weight, weight_subsets};
use kronsynth::degree::{
    cover_exponents, exact_sup_two_orbits, hole_fix, punch_holes, random_cover, CoverCheck, CoverOptions, DensityPoly,
    DensitySpec, LogCoeff, Symmetry, WeightType,
};
use kronsynth::partitions::{
    code_lookup, merged_alpha_volume, merged_partition, simple_alpha_volume, simple_partition, validate_partition,
    BundledCodes, RectangleFamily, ValidationMode, WordSpec,
};
use kronsynth::solvers::{
    disjointness_stack, mf_pipeline, ov_count, ov_count_mod, ov_decide, stack_product, OvDecider, PointSet,
};
use kronsynth::spectrum::{build_schedule, expand_schedule, f_exact, AlphaProfile, Strategy};
use kronsynth::{verify, Circuit, Error, Interval, MatrixSpec, Scalar, Semiring, SparseMatrix, VerifyScope};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const W1: &str = "RCRCRCRCRCRCRCRCRCR";
const MERGED: &str = "RCR+C+R+C+R+C+RCRCR:9,9,198,198,1260,1260";
const TOY_MERGED: &[(u32, &str)] =
    &[(6, "RCR+CRC:1"), (6, "RCR+CRC:3"), (7, "RCR+C+RC:3,3"), (8, "RCR+C+RCR:3,3"), (8, "RRCR+CRCR:3")];

// tolerances
const CLOSED_FORM_WIDTH: f64 = 1.0 / (1u64 << 50) as f64;
const OPTIMUM_TOL: f64 = 1e-9;
const SLOPE_TARGET_TOL: f64 = 0.05;

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn half() -> Interval {
    Interval::from_ratio(1, 2)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(t < limit, || format!("{what} took {t:.2?}, limit {limit:?}"))
}

type Outcome = Result<String, String>;

fn c1() -> Outcome {
    let t0 = Instant::now();
    let v = simple_alpha_volume(18, W1, &half()).map_err(|e| e.to_string())?.root(18).log2();
    let t = t0.elapsed();
    check(v.certainly_lt(&Interval::point(1.25026)), || format!("log2 rho^(1/18) = {}", v.upper_string(8)))?;
    within(t, Duration::from_secs(1), "evaluation")?;
    Ok(format!("log2 rho_w1(1/2)^(1/18) <= {} < 1.25026 (outward), {t:.2?}", v.upper_string(7)))
}

fn c2() -> Outcome {
    let t0 = Instant::now();
    let e = |e: Error| e.to_string();
    let a2 = code_lookup(18, 4, 2, 9).map_err(e)?;
    a2.verify().map_err(e)?;
    match code_lookup(18, 4, 2, 10) {
        Err(Error::CodeShortfall { achieved: 9, .. }) => {}
        other => return Err(format!("A(18,4,2) should stop at 9, got {other:?}")),
    }
    let a4 = code_lookup(18, 4, 4, 198).map_err(e)?;
    let a6 = code_lookup(18, 4, 6, 1260).map_err(e)?;
    a4.verify().map_err(e)?;
    a6.verify().map_err(e)?;
    // independent distance check
    for t in [&a2, &a4, &a6] {
        for (i, x) in t.codewords.iter().enumerate() {
            check(x.count_ones() == t.weight, || format!("codeword {x:#b} has wrong weight"))?;
            for y in &t.codewords[..i] {
                check((x ^ y).count_ones() >= 4, || format!("codewords {x:#b}, {y:#b} too close"))?;
            }
        }
    }
    let spec: WordSpec = MERGED.parse().map_err(e)?;
    merged_partition(18, &spec, &BundledCodes::default()).map_err(e)?;
    let v = merged_alpha_volume(18, &spec, &half()).map_err(e)?.root(18).log2();
    let t = t0.elapsed();
    check(v.certainly_lt(&Interval::point(1.249424)), || format!("log2 = {}", v.upper_string(8)))?;
    within(t, Duration::from_secs(5), "codes and volume")?;
    Ok(format!(
        "codes 9/198/1260 verified, log2 rho^(1/18) <= {} < 1.249424 (outward), {t:.2?}",
        v.upper_string(7)
    ))
}

fn c3() -> Outcome {
    let t0 = Instant::now();
    let e = |e: Error| e.to_string();
    let mut checked = 0;
    let mut words: Vec<(u32, String)> = Vec::new();
    for d in [4u32, 7, 10, 12] {
        let n = d as usize + 1;
        words.push((d, "R".repeat(n)));
        words.push((d, "CR".repeat(n).chars().take(n).collect()));
        words.push((d, "RC".repeat(n).chars().take(n).collect()));
        words.push((d, "RRC".repeat(n).chars().take(n).collect()));
    }
    for (d, w) in &words {
        let f = simple_partition(*d, w).map_err(e)?;
        let rep = validate_partition(&f, ValidationMode::Exhaustive).map_err(e)?;
        check(rep.passed(), || format!("{w}: {rep}"))?;
        check(exhaustive_oracle(&f)?, || format!("{w}: oracle disagrees"))?;
        checked += 1;
    }
    for (d, s) in TOY_MERGED {
        let spec: WordSpec = s.parse().map_err(e)?;
        let f = merged_partition(*d, &spec, &BundledCodes::default()).map_err(e)?;
        let rep = validate_partition(&f, ValidationMode::Exhaustive).map_err(e)?;
        check(rep.passed(), || format!("{s}: {rep}"))?;
        check(exhaustive_oracle(&f)?, || format!("{s}: oracle disagrees"))?;
        checked += 1;
    }
    let spec: WordSpec = MERGED.parse().map_err(e)?;
    let f = merged_partition(18, &spec, &BundledCodes::default()).map_err(e)?;
    let covered: u128 = f.shapes().iter().map(|(a, b)| a * b).sum();
    check(covered == 3u128.pow(18), || format!("sum of products {covered}"))?;
    let rep = validate_partition(&f, ValidationMode::CountingSample { seed: 18, samples: 1_000_000 }).map_err(e)?;
    check(rep.passed(), || rep.to_string())?;
    let t = t0.elapsed();
    within(t, Duration::from_secs(300), "validation")?;
    Ok(format!("{checked} families exhaustive, d=18 merged: sum = 3^18 and 10^6 samples, {t:.2?}"))
}

/// Multiplicity of every pair by direct membership tests on the expanded
/// rectangles.
fn exhaustive_oracle(f: &RectangleFamily) -> Result<bool, String> {
    let e = f.expanded().map_err(|e| e.to_string())?;
    let n = 1usize << f.d;
    let mut count = vec![0u8; n * n];
    for r in &e.rects {
        let (rows, cols) = (r.rows.members(f.d), r.cols.members(f.d));
        for &s in &rows {
            for &t in &cols {
                let c = &mut count[s as usize * n + t as usize];
                *c = c.saturating_add(1);
            }
        }
    }
    Ok((0..n).all(|s| (0..n).all(|t| count[s * n + t] == u8::from(s & t == 0))))
}

fn c4() -> Outcome {
    let e = |e: Error| e.to_string();
    let mut cases: Vec<(String, RectangleFamily, Box<dyn Fn(&Interval) -> Interval>)> = Vec::new();
    for (d, w) in [(2u32, "RCR"), (6, "RCRCRCR"), (8, "RRCRCRCRC"), (10, "RCRCRCRCRCR"), (10, "RRRRRRRRRRR")] {
        let f = simple_partition(d, w).map_err(e)?;
        cases.push((w.to_string(), f, Box::new(move |a| simple_alpha_volume(d, w, a).unwrap())));
    }
    for &(d, s) in TOY_MERGED {
        let spec: WordSpec = s.parse().map_err(e)?;
        let f = merged_partition(d, &spec, &BundledCodes::default()).map_err(e)?;
        cases.push((s.to_string(), f, Box::new(move |a| merged_alpha_volume(d, &spec, a).unwrap())));
    }
    let mut worst = 0f64;
    for (name, f, closed) in &cases {
        let c = f.to_circuit(Semiring::Par).map_err(e)?;
        for k in 0..=20 {
            let a = Interval::from_ratio(k, 20);
            let x = closed(&a);
            let y = c.measure(&a).alpha_volume;
            let w = x.hull(&y).width();
            worst = worst.max(w);
            check(x.overlaps(&y) && w <= CLOSED_FORM_WIDTH, || {
                format!("{name} at alpha={k}/20: closed [{}, {}] vs measured [{}, {}]", x.lo(), x.hi(), y.lo(), y.hi())
            })?;
        }
    }
    Ok(format!("{} families x 21 alphas agree, widest enclosure {worst:.1e} <= 2^-50", cases.len()))
}

/// Rectangles of a random partition of the ones of a 0/1 matrix, grown
/// greedily from uncovered entries in random order.
fn random_partition(m: &[Vec<bool>], rng: &mut ChaCha8Rng) -> Vec<(u128, u128, u128)> {
    let (r, c) = (m.len(), m[0].len());
    let mut free = m.to_vec();
    let mut cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).filter(|&(i, j)| m[i][j]).collect();
    for k in (1..cells.len()).rev() {
        cells.swap(k, rng.gen_range(0..=k));
    }
    let mut out = Vec::new();
    for (i, j) in cells {
        if !free[i][j] {
            continue;
        }
        let (mut rows, mut cols) = (vec![i], vec![j]);
        for jj in 0..c {
            if jj != j && rng.gen_bool(0.5) && rows.iter().all(|&x| free[x][jj]) {
                cols.push(jj);
            }
        }
        for ii in 0..r {
            if ii != i && rng.gen_bool(0.5) && cols.iter().all(|&y| free[ii][y]) {
                rows.push(ii);
            }
        }
        for &x in &rows {
            for &y in &cols {
                free[x][y] = false;
            }
        }
        out.push((rows.len() as u128, cols.len() as u128, 1));
    }
    out
}

fn random_family(seed: u64) -> Vec<AlphaProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m: Vec<Vec<bool>> = loop {
        let m: Vec<Vec<bool>> = (0..3).map(|_| (0..3).map(|_| rng.gen_bool(0.6)).collect()).collect();
        if m.iter().all(|r| r.iter().any(|&x| x)) && (0..3).all(|j| m.iter().any(|r| r[j])) {
            break m;
        }
    };
    let rows = m.iter().map(|r| (1, r.iter().filter(|&&x| x).count() as u128, 1));
    let cols = (0..3).map(|j| (m.iter().filter(|r| r[j]).count() as u128, 1, 1));
    vec![
        AlphaProfile::from_terms("rows", 1, rows),
        AlphaProfile::from_terms("cols", 1, cols.collect::<Vec<_>>()),
        AlphaProfile::from_terms("random", 1, random_partition(&m, &mut rng)),
    ]
}

/// Σ m a^α b^(1−α), computed here rather than through the library.
fn rho(p: &AlphaProfile, a: &Interval) -> Interval {
    let b = Interval::one().sub(a);
    p.terms.iter().fold(Interval::zero(), |acc, &(x, y, m)| {
        acc.add(&Interval::from_u128(x).powf(a).mul(&Interval::from_u128(y).powf(&b)).scale_u128(m))
    })
}

fn c5() -> Outcome {
    let r1 = MatrixSpec::Disjointness(1).generate_in(Semiring::Par).map_err(|e| e.to_string())?;
    let row = AlphaProfile::from_circuit("R1 rows", 1, &Circuit::row_decomposition(&r1));
    let families = vec![vec![row.clone(), row.transpose()], random_family(11), random_family(12)];
    let (mut valid, mut literal, mut checks) = (0usize, 0usize, 0usize);
    for fam in &families {
        for n in 0..=8u32 {
            for k in -3i32..=3 {
                let lambda = if k >= 0 { rat(1 << k, 1) } else { rat(1, 1 << -k) };
                let f = Interval::from_rational(&f_exact(fam, n, &lambda).map_err(|e| e.to_string())?);
                let lam = Interval::from_rational(&lambda);
                for j in 0..=64 {
                    let a = Interval::from_ratio(j, 64);
                    let c = fam.iter().map(|p| rho(p, &a)).reduce(|x, y| x.min(&y)).unwrap();
                    let cn = (0..n).fold(Interval::one(), |acc, _| acc.mul(&c));
                    let bound = cn.mul(&lam.powf(&Interval::one().sub(&a)));
                    let lit = cn.mul(&lam.powf(&a));
                    checks += 1;
                    if f.certainly_lt(&bound) {
                        valid += 1;
                    }
                    if f.certainly_lt(&lit) {
                        literal += 1;
                    }
                }
            }
        }
    }
    check(valid == 0, || format!("{valid} violations of F_n >= C^n lambda^(1-alpha)"))?;
    Ok(format!(
        "{checks} checks over 3 families, 0 violations of F_n >= C(a)^n l^(1-a); literal l^a form violated {literal} times"
    ))
}

fn c6() -> Outcome {
    let e = |e: Error| e.to_string();
    let r1 = MatrixSpec::Disjointness(1).generate_in(Semiring::Par).map_err(e)?;
    let circuits = vec![Circuit::row_decomposition(&r1), Circuit::column_decomposition(&r1)];
    let profiles: Vec<AlphaProfile> = circuits.iter().map(|c| AlphaProfile::from_circuit("", 1, c)).collect();
    let one = BigRational::one();
    let t0 = Instant::now();
    for n in 1..=10u32 {
        for strategy in [Strategy::Exact, Strategy::Asymptotic { mixing: 8 }] {
            let s = build_schedule(&profiles, n, &one, strategy).map_err(e)?;
            let c = expand_schedule(&s, &circuits).map_err(e)?;
            let rep = verify(&c, &MatrixSpec::Disjointness(n), Semiring::Par, VerifyScope::Exhaustive).map_err(e)?;
            check(rep.passed(), || format!("n={n} {strategy:?}: {rep}"))?;
            check(BigRational::from_integer(BigInt::from(c.size())) == s.size(&profiles).map_err(e)?, || {
                format!("n={n}: expanded size differs from S(1,T)")
            })?;
            if strategy == Strategy::Exact {
                let f = f_exact(&profiles, n, &one).map_err(e)?;
                let skew = s.skew(&profiles).map_err(e)?;
                check(skew == f, || format!("n={n}: skew {skew} vs F_n(1) = {f}"))?;
            }
        }
    }
    Ok(format!("n=1..10, both strategies verify in PAR; exact skew = F_n(1), {:.2?}", t0.elapsed()))
}

fn c7() -> Outcome {
    let c = disjointness_pair_partition(Semiring::Par);
    let spec = DensitySpec::new(&c, (2, 2), 2, &[0, 1], &[0, 1]).map_err(|e| e.to_string())?;
    let sym = spec.kron(&spec.transpose()).map_err(|e| e.to_string())?;
    // variables (q, p) = (Pr[bit 0], Pr[bit 1]); coefficients are log2 of degree 2
    let one = LogCoeff::log2_of(2);
    let want = DensityPoly::from_terms(2, 2, [(vec![2, 0], one.clone()), (vec![1, 1], one.scale(&rat(4, 1)))]);
    check(sym.rows == want && sym.cols == want, || format!("rows {}, cols {}", sym.rows, sym.cols))?;
    // the same polynomial measured on the materialized C ⊗ C^T
    let ct = kronsynth::circuit_kron(&c, &c.transpose()).map_err(|e| e.to_string())?;
    let direct = DensitySpec::new(&ct, (2, 2), 4, &[0, 1], &[0, 1]).map_err(|e| e.to_string())?;
    check(direct.rows == want.homogenize(4) && direct.cols == want.homogenize(4), || "direct measurement differs".into())?;
    let (q, v) = exact_sup_two_orbits(&want).ok_or("not rational")?;
    check((q.clone(), v.clone()) == (rat(2, 3), rat(4, 3)), || format!("sup {v} at q = {q}"))?;
    // independent: f(q) = q^2 + 4q(1-q) = -3q^2 + 4q peaks at q = 2/3 with 4/3
    let f = |q: &BigRational| q * q + rat(4, 1) * q * (BigRational::one() - q);
    check(f(&q) == v && (0..=300).all(|k| f(&rat(k, 300)) <= v), || "oracle disagrees".into())?;
    Ok("D(C x C^T) = q^2 + 4pq exactly; max 4/3 at (2/3, 1/3)".into())
}

fn c8() -> Outcome {
    let t0 = Instant::now();
    let e = cover_exponents();
    let t = t0.elapsed();
    let (s, d) = (e.sigma_or, e.delta_or);
    let near = |x: f64, y: f64| (x - y).abs() < OPTIMUM_TOL;
    check(near(s.value, 5f64.sqrt()), || format!("sigma {}", s.value))?;
    check(near(d.value, 2.0 / 3f64.sqrt()), || format!("delta {}", d.value))?;
    let pt_tol = 1e-4;
    check((s.p - 0.4).abs() < pt_tol && (s.q - 0.4).abs() < pt_tol && (s.mu - 0.5).abs() < pt_tol, || {
        format!("sigma at ({}, {}, {})", s.p, s.q, s.mu)
    })?;
    check((d.p - 1.0 / 3.0).abs() < pt_tol && (d.q - 1.0 / 3.0).abs() < pt_tol && (d.mu - 0.5).abs() < pt_tol, || {
        format!("delta at ({}, {}, {})", d.p, d.q, d.mu)
    })?;
    within(t, Duration::from_secs(10), "optimization")?;
    Ok(format!(
        "sqrt5 err {:.1e} at ({:.4},{:.4},{:.4}); 2/sqrt3 err {:.1e} at ({:.4},{:.4},{:.4}), {t:.2?}",
        (s.value - 5f64.sqrt()).abs(),
        s.p,
        s.q,
        s.mu,
        (d.value - 2.0 / 3f64.sqrt()).abs(),
        d.p,
        d.q,
        d.mu
    ))
}

fn c9() -> Outcome {
    let wt = WeightType { d: 12, row_w: 4, col_w: 4 };
    let mu = 6;
    let opts = CoverOptions { check: CoverCheck::Exhaustive, max_retries: 1 };
    let rows: Vec<u64> = weight_subsets(12, 4).collect();
    let full = (1u64 << 12) - 1;
    let mut ok = 0;
    let mut worst_ratio = 0f64;
    for seed in 0..20u64 {
        let plan = match random_cover(wt, mu, seed, opts) {
            Ok(p) => p,
            Err(Error::RetryLimit(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        // independent coverage check and row coverage count
        let sets: BTreeSet<u64> = plan.sets.iter().copied().collect();
        for &s in &rows {
            for t in weight_subsets(8, 4) {
                let t = kronsynth::combinatorics::deposit(t, full & !s);
                let hit = supersets_of_weight(s, full & !t, mu).any(|u| sets.contains(&u));
                check(hit, || format!("seed {seed}: pair ({s:#b}, {t:#b}) uncovered"))?;
            }
        }
        let e_r = plan.t as f64 * binom(8, 2) as f64 / binom(12, 6) as f64;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for &u in &plan.sets {
            for s in weight_subsets(6, 4) {
                *counts.entry(kronsynth::combinatorics::deposit(s, u)).or_default() += 1;
            }
        }
        let max_r = counts.values().copied().max().unwrap_or(0);
        check(max_r == plan.max_row_cover, || format!("seed {seed}: max row cover {max_r} vs {}", plan.max_row_cover))?;
        check((max_r as f64) <= 2.0 * e_r, || format!("seed {seed}: max row cover {max_r} > 2 E[r] = {}", 2.0 * e_r))?;
        worst_ratio = worst_ratio.max(max_r as f64 / e_r);
        ok += 1;
    }
    check(ok >= 18, || format!("only {ok}/20 seeds covered"))?;
    Ok(format!("{ok}/20 seeds cover exhaustively; max row cover <= {worst_ratio:.3} E[r] <= 2 E[r]"))
}

/// Entry (x, y) of a PAR circuit restricted to the given rows and columns.
fn restricted_entries(c: &Circuit, rows: &[u64], cols: &[u64]) -> HashMap<(u64, u64), u64> {
    let (rs, cs): (BTreeSet<u64>, BTreeSet<u64>) = (rows.iter().copied().collect(), cols.iter().copied().collect());
    let mut m = HashMap::new();
    for g in &c.gates {
        for (x, a) in g.u.entries().iter().filter(|e| rs.contains(&e.0)) {
            for (y, b) in g.v.entries().iter().filter(|e| cs.contains(&e.0)) {
                let (Scalar::Count(a), Scalar::Count(b)) = (a, b) else { panic!("not a PAR circuit") };
                *m.entry((*x, *y)).or_insert(0) += a * b;
            }
        }
    }
    m
}

fn c10() -> Outcome {
    let e = |e: Error| e.to_string();
    let c = circuit_power(&disjointness_pair_partition(Semiring::Par), 4).map_err(e)?;
    let eps = 1.0 / 15.0;
    let mut max_copies = 0;
    let mut runs = 0;
    for (rw, cw) in [(3u32, 3u32), (2, 4)] {
        let rows: Vec<u64> = weight_subsets(8, rw).collect();
        let cols: Vec<u64> = weight_subsets(8, cw).collect();
        let bound = (2f64.powf(((rows.len() * cols.len()) as f64).ln() / (1.0f64 / (3.0 * eps)).ln() + 1.0) - 1.0).floor() as u64;
        for seed in 0..10u64 {
            let (broken, s0, t0) = punch_holes(&c, &rows, &cols, 0.05, seed).map_err(e)?;
            check(!s0.is_empty() || !t0.is_empty(), || format!("seed {seed}: no holes punched"))?;
            let f = hole_fix(&broken, &rows, &cols, &s0, &t0, &Symmetry::Coordinates { n: 8 }, eps, seed).map_err(e)?;
            let got = restricted_entries(&f.circuit, &rows, &cols);
            for &x in &rows {
                for &y in &cols {
                    let v = got.get(&(x, y)).copied().unwrap_or(0);
                    check(v == u64::from(x & y == 0), || format!("class ({rw},{cw}) seed {seed}: entry ({x},{y}) = {v}"))?;
                }
            }
            check(f.copies as u64 <= bound, || format!("seed {seed}: {} copies > {bound}", f.copies))?;
            max_copies = max_copies.max(f.copies);
            runs += 1;
        }
    }
    Ok(format!("{runs} runs (classes (3,3), (2,4); 10 seeds each) verify entrywise; largest copy count {max_copies} within the class bounds"))
}

fn random_points(rng: &mut ChaCha8Rng, d: u32, m: u32, n: usize) -> Vec<Vec<u32>> {
    let density = rng.gen_range(0.1..0.6);
    (0..n).map(|_| (0..d).map(|_| if rng.gen_bool(density) { rng.gen_range(1..m) } else { 0 }).collect()).collect()
}

fn brute(u: &[Vec<u32>], v: &[Vec<u32>], m: u32) -> u128 {
    let mut c = 0;
    for a in u {
        for b in v {
            if a.iter().zip(b).map(|(x, y)| x * y).sum::<u32>() % m == 0 {
                c += 1;
            }
        }
    }
    c
}

fn brute_exact(u: &[Vec<u32>], v: &[Vec<u32>]) -> u128 {
    let mut c = 0;
    for a in u {
        for b in v {
            if a.iter().zip(b).all(|(x, y)| x * y == 0) {
                c += 1;
            }
        }
    }
    c
}

fn c11() -> Outcome {
    let t0 = Instant::now();
    let e = |e: Error| e.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut yes, mut no) = (0, 0);
    for i in 0..200 {
        let d = rng.gen_range(1..=16);
        let (nu, nv) = (rng.gen_range(1..=200), rng.gen_range(1..=200));
        let (u, v) = (random_points(&mut rng, d, 2, nu), random_points(&mut rng, d, 2, nv));
        let (pu, pv) = (PointSet::from_digits(2, &u).map_err(e)?, PointSet::from_digits(2, &v).map_err(e)?);
        let want = brute_exact(&u, &v);
        let got = ov_count(&pu, &pv).map_err(e)?.answer;
        check(got == want, || format!("count instance {i} (d={d}): {got} vs {want}"))?;
    }
    // coverings are cached per weight class across instances
    let decider = OvDecider::new(2024);
    for i in 0..200 {
        let d = rng.gen_range(1..=16);
        let (nu, nv) = (rng.gen_range(1..=200), rng.gen_range(1..=200));
        let (mut u, v) = (random_points(&mut rng, d, 2, nu), random_points(&mut rng, d, 2, nv));
        // plant-free half: push towards dense vectors so "no" answers occur
        if i % 2 == 1 {
            u.iter_mut().for_each(|a| a.iter_mut().for_each(|x| *x = u32::from(rng.gen_bool(0.9))));
        }
        let (pu, pv) = (PointSet::from_digits(2, &u).map_err(e)?, PointSet::from_digits(2, &v).map_err(e)?);
        let want = brute_exact(&u, &v) > 0;
        let got = if i % 10 == 0 { ov_decide(&pu, &pv, i) } else { decider.decide(&pu, &pv) }.map_err(e)?.answer;
        check(got == want, || format!("decide instance {i} (d={d}): {got} vs {want}"))?;
        if want {
            yes += 1;
        } else {
            no += 1;
        }
    }
    for i in 0..200 {
        let m = [2u32, 3, 5][i % 3];
        let cap = match m {
            2 => 16,
            3 => 10,
            _ => 7,
        };
        let d = rng.gen_range(1..=cap);
        let (nu, nv) = (rng.gen_range(1..=200), rng.gen_range(1..=200));
        let (u, v) = (random_points(&mut rng, d, m, nu), random_points(&mut rng, d, m, nv));
        let (pu, pv) = (PointSet::from_digits(m, &u).map_err(e)?, PointSet::from_digits(m, &v).map_err(e)?);
        let want = brute(&u, &v, m);
        let got = ov_count_mod(&pu, &pv, None).map_err(e)?.answer;
        check(got == want, || format!("mod {m} instance {i} (d={d}): {got} vs {want}"))?;
    }
    let t = t0.elapsed();
    within(t, Duration::from_secs(120), "600 instances")?;
    Ok(format!("600 instances match brute force (decide: {yes} yes, {no} no), {t:.2?}"))
}

fn c12() -> Outcome {
    let t0 = Instant::now();
    let dec = OvDecider::new(7);
    let target = (2.0 / 3f64.sqrt()).log2();
    let n = 200;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for d in 8..=20u32 {
        let w = (d as f64 / 3.0).round() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let limit = binom(d, w) as usize;
        let mut pts = || {
            let mut set = BTreeSet::new();
            while set.len() < n.min(limit) {
                set.insert(sample(&mut rng, d as usize, w as usize).iter().fold(0u64, |m, i| m | 1 << i));
            }
            PointSet::new(d, 2, set.into_iter().collect()).unwrap()
        };
        let (u, v) = (pts(), pts());
        let o = dec.decide(&u, &v).map_err(|e| e.to_string())?;
        let plan = dec.plan(WeightType { d, row_w: w, col_w: w }).map_err(|e| e.to_string())?;
        // t·P is the covering's oversampling, P the chance one set covers a pair
        let p = binom(d - 2 * w, plan.mu_w - w) as f64 / binom(d, plan.mu_w) as f64;
        let per_point = o.work as f64 / ((u.len() + v.len()) as f64 * plan.t as f64 * p);
        xs.push(d as f64);
        ys.push(per_point.log2());
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    check((slope - target).abs() <= SLOPE_TARGET_TOL, || format!("slope {slope:.4} vs {target:.4}"))?;
    Ok(format!(
        "normalized work slope {slope:.4} per dimension vs log2(2/sqrt3) = {target:.4} (tol {SLOPE_TARGET_TOL}), {:.2?}",
        t0.elapsed()
    ))
}

fn dense_rational(m: &SparseMatrix) -> Vec<Vec<BigRational>> {
    let mut out = vec![vec![BigRational::zero(); m.n_cols as usize]; m.n_rows as usize];
    for (i, j, v) in m.entries() {
        let Scalar::Rat(v) = v else { panic!("not rational") };
        out[*i as usize][*j as usize] = v.clone();
    }
    out
}

fn c13() -> Outcome {
    let e = |e: Error| e.to_string();
    let mut checks = Vec::new();
    for depth in [2u32, 4] {
        let layers = disjointness_stack(4, depth, false, Semiring::Rational).map_err(e)?;
        let p = dense_rational(&stack_product(&layers).map_err(e)?);
        let ok = (0..16).all(|x: usize| (0..16).all(|y: usize| p[x][y] == rat(i64::from(x & y == 0), 1)));
        check(ok && layers.len() == depth as usize, || format!("depth {depth} stack is not R^(x4)"))?;
        checks.push(format!("R^4 depth {depth}"));
    }
    let mf = mf_pipeline(&[rat(0, 1), rat(1, 1)], 2).map_err(e)?;
    check(mf.g == vec![rat(-1, 1), rat(1, 1)], || format!("g = {:?}", mf.g))?;
    let p = dense_rational(&stack_product(&mf.layers).map_err(e)?);
    check(p == vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]], || format!("n=1 M_f = {p:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut tables: Vec<(String, Vec<BigRational>, u32)> = Vec::new();
    let maj: Vec<BigRational> = (0..256u32).map(|x| rat(i64::from(x.count_ones() > 4), 1)).collect();
    tables.push(("majority n=8".into(), maj, 4));
    for n in [2u32, 5, 7, 10] {
        let f = (0..1u32 << n).map(|_| rat(rng.gen_range(-9..10), rng.gen_range(1..5))).collect();
        tables.push((format!("random n={n}"), f, 2));
    }
    for (name, f, depth) in &tables {
        let mf = mf_pipeline(f, *depth).map_err(e)?;
        let p = stack_product(&mf.layers).map_err(e)?;
        let want: usize = f.len();
        let mut seen = vec![false; want * want];
        for (x, y, v) in p.entries() {
            let Scalar::Rat(v) = v else { panic!("not rational") };
            check(*v == f[(x | y) as usize], || format!("{name}: entry ({x},{y})"))?;
            seen[*x as usize * want + *y as usize] = true;
        }
        let missing = (0..want).flat_map(|x| (0..want).map(move |y| (x, y))).find(|&(x, y)| !seen[x * want + y] && !f[x | y].is_zero());
        check(missing.is_none(), || format!("{name}: missing entry {missing:?}"))?;
        checks.push(name.clone());
    }
    Ok(format!("exact products: {}; n=1 fixture g=(-1,1) gives [[0,1],[1,1]]", checks.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("exponent 1.25026 for w1 at d=18", c1),
        ("exponent 1.249424 for the merged d=18 spec", c2),
        ("partition exactness", c3),
        ("closed-form alpha-volumes match measured circuits", c4),
        ("weak duality", c5),
        ("rebalanced circuits verify", c6),
        ("density certificate 4/3", c7),
        ("covering optima sqrt5 and 2/sqrt3", c8),
        ("randomized covering at d=12", c9),
        ("hole fixing on R^(x8) weight classes", c10),
        ("solver equivalence", c11),
        ("ov_decide scaling exponent", c12),
        ("depth-d stacking and M_f", c13),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let k = i + 1;
        if filter.is_some_and(|x| x != k) {
            continue;
        }
        let t0 = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let t = t0.elapsed();
        match r {
            Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail} [{t:.1?}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {why} [{t:.1?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
