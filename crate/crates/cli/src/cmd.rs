use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kronsynth::circuit::{circuit_power, yates_pair};
use kronsynth::degree::{
    cover_exponents, density_sup, exact_sup_two_orbits, random_cover, CoverCheck, CoverOptions, DensityPoly, DensitySpec,
    WeightType,
};
use kronsynth::formats::{read_krc, read_rects, write_krc, write_rects};
use kronsynth::partitions::{
    merged_alpha_volume, merged_partition, simple_alpha_volume, simple_partition, validate_partition, BundledCodes,
    RectangleFamily, ValidationMode, WordSpec,
};
use kronsynth::semiring::{format_rational, parse_rational};
use kronsynth::solvers::{
    apply_disjointness, circuit_factors, disjointness_stack, mf_pipeline, mobius_subset, mobius_superset, ov_count_mod,
    ov_count_with, ov_decide, stack_apply, stack_size, wht, zeta_subset, zeta_superset, CountMethod, OvOutcome, PointSet,
};
use kronsynth::spectrum::{
    build_schedule, envelope_argmax, expand_schedule, profile_hash, weak_duality_bound, write_ksched, AlphaProfile, Envelope,
    Strategy,
};
use kronsynth::{verify as verify_circuit, Circuit, Interval, MatrixSpec, Scalar, Semiring, VerifyScope};
use num_rational::BigRational;

use crate::profiles::{parse_all, parse_one, Source};
use crate::{
    ApplyArgs, CoverArgs, CurveArgs, DensityArgs, OvArgs, RebalanceArgs, ReproArgs, SynthArgs, SynthKind, VerifyArgs,
};

const DIGITS: usize = 7;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn upper(x: &Interval) -> String {
    format!("<= {} (outward)", x.upper_string(DIGITS))
}

fn lower(x: &Interval) -> String {
    format!(">= {} (outward)", x.lower_string(DIGITS))
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    read_krc(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// exhaustive | sample:N
fn parse_sampling(s: &str) -> Result<Option<u64>> {
    match s {
        "exhaustive" => Ok(None),
        _ => match s.strip_prefix("sample:").and_then(|n| n.parse().ok()) {
            Some(n) => Ok(Some(n)),
            None => bail!("mode must be 'exhaustive' or 'sample:N', got '{s}'"),
        },
    }
}

fn parse_values(text: &str) -> Result<Vec<BigRational>> {
    text.split_whitespace()
        .filter(|t| !t.starts_with('#'))
        .map(|t| parse_rational(t).ok_or_else(|| anyhow!("bad rational '{t}'")))
        .collect()
}

fn parse_matrix(s: &str) -> Result<MatrixSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<u32> {
        parts.get(i).and_then(|x| x.parse().ok()).ok_or_else(|| anyhow!("bad matrix spec '{s}'"))
    };
    Ok(match parts[0] {
        "disj" => MatrixSpec::Disjointness(num(1)?),
        "hadamard" => MatrixSpec::Hadamard(num(1)?),
        "dft" => MatrixSpec::Dft { m: num(1)?, d: num(2)? },
        "identity" => MatrixSpec::Identity(num(1)? as u64),
        "orcirc" => {
            let path = s.strip_prefix("orcirc:").ok_or_else(|| anyhow!("orcirc needs a file"))?;
            MatrixSpec::OrCirculant(parse_values(&read(Path::new(path))?)?)
        }
        _ => bail!("unknown matrix '{s}' (disj:d, hadamard:d, dft:m:d, identity:n, orcirc:FILE)"),
    })
}

fn family_summary(f: &RectangleFamily, rho: &Interval) -> String {
    let size: u128 = f.shapes().iter().map(|(a, b)| a + b).sum();
    format!(
        "d={} rectangles={} covered={} size={}\nlog2 rho(1/2)^(1/d) {}",
        f.d,
        f.rects.len(),
        f.covered(),
        size,
        upper(&rho.root(f.d).log2())
    )
}

pub fn synth(a: SynthArgs) -> Result<bool> {
    let half = Interval::from_ratio(1, 2);
    let codes = a.codes.as_ref().map(BundledCodes::with_dir).unwrap_or_default();
    let (family, circuit) = match &a.kind {
        SynthKind::Simple { d, word } => {
            let f = simple_partition(*d, word)?;
            println!("{}", family_summary(&f, &simple_alpha_volume(*d, word, &half)?));
            (Some(f), None)
        }
        SynthKind::Merged { d, spec } => {
            let spec: WordSpec = spec.parse()?;
            let f = merged_partition(*d, &spec, &codes)?;
            println!("{}", family_summary(&f, &merged_alpha_volume(*d, &spec, &half)?));
            (Some(f), None)
        }
        SynthKind::Yates { matrix } => {
            let m = parse_matrix(matrix)?.generate()?;
            (None, Some(yates_pair(&m)))
        }
        SynthKind::Power { circuit, k } => (None, Some(circuit_power(&load_circuit(circuit)?, *k)?)),
    };
    if let Some(c) = &circuit {
        println!("rows={} cols={} gates={} size={} semiring={}", c.n_rows, c.n_cols, c.gates.len(), c.size(), c.semiring);
    }
    let Some(out) = &a.emit else { return Ok(true) };
    let sr = Semiring::parse_token(&a.semiring)?;
    let text = match out.extension().and_then(|e| e.to_str()) {
        Some("rects") => match &family {
            Some(f) => write_rects(f),
            None => bail!("only partitions can be written as .rects"),
        },
        Some("krc") => match (&family, &circuit) {
            (Some(f), _) => write_krc(&f.to_circuit(sr)?),
            (_, Some(c)) => write_krc(&c.convert(sr).unwrap_or_else(|_| c.clone())),
            _ => unreachable!(),
        },
        _ => bail!("--emit needs a .rects or .krc extension"),
    };
    write(out, &text)?;
    println!("wrote {}", out.display());
    Ok(true)
}

pub fn verify(a: VerifyArgs) -> Result<bool> {
    let sampling = parse_sampling(&a.mode)?;
    if let Some(path) = &a.rects {
        let fam = match read_rects(&read(path)?) {
            Ok(f) => f,
            Err(e) => {
                println!("FAIL {}: {e}", path.display());
                return Ok(false);
            }
        };
        let mode = match sampling {
            None => ValidationMode::Exhaustive,
            Some(samples) => {
                println!("# seed {}", a.seed);
                ValidationMode::CountingSample { seed: a.seed, samples }
            }
        };
        let rep = validate_partition(&fam, mode)?;
        println!("{rep}");
        return Ok(rep.passed());
    }
    let path = a.circuit.as_ref().ok_or_else(|| anyhow!("give --rects or --circuit with --matrix"))?;
    let c = match read_krc(&read(path)?) {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL {}: {e}", path.display());
            return Ok(false);
        }
    };
    let target = parse_matrix(a.matrix.as_deref().expect("required by clap"))?;
    let mode = match a.semantics.as_str() {
        "par" => Semiring::Par,
        "or" => Semiring::Or,
        "field" => match (target.natural_semiring(), c.semiring) {
            (Semiring::Rational, Semiring::Par | Semiring::Or) => Semiring::Rational,
            (_, s) if s.is_field() => s,
            (t, _) => t,
        },
        s => bail!("--semantics must be par, or, or field; got '{s}'"),
    };
    let scope = match sampling {
        None => VerifyScope::Exhaustive,
        Some(samples) => {
            println!("# seed {}", a.seed);
            VerifyScope::Sampled { seed: a.seed, samples }
        }
    };
    let rep = verify_circuit(&c, &target, mode, scope)?;
    println!("{rep}");
    Ok(rep.passed())
}

pub fn curve(a: CurveArgs) -> Result<bool> {
    let profiles = parse_all(&a.profiles, a.transposes)?;
    let env = Envelope::new(profiles.iter().map(|p| p.profile.clone()).collect())?;
    let arg = envelope_argmax(&env, a.grid);
    let grid = a.grid.max(1);
    let star = (arg.alpha() * grid as f64).round() as u32;
    let mut out = String::new();
    writeln!(out, "# per-level log2 rho_t(alpha)^(1/n_t); envelope = min over profiles").unwrap();
    writeln!(out, "# sup log2 C(alpha) {} at alpha = {:.7}", upper(&arg.sup.log2()), arg.alpha()).unwrap();
    let labels: Vec<String> = env
        .profiles
        .iter()
        .map(|p| if p.label.contains(',') { format!("\"{}\"", p.label) } else { p.label.clone() })
        .collect();
    writeln!(out, "alpha,{},envelope,argmax", labels.join(",")).unwrap();
    for i in 0..=grid {
        let x = i as f64 / grid as f64;
        let vals: Vec<String> = env.profiles.iter().map(|p| format!("{:.9}", p.log2_normalized_f64(x))).collect();
        let mark = if i == star { "*" } else { "" };
        writeln!(out, "{x:.6},{},{:.9},{mark}", vals.join(","), env.log2_f64(x)).unwrap();
    }
    match &a.out {
        Some(p) => write(p, &out)?,
        None => print!("{out}"),
    }
    Ok(true)
}

pub fn rebalance(a: RebalanceArgs) -> Result<bool> {
    let profiles = parse_all(&a.profiles, a.transposes)?;
    let bare: Vec<AlphaProfile> = profiles.iter().map(|p| p.profile.clone()).collect();
    let lambda = parse_rational(&a.lambda).ok_or_else(|| anyhow!("bad lambda '{}'", a.lambda))?;
    let strategy: Strategy = a.strategy.parse()?;
    let mut s = build_schedule(&bare, a.n, &lambda, strategy)?;
    let circuits = if a.emit.is_some() || profiles.iter().all(|p| matches!(p.source, Source::File(_))) {
        Some(profiles.iter().map(|p| p.circuit()).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    if let Some(cs) = &circuits {
        s.hashes = cs.iter().map(profile_hash).collect();
    }
    let skew = s.skew(&bare)?;
    let size = s.size(&bare)?;
    let log_size = Interval::from_rational(&size).log2();
    println!("n={} lambda={} strategy={}", a.n, format_rational(&lambda), a.strategy);
    println!("skew S(lambda,T) = {}", format_rational(&skew));
    println!("size = {}", format_rational(&size));
    println!("log2 size / n {}", upper(&log_size.div(&Interval::from_u128(a.n.max(1) as u128))));
    let env = Envelope::new(bare.clone())?;
    let arg = envelope_argmax(&env, 64);
    let bound = weak_duality_bound(&env, &arg.alpha_interval(), a.n, &lambda);
    println!("weak duality bound at alpha = {:.7}: skew {}", arg.alpha(), lower(&bound));
    if let Some(p) = &a.sched {
        write(p, &write_ksched(&s))?;
        println!("wrote {}", p.display());
    }
    if let Some(p) = &a.emit {
        let c = expand_schedule(&s, circuits.as_deref().expect("built above"))?;
        println!("expanded: rows={} cols={} gates={} size={}", c.n_rows, c.n_cols, c.gates.len(), c.size());
        write(p, &write_krc(&c))?;
        println!("wrote {}", p.display());
    }
    Ok(true)
}

pub fn cover(a: CoverArgs) -> Result<bool> {
    let check = match a.verify.as_str() {
        "skip" => CoverCheck::Skip,
        s => match parse_sampling(s)? {
            None => CoverCheck::Exhaustive,
            Some(samples) => CoverCheck::Sampled { samples },
        },
    };
    let wt = WeightType { d: a.d, row_w: a.p, col_w: a.q };
    let plan = random_cover(wt, a.mu, a.seed, CoverOptions { check, ..CoverOptions::default() })?;
    let mut distinct = plan.sets.clone();
    distinct.dedup();
    let (h, w) = plan.shape();
    println!("# seed {}", a.seed);
    println!("d={} p={} q={} mu={} t={} distinct={} attempt={}", a.d, a.p, a.q, a.mu, plan.t, distinct.len(), plan.attempt);
    println!("rectangle shape {h}x{w}");
    println!("max row cover {} (expected {:.3})", plan.max_row_cover, plan.expected_row_cover);
    println!("max col cover {} (expected {:.3})", plan.max_col_cover, plan.expected_col_cover);
    println!("check {:?}: covered", plan.check);
    if let Some(p) = &a.emit {
        write(p, &write_rects(&plan.to_family()))?;
        println!("wrote {}", p.display());
    }
    Ok(true)
}

fn print_sup(name: &str, poly: &DensityPoly) {
    let s = density_sup(poly);
    let pt: Vec<String> = s.point.iter().map(|x| format!("{x:.6}")).collect();
    println!("{name} sup ~ {:.7} at ({}), certified <= {:.7}", s.value, pt.join(", "), s.upper);
    if let Some((q, v)) = exact_sup_two_orbits(poly) {
        println!("{name} exact sup {} at p0 = {}", format_rational(&v), format_rational(&q));
    }
}

pub fn density(a: DensityArgs) -> Result<bool> {
    let c = load_circuit(&a.circuit)?;
    let level = match a.level {
        Some(l) => l,
        None => {
            let (mut n, mut l) = (c.n_rows, 0);
            while n > 1 && n % a.base == 0 {
                n /= a.base;
                l += 1;
            }
            if n != 1 {
                bail!("{} rows is not a power of {}; pass --level", c.n_rows, a.base);
            }
            l
        }
    };
    let orbit: Vec<usize> = a.orbit.clone().unwrap_or_else(|| (0..a.base as usize).collect());
    let mut spec = DensitySpec::new(&c, (a.base, a.base), level, &orbit, &orbit)?;
    if a.symmetrize {
        spec = spec.kron(&spec.transpose())?;
    }
    println!("rows: {}", spec.rows);
    println!("cols: {}", spec.cols);
    if a.sup {
        print_sup("rows", &spec.rows);
        print_sup("cols", &spec.cols);
    }
    Ok(true)
}

pub fn exponents() -> Result<bool> {
    let e = cover_exponents();
    let sqrt5 = 5f64.sqrt();
    let two_over_sqrt3 = 2.0 / 3f64.sqrt();
    println!("quantity,p,q,mu,base,log2 base,closed form,closed form value");
    for (name, o, form, v) in [
        ("sigma_OR", e.sigma_or, "sqrt(5)", sqrt5),
        ("delta_OR", e.delta_or, "2/sqrt(3)", two_over_sqrt3),
    ] {
        println!("{name},{:.6},{:.6},{:.6},{:.7},{:.7},{form},{:.7}", o.p, o.q, o.mu, o.value, o.exponent, v);
    }
    Ok(true)
}

fn print_outcome<T: std::fmt::Display>(o: &OvOutcome<T>, stats: bool) {
    println!("answer {}", o.answer);
    if stats {
        println!("work {}", o.work);
        println!("probes {}", o.probes);
        println!("classes {}", o.classes);
    }
}

pub fn ov(a: OvArgs) -> Result<bool> {
    let m = a.modulus.unwrap_or(2);
    let load = |p: &Path| -> Result<PointSet> {
        PointSet::parse(&read(p)?, m).with_context(|| format!("parsing {}", p.display()))
    };
    let (u, v) = (load(&a.u)?, load(&a.v)?);
    let base = a.circuit.as_deref().map(load_circuit).transpose()?;
    if a.decide {
        println!("# seed {}", a.seed);
        print_outcome(&ov_decide(&u, &v, a.seed)?, a.stats);
    } else if a.modulus.is_some() {
        print_outcome(&ov_count_mod(&u, &v, base.as_ref().map(|c| (c, a.d0)))?, a.stats);
    } else {
        let method = match base {
            Some(base) => CountMethod::Custom { base, d0: a.d0 },
            None => CountMethod::Partition,
        };
        print_outcome(&ov_count_with(&u, &v, &method)?, a.stats);
    }
    Ok(true)
}

pub fn apply(a: ApplyArgs) -> Result<bool> {
    let text = read(&a.input)?;
    if let Some(path) = &a.circuit {
        let c = load_circuit(path)?;
        let sr = c.semiring;
        let x = text.split_whitespace().map(|t| sr.parse_value(t)).collect::<kronsynth::Result<Vec<_>>>()?;
        let y = c.apply(&x)?;
        println!("# ops {}", c.size());
        y.iter().for_each(|v| println!("{}", sr.format_value(v)));
        return Ok(true);
    }
    let sr = Semiring::Rational;
    let mut x: Vec<Scalar> = parse_values(&text)?.into_iter().map(Scalar::Rat).collect();
    let kind = a.transform.as_deref().ok_or_else(|| anyhow!("give --transform or --circuit"))?;
    if !x.len().is_power_of_two() {
        bail!("input length {} is not a power of two", x.len());
    }
    let n = x.len().trailing_zeros();
    let ops = match kind {
        "zeta" => zeta_subset(sr, &mut x)?,
        "zeta-super" => zeta_superset(sr, &mut x)?,
        "mobius" => mobius_subset(sr, &mut x)?,
        "mobius-super" => mobius_superset(sr, &mut x)?,
        "wht" => wht(sr, &mut x)?,
        "disj" => {
            let (y, ops) = apply_disjointness(sr, &x)?;
            x = y;
            ops
        }
        "stack" => {
            let layers = disjointness_stack(n, a.depth, true, sr)?;
            x = stack_apply(&layers, &x)?;
            stack_size(&layers) as u64
        }
        "mf" => {
            let f = parse_values(&read(a.f.as_deref().ok_or_else(|| anyhow!("mf needs --f"))?)?)?;
            let mf = mf_pipeline(&f, a.depth)?;
            x = stack_apply(&mf.layers, &x)?;
            stack_size(&mf.layers) as u64
        }
        k => bail!("unknown transform '{k}'"),
    };
    println!("# ops {ops}");
    x.iter().for_each(|v| println!("{}", sr.format_value(v)));
    Ok(true)
}

struct Row {
    name: &'static str,
    value: Interval,
    published: &'static str,
    ok: bool,
}

/// Table entries are upper bounds, so they are compared after rounding up.
fn matches_published(x: &Interval, published: f64, decimals: i32) -> bool {
    let scale = 10f64.powi(decimals);
    (x.lo() * scale).ceil() == (published * scale).round() && (x.hi() * scale).ceil() == (published * scale).round()
}

pub fn repro(a: ReproArgs) -> Result<bool> {
    let half = Interval::from_ratio(1, 2);
    let codes = a.codes.as_ref().map(BundledCodes::with_dir).unwrap_or_default();
    let mut rows = Vec::new();

    let r1 = MatrixSpec::Disjointness(1).generate_in(Semiring::Par)?;
    let (u, _) = circuit_factors(&yates_pair(&r1))?;
    let n = Interval::from_u128(u.n_rows as u128);
    let yates = Interval::from_u128(u.nnz() as u128).log2().div(&n.log2());
    rows.push(Row { name: "Yates", ok: matches_published(&yates, 1.293, 3), value: yates, published: "1.293" });

    let one_sided = parse_one("RR")?.profile;
    let env = Envelope::new(vec![one_sided.clone(), one_sided.transpose()])?;
    let v = envelope_argmax(&env, 64).sup.log2();
    rows.push(Row { name: "one-sided R_1, sup over alpha", ok: matches_published(&v, 1.272, 3), value: v, published: "1.272" });

    let w15 = "RC".repeat(8);
    let v = simple_alpha_volume(15, &w15, &half)?.root(15).log2();
    rows.push(Row { name: "alternating word, d=15", ok: v.certainly_lt(&Interval::point(1.251)), value: v, published: "1.251" });

    let w18 = "RCRCRCRCRCRCRCRCRCR";
    let v = simple_alpha_volume(18, w18, &half)?.root(18).log2();
    rows.push(Row { name: "alternating word, d=18", ok: v.certainly_lt(&Interval::point(1.25026)), value: v, published: "1.2503" });

    let spec: WordSpec = "RCR+C+R+C+R+C+RCRCR:9,9,198,198,1260,1260".parse()?;
    merged_partition(18, &spec, &codes).context("merged d=18 spec needs the bundled code tables")?;
    let v = merged_alpha_volume(18, &spec, &half)?.root(18).log2();
    rows.push(Row { name: "merged, d=18", ok: v.certainly_lt(&Interval::point(1.249424)), value: v, published: "1.2495" });

    println!("row,computed log2 exponent,published,consistent");
    for r in &rows {
        println!("{},<= {} (outward),{},{}", r.name, r.value.upper_string(a.digits), r.published, if r.ok { "yes" } else { "NO" });
    }
    println!("# computed values are upper ends of certified enclosures, rounded outward");
    Ok(rows.iter().all(|r| r.ok))
}
