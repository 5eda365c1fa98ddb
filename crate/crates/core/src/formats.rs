//! Text formats: `.krc` circuits and `.rects` rectangle families.
//! Writers are canonical, so parse ∘ write is the identity on files this
//! crate emits.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::matrix::SparseVector;
use crate::partitions::{Rect, RectangleFamily, Side};
use crate::semiring::Semiring;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn write_krc(c: &Circuit) -> String {
    let mut s = String::new();
    let sr = c.semiring;
    writeln!(s, "krc v1 {} {} {} {}", c.n_rows, c.n_cols, c.gates.len(), sr).unwrap();
    for g in &c.gates {
        for (tag, v) in [("U", &g.u), ("V", &g.v)] {
            write!(s, "{tag} {}", v.nnz()).unwrap();
            for (i, x) in v.entries() {
                write!(s, " {i}:{}", sr.format_value(x)).unwrap();
            }
            s.push('\n');
        }
    }
    s
}

pub fn read_krc(text: &str) -> Result<Circuit> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 || h[0] != "krc" || h[1] != "v1" {
        return Err(perr(1, "expected 'krc v1 <n_rows> <n_cols> <n_gates> <semiring>'"));
    }
    let num = |s: &str| s.parse::<u64>().map_err(|_| perr(1, format!("bad number '{s}'")));
    let (n_rows, n_cols, n_gates) = (num(h[2])?, num(h[3])?, num(h[4])?);
    let sr = Semiring::parse_token(h[5]).map_err(|e| perr(1, e.to_string()))?;
    let mut read_vec = |tag: &str, len: u64| -> Result<SparseVector> {
        let (ln, line) = lines.next().ok_or_else(|| perr(0, format!("missing {tag} line")))?;
        let ln = ln + 1;
        let mut toks = line.split_whitespace();
        if toks.next() != Some(tag) {
            return Err(perr(ln, format!("expected '{tag}' line")));
        }
        let k: usize = toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| perr(ln, "missing entry count"))?;
        let mut entries = Vec::with_capacity(k);
        for t in toks {
            let (i, v) = t.split_once(':').ok_or_else(|| perr(ln, format!("bad entry '{t}'")))?;
            let i: u64 = i.parse().map_err(|_| perr(ln, format!("bad index '{i}'")))?;
            if i >= len {
                return Err(perr(ln, format!("index {i} out of range {len}")));
            }
            let v = sr.parse_value(v).map_err(|e| perr(ln, e.to_string()))?;
            if sr.is_zero(&v) {
                return Err(perr(ln, "stored zero"));
            }
            entries.push((i, v));
        }
        if entries.len() != k {
            return Err(perr(ln, format!("declared {k} entries, found {}", entries.len())));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(perr(ln, "indices must be strictly increasing"));
        }
        SparseVector::new(len, entries, sr).map_err(|e| perr(ln, e.to_string()))
    };
    let mut gates = Vec::with_capacity(n_gates as usize);
    for _ in 0..n_gates {
        let u = read_vec("U", n_rows)?;
        let v = read_vec("V", n_cols)?;
        gates.push(Gate { u, v });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln + 1, "trailing content after the declared gates"));
    }
    Circuit::new(n_rows, n_cols, sr, gates)
}

fn write_side(s: &mut String, tag: char, side: &Side) {
    match side {
        Side::List(v) => {
            s.push(tag);
            for x in v {
                write!(s, " {x}").unwrap();
            }
        }
        Side::Pred { must, forbid, min_w, max_w } => {
            write!(s, "{tag}pred {min_w} {max_w} {forbid}").unwrap();
            if *must != 0 {
                write!(s, " {must}").unwrap();
            }
        }
    }
}

pub fn write_rects(f: &RectangleFamily) -> String {
    let mut s = String::new();
    writeln!(s, "rects v1 {} {}", f.d, f.rects.len()).unwrap();
    for r in &f.rects {
        write_side(&mut s, 'R', &r.rows);
        s.push_str(" | ");
        write_side(&mut s, 'C', &r.cols);
        s.push('\n');
    }
    s
}

fn parse_side(ln: usize, tag: char, text: &str, d: u32) -> Result<Side> {
    let mut toks = text.split_whitespace();
    let head = toks.next().ok_or_else(|| perr(ln, "empty side"))?;
    let nums = toks
        .map(|t| t.parse::<u64>().map_err(|_| perr(ln, format!("bad number '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    let limit = 1u64 << d;
    if head.len() == 1 && head.starts_with(tag) {
        if let Some(x) = nums.iter().find(|&&x| x >= limit) {
            return Err(perr(ln, format!("index {x} outside [0, 2^{d})")));
        }
        if nums.windows(2).any(|w| w[0] >= w[1]) {
            return Err(perr(ln, "indices must be strictly increasing"));
        }
        Ok(Side::List(nums))
    } else if head == format!("{tag}pred") {
        if nums.len() != 3 && nums.len() != 4 {
            return Err(perr(ln, "predicate is '<minw> <maxw> <forbid> [must]'"));
        }
        let must = nums.get(3).copied().unwrap_or(0);
        if nums[2] >= limit || must >= limit || nums[0] > d as u64 || nums[1] > d as u64 {
            return Err(perr(ln, "predicate out of range"));
        }
        Ok(Side::Pred { must, forbid: nums[2], min_w: nums[0] as u32, max_w: nums[1] as u32 })
    } else {
        Err(perr(ln, format!("expected '{tag}' or '{tag}pred', found '{head}'")))
    }
}

pub fn read_rects(text: &str) -> Result<RectangleFamily> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "rects" || h[1] != "v1" {
        return Err(perr(1, "expected 'rects v1 <d> <count>'"));
    }
    let d: u32 = h[2].parse().map_err(|_| perr(1, "bad d"))?;
    let count: usize = h[3].parse().map_err(|_| perr(1, "bad count"))?;
    if d > 63 {
        return Err(perr(1, "d must be below 64"));
    }
    let mut rects = Vec::with_capacity(count);
    for (ln, line) in lines {
        let ln = ln + 1;
        let (a, b) = line.split_once('|').ok_or_else(|| perr(ln, "missing '|'"))?;
        rects.push(Rect { rows: parse_side(ln, 'R', a, d)?, cols: parse_side(ln, 'C', b, d)? });
    }
    if rects.len() != count {
        return Err(perr(0, format!("declared {count} rectangles, found {}", rects.len())));
    }
    Ok(RectangleFamily::new(d, rects))
}
