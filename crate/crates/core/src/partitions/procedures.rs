use std::fmt;
use std::str::FromStr;

use crate::combinatorics::{binom, binom_tail, weight_subsets};
use crate::error::{Error, Result};
use crate::interval::{alpha_volume_terms, Interval};

use super::codes::CodeProvider;
use super::family::{Rect, RectangleFamily, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    R,
    C,
    RPlus,
    CPlus,
}

impl Letter {
    fn is_merge(self) -> bool {
        matches!(self, Letter::RPlus | Letter::CPlus)
    }

    fn is_row(self) -> bool {
        matches!(self, Letter::R | Letter::RPlus)
    }
}

/// A word over {R, C, R+, C+} with one merge count per merge letter, in
/// the order the merge letters appear.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordSpec {
    pub letters: Vec<Letter>,
    pub merges: Vec<u64>,
}

impl WordSpec {
    pub fn new(word: &str, merges: Vec<u64>) -> Result<Self> {
        let letters = parse_letters(word)?;
        let slots = letters.iter().filter(|l| l.is_merge()).count();
        if slots != merges.len() {
            return Err(Error::Invalid(format!("word has {slots} merge letters but {} merge counts", merges.len())));
        }
        Ok(WordSpec { letters, merges })
    }

    pub fn plain(word: &str) -> Result<Self> {
        Self::new(word, Vec::new())
    }

    /// |w| plus the number of merge letters.
    pub fn weight(&self) -> usize {
        self.letters.len() + self.letters.iter().filter(|l| l.is_merge()).count()
    }

    fn check(&self, d: u32) -> Result<()> {
        if self.weight() != d as usize + 1 {
            return Err(Error::Invalid(format!("word weight {} must equal d+1 = {}", self.weight(), d + 1)));
        }
        Ok(())
    }

    /// (letter, r_i, c_i, merge count) per step.
    pub fn steps(&self) -> Vec<(Letter, u32, u32, u64)> {
        let (mut r, mut c) = (0u32, 0u32);
        let mut slot = 0;
        let mut out = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            let a = if l.is_merge() {
                slot += 1;
                self.merges[slot - 1]
            } else {
                0
            };
            out.push((l, r, c, a));
            let inc = if l.is_merge() { 2 } else { 1 };
            if l.is_row() {
                r += inc;
            } else {
                c += inc;
            }
        }
        out
    }
}

impl fmt::Display for WordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            let s = match l {
                Letter::R => "R",
                Letter::C => "C",
                Letter::RPlus => "R+",
                Letter::CPlus => "C+",
            };
            f.write_str(s)?;
        }
        Ok(())
    }
}

impl FromStr for WordSpec {
    type Err = Error;

    /// `WORD` or `WORD:a1,a2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (w, a) = match s.split_once(':') {
            Some((w, a)) => (w, a),
            None => (s, ""),
        };
        let merges = a
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Invalid(format!("bad merge count '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        WordSpec::new(w, merges)
    }
}

fn parse_letters(word: &str) -> Result<Vec<Letter>> {
    let mut out = Vec::new();
    let mut it = word.chars().peekable();
    while let Some(ch) = it.next() {
        let plus = it.peek() == Some(&'+');
        if plus {
            it.next();
        }
        out.push(match (ch, plus) {
            ('R', false) => Letter::R,
            ('C', false) => Letter::C,
            ('R', true) => Letter::RPlus,
            ('C', true) => Letter::CPlus,
            _ => return Err(Error::Invalid(format!("unexpected '{ch}' in word '{word}'"))),
        });
    }
    Ok(out)
}

/// Rectangles of one plain row step, oriented so the step takes rows.
fn row_step(d: u32, r: u32, c: u32) -> Vec<Rect> {
    weight_subsets(d, r).map(|s| Rect::new(Side::single(s), Side::avoiding(s, c, d))).collect()
}

/// Rectangles of one merging row step, given the merge sets (size r+1).
fn merge_row_step(d: u32, r: u32, c: u32, sets: &[u64]) -> Vec<Rect> {
    let mut out = Vec::new();
    let mut claimed = std::collections::HashMap::new();
    for &sj in sets {
        let mut rows = vec![sj];
        let mut bits = sj;
        while bits != 0 {
            let x = bits & bits.wrapping_neg();
            bits ^= x;
            rows.push(sj ^ x);
            claimed.insert(sj ^ x, (sj, x));
        }
        out.push(Rect::new(Side::List(rows), Side::avoiding(sj, c, d)));
    }
    let merged: std::collections::HashSet<u64> = sets.iter().copied().collect();
    for s in weight_subsets(d, r) {
        match claimed.get(&s) {
            // the only columns left for S are those meeting S_j in x = S_j \ S
            Some(&(_, x)) => out.push(Rect::new(
                Side::single(s),
                Side::Pred { must: x, forbid: s, min_w: c, max_w: d },
            )),
            None => out.push(Rect::new(Side::single(s), Side::avoiding(s, c, d))),
        }
    }
    for s in weight_subsets(d, r + 1) {
        if !merged.contains(&s) {
            out.push(Rect::new(Side::single(s), Side::avoiding(s, c, d)));
        }
    }
    out
}

fn drop_empty(d: u32, rects: Vec<Rect>) -> Vec<Rect> {
    rects.into_iter().filter(|r| r.rows.count(d) > 0 && r.cols.count(d) > 0).collect()
}

/// Take one weight class of rows or columns at a time, as directed by a
/// word over {R, C} of length d+1.
pub fn simple_partition(d: u32, word: &str) -> Result<RectangleFamily> {
    let spec = WordSpec::plain(word)?;
    if spec.letters.iter().any(|l| l.is_merge()) {
        return Err(Error::Invalid("simple words use only R and C".into()));
    }
    if spec.letters.len() != d as usize + 1 {
        return Err(Error::Invalid(format!("word length {} must be d+1 = {}", spec.letters.len(), d + 1)));
    }
    let mut rects = Vec::new();
    for (l, r, c, _) in spec.steps() {
        match l {
            Letter::R => rects.extend(row_step(d, r, c)),
            _ => rects.extend(row_step(d, c, r).iter().map(Rect::transpose)),
        }
    }
    Ok(RectangleFamily::new(d, drop_empty(d, rects)))
}

/// The merging procedure. Merge sets come from `codes` as a distance-4
/// code of weight r_i+1 (pairwise intersections below r_i).
pub fn merged_partition(d: u32, spec: &WordSpec, codes: &dyn CodeProvider) -> Result<RectangleFamily> {
    spec.check(d)?;
    let mut rects = Vec::new();
    for (l, r, c, a) in spec.steps() {
        let (own, other) = if l.is_row() { (r, c) } else { (c, r) };
        let step = if l.is_merge() {
            let sets = if a == 0 { Vec::new() } else { codes.lookup(d, 4, own + 1, a as usize)?.codewords };
            merge_row_step(d, own, other, &sets)
        } else {
            row_step(d, own, other)
        };
        if l.is_row() {
            rects.extend(step);
        } else {
            rects.extend(step.iter().map(Rect::transpose));
        }
    }
    Ok(RectangleFamily::new(d, drop_empty(d, rects)))
}

/// Terms (a, b, multiplicity) of the closed-form α-volume of a plain word.
pub fn simple_terms(d: u32, word: &str) -> Result<Vec<(u128, u128, u128)>> {
    let spec = WordSpec::plain(word)?;
    if spec.letters.len() != d as usize + 1 || spec.letters.iter().any(|l| l.is_merge()) {
        return Err(Error::Invalid(format!("'{word}' is not a plain word of length {}", d + 1)));
    }
    merged_terms(d, &spec)
}

/// Terms (a, b, multiplicity) of the closed-form α-volume of a merged word.
pub fn merged_terms(d: u32, spec: &WordSpec) -> Result<Vec<(u128, u128, u128)>> {
    spec.check(d)?;
    let mut out = Vec::new();
    for (l, r, c, a) in spec.steps() {
        let (own, other) = if l.is_row() { (r, c) } else { (c, r) };
        let a = a as u128;
        // (rows, cols, count) in the row-oriented frame
        let mut t: Vec<(u128, u128, i128)> = Vec::new();
        if l.is_merge() {
            let tail = |k: i64| binom_tail(d - own - 1, k);
            t.push(((own + 2) as u128, tail(other as i64), a as i128));
            t.push((1, tail(other as i64 - 1), ((own + 1) as u128 * a) as i128));
            t.push((1, binom_tail(d - own, other as i64), binom(d, own) as i128 - ((own + 1) as u128 * a) as i128));
            t.push((1, tail(other as i64), binom(d, own + 1) as i128 - a as i128));
        } else {
            t.push((1, binom_tail(d - own, other as i64), binom(d, own) as i128));
        }
        for (x, y, m) in t {
            if m < 0 {
                return Err(Error::Invalid(format!("merge count {a} exceeds available rows at step ({r},{c})")));
            }
            if m == 0 || x == 0 || y == 0 {
                continue;
            }
            out.push(if l.is_row() { (x, y, m as u128) } else { (y, x, m as u128) });
        }
    }
    Ok(out)
}

pub fn simple_alpha_volume(d: u32, word: &str, alpha: &Interval) -> Result<Interval> {
    Ok(alpha_volume_terms(simple_terms(d, word)?, alpha))
}

pub fn merged_alpha_volume(d: u32, spec: &WordSpec, alpha: &Interval) -> Result<Interval> {
    Ok(alpha_volume_terms(merged_terms(d, spec)?, alpha))
}
