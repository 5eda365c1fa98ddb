//! Constant-weight codes supplying the merge sets of the merged procedure.
//!
//! Two tables ship with the crate (length 18, distance 4, weights 4 and 6);
//! everything else comes from a greedy lexicographic packing. Tables are
//! checked against their invariants every time they are loaded.

use std::path::{Path, PathBuf};

use crate::combinatorics::weight_subsets;
use crate::error::{Error, Result};

const BUNDLED: &[(u32, u32, u32, &str)] = &[
    (18, 4, 4, include_str!("../../assets/codes/A_18_4_4.txt")),
    (18, 4, 6, include_str!("../../assets/codes/A_18_4_6.txt")),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeTable {
    pub n: u32,
    pub distance: u32,
    pub weight: u32,
    pub codewords: Vec<u64>,
}

impl CodeTable {
    /// One codeword per line, as whitespace-separated coordinates in [0, n).
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, n: u32, distance: u32, weight: u32) -> Result<Self> {
        let mut codewords = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut w = 0u64;
            for tok in line.split_whitespace() {
                let e: u32 = tok
                    .parse()
                    .map_err(|_| Error::Parse { line: ln + 1, msg: format!("bad coordinate '{tok}'") })?;
                if e >= n {
                    return Err(Error::Parse { line: ln + 1, msg: format!("coordinate {e} outside [0,{n})") });
                }
                w |= 1 << e;
            }
            codewords.push(w);
        }
        let t = CodeTable { n, distance, weight, codewords };
        t.verify()?;
        Ok(t)
    }

    pub fn verify(&self) -> Result<()> {
        for (i, &a) in self.codewords.iter().enumerate() {
            if a.count_ones() != self.weight || a >> self.n != 0 {
                return Err(Error::Invalid(format!("codeword {i} has weight {} (want {})", a.count_ones(), self.weight)));
            }
            for (j, &b) in self.codewords[..i].iter().enumerate() {
                if (a ^ b).count_ones() < self.distance {
                    return Err(Error::Invalid(format!("codewords {j} and {i} are at distance {}", (a ^ b).count_ones())));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn truncated(mut self, want: usize) -> Self {
        self.codewords.truncate(want);
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &w in &self.codewords {
            let coords: Vec<String> = (0..self.n).filter(|b| w >> b & 1 == 1).map(|b| b.to_string()).collect();
            s.push_str(&coords.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Lexicographic greedy packing: scan weight-w words in increasing order
/// and keep each one at distance ≥ δ from everything kept so far.
pub fn greedy_code(n: u32, distance: u32, weight: u32, limit: usize) -> CodeTable {
    let mut codewords: Vec<u64> = Vec::new();
    for w in weight_subsets(n, weight) {
        if codewords.len() >= limit {
            break;
        }
        if codewords.iter().all(|&c| (c ^ w).count_ones() >= distance) {
            codewords.push(w);
        }
    }
    CodeTable { n, distance, weight, codewords }
}

pub trait CodeProvider {
    /// At least `want` codewords or `Error::CodeShortfall`.
    fn lookup(&self, n: u32, distance: u32, weight: u32, want: usize) -> Result<CodeTable>;
}

/// Bundled tables, optionally overridden by `A_<n>_<δ>_<w>.txt` files in a
/// directory, with the greedy packing as fallback.
#[derive(Clone, Debug, Default)]
pub struct BundledCodes {
    pub dir: Option<PathBuf>,
}

impl BundledCodes {
    pub fn with_dir(dir: impl AsRef<Path>) -> Self {
        BundledCodes { dir: Some(dir.as_ref().to_path_buf()) }
    }

    fn table(&self, n: u32, distance: u32, weight: u32) -> Result<Option<CodeTable>> {
        if let Some(dir) = &self.dir {
            let p = dir.join(format!("A_{n}_{distance}_{weight}.txt"));
            if p.exists() {
                let text = std::fs::read_to_string(&p)?;
                return CodeTable::parse(&text, n, distance, weight).map(Some);
            }
        }
        for &(bn, bd, bw, text) in BUNDLED {
            if (bn, bd, bw) == (n, distance, weight) {
                return CodeTable::parse(text, n, distance, weight).map(Some);
            }
        }
        Ok(None)
    }
}

impl CodeProvider for BundledCodes {
    fn lookup(&self, n: u32, distance: u32, weight: u32, want: usize) -> Result<CodeTable> {
        let stored = self.table(n, distance, weight)?;
        if let Some(t) = &stored {
            if t.len() >= want {
                return Ok(t.clone().truncated(want));
            }
        }
        let greedy = greedy_code(n, distance, weight, want);
        if greedy.len() >= want {
            return Ok(greedy);
        }
        let achieved = greedy.len().max(stored.map_or(0, |t| t.len()));
        Err(Error::CodeShortfall { n, distance, weight, want, achieved })
    }
}

pub fn code_lookup(n: u32, distance: u32, weight: u32, want: usize) -> Result<CodeTable> {
    BundledCodes::default().lookup(n, distance, weight, want)
}
