use std::path::Path;

use anyhow::{bail, Context, Result};
use kronsynth::formats::read_krc;
use kronsynth::partitions::{merged_partition, merged_terms, simple_partition, simple_terms, BundledCodes, WordSpec};
use kronsynth::spectrum::AlphaProfile;
use kronsynth::{Circuit, Semiring};

/// Where a profile came from; circuits are only built when asked for.
#[derive(Clone)]
pub enum Source {
    Word { d: u32, word: String },
    Merged { d: u32, spec: WordSpec },
    File(Circuit),
}

pub struct Profile {
    pub profile: AlphaProfile,
    pub source: Source,
    pub transposed: bool,
}

impl Profile {
    pub fn circuit(&self) -> Result<Circuit> {
        let c = match &self.source {
            Source::Word { d, word } => simple_partition(*d, word)?.to_circuit(Semiring::Par)?,
            Source::Merged { d, spec } => merged_partition(*d, spec, &BundledCodes::default())?.to_circuit(Semiring::Par)?,
            Source::File(c) => c.clone(),
        };
        Ok(if self.transposed { c.transpose() } else { c })
    }
}

fn is_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c == 'R' || c == 'C')
}

/// Kronecker level of a square circuit over a base of size `base`.
fn level_of(c: &Circuit, base: u64) -> Option<u32> {
    let mut n = c.n_rows;
    let mut k = 0;
    while n > 1 && n.is_multiple_of(base) {
        n /= base;
        k += 1;
    }
    (n == 1).then_some(k)
}

pub fn parse_one(item: &str) -> Result<Profile> {
    let item = item.trim();
    let (profile, source) = if is_word(item) {
        let d = item.len() as u32 - 1;
        (AlphaProfile::from_terms(item, d, simple_terms(d, item)?), Source::Word { d, word: item.to_string() })
    } else if let Some(spec) = item.strip_prefix("merged:") {
        let spec: WordSpec = spec.parse()?;
        let d = spec.weight() as u32 - 1;
        (AlphaProfile::from_terms(item, d, merged_terms(d, &spec)?), Source::Merged { d, spec })
    } else {
        let (path, level) = match item.rsplit_once('@') {
            Some((p, l)) => (p, Some(l.parse::<u32>().with_context(|| format!("bad level in '{item}'"))?)),
            None => (item, None),
        };
        let text = std::fs::read_to_string(Path::new(path)).with_context(|| format!("reading {path}"))?;
        let c = read_krc(&text).with_context(|| format!("parsing {path}"))?;
        let level = match level.or_else(|| level_of(&c, 2)) {
            Some(l) => l,
            None => bail!("cannot infer the Kronecker level of {path}; append @level"),
        };
        (AlphaProfile::from_circuit(path, level, &c), Source::File(c))
    };
    Ok(Profile { profile, source, transposed: false })
}

/// Splits a comma-separated profile list. Merge counts of a `merged:`
/// spec also use commas, so bare numbers rejoin the item before them.
fn split_items(items: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for tok in items.iter().flat_map(|s| s.split(',')) {
        let numeric = !tok.is_empty() && tok.chars().all(|c| c.is_ascii_digit());
        match out.last_mut() {
            Some(prev) if numeric && prev.starts_with("merged:") => {
                prev.push(',');
                prev.push_str(tok);
            }
            _ => out.push(tok.to_string()),
        }
    }
    out
}

pub fn parse_all(items: &[String], transposes: bool) -> Result<Vec<Profile>> {
    let mut out = Vec::new();
    for it in &split_items(items) {
        let p = parse_one(it)?;
        if transposes {
            let t = Profile { profile: p.profile.transpose(), source: p.source.clone(), transposed: true };
            out.push(p);
            out.push(t);
        } else {
            out.push(p);
        }
    }
    Ok(out)
}
