//! Independent oracles and fixture writers shared by the integration tests.
//!
//! Nothing here calls into the library's metric or serialization code, so a
//! bug there cannot cancel out against the same bug here.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn grams(tokens: &[String], n: usize) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            *out.entry(tokens[i..i + n].join("\u{1}")).or_insert(0.0) += 1.0;
        }
    }
    out
}

/// Brute-force CIDEr-D: every n-gram enumerated as a joined string, document
/// frequencies counted per item over its references.
pub fn cider_oracle(candidates: &[Vec<String>], references: &[Vec<Vec<String>>]) -> Vec<f64> {
    let n_docs = references.len() as f64;
    let mut df: HashMap<String, f64> = HashMap::new();
    for refs in references {
        let mut seen = HashSet::new();
        for r in refs {
            for n in 1..=4 {
                for g in grams(r, n).into_keys() {
                    seen.insert((n, g));
                }
            }
        }
        for (_, g) in seen {
            *df.entry(g).or_insert(0.0) += 1.0;
        }
    }
    let vec_of = |tokens: &[String], n: usize| -> HashMap<String, f64> {
        grams(tokens, n)
            .into_iter()
            .map(|(g, tf)| {
                let d = df.get(&g).copied().unwrap_or(0.0).max(1.0);
                (g, tf * (n_docs / d).ln())
            })
            .collect()
    };
    candidates
        .iter()
        .zip(references)
        .map(|(cand, refs)| {
            if cand.is_empty() {
                return 0.0;
            }
            let mut total = 0.0;
            for n in 1..=4 {
                let vc = vec_of(cand, n);
                let nc: f64 = vc.values().map(|x| x * x).sum::<f64>().sqrt();
                for r in refs {
                    let vr = vec_of(r, n);
                    let nr: f64 = vr.values().map(|x| x * x).sum::<f64>().sqrt();
                    if nc == 0.0 || nr == 0.0 {
                        continue;
                    }
                    let mut dot = 0.0;
                    for (g, wc) in &vc {
                        if let Some(wr) = vr.get(g) {
                            dot += wc.min(*wr) * wr;
                        }
                    }
                    let delta = cand.len() as f64 - r.len() as f64;
                    total += dot / (nc * nr) * (-(delta * delta) / 72.0).exp();
                }
            }
            total / 4.0 / refs.len() as f64 * 10.0
        })
        .collect()
}

/// SEMB bytes written field by field from the documented layout.
pub fn semb_bytes(dim: u32, entries: &[(String, Vec<f32>)]) -> Vec<u8> {
    let mut out = b"SEMB".to_vec();
    out.extend(1u32.to_le_bytes());
    out.extend((entries.len() as u32).to_le_bytes());
    out.extend(dim.to_le_bytes());
    for (key, v) in entries {
        out.extend((key.len() as u16).to_le_bytes());
        out.extend(key.as_bytes());
        for x in v {
            out.extend(x.to_le_bytes());
        }
    }
    out
}

/// `(hash, caption)` rows of the golden key fixture, hashed by an external
/// `sha256sum`.
pub fn golden_caption_keys() -> Vec<(String, String)> {
    include_str!("../golden/caption_keys.tsv")
        .lines()
        .map(|line| {
            let (hash, caption) = line.split_once('\t').expect("tab separated");
            (hash.to_string(), caption.to_string())
        })
        .collect()
}

/// Lowercase hex SHA-256 of `caption`, looked up in the golden fixture.
pub fn golden_key(caption: &str) -> Option<String> {
    golden_caption_keys()
        .into_iter()
        .find(|(_, c)| c == caption)
        .map(|(h, _)| h)
}
