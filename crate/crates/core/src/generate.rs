//! Random nanophrases for tests and fuzzing.
//!
//! Letters are single capitals so generated phrases print in the compact
//! syntax. A planted phrase embeds the left side of an H3 (or extended H3)
//! template so walks starting from it have H3 sites.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::homotopy::{HomotopyData, TripleSlot};
use crate::phrase::{Letter, Nanophrase, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub min_components: usize,
    pub max_components: usize,
    pub max_letters: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            min_components: 2,
            max_components: 4,
            max_letters: 8,
        }
    }
}

fn letter(k: usize) -> Letter {
    let name = if k < 26 {
        char::from(b'A' + k as u8).to_string()
    } else {
        format!("L{k}")
    };
    Letter::new(name).expect("generated names are valid")
}

/// Cuts a chunk sequence into `n` components at random chunk boundaries.
fn split<R: Rng>(rng: &mut R, chunks: Vec<Vec<Letter>>, n: usize) -> Vec<Vec<Letter>> {
    let mut cuts: Vec<usize> = (1..n).map(|_| rng.gen_range(0..=chunks.len())).collect();
    cuts.sort_unstable();
    let mut comps = vec![Vec::new(); n];
    let mut c = 0;
    for (k, chunk) in chunks.into_iter().enumerate() {
        while c < cuts.len() && cuts[c] <= k {
            c += 1;
        }
        comps[c].extend(chunk);
    }
    comps
}

fn background<R: Rng>(rng: &mut R, first: usize, count: usize, alpha: &[Symbol], proj: &mut BTreeMap<Letter, Symbol>) -> Vec<Vec<Letter>> {
    let mut tokens = Vec::with_capacity(2 * count);
    for k in first..first + count {
        let l = letter(k);
        proj.insert(l.clone(), alpha.choose(rng).expect("alpha is non-empty").clone());
        tokens.push(vec![l.clone()]);
        tokens.push(vec![l]);
    }
    tokens.shuffle(rng);
    tokens
}

/// A uniform-ish random phrase over `alpha`.
pub fn random_phrase<R: Rng>(rng: &mut R, alpha: &[Symbol], cfg: &GenConfig) -> Nanophrase {
    let n = rng.gen_range(cfg.min_components..=cfg.max_components);
    let k = if n == 0 { 0 } else { rng.gen_range(0..=cfg.max_letters) };
    let mut proj = BTreeMap::new();
    let chunks = background(rng, 0, k, alpha, &mut proj);
    Nanophrase::from_parts_unchecked(proj, split(rng, chunks, n))
}

/// A random phrase containing `xAByACzBCt` for a random triple of `h`
/// (`extended` picks one with an empty slot, whose letter is then left out).
/// Returns `None` when `h` has no triple of the requested sort.
pub fn planted_h3<R: Rng>(rng: &mut R, h: &HomotopyData, cfg: &GenConfig, extended: bool) -> Option<Nanophrase> {
    let triples: Vec<_> = h
        .triples()
        .iter()
        .filter(|t| t.contains(&TripleSlot::Empty) == extended)
        .collect();
    let triple = *triples.choose(rng)?;
    let n = rng.gen_range(cfg.min_components.max(1)..=cfg.max_components);
    let mut proj = BTreeMap::new();
    let mut role = [None, None, None];
    let mut next = 0;
    for (r, slot) in triple.iter().enumerate() {
        if let Some(s) = slot.symbol() {
            let l = letter(next);
            next += 1;
            proj.insert(l.clone(), s.clone());
            role[r] = Some(l);
        }
    }
    let blocks: Vec<Vec<Letter>> = [[0, 1], [0, 2], [1, 2]]
        .iter()
        .map(|pair| pair.iter().filter_map(|&r| role[r].clone()).collect())
        .collect();
    let alpha: Vec<Symbol> = h.alpha().iter().cloned().collect();
    let extra = rng.gen_range(0..=cfg.max_letters.saturating_sub(next));
    let mut chunks = background(rng, next, extra, &alpha, &mut proj);
    let mut at: Vec<usize> = (0..blocks.len()).map(|_| rng.gen_range(0..=chunks.len())).collect();
    at.sort_unstable();
    for (k, (block, pos)) in blocks.into_iter().zip(at).enumerate() {
        chunks.insert(pos + k, block);
    }
    Some(Nanophrase::from_parts_unchecked(proj, split(rng, chunks, n)))
}
