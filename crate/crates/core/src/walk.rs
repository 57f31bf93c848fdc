//! Seeded random walks through move sites, with replayable traces.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::MoveError;
use crate::homotopy::{builtin_virtual, builtin_welded, HomotopyData, MoveSet};
use crate::moves::{apply_move, enumerate_sites, fresh_letters, MoveKind, MoveSite};
use crate::phrase::{render_nanophrase, Nanophrase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkVariant {
    /// Virtual data without shift moves.
    #[serde(rename = "open_M")]
    OpenM,
    #[serde(rename = "M")]
    M,
    /// Virtual data plus the empty-slot triples of welded links.
    #[serde(rename = "welded_M")]
    WeldedM,
}

impl WalkVariant {
    pub const ALL: [WalkVariant; 3] = [WalkVariant::OpenM, WalkVariant::M, WalkVariant::WeldedM];

    pub fn name(self) -> &'static str {
        match self {
            WalkVariant::OpenM => "open_M",
            WalkVariant::M => "M",
            WalkVariant::WeldedM => "welded_M",
        }
    }

    /// The built-in homotopy data this variant walks over.
    pub fn homotopy_data(self) -> HomotopyData {
        match self {
            WalkVariant::OpenM => builtin_virtual().with_moveset(MoveSet {
                allow_shift: false,
                allow_self_crossing: true,
            }),
            WalkVariant::M => builtin_virtual(),
            WalkVariant::WeldedM => builtin_welded(),
        }
    }

    /// Restricts a data set's moves to this variant.
    pub fn restrict(self, h: &HomotopyData) -> HomotopyData {
        match self {
            WalkVariant::OpenM => h.clone().with_moveset(MoveSet {
                allow_shift: false,
                ..h.moveset()
            }),
            _ => h.clone(),
        }
    }
}

impl fmt::Display for WalkVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WalkVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown walk variant {s:?} (expected open_M, M or welded_M)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    pub steps: usize,
    pub seed: u64,
    /// Insertions are not drawn once the phrase has this many letters.
    pub size_cap: usize,
    pub insert_probability: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            steps: 20,
            seed: 0,
            size_cap: 12,
            insert_probability: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// `None` when no site applied.
    #[serde(flatten)]
    pub site: Option<MoveSite>,
    pub result_hash: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub seed: u64,
    pub variant: WalkVariant,
    pub steps: Vec<TraceStep>,
}

/// SHA-256 of the rendered phrase, hex encoded.
pub fn phrase_hash(p: &Nanophrase) -> String {
    hex::encode(Sha256::digest(render_nanophrase(p).as_bytes()))
}

const NON_GROWING: [MoveKind; 6] = [
    MoveKind::H1Remove,
    MoveKind::H2Remove,
    MoveKind::H3,
    MoveKind::H3ext,
    MoveKind::Shift,
    MoveKind::SelfCross,
];

fn draw_insertion(p: &Nanophrase, h: &HomotopyData, room: usize, rng: &mut ChaCha8Rng) -> Option<MoveSite> {
    let kind = if room >= 2 && rng.gen_bool(0.5) {
        MoveKind::H2Insert
    } else {
        MoveKind::H1Insert
    };
    let schemas = enumerate_sites(p, h, &[kind]);
    let schema = schemas.choose(rng)?.clone();
    let alpha: Vec<_> = h.alpha().iter().cloned().collect();
    let projection = alpha.choose(rng)?.clone();
    let count = if kind == MoveKind::H2Insert { 2 } else { 1 };
    Some(schema.bind(fresh_letters(p, count), projection))
}

/// One step: with `insert_probability` (and room under the cap) an insertion
/// with a random slot and projection, otherwise a uniform non-growing site.
fn step(p: &Nanophrase, h: &HomotopyData, config: &WalkConfig, rng: &mut ChaCha8Rng) -> Option<MoveSite> {
    let room = config.size_cap.saturating_sub(p.letter_count());
    if room >= 1 && rng.gen_bool(config.insert_probability) {
        if let Some(site) = draw_insertion(p, h, room, rng) {
            return Some(site);
        }
    }
    let sites = enumerate_sites(p, h, &NON_GROWING);
    sites.choose(rng).cloned()
}

/// Walks `config.steps` moves from `p` under `variant` restricted data `h`.
pub fn random_walk(
    p: &Nanophrase,
    h: &HomotopyData,
    variant: WalkVariant,
    config: &WalkConfig,
) -> Result<(Nanophrase, WalkTrace), MoveError> {
    let h = variant.restrict(h);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cur = p.clone();
    let mut steps = Vec::with_capacity(config.steps);
    for _ in 0..config.steps {
        let site = step(&cur, &h, config, &mut rng);
        if let Some(site) = &site {
            cur = apply_move(&cur, &h, site)?;
        }
        steps.push(TraceStep {
            site,
            result_hash: phrase_hash(&cur),
        });
    }
    Ok((
        cur,
        WalkTrace {
            seed: config.seed,
            variant,
            steps,
        },
    ))
}

/// Re-applies a trace, checking every intermediate hash; returns all phrases
/// visited, starting with `p`.
pub fn replay(p: &Nanophrase, h: &HomotopyData, trace: &WalkTrace) -> Result<Vec<Nanophrase>, MoveError> {
    let h = trace.variant.restrict(h);
    let mut out = vec![p.clone()];
    for (k, s) in trace.steps.iter().enumerate() {
        let cur = out.last().expect("starts non-empty");
        let next = match &s.site {
            Some(site) => apply_move(cur, &h, site)?,
            None => cur.clone(),
        };
        let actual = phrase_hash(&next);
        if actual != s.result_hash {
            return Err(MoveError::ReplayDiverged {
                step: k,
                expected: s.result_hash.clone(),
                actual,
            });
        }
        out.push(next);
    }
    Ok(out)
}
