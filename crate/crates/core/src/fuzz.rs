//! Move-invariance fuzzing: random start phrases, seeded walks, and checks of
//! every invariant along each step.
//!
//! Per step `p -> p'` by a move of kind `K`:
//! - component count and linking matrix agree;
//! - mu agrees on every pairwise-distinct sequence unless `K` is a shift;
//! - mu agrees on the trial's repeated-index sequence when `K` is H1, H2 or a
//!   self-crossing;
//! - Delta and mu-bar agree on every pairwise-distinct sequence.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generate::{planted_h3, random_phrase, GenConfig};
use crate::homotopy::{linking_matrix, HomotopyData};
use crate::invariants::{distinct_sequences, IndexSequence, InvariantEngine, Residue};
use crate::moves::MoveKind;
use crate::phrase::{Nanophrase, Symbol};
use crate::walk::{random_walk, replay, WalkConfig, WalkTrace, WalkVariant};

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzConfig {
    pub variant: WalkVariant,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
    /// Longest index sequence checked (target included).
    pub max_len: usize,
    pub gen: GenConfig,
    pub size_cap: usize,
    pub insert_probability: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            variant: WalkVariant::M,
            trials: 100,
            steps: 20,
            seed: 0,
            max_len: 3,
            gen: GenConfig::default(),
            size_cap: 12,
            insert_probability: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzFailure {
    /// Index of the step whose move broke the check (0-based).
    pub step: usize,
    pub kind: Option<MoveKind>,
    pub check: String,
    pub detail: String,
}

/// Everything needed to replay a failing trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub seed: u64,
    pub variant: WalkVariant,
    pub max_len: usize,
    pub repeated: Vec<usize>,
    pub start: Nanophrase,
    pub trace: WalkTrace,
    pub failure: FuzzFailure,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub variant: String,
    pub trials: usize,
    pub steps: usize,
    /// Applied moves per kind; `noop` counts steps with no site.
    pub moves: BTreeMap<String, usize>,
    pub sequences_checked: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// mu, Delta, mu-bar of one phrase over a fixed list of sequences.
struct Profile {
    linking: crate::homotopy::LinkingMatrix,
    distinct: Vec<(i64, u64, Residue)>,
    repeated: Option<i64>,
}

fn profile(
    p: &Nanophrase,
    h: &HomotopyData,
    seqs: &[IndexSequence],
    repeated: Option<&IndexSequence>,
) -> Result<Profile, String> {
    let linking = linking_matrix(p, h).map_err(|e| e.to_string())?;
    let mut engine = InvariantEngine::new(p).map_err(|e| e.to_string())?;
    let mut distinct = Vec::with_capacity(seqs.len());
    for s in seqs {
        let r = engine.report(s).map_err(|e| e.to_string())?;
        distinct.push((r.mu, r.delta, r.mubar));
    }
    let repeated = match repeated {
        Some(s) => Some(engine.mu(s).map_err(|e| e.to_string())?.value),
        None => None,
    };
    Ok(Profile {
        linking,
        distinct,
        repeated,
    })
}

fn exact_mu_kind(kind: MoveKind) -> bool {
    kind != MoveKind::Shift
}

fn repeated_mu_kind(kind: MoveKind) -> bool {
    matches!(
        kind,
        MoveKind::H1Remove | MoveKind::H1Insert | MoveKind::H2Remove | MoveKind::H2Insert | MoveKind::SelfCross
    )
}

fn compare(
    step: usize,
    kind: MoveKind,
    a: &Profile,
    b: &Profile,
    seqs: &[IndexSequence],
    repeated: Option<&IndexSequence>,
) -> Result<(), FuzzFailure> {
    let fail = |check: &str, detail: String| FuzzFailure {
        step,
        kind: Some(kind),
        check: check.to_string(),
        detail,
    };
    if a.linking != b.linking {
        return Err(fail("linking", "linking matrix changed".into()));
    }
    for (s, (x, y)) in seqs.iter().zip(a.distinct.iter().zip(&b.distinct)) {
        if exact_mu_kind(kind) && x.0 != y.0 {
            return Err(fail("mu", format!("mu({s}) {} -> {}", x.0, y.0)));
        }
        if x.1 != y.1 {
            return Err(fail("delta", format!("Delta({s}) {} -> {}", x.1, y.1)));
        }
        if x.2 != y.2 {
            return Err(fail("mubar", format!("mu-bar({s}) {} -> {}", x.2, y.2)));
        }
    }
    if let (Some(s), true) = (repeated, repeated_mu_kind(kind)) {
        if a.repeated != b.repeated {
            return Err(fail(
                "mu_repeated",
                format!("mu({s}) {:?} -> {:?}", a.repeated, b.repeated),
            ));
        }
    }
    Ok(())
}

/// Runs every check along the phrases visited by `trace`.
pub fn check_trace(
    start: &Nanophrase,
    h: &HomotopyData,
    trace: &WalkTrace,
    max_len: usize,
    repeated: Option<&IndexSequence>,
) -> Result<usize, FuzzFailure> {
    let visited = replay(start, h, trace).map_err(|e| FuzzFailure {
        step: 0,
        kind: None,
        check: "replay".into(),
        detail: e.to_string(),
    })?;
    let n = start.component_count();
    let seqs = distinct_sequences(n, max_len);
    let prof = |k: usize, p: &Nanophrase| {
        profile(p, h, &seqs, repeated).map_err(|detail| FuzzFailure {
            step: k,
            kind: None,
            check: "compute".into(),
            detail,
        })
    };
    let mut prev = prof(0, &visited[0])?;
    let mut checked = 0;
    for (k, (p, s)) in visited[1..].iter().zip(&trace.steps).enumerate() {
        let Some(site) = &s.site else { continue };
        if p.component_count() != n {
            return Err(FuzzFailure {
                step: k,
                kind: Some(site.kind),
                check: "components".into(),
                detail: format!("{} -> {}", n, p.component_count()),
            });
        }
        let cur = prof(k, p)?;
        compare(k, site.kind, &prev, &cur, &seqs, repeated)?;
        checked += seqs.len();
        prev = cur;
    }
    Ok(checked)
}

/// A sequence over `1..=n` with at least one repeated entry.
fn repeated_sequence<R: Rng>(rng: &mut R, n: usize, max_len: usize) -> IndexSequence {
    let len = rng.gen_range(2..=max_len.max(2));
    let mut e: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=n)).collect();
    let k = rng.gen_range(1..len);
    e[k] = e[rng.gen_range(0..k)];
    IndexSequence::from_entries(&e).expect("length >= 2")
}

fn start_phrase<R: Rng>(rng: &mut R, h: &HomotopyData, cfg: &FuzzConfig, trial: usize) -> Nanophrase {
    let alpha: Vec<Symbol> = h.alpha().iter().cloned().collect();
    let planted = match trial % 3 {
        1 => planted_h3(rng, h, &cfg.gen, false),
        2 => planted_h3(rng, h, &cfg.gen, true),
        _ => None,
    };
    planted.unwrap_or_else(|| random_phrase(rng, &alpha, &cfg.gen))
}

fn run_trial(cfg: &FuzzConfig, h: &HomotopyData, trial: usize) -> (BTreeMap<String, usize>, usize, Option<Counterexample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let start = start_phrase(&mut rng, h, cfg, trial);
    let repeated = repeated_sequence(&mut rng, start.component_count(), cfg.max_len);
    let walk = WalkConfig {
        steps: cfg.steps,
        seed: rng.gen(),
        size_cap: cfg.size_cap,
        insert_probability: cfg.insert_probability,
    };
    let mut moves = BTreeMap::new();
    let bundle = |trace: WalkTrace, failure: FuzzFailure| Counterexample {
        seed: walk.seed,
        variant: cfg.variant,
        max_len: cfg.max_len,
        repeated: repeated.entries(),
        start: start.clone(),
        trace,
        failure,
    };
    let trace = match random_walk(&start, h, cfg.variant, &walk) {
        Ok((_, trace)) => trace,
        Err(e) => {
            let failure = FuzzFailure {
                step: 0,
                kind: None,
                check: "walk".into(),
                detail: e.to_string(),
            };
            let empty = WalkTrace {
                seed: walk.seed,
                variant: cfg.variant,
                steps: vec![],
            };
            return (moves, 0, Some(bundle(empty, failure)));
        }
    };
    for s in &trace.steps {
        let key = s.site.as_ref().map_or("noop", |site| site.kind.name());
        *moves.entry(key.to_string()).or_insert(0) += 1;
    }
    match check_trace(&start, h, &trace, cfg.max_len, Some(&repeated)) {
        Ok(checked) => (moves, checked, None),
        Err(failure) => (moves, 0, Some(bundle(trace, failure))),
    }
}

/// Runs `cfg.trials` independent trials in parallel over `h` (restricted to
/// the variant). Trial `t` draws from stream `t` of the master seed.
pub fn run_fuzz(cfg: &FuzzConfig, h: &HomotopyData) -> FuzzReport {
    let h = cfg.variant.restrict(h);
    let results: Vec<_> = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, &h, t)).collect();
    let mut report = FuzzReport {
        variant: cfg.variant.name().to_string(),
        trials: cfg.trials,
        steps: cfg.steps,
        ..Default::default()
    };
    for (moves, checked, cx) in results {
        for (k, v) in moves {
            *report.moves.entry(k).or_insert(0) += v;
        }
        report.sequences_checked += checked;
        report.counterexamples.extend(cx);
    }
    report
}

/// Re-runs the checks of a saved counterexample.
pub fn replay_counterexample(c: &Counterexample, h: &HomotopyData) -> Result<usize, FuzzFailure> {
    let repeated = IndexSequence::from_entries(&c.repeated).ok();
    check_trace(&c.start, &c.variant.restrict(h), &c.trace, c.max_len, repeated.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::builtin_virtual;
    use crate::moves::MoveSite;
    use crate::walk::TraceStep;

    #[test]
    fn repeated_sequences_repeat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s = repeated_sequence(&mut rng, 3, 3);
            assert!(!s.is_distinct());
            assert!(s.check_range(3).is_ok());
        }
    }

    #[test]
    fn small_campaign_is_deterministic() {
        let cfg = FuzzConfig {
            trials: 6,
            steps: 5,
            seed: 11,
            ..Default::default()
        };
        let h = builtin_virtual();
        let a = run_fuzz(&cfg, &h);
        let b = run_fuzz(&cfg, &h);
        assert_eq!(a, b);
        assert!(a.passed(), "{:?}", a.counterexamples);
        assert_eq!(a.moves.values().sum::<usize>(), 30);
    }

    #[test]
    fn a_forged_step_is_caught() {
        // a self-crossing on a letter shared by two components is not a move;
        // fake it by a trace whose step changes a linking number
        let h = builtin_virtual();
        let start: Nanophrase = "letters: A:a+\nphrase: A | A".parse().unwrap();
        let target: Nanophrase = "letters: A:a-\nphrase: A | A".parse().unwrap();
        let fake = MoveSite {
            kind: MoveKind::SelfCross,
            direction: Default::default(),
            addresses: vec![],
            params: Default::default(),
        };
        let trace = WalkTrace {
            seed: 0,
            variant: WalkVariant::M,
            steps: vec![TraceStep {
                site: Some(fake),
                result_hash: crate::walk::phrase_hash(&target),
            }],
        };
        let err = check_trace(&start, &h, &trace, 2, None).unwrap_err();
        assert_eq!(err.check, "replay");
        // checks themselves: compare profiles directly
        let seqs = distinct_sequences(2, 2);
        let a = profile(&start, &h, &seqs, None).unwrap();
        let b = profile(&target, &h, &seqs, None).unwrap();
        let err = compare(0, MoveKind::SelfCross, &a, &b, &seqs, None).unwrap_err();
        assert_eq!(err.check, "linking");
    }

    #[test]
    fn counterexample_bundle_round_trips() {
        let h = builtin_virtual();
        let start: Nanophrase = "letters: A:b+ B:a+\nphrase: AB|AB".parse().unwrap();
        let (_, trace) = random_walk(&start, &h, WalkVariant::M, &WalkConfig { steps: 4, seed: 5, ..Default::default() }).unwrap();
        let c = Counterexample {
            seed: 5,
            variant: WalkVariant::M,
            max_len: 3,
            repeated: vec![1, 1, 2],
            start,
            trace,
            failure: FuzzFailure {
                step: 0,
                kind: None,
                check: "none".into(),
                detail: String::new(),
            },
        };
        let back: Counterexample = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(replay_counterexample(&back, &h).is_ok());
    }
}
