//! mu, Delta and mu-bar.
//!
//! `mu(p; c_1..c_u, i)` is the coefficient of `k_{c_1}...k_{c_u}` in the limit
//! series of component `i`. The limit is reached at a finite stage; the stage
//! is found by evaluating at `q = u + 1` and increasing `q` until two
//! consecutive stages agree on the coefficient.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_integer::Integer;
use serde::Serialize;

use crate::error::InvariantError;
use crate::magnus::{SeriesEngine, SignedPhrase};
use crate::phrase::Nanophrase;

/// `c_1, ..., c_u; i` with `u >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSequence {
    prefix: Vec<usize>,
    target: usize,
}

impl IndexSequence {
    pub fn new(prefix: Vec<usize>, target: usize) -> Result<Self, InvariantError> {
        if prefix.is_empty() {
            return Err(InvariantError::SequenceTooShort);
        }
        Ok(Self { prefix, target })
    }

    /// The last entry is the target.
    pub fn from_entries(entries: &[usize]) -> Result<Self, InvariantError> {
        match entries.split_last() {
            Some((&target, prefix)) => Self::new(prefix.to_vec(), target),
            None => Err(InvariantError::SequenceTooShort),
        }
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn u(&self) -> usize {
        self.prefix.len()
    }

    pub fn entries(&self) -> Vec<usize> {
        let mut v = self.prefix.clone();
        v.push(self.target);
        v
    }

    pub fn is_distinct(&self) -> bool {
        self.entries().iter().all_unique()
    }

    pub fn check_range(&self, n: usize) -> Result<(), InvariantError> {
        match self.entries().into_iter().find(|&x| x == 0 || x > n) {
            Some(index) => Err(InvariantError::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }
}

impl FromStr for IndexSequence {
    type Err = InvariantError;

    /// Comma separated, target last: `2,3,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let entries = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| InvariantError::InvalidSequence(s.to_string()))?;
        Self::from_entries(&entries)
    }
}

impl fmt::Display for IndexSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.entries().iter().join(","))
    }
}

impl Serialize for IndexSequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries().serialize(serializer)
    }
}

/// `value mod modulus`; modulus 0 keeps the signed integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Residue {
    pub value: i64,
    pub modulus: u64,
}

impl Residue {
    pub fn new(value: i64, modulus: u64) -> Self {
        if modulus == 0 {
            Self { value, modulus }
        } else {
            Self {
                value: value.rem_euclid(modulus as i64),
                modulus,
            }
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StabilizationPolicy {
    /// Largest stage examined is `u + max_extra`.
    pub max_extra: usize,
    /// Evaluate at exactly this stage instead of searching.
    pub fixed_q: Option<usize>,
}

impl Default for StabilizationPolicy {
    fn default() -> Self {
        Self {
            max_extra: 4,
            fixed_q: None,
        }
    }
}

/// Finds the first `q >= u + 1` with `coeff(q) == coeff(q + 1)`, returning
/// the value and that `q`.
pub fn stabilize(
    sequence: &IndexSequence,
    policy: StabilizationPolicy,
    mut coeff: impl FnMut(usize) -> Result<i64, InvariantError>,
) -> Result<(i64, usize), InvariantError> {
    if let Some(q) = policy.fixed_q {
        return Ok((coeff(q)?, q));
    }
    let u = sequence.u();
    let cap = u + policy.max_extra.max(2);
    let mut q = u + 1;
    let mut values = vec![(q, coeff(q)?)];
    while q < cap {
        let next = coeff(q + 1)?;
        values.push((q + 1, next));
        if next == values[values.len() - 2].1 {
            return Ok((next, q));
        }
        q += 1;
    }
    Err(InvariantError::NotStabilized {
        sequence: sequence.entries(),
        q_cap: cap,
        values,
    })
}

/// Every proper order-preserving subsequence of length `2..=u` of
/// `c_1..c_u, i`, under every cyclic rotation, without duplicates.
pub fn delta_subsequences(s: &IndexSequence) -> Vec<IndexSequence> {
    let entries = s.entries();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in 2..entries.len() {
        for positions in (0..entries.len()).combinations(t) {
            let sub: Vec<usize> = positions.iter().map(|&k| entries[k]).collect();
            for r in 0..t {
                let mut rotated = sub.clone();
                rotated.rotate_left(r);
                if seen.insert(rotated.clone()) {
                    out.push(IndexSequence::from_entries(&rotated).expect("length >= 2"));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MuValue {
    pub value: i64,
    pub q_used: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub sequence: IndexSequence,
    pub mu: i64,
    pub delta: u64,
    pub mubar: Residue,
    pub q_used: usize,
}

/// Computes invariants of one phrase, caching mu per sequence.
pub struct InvariantEngine {
    sp: SignedPhrase,
    policy: StabilizationPolicy,
    cache: HashMap<IndexSequence, MuValue>,
}

impl InvariantEngine {
    pub fn new(p: &Nanophrase) -> Result<Self, InvariantError> {
        Self::with_policy(p, StabilizationPolicy::default())
    }

    pub fn with_policy(p: &Nanophrase, policy: StabilizationPolicy) -> Result<Self, InvariantError> {
        Ok(Self {
            sp: SignedPhrase::new(p)?,
            policy,
            cache: HashMap::new(),
        })
    }

    pub fn component_count(&self) -> usize {
        self.sp.component_count()
    }

    pub fn mu(&mut self, s: &IndexSequence) -> Result<MuValue, InvariantError> {
        if let Some(v) = self.cache.get(s) {
            return Ok(*v);
        }
        s.check_range(self.component_count())?;
        // only the variables named in the monomial are kept
        let vars: Vec<usize> = s.prefix().iter().copied().unique().collect();
        let mut var_of = vec![None; self.component_count()];
        for (v, &c) in vars.iter().enumerate() {
            var_of[c - 1] = Some(v);
        }
        let monomial: Vec<usize> = s
            .prefix()
            .iter()
            .map(|c| vars.iter().position(|v| v == c).expect("collected above") + 1)
            .collect();
        let mut engine = SeriesEngine::new(&self.sp, var_of, vars.len(), s.u());
        let target = s.target() - 1;
        let (value, q_used) = stabilize(s, self.policy, |q| {
            if q < 2 {
                return Err(InvariantError::StageTooSmall(q));
            }
            Ok(engine
                .component(target, q)
                .coefficient(&monomial)
                .expect("monomial degree equals the bound"))
        })?;
        let v = MuValue { value, q_used };
        self.cache.insert(s.clone(), v);
        Ok(v)
    }

    pub fn delta(&mut self, s: &IndexSequence) -> Result<u64, InvariantError> {
        s.check_range(self.component_count())?;
        let mut g = 0i64;
        for d in delta_subsequences(s) {
            g = g.gcd(&self.mu(&d)?.value);
        }
        Ok(g.unsigned_abs())
    }

    pub fn mu_bar(&mut self, s: &IndexSequence) -> Result<Residue, InvariantError> {
        let mu = self.mu(s)?.value;
        Ok(Residue::new(mu, self.delta(s)?))
    }

    pub fn report(&mut self, s: &IndexSequence) -> Result<InvariantReport, InvariantError> {
        let mu = self.mu(s)?;
        let delta = self.delta(s)?;
        Ok(InvariantReport {
            sequence: s.clone(),
            mu: mu.value,
            delta,
            mubar: Residue::new(mu.value, delta),
            q_used: mu.q_used,
        })
    }
}

pub fn mu(p: &Nanophrase, s: &IndexSequence) -> Result<i64, InvariantError> {
    Ok(InvariantEngine::new(p)?.mu(s)?.value)
}

pub fn delta(p: &Nanophrase, s: &IndexSequence) -> Result<u64, InvariantError> {
    InvariantEngine::new(p)?.delta(s)
}

pub fn mu_bar(p: &Nanophrase, s: &IndexSequence) -> Result<Residue, InvariantError> {
    InvariantEngine::new(p)?.mu_bar(s)
}

/// All sequences of pairwise distinct indices in `1..=n` with length `2..=max_len`.
pub fn distinct_sequences(n: usize, max_len: usize) -> Vec<IndexSequence> {
    let mut out = Vec::new();
    for len in 2..=max_len.min(n) {
        for perm in (1..=n).permutations(len) {
            out.push(IndexSequence::from_entries(&perm).expect("length >= 2"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phrase::parse_nanophrase;

    fn seq(s: &str) -> IndexSequence {
        s.parse().unwrap()
    }

    fn borromean() -> Nanophrase {
        parse_nanophrase("letters: A:b+ B:b- C:a- D:a+ E:b+ F:a-\nphrase: ABCD|ECFA|DFBE").unwrap()
    }

    fn ex4() -> Nanophrase {
        parse_nanophrase("letters: A:b+ B:b+ C:b- D:a- E:b+ F:a+\nphrase: AB|FBCDAE|DC|EF").unwrap()
    }

    #[test]
    fn sequence_parsing() {
        let s = seq("2,3,1");
        assert_eq!(s.prefix(), &[2, 3]);
        assert_eq!(s.target(), 1);
        assert_eq!(s.to_string(), "2,3,1");
        assert!(s.is_distinct());
        assert!(!seq("1,1,2").is_distinct());
        assert!("3".parse::<IndexSequence>().is_err());
        assert!("1,x".parse::<IndexSequence>().is_err());
        assert!(seq("1,5").check_range(3).is_err());
    }

    #[test]
    fn delta_subsequence_examples() {
        let got: BTreeSet<Vec<usize>> = delta_subsequences(&seq("2,3,1")).iter().map(|s| s.entries()).collect();
        let want: BTreeSet<Vec<usize>> =
            [[3, 1], [1, 3], [2, 1], [1, 2], [2, 3], [3, 2]].iter().map(|v| v.to_vec()).collect();
        assert_eq!(got, want);
        assert!(delta_subsequences(&seq("2,1")).is_empty());
        for d in delta_subsequences(&seq("2,3,4,1")) {
            let e = d.entries();
            assert!(e.len() == 2 || e.len() == 3);
        }
    }

    #[test]
    fn residues() {
        assert_eq!(Residue::new(-1, 0), Residue { value: -1, modulus: 0 });
        assert_eq!(Residue::new(-1, 1), Residue { value: 0, modulus: 1 });
        assert_eq!(Residue::new(-7, 3), Residue { value: 2, modulus: 3 });
        assert_eq!(Residue::new(-1, 0).to_string(), "-1 (mod 0)");
    }

    #[test]
    fn borromean_values() {
        let p = borromean();
        assert_eq!(mu(&p, &seq("2,3,1")).unwrap(), -1);
        assert_eq!(delta(&p, &seq("2,3,1")).unwrap(), 0);
        assert_eq!(mu_bar(&p, &seq("2,3,1")).unwrap(), Residue { value: -1, modulus: 0 });
    }

    #[test]
    fn example_four_values() {
        let p = ex4();
        assert_eq!(mu(&p, &seq("3,2,1")).unwrap(), 1);
        assert_eq!(mu(&p, &seq("2,3,1")).unwrap(), -1);
        assert_eq!(mu(&p, &seq("2,1")).unwrap(), 2);
        assert_eq!(delta(&p, &seq("2,3,1")).unwrap(), 1);
        assert_eq!(mu_bar(&p, &seq("2,3,1")).unwrap(), Residue { value: 0, modulus: 1 });
    }

    #[test]
    fn empty_phrase_is_trivial() {
        let p = parse_nanophrase("letters:\nphrase: . | .").unwrap();
        for s in ["1,2", "2,1", "1,1,2", "2,2,2"] {
            assert_eq!(mu(&p, &seq(s)).unwrap(), 0);
        }
        assert_eq!(delta(&p, &seq("1,2")).unwrap(), 0);
    }

    #[test]
    fn out_of_range_and_non_virtual() {
        assert!(matches!(
            mu(&borromean(), &seq("4,1")),
            Err(InvariantError::IndexOutOfRange { index: 4, n: 3 })
        ));
        let p = parse_nanophrase("letters: A:z\nphrase: A|A").unwrap();
        assert!(matches!(mu(&p, &seq("1,2")), Err(InvariantError::NotVirtual { .. })));
    }

    #[test]
    fn stabilization_reports_failure() {
        let s = seq("2,3,1");
        let err = stabilize(&s, StabilizationPolicy::default(), |q| Ok(q as i64)).unwrap_err();
        match err {
            InvariantError::NotStabilized { sequence, q_cap, values } => {
                assert_eq!(sequence, vec![2, 3, 1]);
                assert_eq!(q_cap, 6);
                assert_eq!(values, vec![(3, 3), (4, 4), (5, 5), (6, 6)]);
            }
            other => panic!("{other:?}"),
        }
        let ok = stabilize(&s, StabilizationPolicy::default(), |q| Ok(if q < 4 { 0 } else { 7 })).unwrap();
        assert_eq!(ok, (7, 4));
        let fixed = StabilizationPolicy { fixed_q: Some(2), ..Default::default() };
        assert_eq!(stabilize(&s, fixed, |q| Ok(q as i64 * 10)).unwrap(), (20, 2));
    }

    #[test]
    fn report_json_shape() {
        let mut e = InvariantEngine::new(&borromean()).unwrap();
        let r = e.report(&seq("2,3,1")).unwrap();
        assert_eq!(
            serde_json::to_value(&r).unwrap(),
            serde_json::json!({"sequence": [2, 3, 1], "mu": -1, "delta": 0, "mubar": {"value": -1, "modulus": 0}, "q_used": 3})
        );
    }

    #[test]
    fn distinct_sequence_enumeration() {
        assert_eq!(distinct_sequences(3, 3).len(), 6 + 6);
        assert_eq!(distinct_sequences(4, 3).len(), 12 + 24);
        assert_eq!(distinct_sequences(1, 3).len(), 0);
    }
}
