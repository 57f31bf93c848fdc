//! Labeled rooted forests recording the recursion of rho^q, and the signed
//! count of ancestor-closed subforests that reproduces series coefficients.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::InvariantError;
use crate::magnus::{Exponent, SignedLetter, SignedPhrase, SignedWord};
use crate::phrase::{Letter, Nanophrase};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestNode {
    /// 1-based position of this letter in rho^q(w_i^eps).
    pub location: usize,
    pub letter: Letter,
    pub eta_index: usize,
    pub sign: Exponent,
    pub depth: usize,
    pub children: Vec<ForestNode>,
}

impl ForestNode {
    fn visit<'a>(&'a self, out: &mut Vec<&'a ForestNode>) {
        out.push(self);
        for c in &self.children {
            c.visit(out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Forest {
    pub roots: Vec<ForestNode>,
    pub q: usize,
}

impl Forest {
    /// All nodes in pre-order.
    pub fn nodes(&self) -> Vec<&ForestNode> {
        let mut out = Vec::new();
        for r in &self.roots {
            r.visit(&mut out);
        }
        out
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.nodes().iter().map(|n| n.depth).max()
    }

    /// The letters read in location order; equals rho^q(w_i^eps).
    pub fn flatten(&self) -> SignedWord<Letter> {
        let mut nodes = self.nodes();
        nodes.sort_by_key(|n| n.location);
        SignedWord::new(
            nodes
                .into_iter()
                .map(|n| SignedLetter {
                    base: n.letter.clone(),
                    exponent: n.sign,
                })
                .collect(),
        )
    }

    /// One node per line, indented by depth: `g=<loc> <letter>^<sign> k=<eta> d=<depth>`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for n in self.nodes() {
            let _ = writeln!(
                s,
                "{}g={} {}^{} k={} d={}",
                "  ".repeat(n.depth),
                n.location,
                n.letter,
                n.sign.value(),
                n.eta_index,
                n.depth
            );
        }
        s
    }
}

fn build_node(
    sp: &SignedPhrase,
    li: usize,
    sign: Exponent,
    stage: usize,
    depth: usize,
    next_location: &mut usize,
) -> ForestNode {
    let x = if stage > 2 { sp.raw_partner_prefix(li) } else { &[] };
    let mut children = Vec::with_capacity(2 * x.len());
    // in-order: conjugating prefix inverse, the letter itself, then the prefix
    for &(m, f) in x.iter().rev() {
        children.push(build_node(sp, m, f.flip(), stage - 1, depth + 1, next_location));
    }
    let location = *next_location;
    *next_location += 1;
    for &(m, f) in x {
        children.push(build_node(sp, m, f, stage - 1, depth + 1, next_location));
    }
    ForestNode {
        location,
        letter: sp.letters()[li].clone(),
        eta_index: sp.raw_eta(li),
        sign,
        depth,
        children,
    }
}

/// The forest F_i^q: one tree per signed letter of w_i^eps.
pub fn build_forest(p: &Nanophrase, i: usize, q: usize) -> Result<Forest, InvariantError> {
    if q < 2 {
        return Err(InvariantError::StageTooSmall(q));
    }
    let sp = SignedPhrase::new(p)?;
    let n = sp.component_count();
    if i == 0 || i > n {
        return Err(InvariantError::IndexOutOfRange { index: i, n });
    }
    let mut next = 1;
    let roots = sp
        .raw_component(i - 1)
        .iter()
        .map(|&(li, e)| build_node(&sp, li, e, q, 0, &mut next))
        .collect();
    Ok(Forest { roots, q })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubforestCounts {
    pub even: usize,
    pub odd: usize,
}

impl SubforestCounts {
    pub fn signed(&self) -> i64 {
        self.even as i64 - self.odd as i64
    }

    pub fn total(&self) -> usize {
        self.even + self.odd
    }
}

struct Arena {
    location: Vec<usize>,
    label: Vec<usize>,
    negative: Vec<bool>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl Arena {
    fn new(f: &Forest) -> Self {
        let mut a = Arena {
            location: Vec::new(),
            label: Vec::new(),
            negative: Vec::new(),
            children: Vec::new(),
            roots: Vec::new(),
        };
        fn push(a: &mut Arena, n: &ForestNode) -> usize {
            let id = a.location.len();
            a.location.push(n.location);
            a.label.push(n.eta_index);
            a.negative.push(n.sign == Exponent::Minus);
            a.children.push(Vec::new());
            let kids: Vec<usize> = n.children.iter().map(|c| push(a, c)).collect();
            a.children[id] = kids;
            id
        }
        for r in &f.roots {
            let id = push(&mut a, r);
            a.roots.push(id);
        }
        a
    }
}

/// Counts ancestor-closed subforests with exactly `c.len()` vertices whose
/// third labels, read in location order, are `c`, split by the parity of the
/// number of selected vertices with sign -1.
pub fn subforest_counts(f: &Forest, c: &[usize]) -> Result<SubforestCounts, InvariantError> {
    for (k, x) in c.iter().enumerate() {
        if c[..k].contains(x) {
            return Err(InvariantError::RepeatedIndices(c.to_vec()));
        }
    }
    let arena = Arena::new(f);
    let mut counts = SubforestCounts { even: 0, odd: 0 };
    let mut selected = Vec::with_capacity(c.len());
    extend(&arena, c, &mut selected, arena.roots.clone(), &mut counts);
    Ok(counts)
}

// Each ancestor-closed selection is produced once: a candidate skipped at
// position k is never offered again in that branch.
fn extend(arena: &Arena, c: &[usize], selected: &mut Vec<usize>, candidates: Vec<usize>, counts: &mut SubforestCounts) {
    if selected.len() == c.len() {
        let mut by_location = selected.clone();
        by_location.sort_by_key(|&v| arena.location[v]);
        if by_location.iter().map(|&v| arena.label[v]).eq(c.iter().copied()) {
            if selected.iter().filter(|&&v| arena.negative[v]).count() % 2 == 0 {
                counts.even += 1;
            } else {
                counts.odd += 1;
            }
        }
        return;
    }
    for (k, &v) in candidates.iter().enumerate() {
        let label = arena.label[v];
        if !c.contains(&label) || selected.iter().any(|&s| arena.label[s] == label) {
            continue;
        }
        let mut next: Vec<usize> = candidates[k + 1..].to_vec();
        next.extend_from_slice(&arena.children[v]);
        selected.push(v);
        extend(arena, c, selected, next, counts);
        selected.pop();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleOutcome {
    pub coefficient: i64,
    pub counts: SubforestCounts,
}

impl OracleOutcome {
    pub fn holds(&self) -> bool {
        self.coefficient == self.counts.signed()
    }
}

/// Compares the series coefficient of `k_{c_1}...k_{c_u}` in component `i`
/// at stage `q` with the signed subforest count of F_i^q.
pub fn oracle_check(p: &Nanophrase, i: usize, c: &[usize], q: usize) -> Result<OracleOutcome, InvariantError> {
    let forest = build_forest(p, i, q)?;
    let counts = subforest_counts(&forest, c)?;
    let n = p.component_count();
    if let Some(&bad) = c.iter().find(|&&x| x == 0 || x > n) {
        return Err(InvariantError::IndexOutOfRange { index: bad, n });
    }
    let series = SignedPhrase::new(p)?.component_series(i, q, c.len())?;
    let coefficient = series.coefficient(c).expect("monomial within bound");
    Ok(OracleOutcome { coefficient, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnus::rho_expand;
    use crate::phrase::parse_nanophrase;

    fn p_ex() -> Nanophrase {
        parse_nanophrase("letters: A:b+ B:b+ C:b+ D:b- E:a- F:a-\nphrase: AB|CDB|DEA|FFCE").unwrap()
    }

    fn summary(n: &ForestNode) -> String {
        let kids: Vec<String> = n.children.iter().map(summary).collect();
        let me = format!("{}{}", n.letter, if n.sign == Exponent::Minus { "'" } else { "" });
        if kids.is_empty() {
            me
        } else {
            format!("{me}[{}]", kids.join(" "))
        }
    }

    #[test]
    fn running_example_forest_shape() {
        let f = build_forest(&p_ex(), 1, 4).unwrap();
        let shape: Vec<String> = f.roots.iter().map(summary).collect();
        assert_eq!(shape, vec!["A[E D[C' C] D'[C' C] E']", "B[C' C]"]);
        assert_eq!(f.max_depth(), Some(2));
        assert_eq!(f.flatten(), rho_expand(&p_ex(), 1, 4).unwrap());
        let locs: Vec<usize> = {
            let mut v: Vec<usize> = f.nodes().iter().map(|n| n.location).collect();
            v.sort();
            v
        };
        assert_eq!(locs, (1..=12).collect::<Vec<_>>());
    }

    #[test]
    fn stage_two_has_only_roots() {
        let f = build_forest(&p_ex(), 3, 2).unwrap();
        assert_eq!(f.roots.len(), 2);
        assert!(f.roots.iter().all(|r| r.children.is_empty()));
        assert!(build_forest(&p_ex(), 3, 1).is_err());
    }

    #[test]
    fn counts_on_worked_example() {
        let f = build_forest(&p_ex(), 3, 3).unwrap();
        let c = subforest_counts(&f, &[2, 4]).unwrap();
        assert_eq!((c.even, c.odd), (1, 1));
        assert_eq!(subforest_counts(&f, &[]).unwrap(), SubforestCounts { even: 1, odd: 0 });
        assert!(subforest_counts(&f, &[2, 2]).is_err());
    }

    #[test]
    fn single_negative_root() {
        let f = Forest {
            roots: vec![ForestNode {
                location: 1,
                letter: Letter::new("A").unwrap(),
                eta_index: 3,
                sign: Exponent::Minus,
                depth: 0,
                children: vec![],
            }],
            q: 2,
        };
        assert_eq!(subforest_counts(&f, &[3]).unwrap(), SubforestCounts { even: 0, odd: 1 });
    }

    /// Exhaustive subset enumeration, independent of the frontier algorithm.
    fn brute_counts(f: &Forest, c: &[usize]) -> SubforestCounts {
        let nodes = f.nodes();
        let mut parent = vec![None; nodes.len()];
        for (k, n) in nodes.iter().enumerate() {
            for ch in &n.children {
                let j = nodes.iter().position(|m| std::ptr::eq(*m, ch)).unwrap();
                parent[j] = Some(k);
            }
        }
        let mut counts = SubforestCounts { even: 0, odd: 0 };
        for mask in 0u32..(1 << nodes.len()) {
            let sel: Vec<usize> = (0..nodes.len()).filter(|k| mask >> k & 1 == 1).collect();
            if sel.len() != c.len() || sel.iter().any(|&k| parent[k].is_some_and(|p| mask >> p & 1 == 0)) {
                continue;
            }
            let mut by_loc = sel.clone();
            by_loc.sort_by_key(|&k| nodes[k].location);
            if by_loc.iter().map(|&k| nodes[k].eta_index).eq(c.iter().copied()) {
                if sel.iter().filter(|&&k| nodes[k].sign == Exponent::Minus).count() % 2 == 0 {
                    counts.even += 1;
                } else {
                    counts.odd += 1;
                }
            }
        }
        counts
    }

    #[test]
    fn frontier_enumeration_matches_brute_force() {
        let p = p_ex();
        for (i, q) in [(1, 3), (1, 4), (3, 3), (3, 4)] {
            let f = build_forest(&p, i, q).unwrap();
            assert!(f.nodes().len() <= 16);
            for c in [vec![2], vec![4], vec![2, 4], vec![4, 2], vec![3, 4, 2], vec![4, 2, 3], vec![2, 3, 4]] {
                assert_eq!(subforest_counts(&f, &c).unwrap(), brute_counts(&f, &c), "i={i} q={q} c={c:?}");
            }
        }
    }

    #[test]
    fn oracle_on_fixtures() {
        let o = oracle_check(&p_ex(), 3, &[2, 4], 3).unwrap();
        assert!(o.holds());
        assert_eq!(o.coefficient, 0);
        let borromean =
            parse_nanophrase("letters: A:b+ B:b- C:a- D:a+ E:b+ F:a-\nphrase: ABCD|ECFA|DFBE").unwrap();
        let o = oracle_check(&borromean, 1, &[2, 3], 3).unwrap();
        assert!(o.holds());
        assert_eq!(o.coefficient, -1);
    }

    #[test]
    fn dump_format() {
        let f = build_forest(&p_ex(), 3, 3).unwrap();
        assert_eq!(
            f.dump(),
            "g=2 D^-1 k=2 d=0\n  g=1 C^-1 k=4 d=1\n  g=3 C^1 k=4 d=1\ng=4 E^-1 k=4 d=0\n"
        );
    }
}
