//! Move sites: enumeration and application of H1, H2, H3, extended H3, shift
//! and self-crossing moves.
//!
//! H1/H2 removals and both H3 forms are matched by one role template: a list of
//! blocks, each block one or two roles. Two-role blocks are adjacent letters in
//! one component; the gaps between blocks are arbitrary and may cross `|`.
//! A role's first slot in the template is its letter's first occurrence.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::MoveError;
use crate::homotopy::{HomotopyData, TripleSlot};
use crate::phrase::{Letter, Nanophrase, OccurrenceAddress, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    #[serde(rename = "H1_remove")]
    H1Remove,
    #[serde(rename = "H1_insert")]
    H1Insert,
    #[serde(rename = "H2_remove")]
    H2Remove,
    #[serde(rename = "H2_insert")]
    H2Insert,
    H3,
    H3ext,
    Shift,
    SelfCross,
}

impl MoveKind {
    pub const ALL: [MoveKind; 8] = [
        MoveKind::H1Remove,
        MoveKind::H1Insert,
        MoveKind::H2Remove,
        MoveKind::H2Insert,
        MoveKind::H3,
        MoveKind::H3ext,
        MoveKind::Shift,
        MoveKind::SelfCross,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::H1Remove => "H1_remove",
            MoveKind::H1Insert => "H1_insert",
            MoveKind::H2Remove => "H2_remove",
            MoveKind::H2Insert => "H2_insert",
            MoveKind::H3 => "H3",
            MoveKind::H3ext => "H3ext",
            MoveKind::Shift => "Shift",
            MoveKind::SelfCross => "SelfCross",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }

    pub fn is_insertion(self) -> bool {
        matches!(self, MoveKind::H1Insert | MoveKind::H2Insert)
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// For H3 moves: which side of the equivalence the current phrase matches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

/// Insert before position `offset` (0-based) of a component (1-based);
/// `offset` equal to the component length appends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InsertSlot {
    pub component: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slots: Vec<InsertSlot>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fresh: Vec<Letter>,
    /// `|A|` for insertions; `|B|` of an H2 insertion is `tau(|A|)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub projections: Vec<Symbol>,
    /// Role (0, 1, 2 for A, B, C) erased by an empty triple slot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erased: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveSite {
    pub kind: MoveKind,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub addresses: Vec<OccurrenceAddress>,
    #[serde(default)]
    pub params: MoveParams,
}

impl MoveSite {
    fn plain(kind: MoveKind, direction: Direction, addresses: Vec<OccurrenceAddress>) -> Self {
        Self {
            kind,
            direction,
            addresses,
            params: MoveParams::default(),
        }
    }

    /// Fixes the fresh letters and `|A|` of an insertion schema.
    pub fn bind(mut self, fresh: Vec<Letter>, projection: Symbol) -> Self {
        self.params.fresh = fresh;
        self.params.projections = vec![projection];
        self
    }

    pub fn is_bound(&self) -> bool {
        let need = match self.kind {
            MoveKind::H1Insert => 1,
            MoveKind::H2Insert => 2,
            _ => return true,
        };
        self.params.fresh.len() == need && self.params.projections.len() == 1
    }
}

impl fmt::Display for MoveSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if matches!(self.kind, MoveKind::H3 | MoveKind::H3ext) {
            write!(f, " {}", if self.direction == Direction::Forward { "forward" } else { "backward" })?;
        }
        if !self.addresses.is_empty() {
            write!(f, " at {}", self.addresses.iter().join(" "))?;
        }
        if let Some(c) = self.params.component {
            write!(f, " component {c}")?;
        }
        if !self.params.slots.is_empty() {
            let slots = self.params.slots.iter().map(|s| format!("{}+{}", s.component, s.offset));
            write!(f, " slots {}", slots.format(" "))?;
        }
        if !self.params.fresh.is_empty() {
            write!(f, " fresh {}", self.params.fresh.iter().join(" "))?;
        }
        if let Some(s) = self.params.projections.first() {
            write!(f, " |{}|={s}", self.params.fresh.first().map(|l| l.as_str()).unwrap_or("A"))?;
        }
        Ok(())
    }
}

/// Flattened view of a phrase with letters numbered by first occurrence.
struct Flat<'a> {
    p: &'a Nanophrase,
    letters: Vec<&'a Letter>,
    /// per global position: (component 0-based, position 0-based, letter index)
    cells: Vec<(usize, usize, usize)>,
    occ: Vec<[usize; 2]>,
}

impl<'a> Flat<'a> {
    fn new(p: &'a Nanophrase) -> Self {
        let mut index: BTreeMap<&Letter, usize> = BTreeMap::new();
        let mut letters = Vec::new();
        let mut cells = Vec::new();
        let mut occ: Vec<[usize; 2]> = Vec::new();
        for (ci, comp) in p.components().iter().enumerate() {
            for (pi, l) in comp.iter().enumerate() {
                let g = cells.len();
                let li = *index.entry(l).or_insert_with(|| {
                    letters.push(l);
                    occ.push([g, usize::MAX]);
                    letters.len() - 1
                });
                if occ[li][0] != g {
                    occ[li][1] = g;
                }
                cells.push((ci, pi, li));
            }
        }
        Self { p, letters, cells, occ }
    }

    fn symbol(&self, li: usize) -> &Symbol {
        self.p.projection(self.letters[li]).expect("validated phrase")
    }

    fn address(&self, g: usize) -> OccurrenceAddress {
        let (c, pos, _) = self.cells[g];
        OccurrenceAddress::new(c + 1, pos + 1)
    }

    fn global(&self, a: OccurrenceAddress) -> Option<usize> {
        let comps = self.p.components();
        if a.component == 0 || a.component > comps.len() || a.position == 0 || a.position > comps[a.component - 1].len() {
            return None;
        }
        Some(comps[..a.component - 1].iter().map(Vec::len).sum::<usize>() + a.position - 1)
    }

    fn same_component_adjacent(&self, g: usize, h: usize) -> bool {
        h == g + 1 && h < self.cells.len() && self.cells[g].0 == self.cells[h].0
    }
}

#[derive(Clone, Debug)]
struct Template {
    blocks: Vec<Vec<usize>>,
    roles: usize,
}

impl Template {
    fn slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().flatten().copied()
    }

    /// Global positions of the template slots when role `r` is letter
    /// `assign[r]`, if the assignment matches.
    fn positions(&self, flat: &Flat<'_>, assign: &[usize]) -> Option<Vec<usize>> {
        let mut seen = vec![0usize; self.roles];
        let mut out = Vec::with_capacity(self.roles * 2);
        for block in &self.blocks {
            let start = out.len();
            for &r in block {
                let g = flat.occ[assign[r]][seen[r]];
                seen[r] += 1;
                if let Some(&prev) = out.last() {
                    if g <= prev {
                        return None;
                    }
                }
                out.push(g);
            }
            for k in start + 1..out.len() {
                if !flat.same_component_adjacent(out[k - 1], out[k]) {
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Role assignment read off positions, checked against the template.
    fn assignment_at(&self, flat: &Flat<'_>, positions: &[usize]) -> Option<Vec<usize>> {
        if positions.len() != self.slots().count() {
            return None;
        }
        let mut assign = vec![usize::MAX; self.roles];
        for (r, &g) in self.slots().zip(positions) {
            let li = flat.cells.get(g)?.2;
            if assign[r] == usize::MAX {
                assign[r] = li;
            } else if assign[r] != li {
                return None;
            }
        }
        if !assign.iter().all_unique() || self.positions(flat, &assign)? != positions {
            return None;
        }
        Some(assign)
    }
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;

fn h1_template() -> Template {
    Template {
        blocks: vec![vec![A, A]],
        roles: 1,
    }
}

fn h2_template() -> Template {
    Template {
        blocks: vec![vec![A, B], vec![B, A]],
        roles: 2,
    }
}

/// `xAByACzBCt` forward, `xBAyCAzCBt` backward; the erased role is dropped
/// and the roles are renumbered densely.
fn h3_template(direction: Direction, erased: Option<usize>) -> Template {
    let pairs = [[A, B], [A, C], [B, C]];
    let blocks: Vec<Vec<usize>> = pairs
        .iter()
        .map(|pair| {
            let mut b: Vec<usize> = pair.to_vec();
            if direction == Direction::Backward {
                b.reverse();
            }
            b.retain(|&r| Some(r) != erased);
            b.iter().map(|&r| dense_role(r, erased)).collect()
        })
        .collect();
    Template {
        blocks,
        roles: if erased.is_some() { 2 } else { 3 },
    }
}

fn dense_role(r: usize, erased: Option<usize>) -> usize {
    match erased {
        Some(e) if r > e => r - 1,
        _ => r,
    }
}

fn template_for(site: &MoveSite) -> Option<Template> {
    match site.kind {
        MoveKind::H1Remove => Some(h1_template()),
        MoveKind::H2Remove => Some(h2_template()),
        MoveKind::H3 => Some(h3_template(site.direction, None)),
        MoveKind::H3ext => site.params.erased.map(|e| h3_template(site.direction, Some(e))),
        _ => None,
    }
}

/// Whether the letters matched to a template satisfy the move's projection rule.
fn projection_rule(h: &HomotopyData, kind: MoveKind, erased: Option<usize>, syms: &[&Symbol]) -> bool {
    match kind {
        MoveKind::H1Remove => true,
        MoveKind::H2Remove => h.tau().apply(syms[0]) == syms[1],
        MoveKind::H3 | MoveKind::H3ext => {
            let mut it = syms.iter();
            let triple = [0, 1, 2].map(|r| {
                if Some(r) == erased {
                    TripleSlot::Empty
                } else {
                    TripleSlot::Symbol((*it.next().expect("one symbol per kept role")).clone())
                }
            });
            h.contains_triple(&triple)
        }
        _ => false,
    }
}

fn match_template(
    flat: &Flat<'_>,
    h: &HomotopyData,
    kind: MoveKind,
    direction: Direction,
    erased: Option<usize>,
) -> Vec<MoveSite> {
    let t = match kind {
        MoveKind::H1Remove => h1_template(),
        MoveKind::H2Remove => h2_template(),
        _ => h3_template(direction, erased),
    };
    let n = flat.letters.len();
    let mut out = Vec::new();
    for assign in (0..n).permutations(t.roles) {
        let syms: Vec<&Symbol> = assign.iter().map(|&li| flat.symbol(li)).collect();
        if !projection_rule(h, kind, erased, &syms) {
            continue;
        }
        if let Some(pos) = t.positions(flat, &assign) {
            let mut site = MoveSite::plain(kind, direction, pos.iter().map(|&g| flat.address(g)).collect());
            site.params.erased = erased;
            out.push(site);
        }
    }
    out.sort_by(|a, b| a.addresses.cmp(&b.addresses));
    out
}

fn insert_slots(p: &Nanophrase) -> Vec<InsertSlot> {
    p.components()
        .iter()
        .enumerate()
        .flat_map(|(ci, comp)| (0..=comp.len()).map(move |offset| InsertSlot { component: ci + 1, offset }))
        .collect()
}

/// Every applicable site of the requested kinds. Insertions come back as
/// unbound schemas (one per slot or ordered slot pair); bind them with
/// [`MoveSite::bind`] before applying. Shift and self-crossing sites are only
/// produced when the data's move set allows them.
pub fn enumerate_sites(p: &Nanophrase, h: &HomotopyData, kinds: &[MoveKind]) -> Vec<MoveSite> {
    let flat = Flat::new(p);
    let mut out = Vec::new();
    for kind in MoveKind::ALL.into_iter().filter(|k| kinds.contains(k)) {
        match kind {
            MoveKind::H1Remove | MoveKind::H2Remove => {
                out.extend(match_template(&flat, h, kind, Direction::Forward, None))
            }
            MoveKind::H3 => {
                for d in [Direction::Forward, Direction::Backward] {
                    out.extend(match_template(&flat, h, kind, d, None));
                }
            }
            MoveKind::H3ext => {
                if h.has_extended_triples() {
                    for d in [Direction::Forward, Direction::Backward] {
                        for e in 0..3 {
                            out.extend(match_template(&flat, h, kind, d, Some(e)));
                        }
                    }
                }
            }
            MoveKind::H1Insert => {
                for slot in insert_slots(p) {
                    let mut site = MoveSite::plain(kind, Direction::Forward, vec![]);
                    site.params.slots = vec![slot];
                    out.push(site);
                }
            }
            MoveKind::H2Insert => {
                let slots = insert_slots(p);
                for (i, &s1) in slots.iter().enumerate() {
                    for &s2 in &slots[i..] {
                        let mut site = MoveSite::plain(kind, Direction::Forward, vec![]);
                        site.params.slots = vec![s1, s2];
                        out.push(site);
                    }
                }
            }
            MoveKind::Shift => {
                if h.moveset().allow_shift {
                    for c in 1..=p.component_count() {
                        let mut site = MoveSite::plain(kind, Direction::Forward, vec![]);
                        site.params.component = Some(c);
                        out.push(site);
                    }
                }
            }
            MoveKind::SelfCross => {
                if h.moveset().allow_self_crossing {
                    for li in 0..flat.letters.len() {
                        let [g0, g1] = flat.occ[li];
                        if flat.cells[g0].0 == flat.cells[g1].0 {
                            out.push(MoveSite::plain(kind, Direction::Forward, vec![flat.address(g0), flat.address(g1)]));
                        }
                    }
                }
            }
        }
    }
    out
}

/// `X<k>` names not yet used in `p`, continuing after the largest `X<k>` present.
pub fn fresh_letters(p: &Nanophrase, count: usize) -> Vec<Letter> {
    let next = p
        .letters()
        .filter_map(|l| l.as_str().strip_prefix('X')?.parse::<u64>().ok())
        .max()
        .map_or(1, |m| m + 1);
    (0..count as u64)
        .map(|k| Letter::new(format!("X{}", next + k)).expect("fresh names are valid"))
        .collect()
}

fn stale(site: &MoveSite) -> MoveError {
    MoveError::StaleSite(site.to_string())
}

/// Applies a site to the phrase it was enumerated from. The site is
/// re-checked against `p`, so a site from another phrase fails cleanly.
pub fn apply_move(p: &Nanophrase, h: &HomotopyData, site: &MoveSite) -> Result<Nanophrase, MoveError> {
    let flat = Flat::new(p);
    let (mut proj, mut comps) = p.clone().into_parts();
    match site.kind {
        MoveKind::H1Remove | MoveKind::H2Remove | MoveKind::H3 | MoveKind::H3ext => {
            let t = template_for(site).ok_or_else(|| stale(site))?;
            let positions: Vec<usize> = site
                .addresses
                .iter()
                .map(|&a| flat.global(a))
                .collect::<Option<_>>()
                .ok_or_else(|| stale(site))?;
            let assign = t.assignment_at(&flat, &positions).ok_or_else(|| stale(site))?;
            let syms: Vec<&Symbol> = assign.iter().map(|&li| flat.symbol(li)).collect();
            if !projection_rule(h, site.kind, site.params.erased, &syms) {
                return Err(stale(site));
            }
            if matches!(site.kind, MoveKind::H1Remove | MoveKind::H2Remove) {
                let gone: Vec<Letter> = assign.iter().map(|&li| flat.letters[li].clone()).collect();
                for l in &gone {
                    proj.remove(l);
                }
                for comp in &mut comps {
                    comp.retain(|l| !gone.contains(l));
                }
            } else {
                let mut k = 0;
                for block in &t.blocks {
                    if block.len() == 2 {
                        let a = site.addresses[k];
                        comps[a.component - 1].swap(a.position - 1, a.position);
                    }
                    k += block.len();
                }
            }
        }
        MoveKind::H1Insert | MoveKind::H2Insert => {
            if !site.is_bound() {
                return Err(MoveError::UnboundInsertion);
            }
            for l in &site.params.fresh {
                if proj.contains_key(l) {
                    return Err(MoveError::FreshNameCollision(l.clone()));
                }
            }
            let sa = site.params.projections[0].clone();
            if !h.contains(&sa) {
                return Err(crate::error::DataError::UnknownSymbol(sa).into());
            }
            let fresh = &site.params.fresh;
            let slot_ok = |s: &InsertSlot| s.component >= 1 && s.component <= comps.len() && s.offset <= comps[s.component - 1].len();
            match (site.kind, site.params.slots.as_slice()) {
                (MoveKind::H1Insert, [s]) if slot_ok(s) => {
                    let a = &fresh[0];
                    comps[s.component - 1].splice(s.offset..s.offset, [a.clone(), a.clone()]);
                    proj.insert(a.clone(), sa);
                }
                (MoveKind::H2Insert, [s1, s2]) if slot_ok(s1) && slot_ok(s2) && s1 <= s2 => {
                    let (a, b) = (&fresh[0], &fresh[1]);
                    if a == b {
                        return Err(MoveError::FreshNameCollision(a.clone()));
                    }
                    let sb = h.tau().apply(&sa).clone();
                    if s1 == s2 {
                        comps[s1.component - 1].splice(s1.offset..s1.offset, [a.clone(), b.clone(), b.clone(), a.clone()]);
                    } else {
                        // later slot first so the earlier offset stays valid
                        comps[s2.component - 1].splice(s2.offset..s2.offset, [b.clone(), a.clone()]);
                        comps[s1.component - 1].splice(s1.offset..s1.offset, [a.clone(), b.clone()]);
                    }
                    proj.insert(a.clone(), sa);
                    proj.insert(b.clone(), sb);
                }
                _ => return Err(stale(site)),
            }
        }
        MoveKind::Shift => {
            let c = site.params.component.ok_or_else(|| stale(site))?;
            if c == 0 || c > comps.len() || !h.moveset().allow_shift {
                return Err(stale(site));
            }
            let comp = &mut comps[c - 1];
            if !comp.is_empty() {
                let first = comp.remove(0);
                if comp.contains(&first) {
                    let s = proj.get_mut(&first).expect("letter has a projection");
                    *s = h.nu().apply(s).clone();
                }
                comp.push(first);
            }
        }
        MoveKind::SelfCross => {
            let [a0, a1] = site.addresses.as_slice() else {
                return Err(stale(site));
            };
            let (Some(g0), Some(g1)) = (flat.global(*a0), flat.global(*a1)) else {
                return Err(stale(site));
            };
            let li = flat.cells[g0].2;
            if !h.moveset().allow_self_crossing || flat.occ[li] != [g0, g1] || a0.component != a1.component {
                return Err(stale(site));
            }
            let s = proj.get_mut(flat.letters[li]).expect("letter has a projection");
            *s = h.sigma().apply(s).clone();
        }
    }
    Ok(Nanophrase::from_parts_unchecked(proj, comps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::{builtin_virtual, builtin_welded, linking_matrix};
    use crate::phrase::{parse_nanophrase, validate};

    fn ph(letters: &str, phrase: &str) -> Nanophrase {
        parse_nanophrase(&format!("letters: {letters}\nphrase: {phrase}")).unwrap()
    }

    fn sites(p: &Nanophrase, h: &HomotopyData, kind: MoveKind) -> Vec<MoveSite> {
        enumerate_sites(p, h, &[kind])
    }

    #[test]
    fn h1_remove_single_site() {
        let h = builtin_virtual();
        let p = ph("A:a+", "A A");
        let s = sites(&p, &h, MoveKind::H1Remove);
        assert_eq!(s.len(), 1);
        let q = apply_move(&p, &h, &s[0]).unwrap();
        assert_eq!(q, Nanophrase::with_empty_components(1));
        assert!(sites(&ph("A:a+", "A | A"), &h, MoveKind::H1Remove).is_empty());
    }

    #[test]
    fn h2_remove_across_separator() {
        let h = builtin_virtual();
        let p = ph("A:a+ B:b-", "A B | B A");
        let s = sites(&p, &h, MoveKind::H2Remove);
        assert_eq!(s.len(), 1);
        assert_eq!(apply_move(&p, &h, &s[0]).unwrap(), Nanophrase::with_empty_components(2));
        // tau(a+) is b-, not b+
        assert!(sites(&ph("A:a+ B:b+", "A B | B A"), &h, MoveKind::H2Remove).is_empty());
        // the pair BA must be adjacent within a component
        assert!(sites(&ph("A:a+ B:b-", "A B B | A"), &h, MoveKind::H2Remove).is_empty());
    }

    #[test]
    fn h3_forward_and_back() {
        let h = builtin_virtual();
        let p = ph("A:a+ B:a+ C:a+", "A B A C B C");
        let fwd: Vec<_> = sites(&p, &h, MoveKind::H3)
            .into_iter()
            .filter(|s| s.direction == Direction::Forward)
            .collect();
        assert_eq!(fwd.len(), 1);
        let q = apply_move(&p, &h, &fwd[0]).unwrap();
        assert_eq!(q, ph("A:a+ B:a+ C:a+", "B A C A C B"));
        let back: Vec<_> = sites(&q, &h, MoveKind::H3)
            .into_iter()
            .filter(|s| s.direction == Direction::Backward)
            .collect();
        assert_eq!(back.len(), 1);
        assert_eq!(apply_move(&q, &h, &back[0]).unwrap(), p);
    }

    #[test]
    fn h3_needs_triple_in_s() {
        let h = builtin_virtual();
        // (a+, b+, a+) is not in S_v
        let p = ph("A:a+ B:b+ C:a+", "A B A C B C");
        assert!(sites(&p, &h, MoveKind::H3).is_empty());
    }

    #[test]
    fn extended_h3_erases_a_role() {
        let h = builtin_welded();
        // (b-, b-, empty): xAByAzBt <-> xBAyAzBt
        let p = ph("A:b- B:b-", "A B | A B");
        let s: Vec<_> = sites(&p, &h, MoveKind::H3ext)
            .into_iter()
            .filter(|s| s.direction == Direction::Forward && s.params.erased == Some(2))
            .collect();
        assert_eq!(s.len(), 1);
        let q = apply_move(&p, &h, &s[0]).unwrap();
        assert_eq!(q, ph("A:b- B:b-", "B A | A B"));
        assert!(sites(&p, &builtin_virtual(), MoveKind::H3ext).is_empty());
    }

    #[test]
    fn shift_applies_nu_when_letter_recurs() {
        let h = builtin_virtual();
        let p = ph("A:a+ B:b+", "A B A B");
        let s = sites(&p, &h, MoveKind::Shift);
        assert_eq!(s.len(), 1);
        let q = apply_move(&p, &h, &s[0]).unwrap();
        assert_eq!(q, ph("A:b+ B:b+", "B A B A"));
        // partner in another component: no nu
        let p = ph("A:a+ B:b+", "A B B | A");
        let q = apply_move(&p, &h, &sites(&p, &h, MoveKind::Shift)[0]).unwrap();
        assert_eq!(q, ph("A:a+ B:b+", "B B A | A"));
    }

    #[test]
    fn shift_cycles_back() {
        let h = builtin_virtual();
        let p = ph("A:a+ B:b- C:a-", "A B C | B C A");
        for c in 1..=2 {
            let mut q = p.clone();
            let site = sites(&p, &h, MoveKind::Shift).into_iter().find(|s| s.params.component == Some(c)).unwrap();
            for _ in 0..3 {
                q = apply_move(&q, &h, &site).unwrap();
            }
            assert_eq!(q, p);
        }
        // A recurs in the component: nu is applied twice on the way round
        let p = ph("A:a+ B:b-", "A B A | B");
        let site = &sites(&p, &h, MoveKind::Shift)[0];
        let mut q = p.clone();
        for _ in 0..3 {
            q = apply_move(&q, &h, site).unwrap();
        }
        assert_eq!(q, p);
    }

    #[test]
    fn self_crossing_flips_projection() {
        let h = builtin_virtual();
        let p = ph("A:b+ B:a-", "A B A | B");
        let s = sites(&p, &h, MoveKind::SelfCross);
        assert_eq!(s.len(), 1);
        assert_eq!(apply_move(&p, &h, &s[0]).unwrap(), ph("A:b- B:a-", "A B A | B"));
        let open = h.clone().with_moveset(crate::homotopy::MoveSet {
            allow_shift: false,
            allow_self_crossing: false,
        });
        assert!(enumerate_sites(&p, &open, &[MoveKind::SelfCross, MoveKind::Shift]).is_empty());
        assert!(apply_move(&p, &open, &s[0]).is_err());
    }

    #[test]
    fn insertions_invert_removals() {
        let h = builtin_virtual();
        let p = ph("A:a+ B:b-", "A B | B A");
        let fresh = fresh_letters(&p, 2);
        assert_eq!(fresh[0].as_str(), "X1");
        for schema in sites(&p, &h, MoveKind::H1Insert) {
            let site = schema.bind(fresh[..1].to_vec(), Symbol::new("b+").unwrap());
            let q = apply_move(&p, &h, &site).unwrap();
            assert!(validate(&q, &h).is_empty());
            let back: Vec<_> = sites(&q, &h, MoveKind::H1Remove)
                .into_iter()
                .map(|s| apply_move(&q, &h, &s).unwrap())
                .collect();
            assert!(back.contains(&p));
        }
        let schemas = sites(&p, &h, MoveKind::H2Insert);
        // 3 + 3 slots, unordered pairs with repetition
        assert_eq!(schemas.len(), 21);
        for schema in schemas {
            let site = schema.bind(fresh.clone(), Symbol::new("a-").unwrap());
            let q = apply_move(&p, &h, &site).unwrap();
            assert!(validate(&q, &h).is_empty(), "{q}");
            assert_eq!(q.projection(&fresh[1]).unwrap().as_str(), "b+");
            let back: Vec<_> = sites(&q, &h, MoveKind::H2Remove)
                .into_iter()
                .map(|s| apply_move(&q, &h, &s).unwrap())
                .collect();
            assert!(back.contains(&p), "{q}");
        }
    }

    #[test]
    fn bad_sites_are_rejected() {
        let h = builtin_virtual();
        let p = ph("A:a+", "A A");
        let other = ph("A:a+ B:a+", "A B B A");
        let site = &sites(&p, &h, MoveKind::H1Remove)[0];
        assert!(matches!(apply_move(&other, &h, site), Err(MoveError::StaleSite(_))));
        let schema = sites(&p, &h, MoveKind::H1Insert).remove(0);
        assert_eq!(apply_move(&p, &h, &schema), Err(MoveError::UnboundInsertion));
        let clash = schema.bind(vec![Letter::new("A").unwrap()], Symbol::new("a+").unwrap());
        assert!(matches!(apply_move(&p, &h, &clash), Err(MoveError::FreshNameCollision(_))));
    }

    #[test]
    fn fresh_names_continue_counter() {
        let p = ph("X3:a+ Y:a+", "X3 Y X3 Y");
        let f = fresh_letters(&p, 2);
        assert_eq!((f[0].as_str(), f[1].as_str()), ("X4", "X5"));
    }

    #[test]
    fn site_json_round_trip() {
        let h = builtin_welded();
        let p = ph("A:b- B:b-", "A B | A B");
        for site in enumerate_sites(&p, &h, &MoveKind::ALL) {
            let json = serde_json::to_string(&site).unwrap();
            let back: MoveSite = serde_json::from_str(&json).unwrap();
            assert_eq!(back, site);
        }
        let s = serde_json::to_value(&sites(&p, &h, MoveKind::Shift)[0]).unwrap();
        assert_eq!(s, serde_json::json!({"kind": "Shift", "direction": "forward", "addresses": [], "params": {"component": 1}}));
    }

    #[test]
    fn all_sites_preserve_validity_and_linking() {
        let h = builtin_welded();
        let p = parse_nanophrase("letters: A:b+ B:b- C:a- D:a+ E:b+ F:a-\nphrase: ABCD|ECFA|DFBE").unwrap();
        let l = linking_matrix(&p, &h).unwrap();
        let kinds = [MoveKind::H3, MoveKind::H3ext, MoveKind::Shift, MoveKind::SelfCross, MoveKind::H2Insert];
        for site in enumerate_sites(&p, &h, &kinds) {
            let site = if site.kind.is_insertion() {
                site.bind(fresh_letters(&p, 2), Symbol::new("b+").unwrap())
            } else {
                site
            };
            let q = apply_move(&p, &h, &site).unwrap();
            assert!(validate(&q, &h).is_empty());
            assert_eq!(q.component_count(), 3);
            assert_eq!(linking_matrix(&q, &h).unwrap(), l, "{site}");
        }
    }
}
