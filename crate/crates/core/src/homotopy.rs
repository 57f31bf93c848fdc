//! Homotopy data (alpha, tau, S, nu, sigma), the built-in virtual and welded
//! instances, and the linking matrix valued in pi = <alpha | a + tau(a) = 0>.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{DataError, ParseError};
use crate::phrase::{keyed_lines, Nanophrase, Symbol};

/// A slot of an H3 triple: a symbol of alpha, or the out-of-alpha marker that
/// erases the corresponding letter from the move pattern.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TripleSlot {
    Symbol(Symbol),
    Empty,
}

impl TripleSlot {
    pub fn symbol(&self) -> Option<&Symbol> {
        match self {
            TripleSlot::Symbol(s) => Some(s),
            TripleSlot::Empty => None,
        }
    }
}

impl fmt::Display for TripleSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripleSlot::Symbol(s) => write!(f, "{s}"),
            TripleSlot::Empty => f.write_str("_"),
        }
    }
}

pub type Triple = [TripleSlot; 3];

fn triple_to_string(t: &Triple) -> String {
    format!("({},{},{})", t[0], t[1], t[2])
}

/// An involution on alpha, stored as a total map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution(BTreeMap<Symbol, Symbol>);

impl Involution {
    fn build(
        map: &'static str,
        alpha: &BTreeSet<Symbol>,
        swaps: &[(Symbol, Symbol)],
    ) -> Result<Self, DataError> {
        let mut m: BTreeMap<Symbol, Symbol> = alpha.iter().map(|s| (s.clone(), s.clone())).collect();
        let mut touched = BTreeSet::new();
        for (x, y) in swaps {
            for s in [x, y] {
                if !alpha.contains(s) {
                    return Err(DataError::UnknownSymbol(s.clone()));
                }
            }
            if !touched.insert(x.clone()) || (x != y && !touched.insert(y.clone())) {
                return Err(DataError::NotInvolution {
                    map,
                    detail: format!("{x} or {y} appears in two swaps"),
                });
            }
            m.insert(x.clone(), y.clone());
            m.insert(y.clone(), x.clone());
        }
        let inv = Self(m);
        debug_assert!(alpha.iter().all(|s| inv.apply(inv.apply(s)) == s));
        Ok(inv)
    }

    pub fn apply<'a>(&'a self, s: &'a Symbol) -> &'a Symbol {
        self.0.get(s).unwrap_or(s)
    }

    /// Each non-trivial orbit once, as `(smaller, larger)`.
    pub fn swaps(&self) -> Vec<(Symbol, Symbol)> {
        self.0
            .iter()
            .filter(|(a, b)| a < b)
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MoveSet {
    pub allow_shift: bool,
    pub allow_self_crossing: bool,
}

impl Default for MoveSet {
    fn default() -> Self {
        Self {
            allow_shift: true,
            allow_self_crossing: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyData {
    name: String,
    alpha: BTreeSet<Symbol>,
    tau: Involution,
    nu: Involution,
    sigma: Involution,
    triples: BTreeSet<Triple>,
    moveset: MoveSet,
}

impl HomotopyData {
    /// `tau`, `nu` and `sigma` are given as swap lists; unlisted symbols are fixed.
    pub fn new(
        name: impl Into<String>,
        alpha: BTreeSet<Symbol>,
        tau: &[(Symbol, Symbol)],
        nu: &[(Symbol, Symbol)],
        sigma: &[(Symbol, Symbol)],
        triples: impl IntoIterator<Item = Triple>,
        moveset: MoveSet,
    ) -> Result<Self, DataError> {
        let tau = Involution::build("tau", &alpha, tau)?;
        let nu = Involution::build("nu", &alpha, nu)?;
        let sigma = Involution::build("sigma", &alpha, sigma)?;
        let mut set = BTreeSet::new();
        for t in triples {
            if t.iter().filter(|s| **s == TripleSlot::Empty).count() > 1 {
                return Err(DataError::TooManyEmptySlots(triple_to_string(&t)));
            }
            for s in t.iter().filter_map(TripleSlot::symbol) {
                if !alpha.contains(s) {
                    return Err(DataError::UnknownSymbol(s.clone()));
                }
            }
            set.insert(t);
        }
        Ok(Self {
            name: name.into(),
            alpha,
            tau,
            nu,
            sigma,
            triples: set,
            moveset,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> &BTreeSet<Symbol> {
        &self.alpha
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.alpha.contains(s)
    }

    pub fn tau(&self) -> &Involution {
        &self.tau
    }

    pub fn nu(&self) -> &Involution {
        &self.nu
    }

    pub fn sigma(&self) -> &Involution {
        &self.sigma
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn contains_triple(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    /// True when some triple has an empty slot, i.e. extended H3 moves exist.
    pub fn has_extended_triples(&self) -> bool {
        self.triples.iter().any(|t| t.contains(&TripleSlot::Empty))
    }

    pub fn moveset(&self) -> MoveSet {
        self.moveset
    }

    pub fn with_moveset(mut self, moveset: MoveSet) -> Self {
        self.moveset = moveset;
        self
    }

    /// Basis of pi: one representative per free tau-orbit (the smaller name),
    /// then the tau-fixed symbols, which generate Z/2 summands.
    pub fn linking_basis(&self) -> LinkingBasis {
        let mut free = Vec::new();
        let mut torsion = Vec::new();
        let mut coord = BTreeMap::new();
        for a in &self.alpha {
            let t = self.tau.apply(a);
            if t == a {
                coord.insert(a.clone(), Coord::Torsion(torsion.len()));
                torsion.push(a.clone());
            } else if a < t {
                coord.insert(a.clone(), Coord::Free(free.len(), 1));
                coord.insert(t.clone(), Coord::Free(free.len(), -1));
                free.push(a.clone());
            }
        }
        LinkingBasis {
            free,
            torsion,
            coord,
        }
    }
}

/// Parses the homotopy data file format:
///
/// ```text
/// alpha: a+ a- b+ b-
/// tau: a+<->b- a-<->b+
/// nu: a+<->b+ a-<->b-
/// sigma: a+<->a- b+<->b-
/// S: (a+,a+,a+) (a+,a+,_)
/// moves: shift self_crossing
/// ```
///
/// `_` marks an empty slot. Missing `nu`/`sigma` lines mean the identity; a
/// missing `moves` line allows both optional move kinds.
pub fn parse_homotopy_data(text: &str) -> Result<HomotopyData, DataError> {
    let lines = keyed_lines(text, &["name", "alpha", "tau", "nu", "sigma", "S", "moves"])?;
    let mut name = String::from("custom");
    let mut alpha = None;
    let mut maps: BTreeMap<&str, Vec<(Symbol, Symbol)>> = BTreeMap::new();
    let mut triples = Vec::new();
    let mut moveset = MoveSet::default();
    let sym = |tok: &str, line: usize, column: usize| {
        Symbol::new(tok).map_err(|_| ParseError::new(line, column, format!("invalid symbol {tok:?}")))
    };
    for l in &lines {
        let tokens: Vec<&str> = l.rest.split_whitespace().collect();
        match l.key {
            "name" => name = l.rest.trim().to_string(),
            "alpha" => {
                let mut set = BTreeSet::new();
                for t in &tokens {
                    set.insert(sym(t, l.line, l.column)?);
                }
                alpha = Some(set);
            }
            "tau" | "nu" | "sigma" => {
                let entry = maps.entry(l.key).or_default();
                for t in &tokens {
                    let (x, y) = t.split_once("<->").ok_or_else(|| {
                        ParseError::new(l.line, l.column, format!("expected `x<->y`, found {t:?}"))
                    })?;
                    entry.push((sym(x, l.line, l.column)?, sym(y, l.line, l.column)?));
                }
            }
            "S" => {
                let compact: String = l.rest.chars().filter(|c| !c.is_whitespace()).collect();
                for chunk in compact.split(')').filter(|c| !c.is_empty()) {
                    let inner = chunk.strip_prefix('(').ok_or_else(|| {
                        ParseError::new(l.line, l.column, format!("malformed triple near {chunk:?}"))
                    })?;
                    let parts: Vec<&str> = inner.split(',').collect();
                    if parts.len() != 3 {
                        return Err(ParseError::new(
                            l.line,
                            l.column,
                            format!("triple ({inner}) needs three entries"),
                        )
                        .into());
                    }
                    let mut slots = Vec::with_capacity(3);
                    for p in parts {
                        slots.push(if p == "_" {
                            TripleSlot::Empty
                        } else {
                            TripleSlot::Symbol(sym(p, l.line, l.column)?)
                        });
                    }
                    triples.push([slots[0].clone(), slots[1].clone(), slots[2].clone()]);
                }
            }
            "moves" => {
                moveset = MoveSet {
                    allow_shift: false,
                    allow_self_crossing: false,
                };
                for t in &tokens {
                    match *t {
                        "shift" => moveset.allow_shift = true,
                        "self_crossing" => moveset.allow_self_crossing = true,
                        other => {
                            return Err(ParseError::new(
                                l.line,
                                l.column,
                                format!("unknown move kind {other:?}"),
                            )
                            .into())
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    let alpha = alpha.ok_or_else(|| ParseError::new(1, 1, "missing `alpha:` line"))?;
    let get = |k: &str| maps.get(k).cloned().unwrap_or_default();
    HomotopyData::new(
        name,
        alpha,
        &get("tau"),
        &get("nu"),
        &get("sigma"),
        triples,
        moveset,
    )
}

pub fn render_homotopy_data(h: &HomotopyData) -> String {
    let join = |v: Vec<String>| v.join(" ");
    let swaps = |i: &Involution| join(i.swaps().iter().map(|(a, b)| format!("{a}<->{b}")).collect());
    let mut moves = Vec::new();
    if h.moveset.allow_shift {
        moves.push("shift".to_string());
    }
    if h.moveset.allow_self_crossing {
        moves.push("self_crossing".to_string());
    }
    format!(
        "name: {}\nalpha: {}\ntau: {}\nnu: {}\nsigma: {}\nS: {}\nmoves: {}\n",
        h.name,
        join(h.alpha.iter().map(ToString::to_string).collect()),
        swaps(&h.tau),
        swaps(&h.nu),
        swaps(&h.sigma),
        join(h.triples.iter().map(triple_to_string).collect()),
        join(moves),
    )
}

/// The four symbols of the virtual alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VirtualSymbol {
    APlus,
    AMinus,
    BPlus,
    BMinus,
}

impl VirtualSymbol {
    pub const ALL: [VirtualSymbol; 4] = [
        VirtualSymbol::APlus,
        VirtualSymbol::AMinus,
        VirtualSymbol::BPlus,
        VirtualSymbol::BMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VirtualSymbol::APlus => "a+",
            VirtualSymbol::AMinus => "a-",
            VirtualSymbol::BPlus => "b+",
            VirtualSymbol::BMinus => "b-",
        }
    }

    pub fn from_symbol(s: &Symbol) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s.as_str())
    }

    pub fn symbol(self) -> Symbol {
        Symbol::new(self.name()).expect("built-in symbol names are valid")
    }
}

fn vs(name: &str) -> Symbol {
    Symbol::new(name).expect("built-in symbol names are valid")
}

fn slot(name: &str) -> TripleSlot {
    if name == "_" {
        TripleSlot::Empty
    } else {
        TripleSlot::Symbol(vs(name))
    }
}

fn triples_from(rows: &[[&str; 3]]) -> Vec<Triple> {
    rows.iter()
        .map(|r| [slot(r[0]), slot(r[1]), slot(r[2])])
        .collect()
}

const S_V: [[&str; 3]; 12] = [
    ["a+", "a+", "a+"],
    ["a+", "a+", "a-"],
    ["a+", "a-", "a-"],
    ["a-", "a-", "a-"],
    ["a-", "a-", "a+"],
    ["a-", "a+", "a+"],
    ["b+", "b+", "b+"],
    ["b+", "b+", "b-"],
    ["b+", "b-", "b-"],
    ["b-", "b-", "b-"],
    ["b-", "b-", "b+"],
    ["b-", "b+", "b+"],
];

const S_W_EXTENDED: [[&str; 3]; 12] = [
    ["a+", "a+", "_"],
    ["a+", "b-", "_"],
    ["b-", "a+", "_"],
    ["b-", "b-", "_"],
    ["a-", "_", "b-"],
    ["b+", "_", "a+"],
    ["a-", "_", "a+"],
    ["b+", "_", "b-"],
    ["_", "a-", "a-"],
    ["_", "a-", "b+"],
    ["_", "b+", "a-"],
    ["_", "b+", "b+"],
];

fn virtual_with(name: &str, triples: Vec<Triple>) -> HomotopyData {
    HomotopyData::new(
        name,
        VirtualSymbol::ALL.iter().map(|v| v.symbol()).collect(),
        &[(vs("a+"), vs("b-")), (vs("a-"), vs("b+"))],
        &[(vs("a+"), vs("b+")), (vs("a-"), vs("b-"))],
        &[(vs("a+"), vs("a-")), (vs("b+"), vs("b-"))],
        triples,
        MoveSet::default(),
    )
    .expect("built-in homotopy data is well formed")
}

/// (alpha_v, tau_v, S_v, nu_v, sigma_v): ordered virtual links up to M-homotopy.
pub fn builtin_virtual() -> HomotopyData {
    virtual_with("virtual", triples_from(&S_V))
}

/// alpha_v with the extended triple set for upper forbidden moves (welded links).
pub fn builtin_welded() -> HomotopyData {
    let mut t = triples_from(&S_V);
    t.extend(triples_from(&S_W_EXTENDED));
    virtual_with("welded", t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Coord {
    Free(usize, i64),
    Torsion(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkingBasis {
    free: Vec<Symbol>,
    torsion: Vec<Symbol>,
    coord: BTreeMap<Symbol, Coord>,
}

impl LinkingBasis {
    pub fn free(&self) -> &[Symbol] {
        &self.free
    }

    pub fn torsion(&self) -> &[Symbol] {
        &self.torsion
    }

    pub fn zero(&self) -> LinkingElement {
        LinkingElement {
            coords: vec![0; self.free.len()],
            torsion: vec![false; self.torsion.len()],
        }
    }

    fn add_symbol(&self, e: &mut LinkingElement, s: &Symbol, times: i64) -> Result<(), DataError> {
        match self.coord.get(s) {
            Some(&Coord::Free(i, sign)) => e.coords[i] += sign * times,
            Some(&Coord::Torsion(i)) => e.torsion[i] ^= times.rem_euclid(2) == 1,
            None => return Err(DataError::UnknownSymbol(s.clone())),
        }
        Ok(())
    }
}

/// An element of pi in canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinkingElement {
    pub coords: Vec<i64>,
    pub torsion: Vec<bool>,
}

impl LinkingElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0) && !self.torsion.iter().any(|&t| t)
    }

    /// Coordinates followed by torsion bits as 0/1.
    pub fn flat(&self) -> Vec<i64> {
        self.coords
            .iter()
            .copied()
            .chain(self.torsion.iter().map(|&b| i64::from(b)))
            .collect()
    }
}

impl std::ops::Add for &LinkingElement {
    type Output = LinkingElement;
    fn add(self, rhs: &LinkingElement) -> LinkingElement {
        LinkingElement {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
            torsion: self.torsion.iter().zip(&rhs.torsion).map(|(a, b)| a ^ b).collect(),
        }
    }
}

/// Reduces a formal integer combination of symbols modulo a + tau(a) = 0.
pub fn reduce_linking(sum: &[(Symbol, i64)], h: &HomotopyData) -> Result<LinkingElement, DataError> {
    let basis = h.linking_basis();
    let mut e = basis.zero();
    for (s, k) in sum {
        basis.add_symbol(&mut e, s, *k)?;
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkingMatrix {
    n: usize,
    basis: LinkingBasis,
    entries: Vec<Vec<LinkingElement>>,
}

impl LinkingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &LinkingBasis {
        &self.basis
    }

    /// Entry l_ij with 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> &LinkingElement {
        &self.entries[i - 1][j - 1]
    }
}

impl Serialize for LinkingMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let basis: Vec<&str> = self
            .basis
            .free
            .iter()
            .chain(&self.basis.torsion)
            .map(Symbol::as_str)
            .collect();
        let entries: Vec<Vec<Vec<i64>>> = self
            .entries
            .iter()
            .map(|row| row.iter().map(LinkingElement::flat).collect())
            .collect();
        let mut st = serializer.serialize_struct("LinkingMatrix", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("basis", &basis)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

/// l_ij = sum of |A| over letters with one occurrence in component i and one in j.
pub fn linking_matrix(p: &Nanophrase, h: &HomotopyData) -> Result<LinkingMatrix, DataError> {
    let n = p.component_count();
    let basis = h.linking_basis();
    let mut entries = vec![vec![basis.zero(); n]; n];
    let mut first: BTreeMap<_, usize> = BTreeMap::new();
    for (ci, comp) in p.components().iter().enumerate() {
        for l in comp {
            match first.remove(l) {
                None => {
                    first.insert(l, ci);
                }
                Some(cj) if cj != ci => {
                    let s = p
                        .projection(l)
                        .ok_or_else(|| DataError::InvalidSymbol(format!("no projection for {l}")))?;
                    basis.add_symbol(&mut entries[ci][cj], s, 1)?;
                    basis.add_symbol(&mut entries[cj][ci], s, 1)?;
                }
                Some(_) => {}
            }
        }
    }
    Ok(LinkingMatrix {
        n,
        basis,
        entries,
    })
}
