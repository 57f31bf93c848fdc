//! Signed components, the expansion words rho^q, the component map eta, and
//! the Magnus map phi into truncated non-commutative power series.
//!
//! Two routes produce the series of a component:
//!
//! * the literal route, [`rho_expand`] then [`eta_word`] then [`phi_series`],
//!   which materializes words whose length grows exponentially in `q`;
//! * [`component_series`], which never builds the words. The series of an
//!   expanded signed letter is `P^{-1} * phi(a^{+-1}) * P`, where `P` is the
//!   series of the partner prefix one stage lower, and prefix series are
//!   memoized per `(component, prefix length, stage)`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;

use serde::Serialize;

use crate::error::InvariantError;
use crate::homotopy::VirtualSymbol;
use crate::phrase::{Letter, Nanophrase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Exponent {
    Plus,
    Minus,
}

impl Exponent {
    pub fn value(self) -> i64 {
        match self {
            Exponent::Plus => 1,
            Exponent::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Exponent::Plus => Exponent::Minus,
            Exponent::Minus => Exponent::Plus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedLetter<G> {
    pub base: G,
    pub exponent: Exponent,
}

/// A word in generators and their inverses. No free reduction is ever applied.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedWord<G>(Vec<SignedLetter<G>>);

impl<G> Default for SignedWord<G> {
    fn default() -> Self {
        Self(Vec::new())
    }
}

impl<G: Clone> SignedWord<G> {
    pub fn new(letters: Vec<SignedLetter<G>>) -> Self {
        Self(letters)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (G, Exponent)>) -> Self {
        Self(
            pairs
                .into_iter()
                .map(|(base, exponent)| SignedLetter { base, exponent })
                .collect(),
        )
    }

    pub fn letters(&self) -> &[SignedLetter<G>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reverses the order and flips every exponent.
    pub fn inverse(&self) -> Self {
        Self(
            self.0
                .iter()
                .rev()
                .map(|l| SignedLetter {
                    base: l.base.clone(),
                    exponent: l.exponent.flip(),
                })
                .collect(),
        )
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Self(v)
    }
}

/// The generator `a_k` standing for component `k` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ComponentGen(pub usize);

impl fmt::Display for ComponentGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

impl<G: fmt::Display> fmt::Display for SignedWord<G> {
    /// Space separated, inverses as `X^-1`; the empty word is `.`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(".");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            match l.exponent {
                Exponent::Plus => write!(f, "{}", l.base)?,
                Exponent::Minus => write!(f, "{}^-1", l.base)?,
            }
        }
        Ok(())
    }
}

impl SignedWord<Letter> {
    /// Juxtaposed TeX-like form, e.g. `EC^{-1}DC`.
    pub fn to_tex(&self) -> String {
        self.0
            .iter()
            .map(|l| match l.exponent {
                Exponent::Plus => l.base.to_string(),
                Exponent::Minus => format!("{}^{{-1}}", l.base),
            })
            .collect()
    }
}

impl SignedWord<ComponentGen> {
    /// Juxtaposed TeX-like form, e.g. `a_4a_2^{-1}`.
    pub fn to_tex(&self) -> String {
        self.0
            .iter()
            .map(|l| match l.exponent {
                Exponent::Plus => format!("a_{}", l.base.0),
                Exponent::Minus => format!("a_{}^{{-1}}", l.base.0),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct SignedOcc {
    exponent: Exponent,
    /// 0-based component holding the zero-signed partner occurrence.
    partner_component: usize,
    /// Number of signed letters before the partner in that component.
    partner_prefix: usize,
}

/// The signed structure of a nanophrase over alpha_v: signed components,
/// eta indices, and for each signed letter the prefix that conjugates it.
#[derive(Clone, Debug)]
pub struct SignedPhrase {
    letters: Vec<Letter>,
    index: HashMap<Letter, usize>,
    /// 1-based component of the zero-signed occurrence.
    eta: Vec<usize>,
    signed: Vec<Option<SignedOcc>>,
    words: Vec<Vec<(usize, Exponent)>>,
}

/// Sign of an occurrence in component `i` whose partner sits in component `k`.
fn occurrence_sign(i: usize, k: usize, s: VirtualSymbol) -> Option<Exponent> {
    use std::cmp::Ordering::*;
    use VirtualSymbol::*;
    match (i.cmp(&k), s) {
        (Less, BPlus) | (Greater, APlus) => Some(Exponent::Plus),
        (Less, AMinus) | (Greater, BMinus) => Some(Exponent::Minus),
        _ => None,
    }
}

impl SignedPhrase {
    pub fn new(p: &Nanophrase) -> Result<Self, InvariantError> {
        let letters: Vec<Letter> = p.letters().cloned().collect();
        let index: HashMap<Letter, usize> =
            letters.iter().enumerate().map(|(k, l)| (l.clone(), k)).collect();
        let mut kind = Vec::with_capacity(letters.len());
        for l in &letters {
            let sym = p.projection(l).expect("letters come from the projection");
            kind.push(VirtualSymbol::from_symbol(sym).ok_or_else(|| InvariantError::NotVirtual {
                letter: l.clone(),
                symbol: sym.clone(),
            })?);
        }

        // (component, position) of both occurrences, in reading order
        let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(2); letters.len()];
        for (ci, comp) in p.components().iter().enumerate() {
            for (pi, l) in comp.iter().enumerate() {
                occ[index[l]].push((ci, pi));
            }
        }

        let n = p.component_count();
        let mut sign_at: Vec<Vec<Option<Exponent>>> =
            p.components().iter().map(|c| vec![None; c.len()]).collect();
        let mut eta = vec![0; letters.len()];
        for (li, o) in occ.iter().enumerate() {
            let [(c1, p1), (c2, p2)] = [o[0], o[1]];
            let s1 = occurrence_sign(c1, c2, kind[li]);
            let s2 = occurrence_sign(c2, c1, kind[li]);
            debug_assert!(s1.is_none() || s2.is_none());
            sign_at[c1][p1] = s1;
            sign_at[c2][p2] = s2;
            eta[li] = if s1.is_some() { c2 + 1 } else { c1 + 1 };
        }

        let mut words = vec![Vec::new(); n];
        let mut prefix_len: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (ci, comp) in p.components().iter().enumerate() {
            let mut lens = Vec::with_capacity(comp.len());
            for (pi, l) in comp.iter().enumerate() {
                lens.push(words[ci].len());
                if let Some(e) = sign_at[ci][pi] {
                    words[ci].push((index[l], e));
                }
            }
            prefix_len.push(lens);
        }

        let mut signed = vec![None; letters.len()];
        for (li, o) in occ.iter().enumerate() {
            for (me, other) in [(o[0], o[1]), (o[1], o[0])] {
                if let Some(exponent) = sign_at[me.0][me.1] {
                    signed[li] = Some(SignedOcc {
                        exponent,
                        partner_component: other.0,
                        partner_prefix: prefix_len[other.0][other.1],
                    });
                }
            }
        }

        Ok(Self {
            letters,
            index,
            eta,
            signed,
            words,
        })
    }

    pub fn component_count(&self) -> usize {
        self.words.len()
    }

    fn check_component(&self, i: usize) -> Result<usize, InvariantError> {
        let n = self.component_count();
        if i == 0 || i > n {
            Err(InvariantError::IndexOutOfRange { index: i, n })
        } else {
            Ok(i - 1)
        }
    }

    fn letter_index(&self, l: &Letter) -> Result<usize, InvariantError> {
        self.index
            .get(l)
            .copied()
            .ok_or_else(|| InvariantError::UnknownLetter(l.clone()))
    }

    fn to_word(&self, raw: &[(usize, Exponent)]) -> SignedWord<Letter> {
        SignedWord::from_pairs(raw.iter().map(|&(l, e)| (self.letters[l].clone(), e)))
    }

    /// w_i^eps with zero-signed letters dropped.
    pub fn signed_component(&self, i: usize) -> Result<SignedWord<Letter>, InvariantError> {
        let ci = self.check_component(i)?;
        Ok(self.to_word(&self.words[ci]))
    }

    /// Component (1-based) of the zero-signed occurrence of `l`.
    pub fn eta_index(&self, l: &Letter) -> Result<usize, InvariantError> {
        Ok(self.eta[self.letter_index(l)?])
    }

    fn partner_prefix(&self, li: usize) -> Result<&[(usize, Exponent)], InvariantError> {
        let occ = self.signed[li]
            .ok_or_else(|| InvariantError::UnsignedLetter(self.letters[li].clone()))?;
        Ok(&self.words[occ.partner_component][..occ.partner_prefix])
    }

    fn rho_raw(&self, w: &[(usize, Exponent)], q: usize) -> Result<Vec<(usize, Exponent)>, InvariantError> {
        let mut out = Vec::new();
        for &(l, e) in w {
            if q == 2 {
                // base case still requires a signed letter
                self.partner_prefix(l)?;
                out.push((l, e));
                continue;
            }
            let x = self.partner_prefix(l)?;
            let x_inv: Vec<(usize, Exponent)> = x.iter().rev().map(|&(m, f)| (m, f.flip())).collect();
            out.extend(self.rho_raw(&x_inv, q - 1)?);
            out.push((l, e));
            out.extend(self.rho_raw(x, q - 1)?);
        }
        Ok(out)
    }

    /// rho^q applied letterwise to an arbitrary word in signed letters.
    pub fn rho_word(&self, w: &SignedWord<Letter>, q: usize) -> Result<SignedWord<Letter>, InvariantError> {
        if q < 2 {
            return Err(InvariantError::StageTooSmall(q));
        }
        let raw = w
            .letters()
            .iter()
            .map(|l| Ok((self.letter_index(&l.base)?, l.exponent)))
            .collect::<Result<Vec<_>, InvariantError>>()?;
        Ok(self.to_word(&self.rho_raw(&raw, q)?))
    }

    pub fn rho_expand(&self, i: usize, q: usize) -> Result<SignedWord<Letter>, InvariantError> {
        if q < 2 {
            return Err(InvariantError::StageTooSmall(q));
        }
        let ci = self.check_component(i)?;
        Ok(self.to_word(&self.rho_raw(&self.words[ci], q)?))
    }

    pub fn eta_word(&self, w: &SignedWord<Letter>) -> Result<SignedWord<ComponentGen>, InvariantError> {
        w.letters()
            .iter()
            .map(|l| {
                Ok(SignedLetter {
                    base: ComponentGen(self.eta_index(&l.base)?),
                    exponent: l.exponent,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SignedWord::new)
    }

    /// Memoized series of component `i` at stage `q`, in all `n` variables.
    pub fn component_series(&self, i: usize, q: usize, bound: usize) -> Result<MagnusSeries, InvariantError> {
        if q < 2 {
            return Err(InvariantError::StageTooSmall(q));
        }
        let ci = self.check_component(i)?;
        let n = self.component_count();
        let mut engine = SeriesEngine::new(self, (0..n).map(Some).collect(), n, bound);
        Ok(engine.component(ci, q))
    }

    pub(crate) fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub(crate) fn raw_component(&self, ci: usize) -> &[(usize, Exponent)] {
        &self.words[ci]
    }

    pub(crate) fn raw_partner_prefix(&self, li: usize) -> &[(usize, Exponent)] {
        self.partner_prefix(li).expect("raw words only hold signed letters")
    }

    pub(crate) fn raw_eta(&self, li: usize) -> usize {
        self.eta[li]
    }
}

/// Memoized evaluation of phi(eta(rho^q(...))) over a chosen set of variables.
/// Components mapped to `None` are sent to 1, which is the quotient by their
/// generators and leaves coefficients of the remaining monomials unchanged.
pub(crate) struct SeriesEngine<'a> {
    sp: &'a SignedPhrase,
    var_of: Vec<Option<usize>>,
    vars: usize,
    bound: usize,
    letter: HashMap<(usize, usize), MagnusSeries>,
    prefix: HashMap<(usize, usize, usize), MagnusSeries>,
}

impl<'a> SeriesEngine<'a> {
    pub(crate) fn new(sp: &'a SignedPhrase, var_of: Vec<Option<usize>>, vars: usize, bound: usize) -> Self {
        Self {
            sp,
            var_of,
            vars,
            bound,
            letter: HashMap::new(),
            prefix: HashMap::new(),
        }
    }

    fn letter_series(&mut self, li: usize, r: usize) -> MagnusSeries {
        if let Some(s) = self.letter.get(&(li, r)) {
            return s.clone();
        }
        let occ = self.sp.signed[li].expect("only signed letters are expanded");
        let mut s = if r == 2 {
            MagnusSeries::one(self.vars, self.bound)
        } else {
            self.prefix_series(occ.partner_component, occ.partner_prefix, r - 1)
                .inverse()
                .expect("prefix series have constant term 1")
        };
        if let Some(v) = self.var_of[self.sp.eta[li] - 1] {
            s.mul_generator(v, occ.exponent);
        }
        if r > 2 {
            let p = self.prefix_series(occ.partner_component, occ.partner_prefix, r - 1);
            s = &s * &p;
        }
        self.letter.insert((li, r), s.clone());
        s
    }

    fn prefix_series(&mut self, ci: usize, len: usize, r: usize) -> MagnusSeries {
        if len == 0 {
            return MagnusSeries::one(self.vars, self.bound);
        }
        if let Some(s) = self.prefix.get(&(ci, len, r)) {
            return s.clone();
        }
        let head = self.prefix_series(ci, len - 1, r);
        let (li, _) = self.sp.words[ci][len - 1];
        let tail = self.letter_series(li, r);
        let s = &head * &tail;
        self.prefix.insert((ci, len, r), s.clone());
        s
    }

    /// Series of the whole (0-based) component `ci` at stage `q`.
    pub(crate) fn component(&mut self, ci: usize, q: usize) -> MagnusSeries {
        let len = self.sp.words[ci].len();
        self.prefix_series(ci, len, q)
    }
}

/// A monomial in the non-commuting variables, as 1-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Monomial(pub Vec<usize>);

impl Monomial {
    pub fn degree(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|v| format!("k{v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Integer power series in `vars` non-commuting variables truncated above
/// degree `bound`, stored densely degree block by degree block. Inside a
/// block a monomial is its variable sequence read as a base-`vars` number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagnusSeries {
    vars: usize,
    bound: usize,
    coeffs: Vec<i64>,
}

impl MagnusSeries {
    fn block_len(&self, d: usize) -> usize {
        self.vars.pow(d as u32)
    }

    fn block_start(&self, d: usize) -> usize {
        (0..d).map(|e| self.block_len(e)).sum()
    }

    pub fn zero(vars: usize, bound: usize) -> Self {
        let len = (0..=bound).map(|d| vars.pow(d as u32)).sum();
        Self {
            vars,
            bound,
            coeffs: vec![0; len],
        }
    }

    pub fn one(vars: usize, bound: usize) -> Self {
        let mut s = Self::zero(vars, bound);
        s.coeffs[0] = 1;
        s
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn constant(&self) -> i64 {
        self.coeffs[0]
    }

    fn position(&self, m: &[usize]) -> Option<usize> {
        if m.len() > self.bound {
            return None;
        }
        let mut idx = 0usize;
        for &v in m {
            if v == 0 || v > self.vars {
                return None;
            }
            idx = idx * self.vars + (v - 1);
        }
        Some(self.block_start(m.len()) + idx)
    }

    /// Coefficient of the monomial given by 1-based variable indices; `None`
    /// when the monomial is above the bound or names an unknown variable.
    pub fn coefficient(&self, m: &[usize]) -> Option<i64> {
        self.position(m).map(|p| self.coeffs[p])
    }

    pub fn set_coefficient(&mut self, m: &[usize], c: i64) {
        let p = self
            .position(m)
            .expect("monomial within bound and variable range");
        self.coeffs[p] = c;
    }

    /// Nonzero terms ordered by degree, then lexicographically.
    pub fn terms(&self) -> Vec<(Monomial, i64)> {
        let mut out = Vec::new();
        for d in 0..=self.bound {
            let start = self.block_start(d);
            for idx in 0..self.block_len(d) {
                let c = self.coeffs[start + idx];
                if c != 0 {
                    let mut vars = vec![0; d];
                    let mut rest = idx;
                    for slot in vars.iter_mut().rev() {
                        *slot = rest % self.vars + 1;
                        rest /= self.vars;
                    }
                    out.push((Monomial(vars), c));
                }
            }
        }
        out
    }

    pub fn truncate(&self, bound: usize) -> Self {
        let bound = bound.min(self.bound);
        let mut s = Self::zero(self.vars, bound);
        let len = s.coeffs.len();
        s.coeffs.copy_from_slice(&self.coeffs[..len]);
        s
    }

    /// Right multiplication by phi(a_v^{+-1}) for the 0-based variable `v`:
    /// `1 + k_v`, or `1 - k_v + k_v^2 - ...`.
    pub fn mul_generator(&mut self, v: usize, e: Exponent) {
        assert!(v < self.vars, "variable out of range");
        let starts: Vec<usize> = (0..=self.bound).map(|d| self.block_start(d)).collect();
        match e {
            Exponent::Plus => {
                // descending so that each degree is read before it is updated
                for d in (0..self.bound).rev() {
                    for idx in 0..self.block_len(d) {
                        let c = self.coeffs[starts[d] + idx];
                        if c != 0 {
                            self.coeffs[starts[d + 1] + idx * self.vars + v] += c;
                        }
                    }
                }
            }
            Exponent::Minus => {
                // t = s * (1 + k)^{-1} solves t = s - t k, ascending in degree
                for d in 0..self.bound {
                    for idx in 0..self.block_len(d) {
                        let c = self.coeffs[starts[d] + idx];
                        if c != 0 {
                            self.coeffs[starts[d + 1] + idx * self.vars + v] -= c;
                        }
                    }
                }
            }
        }
    }

    fn mul_block_into(&self, rhs: &Self, d1: usize, d2: usize, out: &mut [i64], out_start: usize, sign: i64) {
        let s1 = self.block_start(d1);
        let s2 = rhs.block_start(d2);
        let len2 = rhs.block_len(d2);
        for i1 in 0..self.block_len(d1) {
            let a = self.coeffs[s1 + i1];
            if a == 0 {
                continue;
            }
            let base = out_start + i1 * len2;
            for i2 in 0..len2 {
                let b = rhs.coeffs[s2 + i2];
                if b != 0 {
                    out[base + i2] += sign * a * b;
                }
            }
        }
    }

    /// Inverse of a series with constant term 1.
    pub fn inverse(&self) -> Result<Self, InvariantError> {
        if self.constant() != 1 {
            return Err(InvariantError::NotInvertible(self.constant()));
        }
        // r * s = 1 gives r_d = -sum_{e>=1} r_{d-e} s_e
        let mut r = Self::one(self.vars, self.bound);
        for d in 1..=self.bound {
            let start = r.block_start(d);
            let mut block = vec![0; r.block_len(d)];
            for e in 1..=d {
                r.mul_block_into(self, d - e, e, &mut block, 0, -1);
            }
            r.coeffs[start..start + block.len()].copy_from_slice(&block);
        }
        Ok(r)
    }
}

impl Mul for &MagnusSeries {
    type Output = MagnusSeries;

    /// Product truncated at the smaller of the two bounds.
    fn mul(self, rhs: &MagnusSeries) -> MagnusSeries {
        assert_eq!(self.vars, rhs.vars, "series over different variable sets");
        let bound = self.bound.min(rhs.bound);
        let mut out = MagnusSeries::zero(self.vars, bound);
        let mut coeffs = std::mem::take(&mut out.coeffs);
        for d in 0..=bound {
            let start = out.block_start(d);
            for d1 in 0..=d {
                self.mul_block_into(rhs, d1, d - d1, &mut coeffs, start, 1);
            }
        }
        out.coeffs = coeffs;
        out
    }
}

impl fmt::Display for MagnusSeries {
    /// One `monomial: coefficient` line per nonzero term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, c) in self.terms() {
            writeln!(f, "{m}: {c}")?;
        }
        Ok(())
    }
}

pub fn signed_component(p: &Nanophrase, i: usize) -> Result<SignedWord<Letter>, InvariantError> {
    SignedPhrase::new(p)?.signed_component(i)
}

pub fn eta_index(p: &Nanophrase, letter: &Letter) -> Result<usize, InvariantError> {
    SignedPhrase::new(p)?.eta_index(letter)
}

/// The literal word rho^q(w_i^eps).
pub fn rho_expand(p: &Nanophrase, i: usize, q: usize) -> Result<SignedWord<Letter>, InvariantError> {
    SignedPhrase::new(p)?.rho_expand(i, q)
}

pub fn eta_word(p: &Nanophrase, w: &SignedWord<Letter>) -> Result<SignedWord<ComponentGen>, InvariantError> {
    SignedPhrase::new(p)?.eta_word(w)
}

/// Product of the factor series of `w` in `vars` variables, truncated at `bound`.
pub fn phi_series(w: &SignedWord<ComponentGen>, vars: usize, bound: usize) -> MagnusSeries {
    let mut s = MagnusSeries::one(vars, bound);
    for l in w.letters() {
        s.mul_generator(l.base.0 - 1, l.exponent);
    }
    s
}

pub fn component_series(p: &Nanophrase, i: usize, q: usize, bound: usize) -> Result<MagnusSeries, InvariantError> {
    SignedPhrase::new(p)?.component_series(i, q, bound)
}

pub fn series_inverse(s: &MagnusSeries) -> Result<MagnusSeries, InvariantError> {
    s.inverse()
}
