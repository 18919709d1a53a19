//! Alphabet, words, linear combinations of words and of word pairs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// A vertex of the framed cyclic quiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Cycle(usize),
    Infinity,
}

/// Letters of the localized path algebra. Framing indices are zero-based.
///
/// `XInv(s)` and `ZInv(s)` are the inverses of `x_s` and `z_s = y_s + x_s^{-1}`;
/// `FInv(alpha)` is `(e_0 + w_alpha v_alpha)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    X(usize),
    Y(usize),
    Z(usize),
    XInv(usize),
    ZInv(usize),
    V(usize),
    W(usize),
    FInv(usize),
}

impl Letter {
    pub fn tail(self, m: usize) -> Vertex {
        use Letter::*;
        match self {
            X(s) | ZInv(s) => Vertex::Cycle(s),
            Y(s) | Z(s) | XInv(s) => Vertex::Cycle((s + 1) % m),
            V(_) => Vertex::Infinity,
            W(_) | FInv(_) => Vertex::Cycle(0),
        }
    }

    pub fn head(self, m: usize) -> Vertex {
        use Letter::*;
        match self {
            X(s) | ZInv(s) => Vertex::Cycle((s + 1) % m),
            Y(s) | Z(s) | XInv(s) => Vertex::Cycle(s),
            V(_) | FInv(_) => Vertex::Cycle(0),
            W(_) => Vertex::Infinity,
        }
    }

    /// Letter whose product with `self` (on either side) collapses to an
    /// idempotent.
    pub fn inverse(self) -> Option<Letter> {
        use Letter::*;
        match self {
            X(s) => Some(XInv(s)),
            XInv(s) => Some(X(s)),
            Z(s) => Some(ZInv(s)),
            ZInv(s) => Some(Z(s)),
            _ => None,
        }
    }

    /// Arrows of the doubled quiver, as opposed to letters defined through
    /// them.
    pub fn is_arrow(self) -> bool {
        matches!(self, Letter::X(_) | Letter::Y(_) | Letter::V(_) | Letter::W(_))
    }

    fn check(self, m: usize, d: usize) -> Result<()> {
        use Letter::*;
        let ok = match self {
            X(s) | Y(s) | Z(s) | XInv(s) | ZInv(s) => s < m,
            V(a) | W(a) | FInv(a) => a < d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parse(format!("letter {self} out of range for m = {m}, d = {d}")))
        }
    }

    /// Every letter for a model with `m` cycle vertices and `d` framings.
    pub fn alphabet(m: usize, d: usize) -> Vec<Letter> {
        use Letter::*;
        let mut out = Vec::with_capacity(5 * m + 3 * d);
        for s in 0..m {
            out.extend([X(s), Y(s), Z(s), XInv(s), ZInv(s)]);
        }
        for a in 0..d {
            out.extend([V(a), W(a), FInv(a)]);
        }
        out
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Letter::*;
        match *self {
            X(s) => write!(f, "x{s}"),
            Y(s) => write!(f, "y{s}"),
            Z(s) => write!(f, "z{s}"),
            XInv(s) => write!(f, "xi{s}"),
            ZInv(s) => write!(f, "zi{s}"),
            V(a) => write!(f, "v{}", a + 1),
            W(a) => write!(f, "w{}", a + 1),
            FInv(a) => write!(f, "fi{}", a + 1),
        }
    }
}

/// A generator: an idempotent or a letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    E(Vertex),
    L(Letter),
}

/// A path, read left to right. The empty path at a vertex is its idempotent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    tail: Vertex,
    head: Vertex,
    letters: Vec<Letter>,
}

impl Word {
    pub fn idempotent(v: Vertex) -> Self {
        Self { tail: v, head: v, letters: Vec::new() }
    }

    pub fn letter(l: Letter, m: usize) -> Self {
        Self { tail: l.tail(m), head: l.head(m), letters: alloc::vec![l] }
    }

    pub fn generator(g: Generator, m: usize) -> Self {
        match g {
            Generator::E(v) => Self::idempotent(v),
            Generator::L(l) => Self::letter(l, m),
        }
    }

    /// Composable sequence of letters, with adjacent inverse pairs cancelled.
    pub fn from_letters(letters: &[Letter], m: usize) -> Result<Self> {
        let Some(first) = letters.first() else {
            return Err(Error::Parse("empty letter list has no vertex".into()));
        };
        let mut w = Self::letter(*first, m);
        for l in &letters[1..] {
            w = w
                .concat(&Self::letter(*l, m))
                .ok_or_else(|| Error::Parse(format!("{w} cannot be followed by {l}")))?;
        }
        Ok(w)
    }

    pub fn tail(&self) -> Vertex {
        self.tail
    }
    pub fn head(&self) -> Vertex {
        self.head
    }
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }
    pub fn len(&self) -> usize {
        self.letters.len()
    }
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
    pub fn is_closed(&self) -> bool {
        self.tail == self.head
    }

    /// Path product; `None` when the paths do not meet.
    pub fn concat(&self, other: &Word) -> Option<Word> {
        if self.head != other.tail {
            return None;
        }
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            match letters.last() {
                Some(&prev) if prev.inverse() == Some(l) => {
                    letters.pop();
                }
                _ => letters.push(l),
            }
        }
        Some(Word { tail: self.tail, head: other.head, letters })
    }

    /// Sub-path on `letters[from..to]`; an empty range gives the idempotent at
    /// that position.
    pub fn slice(&self, from: usize, to: usize, m: usize) -> Word {
        if from >= to {
            let v = if from < self.letters.len() { self.letters[from].tail(m) } else { self.head };
            return Word::idempotent(v);
        }
        Word { tail: self.letters[from].tail(m), head: self.letters[to - 1].head(m), letters: self.letters[from..to].to_vec() }
    }

    /// `self^k` for a closed word.
    pub fn pow(&self, k: usize) -> Word {
        let mut out = Word::idempotent(self.tail);
        for _ in 0..k {
            out = out.concat(self).expect("closed word composes with itself");
        }
        out
    }

    /// Parses `x0.y1.zi2.v1.w3.fi1.e0` (framing indices one-based, `einf` for
    /// the framing idempotent).
    pub fn parse(text: &str, m: usize, d: usize) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty word".into()));
        }
        let mut letters = Vec::new();
        let mut idem: Option<Vertex> = None;
        for tok in text.split('.') {
            match parse_token(tok.trim(), m, d)? {
                Generator::L(l) => letters.push(l),
                Generator::E(v) => {
                    if let Some(prev) = idem {
                        if prev != v {
                            return Err(Error::Parse(format!("idempotents {tok} and e{prev:?} do not meet")));
                        }
                    }
                    idem = Some(v);
                }
            }
        }
        if letters.is_empty() {
            return Ok(Word::idempotent(idem.expect("non-empty token list")));
        }
        let w = Word::from_letters(&letters, m)?;
        if let Some(v) = idem {
            if v != w.tail && v != w.head {
                return Err(Error::Parse(format!("idempotent at {v:?} kills {w}")));
            }
        }
        Ok(w)
    }
}

fn parse_token(tok: &str, m: usize, d: usize) -> Result<Generator> {
    let bad = || Error::Parse(format!("bad token {tok:?}"));
    if tok == "einf" || tok == "e\u{221e}" {
        return Ok(Generator::E(Vertex::Infinity));
    }
    let split = tok.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?;
    let (name, num) = tok.split_at(split);
    let k: usize = num.parse().map_err(|_| bad())?;
    let one_based = |k: usize| k.checked_sub(1).ok_or_else(bad);
    let g = match name {
        "e" => {
            if k >= m {
                return Err(bad());
            }
            return Ok(Generator::E(Vertex::Cycle(k)));
        }
        "x" => Letter::X(k),
        "y" => Letter::Y(k),
        "z" => Letter::Z(k),
        "xi" => Letter::XInv(k),
        "zi" => Letter::ZInv(k),
        "v" => Letter::V(one_based(k)?),
        "w" => Letter::W(one_based(k)?),
        "fi" => Letter::FInv(one_based(k)?),
        _ => return Err(bad()),
    };
    g.check(m, d)?;
    Ok(Generator::L(g))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return match self.tail {
                Vertex::Cycle(s) => write!(f, "e{s}"),
                Vertex::Infinity => write!(f, "einf"),
            };
        }
        let parts: Vec<String> = self.letters.iter().map(|l| format!("{l}")).collect();
        write!(f, "{}", parts.join("."))
    }
}

fn add_coeff<K: Ord>(map: &mut BTreeMap<K, C64>, key: K, c: C64) {
    if c == C64::new(0.0, 0.0) {
        return;
    }
    let entry = map.entry(key).or_insert(C64::new(0.0, 0.0));
    *entry += c;
}

/// Finite linear combination of words.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Element {
    terms: BTreeMap<Word, C64>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn word(w: Word) -> Self {
        let mut e = Self::zero();
        e.add_word(w, C64::new(1.0, 0.0));
        e
    }
    pub fn add_word(&mut self, w: Word, c: C64) {
        add_coeff(&mut self.terms, w, c);
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn scaled(&self, c: C64) -> Self {
        Self { terms: self.terms.iter().map(|(w, z)| (w.clone(), z * c)).collect() }
    }
    pub fn plus(&self, other: &Element) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_word(w.clone(), *c);
        }
        out
    }
    /// Product in the path algebra; non-composable pairs vanish.
    pub fn mul(&self, other: &Element) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(w) = a.concat(b) {
                    out.add_word(w, ca * cb);
                }
            }
        }
        out
    }
    /// Drops coefficients below `tol` in modulus.
    pub fn pruned(&self, tol: f64) -> Self {
        Self { terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(w, c)| (w.clone(), *c)).collect() }
    }
}

/// Finite linear combination of pairs `left (x) right`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tensor {
    terms: BTreeMap<(Word, Word), C64>,
}

/// One term of a tensor, owned.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTerm {
    pub coeff: C64,
    pub left: Word,
    pub right: Word,
}

impl Tensor {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn single(left: Word, right: Word, c: C64) -> Self {
        let mut t = Self::zero();
        t.add_term(left, right, c);
        t
    }
    pub fn add_term(&mut self, left: Word, right: Word, c: C64) {
        add_coeff(&mut self.terms, (left, right), c);
    }
    pub fn add(&mut self, other: &Tensor) {
        for ((l, r), c) in &other.terms {
            self.add_term(l.clone(), r.clone(), *c);
        }
    }
    pub fn scaled(&self, c: C64) -> Self {
        Self { terms: self.terms.iter().map(|(k, z)| (k.clone(), z * c)).collect() }
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Word, &C64)> {
        self.terms.iter().map(|((l, r), c)| (l, r, c))
    }
    pub fn to_terms(&self) -> Vec<TensorTerm> {
        self.terms().map(|(l, r, c)| TensorTerm { coeff: *c, left: l.clone(), right: r.clone() }).collect()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    /// `-T°`: factors swapped and coefficients negated.
    pub fn swap_neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|((l, r), c)| ((r.clone(), l.clone()), -c)).collect() }
    }
    /// `(ll u lr) (x) (rl v rr)` for every term `u (x) v`; terms whose paths do
    /// not meet are dropped.
    pub fn sandwich(&self, ll: &Word, lr: &Word, rl: &Word, rr: &Word) -> Self {
        self.map_terms(Some(ll), Some(lr), Some(rl), Some(rr))
    }
    /// Outer bimodule action `(b u) (x) (v c)`.
    pub fn outer(&self, b: Option<&Word>, c: Option<&Word>) -> Self {
        self.map_terms(b, None, None, c)
    }
    fn map_terms(&self, ll: Option<&Word>, lr: Option<&Word>, rl: Option<&Word>, rr: Option<&Word>) -> Self {
        let wrap = |a: Option<&Word>, x: &Word, b: Option<&Word>| -> Option<Word> {
            let x = match a {
                Some(a) => a.concat(x)?,
                None => x.clone(),
            };
            match b {
                Some(b) => x.concat(b),
                None => Some(x),
            }
        };
        let mut out = Self::zero();
        for ((l, r), c) in &self.terms {
            if let (Some(left), Some(right)) = (wrap(ll, l, lr), wrap(rl, r, rr)) {
                out.add_term(left, right, *c);
            }
        }
        out
    }
    /// Multiplication `m(u (x) v) = uv` of each term.
    pub fn multiply(&self) -> Element {
        let mut out = Element::zero();
        for ((l, r), c) in &self.terms {
            if let Some(w) = l.concat(r) {
                out.add_word(w, *c);
            }
        }
        out
    }
    pub fn pruned(&self, tol: f64) -> Self {
        Self { terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(k, c)| (k.clone(), *c)).collect() }
    }
}

/// Linear combination of closed words modulo cyclic rotation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CyclicWordSum {
    terms: BTreeMap<Word, C64>,
}

impl CyclicWordSum {
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonical classes of the closed words of `e`; open words are dropped
    /// since their traces vanish.
    pub fn from_element(e: &Element, m: usize, max_len: usize) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (w, c) in e.terms() {
            if !w.is_closed() {
                continue;
            }
            if w.len() > max_len {
                return Err(Error::WordTooLong(max_len));
            }
            add_coeff(&mut terms, canonical_rotation(w, m), *c);
        }
        terms.retain(|_, c: &mut C64| c.norm() > 1e-13);
        Ok(Self { terms })
    }
}

/// Cyclically reduced, lexicographically minimal rotation of a closed word.
pub fn canonical_rotation(w: &Word, m: usize) -> Word {
    let mut letters = w.letters().to_vec();
    while letters.len() >= 2 {
        let last = letters[letters.len() - 1];
        if last.inverse() == Some(letters[0]) {
            letters.pop();
            letters.remove(0);
        } else {
            break;
        }
    }
    if letters.is_empty() {
        // Linear reduction already removed every pair that could cancel
        // completely, so this only happens for idempotents.
        return Word::idempotent(w.tail());
    }
    let k = letters.len();
    let best = (0..k)
        .min_by(|&i, &j| {
            let a = letters[i..].iter().chain(letters[..i].iter());
            let b = letters[j..].iter().chain(letters[..j].iter());
            a.cmp(b)
        })
        .unwrap_or(0);
    let mut rotated = letters[best..].to_vec();
    rotated.extend_from_slice(&letters[..best]);
    Word::from_letters(&rotated, m).expect("rotation of a closed word composes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let w = Word::parse("x0.y0.w1.v2", 2, 2).unwrap();
        assert_eq!(alloc::format!("{w}"), "x0.y0.w1.v2");
        assert_eq!(w.tail(), Vertex::Cycle(0));
        assert_eq!(w.head(), Vertex::Cycle(0));
    }

    #[test]
    fn inverse_pairs_cancel() {
        let w = Word::parse("x1.xi1", 3, 1).unwrap();
        assert!(w.is_empty());
        assert_eq!(w.tail(), Vertex::Cycle(1));
        let w = Word::parse("zi0.z0", 3, 1).unwrap();
        assert_eq!(w.tail(), Vertex::Cycle(0));
    }

    #[test]
    fn non_composable_rejected() {
        assert!(Word::parse("x0.x0", 2, 1).is_err());
        assert!(Word::parse("v0", 2, 1).is_err());
    }
}
