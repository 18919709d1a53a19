//! Double brackets between letters and their Leibniz extension to words.
//!
//! Brackets between arrows are stored data; brackets involving `z`, the
//! inverse letters and `(e_0 + w v)^{-1}` are derived once from them and
//! cached when the table is built.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::word::{Element, Generator, Letter, Tensor, Vertex, Word};
use crate::error::{Error, Result};
use crate::linalg::cr;
use crate::quiver::order_sign;

/// Letter-pair brackets for one `(m, d)`.
#[derive(Debug, Clone)]
pub struct BracketTable {
    m: usize,
    d: usize,
    cache: BTreeMap<(Letter, Letter), Tensor>,
}

fn e(s: usize) -> Word {
    Word::idempotent(Vertex::Cycle(s))
}

fn e_inf() -> Word {
    Word::idempotent(Vertex::Infinity)
}

/// Stored brackets `{{a, b}}` between arrows, for the ordered pairs kept in
/// the table. Returns `None` for the pairs obtained by antisymmetry.
pub fn arrow_bracket(m: usize, a: Letter, b: Letter) -> Option<Tensor> {
    use Letter::*;
    let nx = |r: usize| (r + 1) % m;
    let pv = |r: usize| (r + m - 1) % m;
    let w = |ls: &[Letter]| Word::from_letters(ls, m).expect("table words compose");
    let h = cr(0.5);
    let mut t = Tensor::zero();
    match (a, b) {
        (X(r), X(s)) => {
            if s == pv(r) {
                t.add_term(w(&[X(pv(r)), X(r)]), e(r), h);
            }
            if s == nx(r) {
                t.add_term(e(nx(r)), w(&[X(r), X(nx(r))]), -h);
            }
        }
        (Y(r), Y(s)) => {
            if s == pv(r) {
                t.add_term(e(r), w(&[Y(r), Y(pv(r))]), h);
            }
            if s == nx(r) {
                t.add_term(w(&[Y(nx(r)), Y(r)]), e(nx(r)), -h);
            }
        }
        (X(r), Y(s)) => {
            if s == r {
                t.add_term(e(nx(r)), e(r), cr(1.0));
                t.add_term(w(&[Y(r), X(r)]), e(r), h);
                t.add_term(e(nx(r)), w(&[X(r), Y(r)]), h);
            }
            if s == pv(r) {
                t.add_term(w(&[X(r)]), w(&[Y(pv(r))]), -h);
            }
            if s == nx(r) {
                t.add_term(w(&[Y(nx(r))]), w(&[X(r)]), h);
            }
        }
        (X(r), W(al)) => {
            if r == m - 1 {
                t.add_term(e(nx(r)), w(&[X(r), W(al)]), h);
            }
            if r == 0 {
                t.add_term(w(&[X(r)]), w(&[W(al)]), -h);
            }
        }
        (X(r), V(al)) => {
            if r == 0 {
                t.add_term(w(&[V(al), X(r)]), e(r), h);
            }
            if r == m - 1 {
                t.add_term(w(&[V(al)]), w(&[X(r)]), -h);
            }
        }
        (Y(r), W(al)) => {
            if r == 0 {
                t.add_term(e(r), w(&[Y(r), W(al)]), h);
            }
            if r == m - 1 {
                t.add_term(w(&[Y(r)]), w(&[W(al)]), -h);
            }
        }
        (Y(r), V(al)) => {
            if r == m - 1 {
                t.add_term(w(&[V(al), Y(r)]), e(nx(r)), h);
            }
            if r == 0 {
                t.add_term(w(&[V(al)]), w(&[Y(r)]), -h);
            }
        }
        (V(al), V(be)) => {
            let c = cr(-0.5 * order_sign(al, be));
            t.add_term(w(&[V(be)]), w(&[V(al)]), c);
            t.add_term(w(&[V(al)]), w(&[V(be)]), c);
        }
        (W(al), W(be)) => {
            let c = cr(-0.5 * order_sign(al, be));
            t.add_term(w(&[W(be)]), w(&[W(al)]), c);
            t.add_term(w(&[W(al)]), w(&[W(be)]), c);
        }
        (V(al), W(be)) => {
            if al == be {
                t.add_term(e(0), e_inf(), cr(1.0));
                t.add_term(w(&[W(al), V(al)]), e_inf(), h);
                t.add_term(e(0), w(&[V(al), W(al)]), h);
            }
            let c = cr(0.5 * order_sign(al, be));
            t.add_term(e(0), w(&[V(al), W(be)]), c);
            t.add_term(w(&[W(be), V(al)]), e_inf(), c);
        }
        _ => return None,
    }
    Some(t)
}

impl BracketTable {
    /// Builds the full letter-pair cache for the model.
    pub fn new(m: usize, d: usize) -> Self {
        let mut table = Self { m, d, cache: BTreeMap::new() };
        let alphabet = Letter::alphabet(m, d);
        for &a in &alphabet {
            for &b in &alphabet {
                let t = table.compute(a, b);
                table.cache.insert((a, b), t);
            }
        }
        table
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn d(&self) -> usize {
        self.d
    }

    fn word(&self, l: Letter) -> Word {
        Word::letter(l, self.m)
    }

    fn arrows(&self, a: Letter, b: Letter) -> Tensor {
        if let Some(t) = arrow_bracket(self.m, a, b) {
            return t;
        }
        arrow_bracket(self.m, b, a).expect("every arrow pair is stored in one orientation").swap_neg()
    }

    /// `{{a, b^{-1}}} = -(b^{-1} u) (x) (v b^{-1})` for `{{a, b}} = u (x) v`.
    fn invert(&self, t: &Tensor, inv: &Word) -> Tensor {
        t.outer(Some(inv), Some(inv)).scaled(cr(-1.0))
    }

    fn compute(&self, a: Letter, b: Letter) -> Tensor {
        if let Some(t) = self.cache.get(&(a, b)) {
            return t.clone();
        }
        use Letter::*;
        match (a.is_arrow(), b.is_arrow()) {
            (true, true) => self.arrows(a, b),
            (false, true) => self.compute(b, a).swap_neg(),
            (_, false) => match b {
                Z(s) => {
                    let mut t = self.compute(a, Y(s));
                    t.add(&self.compute(a, XInv(s)));
                    t
                }
                XInv(s) => self.invert(&self.compute(a, X(s)), &self.word(XInv(s))),
                ZInv(s) => self.invert(&self.compute(a, Z(s)), &self.word(ZInv(s))),
                FInv(al) => {
                    // {{a, e_0 + w v}} = w {{a, v}} + {{a, w}} v.
                    let wl = self.word(W(al));
                    let vl = self.word(V(al));
                    let mut t = self.compute(a, V(al)).outer(Some(&wl), None);
                    t.add(&self.compute(a, W(al)).outer(None, Some(&vl)));
                    self.invert(&t, &self.word(FInv(al)))
                }
                _ => unreachable!("arrows handled above"),
            },
        }
    }

    /// Cached bracket of two letters.
    pub fn letter_bracket(&self, a: Letter, b: Letter) -> &Tensor {
        &self.cache[&(a, b)]
    }

    /// Bracket of generators; idempotents bracket to zero.
    pub fn generator_bracket(&self, a: Generator, b: Generator) -> Result<Tensor> {
        match (a, b) {
            (Generator::L(x), Generator::L(y)) => self
                .cache
                .get(&(x, y))
                .cloned()
                .ok_or_else(|| Error::UnknownPair(alloc::format!("({x}, {y})"))),
            _ => Ok(Tensor::zero()),
        }
    }

    /// Leibniz extension to words:
    /// `sum_{i,j} (w2_{<j} u w1_{>i}) (x) (w1_{<i} v w2_{>j})` with
    /// `{{w1_i, w2_j}} = u (x) v`.
    pub fn double_bracket(&self, w1: &Word, w2: &Word) -> Tensor {
        let m = self.m;
        let mut out = Tensor::zero();
        let (k1, k2) = (w1.len(), w2.len());
        let pre1: Vec<Word> = (0..k1).map(|i| w1.slice(0, i, m)).collect();
        let suf1: Vec<Word> = (0..k1).map(|i| w1.slice(i + 1, k1, m)).collect();
        let pre2: Vec<Word> = (0..k2).map(|j| w2.slice(0, j, m)).collect();
        let suf2: Vec<Word> = (0..k2).map(|j| w2.slice(j + 1, k2, m)).collect();
        for (i, &a) in w1.letters().iter().enumerate() {
            for (j, &b) in w2.letters().iter().enumerate() {
                let t = self.letter_bracket(a, b);
                if t.is_empty() {
                    continue;
                }
                out.add(&t.sandwich(&pre2[j], &suf1[i], &pre1[i], &suf2[j]));
            }
        }
        out
    }

    /// Bilinear extension to linear combinations of words.
    pub fn element_bracket(&self, f: &Element, g: &Element) -> Tensor {
        let mut out = Tensor::zero();
        for (w1, c1) in f.terms() {
            for (w2, c2) in g.terms() {
                out.add(&self.double_bracket(w1, w2).scaled(c1 * c2));
            }
        }
        out
    }
}

/// Ordered pairs of arrows stored in the table (the remaining pairs follow by
/// antisymmetry).
pub fn stored_pairs(m: usize, d: usize) -> Vec<(Letter, Letter)> {
    let arrows: Vec<Letter> = Letter::alphabet(m, d).into_iter().filter(|l| l.is_arrow()).collect();
    let mut out = Vec::new();
    for &a in &arrows {
        for &b in &arrows {
            if arrow_bracket(m, a, b).is_some() {
                out.push((a, b));
            }
        }
    }
    out
}
