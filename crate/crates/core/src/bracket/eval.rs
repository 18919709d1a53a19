//! Evaluation of words and brackets on representation points.
//!
//! Every letter becomes an `N x N` block matrix on the total space
//! `C^n (+) ... (+) C^n (+) C`, cycle vertices first and the framing vertex
//! last. A path `a b` evaluates to the product of the matrices in the same
//! order, so the trace of a closed word is the trace of its matrix.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::table::BracketTable;
use super::word::{CyclicWordSum, Element, Letter, Tensor, Vertex, Word};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, identity, inverse, place, trace, CMat, C64};
use crate::rep_space::RepPoint;

/// Cap on word length in symbolic output.
pub const SYMBOLIC_MAX_LEN: usize = 64;

/// Letter matrices of one point.
#[derive(Debug, Clone)]
pub struct Evaluator {
    m: usize,
    n: usize,
    dim: usize,
    letters: BTreeMap<Letter, Option<CMat>>,
    proj: Vec<CMat>,
}

impl Evaluator {
    pub fn new(point: &RepPoint) -> Self {
        let spec = point.spec();
        let (m, n, d) = (spec.m, spec.n, spec.d);
        let dim = spec.total_dim();
        let off = |v: Vertex| match v {
            Vertex::Cycle(s) => s * n,
            Vertex::Infinity => m * n,
        };
        let lift = |l: Letter, b: &CMat| {
            let mut t = CMat::zeros(dim, dim);
            place(&mut t, off(l.tail(m)), off(l.head(m)), b);
            t
        };
        let id = identity(n);
        let mut letters = BTreeMap::new();
        for s in 0..m {
            let xi = inverse(point.x(s), "X").ok();
            let z = point.z(s).ok().cloned();
            let zi = z.as_ref().and_then(|z| inverse(z, "Z").ok());
            letters.insert(Letter::X(s), Some(lift(Letter::X(s), point.x(s))));
            letters.insert(Letter::Y(s), Some(lift(Letter::Y(s), point.y(s))));
            letters.insert(Letter::XInv(s), xi.map(|b| lift(Letter::XInv(s), &b)));
            letters.insert(Letter::Z(s), z.map(|b| lift(Letter::Z(s), &b)));
            letters.insert(Letter::ZInv(s), zi.map(|b| lift(Letter::ZInv(s), &b)));
        }
        for al in 0..d {
            let f = inverse(&(&id + point.w(al) * point.v(al)), "Id + W V").ok();
            letters.insert(Letter::V(al), Some(lift(Letter::V(al), point.v(al))));
            letters.insert(Letter::W(al), Some(lift(Letter::W(al), point.w(al))));
            letters.insert(Letter::FInv(al), f.map(|b| lift(Letter::FInv(al), &b)));
        }
        let mut proj = Vec::with_capacity(m + 1);
        for v in (0..m).map(Vertex::Cycle).chain([Vertex::Infinity]) {
            let k = if v == Vertex::Infinity { 1 } else { n };
            let mut p = CMat::zeros(dim, dim);
            place(&mut p, off(v), off(v), &identity(k));
            proj.push(p);
        }
        Self { m, n, dim, letters, proj }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letter(&self, l: Letter) -> Result<&CMat> {
        match self.letters.get(&l) {
            Some(Some(mat)) => Ok(mat),
            Some(None) => Err(Error::SingularFactor(format!("{l}"))),
            None => Err(Error::UnknownPair(format!("letter {l} outside the alphabet"))),
        }
    }

    pub fn idempotent(&self, v: Vertex) -> &CMat {
        match v {
            Vertex::Cycle(s) => &self.proj[s],
            Vertex::Infinity => &self.proj[self.m],
        }
    }

    pub fn eval_word(&self, w: &Word) -> Result<CMat> {
        let mut out = self.idempotent(w.tail()).clone();
        for &l in w.letters() {
            out *= self.letter(l)?;
        }
        Ok(out)
    }

    pub fn eval_element(&self, e: &Element) -> Result<CMat> {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (w, c) in e.terms() {
            out += self.eval_word(w)? * *c;
        }
        Ok(out)
    }

    /// Pairs of evaluated factors with their coefficients.
    pub fn eval_tensor(&self, t: &Tensor) -> Result<Vec<(C64, CMat, CMat)>> {
        t.terms().map(|(l, r, c)| Ok((*c, self.eval_word(l)?, self.eval_word(r)?))).collect()
    }
}

/// `{tr f, tr g} = sum c tr(u v)` over `{{f, g}} = sum c u (x) v`.
pub fn trace_bracket_value(ev: &Evaluator, table: &BracketTable, f: &Element, g: &Element) -> Result<C64> {
    let t = table.element_bracket(f, g);
    let mut acc = cr(0.0);
    for (c, l, r) in ev.eval_tensor(&t)? {
        acc += c * (l * r).trace();
    }
    Ok(acc)
}

/// `m({{f, g}})` as a sum of closed words modulo rotation.
pub fn trace_bracket_symbolic(table: &BracketTable, f: &Element, g: &Element) -> Result<CyclicWordSum> {
    let prod = table.element_bracket(f, g).multiply();
    CyclicWordSum::from_element(&prod, table.m(), SYMBOLIC_MAX_LEN)
}

/// Matrix of the Loday bracket `{f, g} = m({{f, g}})`.
pub fn bracket_trace_matrix(ev: &Evaluator, table: &BracketTable, f: &Element, g: &Element) -> Result<CMat> {
    let t = table.element_bracket(f, g);
    let mut out = CMat::zeros(ev.dim(), ev.dim());
    for (c, l, r) in ev.eval_tensor(&t)? {
        out += l * r * c;
    }
    Ok(out)
}

/// `{tr f^k, tr g^l} = k l sum c tr(u F^{k-1} v G^{l-1})`, evaluated without
/// expanding the powers.
pub fn trace_power_bracket(ev: &Evaluator, table: &BracketTable, f: &Element, k: usize, g: &Element, l: usize) -> Result<C64> {
    trace_power_bracket_scaled(ev, table, f, k, g, l).map(|(v, _)| v)
}

/// [`trace_power_bracket`] together with the sum of the moduli of its terms,
/// the natural size against which a cancellation to zero is judged.
pub fn trace_power_bracket_scaled(
    ev: &Evaluator,
    table: &BracketTable,
    f: &Element,
    k: usize,
    g: &Element,
    l: usize,
) -> Result<(C64, f64)> {
    Ok(trace_power_bracket_grid(ev, table, f, &[k], g, &[l])?[0][0])
}

/// [`trace_power_bracket_scaled`] for every pair of powers `(ks[i], ls[j])`,
/// expanding `{{f, g}}` only once.
pub fn trace_power_bracket_grid(
    ev: &Evaluator,
    table: &BracketTable,
    f: &Element,
    ks: &[usize],
    g: &Element,
    ls: &[usize],
) -> Result<Vec<Vec<(C64, f64)>>> {
    let terms = ev.eval_tensor(&table.element_bracket(f, g))?;
    let (fm, gm) = (ev.eval_element(f)?, ev.eval_element(g)?);
    let gls: Vec<Option<CMat>> = ls.iter().map(|&l| (l > 0).then(|| linalg::matpow(&gm, l - 1))).collect();
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let fk = (k > 0).then(|| linalg::matpow(&fm, k - 1));
        let mut row = Vec::with_capacity(ls.len());
        for (&l, gl) in ls.iter().zip(&gls) {
            let (Some(fk), Some(gl)) = (&fk, gl) else {
                row.push((cr(0.0), 0.0));
                continue;
            };
            let mut acc = cr(0.0);
            let mut scale = 0.0;
            for (c, u, v) in &terms {
                let term = c * trace(&(u * fk * v * gl));
                acc += term;
                scale += term.norm();
            }
            let kl = (k * l) as f64;
            row.push((acc * kl, scale * kl));
        }
        out.push(row);
    }
    Ok(out)
}

/// Matrix of `{f^k, g} = k sum c u F^{k-1} v`.
pub fn loday_power_matrix(ev: &Evaluator, table: &BracketTable, f: &Element, k: usize, g: &Element) -> Result<CMat> {
    let mut out = CMat::zeros(ev.dim(), ev.dim());
    if k == 0 {
        return Ok(out);
    }
    let fk = linalg::matpow(&ev.eval_element(f)?, k - 1);
    for (c, u, v) in ev.eval_tensor(&table.element_bracket(f, g))? {
        out += u * &fk * v * c;
    }
    Ok(out * cr(k as f64))
}

/// Moment-map component at a vertex as a combination of words: a single
/// word at a cycle vertex, and the expanded ordered product
/// `(e + v_1 w_1) ... (e + v_d w_d)` at the framing vertex.
pub fn phi_element(m: usize, d: usize, v: Vertex) -> Element {
    use Letter::*;
    match v {
        Vertex::Cycle(s) => {
            let prev = (s + m - 1) % m;
            let mut letters = alloc::vec![X(s), Z(s), XInv(prev), ZInv(prev)];
            if s == 0 {
                letters.extend((0..d).map(FInv));
            }
            // x_s z_s x_{s-1}^{-1} z_{s-1}^{-1} never cancels, even for m = 1.
            Element::word(Word::from_letters(&letters, m).expect("moment word composes"))
        }
        Vertex::Infinity => {
            let e = Word::idempotent(Vertex::Infinity);
            let mut acc = Element::word(e.clone());
            for al in 0..d {
                let mut factor = Element::word(e.clone());
                factor.add_word(Word::from_letters(&[V(al), W(al)], m).expect("v w composes"), cr(1.0));
                acc = acc.mul(&factor);
            }
            acc
        }
    }
}

/// `vec(L) vec(R)^T` accumulated over a list of evaluated terms, as an
/// `N^2 x N^2` array indexed `[(u, j), (i, v)]`.
fn four_index(terms: &[(C64, CMat, CMat)], dim: usize) -> CMat {
    let mut out = CMat::zeros(dim * dim, dim * dim);
    for (c, l, r) in terms {
        for u in 0..dim {
            for j in 0..dim {
                let lu = l[(u, j)] * c;
                if lu == cr(0.0) {
                    continue;
                }
                for i in 0..dim {
                    for v in 0..dim {
                        out[(u * dim + j, i * dim + v)] += lu * r[(i, v)];
                    }
                }
            }
        }
    }
    out
}

/// Max-norm difference between `{{Phi_s, g}}` and
/// `1/2 (g e_s (x) Phi_s - e_s (x) Phi_s g + g Phi_s (x) e_s - Phi_s (x) e_s g)`.
pub fn moment_property_residual(ev: &Evaluator, table: &BracketTable, v: Vertex, g: Letter) -> Result<f64> {
    let phi = phi_element(table.m(), table.d(), v);
    let lhs = ev.eval_tensor(&table.element_bracket(&phi, &Element::word(Word::letter(g, table.m()))))?;
    let gm = ev.letter(g)?.clone();
    let es = ev.idempotent(v).clone();
    let pm = ev.eval_element(&phi)?;
    let h = cr(0.5);
    let rhs = alloc::vec![
        (h, &gm * &es, pm.clone()),
        (-h, es.clone(), &pm * &gm),
        (h, &gm * &pm, es.clone()),
        (-h, pm.clone(), &es * &gm),
    ];
    Ok(tensor_residual(&lhs, &rhs, ev.dim()))
}

/// Max-norm distance between two evaluated tensors, compared as the
/// biderivations they induce on matrix entries.
pub fn tensor_residual(lhs: &[(C64, CMat, CMat)], rhs: &[(C64, CMat, CMat)], dim: usize) -> f64 {
    linalg::max_abs(&(four_index(lhs, dim) - four_index(rhs, dim)))
}

/// `{tr f, {tr g, tr h}} + {tr g, {tr h, tr f}} + {tr h, {tr f, tr g}}`.
pub fn jacobiator(ev: &Evaluator, table: &BracketTable, f: &Element, g: &Element, h: &Element) -> Result<C64> {
    let nested = |a: &Element, b: &Element, c: &Element| -> Result<C64> {
        let inner = trace_bracket_symbolic(table, b, c)?;
        let mut el = Element::zero();
        for (w, coeff) in inner.terms() {
            el.add_word(w.clone(), *coeff);
        }
        trace_bracket_value(ev, table, a, &el)
    };
    Ok(nested(f, g, h)? + nested(g, h, f)? + nested(h, f, g)?)
}
