//! Spin elements `a'_alpha = w_alpha` and
//! `c'_alpha = v_alpha (e_0 + w_{alpha-1} v_{alpha-1}) ... (e_0 + w_1 v_1) z`,
//! and the closed forms of their double brackets with `x`, `z` and each other.

use alloc::vec::Vec;

use super::eval::{tensor_residual, Evaluator};
use super::table::BracketTable;
use super::word::{Element, Letter, Vertex, Word};
use crate::error::Result;
use crate::linalg::{cr, CMat, C64};
use crate::quiver::order_sign;

/// `x = sum_s x_s`.
pub fn x_sum(m: usize) -> Element {
    sum_of(m, Letter::X)
}

/// `z = sum_s z_s`.
pub fn z_sum(m: usize) -> Element {
    sum_of(m, Letter::Z)
}

fn sum_of(m: usize, f: fn(usize) -> Letter) -> Element {
    let mut e = Element::zero();
    for s in 0..m {
        e.add_word(Word::letter(f(s), m), cr(1.0));
    }
    e
}

fn idem(v: Vertex) -> Element {
    Element::word(Word::idempotent(v))
}

/// `a'_alpha = w_alpha`, zero-based.
pub fn a_prime(m: usize, alpha: usize) -> Element {
    Element::word(Word::letter(Letter::W(alpha), m))
}

/// `c'_alpha` with the ordered product expanded, zero-based.
pub fn c_prime(m: usize, alpha: usize) -> Element {
    let mut acc = Element::word(Word::letter(Letter::V(alpha), m));
    for la in (0..alpha).rev() {
        let mut factor = idem(Vertex::Cycle(0));
        factor.add_word(Word::from_letters(&[Letter::W(la), Letter::V(la)], m).expect("w v composes"), cr(1.0));
        acc = acc.mul(&factor);
    }
    acc.mul(&z_sum(m))
}

/// A tensor written as `(coefficient, left, right)` with element factors.
pub type ElementTensor = Vec<(C64, Element, Element)>;

fn evaluate(ev: &Evaluator, t: &ElementTensor) -> Result<Vec<(C64, CMat, CMat)>> {
    t.iter().map(|(c, l, r)| Ok((*c, ev.eval_element(l)?, ev.eval_element(r)?))).collect()
}

/// `{{x, c'_alpha}} = 1/2 c' x (x) e_{m-1} + 1/2 c' (x) x e_{m-1}`.
pub fn x_c_closed_form(m: usize, alpha: usize) -> ElementTensor {
    let c = c_prime(m, alpha);
    let last = idem(Vertex::Cycle(m - 1));
    let x = x_sum(m);
    alloc::vec![(cr(0.5), c.mul(&x), last.clone()), (cr(0.5), c, x.mul(&last))]
}

/// `{{z, c'_alpha}} = -1/2 c' z (x) e_{m-1} + 1/2 c' (x) z e_{m-1}`.
pub fn z_c_closed_form(m: usize, alpha: usize) -> ElementTensor {
    let c = c_prime(m, alpha);
    let last = idem(Vertex::Cycle(m - 1));
    let z = z_sum(m);
    alloc::vec![(cr(-0.5), c.mul(&z), last.clone()), (cr(0.5), c, z.mul(&last))]
}

/// `{{a'_alpha, c'_beta}} = -1/2 c'_beta a'_alpha (x) e_0
/// + 1/2 (o(alpha, beta) - delta) e_inf (x) a'_alpha c'_beta
/// - delta (e_inf (x) e_0 z + sum_{lambda < beta} e_inf (x) a'_lambda c'_lambda)`.
///
/// The first term only survives at `m = 1`, where `c'_beta` ends at vertex 0.
pub fn a_c_closed_form(m: usize, alpha: usize, beta: usize) -> ElementTensor {
    let inf = idem(Vertex::Infinity);
    let delta = if alpha == beta { 1.0 } else { 0.0 };
    let mut out = alloc::vec![
        (cr(-0.5), c_prime(m, beta).mul(&a_prime(m, alpha)), idem(Vertex::Cycle(0))),
        (cr(0.5 * (order_sign(alpha, beta) - delta)), inf.clone(), a_prime(m, alpha).mul(&c_prime(m, beta))),
    ];
    if alpha == beta {
        out.push((cr(-1.0), inf.clone(), idem(Vertex::Cycle(0)).mul(&z_sum(m))));
        for la in 0..beta {
            out.push((cr(-1.0), inf.clone(), a_prime(m, la).mul(&c_prime(m, la))));
        }
    }
    out
}

/// `{{c'_alpha, c'_beta}} = 1/2 o(alpha, beta) (c'_beta (x) c'_alpha - c'_alpha (x) c'_beta)`.
pub fn c_c_closed_form(m: usize, alpha: usize, beta: usize) -> ElementTensor {
    let o = 0.5 * order_sign(alpha, beta);
    let (ca, cb) = (c_prime(m, alpha), c_prime(m, beta));
    alloc::vec![(cr(o), cb.clone(), ca.clone()), (cr(-o), ca, cb)]
}

/// Max-norm distance between the induced biderivations of `{{f, g}}`
/// (expanded by Leibniz from the generator table) and a closed form.
pub fn closed_form_residual(ev: &Evaluator, table: &BracketTable, f: &Element, g: &Element, closed: &ElementTensor) -> Result<f64> {
    let lhs = ev.eval_tensor(&table.element_bracket(f, g))?;
    let rhs = evaluate(ev, closed)?;
    Ok(tensor_residual(&lhs, &rhs, ev.dim()))
}

/// Worst residual over all spin identities at one point: `{{x, c'}}`,
/// `{{z, c'}}`, `{{a', c'}}` and `{{c', c'}}` for every framing index.
pub fn spin_identity_residuals(ev: &Evaluator, table: &BracketTable) -> Result<[f64; 4]> {
    let (m, d) = (table.m(), table.d());
    let mut worst = [0.0f64; 4];
    for al in 0..d {
        let c = c_prime(m, al);
        worst[0] = worst[0].max(closed_form_residual(ev, table, &x_sum(m), &c, &x_c_closed_form(m, al))?);
        worst[1] = worst[1].max(closed_form_residual(ev, table, &z_sum(m), &c, &z_c_closed_form(m, al))?);
        for be in 0..d {
            let cb = c_prime(m, be);
            worst[2] = worst[2].max(closed_form_residual(ev, table, &a_prime(m, al), &cb, &a_c_closed_form(m, al, be))?);
            worst[3] = worst[3].max(closed_form_residual(ev, table, &c, &cb, &c_c_closed_form(m, al, be))?);
        }
    }
    Ok(worst)
}

/// `x^k` as a sum of closed and open paths.
pub fn x_power(m: usize, k: usize) -> Element {
    let x = x_sum(m);
    let mut acc = x.clone();
    for _ in 1..k {
        acc = acc.mul(&x);
    }
    acc
}

/// `a'_alpha c'_beta x^l`.
pub fn spin_word(m: usize, alpha: usize, beta: usize, l: usize) -> Element {
    let ac = a_prime(m, alpha).mul(&c_prime(m, beta));
    if l == 0 {
        ac
    } else {
        ac.mul(&x_power(m, l))
    }
}
