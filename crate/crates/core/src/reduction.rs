//! The group `H` of row-stochastic spin transformations, its invariant words,
//! the λ-gauge and the duality exchanging `X` and `Z`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DVector;
use rand::Rng;

use crate::bracket::{trace_bracket_value, BracketTable, Element, Evaluator, Letter, Vertex, Word};
use crate::error::{Error, Result};
use crate::hamiltonians::{assemble, family_value, total_matrices, Family};
use crate::linalg::{self, cr, identity, inverse, max_abs, place, trace, CMat, C64};
use crate::quiver::{derive_params, ModelSpec, ParameterSet};
use crate::rep_space::{gauge_act, normal_form_gauge, spin_data, ReducedQuadruple, RepPoint, SpinData};
use crate::sampling::complex_normal;

const ROW_SUM_TOL: f64 = 1e-12;
const DET_TOL: f64 = 1e-12;
const MINOR_TOL: f64 = 1e-10;

/// An invertible `d x d` matrix whose rows sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct HElement {
    h: CMat,
}

impl HElement {
    pub fn new(h: CMat) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch("H elements are square".into()));
        }
        for (i, row) in h.row_iter().enumerate() {
            if (row.iter().sum::<C64>() - cr(1.0)).norm() > ROW_SUM_TOL {
                return Err(Error::RowSum(i));
            }
        }
        if h.clone().lu().determinant().norm() <= DET_TOL {
            return Err(Error::SingularH);
        }
        Ok(Self { h })
    }

    pub fn identity(d: usize) -> Self {
        Self { h: identity(d) }
    }

    /// Random element: Gaussian rows rescaled to sum one.
    pub fn random<R: Rng>(rng: &mut R, d: usize) -> Self {
        loop {
            let mut h = CMat::zeros(d, d);
            let mut ok = true;
            for i in 0..d {
                let row: Vec<C64> = (0..d).map(|_| complex_normal(rng)).collect();
                let s: C64 = row.iter().sum();
                if s.norm() < 0.25 {
                    ok = false;
                    break;
                }
                for (j, z) in row.iter().enumerate() {
                    h[(i, j)] = z / s;
                }
            }
            if ok {
                if let Ok(e) = Self::new(h) {
                    return e;
                }
            }
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.h
    }
    pub fn d(&self) -> usize {
        self.h.nrows()
    }

    /// Group product `self * other`.
    pub fn mul(&self, other: &HElement) -> Result<HElement> {
        HElement::new(&self.h * &other.h)
    }

    pub fn inverse(&self) -> Result<HElement> {
        HElement::new(inverse(&self.h, "h").map_err(|_| Error::SingularH)?)
    }
}

/// Spin data on which `H` acts by `A -> A h`, `C -> h^{-1} C`.
pub trait HAction: Sized {
    fn h_act(&self, h: &HElement) -> Result<Self>;
}

impl HAction for SpinData {
    fn h_act(&self, h: &HElement) -> Result<Self> {
        let hi = inverse(h.matrix(), "h").map_err(|_| Error::SingularH)?;
        let am = &self.am * h.matrix();
        let cm = hi * &self.cm;
        let s = &am * &cm;
        Ok(SpinData { am, cm, s })
    }
}

impl HAction for ReducedQuadruple {
    fn h_act(&self, h: &HElement) -> Result<Self> {
        let hi = inverse(h.matrix(), "h").map_err(|_| Error::SingularH)?;
        Ok(ReducedQuadruple { a: self.a.clone(), b: self.b.clone(), big_a: &self.big_a * h.matrix(), big_c: hi * &self.big_c })
    }
}

pub fn h_act<T: HAction>(h: &HElement, data: &T) -> Result<T> {
    data.h_act(h)
}

/// `k`-element subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `|det|` over the product of row norms (Hadamard bound).
fn relative_det(m: &CMat) -> f64 {
    let bound: f64 = m.row_iter().map(|r| r.norm()).product();
    if bound == 0.0 {
        return 0.0;
    }
    m.clone().lu().determinant().norm() / bound
}

/// Every `d x d` minor of the `n x d` matrix is nonzero (relative to its
/// Hadamard bound). This is the locus where `H` acts properly.
pub fn minors_nonzero(amat: &CMat) -> bool {
    let (n, d) = amat.shape();
    if d > n {
        return false;
    }
    subsets(n, d).iter().all(|rows| {
        let minor = CMat::from_fn(d, d, |i, j| amat[(rows[i], j)]);
        relative_det(&minor) > MINOR_TOL
    })
}

/// Rank-`d` test on an `n x d` or `d x n` matrix, the locus where `H` acts
/// freely.
pub fn has_full_spin_rank(mat: &CMat) -> bool {
    let d = mat.nrows().min(mat.ncols());
    let sv = linalg::singular_values(mat);
    linalg::numeric_rank(&sv, MINOR_TOL).0 == d
}

/// Letter of an `H`-invariant word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvariantLetter {
    X,
    Z,
    S,
}

/// A word in `X`, `Z` and `S = A C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvariantWord(pub Vec<InvariantLetter>);

impl InvariantWord {
    /// Parses `"X^2 S Z"` or `"XXSZ"`; whitespace is optional and `^k`
    /// repeats the preceding letter.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(ch) = chars.next() {
            let l = match ch {
                'X' | 'x' => InvariantLetter::X,
                'Z' | 'z' => InvariantLetter::Z,
                'S' | 's' => InvariantLetter::S,
                c if c.is_whitespace() => continue,
                other => return Err(Error::Parse(format!("unexpected '{other}' in invariant word"))),
            };
            let mut reps = 1;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                reps = digits.parse().map_err(|_| Error::Parse(format!("bad exponent in '{text}'")))?;
            }
            letters.extend(core::iter::repeat_n(l, reps));
        }
        if letters.is_empty() {
            return Err(Error::Parse("empty invariant word".into()));
        }
        Ok(Self(letters))
    }
}

impl fmt::Display for InvariantWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(match l {
                InvariantLetter::X => "X",
                InvariantLetter::Z => "Z",
                InvariantLetter::S => "S",
            })?;
        }
        Ok(())
    }
}

/// Total matrices used to evaluate invariant words.
///
/// `S` is the path `w v ... z_{m-1}` from vertex 0 to vertex `m - 1`, so it is
/// placed at block `(0, m-1)` like `Z_{m-1}`; traces of words are then gauge
/// invariant for every `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantEvaluator {
    x: CMat,
    z: CMat,
    s: CMat,
}

impl InvariantEvaluator {
    pub fn new(point: &RepPoint, spin: &SpinData) -> Result<Self> {
        let spec = point.spec();
        let (m, n) = (spec.m, spec.n);
        let tm = total_matrices(point)?;
        let mut s = CMat::zeros(m * n, m * n);
        place(&mut s, 0, (m - 1) * n, &spin.s);
        Ok(Self { x: tm.x.clone(), z: tm.z()?.clone(), s })
    }

    pub fn eval(&self, word: &InvariantWord) -> C64 {
        let mut acc = identity(self.x.nrows());
        for l in &word.0 {
            acc *= match l {
                    InvariantLetter::X => &self.x,
                    InvariantLetter::Z => &self.z,
                    InvariantLetter::S => &self.s,
                };
        }
        trace(&acc)
    }
}

/// Trace of an invariant word at a point.
pub fn h_invariant_value(point: &RepPoint, params: &ParameterSet, word: &InvariantWord) -> Result<C64> {
    Ok(InvariantEvaluator::new(point, &spin_data(point, params)?)?.eval(word))
}

/// Every word of length at most `max_len`, with at least one letter.
pub fn invariant_words(max_len: usize) -> Vec<InvariantWord> {
    let alphabet = [InvariantLetter::X, InvariantLetter::Z, InvariantLetter::S];
    let mut out = Vec::new();
    let mut layer: Vec<Vec<InvariantLetter>> = alloc::vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &alphabet {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(InvariantWord));
        layer = next;
    }
    out
}

/// A point in λ-gauge together with the roots and the total gauge used.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGauge {
    pub point: RepPoint,
    /// `lambda_i` with `lambda_i^m = x_i`, sorted by `(Re, Im)`.
    pub lambda: Vec<C64>,
    pub gauge: Vec<CMat>,
}

fn lex(a: &C64, b: &C64) -> core::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(core::cmp::Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(core::cmp::Ordering::Equal))
}

/// Gauge in which every `X_s` is the same diagonal matrix `diag(lambda)`.
///
/// The point is first brought to diagonal normal form. `branch[i]` picks the
/// root `lambda_i = x_i^{1/m} zeta^{branch[i]}` for the principal root and
/// `zeta = exp(2 pi i / m)`; the roots are then sorted lexicographically.
pub fn lambda_gauge(point: &RepPoint, params: &ParameterSet, branch: &[usize]) -> Result<LambdaGauge> {
    let spec = point.spec();
    let (m, n) = (spec.m, spec.n);
    if branch.len() != n {
        return Err(Error::BranchInvalid(format!("expected {n} branch indices, got {}", branch.len())));
    }
    if let Some(b) = branch.iter().find(|&&b| b >= m) {
        return Err(Error::BranchInvalid(format!("branch {b} is not below m = {m}")));
    }
    let g_nf = normal_form_gauge(point, params)?;
    let normal = gauge_act(&g_nf, point)?;
    let x: Vec<C64> = normal.x(m - 1).diagonal().iter().copied().collect();
    let zeta = C64::from_polar(1.0, core::f64::consts::TAU / m as f64);
    let mut lambda: Vec<(usize, C64)> = Vec::with_capacity(n);
    for (i, &xi) in x.iter().enumerate() {
        let root = xi.powf(1.0 / m as f64) * zeta.powu(branch[i] as u32);
        if (root.powu(m as u32) - xi).norm() > 1e-9 * xi.norm().max(1.0) {
            return Err(Error::BranchInvalid(format!("lambda_{i}^m differs from x_{i}")));
        }
        lambda.push((i, root));
    }
    lambda.sort_by(|a, b| lex(&a.1, &b.1));
    let mut perm = CMat::zeros(n, n);
    for (k, &(i, _)) in lambda.iter().enumerate() {
        perm[(k, i)] = cr(1.0);
    }
    let lam: Vec<C64> = lambda.iter().map(|&(_, l)| l).collect();
    let gauge: Vec<CMat> = (0..m)
        .map(|s| {
            let d = CMat::from_diagonal(&DVector::from_iterator(n, lam.iter().map(|l| l.powu((m - s) as u32))));
            d * &perm * &g_nf[s]
        })
        .collect();
    let moved = gauge_act(&gauge, point)?;
    let diag = CMat::from_diagonal(&DVector::from_vec(lam.clone()));
    // Every X_s becomes an exact copy of diag(lambda); Z_s is carried over.
    let point = RepPoint::from_xz(
        spec,
        alloc::vec![diag; m],
        moved.zs()?,
        moved.vs().to_vec(),
        moved.ws().to_vec(),
    )?;
    Ok(LambdaGauge { point, lambda: lam, gauge })
}

/// `(Z_s)_ij = t_s t f_ij lambda_i^{m-s-1} lambda_j^s / (lambda_i^m - t lambda_j^m)`.
pub fn lambda_gauge_z(lambda: &[C64], f: &CMat, params: &ParameterSet, s: usize) -> CMat {
    let m = params.m();
    let t = params.t();
    let n = lambda.len();
    CMat::from_fn(n, n, |i, j| {
        let (li, lj) = (lambda[i], lambda[j]);
        params.t_s(s as isize) * t * f[(i, j)] * li.powu((m - s - 1) as u32) * lj.powu(s as u32)
            / (li.powu(m as u32) - t * lj.powu(m as u32))
    })
}

/// Chart spin matrix `f_ij = a_i c_j` of a point in λ-gauge.
///
/// The spin row `C` of [`spin_data`] ends with `Z_{m-1}` and so transforms
/// with the gauge at vertex `m - 1`, which is `diag(lambda)` relative to the
/// diagonal normal form. Hence `f_ij = (A C)_ij lambda_j` here.
pub fn lambda_gauge_spin(gauged: &LambdaGauge, params: &ParameterSet) -> Result<CMat> {
    let sd = spin_data(&gauged.point, params)?;
    let mut f = sd.am * sd.cm;
    for (j, l) in gauged.lambda.iter().enumerate() {
        for i in 0..f.nrows() {
            f[(i, j)] *= l;
        }
    }
    Ok(f)
}

/// `e^{-gamma}` with `q_0 q_1 = e^{-2 gamma}`, from principal square roots.
fn exp_minus_gamma(params: &ParameterSet) -> C64 {
    params.q()[0].sqrt() * params.q()[1].sqrt()
}

/// `tr Z^2` at `m = 2` as a double sum over particles in λ-gauge.
pub fn tr_z2_closed_form(lambda: &[C64], f: &CMat, params: &ParameterSet) -> Result<C64> {
    if params.m() != 2 {
        return Err(Error::InvalidSpec("the closed form is stated for m = 2".into()));
    }
    let eg = exp_minus_gamma(params);
    let q0 = params.q()[0];
    // e^{-5 gamma - 2 gamma_0} / 2
    let pref = eg.powu(5) * q0 * 0.5;
    let n = lambda.len();
    let mut acc = cr(0.0);
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (lambda[i], lambda[j]);
            let plus = (li - eg * lj).inv() + (li + eg * lj).inv();
            let minus = (lj - eg * li).inv() - (lj + eg * li).inv();
            acc += plus * minus * f[(i, j)] * f[(j, i)];
        }
    }
    Ok(acc * pref)
}

/// `tr Y^2` at `m = 2`: `tr Z^2 - 2 sum_i (t q_0 + t^2) f_ii / ((1 - t) lambda_i^2)
/// + 2 sum_i lambda_i^{-2}`.
///
/// The two single sums carry the factor 2 coming from the two diagonal
/// blocks of `Y^2`, matching the normalization of the double sum in
/// [`tr_z2_closed_form`].
pub fn tr_y2_closed_form(lambda: &[C64], f: &CMat, params: &ParameterSet) -> Result<C64> {
    let z2 = tr_z2_closed_form(lambda, f, params)?;
    let (t, q0) = (params.t(), params.q()[0]);
    let coef = (t * q0 + t * t) / (cr(1.0) - t);
    let mut acc = z2;
    for (i, l) in lambda.iter().enumerate() {
        let l2 = l * l;
        acc += (cr(1.0) - coef * f[(i, i)]) * 2.0 / l2;
    }
    Ok(acc)
}

/// The unframed dual of a point: `X^_s = Z_{m-1-s}`, `Z^_s = X_{m-1-s}`, with
/// parameters `q^_s = q_{m-s}^{-1}` (indices mod `m`).
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub spec: ModelSpec,
    pub x: Vec<CMat>,
    pub z: Vec<CMat>,
    pub params: ParameterSet,
}

/// Printed with every dual point written to disk.
pub const DUAL_NOTICE: &str = "framing vectors V, W are dropped: the duality acts on the unframed cyclic data only";

pub fn dual_params(params: &ParameterSet) -> Result<ParameterSet> {
    let m = params.m();
    let q: Vec<C64> = (0..m).map(|s| params.q()[(m - s) % m].inv()).collect();
    derive_params(&q, params.n())
}

pub fn dual_point(point: &RepPoint, params: &ParameterSet) -> Result<DualPoint> {
    let spec = point.spec();
    let m = spec.m;
    let zs = point.zs().map_err(|e| Error::SingularFactor(format!("{e}")))?;
    let x = (0..m).map(|s| zs[m - 1 - s].clone()).collect();
    let z = (0..m).map(|s| point.x(m - 1 - s).clone()).collect();
    Ok(DualPoint { spec, x, z, params: dual_params(params)? })
}

impl DualPoint {
    /// The dual data as a point with zero framing, for evaluation of
    /// unframed words and of the families.
    pub fn unframed_point(&self) -> Result<RepPoint> {
        let n = self.spec.n;
        let d = self.spec.d;
        RepPoint::from_xz(
            self.spec,
            self.x.clone(),
            self.z.clone(),
            alloc::vec![CMat::zeros(1, n); d],
            alloc::vec![CMat::zeros(n, 1); d],
        )
    }

    /// Applies the duality again.
    pub fn dual(&self) -> Result<DualPoint> {
        let m = self.spec.m;
        Ok(DualPoint {
            spec: self.spec,
            x: (0..m).map(|s| self.z[m - 1 - s].clone()).collect(),
            z: (0..m).map(|s| self.x[m - 1 - s].clone()).collect(),
            params: dual_params(&self.params)?,
        })
    }

    /// `||Theta^_s - q^_s||` for `s = 1..m-1`; at vertex 0 the dual moment is
    /// the inverse of the original framing product, which is not carried.
    pub fn moment_residuals(&self) -> Result<Vec<f64>> {
        let m = self.spec.m;
        let id = identity(self.spec.n);
        let mut out = Vec::new();
        for s in 1..m {
            let th = &self.x[s] * &self.z[s] * inverse(&self.x[s - 1], "X")? * inverse(&self.z[s - 1], "Z")?;
            out.push(linalg::frobenius(&(th - &id * self.params.q()[s])));
        }
        Ok(out)
    }
}

impl DualPoint {
    /// Trace of a word in `X` and `Z` at the dual data.
    pub fn trace_xz(&self, word: &InvariantWord) -> Result<C64> {
        trace_xz_word(&self.x, &self.z, word)
    }
}

/// Trace of a word in the total matrices assembled from `X_s` and `Z_s`
/// blocks. `S` has no meaning without framing and is rejected.
pub fn trace_xz_word(x: &[CMat], z: &[CMat], word: &InvariantWord) -> Result<C64> {
    let n = x.first().map(|b| b.nrows()).unwrap_or(0);
    let (tx, tz) = (assemble(x, n, true), assemble(z, n, false));
    let mut acc = identity(tx.nrows());
    for l in &word.0 {
        acc *= match l {
                InvariantLetter::X => &tx,
                InvariantLetter::Z => &tz,
                InvariantLetter::S => return Err(Error::Parse("S is not defined on unframed data".into())),
            };
    }
    Ok(trace(&acc))
}

/// The involution `x_s -> z_{m-1-s}`, `z_s -> x_{m-1-s}`, `e_s -> e_{m-s}` on
/// words in `x`, `z` and their inverses.
pub fn iota_word(w: &Word, m: usize) -> Result<Word> {
    let flip = |s: usize| m - 1 - s;
    if w.is_empty() {
        return Ok(match w.tail() {
            Vertex::Cycle(s) => Word::idempotent(Vertex::Cycle((m - s) % m)),
            Vertex::Infinity => return Err(Error::UnknownPair("framing vertex has no dual".into())),
        });
    }
    let letters = w
        .letters()
        .iter()
        .map(|&l| match l {
            Letter::X(s) => Ok(Letter::Z(flip(s))),
            Letter::Z(s) => Ok(Letter::X(flip(s))),
            Letter::XInv(s) => Ok(Letter::ZInv(flip(s))),
            Letter::ZInv(s) => Ok(Letter::XInv(flip(s))),
            other => Err(Error::UnknownPair(format!("letter {other} has no dual"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Word::from_letters(&letters, m)
}

pub fn iota_element(e: &Element, m: usize) -> Result<Element> {
    let mut out = Element::zero();
    for (w, coeff) in e.terms() {
        out.add_word(iota_word(w, m)?, *coeff);
    }
    Ok(out)
}

/// `|{tr iota f, tr iota g}(p) + {tr f, tr g}(dual p)|` relative to the
/// larger of the two sides (at least one).
pub fn anti_poisson_residual(point: &RepPoint, params: &ParameterSet, f: &Element, g: &Element) -> Result<f64> {
    let spec = point.spec();
    let table = BracketTable::new(spec.m, spec.d);
    let lhs = trace_bracket_value(&Evaluator::new(point), &table, &iota_element(f, spec.m)?, &iota_element(g, spec.m)?)?;
    let dual = dual_point(point, params)?.unframed_point()?;
    let rhs = trace_bracket_value(&Evaluator::new(&dual), &table, f, g)?;
    Ok((lhs + rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0))
}

/// Relative difference between the fourth family at the dual point and the
/// first family at the point, for powers `1..=max_j` at spectral parameter
/// `eta`.
pub fn family_swap_residual(point: &RepPoint, params: &ParameterSet, max_j: usize, eta: C64) -> Result<f64> {
    let tm = total_matrices(point)?;
    let dual = dual_point(point, params)?.unframed_point()?;
    let tmd = total_matrices(&dual)?;
    let mut worst: f64 = 0.0;
    for j in 1..=max_j {
        let a = family_value(&tm, Family::One, j, eta)?;
        let b = family_value(&tmd, Family::Four, j, eta)?;
        worst = worst.max(linalg::rel_diff(a, b));
    }
    Ok(worst)
}

/// Largest entry of `Z_s - formula` over all `s`, relative to the largest
/// entry of `Z`.
pub fn lambda_gauge_residual(gauged: &LambdaGauge, params: &ParameterSet) -> Result<f64> {
    let f = lambda_gauge_spin(gauged, params)?;
    let m = gauged.point.spec().m;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for s in 0..m {
        let z = gauged.point.z(s)?;
        scale = scale.max(max_abs(z));
        worst = worst.max(max_abs(&(z - lambda_gauge_z(&gauged.lambda, &f, params, s))));
    }
    Ok(worst / scale)
}

/// Random closed word in `x`, `z` and their inverses, based at a random cycle
/// vertex, with `len` random steps followed by the shortest closing path.
pub fn random_closed_xz_word<R: Rng>(rng: &mut R, m: usize, len: usize) -> Word {
    let start = rng.gen_range(0..m);
    let mut at = start;
    let mut letters = Vec::with_capacity(len + m);
    for _ in 0..len {
        let prev = (at + m - 1) % m;
        let l = match rng.gen_range(0..4) {
            0 => Letter::X(at),
            1 => Letter::ZInv(at),
            2 => Letter::Z(prev),
            _ => Letter::XInv(prev),
        };
        at = match l {
            Letter::X(_) | Letter::ZInv(_) => (at + 1) % m,
            _ => prev,
        };
        letters.push(l);
    }
    while at != start {
        letters.push(Letter::X(at));
        at = (at + 1) % m;
    }
    if letters.is_empty() {
        letters.push(Letter::X(start));
        letters.extend((1..m).map(|k| Letter::X((start + k) % m)));
    }
    Word::from_letters(&letters, m).expect("consecutive letters compose")
}
