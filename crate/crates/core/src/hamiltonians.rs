//! Commuting families, their reduced closed forms, spectral curves and
//! numerical independence.
//!
//! Total matrices live on `C^n (+) ... (+) C^n` (one copy per cycle vertex, no
//! framing): `X` has block `X_s` at `(s, s+1)`, `Y` and `Z` have `Y_s`, `Z_s`
//! at `(s+1, s)`, and `Theta = (1 + XY)(1 + YX)^{-1}` is block diagonal.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::bracket::spin::{spin_word, x_power};
use crate::bracket::{trace_bracket_value, BracketTable, Element, Evaluator, Letter, Word};
use crate::error::{Error, Result};
use crate::linalg::{self, block, c, cr, identity, inverse, matpow, place, trace, CMat, C64};
use crate::quiver::{ModelSpec, ParameterSet};
use crate::rep_space::{
    coordinates_of, fg_bracket, fg_bracket_chain_rule, point_from_coordinates, reduced_quadruple, FgFunction, LocalCoordinates, ReducedQuadruple,
    RepPoint,
};

/// Cycle-only total matrices of a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalMatrices {
    pub m: usize,
    pub n: usize,
    pub x: CMat,
    pub y: CMat,
    z: Option<CMat>,
    pub theta: CMat,
}

impl TotalMatrices {
    pub fn z(&self) -> Result<&CMat> {
        self.z.as_ref().ok_or(Error::SingularFactor("X (total Z undefined)".into()))
    }
    /// `1 + XY`.
    pub fn t(&self) -> CMat {
        identity(self.m * self.n) + &self.x * &self.y
    }
    /// Diagonal block at a vertex.
    pub fn diag_block(&self, mat: &CMat, s: usize) -> CMat {
        block(mat, s * self.n, s * self.n, self.n, self.n)
    }
    /// Moment block `Theta_s`.
    pub fn theta_block(&self, s: usize) -> CMat {
        self.diag_block(&self.theta, s)
    }
}

/// Total matrix with `blocks[s]` at `(s, s+1)` when `forward`, else at `(s+1, s)`.
pub fn assemble(blocks: &[CMat], n: usize, forward: bool) -> CMat {
    let m = blocks.len();
    let mut out = CMat::zeros(m * n, m * n);
    for (s, b) in blocks.iter().enumerate() {
        let next = (s + 1) % m;
        let (r, col) = if forward { (s, next) } else { (next, s) };
        place(&mut out, r * n, col * n, b);
    }
    out
}

/// Inverse of [`assemble`].
pub fn extract(total: &CMat, m: usize, n: usize, forward: bool) -> Vec<CMat> {
    (0..m)
        .map(|s| {
            let next = (s + 1) % m;
            let (r, col) = if forward { (s, next) } else { (next, s) };
            block(total, r * n, col * n, n, n)
        })
        .collect()
}

pub fn total_matrices(point: &RepPoint) -> Result<TotalMatrices> {
    let spec = point.spec();
    let (m, n) = (spec.m, spec.n);
    let x = assemble(point.xs(), n, true);
    let y = assemble(point.ys(), n, false);
    let z = point.zs().ok().map(|zs| assemble(&zs, n, false));
    let id = identity(m * n);
    let theta = (&id + &x * &y) * inverse(&(&id + &y * &x), "1 + YX")?;
    Ok(TotalMatrices { m, n, x, y, z, theta })
}

/// The four spectral-parameter families of commuting traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `tr((1 + eta Theta^{-1}) X)^j`
    One,
    /// `tr((1 + eta Theta^{-1})(1 + XY))^j`
    Two,
    /// `tr((1 + eta Theta) Y)^j`
    Three,
    /// `tr((1 + eta Theta)(Y + X^{-1}))^j`
    Four,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::One, Family::Two, Family::Three, Family::Four];

    pub fn from_index(i: usize) -> Option<Family> {
        match i {
            1 => Some(Family::One),
            2 => Some(Family::Two),
            3 => Some(Family::Three),
            4 => Some(Family::Four),
            _ => None,
        }
    }
    pub fn index(self) -> usize {
        match self {
            Family::One => 1,
            Family::Two => 2,
            Family::Three => 3,
            Family::Four => 4,
        }
    }
    /// Powers below a multiple of `m` give vanishing traces except for the
    /// block-diagonal second family.
    pub fn step(self, m: usize) -> usize {
        if self == Family::Two {
            1
        } else {
            m
        }
    }
}

/// Generator matrix of a family at spectral parameter `eta`.
pub fn family_matrix(tm: &TotalMatrices, family: Family, eta: C64) -> Result<CMat> {
    let id = identity(tm.m * tm.n);
    Ok(match family {
        Family::One => (&id + inverse(&tm.theta, "Theta")? * eta) * &tm.x,
        Family::Two => (&id + inverse(&tm.theta, "Theta")? * eta) * tm.t(),
        Family::Three => (&id + &tm.theta * eta) * &tm.y,
        Family::Four => (&id + &tm.theta * eta) * tm.z()?,
    })
}

pub fn family_value(tm: &TotalMatrices, family: Family, j: usize, eta: C64) -> Result<C64> {
    Ok(trace(&matpow(&family_matrix(tm, family, eta)?, j)))
}

fn word(letters: &[Letter], m: usize) -> Word {
    Word::from_letters(letters, m).expect("family words compose")
}

/// Generator of a family as an element of the localized path algebra; the
/// moment factors are spelled with `Theta_s = x_s z_s x_{s-1}^{-1} z_{s-1}^{-1}`.
pub fn family_element(m: usize, family: Family, eta: C64) -> Element {
    use Letter::*;
    let mut out = Element::zero();
    for s in 0..m {
        let p = (s + m - 1) % m;
        match family {
            Family::One => {
                out.add_word(word(&[X(s)], m), cr(1.0));
                out.add_word(word(&[Z(p), X(p), ZInv(s)], m), eta);
            }
            Family::Two => {
                out.add_word(word(&[X(s), Z(s)], m), cr(1.0));
                out.add_word(word(&[Z(p), X(p)], m), eta);
            }
            Family::Three => {
                // Theta_s y_{s-1} = x_s z_s x_{s-1}^{-1} (1 - z_{s-1}^{-1} x_{s-1}^{-1}).
                out.add_word(word(&[Y(p)], m), cr(1.0));
                out.add_word(word(&[X(s), Z(s), XInv(p)], m), eta);
                out.add_word(word(&[X(s), Z(s), XInv(p), ZInv(p), XInv(p)], m), -eta);
            }
            Family::Four => {
                out.add_word(word(&[Z(p)], m), cr(1.0));
                out.add_word(word(&[X(s), Z(s), XInv(p)], m), eta);
            }
        }
    }
    out
}

/// `f^k` in the path algebra, with `f^0 = sum_s e_s` over the vertices the
/// words of `f` start from.
pub fn element_pow(f: &Element, k: usize) -> Element {
    let mut out = Element::zero();
    let mut seen = Vec::new();
    for (w, _) in f.terms() {
        if !seen.contains(&w.tail()) {
            seen.push(w.tail());
            out.add_word(Word::idempotent(w.tail()), cr(1.0));
        }
    }
    for _ in 0..k {
        out = out.mul(f);
    }
    out
}

/// Polynomial in the spectral parameter; `coeffs[l]` multiplies `eta^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaPolynomial {
    pub coeffs: Vec<C64>,
}

impl EtaPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
    pub fn eval(&self, eta: C64) -> C64 {
        self.coeffs.iter().rev().fold(cr(0.0), |acc, &a| acc * eta + a)
    }
    /// `|coeffs[0] - coeffs[top]|` relative to the larger of the two.
    pub fn end_relation_residual(&self) -> f64 {
        let a = self.coeffs[0];
        let b = self.coeffs[self.degree()];
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }
}

/// Interpolates a polynomial of the given degree from its values on the
/// `(degree + 1)`-th roots of unity.
pub fn interpolate<F: FnMut(C64) -> Result<C64>>(mut f: F, degree: usize) -> Result<EtaPolynomial> {
    let k = degree + 1;
    let nodes: Vec<C64> = (0..k).map(|r| C64::from_polar(1.0, core::f64::consts::TAU * r as f64 / k as f64)).collect();
    let values: Vec<C64> = nodes.iter().map(|&z| f(z)).collect::<Result<_>>()?;
    let coeffs: Vec<C64> = (0..k)
        .map(|l| {
            let mut acc = cr(0.0);
            for (r, v) in values.iter().enumerate() {
                acc += v * nodes[(r * l) % k].conj();
            }
            acc / k as f64
        })
        .collect();
    let poly = EtaPolynomial { coeffs };
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let res = nodes.iter().zip(&values).map(|(&z, &v)| (poly.eval(z) - v).norm()).fold(0.0, f64::max);
    if res > 1e-8 * scale {
        return Err(Error::IllConditioned(format!("interpolation residual {res:.3e}")));
    }
    Ok(poly)
}

/// A family value as a polynomial in `eta` (degree `j`).
pub fn family_poly(tm: &TotalMatrices, family: Family, j: usize) -> Result<EtaPolynomial> {
    interpolate(|eta| family_value(tm, family, j, eta), j)
}

/// Quadruple `(A, B, bold A, bold C)` read directly off coordinates.
pub fn quadruple_of(coords: &LocalCoordinates, params: &ParameterSet) -> ReducedQuadruple {
    ReducedQuadruple {
        a: coords.a_diag(),
        b: coords.lax_b(params.t()),
        big_a: coords.a().clone(),
        big_c: coords.c().clone(),
    }
}

fn spin(q: &ReducedQuadruple) -> CMat {
    &q.big_a * &q.big_c
}

/// `tr[A^{-1}((t^{-1} + eta') B + eta' S) B^{m-1}]^j`.
pub fn reduced_g(q: &ReducedQuadruple, params: &ParameterSet, j: usize, eta_p: C64) -> Result<C64> {
    let m = params.m();
    let ainv = inverse(&q.a, "A")?;
    let inner = &q.b * (params.t().inv() + eta_p) + spin(q) * eta_p;
    let base = ainv * inner * matpow(&q.b, m - 1);
    Ok(trace(&matpow(&base, j)))
}

/// `K = t^2 prod_{s != 0} t_{s-1}(1 + eta q_s)`, relating the fourth family
/// to [`reduced_g`] with `eta' = q_0 t^{-1} eta`.
pub fn g_constant(params: &ParameterSet, eta: C64) -> C64 {
    let t = params.t();
    (1..params.m()).fold(t * t, |acc, s| acc * params.t_s(s as isize - 1) * (cr(1.0) + eta * params.q()[s]))
}

/// `P(B) = (B - t_{m-1}^{-1}) ... (B - t_0^{-1})`.
pub fn p_of_b(b: &CMat, params: &ParameterSet) -> CMat {
    let n = b.nrows();
    let id = identity(n);
    let mut out = id.clone();
    for s in (0..params.m()).rev() {
        out *= b - &id * params.t_s(s as isize).inv();
    }
    out
}

/// `tr([(1 + eta q_0) + eta q_0 S B^{-1}] P(B) A^{-1})^j`.
pub fn reduced_h(q: &ReducedQuadruple, params: &ParameterSet, j: usize, eta: C64) -> Result<C64> {
    let n = q.a.nrows();
    let q0 = params.q()[0];
    let binv = inverse(&q.b, "B")?;
    let ainv = inverse(&q.a, "A")?;
    let front = identity(n) * (cr(1.0) + eta * q0) + spin(q) * binv * (eta * q0);
    Ok(trace(&matpow(&(front * p_of_b(&q.b, params) * ainv), j)))
}

/// `C = t prod_{s != 0} t_{s-1}(1 + eta q_s)`, relating the third family to
/// [`reduced_h`].
pub fn h_constant(params: &ParameterSet, eta: C64) -> C64 {
    (1..params.m()).fold(params.t(), |acc, s| acc * params.t_s(s as isize - 1) * (cr(1.0) + eta * params.q()[s]))
}

/// Second family on the diagonal normal form: block `s` is
/// `X_s Z_s + eta Z_{s-1} X_{s-1}`, which is `(t_s + eta t_{s-1}) B` for
/// `s >= 1` and `t_0 B + eta t A^{-1} B A` at `s = 0`.
pub fn reduced_f(q: &ReducedQuadruple, params: &ParameterSet, j: usize, eta: C64) -> Result<C64> {
    let m = params.m();
    let ainv = inverse(&q.a, "A")?;
    let trb = trace(&matpow(&q.b, j));
    let mut total = cr(0.0);
    for s in 1..m {
        total += (params.t_s(s as isize) + eta * params.t_s(s as isize - 1)).powi(j as i32) * trb;
    }
    let b0 = &q.b * params.t_s(0) + &ainv * &q.b * &q.a * (eta * params.t());
    total += trace(&matpow(&b0, j));
    Ok(total)
}

/// Reduced families in the coordinates of the Jordan side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReducedFamily {
    F,
    G,
    H,
}

impl ReducedFamily {
    pub fn value(self, q: &ReducedQuadruple, params: &ParameterSet, j: usize, eta: C64) -> Result<C64> {
        match self {
            ReducedFamily::F => reduced_f(q, params, j, eta),
            ReducedFamily::G => reduced_g(q, params, j, eta),
            ReducedFamily::H => reduced_h(q, params, j, eta),
        }
    }
    pub fn poly(self, q: &ReducedQuadruple, params: &ParameterSet, j: usize) -> Result<EtaPolynomial> {
        interpolate(|eta| self.value(q, params, j, eta), j)
    }
}

/// The index set `{(j, l) : 1 <= j <= n, 0 <= l <= min(j - 1, d)}`.
pub fn index_set(n: usize, d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 1..=n {
        for l in 0..=core::cmp::min(j - 1, d) {
            out.push((j, l));
        }
    }
    out
}

/// Expected number of independent functions, `nd - d(d-1)/2`.
pub fn expected_rank(n: usize, d: usize) -> usize {
    n * d - d * (d - 1) / 2
}

/// Spectral curve `det(C + eta T - mu) = sum_{i,s} coeffs[i][s] eta^i mu^s`
/// with `C = A^{-1} B^m` and `T = S B^{m-1} A^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    pub coeffs: Vec<Vec<C64>>,
    /// Radii of the interpolation circles in `eta` and `mu`; coefficient
    /// `(i, s)` is compared after multiplying by `eta_radius^i mu_radius^s`.
    pub eta_radius: f64,
    pub mu_radius: f64,
}

impl SpectralCurve {
    fn scaled(&self, i: usize, s: usize) -> f64 {
        self.coeffs[i][s].norm() * linalg::real::powi(self.eta_radius, i as i32) * linalg::real::powi(self.mu_radius, s as i32)
    }
    /// Largest scaled coefficient of `Gamma_i` for `i > d`, relative to the
    /// largest scaled coefficient with `i <= d`.
    pub fn vanishing_ratio(&self, d: usize) -> f64 {
        let n = self.coeffs.len() - 1;
        let mut kept: f64 = 0.0;
        let mut dropped: f64 = 0.0;
        for i in 0..=n {
            for s in 0..=n {
                let v = self.scaled(i, s);
                if i <= d {
                    kept = kept.max(v);
                } else {
                    dropped = dropped.max(v);
                }
            }
        }
        dropped / kept.max(1e-300)
    }
}

pub fn spectral_coeffs(q: &ReducedQuadruple, params: &ParameterSet) -> Result<SpectralCurve> {
    let m = params.m();
    let n = q.a.nrows();
    let ainv = inverse(&q.a, "A")?;
    let bm1 = matpow(&q.b, m - 1);
    let cmat = &ainv * &q.b * &bm1;
    let tmat = spin(q) * &bm1 * &ainv;
    let mu_radius = linalg::frobenius(&cmat).max(1e-12);
    let eta_radius = mu_radius / linalg::frobenius(&tmat).max(1e-12);
    let k = n + 1;
    let node = |r: usize| C64::from_polar(1.0, core::f64::consts::TAU * r as f64 / k as f64);
    let id = identity(n);
    let mut values = alloc::vec![alloc::vec![cr(0.0); k]; k];
    for (a, row) in values.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let eta = node(a) * eta_radius;
            let mu = node(b) * mu_radius;
            *v = (&cmat + &tmat * eta - &id * mu).determinant();
        }
    }
    let mut coeffs = alloc::vec![alloc::vec![cr(0.0); k]; k];
    for (i, row) in coeffs.iter_mut().enumerate() {
        for (s, out) in row.iter_mut().enumerate() {
            let mut acc = cr(0.0);
            for (a, vrow) in values.iter().enumerate() {
                for (b, v) in vrow.iter().enumerate() {
                    acc += v * node((a * i) % k).conj() * node((b * s) % k).conj();
                }
            }
            *out = acc / (k * k) as f64
                / (linalg::real::powi(eta_radius, i as i32) * linalg::real::powi(mu_radius, s as i32));
        }
    }
    Ok(SpectralCurve { coeffs, eta_radius, mu_radius })
}

/// Outcome of a numerical rank computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub expected: usize,
    pub observed: usize,
    pub gap: f64,
    pub singular_values: Vec<f64>,
}

/// Relative singular-value cut for the numerical rank.
pub const RANK_TOL: f64 = 1e-7;
/// Finite-difference step for Jacobians.
pub const JACOBIAN_STEP: f64 = 1e-6;

/// `2nd` free coordinates: positions, all but the last column of `a` (the
/// last one is fixed by the unit row sums), and `c`.
pub fn free_coordinates(coords: &LocalCoordinates) -> Vec<C64> {
    let (n, d) = (coords.n(), coords.d());
    let mut out: Vec<C64> = coords.x().to_vec();
    for i in 0..n {
        for al in 0..d - 1 {
            out.push(coords.a()[(i, al)]);
        }
    }
    out.extend(coords.c().iter().copied());
    out
}

pub fn coordinates_from_free(free: &[C64], n: usize, d: usize) -> Result<LocalCoordinates> {
    let x = free[..n].to_vec();
    let mut a = CMat::zeros(n, d);
    let mut k = n;
    for i in 0..n {
        let mut sum = cr(0.0);
        for al in 0..d - 1 {
            a[(i, al)] = free[k];
            sum += free[k];
            k += 1;
        }
        a[(i, d - 1)] = cr(1.0) - sum;
    }
    let cm = CMat::from_column_slice(d, n, &free[k..k + n * d]);
    LocalCoordinates::new(x, a, cm)
}

/// Numerical rank of the Jacobian of `f` with respect to the free
/// coordinates, real and imaginary parts treated as independent real
/// variables. Each function is normalized by its gradient size first.
pub fn jacobian_rank<F>(coords: &LocalCoordinates, expected: usize, mut f: F) -> Result<RankReport>
where
    F: FnMut(&LocalCoordinates) -> Result<Vec<C64>>,
{
    let (n, d) = (coords.n(), coords.d());
    let base = free_coordinates(coords);
    let h = JACOBIAN_STEP;
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(2 * base.len());
    for k in 0..base.len() {
        for dir in [cr(1.0), c(0.0, 1.0)] {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[k] += dir * h;
            minus[k] -= dir * h;
            let fp = f(&coordinates_from_free(&plus, n, d)?)?;
            let fm = f(&coordinates_from_free(&minus, n, d)?)?;
            cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
        }
    }
    let nf = cols.first().map_or(0, |c| c.len());
    let mut jac = DMatrix::<f64>::zeros(2 * nf, cols.len());
    for (k, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            jac[(2 * r, k)] = v.re;
            jac[(2 * r + 1, k)] = v.im;
        }
    }
    for r in 0..nf {
        let norm = linalg::real::sqrt((0..cols.len()).map(|k| { let (a, b) = (jac[(2 * r, k)], jac[(2 * r + 1, k)]); a * a + b * b }).sum());
        if norm > 0.0 {
            for k in 0..cols.len() {
                jac[(2 * r, k)] /= norm;
                jac[(2 * r + 1, k)] /= norm;
            }
        }
    }
    let sv = linalg::singular_values_real(&jac);
    let (real_rank, gap) = linalg::numeric_rank(&sv, RANK_TOL);
    if real_rank % 2 != 0 {
        return Err(Error::IllConditioned(format!("odd real rank {real_rank}")));
    }
    Ok(RankReport { expected, observed: real_rank / 2, gap, singular_values: sv })
}

/// Coefficients `(j, l)` of the index set for one reduced family.
pub fn family_coefficients(coords: &LocalCoordinates, params: &ParameterSet, family: ReducedFamily) -> Result<Vec<C64>> {
    let q = quadruple_of(coords, params);
    let (n, d) = (coords.n(), coords.d());
    let mut out = Vec::new();
    for j in 1..=n {
        let poly = family.poly(&q, params, j)?;
        for l in 0..=core::cmp::min(j - 1, d) {
            out.push(poly.coeffs[l]);
        }
    }
    Ok(out)
}

/// Rank of the reduced family coefficients over the index set.
pub fn independence_rank(coords: &LocalCoordinates, params: &ParameterSet, family: ReducedFamily) -> Result<RankReport> {
    let expected = expected_rank(coords.n(), coords.d());
    let report = jacobian_rank(coords, expected, |cd| family_coefficients(cd, params, family))?;
    if report.gap < 10.0 {
        return Err(Error::IllConditioned(format!("singular-value gap {:.2} at the rank cut", report.gap)));
    }
    Ok(report)
}

/// Cycle matrices used as Hamiltonian generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleMatrix {
    X,
    Y,
    Z,
    /// `1 + XY`
    T,
}

impl CycleMatrix {
    pub fn total(self, tm: &TotalMatrices) -> Result<CMat> {
        Ok(match self {
            CycleMatrix::X => tm.x.clone(),
            CycleMatrix::Y => tm.y.clone(),
            CycleMatrix::Z => tm.z()?.clone(),
            CycleMatrix::T => tm.t(),
        })
    }
    /// Exponent of the `l`-th generator: `lm`, or `l` for the block-diagonal
    /// `1 + XY`.
    pub fn exponent(self, l: usize, m: usize) -> usize {
        if self == CycleMatrix::T {
            l
        } else {
            l * m
        }
    }
    /// Path-algebra element of the generator (`1 + xy` written as `x z`).
    pub fn element(self, m: usize) -> Element {
        let mut out = Element::zero();
        for s in 0..m {
            let letters: &[Letter] = match self {
                CycleMatrix::X => &[Letter::X(s)],
                CycleMatrix::Y => &[Letter::Y(s)],
                CycleMatrix::Z => &[Letter::Z(s)],
                CycleMatrix::T => &[Letter::X(s), Letter::Z(s)],
            };
            out.add_word(word(letters, m), cr(1.0));
        }
        out
    }
}

/// `tr(W_alpha V_beta U^e)` with `e` from [`CycleMatrix::exponent`].
pub fn qu_generator(point: &RepPoint, alpha: usize, beta: usize, l: usize, u: CycleMatrix) -> Result<C64> {
    let tm = total_matrices(point)?;
    let n = tm.n;
    let ue = matpow(&u.total(&tm)?, u.exponent(l, tm.m));
    let u0 = block(&ue, 0, 0, n, n);
    Ok((point.v(beta) * u0 * point.w(alpha))[(0, 0)])
}

/// Element `w_alpha v_beta u^e` closed at vertex 0.
pub fn qu_element(m: usize, alpha: usize, beta: usize, l: usize, u: CycleMatrix) -> Element {
    let wv = Element::word(word(&[Letter::W(alpha), Letter::V(beta)], m));
    wv.mul(&element_pow(&u.element(m), u.exponent(l, m)))
}

/// Residual of `M U^m_0 M^{-1} = t (Id + W_d V_d) ... (Id + W_1 V_1) U^m_0`
/// relative to the size of the left side, for `U` in `{Y, Z}`.
///
/// The conjugator is `M = Id + X_0 Y_0`, an endomorphism of vertex 0 for
/// every `m`. At `m = 1` it differs from `X_0` (for `Z`) and from
/// `X_0 + Y_0^{-1}` (for `Y`) by a right factor `U`, which commutes with `U`.
pub fn spect_residual(point: &RepPoint, params: &ParameterSet, u: CycleMatrix) -> Result<f64> {
    spect_residual_with(point, params, u, &(identity(point.spec().n) + point.x(0) * point.y(0)))
}

/// [`spect_residual`] with an explicit conjugator.
pub fn spect_residual_with(point: &RepPoint, params: &ParameterSet, u: CycleMatrix, mm: &CMat) -> Result<f64> {
    if !matches!(u, CycleMatrix::Y | CycleMatrix::Z) {
        return Err(Error::InvalidSpec("spectral identity holds for U = Y or U = Z".into()));
    }
    let tm = total_matrices(point)?;
    let (m, n) = (tm.m, tm.n);
    let um = block(&matpow(&u.total(&tm)?, m), 0, 0, n, n);
    let lhs = mm * &um * inverse(mm, "M")?;
    let id = identity(n);
    let mut prod = id.clone();
    for al in 0..point.spec().d {
        prod = (&id + point.w(al) * point.v(al)) * prod;
    }
    let rhs = prod * &um * params.t();
    Ok(linalg::frobenius(&(&lhs - rhs)) / linalg::frobenius(&lhs).max(1.0))
}

/// The `2n` functions `tr U^e, tr(W_1 V_1 U^e)` for `l = 1..n`.
pub fn cy2_functions(point: &RepPoint, u: CycleMatrix) -> Result<Vec<C64>> {
    let tm = total_matrices(point)?;
    let n = tm.n;
    let ut = u.total(&tm)?;
    let mut out = Vec::with_capacity(2 * n);
    for l in 1..=n {
        let ue = matpow(&ut, u.exponent(l, tm.m));
        out.push(trace(&ue));
        out.push((point.v(0) * block(&ue, 0, 0, n, n) * point.w(0))[(0, 0)]);
    }
    Ok(out)
}

/// Jacobian rank of [`cy2_functions`] through the coordinate chart.
pub fn cy2_rank(coords: &LocalCoordinates, params: &ParameterSet, spec: &ModelSpec, u: CycleMatrix) -> Result<RankReport> {
    jacobian_rank(coords, 2 * spec.n, |cd| cy2_functions(&point_from_coordinates(cd, params, spec)?, u))
}

/// Path-algebra element whose trace is an `f`/`g` function of the reduced
/// quadruple: `f_k = m^{-1} tr x^{km}` and
/// `g_k^{alpha beta} = t^{-1} tr(a'_alpha c'_beta x^{km+1})`.
pub fn fg_element(params: &ParameterSet, f: FgFunction) -> Element {
    let m = params.m();
    match f {
        FgFunction::F(k) => x_power(m, k * m).scaled(cr(1.0 / m as f64)),
        FgFunction::G { k, alpha, beta } => spin_word(m, alpha, beta, k * m + 1).scaled(params.t().inv()),
    }
}

/// Bracket of two `f`/`g` functions computed by the engine at a point.
pub fn fg_bracket_engine(ev: &Evaluator, table: &BracketTable, params: &ParameterSet, u: FgFunction, v: FgFunction) -> Result<C64> {
    trace_bracket_value(ev, table, &fg_element(params, u), &fg_element(params, v))
}

/// Worst relative disagreements between the three routes to the brackets of
/// `f`/`g` functions at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgComparison {
    /// Closed form against coordinate brackets with finite differences.
    pub chain_vs_closed: f64,
    /// Engine at the point against the closed form.
    pub engine_vs_closed: f64,
    /// Engine against coordinate brackets.
    pub engine_vs_chain: f64,
}

/// Compares all ordered pairs from `functions` three ways; `h` is the
/// finite-difference step.
pub fn fg_comparison(point: &RepPoint, params: &ParameterSet, functions: &[FgFunction], h: f64) -> Result<FgComparison> {
    let q = reduced_quadruple(point, params)?;
    let coords = coordinates_of(point, params)?;
    let spec = point.spec();
    let ev = Evaluator::new(point);
    let table = BracketTable::new(spec.m, spec.d);
    let rel = |a: C64, b: C64| (a - b).norm() / a.norm().max(b.norm()).max(1.0);
    let mut out = FgComparison { chain_vs_closed: 0.0, engine_vs_closed: 0.0, engine_vs_chain: 0.0 };
    for &u in functions {
        for &v in functions {
            let closed = fg_bracket(&q, u, v);
            let chain = fg_bracket_chain_rule(&coords, params, u, v, h);
            let engine = fg_bracket_engine(&ev, &table, params, u, v)?;
            out.chain_vs_closed = out.chain_vs_closed.max(rel(chain, closed));
            out.engine_vs_closed = out.engine_vs_closed.max(rel(engine, closed));
            out.engine_vs_chain = out.engine_vs_chain.max(rel(engine, chain));
        }
    }
    Ok(out)
}

/// `f_1 .. f_kmax` and `g_k^{alpha beta}` for `k < kmax` and all framing pairs.
pub fn fg_functions(d: usize, kmax: usize) -> Vec<FgFunction> {
    let mut out: Vec<FgFunction> = (1..=kmax).map(FgFunction::F).collect();
    for k in 0..kmax {
        for alpha in 0..d {
            for beta in 0..d {
                out.push(FgFunction::G { k, alpha, beta });
            }
        }
    }
    out
}
