//! Representation points, local coordinates and the reduced quadruple.
//!
//! Framing indices are zero-based in code (`alpha = 0` is the first framing
//! arrow). `V[alpha]` is a `1 x n` row and `W[alpha]` an `n x 1` column.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, cr, frobenius, identity, inverse, matpow, max_abs, trace, CMat, C64};
use crate::quiver::{order_sign, ModelSpec, ParameterSet};

/// Relative determinant threshold for the invertibility invariants.
const DET_TOL: f64 = 1e-12;

/// `|det m|` divided by the Hadamard bound, so the test is scale free.
fn relative_det(m: &CMat) -> f64 {
    let bound: f64 = (0..m.ncols())
        .map(|j| linalg::real::sqrt(m.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .product();
    if bound == 0.0 {
        return 0.0;
    }
    m.clone().lu().determinant().norm() / bound
}

/// A representation of the framed cyclic quiver.
#[derive(Debug, Clone, PartialEq)]
pub struct RepPoint {
    spec: ModelSpec,
    x: Vec<CMat>,
    y: Vec<CMat>,
    v: Vec<CMat>,
    w: Vec<CMat>,
    z: Vec<Option<CMat>>,
}

impl RepPoint {
    pub fn new(spec: ModelSpec, x: Vec<CMat>, y: Vec<CMat>, v: Vec<CMat>, w: Vec<CMat>) -> Result<Self> {
        let (m, d, n) = (spec.m, spec.d, spec.n);
        if x.len() != m || y.len() != m || v.len() != d || w.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "expected {m} X, {m} Y, {d} V, {d} W blocks"
            )));
        }
        for (name, blocks, shape) in [("X", &x, (n, n)), ("Y", &y, (n, n)), ("V", &v, (1, n)), ("W", &w, (n, 1))] {
            for (i, b) in blocks.iter().enumerate() {
                if b.shape() != shape {
                    return Err(Error::DimensionMismatch(format!(
                        "{name}[{i}] has shape {:?}, expected {shape:?}",
                        b.shape()
                    )));
                }
            }
        }
        let id = identity(n);
        for s in 0..m {
            if relative_det(&(&id + &x[s] * &y[s])) <= DET_TOL {
                return Err(Error::SingularFactor(format!("Id + X_{s} Y_{s}")));
            }
        }
        for a in 0..d {
            if relative_det(&(&id + &w[a] * &v[a])) <= DET_TOL {
                return Err(Error::SingularFactor(format!("Id + W_{} V_{}", a + 1, a + 1)));
            }
        }
        let z = (0..m)
            .map(|s| inverse(&x[s], "X").ok().map(|xi| &y[s] + xi))
            .collect();
        Ok(Self { spec, x, y, v, w, z })
    }

    /// Builds a point from `(X, Z)` data, with `Y_s = Z_s - X_s^{-1}`. The
    /// supplied `Z` blocks are kept as given rather than recomputed.
    pub fn from_xz(spec: ModelSpec, x: Vec<CMat>, z: Vec<CMat>, v: Vec<CMat>, w: Vec<CMat>) -> Result<Self> {
        let mut y = Vec::with_capacity(x.len());
        for (s, (xs, zs)) in x.iter().zip(&z).enumerate() {
            let xi = inverse(xs, "X").map_err(|_| Error::SingularX(s))?;
            y.push(zs - xi);
        }
        let mut p = Self::new(spec, x, y, v, w)?;
        p.z = z.into_iter().map(Some).collect();
        Ok(p)
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }
    pub fn x(&self, s: usize) -> &CMat {
        &self.x[s]
    }
    pub fn y(&self, s: usize) -> &CMat {
        &self.y[s]
    }
    pub fn v(&self, alpha: usize) -> &CMat {
        &self.v[alpha]
    }
    pub fn w(&self, alpha: usize) -> &CMat {
        &self.w[alpha]
    }
    pub fn xs(&self) -> &[CMat] {
        &self.x
    }
    pub fn ys(&self) -> &[CMat] {
        &self.y
    }
    pub fn vs(&self) -> &[CMat] {
        &self.v
    }
    pub fn ws(&self) -> &[CMat] {
        &self.w
    }
    /// `Z_s = Y_s + X_s^{-1}`, available when `X_s` is invertible.
    pub fn z(&self, s: usize) -> Result<&CMat> {
        self.z[s].as_ref().ok_or(Error::SingularX(s))
    }
    pub fn zs(&self) -> Result<Vec<CMat>> {
        (0..self.spec.m).map(|s| self.z(s).cloned()).collect()
    }
    /// Same point with the block `X_s` replaced.
    pub fn with_x(&self, s: usize, xs: CMat) -> Result<Self> {
        let mut x = self.x.clone();
        x[s] = xs;
        Self::new(self.spec, x, self.y.clone(), self.v.clone(), self.w.clone())
    }
}

/// Positions `x_i` and spin coordinates `a_i^alpha`, `c_i^alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCoordinates {
    x: Vec<C64>,
    a: CMat,
    c: CMat,
}

impl LocalCoordinates {
    /// Requires every row of `a` to sum to one.
    pub fn new(x: Vec<C64>, a: CMat, c: CMat) -> Result<Self> {
        let n = x.len();
        if a.nrows() != n || c.ncols() != n || a.ncols() != c.nrows() || a.ncols() == 0 {
            return Err(Error::DimensionMismatch("coordinates: a is n x d, c is d x n".into()));
        }
        for i in 0..n {
            let s: C64 = a.row(i).iter().sum();
            if (s - cr(1.0)).norm() > 1e-12 {
                return Err(Error::RowSum(i));
            }
        }
        Ok(Self { x, a, c })
    }

    /// Rescales each row of `a` to sum to one; rows summing to (nearly) zero
    /// are rejected.
    pub fn normalized(x: Vec<C64>, mut a: CMat, c: CMat) -> Result<Self> {
        for i in 0..a.nrows() {
            let s: C64 = a.row(i).iter().sum();
            if s.norm() < 1e-12 {
                return Err(Error::RowSum(i));
            }
            for al in 0..a.ncols() {
                a[(i, al)] /= s;
            }
        }
        Self::new(x, a, c)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
    pub fn d(&self) -> usize {
        self.a.ncols()
    }
    pub fn x(&self) -> &[C64] {
        &self.x
    }
    /// `n x d`, entry `(i, alpha)` is `a_i^alpha`.
    pub fn a(&self) -> &CMat {
        &self.a
    }
    /// `d x n`, entry `(alpha, j)` is `c_j^alpha`.
    pub fn c(&self) -> &CMat {
        &self.c
    }
    /// Spin matrix `f_ij = sum_alpha a_i^alpha c_j^alpha`.
    pub fn f(&self) -> CMat {
        &self.a * &self.c
    }
    pub fn a_diag(&self) -> CMat {
        CMat::from_diagonal(&DVector::from_vec(self.x.clone()))
    }
    /// Lax matrix `B_ij = t f_ij / (x_i / x_j - t)`.
    pub fn lax_b(&self, t: C64) -> CMat {
        let f = self.f();
        let n = self.n();
        CMat::from_fn(n, n, |i, j| t * f[(i, j)] / (self.x[i] / self.x[j] - t))
    }

    /// Perturbed copy used by finite differences; the row-sum constraint is
    /// not re-imposed.
    pub fn shifted(&self, id: CoordId, h: C64) -> Self {
        let mut out = self.clone();
        match id {
            CoordId::X(i) => out.x[i] += h,
            CoordId::A(i, al) => out.a[(i, al)] += h,
            CoordId::C(i, al) => out.c[(al, i)] += h,
        }
        out
    }

    pub fn get(&self, id: CoordId) -> C64 {
        match id {
            CoordId::X(i) => self.x[i],
            CoordId::A(i, al) => self.a[(i, al)],
            CoordId::C(i, al) => self.c[(al, i)],
        }
    }

    /// All coordinate ids in a fixed order.
    pub fn ids(&self) -> Vec<CoordId> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            out.push(CoordId::X(i));
        }
        for i in 0..self.n() {
            for al in 0..self.d() {
                out.push(CoordId::A(i, al));
            }
        }
        for i in 0..self.n() {
            for al in 0..self.d() {
                out.push(CoordId::C(i, al));
            }
        }
        out
    }
}

/// Membership test for the regular locus with a relative margin.
pub fn check_regular_positions(x: &[C64], t: C64, margin: f64) -> Result<()> {
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for (i, xi) in x.iter().enumerate() {
        if xi.norm() <= margin {
            return Err(Error::RegularityViolation(format!("x_{i} = 0")));
        }
        for (j, xj) in x.iter().enumerate() {
            if i == j {
                continue;
            }
            if (xi - xj).norm() <= margin * scale {
                return Err(Error::RegularityViolation(format!("x_{i} = x_{j}")));
            }
            if (xi - t * xj).norm() <= margin * scale * t.norm().max(1.0) {
                return Err(Error::RegularityViolation(format!("x_{i} = t x_{j}")));
            }
        }
    }
    Ok(())
}

fn check_params(spec: &ModelSpec, params: &ParameterSet) -> Result<()> {
    if params.m() != spec.m || params.n() != spec.n {
        return Err(Error::DimensionMismatch(format!(
            "parameters are for (m, n) = ({}, {}), model has ({}, {})",
            params.m(),
            params.n(),
            spec.m,
            spec.n
        )));
    }
    Ok(())
}

/// Representation point attached to local coordinates.
pub fn point_from_coordinates(coords: &LocalCoordinates, params: &ParameterSet, spec: &ModelSpec) -> Result<RepPoint> {
    check_params(spec, params)?;
    if coords.n() != spec.n || coords.d() != spec.d {
        return Err(Error::DimensionMismatch("coordinates do not match the model".into()));
    }
    let t = params.t();
    check_regular_positions(coords.x(), t, 1e-12)?;
    let (m, n, d) = (spec.m, spec.n, spec.d);
    let a_mat = coords.a_diag();
    let a_inv = CMat::from_diagonal(&DVector::from_iterator(n, coords.x().iter().map(|z| z.inv())));
    let b = coords.lax_b(t);
    let id = identity(n);

    let mut x = Vec::with_capacity(m);
    let mut z = Vec::with_capacity(m);
    for s in 0..m {
        if s + 1 < m {
            x.push(id.clone());
            z.push(&b * params.t_s(s as isize));
        } else {
            x.push(a_mat.clone());
            z.push(&a_inv * &b * t);
        }
    }
    let am = &a_inv * coords.a();
    let cm = coords.c();
    let z_last_inv = inverse(&z[m - 1], "Z_{m-1}").map_err(|e| Error::Degenerate(format!("{e}")))?;

    let w: Vec<CMat> = (0..d).map(|al| am.columns(al, 1).into_owned()).collect();
    let mut v: Vec<CMat> = Vec::with_capacity(d);
    // Running product (Id + W_1 V_1)^{-1} ... (Id + W_{alpha-1} V_{alpha-1})^{-1}.
    let mut tail = id.clone();
    for al in 0..d {
        let row = cm.rows(al, 1).into_owned();
        let va = (&row * &z_last_inv * &tail) * t;
        let factor = &id + &w[al] * &va;
        let factor_inv = inverse(&factor, "Id + W V").map_err(|_| Error::Degenerate(format!("Id + W_{} V_{}", al + 1, al + 1)))?;
        tail *= factor_inv;
        v.push(va);
    }
    RepPoint::from_xz(*spec, x, z, v, w)
}

/// Frobenius norms of the moment-map residuals, vertices `0..m` then the
/// framing vertex.
pub fn moment_residual(point: &RepPoint, params: &ParameterSet) -> Result<Vec<f64>> {
    let spec = point.spec();
    check_params(&spec, params)?;
    let (m, n) = (spec.m, spec.n);
    let id = identity(n);
    let mut out = Vec::with_capacity(m + 1);
    for s in 0..m {
        let prev = (s + m - 1) % m;
        let right = &id + point.y(prev) * point.x(prev);
        let theta = (&id + point.x(s) * point.y(s)) * inverse(&right, "Id + Y X")?;
        let target = if s == 0 {
            let mut prod = id.clone();
            for al in (0..spec.d).rev() {
                prod *= &id + point.w(al) * point.v(al);
            }
            prod * params.q()[0]
        } else {
            &id * params.q()[s]
        };
        out.push(frobenius(&(theta - target)));
    }
    let mut scalar = cr(1.0);
    for al in 0..spec.d {
        scalar *= cr(1.0) + (point.v(al) * point.w(al))[(0, 0)];
    }
    out.push((scalar - params.q_inf()).norm());
    Ok(out)
}

/// Gauge action of `(g_0, ..., g_{m-1})`.
pub fn gauge_act(g: &[CMat], point: &RepPoint) -> Result<RepPoint> {
    let spec = point.spec();
    let m = spec.m;
    if g.len() != m || g.iter().any(|gs| gs.shape() != (spec.n, spec.n)) {
        return Err(Error::DimensionMismatch("gauge element needs m blocks of size n".into()));
    }
    let mut gi = Vec::with_capacity(m);
    for (s, gs) in g.iter().enumerate() {
        gi.push(inverse(gs, "g").map_err(|_| Error::SingularGauge(s))?);
    }
    let x = (0..m).map(|s| &g[s] * point.x(s) * &gi[(s + 1) % m]).collect();
    let y = (0..m).map(|s| &g[(s + 1) % m] * point.y(s) * &gi[s]).collect();
    let v = point.vs().iter().map(|va| va * &gi[0]).collect();
    let w = point.ws().iter().map(|wa| &g[0] * wa).collect();
    RepPoint::new(spec, x, y, v, w)
}

/// Spin matrices of a point: column `alpha` of `am` is `W_alpha`, row `alpha`
/// of `cm` is `t^{-1} V_alpha (Id + W_{alpha-1} V_{alpha-1}) ... (Id + W_1 V_1) Z_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinData {
    pub am: CMat,
    pub cm: CMat,
    pub s: CMat,
}

pub fn spin_data(point: &RepPoint, params: &ParameterSet) -> Result<SpinData> {
    let spec = point.spec();
    check_params(&spec, params)?;
    let (n, d) = (spec.n, spec.d);
    let z_last = point.z(spec.m - 1).map_err(|_| Error::SingularFactor("X_{m-1}".into()))?;
    let id = identity(n);
    let mut am = CMat::zeros(n, d);
    let mut cm = CMat::zeros(d, n);
    let mut head = id.clone();
    let tinv = params.t().inv();
    for al in 0..d {
        am.set_column(al, &point.w(al).column(0));
        let row = point.v(al) * &head * z_last * tinv;
        cm.set_row(al, &row.row(0));
        head = (&id + point.w(al) * point.v(al)) * head;
    }
    let s = &am * &cm;
    Ok(SpinData { am, cm, s })
}

/// The data `(A, B, bold A, bold C)` on the Jordan side.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedQuadruple {
    pub a: CMat,
    pub b: CMat,
    pub big_a: CMat,
    pub big_c: CMat,
}

impl ReducedQuadruple {
    /// Residual of `B A^{-1} - t A^{-1} B - t A^{(m)} C^{(m)}`, relative to
    /// the size of `B A^{-1}`.
    pub fn moment_identity_residual(&self, t: C64) -> Result<f64> {
        let ainv = inverse(&self.a, "A")?;
        let am = &ainv * &self.big_a;
        let lhs = &self.b * &ainv;
        let rhs = (&ainv * &self.b + am * &self.big_c) * t;
        Ok(frobenius(&(&lhs - rhs)) / frobenius(&lhs).max(1.0))
    }
}

/// Gauge bringing a point to diagonal normal form: `X_s = Id` for
/// `s <= m - 2`, `X_{m-1}` diagonal with eigenvalues sorted by `(Re, Im)`, and
/// the rows of `X_{m-1} A^{(m)}` summing to one. Returns the gauge blocks.
pub fn normal_form_gauge(point: &RepPoint, params: &ParameterSet) -> Result<Vec<CMat>> {
    let spec = point.spec();
    check_params(&spec, params)?;
    let (m, n) = (spec.m, spec.n);
    for s in 0..m {
        if point.z(s).is_err() {
            return Err(Error::SingularX(s));
        }
    }
    // g_0 = Id, g_{s+1} = g_s X_s leaves X_{m-1} -> X_0 ... X_{m-1}.
    let mut g = Vec::with_capacity(m);
    g.push(identity(n));
    for s in 0..m - 1 {
        let next = &g[s] * point.x(s);
        g.push(next);
    }
    let mut hol = identity(n);
    for s in 0..m {
        hol *= point.x(s);
    }
    let (lambda, p) = linalg::eigen(&hol).map_err(|_| Error::SingularX(m - 1))?;
    let pinv = inverse(&p, "eigenvectors")?;
    let sd = spin_data(point, params)?;
    let am = &pinv * &sd.am;
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let row: C64 = am.row(i).iter().sum::<C64>() * lambda[i];
        if row.norm() < 1e-12 {
            return Err(Error::Degenerate(format!("row {i} of A has zero sum")));
        }
        scale.push(row.inv());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        lambda[i]
            .re
            .partial_cmp(&lambda[j].re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(lambda[i].im.partial_cmp(&lambda[j].im).unwrap_or(core::cmp::Ordering::Equal))
    });
    // Row k of the common factor is scale[order[k]] times row order[k] of P^{-1}.
    let mut common = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        common.set_row(k, &(pinv.row(i) * scale[i]));
    }
    Ok(g.iter().map(|gs| &common * gs).collect())
}

/// Quadruple `(A, B, A^{(m)}, C^{(m)})` of a point, read off in the diagonal
/// normal form.
pub fn reduced_quadruple(point: &RepPoint, params: &ParameterSet) -> Result<ReducedQuadruple> {
    let g = normal_form_gauge(point, params)?;
    let normal = gauge_act(&g, point)?;
    let m = point.spec().m;
    let a = normal.x(m - 1).clone();
    let b = if m >= 2 {
        normal.z(0)? / params.q()[0]
    } else {
        &a * normal.z(0)? / params.t()
    };
    let sd = spin_data(&normal, params)?;
    let quad = ReducedQuadruple { big_a: &a * &sd.am, big_c: sd.cm, a, b };
    let res = quad.moment_identity_residual(params.t())?;
    if res > 1e-9 {
        return Err(Error::IllConditioned(format!("reduced moment identity residual {res:.3e}")));
    }
    Ok(quad)
}

/// Local coordinates of a point in the image of the coordinate chart.
pub fn coordinates_of(point: &RepPoint, params: &ParameterSet) -> Result<LocalCoordinates> {
    let q = reduced_quadruple(point, params)?;
    let x = q.a.diagonal().iter().copied().collect();
    LocalCoordinates::normalized(x, q.big_a, q.big_c)
}

/// A coordinate function on the chart. Framing indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoordId {
    X(usize),
    /// `a_i^alpha` as `A(i, alpha)`.
    A(usize, usize),
    /// `c_i^alpha` as `C(i, alpha)`.
    C(usize, usize),
}

/// Coordinate Poisson bracket `{u, v}` on the chart.
///
/// The displayed formulas are evaluated in both orders and antisymmetrized,
/// which makes `{u, v} = -{v, u}` hold exactly.
pub fn coord_bracket(coords: &LocalCoordinates, params: &ParameterSet, u: CoordId, v: CoordId) -> C64 {
    let b = coords.lax_b(params.t());
    (raw_coord_bracket(coords, &b, u, v) - raw_coord_bracket(coords, &b, v, u)) * 0.5
}

/// The displayed formulas for one orientation; pairs given only in the other
/// orientation are obtained by a sign flip.
pub fn raw_coord_bracket(coords: &LocalCoordinates, b: &CMat, u: CoordId, v: CoordId) -> C64 {
    use CoordId::*;
    let x = coords.x();
    let a = |i: usize, al: usize| coords.a()[(i, al)];
    let c = |i: usize, al: usize| coords.c()[(al, i)];
    let d = coords.d();
    let zero = cr(0.0);
    let half = 0.5;
    let cot = |j: usize, i: usize| -> C64 {
        if i == j {
            zero
        } else {
            (x[j] + x[i]) / (x[j] - x[i])
        }
    };
    let delta = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
    match (u, v) {
        (X(_), X(_)) | (A(..), X(_)) | (X(_), A(..)) => zero,
        (C(j, al), X(i)) => -c(j, al) * x[i] * delta(i, j),
        (X(i), C(j, al)) => c(j, al) * x[i] * delta(i, j),
        (A(j, ga), A(i, al)) => {
            let mut r = cot(j, i) * half * (a(j, ga) * a(i, al) + a(i, ga) * a(j, al) - a(j, ga) * a(j, al) - a(i, ga) * a(i, al));
            r += (a(j, ga) * a(i, al) + a(i, ga) * a(j, al)) * (half * order_sign(al, ga));
            for sg in 0..d {
                r += a(i, al) * (a(j, ga) * a(i, sg) + a(i, ga) * a(j, sg)) * (half * order_sign(ga, sg));
            }
            for ka in 0..d {
                r -= a(j, ga) * (a(j, ka) * a(i, al) + a(i, ka) * a(j, al)) * (half * order_sign(al, ka));
            }
            r
        }
        (C(j, ep), A(i, al)) => {
            let mut r = b[(i, j)] * delta(ep, al) - a(i, al) * b[(i, j)];
            r += cot(j, i) * half * c(j, ep) * (a(j, al) - a(i, al));
            if al < ep {
                r -= a(i, al) * c(j, ep);
            }
            for la in 0..ep {
                r -= a(i, al) * a(i, la) * (c(j, la) - c(j, ep));
                r += a(i, la) * c(j, la) * delta(ep, al);
            }
            for ka in 0..d {
                r += c(j, ep) * (a(j, ka) * a(i, al) + a(i, ka) * a(j, al)) * (half * order_sign(al, ka));
            }
            r
        }
        (A(..), C(..)) => -raw_coord_bracket(coords, b, v, u),
        (C(j, ep), C(i, be)) => {
            let mut r = cot(j, i) * half * (c(j, ep) * c(i, be) + c(i, ep) * c(j, be));
            r += c(i, be) * b[(i, j)] - c(j, ep) * b[(j, i)];
            r += (c(i, ep) * c(j, be) - c(j, ep) * c(i, be)) * (half * order_sign(ep, be));
            for la in 0..ep {
                r += c(i, be) * a(i, la) * (c(j, la) - c(j, ep));
            }
            for mu in 0..be {
                r -= c(j, ep) * a(j, mu) * (c(i, mu) - c(i, be));
            }
            r
        }
    }
}

/// The functions `f_k = tr A^k` and `g_k^{alpha beta} = tr(bold A E_{alpha beta} bold C A^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgFunction {
    F(usize),
    G { k: usize, alpha: usize, beta: usize },
}

/// `bold A E_{alpha beta} bold C`: column `alpha` of `a` times row `beta` of `c`.
pub fn spin_unit(big_a: &CMat, big_c: &CMat, alpha: usize, beta: usize) -> CMat {
    big_a.column(alpha) * big_c.row(beta)
}

pub fn fg_value(q: &ReducedQuadruple, f: FgFunction) -> C64 {
    match f {
        FgFunction::F(k) => trace(&matpow(&q.a, k)),
        FgFunction::G { k, alpha, beta } => trace(&(spin_unit(&q.big_a, &q.big_c, alpha, beta) * matpow(&q.a, k))),
    }
}

/// Value of an `f`/`g` function directly in coordinates.
pub fn fg_value_coords(coords: &LocalCoordinates, f: FgFunction) -> C64 {
    let x = coords.x();
    match f {
        FgFunction::F(k) => x.iter().map(|xi| xi.powi(k as i32)).sum(),
        FgFunction::G { k, alpha, beta } => (0..coords.n())
            .map(|i| coords.a()[(i, alpha)] * coords.c()[(beta, i)] * x[i].powi(k as i32))
            .sum(),
    }
}

/// Closed-form Poisson bracket of two `f`/`g` functions.
pub fn fg_bracket(q: &ReducedQuadruple, u: FgFunction, v: FgFunction) -> C64 {
    use FgFunction::*;
    match (u, v) {
        (F(_), F(_)) => cr(0.0),
        (F(k), G { k: l, alpha, beta }) => fg_value(q, G { k: k + l, alpha, beta }) * k as f64,
        (G { .. }, F(_)) => -fg_bracket(q, v, u),
        (G { k, alpha: ga, beta: ep }, G { k: l, alpha, beta }) => closed_form_fg_bracket(q, k, l, alpha, beta, ga, ep),
    }
}

/// `{g_k^{gamma eps}, g_l^{alpha beta}}` in closed form.
pub fn closed_form_fg_bracket(
    q: &ReducedQuadruple,
    k: usize,
    l: usize,
    alpha: usize,
    beta: usize,
    gamma: usize,
    eps: usize,
) -> C64 {
    let p = |i: usize, j: usize| spin_unit(&q.big_a, &q.big_c, i, j);
    let pw: Vec<CMat> = {
        let mut v = Vec::with_capacity(k + l + 1);
        v.push(identity(q.a.nrows()));
        for r in 1..=k + l {
            let next = &v[r - 1] * &q.a;
            v.push(next);
        }
        v
    };
    let tr4 = |m1: &CMat, e1: usize, m2: &CMat, e2: usize| trace(&(m1 * &pw[e1] * m2 * &pw[e2]));
    let (p_ab, p_ge, p_ae, p_gb) = (p(alpha, beta), p(gamma, eps), p(alpha, eps), p(gamma, beta));
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };

    let mut total = cr(0.0);
    let pair = |r: usize| tr4(&p_ab, r, &p_ge, k + l - r) + tr4(&p_ab, k + l - r, &p_ge, r);
    for r in 1..=k {
        total += pair(r) * 0.5;
    }
    for r in 1..=l {
        total -= pair(r) * 0.5;
    }
    let mixed = tr4(&p_ae, k, &p_gb, l);
    total += (tr4(&p_ge, k, &p_ab, l) + mixed) * (0.5 * order_sign(alpha, gamma));
    total += (tr4(&p_ab, k, &p_ge, l) - mixed) * (0.5 * order_sign(eps, beta));
    total += mixed * (0.5 * (order_sign(eps, alpha) + delta(alpha, eps)));
    total -= mixed * (0.5 * (order_sign(beta, gamma) + delta(beta, gamma)));
    if alpha == eps {
        let mut bracket = q.b.clone();
        for la in 0..eps {
            bracket += p(la, la);
        }
        total += tr4(&bracket, k, &p_gb, l);
    }
    if beta == gamma {
        let mut bracket = q.b.clone();
        for mu in 0..beta {
            bracket += p(mu, mu);
        }
        total -= tr4(&bracket, l, &p_ae, k);
    }
    total
}

/// Poisson bracket of two `f`/`g` functions computed from the coordinate
/// brackets by the chain rule, with central differences of step `h` for the
/// partial derivatives.
pub fn fg_bracket_chain_rule(coords: &LocalCoordinates, params: &ParameterSet, u: FgFunction, v: FgFunction, h: f64) -> C64 {
    let ids = coords.ids();
    let grad = |f: FgFunction| -> Vec<C64> {
        ids.iter()
            .map(|&id| {
                let plus = fg_value_coords(&coords.shifted(id, cr(h)), f);
                let minus = fg_value_coords(&coords.shifted(id, cr(-h)), f);
                (plus - minus) / (2.0 * h)
            })
            .collect()
    };
    let gu = grad(u);
    let gv = grad(v);
    let mut total = cr(0.0);
    for (p, &idp) in ids.iter().enumerate() {
        if gu[p] == cr(0.0) {
            continue;
        }
        for (r, &idr) in ids.iter().enumerate() {
            if gv[r] == cr(0.0) {
                continue;
            }
            total += gu[p] * gv[r] * coord_bracket(coords, params, idp, idr);
        }
    }
    total
}

/// Maximum entrywise distance between two matrices, used by tests and the
/// report.
pub fn matrix_distance(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}
