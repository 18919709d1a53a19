//! Hamiltonian flows: the three explicitly integrable flows, an RK4 oracle on
//! the matching vector fields, and conservation tables.
//!
//! Flows are normalized as `d/dt = (1/K) {tr U^K, -}`, so that the flow of
//! `tr Z^k` moves `X` by `-X Z^k`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bracket::{loday_power_matrix, BracketTable, Element, Evaluator, Letter, Vertex, Word};
use crate::error::{Error, Result};
use crate::hamiltonians::{assemble, extract, family_element, Family};
use crate::linalg::{self, block, cr, expm, identity, inverse, matpow, place, trace, CMat, C64};
use crate::quiver::ParameterSet;
use crate::rep_space::{moment_residual, RepPoint};

/// The Hamiltonian generating a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hamiltonian {
    /// `tr Z^k`, `m | k`.
    TrZ(usize),
    /// `tr Y^k`, `m | k`.
    TrY(usize),
    /// `tr (1 + XY)^k`, any `k >= 1`.
    TrT(usize),
    /// `tr M^j` for the generator `M` of a family at spectral parameter `eta`.
    Family { family: Family, j: usize, eta: C64 },
}

impl Hamiltonian {
    /// Power `K` of the generator.
    pub fn power(&self) -> usize {
        match *self {
            Hamiltonian::TrZ(k) | Hamiltonian::TrY(k) | Hamiltonian::TrT(k) => k,
            Hamiltonian::Family { j, .. } => j,
        }
    }

    /// Family, spectral parameter and power of the equivalent family member.
    pub fn as_family(&self) -> (Family, C64, usize) {
        match *self {
            Hamiltonian::TrZ(k) => (Family::Four, cr(0.0), k),
            Hamiltonian::TrY(k) => (Family::Three, cr(0.0), k),
            Hamiltonian::TrT(k) => (Family::Two, cr(0.0), k),
            Hamiltonian::Family { family, j, eta } => (family, eta, j),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let (family, _, k) = self.as_family();
        if k == 0 {
            return Err(Error::InvalidSpec("flow power must be at least 1".into()));
        }
        if family != Family::Two && k % m != 0 {
            return Err(Error::InvalidSpec(format!("power {k} is not a multiple of m = {m}")));
        }
        Ok(())
    }
}

/// A flow request: Hamiltonian, total (complex) time and the number of
/// oracle steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    pub hamiltonian: Hamiltonian,
    pub time: C64,
    pub steps: usize,
}

impl FlowSpec {
    pub fn new(hamiltonian: Hamiltonian, time: C64, steps: usize, m: usize) -> Result<Self> {
        hamiltonian.validate(m)?;
        if steps == 0 {
            return Err(Error::InvalidSpec("at least one oracle step is required".into()));
        }
        Ok(Self { hamiltonian, time, steps })
    }
}

fn check_power(m: usize, k: usize) -> Result<()> {
    if k == 0 || !k.is_multiple_of(m) {
        return Err(Error::InvalidSpec(format!("power {k} is not a positive multiple of m = {m}")));
    }
    Ok(())
}

/// Flow of `tr Z^k`: `X(t) = X(0) exp(-t Z(0)^k)`, with `Z`, `V`, `W` copied.
pub fn flow_z(point: &RepPoint, k: usize, time: C64) -> Result<RepPoint> {
    let spec = point.spec();
    let (m, n) = (spec.m, spec.n);
    check_power(m, k)?;
    let zs = point.zs()?;
    let z = assemble(&zs, n, false);
    let x = assemble(point.xs(), n, true) * expm(&(matpow(&z, k) * -time));
    RepPoint::from_xz(spec, extract(&x, m, n, true), zs, point.vs().to_vec(), point.ws().to_vec())
}

/// `sum_{j >= 1} a^j Y^{jk-1} / j!` for `a = -tau`, read off the exponential
/// of `[[a Y^k, Id], [0, 0]]`; no inverse of `Y` is needed.
fn shifted_exponential(y: &CMat, k: usize, a: C64) -> (CMat, CMat) {
    let dim = y.nrows();
    let yk = matpow(y, k) * a;
    let mut aug = CMat::zeros(2 * dim, 2 * dim);
    place(&mut aug, 0, 0, &yk);
    place(&mut aug, 0, dim, &identity(dim));
    let e = expm(&aug);
    let phi1 = block(&e, 0, dim, dim, dim);
    (block(&e, 0, 0, dim, dim), matpow(y, k - 1) * phi1 * a)
}

/// Flow of `tr Y^k`: `X(tau) = X(0) exp(-tau Y^k) + Y^{-1}(exp(-tau Y^k) - Id)`.
pub fn flow_y(point: &RepPoint, k: usize, time: C64) -> Result<RepPoint> {
    let spec = point.spec();
    let (m, n) = (spec.m, spec.n);
    check_power(m, k)?;
    let y = assemble(point.ys(), n, false);
    let (e, shift) = shifted_exponential(&y, k, -time);
    let x = assemble(point.xs(), n, true) * e + shift;
    RepPoint::new(spec, extract(&x, m, n, true), point.ys().to_vec(), point.vs().to_vec(), point.ws().to_vec())
}

/// Flow of `tr (1 + XY)^k`: `X(t) = exp(-t T^k) X(0)` and
/// `Y(t) = X(t)^{-1} (T - 1)` blockwise.
pub fn flow_t(point: &RepPoint, k: usize, time: C64) -> Result<RepPoint> {
    let spec = point.spec();
    let (m, n) = (spec.m, spec.n);
    if k == 0 {
        return Err(Error::InvalidSpec("flow power must be at least 1".into()));
    }
    let x0 = assemble(point.xs(), n, true);
    let t = identity(m * n) + &x0 * assemble(point.ys(), n, false);
    let x = expm(&(matpow(&t, k) * -time)) * x0;
    let xs = extract(&x, m, n, true);
    let id = identity(n);
    let mut ys = Vec::with_capacity(m);
    for (s, xs_s) in xs.iter().enumerate() {
        let xi = inverse(xs_s, "X(t)").map_err(|_| Error::SingularFactor(format!("X_{s} at the flow endpoint")))?;
        ys.push(xi * (block(&t, s * n, s * n, n, n) - &id));
    }
    RepPoint::new(spec, xs, ys, point.vs().to_vec(), point.ws().to_vec())
}

/// The closed-form flow for `tr Z^k`, `tr Y^k` and `tr (1 + XY)^k`.
pub fn closed_form_flow(point: &RepPoint, hamiltonian: Hamiltonian, time: C64) -> Result<RepPoint> {
    match hamiltonian {
        Hamiltonian::TrZ(k) => flow_z(point, k, time),
        Hamiltonian::TrY(k) => flow_y(point, k, time),
        Hamiltonian::TrT(k) => flow_t(point, k, time),
        Hamiltonian::Family { .. } => Err(Error::InvalidSpec("family flows have no closed form".into())),
    }
}

/// Sampled trajectory of the oracle. When a factor becomes singular the run
/// stops and the samples computed so far are kept.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<C64>,
    pub points: Vec<RepPoint>,
    /// Largest moment-map residual at each sample.
    pub moment_residuals: Vec<f64>,
    pub aborted: Option<Error>,
}

impl Trajectory {
    pub fn endpoint(&self) -> &RepPoint {
        self.points.last().expect("a trajectory holds its initial point")
    }
}

fn axpy(state: &[CMat], dir: &[CMat], h: C64) -> Vec<CMat> {
    state.iter().zip(dir).map(|(s, d)| s + d * h).collect()
}

fn rk4_step<F>(state: &[CMat], h: C64, field: &F) -> Result<Vec<CMat>>
where
    F: Fn(&[CMat]) -> Result<Vec<CMat>>,
{
    let k1 = field(state)?;
    let k2 = field(&axpy(state, &k1, h * 0.5))?;
    let k3 = field(&axpy(state, &k2, h * 0.5))?;
    let k4 = field(&axpy(state, &k3, h))?;
    Ok(state
        .iter()
        .enumerate()
        .map(|(i, s)| s + (&k1[i] + &k2[i] * cr(2.0) + &k3[i] * cr(2.0) + &k4[i]) * (h / 6.0))
        .collect())
}

/// The variable evolved alongside `X` by a lemma vector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Partner {
    Z,
    Y,
    T,
}

fn theta(x: &CMat, y: &CMat) -> Result<CMat> {
    let id = identity(x.nrows());
    Ok((&id + x * y) * inverse(&(&id + y * x), "1 + YX")?)
}

/// Total-matrix vector fields for `tr (Z(1 + eta Theta))^K`,
/// `tr (Y(1 + eta Theta))^K` and `tr ((1 + XY)(1 + eta Theta^{-1}))^K`,
/// scaled by `1/K`. The state is `[X, partner]`.
fn lemma_field(partner: Partner, k: usize, eta: C64, state: &[CMat]) -> Result<Vec<CMat>> {
    let (x, p) = (&state[0], &state[1]);
    let id = identity(x.nrows());
    match partner {
        Partner::Z => {
            let y = p - inverse(x, "X")?;
            let th = theta(x, &y)?;
            let u = p * (&id + &th * eta);
            let uk = matpow(&u, k - 1);
            let dx = -(&th * &uk * p * x) * eta - x * &uk * p;
            let dz = -(p * &uk * p) + &uk * p * p;
            Ok(alloc::vec![dx, dz])
        }
        Partner::Y => {
            let th = theta(x, p)?;
            let u = p * (&id + &th * eta);
            let uk = matpow(&u, k - 1);
            let dx = -&uk - x * &uk * p - &th * &uk * (&id + p * x) * eta;
            let dy = -(p * &uk * p) + &uk * p * p;
            Ok(alloc::vec![dx, dy])
        }
        Partner::T => {
            let y = inverse(x, "X")? * (p - &id);
            let thi = inverse(&theta(x, &y)?, "Theta")?;
            let u = p * (&id + &thi * eta);
            let uk = matpow(&u, k - 1);
            let dx = -(&uk * p * x) - x * &thi * &uk * p * eta;
            let dt = -(&uk * p * p) + p * &uk * p;
            Ok(alloc::vec![dx, dt])
        }
    }
}

/// Velocity of every arrow block under `(1/K) {tr f^K, -}`, read off the
/// engine's Loday bracket. Order: `X_s`, `Y_s`, `V_alpha`, `W_alpha`.
pub fn engine_velocity(point: &RepPoint, table: &BracketTable, f: &Element, k: usize) -> Result<Vec<CMat>> {
    let spec = point.spec();
    let (m, n, d) = (spec.m, spec.n, spec.d);
    let ev = Evaluator::new(point);
    let off = |v: Vertex| match v {
        Vertex::Cycle(s) => s * n,
        Vertex::Infinity => m * n,
    };
    let letters: Vec<Letter> = (0..m)
        .map(Letter::X)
        .chain((0..m).map(Letter::Y))
        .chain((0..d).map(Letter::V))
        .chain((0..d).map(Letter::W))
        .collect();
    let mut out = Vec::with_capacity(letters.len());
    for l in letters {
        let g = Element::word(Word::letter(l, m));
        let full = loday_power_matrix(&ev, table, f, k, &g)? * cr(1.0 / k as f64);
        let (r, c) = (off(l.tail(m)), off(l.head(m)));
        let rows = if l.tail(m) == Vertex::Infinity { 1 } else { n };
        let cols = if l.head(m) == Vertex::Infinity { 1 } else { n };
        out.push(block(&full, r, c, rows, cols));
    }
    Ok(out)
}

fn point_from_blocks(template: &RepPoint, blocks: &[CMat]) -> Result<RepPoint> {
    let spec = template.spec();
    let (m, d) = (spec.m, spec.d);
    RepPoint::new(
        spec,
        blocks[..m].to_vec(),
        blocks[m..2 * m].to_vec(),
        blocks[2 * m..2 * m + d].to_vec(),
        blocks[2 * m + d..].to_vec(),
    )
}

fn blocks_of(point: &RepPoint) -> Vec<CMat> {
    let mut out = point.xs().to_vec();
    out.extend_from_slice(point.ys());
    out.extend_from_slice(point.vs());
    out.extend_from_slice(point.ws());
    out
}

/// One oracle integrator: a state encoding, its vector field and decoding.
enum Scheme {
    Lemma { partner: Partner, k: usize, eta: C64 },
    Engine { table: BracketTable, f: Element, k: usize },
}

impl Scheme {
    fn for_hamiltonian(h: Hamiltonian, m: usize, d: usize) -> Self {
        let (family, eta, k) = h.as_family();
        match family {
            Family::Four => Scheme::Lemma { partner: Partner::Z, k, eta },
            Family::Three => Scheme::Lemma { partner: Partner::Y, k, eta },
            Family::Two => Scheme::Lemma { partner: Partner::T, k, eta },
            Family::One => Scheme::Engine { table: BracketTable::new(m, d), f: family_element(m, family, eta), k },
        }
    }

    fn encode(&self, point: &RepPoint) -> Result<Vec<CMat>> {
        let n = point.spec().n;
        let x = assemble(point.xs(), n, true);
        Ok(match self {
            Scheme::Lemma { partner: Partner::Z, .. } => alloc::vec![x, assemble(&point.zs()?, n, false)],
            Scheme::Lemma { partner: Partner::Y, .. } => alloc::vec![x, assemble(point.ys(), n, false)],
            Scheme::Lemma { partner: Partner::T, .. } => {
                let t = identity(x.nrows()) + &x * assemble(point.ys(), n, false);
                alloc::vec![x, t]
            }
            Scheme::Engine { .. } => blocks_of(point),
        })
    }

    fn decode(&self, template: &RepPoint, state: &[CMat]) -> Result<RepPoint> {
        let spec = template.spec();
        let (m, n) = (spec.m, spec.n);
        let (vs, ws) = (template.vs().to_vec(), template.ws().to_vec());
        match self {
            Scheme::Lemma { partner, .. } => {
                let xs = extract(&state[0], m, n, true);
                match partner {
                    Partner::Z => RepPoint::from_xz(spec, xs, extract(&state[1], m, n, false), vs, ws),
                    Partner::Y => RepPoint::new(spec, xs, extract(&state[1], m, n, false), vs, ws),
                    Partner::T => {
                        let id = identity(n);
                        let mut ys = Vec::with_capacity(m);
                        for (s, xs_s) in xs.iter().enumerate() {
                            ys.push(inverse(xs_s, "X")? * (block(&state[1], s * n, s * n, n, n) - &id));
                        }
                        RepPoint::new(spec, xs, ys, vs, ws)
                    }
                }
            }
            Scheme::Engine { .. } => point_from_blocks(template, state),
        }
    }

    fn field(&self, template: &RepPoint, state: &[CMat]) -> Result<Vec<CMat>> {
        match self {
            Scheme::Lemma { partner, k, eta } => lemma_field(*partner, *k, *eta, state),
            Scheme::Engine { table, f, k } => engine_velocity(&point_from_blocks(template, state)?, table, f, *k),
        }
    }
}

/// Integrates `steps` RK4 steps of size `h` from `point`, recording every
/// step.
fn integrate(point: &RepPoint, scheme: &Scheme, h: C64, steps: usize, params: &ParameterSet) -> Result<Trajectory> {
    let max_res = |p: &RepPoint| -> Result<f64> { Ok(moment_residual(p, params)?.into_iter().fold(0.0, f64::max)) };
    let mut traj = Trajectory {
        times: alloc::vec![cr(0.0)],
        points: alloc::vec![point.clone()],
        moment_residuals: alloc::vec![max_res(point)?],
        aborted: None,
    };
    let mut state = scheme.encode(point)?;
    let field = |s: &[CMat]| scheme.field(point, s);
    for i in 1..=steps {
        let next = rk4_step(&state, h, &field).and_then(|s| scheme.decode(point, &s).map(|p| (s, p)));
        match next {
            Ok((s, p)) => {
                state = s;
                traj.moment_residuals.push(max_res(&p)?);
                traj.points.push(p);
                traj.times.push(h * i as f64);
            }
            Err(e) => {
                traj.aborted = Some(e);
                break;
            }
        }
    }
    Ok(traj)
}

/// Classical fixed-step RK4 on the flow's vector field.
///
/// Families two to four (and the three explicit flows) use the total-matrix
/// vector fields in `(X, Z)`, `(X, Y)` and `(X, 1 + XY)`; family one has no
/// such closed expression and uses the engine velocity of every arrow.
pub fn ode_oracle(point: &RepPoint, flow: &FlowSpec, params: &ParameterSet) -> Result<Trajectory> {
    let spec = point.spec();
    flow.hamiltonian.validate(spec.m)?;
    let scheme = Scheme::for_hamiltonian(flow.hamiltonian, spec.m, spec.d);
    integrate(point, &scheme, flow.time / flow.steps as f64, flow.steps, params)
}

/// Same oracle driven by the engine velocity for every Hamiltonian.
pub fn engine_oracle(point: &RepPoint, flow: &FlowSpec, params: &ParameterSet) -> Result<Trajectory> {
    let spec = point.spec();
    flow.hamiltonian.validate(spec.m)?;
    let (family, eta, k) = flow.hamiltonian.as_family();
    let scheme = Scheme::Engine { table: BracketTable::new(spec.m, spec.d), f: family_element(spec.m, family, eta), k };
    integrate(point, &scheme, flow.time / flow.steps as f64, flow.steps, params)
}

/// Total-matrix velocity `(dX, d partner)` of the lemma field, exposed for
/// comparison with [`engine_velocity`].
pub fn lemma_velocity(point: &RepPoint, hamiltonian: Hamiltonian) -> Result<Option<(CMat, CMat)>> {
    let spec = point.spec();
    let scheme = Scheme::for_hamiltonian(hamiltonian, spec.m, spec.d);
    if let Scheme::Lemma { partner, k, eta } = scheme {
        let v = lemma_field(partner, k, eta, &scheme.encode(point)?)?;
        let mut it = v.into_iter();
        let (a, b) = (it.next().expect("two components"), it.next().expect("two components"));
        return Ok(Some((a, b)));
    }
    Ok(None)
}

/// Convergence order between two errors at step sizes `h` and `h / 2`.
pub fn observed_order(error_h: f64, error_half: f64) -> f64 {
    linalg::real::log2(error_h / error_half)
}

/// An observable evaluated along a flow.
#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    /// Closed element whose trace is tracked.
    pub element: Element,
}

impl Observable {
    pub fn new(name: impl Into<String>, element: Element) -> Self {
        Self { name: name.into(), element }
    }
}

/// One row of a conservation table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationRow {
    pub name: String,
    pub values: Vec<C64>,
    pub max_abs_drift: f64,
    /// Drift relative to `max(|initial value|, 1)`.
    pub max_rel_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationTable {
    pub times: Vec<C64>,
    pub rows: Vec<ConservationRow>,
    /// Largest moment-map residual at each time.
    pub moment_residuals: Vec<f64>,
}

impl ConservationTable {
    pub fn row(&self, name: &str) -> Option<&ConservationRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Points of the flow at the requested times. Closed-form flows are
/// evaluated directly; family flows are integrated by the oracle between
/// consecutive times with step close to `time / steps`.
pub fn flow_points(point: &RepPoint, flow: &FlowSpec, params: &ParameterSet, times: &[C64]) -> Result<Vec<RepPoint>> {
    let spec = point.spec();
    flow.hamiltonian.validate(spec.m)?;
    if !matches!(flow.hamiltonian, Hamiltonian::Family { .. }) {
        return times.iter().map(|&t| closed_form_flow(point, flow.hamiltonian, t)).collect();
    }
    let scheme = Scheme::for_hamiltonian(flow.hamiltonian, spec.m, spec.d);
    let h_target = (flow.time / flow.steps as f64).norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(times.len());
    let (mut current, mut t_now) = (point.clone(), cr(0.0));
    for &t in times {
        let dt = t - t_now;
        let steps = linalg::real::ceil(dt.norm() / h_target).max(1.0) as usize;
        let traj = integrate(&current, &scheme, dt / steps as f64, steps, params)?;
        if let Some(e) = traj.aborted {
            return Err(e);
        }
        current = traj.endpoint().clone();
        t_now = t;
        out.push(current.clone());
    }
    Ok(out)
}

/// Evaluates each observable along the flow and reports its drift from the
/// value at the first requested time.
pub fn conservation_report(
    point: &RepPoint,
    flow: &FlowSpec,
    params: &ParameterSet,
    observables: &[Observable],
    times: &[C64],
) -> Result<ConservationTable> {
    let points = flow_points(point, flow, params, times)?;
    let mut rows = Vec::with_capacity(observables.len());
    for obs in observables {
        let mut values = Vec::with_capacity(points.len());
        for p in &points {
            values.push(trace(&Evaluator::new(p).eval_element(&obs.element)?));
        }
        let first = values.first().copied().unwrap_or(cr(0.0));
        let max_abs_drift = values.iter().map(|v| (v - first).norm()).fold(0.0, f64::max);
        rows.push(ConservationRow {
            name: obs.name.clone(),
            max_rel_drift: max_abs_drift / first.norm().max(1.0),
            max_abs_drift,
            values,
        });
    }
    let moment_residuals = points
        .iter()
        .map(|p| Ok(moment_residual(p, params)?.into_iter().fold(0.0, f64::max)))
        .collect::<Result<_>>()?;
    Ok(ConservationTable { times: times.to_vec(), rows, moment_residuals })
}
