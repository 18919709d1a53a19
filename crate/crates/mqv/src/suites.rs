//! Verification suites over grids of seeded random points. Each suite covers
//! one acceptance criterion; points are checked in parallel and the records
//! are assembled in a fixed order, so a report depends only on the seed.

use mqv_core::bracket::{trace_bracket_value, BracketTable, Evaluator};
use mqv_core::flows::{closed_form_flow, observed_order, ode_oracle, FlowSpec, Hamiltonian, Observable};
use mqv_core::hamiltonians::{
    cy2_functions, cy2_rank, element_pow, family_poly, family_value, fg_comparison, fg_functions, g_constant, h_constant, quadruple_of,
    qu_element, reduced_f, reduced_g, reduced_h, spect_residual, spectral_coeffs, total_matrices, CycleMatrix, Family, ReducedFamily,
};
use mqv_core::linalg::{c, cr, rel_diff};
use mqv_core::quiver::derive_params;
use mqv_core::reduction::{lambda_gauge, lambda_gauge_spin, tr_y2_closed_form, tr_z2_closed_form};
use mqv_core::rep_space::LocalCoordinates;
use mqv_core::sampling::{random_coordinates_and_point, random_scaled_z_point};
use mqv_core::{ModelSpec, ParameterSet, RepPoint, Result};
use rayon::prelude::*;

use crate::checks::{self, guarded};
use crate::config::{default_q, RunConfig};
use crate::error::CliError;
use crate::report::{Record, Report};

/// A sampled point with its parameters and chart coordinates.
pub struct Sample {
    pub spec: ModelSpec,
    pub params: ParameterSet,
    pub coords: LocalCoordinates,
    pub point: RepPoint,
    pub seed: u64,
}

impl Sample {
    pub fn label(&self) -> String {
        format!("(m={},d={},n={}) seed {}: ", self.spec.m, self.spec.d, self.spec.n, self.seed)
    }
}

pub fn default_params(m: usize, n: usize) -> Result<ParameterSet> {
    derive_params(&default_q(m), n)
}

pub fn sample(m: usize, d: usize, n: usize, seed: u64) -> Result<Sample> {
    let spec = ModelSpec::new(m, d, n)?;
    let params = default_params(m, n)?;
    let (coords, point) = random_coordinates_and_point(&spec, &params, seed)?;
    Ok(Sample { spec, params, coords, point, seed })
}

/// Like [`sample`] with the total `Z` rescaled to Frobenius norm 2, which
/// puts unit flow time inside the asymptotic range of the RK4 oracle.
pub fn flow_sample(m: usize, d: usize, n: usize, seed: u64) -> Result<Sample> {
    let spec = ModelSpec::new(m, d, n)?;
    let params = default_params(m, n)?;
    let (coords, point) = random_scaled_z_point(&spec, &params, seed, 2.0)?;
    Ok(Sample { spec, params, coords, point, seed })
}

/// Runs `check` on every job in parallel and concatenates the records in job
/// order. Sampling failures become failing records.
fn over<J: Sync, F>(jobs: &[J], name: impl Fn(&J) -> String + Sync, statement: &str, check: F) -> Report
where
    F: Fn(&J) -> Result<Vec<Record>> + Sync,
{
    let parts: Vec<Vec<Record>> = jobs.par_iter().map(|j| guarded(name(j), statement, || check(j))).collect();
    parts.into_iter().flatten().collect()
}

type Cell = (usize, usize, usize, u64);

fn cell_name(&(m, d, n, seed): &Cell) -> String {
    format!("(m={m},d={d},n={n}) seed {seed}")
}

/// Ten small cells used by the engine suites.
fn engine_cells(seed: u64) -> Vec<Cell> {
    [(1, 1, 2), (1, 2, 2), (2, 1, 2), (2, 2, 2), (3, 1, 2), (3, 2, 2), (1, 3, 3), (2, 3, 3), (2, 2, 3), (3, 2, 3)]
        .iter()
        .enumerate()
        .map(|(i, &(m, d, n))| (m, d, n, seed + i as u64))
        .collect()
}

pub const SUITES: [&str; 12] = [
    "moment",
    "quasi-hamiltonian",
    "spin-identities",
    "involution",
    "reduced-forms",
    "independence",
    "flows",
    "poisson-map",
    "two-framing",
    "duality",
    "lambda-gauge",
    "degenerate",
];

pub fn run_suite(name: &str, cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    Ok(match name {
        "moment" => moment(cfg),
        "quasi-hamiltonian" => quasi_hamiltonian(cfg),
        "spin-identities" => spin_identities(cfg),
        "involution" => involution(cfg),
        "reduced-forms" => reduced_forms(cfg),
        "independence" => independence(cfg),
        "flows" => flows(cfg),
        "poisson-map" => poisson_map(cfg),
        "two-framing" => two_framing(cfg),
        "duality" => duality(cfg),
        "lambda-gauge" => lambda_gauge_traces(cfg),
        "degenerate" => degenerate(cfg),
        other => return Err(CliError::Usage(format!("unknown suite '{other}'; known: {}", SUITES.join(", ")))),
    })
}

/// 90 constructed points: ten per `(m, d)` with `n` cycling through 2, 3, 4.
pub fn moment(cfg: &RunConfig) -> Report {
    let tol = cfg.tol("moment", 1e-10);
    let mut jobs: Vec<Cell> = Vec::new();
    for m in 1..=3 {
        for d in 1..=3 {
            for i in 0..10u64 {
                jobs.push((m, d, 2 + (i % 3) as usize, cfg.seed + i));
            }
        }
    }
    over(&jobs, cell_name, checks::MOMENT_MAP, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        let r = checks::moment_records("", &s.point, &s.params, tol)?;
        let worst = r.iter().map(|r| r.value).fold(0.0, f64::max);
        Ok(vec![Record::residual(format!("{}worst moment residual", s.label()), checks::MOMENT_MAP, worst, tol)])
    })
}

pub fn quasi_hamiltonian(cfg: &RunConfig) -> Report {
    let tol = cfg.tol("moment-property", 1e-9);
    over(&engine_cells(cfg.seed), cell_name, checks::MOMENT_PROPERTY, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        checks::moment_property_records(&s.label(), &s.point, tol)
    })
}

pub fn spin_identities(cfg: &RunConfig) -> Report {
    let tol = cfg.tol("spin", 1e-9);
    over(&engine_cells(cfg.seed), cell_name, checks::SPIN_IDENTITIES, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        checks::spin_records(&s.label(), &s.point, tol)
    })
}

/// Ten points per cell `(m, d, n)` in `{1,2,3} x {1,2,3} x {2,3,4}`; two
/// spectral parameters and their mixture, powers up to `n m`.
pub fn involution(cfg: &RunConfig) -> Report {
    let tol = cfg.tol("involution", 1e-8);
    let mut jobs: Vec<(Cell, Family)> = Vec::new();
    for m in 1..=3 {
        for d in 1..=3 {
            for n in 2..=4 {
                for i in 0..10u64 {
                    for fam in Family::ALL {
                        jobs.push(((m, d, n, cfg.seed + i), fam));
                    }
                }
            }
        }
    }
    over(&jobs, |(cell, fam)| format!("{} family {}", cell_name(cell), fam.index()), checks::INVOLUTION, |&((m, d, n, seed), fam)| {
        let s = sample(m, d, n, seed)?;
        // Spectral parameters drawn from the seed, away from zero.
        let e1 = c(0.2 + 0.1 * (seed % 7) as f64, 0.1 - 0.05 * (seed % 5) as f64);
        let e2 = c(-0.3 - 0.07 * (seed % 3) as f64, 0.4 + 0.05 * (seed % 4) as f64);
        Ok(checks::commute_records(&s.label(), &s.point, fam, e1, e2, tol)?.0)
    })
}

pub const REDUCED_FORMS: &str = "block families against the reduced closed forms";
pub const END_RELATIONS: &str = "redundancy of the end coefficients";

pub fn reduced_forms(cfg: &RunConfig) -> Report {
    let (tol, end_tol) = (cfg.tol("reduced", 1e-8), cfg.tol("end-coefficients", 1e-9));
    let jobs: Vec<Cell> = (1..=3).flat_map(|m| (0..3u64).map(move |i| (m, 2, 3, 19 + i))).map(|(m, d, n, s)| (m, d, n, s + cfg.seed)).collect();
    over(&jobs, cell_name, REDUCED_FORMS, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        let tm = total_matrices(&s.point)?;
        let q = quadruple_of(&s.coords, &s.params);
        let (mut f4, mut f3, mut f2): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for j in 1..=3 {
            for eta in [c(0.3, -0.2), c(-1.2, 0.6)] {
                let eta_p = s.params.q()[0] / s.params.t() * eta;
                let g = reduced_g(&q, &s.params, j, eta_p)? * g_constant(&s.params, eta).powi(j as i32) * m as f64;
                f4 = f4.max(rel_diff(family_value(&tm, Family::Four, j * m, eta)?, g));
                let h = reduced_h(&q, &s.params, j, eta)? * h_constant(&s.params, eta).powi(j as i32) * m as f64;
                f3 = f3.max(rel_diff(family_value(&tm, Family::Three, j * m, eta)?, h));
                f2 = f2.max(rel_diff(family_value(&tm, Family::Two, j, eta)?, reduced_f(&q, &s.params, j, eta)?));
            }
        }
        let label = s.label();
        let mut out = vec![
            Record::residual(format!("{label}family 4 vs reduced G"), REDUCED_FORMS, f4, tol),
            Record::residual(format!("{label}family 3 vs reduced H"), REDUCED_FORMS, f3, tol),
            Record::residual(format!("{label}family 2 vs reduced F"), REDUCED_FORMS, f2, tol),
        ];
        let mut g_end: f64 = 0.0;
        let mut block_end: f64 = 0.0;
        for j in 1..=3 {
            g_end = g_end.max(ReducedFamily::G.poly(&q, &s.params, j)?.end_relation_residual());
            for fam in [Family::Two, Family::Three] {
                block_end = block_end.max(family_poly(&tm, fam, j * fam.step(m))?.end_relation_residual());
            }
        }
        out.push(Record::residual(format!("{label}G end coefficients"), END_RELATIONS, g_end, end_tol));
        out.push(Record::residual(format!("{label}families 2-3 end coefficients"), END_RELATIONS, block_end, end_tol));
        Ok(out)
    })
}

pub const SPECTRAL_CONSTRAINTS: &str = "vanishing spectral coefficients beyond d";

/// Jacobian rank of the G and H families for `(n, d)` in the five listed
/// pairs at `m = 2, 3`, three points each, with the spectral constraints.
pub fn independence(cfg: &RunConfig) -> Report {
    let (gap, tol) = (cfg.tol("rank-gap", 10.0), cfg.tol("spectral", 1e-7));
    let mut jobs: Vec<Cell> = Vec::new();
    for m in 2..=3 {
        for (n, d) in [(2, 2), (3, 2), (3, 3), (4, 2), (4, 3)] {
            for i in 0..3u64 {
                jobs.push((m, d, n, cfg.seed + i));
            }
        }
    }
    over(&jobs, cell_name, checks::INDEPENDENCE, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        let label = s.label();
        let mut out = Vec::new();
        for fam in [ReducedFamily::G, ReducedFamily::H] {
            out.extend(checks::rank_records(&label, &s.coords, &s.params, fam, gap)?.0);
        }
        let curve = spectral_coeffs(&quadruple_of(&s.coords, &s.params), &s.params)?;
        out.push(Record::residual(format!("{label}spectral constraints"), SPECTRAL_CONSTRAINTS, curve.vanishing_ratio(d), tol));
        Ok(out)
    })
}

pub const EXPLICIT_FLOWS: &str = "explicit flows conserve their generator";
pub const ORACLE_ORDER: &str = "RK4 oracle against the explicit flows";

fn explicit_flows(m: usize) -> [Hamiltonian; 3] {
    [Hamiltonian::TrZ(m), Hamiltonian::TrY(m), Hamiltonian::TrT(1)]
}

/// Explicit flows against their generator and the oracle, then drift of the
/// family observables along oracle trajectories at nonzero `eta`.
pub fn flows(cfg: &RunConfig) -> Report {
    let (gen_tol, order_min, drift_tol) = (cfg.tol("generator", 1e-10), cfg.tol("order", 3.7), cfg.tol("drift", 1e-7));
    let jobs: Vec<(usize, Hamiltonian)> = (1..=3).flat_map(|m| explicit_flows(m).into_iter().map(move |h| (m, h))).collect();
    let mut report = over(&jobs, |(m, h)| format!("m={m} {h:?}"), EXPLICIT_FLOWS, |&(m, h)| {
        let s = flow_sample(m, 2, 3, cfg.seed + 4)?;
        let label = format!("{}{h:?}: ", s.label());
        let (fam, eta, k) = h.as_family();
        let gen = element_pow(&mqv_core::hamiltonians::family_element(m, fam, eta), k);
        let time = cr(1.0);
        let exact = closed_form_flow(&s.point, h, time)?;
        let before = checks::trace_at(&s.point, &gen)?;
        let after = checks::trace_at(&exact, &gen)?;
        let mut out = vec![Record::residual(format!("{label}generator drift"), EXPLICIT_FLOWS, rel_diff(before, after), gen_tol)];
        let mut errors = Vec::new();
        for steps in [10, 20, 40] {
            let spec = FlowSpec::new(h, time, steps, m)?;
            errors.push(checks::distance(ode_oracle(&s.point, &spec, &s.params)?.endpoint(), &exact));
        }
        let order = errors.windows(2).map(|w| observed_order(w[0], w[1])).fold(f64::INFINITY, f64::min);
        out.push(Record::at_least(format!("{label}observed order"), ORACLE_ORDER, order, order_min));
        Ok(out)
    });
    let eta = c(0.25, -0.15);
    let fam_jobs: Vec<(usize, Family)> = (1..=2).flat_map(|m| Family::ALL.into_iter().map(move |f| (m, f))).collect();
    report.merge(over(&fam_jobs, |(m, f)| format!("m={m} family {}", f.index()), checks::CONSERVATION, |&(m, fam)| {
        let s = flow_sample(m, 2, 2, cfg.seed + 9)?;
        let k = fam.step(m);
        // The first family is integrated through the engine, which is already
        // accurate at the coarser step.
        let steps = if fam == Family::One { 400 } else { 1600 };
        let flow = FlowSpec::new(Hamiltonian::Family { family: fam, j: k, eta }, cr(1.0), steps, m)?;
        let gen = mqv_core::hamiltonians::family_element(m, fam, eta);
        let other = mqv_core::hamiltonians::family_element(m, fam, c(-0.4, 0.6));
        let observables = vec![Observable::new("tr M^2k", element_pow(&gen, 2 * k)), Observable::new("tr M'^k", element_pow(&other, k))];
        let label = format!("{}family {}: ", s.label(), fam.index());
        Ok(checks::flow_records(&label, &s.point, &s.params, &flow, &observables, 4, drift_tol, 1e-8)?.0)
    }));
    report
}

pub const POISSON_MAP: &str = "the coordinate map is Poisson";

/// Brackets of `f_k`, `g_l` by closed forms, by the chart brackets with the
/// chain rule, and by the engine at the point.
pub fn poisson_map(cfg: &RunConfig) -> Report {
    let (fd_tol, engine_tol) = (cfg.tol("finite-difference", 1e-6), cfg.tol("engine", 1e-8));
    let mut jobs: Vec<Cell> = Vec::new();
    for m in 2..=3 {
        for d in 1..=2 {
            for i in 0..2u64 {
                jobs.push((m, d, 3, cfg.seed + 19 + i));
            }
        }
    }
    over(&jobs, cell_name, POISSON_MAP, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        let cmp = fg_comparison(&s.point, &s.params, &fg_functions(d, 2), 1e-6)?;
        let label = s.label();
        Ok(vec![
            Record::residual(format!("{label}chain rule vs closed form"), POISSON_MAP, cmp.chain_vs_closed, fd_tol),
            Record::residual(format!("{label}engine vs chain rule"), POISSON_MAP, cmp.engine_vs_chain, fd_tol),
            Record::residual(format!("{label}engine vs closed form"), POISSON_MAP, cmp.engine_vs_closed, engine_tol),
        ])
    })
}

pub const TWO_FRAMING: &str = "the two-framing system is involutive and independent";

pub fn two_framing(cfg: &RunConfig) -> Report {
    let tol = cfg.tol("involution", 1e-8);
    let us = [CycleMatrix::Y, CycleMatrix::Z, CycleMatrix::X, CycleMatrix::T];
    let jobs: Vec<(usize, usize, CycleMatrix)> =
        (1..=2).flat_map(|m| (2..=3).flat_map(move |n| us.into_iter().map(move |u| (m, n, u)))).collect();
    over(&jobs, |(m, n, u)| format!("m={m} n={n} {u:?}"), TWO_FRAMING, |&(m, n, u)| {
        let s = sample(m, 2, n, cfg.seed + 12)?;
        let ev = Evaluator::new(&s.point);
        let table = BracketTable::new(m, 2);
        let mut elements = Vec::new();
        for l in 1..=n {
            elements.push(element_pow(&u.element(m), u.exponent(l, m)));
            elements.push(qu_element(m, 0, 0, l, u));
        }
        let values = cy2_functions(&s.point, u)?;
        let mut worst: f64 = 0.0;
        for (e, v) in elements.iter().zip(&values) {
            worst = worst.max(rel_diff(ev.eval_element(e)?.trace(), *v));
        }
        for a in &elements {
            for b in &elements {
                let v = trace_bracket_value(&ev, &table, a, b)?;
                let scale = ev.eval_element(a)?.norm() * ev.eval_element(b)?.norm();
                worst = worst.max(v.norm() / scale.max(1.0));
            }
        }
        let label = format!("{}{u:?}: ", s.label());
        let rank = cy2_rank(&s.coords, &s.params, &s.spec, u)?;
        Ok(vec![
            Record::residual(format!("{label}pairwise brackets"), TWO_FRAMING, worst, tol),
            Record::equal(format!("{label}Jacobian rank 2n"), TWO_FRAMING, rank.observed, 2 * n),
        ])
    })
}

pub fn duality(cfg: &RunConfig) -> Report {
    let jobs: Vec<Cell> = (1..=3).flat_map(|m| (0..2u64).map(move |i| (m, 2, 3, 80 + i))).map(|(m, d, n, s)| (m, d, n, s + cfg.seed)).collect();
    over(&jobs, cell_name, checks::ANTI_POISSON, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        checks::dual_records(&s.label(), &s.point, &s.params, 20, seed)
    })
}

pub const QUADRATIC_TRACES: &str = "quadratic traces in lambda-gauge";

pub fn lambda_gauge_traces(cfg: &RunConfig) -> Report {
    let tol = cfg.tol("lambda", 1e-8);
    let jobs: Vec<Cell> = (0..10u64).map(|i| (2, 1 + (i % 2) as usize, 3, cfg.seed + 100 + i)).collect();
    over(&jobs, cell_name, QUADRATIC_TRACES, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        let lg = lambda_gauge(&s.point, &s.params, &vec![0; n])?;
        let f = lambda_gauge_spin(&lg, &s.params)?;
        let tm = total_matrices(&lg.point)?;
        let z = tm.z()?;
        let label = s.label();
        Ok(vec![
            Record::residual(format!("{label}tr Z^2"), QUADRATIC_TRACES, rel_diff((z * z).trace(), tr_z2_closed_form(&lg.lambda, &f, &s.params)?), tol),
            Record::residual(format!("{label}tr Y^2"), QUADRATIC_TRACES, rel_diff((&tm.y * &tm.y).trace(), tr_y2_closed_form(&lg.lambda, &f, &s.params)?), tol),
        ])
    })
}

pub const SPECTRAL_IDENTITY: &str = "spectral identity on shell";
pub const CENTER: &str = "framing generators are central";

pub fn degenerate(cfg: &RunConfig) -> Report {
    let (spect_tol, center_tol) = (cfg.tol("spect", 1e-9), cfg.tol("center", 1e-8));
    let jobs: Vec<Cell> = (1..=3).flat_map(|m| (1..=3).map(move |d| (m, d, 3, 9))).map(|(m, d, n, s)| (m, d, n, s + cfg.seed)).collect();
    over(&jobs, cell_name, SPECTRAL_IDENTITY, |&(m, d, n, seed)| {
        let s = sample(m, d, n, seed)?;
        let label = s.label();
        let mut out = Vec::new();
        for u in [CycleMatrix::Y, CycleMatrix::Z] {
            out.push(Record::residual(format!("{label}spectral identity {u:?}"), SPECTRAL_IDENTITY, spect_residual(&s.point, &s.params, u)?, spect_tol));
        }
        let ev = Evaluator::new(&s.point);
        let table = BracketTable::new(m, d);
        for u in [CycleMatrix::Y, CycleMatrix::Z] {
            let mut worst: f64 = 0.0;
            for k in 1..=2 {
                let power = element_pow(&u.element(m), k * m);
                for (al, be, l) in [(0, d - 1, 1), (d - 1, d - 1, 2), (d - 1, 0, 0)] {
                    let q = qu_element(m, al, be, l, u);
                    let v = trace_bracket_value(&ev, &table, &power, &q)?;
                    let scale = ev.eval_element(&power)?.norm() * ev.eval_element(&q)?.norm();
                    worst = worst.max(v.norm() / scale.max(1.0));
                }
            }
            out.push(Record::residual(format!("{label}center property {u:?}"), CENTER, worst, center_tol));
        }
        Ok(out)
    })
}
