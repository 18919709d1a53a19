//! Checks at a single point. The commands run them on a point file; the
//! suites run them over grids of sampled points.

use mqv_core::bracket::spin::{spin_identity_residuals, spin_word, x_power};
use mqv_core::bracket::{moment_property_residual, trace_bracket_value, trace_power_bracket_grid, BracketTable, Element, Evaluator, Letter, Vertex};
use mqv_core::flows::{conservation_report, ConservationTable, FlowSpec, Hamiltonian, Observable};
use mqv_core::hamiltonians::{element_pow, family_element, independence_rank, total_matrices, Family, RankReport, ReducedFamily};
use mqv_core::linalg::{cr, frobenius, identity, inverse, max_abs, rel_diff, trace};
use mqv_core::reduction::{
    anti_poisson_residual, dual_point, family_swap_residual, h_act, has_full_spin_rank, invariant_words, lambda_gauge, lambda_gauge_residual,
    minors_nonzero, random_closed_xz_word, trace_xz_word, HElement, InvariantEvaluator, InvariantLetter, InvariantWord, LambdaGauge,
};
use mqv_core::rep_space::{gauge_act, moment_residual, spin_data, LocalCoordinates};
use mqv_core::sampling::{random_matrix, rng_from_seed};
use mqv_core::{CMat, ParameterSet, RepPoint, Result, C64};

use crate::report::Record;

pub const MOMENT_MAP: &str = "cyclic moment map conditions";
pub const THETA_BLOCKS: &str = "moment blocks of the total matrices";
pub const MOMENT_PROPERTY: &str = "quasi-Hamiltonian moment property";
pub const SPIN_IDENTITIES: &str = "double brackets of the spin elements";
pub const POWER_LEMMA: &str = "bracket of x-powers with spin words";
pub const INVOLUTION: &str = "involutivity of the four families";
pub const MIXED_ETA: &str = "involutivity across spectral parameters";
pub const INDEPENDENCE: &str = "independence count nd - d(d-1)/2";
pub const CONSERVATION: &str = "conservation along family flows";
pub const H_INVARIANCE: &str = "invariance of spin words under H";
pub const GAUGE_INVARIANCE: &str = "gauge invariance of invariant words";
pub const LOCUS: &str = "proper and free locus of the H action";
pub const LAMBDA_GAUGE: &str = "lambda-gauge form of the Z blocks";
pub const DUAL_MOMENT: &str = "moment conditions at the dual point";
pub const FAMILY_SWAP: &str = "duality swaps the first and fourth families";
pub const INVOLUTION_SQUARE: &str = "duality squares to the identity";
pub const ANTI_POISSON: &str = "duality is anti-Poisson";

/// Records a failed computation as a failing record instead of aborting.
pub fn guarded(name: impl Into<String>, statement: &str, f: impl FnOnce() -> Result<Vec<Record>>) -> Vec<Record> {
    let name = name.into();
    f().unwrap_or_else(|e| vec![Record::failed(name, statement, &e)])
}

fn vertex_name(v: Vertex) -> String {
    match v {
        Vertex::Cycle(s) => format!("{s}"),
        Vertex::Infinity => "inf".into(),
    }
}

/// Moment residuals per vertex plus the framing scalar.
pub fn moment_records(label: &str, point: &RepPoint, params: &ParameterSet, tol: f64) -> Result<Vec<Record>> {
    let res = moment_residual(point, params)?;
    let m = point.spec().m;
    Ok(res
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let what = if i < m { format!("vertex {i}") } else { "framing scalar".into() };
            Record::residual(format!("{label}moment residual {what}"), MOMENT_MAP, r, tol)
        })
        .collect())
}

/// `Theta_s = q_s` for `s >= 1` and `Theta_0 = q_0 + q_0 t A C Z_{m-1}^{-1}`,
/// read off the assembled total matrices.
pub fn theta_records(point: &RepPoint, params: &ParameterSet, tol: f64) -> Result<Vec<Record>> {
    let spec = point.spec();
    let (m, n) = (spec.m, spec.n);
    let tm = total_matrices(point)?;
    let mut out = Vec::new();
    for s in 1..m {
        let r = max_abs(&(tm.theta_block(s) - identity(n) * params.q()[s]));
        out.push(Record::residual(format!("theta block {s}"), THETA_BLOCKS, r, tol));
    }
    let sd = spin_data(point, params)?;
    let zinv = inverse(point.z(m - 1)?, "Z")?;
    let q0 = params.q()[0];
    let want = identity(n) * q0 + &sd.am * &sd.cm * zinv * (q0 * params.t());
    let r = max_abs(&(tm.theta_block(0) - &want)) / max_abs(&want).max(1.0);
    out.push(Record::residual("theta block 0 from spin data", THETA_BLOCKS, r, tol));
    Ok(out)
}

/// Worst moment-property residual over all letters, for each vertex.
pub fn moment_property_records(label: &str, point: &RepPoint, tol: f64) -> Result<Vec<Record>> {
    let spec = point.spec();
    let ev = Evaluator::new(point);
    let table = BracketTable::new(spec.m, spec.d);
    let mut vertices: Vec<Vertex> = (0..spec.m).map(Vertex::Cycle).collect();
    vertices.push(Vertex::Infinity);
    let mut out = Vec::new();
    for v in vertices {
        let mut worst: f64 = 0.0;
        for g in Letter::alphabet(spec.m, spec.d) {
            worst = worst.max(moment_property_residual(&ev, &table, v, g)?);
        }
        out.push(Record::residual(format!("{label}moment property vertex {}", vertex_name(v)), MOMENT_PROPERTY, worst, tol));
    }
    Ok(out)
}

/// The four spin identities and `{tr x^k, tr a' c' x^l} = k tr a' c' x^{k+l}`.
pub fn spin_records(label: &str, point: &RepPoint, tol: f64) -> Result<Vec<Record>> {
    let spec = point.spec();
    let (m, d) = (spec.m, spec.d);
    let ev = Evaluator::new(point);
    let table = BracketTable::new(m, d);
    let r = spin_identity_residuals(&ev, &table)?;
    let mut out: Vec<Record> = ["{{x, c'}}", "{{z, c'}}", "{{a', c'}}", "{{c', c'}}"]
        .iter()
        .zip(r)
        .map(|(what, v)| Record::residual(format!("{label}spin identity {what}"), SPIN_IDENTITIES, v, tol))
        .collect();
    let mut worst: f64 = 0.0;
    for k in [m, 2 * m] {
        for l in [1, m + 1] {
            for al in 0..d {
                for be in 0..d {
                    let lhs = trace_bracket_value(&ev, &table, &x_power(m, k), &spin_word(m, al, be, l))?;
                    let rhs = ev.eval_element(&spin_word(m, al, be, k + l))?.trace() * k as f64;
                    worst = worst.max(rel_diff(lhs, rhs));
                }
            }
        }
    }
    out.push(Record::residual(format!("{label}x-power bracket"), POWER_LEMMA, worst, tol));
    Ok(out)
}

/// Relative magnitudes `|{tr M(e1)^j, tr M(e2)^k}| / scale` for the family's
/// powers up to `n m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommuteTable {
    pub family: Family,
    pub eta: (C64, C64),
    pub powers: Vec<usize>,
    pub magnitudes: Vec<Vec<f64>>,
}

impl CommuteTable {
    pub fn worst(&self) -> f64 {
        self.magnitudes.iter().flatten().copied().fold(0.0, f64::max)
    }
}

pub fn family_powers(family: Family, m: usize, n: usize) -> Vec<usize> {
    let step = family.step(m);
    (step..=n * m).step_by(step).collect()
}

pub fn commute_table(point: &RepPoint, family: Family, e1: C64, e2: C64) -> Result<CommuteTable> {
    let spec = point.spec();
    let ev = Evaluator::new(point);
    let table = BracketTable::new(spec.m, spec.d);
    let (f, g) = (family_element(spec.m, family, e1), family_element(spec.m, family, e2));
    let powers = family_powers(family, spec.m, spec.n);
    let grid = trace_power_bracket_grid(&ev, &table, &f, &powers, &g, &powers)?;
    let magnitudes = grid.iter().map(|row| row.iter().map(|(v, scale)| v.norm() / scale.max(1.0)).collect()).collect();
    Ok(CommuteTable { family, eta: (e1, e2), powers, magnitudes })
}

/// Involutivity of one family at `eta1`, at `eta2`, and across the two.
pub fn commute_records(label: &str, point: &RepPoint, family: Family, eta1: C64, eta2: C64, tol: f64) -> Result<(Vec<Record>, Vec<CommuteTable>)> {
    let mut records = Vec::new();
    let mut tables = Vec::new();
    for (e1, e2, statement, what) in [(eta1, eta1, INVOLUTION, "first eta"), (eta2, eta2, INVOLUTION, "second eta"), (eta1, eta2, MIXED_ETA, "mixed eta")] {
        let t = commute_table(point, family, e1, e2)?;
        records.push(Record::residual(format!("{label}family {} {what}", family.index()), statement, t.worst(), tol));
        tables.push(t);
    }
    Ok((records, tables))
}

pub fn rank_records(label: &str, coords: &LocalCoordinates, params: &ParameterSet, family: ReducedFamily, min_gap: f64) -> Result<(Vec<Record>, RankReport)> {
    let r = independence_rank(coords, params, family)?;
    let records = vec![
        Record::equal(format!("{label}rank of {family:?}"), INDEPENDENCE, r.observed, r.expected),
        Record::at_least(format!("{label}singular value gap of {family:?}"), INDEPENDENCE, r.gap, min_gap),
    ];
    Ok((records, r))
}

/// Family members at the flow's spectral parameter, up to power `n m`,
/// plus the same family at a second parameter.
pub fn flow_observables(m: usize, n: usize, hamiltonian: Hamiltonian, other_eta: C64) -> Vec<Observable> {
    let (family, eta, _) = hamiltonian.as_family();
    let gen = family_element(m, family, eta);
    let other = family_element(m, family, other_eta);
    let mut out: Vec<Observable> = family_powers(family, m, n).into_iter().map(|j| Observable::new(format!("tr M^{j}"), element_pow(&gen, j))).collect();
    let k = family.step(m);
    out.push(Observable::new(format!("tr M'^{k}"), element_pow(&other, k)));
    out
}

pub fn flow_records(
    label: &str,
    point: &RepPoint,
    params: &ParameterSet,
    flow: &FlowSpec,
    observables: &[Observable],
    samples: usize,
    drift_tol: f64,
    moment_tol: f64,
) -> Result<(Vec<Record>, ConservationTable)> {
    let times: Vec<C64> = (0..=samples).map(|i| flow.time * (i as f64 / samples as f64)).collect();
    let table = conservation_report(point, flow, params, observables, &times)?;
    let mut out: Vec<Record> = table
        .rows
        .iter()
        .map(|row| Record::residual(format!("{label}drift of {}", row.name), CONSERVATION, row.max_rel_drift, drift_tol))
        .collect();
    let moment = table.moment_residuals.iter().copied().fold(0.0, f64::max);
    out.push(Record::residual(format!("{label}moment residual along the flow"), MOMENT_MAP, moment, moment_tol));
    Ok((out, table))
}

/// An invariant word together with its value at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantValue {
    pub word: InvariantWord,
    pub value: C64,
}

pub struct ReduceOutcome {
    pub records: Vec<Record>,
    pub values: Vec<InvariantValue>,
    pub lambda: Option<LambdaGauge>,
}

/// Invariance of the word table under a random `h` and a random gauge, the
/// locus tests and the λ-gauge.
pub fn reduce_checks(point: &RepPoint, params: &ParameterSet, max_len: usize, seed: u64) -> Result<ReduceOutcome> {
    let spec = point.spec();
    let (m, d, n) = (spec.m, spec.d, spec.n);
    let mut rng = rng_from_seed(seed);
    let spin = spin_data(point, params)?;
    let base = InvariantEvaluator::new(point, &spin)?;
    let related = InvariantEvaluator::new(point, &h_act(&HElement::random(&mut rng, d), &spin)?)?;
    let g: Vec<CMat> = (0..m).map(|_| random_matrix(&mut rng, n, n) + identity(n) * cr(2.0)).collect();
    let moved = gauge_act(&g, point)?;
    let moved_eval = InvariantEvaluator::new(&moved, &spin_data(&moved, params)?)?;
    let mut values = Vec::new();
    let (mut h_worst, mut g_worst): (f64, f64) = (0.0, 0.0);
    for word in invariant_words(max_len) {
        let value = base.eval(&word);
        h_worst = h_worst.max(rel_diff(value, related.eval(&word)));
        g_worst = g_worst.max(rel_diff(value, moved_eval.eval(&word)));
        values.push(InvariantValue { word, value });
    }
    let mut records = vec![
        Record::residual("invariant words under H", H_INVARIANCE, h_worst, 1e-12),
        Record::residual("invariant words under gauge", GAUGE_INVARIANCE, g_worst, 1e-9),
    ];
    if d <= n {
        records.push(Record::equal("spin matrix has rank d", LOCUS, has_full_spin_rank(&spin.am) as usize, 1));
        records.push(Record::equal("every d x d minor is nonzero", LOCUS, minors_nonzero(&spin.am) as usize, 1));
    }
    let lambda = match lambda_gauge(point, params, &vec![0; n]) {
        Ok(lg) => {
            records.push(Record::residual("lambda-gauge Z blocks", LAMBDA_GAUGE, lambda_gauge_residual(&lg, params)?, 1e-9));
            let r = moment_residual(&lg.point, params)?.into_iter().fold(0.0, f64::max);
            records.push(Record::residual("moment residual in lambda-gauge", MOMENT_MAP, r, 1e-9));
            Some(lg)
        }
        Err(e) => {
            records.push(Record::failed("lambda-gauge", LAMBDA_GAUGE, &e));
            None
        }
    };
    Ok(ReduceOutcome { records, values, lambda })
}

/// Words in `X` and `Z` only, for comparisons on unframed data.
pub fn unframed_words(max_len: usize) -> Vec<InvariantWord> {
    invariant_words(max_len).into_iter().filter(|w| !w.0.contains(&InvariantLetter::S)).collect()
}

/// Dual moment conditions, the family swap, `iota^2 = id` on words and the
/// anti-Poisson sign on `pairs` random word pairs.
pub fn dual_records(label: &str, point: &RepPoint, params: &ParameterSet, pairs: usize, seed: u64) -> Result<Vec<Record>> {
    let m = point.spec().m;
    let dual = dual_point(point, params)?;
    let mut out = Vec::new();
    let dm = dual.moment_residuals()?.into_iter().fold(0.0, f64::max);
    out.push(Record::residual(format!("{label}dual moment residual"), DUAL_MOMENT, dm, 1e-9));
    let mut swap: f64 = 0.0;
    for eta in [C64::new(0.3, 0.2), C64::new(-0.7, 0.4)] {
        swap = swap.max(family_swap_residual(point, params, 3, eta)?);
    }
    out.push(Record::residual(format!("{label}family swap"), FAMILY_SWAP, swap, 1e-8));
    let twice = dual.dual()?;
    let zs = point.zs()?;
    let mut sq: f64 = 0.0;
    for w in unframed_words(4) {
        sq = sq.max(rel_diff(trace_xz_word(point.xs(), &zs, &w)?, twice.trace_xz(&w)?));
    }
    out.push(Record::residual(format!("{label}dual of dual on invariant words"), INVOLUTION_SQUARE, sq, 1e-9));
    let mut rng = rng_from_seed(seed);
    let mut anti: f64 = 0.0;
    for k in 0..pairs {
        let f = Element::word(random_closed_xz_word(&mut rng, m, 1 + k % 4));
        let g = Element::word(random_closed_xz_word(&mut rng, m, 2 + k % 3));
        anti = anti.max(anti_poisson_residual(point, params, &f, &g)?);
    }
    out.push(Record::residual(format!("{label}anti-Poisson on {pairs} word pairs"), ANTI_POISSON, anti, 1e-8));
    Ok(out)
}

/// Frobenius distance between the cycle blocks of two points.
pub fn distance(a: &RepPoint, b: &RepPoint) -> f64 {
    (0..a.spec().m).map(|s| frobenius(&(a.x(s) - b.x(s))) + frobenius(&(a.y(s) - b.y(s)))).sum()
}

/// Value of `tr` of an element at a point.
pub fn trace_at(point: &RepPoint, e: &Element) -> Result<C64> {
    Ok(trace(&Evaluator::new(point).eval_element(e)?))
}
