//! One function per subcommand. Each returns the report plus the data the
//! command writes next to it.

use mqv_core::flows::{FlowSpec, Hamiltonian};
use mqv_core::hamiltonians::{Family, ReducedFamily};
use mqv_core::reduction::dual_point;
use mqv_core::rep_space::coordinates_of;
use mqv_core::sampling::random_coordinates_and_point;
use mqv_core::C64;
use serde_json::{json, Value};

use crate::checks::{self, guarded};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{complex_data, DualFile, LoadedPoint, PointFile};
use crate::report::Report;
use crate::suites;

/// A report and the command's data file contents.
#[derive(Debug, Clone)]
pub struct Output {
    pub report: Report,
    pub data: Value,
}

pub fn gen(cfg: &RunConfig) -> Result<(PointFile, Report), CliError> {
    let params = cfg.params()?;
    let (coords, point) = random_coordinates_and_point(&cfg.spec, &params, cfg.seed)?;
    let records = checks::moment_records("", &point, &params, cfg.tol("moment", 1e-10))?;
    let worst = records.iter().map(|r| r.value).fold(0.0, f64::max);
    let file = PointFile::new(&point, &cfg.q, Some(cfg.seed), Some(&coords), Some(worst));
    Ok((file, records.into_iter().collect()))
}

/// Moment residuals, moment blocks, the moment property for every vertex and
/// letter, and the spin identities.
pub fn verify(p: &LoadedPoint, cfg: &RunConfig) -> Report {
    let (tol, engine_tol) = (cfg.tol("moment", 1e-10), cfg.tol("engine", 1e-9));
    let mut report = Report::new();
    report.extend(guarded("moment residual", checks::MOMENT_MAP, || checks::moment_records("", &p.point, &p.params, tol)));
    report.extend(guarded("theta blocks", checks::THETA_BLOCKS, || checks::theta_records(&p.point, &p.params, engine_tol)));
    report.extend(guarded("moment property", checks::MOMENT_PROPERTY, || checks::moment_property_records("", &p.point, engine_tol)));
    report.extend(guarded("spin identities", checks::SPIN_IDENTITIES, || checks::spin_records("", &p.point, engine_tol)));
    report
}

pub fn parse_family(text: &str) -> Result<Family, CliError> {
    let digits = text.trim_start_matches("family").trim_start_matches("fam");
    digits
        .parse::<usize>()
        .ok()
        .and_then(Family::from_index)
        .ok_or_else(|| CliError::Usage(format!("family must be 1, 2, 3 or 4, got '{text}'")))
}

pub fn parse_reduced_family(text: &str) -> Result<ReducedFamily, CliError> {
    match text {
        "F" | "f" => Ok(ReducedFamily::F),
        "G" | "g" => Ok(ReducedFamily::G),
        "H" | "h" => Ok(ReducedFamily::H),
        other => Err(CliError::Usage(format!("reduced family must be F, G or H, got '{other}'"))),
    }
}

/// `trZ`, `trY`, `trT` or `family1`..`family4`, with power `k`.
pub fn parse_hamiltonian(text: &str, k: usize, eta: C64) -> Result<Hamiltonian, CliError> {
    Ok(match text {
        "trZ" => Hamiltonian::TrZ(k),
        "trY" => Hamiltonian::TrY(k),
        "trT" => Hamiltonian::TrT(k),
        other => Hamiltonian::Family { family: parse_family(other)?, j: k, eta },
    })
}

pub const DEFAULT_ETAS: [(f64, f64); 2] = [(0.3, 0.1), (-0.2, 0.5)];

pub fn commute(p: &LoadedPoint, family: Family, etas: (C64, C64), cfg: &RunConfig) -> Result<Output, CliError> {
    let (records, tables) = checks::commute_records("", &p.point, family, etas.0, etas.1, cfg.tol("involution", 1e-8))?;
    let data = json!({
        "family": family.index(),
        "tables": tables.iter().map(|t| json!({
            "eta": [complex_data(t.eta.0), complex_data(t.eta.1)],
            "powers": t.powers,
            "magnitudes": t.magnitudes,
        })).collect::<Vec<_>>(),
    });
    Ok(Output { report: records.into_iter().collect(), data })
}

pub fn rank(p: &LoadedPoint, family: ReducedFamily, cfg: &RunConfig) -> Result<Output, CliError> {
    let coords = match &p.coordinates {
        Some(c) => c.clone(),
        None => coordinates_of(&p.point, &p.params)?,
    };
    let (records, r) = checks::rank_records("", &coords, &p.params, family, cfg.tol("rank-gap", 10.0))?;
    let data = json!({ "expected": r.expected, "observed": r.observed, "gap": r.gap, "singular_values": r.singular_values });
    Ok(Output { report: records.into_iter().collect(), data })
}

pub fn flow(p: &LoadedPoint, hamiltonian: Hamiltonian, time: C64, steps: usize, samples: usize, cfg: &RunConfig) -> Result<Output, CliError> {
    let m = p.spec.m;
    let flow = FlowSpec::new(hamiltonian, time, steps, m)?;
    let explicit = !matches!(hamiltonian, Hamiltonian::Family { .. });
    let drift_tol = cfg.tol("drift", if explicit { 1e-8 } else { 1e-7 });
    let observables = checks::flow_observables(m, p.spec.n, hamiltonian, C64::new(-0.4, 0.6));
    let (records, table) = checks::flow_records("", &p.point, &p.params, &flow, &observables, samples.max(1), drift_tol, cfg.tol("moment-flow", 1e-8))?;
    let data = json!({
        "hamiltonian": format!("{hamiltonian:?}"),
        "times": table.times.iter().copied().map(complex_data).collect::<Vec<_>>(),
        "rows": table.rows.iter().map(|r| json!({
            "name": r.name,
            "values": r.values.iter().copied().map(complex_data).collect::<Vec<_>>(),
            "max_abs_drift": r.max_abs_drift,
            "max_rel_drift": r.max_rel_drift,
        })).collect::<Vec<_>>(),
        "moment_residuals": table.moment_residuals,
    });
    Ok(Output { report: records.into_iter().collect(), data })
}

pub fn reduce(p: &LoadedPoint, max_len: usize, cfg: &RunConfig) -> Result<Output, CliError> {
    let out = checks::reduce_checks(&p.point, &p.params, max_len, cfg.seed)?;
    let data = json!({
        "words": out.values.iter().map(|v| json!({ "word": v.word.to_string(), "value": complex_data(v.value) })).collect::<Vec<_>>(),
        "lambda": out.lambda.as_ref().map(|lg| lg.lambda.iter().copied().map(complex_data).collect::<Vec<_>>()),
    });
    Ok(Output { report: out.records.into_iter().collect(), data })
}

/// The dual point file and the duality checks.
pub fn dual(p: &LoadedPoint, pairs: usize, cfg: &RunConfig) -> Result<(DualFile, Report), CliError> {
    let d = dual_point(&p.point, &p.params)?;
    let records = checks::dual_records("", &p.point, &p.params, pairs, cfg.seed)?;
    Ok((DualFile::new(&d), records.into_iter().collect()))
}

/// Runs the configured suites, or all of them.
pub fn report(cfg: &RunConfig) -> Result<Report, CliError> {
    let names: Vec<String> = if cfg.suites.is_empty() { suites::SUITES.iter().map(|s| s.to_string()).collect() } else { cfg.suites.clone() };
    let mut report = Report::new();
    for name in &names {
        report.merge(suites::run_suite(name, cfg)?);
    }
    Ok(report)
}

/// A one-line summary for the terminal.
pub fn summary_line(report: &Report) -> String {
    let s = report.summary;
    let mut line = format!("{} checks, {} passed, {} failed", s.total, s.passed, s.failed);
    if let Some(r) = report.failures().next() {
        line.push_str(&format!("; first failure: {} = {:.3e} (tol {:.1e})", r.name, r.value, r.tol));
    }
    line
}

