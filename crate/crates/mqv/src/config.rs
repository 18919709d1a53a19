//! Run configuration and the parsers behind the global command-line flags.

use std::collections::BTreeMap;

use mqv_core::linalg::c;
use mqv_core::quiver::derive_params;
use mqv_core::{ModelSpec, ParameterSet, C64};

use crate::error::CliError;

/// Default deformation parameters `q_s = (1.1 + 0.3 s) + (0.2 - 0.1 s) i`.
pub fn default_q(m: usize) -> Vec<C64> {
    (0..m).map(|s| c(1.1 + 0.3 * s as f64, 0.2 - 0.1 * s as f64)).collect()
}

/// Parses `"m,d,n"`.
pub fn parse_spec(text: &str) -> Result<ModelSpec, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("--spec expects m,d,n, got '{text}'")));
    }
    let mut v = [0usize; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| CliError::Usage(format!("'{p}' in --spec is not a positive integer")))?;
    }
    ModelSpec::new(v[0], v[1], v[2]).map_err(|e| CliError::Usage(e.to_string()))
}

/// Parses `"re,im;re,im;..."`. A lone real part is accepted for each entry.
pub fn parse_complex_list(text: &str) -> Result<Vec<C64>, CliError> {
    text.split(';').filter(|s| !s.trim().is_empty()).map(parse_complex).collect()
}

/// Parses `"re,im"` or `"re"`.
pub fn parse_complex(text: &str) -> Result<C64, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| CliError::Usage(format!("'{p}' is not a number")));
    match parts.as_slice() {
        [re] => Ok(c(num(re)?, 0.0)),
        [re, im] => Ok(c(num(re)?, num(im)?)),
        _ => Err(CliError::Usage(format!("'{text}' is not a complex number"))),
    }
}

/// Parses `"name=value"` with a positive value.
pub fn parse_tol(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text.split_once('=').ok_or_else(|| CliError::Usage(format!("--tol expects name=value, got '{text}'")))?;
    let value: f64 = value.trim().parse().map_err(|_| CliError::Usage(format!("tolerance '{value}' is not a number")))?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(CliError::Usage(format!("tolerance {name} must be positive")));
    }
    Ok((name.trim().to_string(), value))
}

/// Everything a command needs besides its own arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ModelSpec,
    pub q: Vec<C64>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub suites: Vec<String>,
}

impl RunConfig {
    pub fn new(spec: ModelSpec, q: Option<Vec<C64>>, seed: u64) -> Result<Self, CliError> {
        let q = q.unwrap_or_else(|| default_q(spec.m));
        if q.len() != spec.m {
            return Err(CliError::Usage(format!("--q has {} entries but m = {}", q.len(), spec.m)));
        }
        let cfg = Self { spec, q, seed, tolerances: BTreeMap::new(), suites: Vec::new() };
        cfg.params()?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<ParameterSet, CliError> {
        derive_params(&self.q, self.spec.n).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Tolerance override for `name`, or `default`.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn with_tolerances(mut self, tolerances: impl IntoIterator<Item = (String, f64)>) -> Self {
        self.tolerances.extend(tolerances);
        self
    }
}
