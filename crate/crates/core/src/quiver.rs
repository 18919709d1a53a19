//! Dimensions and deformation parameters of the framed cyclic quiver.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{real, C64};

/// Cycle length `m`, framing multiplicity `d` and rank `n` at every cycle
/// vertex. The framing vertex carries dimension one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    pub m: usize,
    pub d: usize,
    pub n: usize,
}

impl ModelSpec {
    pub fn new(m: usize, d: usize, n: usize) -> Result<Self> {
        if m == 0 || d == 0 || n == 0 {
            return Err(Error::InvalidSpec(format!("(m, d, n) = ({m}, {d}, {n}) must be positive")));
        }
        Ok(Self { m, d, n })
    }

    /// Side of the total matrices: all cycle vertices plus the framing vertex,
    /// which sits last.
    pub fn total_dim(&self) -> usize {
        self.m * self.n + 1
    }
}

/// Ordering sign on framing indices: `+1` if `a < b`, `0` if equal, `-1`
/// otherwise.
pub fn order_sign(a: usize, b: usize) -> f64 {
    match a.cmp(&b) {
        core::cmp::Ordering::Less => 1.0,
        core::cmp::Ordering::Equal => 0.0,
        core::cmp::Ordering::Greater => -1.0,
    }
}

/// Dimension of the smooth variety, `2nd`, independent of `m`.
pub fn expected_dimension(spec: &ModelSpec) -> usize {
    2 * spec.n * spec.d
}

/// Deformation parameters with their cumulative products.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    q: Vec<C64>,
    t_cum: Vec<C64>,
    t: C64,
    q_inf: C64,
    n: usize,
}

impl ParameterSet {
    pub fn m(&self) -> usize {
        self.q.len()
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> &[C64] {
        &self.q
    }
    /// `q_s` with the index read modulo `m`.
    pub fn q_at(&self, s: isize) -> C64 {
        self.q[s.rem_euclid(self.m() as isize) as usize]
    }
    pub fn t_cum(&self) -> &[C64] {
        &self.t_cum
    }
    /// Cumulative product `t_s` for `-1 <= s <= m-1`, with `t_{-1} = 1`.
    pub fn t_s(&self, s: isize) -> C64 {
        if s < 0 {
            C64::new(1.0, 0.0)
        } else {
            self.t_cum[s as usize]
        }
    }
    pub fn t(&self) -> C64 {
        self.t
    }
    pub fn q_inf(&self) -> C64 {
        self.q_inf
    }
}

/// Builds the cumulative products `t_s = q_0 ... q_s`, `t = t_{m-1}` and
/// `q_inf = t^{-n}`.
pub fn derive_params(q: &[C64], n: usize) -> Result<ParameterSet> {
    if q.is_empty() {
        return Err(Error::InvalidSpec("empty parameter list".into()));
    }
    if let Some(s) = q.iter().position(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::ZeroParameter(s));
    }
    let mut t_cum = Vec::with_capacity(q.len());
    let mut acc = C64::new(1.0, 0.0);
    for z in q {
        acc *= z;
        t_cum.push(acc);
    }
    let t = acc;
    let q_inf = t.powi(-(n as i32));
    Ok(ParameterSet { q: q.to_vec(), t_cum, t, q_inf, n })
}

/// One resonance `t_s^{-1} t_{s'} = t^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub s: isize,
    pub s_prime: isize,
    pub k: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    pub violations: Vec<Violation>,
    /// `|t|` is within 1e-6 of one, so no finite scan rules out resonances.
    pub unverifiable_beyond_scan: bool,
}

pub const DEFAULT_K_MAX: i32 = 24;
const RESONANCE_TOL: f64 = 1e-9;

/// Finite scan of the resonance conditions over `|k| <= k_max`.
///
/// The pair `(s, s') = (-1, m-1)` has ratio `t` identically, so `k = 1` is
/// skipped there; every other `k` for that pair coincides with the `s = s'`
/// condition shifted by one.
pub fn check_regularity(params: &ParameterSet, k_max: i32) -> Regularity {
    let m = params.m() as isize;
    let t = params.t();
    let mut violations = Vec::new();
    for s in -1..m {
        for sp in s..m {
            let ratio = params.t_s(sp) / params.t_s(s);
            for k in -k_max..=k_max {
                if s == sp && k == 0 {
                    continue;
                }
                if s == -1 && sp == m - 1 && k == 1 {
                    continue;
                }
                let tk = t.powi(k);
                let scale = 1f64.max(tk.norm()).max(ratio.norm());
                if (ratio - tk).norm() <= RESONANCE_TOL * scale {
                    violations.push(Violation { s, s_prime: sp, k });
                }
            }
        }
    }
    Regularity {
        regular: violations.is_empty(),
        violations,
        unverifiable_beyond_scan: real::abs(t.norm() - 1.0) < 1e-6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn two_three_products() {
        let p = derive_params(&[c(2.0, 0.0), c(3.0, 0.0)], 1).unwrap();
        assert_eq!(p.t_cum()[0], c(2.0, 0.0));
        assert_eq!(p.t(), c(6.0, 0.0));
        assert!((p.q_inf() - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.t_s(-1), c(1.0, 0.0));
    }

    #[test]
    fn single_vertex_products() {
        let t = c(0.7, 0.4);
        let p = derive_params(&[t], 2).unwrap();
        assert_eq!(p.t_cum()[0], t);
        assert!((p.q_inf() - 1.0 / (t * t)).norm() < 1e-14);
    }

    #[test]
    fn complex_conjugate_pair() {
        let p = derive_params(&[c(1.0, 1.0), c(1.0, -1.0)], 2).unwrap();
        assert_eq!(p.t_cum()[0], c(1.0, 1.0));
        assert!((p.t() - c(2.0, 0.0)).norm() < 1e-15);
        assert!((p.q_inf() - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_parameter_rejected() {
        assert_eq!(derive_params(&[c(1.0, 0.0), c(0.0, 0.0)], 1), Err(Error::ZeroParameter(1)));
    }

    #[test]
    fn regular_parameters() {
        let p = derive_params(&[c(2.0, 0.0), c(3.0, 0.0)], 1).unwrap();
        assert!(check_regularity(&p, 10).regular);
    }

    #[test]
    fn unit_parameters_are_resonant() {
        let p = derive_params(&[c(1.0, 0.0), c(1.0, 0.0)], 1).unwrap();
        let r = check_regularity(&p, DEFAULT_K_MAX);
        assert!(!r.regular);
        assert!(r.violations.iter().any(|v| v.s == 0 && v.s_prime == 0));
        assert!(r.unverifiable_beyond_scan);
    }

    #[test]
    fn constructed_resonance() {
        let t = c(1.3, 0.2);
        let t0 = t * t;
        let p = derive_params(&[t0, t / t0], 1).unwrap();
        let r = check_regularity(&p, DEFAULT_K_MAX);
        assert!(r.violations.contains(&Violation { s: -1, s_prime: 0, k: 2 }));
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(expected_dimension(&ModelSpec::new(2, 2, 3).unwrap()), 12);
        assert_eq!(expected_dimension(&ModelSpec::new(1, 1, 1).unwrap()), 2);
        assert_eq!(expected_dimension(&ModelSpec::new(4, 3, 5).unwrap()), 30);
        for m in 1..=4 {
            assert_eq!(expected_dimension(&ModelSpec::new(m, 2, 3).unwrap()), 12);
        }
    }
}
