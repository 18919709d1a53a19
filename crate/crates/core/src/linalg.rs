//! Dense complex linear algebra helpers shared by every module.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Real-valued elementary functions that also work without `std`.
pub mod real {
    use nalgebra::ComplexField;

    pub fn sqrt(x: f64) -> f64 {
        ComplexField::sqrt(x)
    }
    pub fn abs(x: f64) -> f64 {
        ComplexField::abs(x)
    }
    pub fn ln(x: f64) -> f64 {
        ComplexField::ln(x)
    }
    pub fn log2(x: f64) -> f64 {
        ComplexField::log2(x)
    }
    pub fn ceil(x: f64) -> f64 {
        ComplexField::ceil(x)
    }
    pub fn powi(x: f64, k: i32) -> f64 {
        ComplexField::powi(x, k)
    }
    pub fn cos(x: f64) -> f64 {
        ComplexField::cos(x)
    }
    pub fn sin(x: f64) -> f64 {
        ComplexField::sin(x)
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn frobenius(m: &CMat) -> f64 {
    real::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Inverse with a conditioning guard; `what` names the factor in the error.
pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{what} is not square")));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::SingularFactor(what.into()))?;
    let cond = norm1(m) * norm1(&inv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::SingularFactor(format!("{what} (condition {cond:.3e})")));
    }
    Ok(inv)
}

pub fn matpow(m: &CMat, k: usize) -> CMat {
    let mut acc = identity(m.nrows());
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    const THETA13: f64 = 5.371920351148152;
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        real::ceil(real::log2(nrm / THETA13)) as i32
    } else {
        0
    };
    let scaled = a * cr(real::powi(2.0, -s));
    let id = identity(n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |i: usize| cr(PADE13[i]);
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is invertible for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Singular values of a real matrix, decreasing.
pub fn singular_values_real(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Numerical rank: count of singular values above `rel * sigma_max`, and the
/// ratio between the last retained and the first dropped value (infinite when
/// nothing is dropped).
pub fn numeric_rank(sv: &[f64], rel: f64) -> (usize, f64) {
    let Some(&top) = sv.first() else {
        return (0, f64::INFINITY);
    };
    if top == 0.0 {
        return (0, f64::INFINITY);
    }
    let rank = sv.iter().take_while(|&&s| s > rel * top).count();
    let gap = if rank == sv.len() {
        f64::INFINITY
    } else if rank == 0 {
        0.0
    } else if sv[rank] == 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank]
    };
    (rank, gap)
}

/// Eigenvalues and right eigenvectors via the complex Schur form.
///
/// Fails when the eigenvector matrix is numerically singular (defective or
/// nearly defective input).
pub fn eigen(m: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = m.nrows();
    let (q, t) = m.clone().schur().unpack();
    let lambda: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vecs = zeros(n, n);
    let scale = max_abs(&t).max(1e-300);
    for k in 0..n {
        let mut y = alloc::vec![C64::new(0.0, 0.0); n];
        y[k] = cr(1.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda[k];
            if denom.norm() < 1e-14 * scale {
                denom = cr(1e-14 * scale);
            }
            y[i] = -acc / denom;
        }
        let col = &q * nalgebra::DVector::from_vec(y);
        let nrm = real::sqrt(col.iter().map(|z| z.norm_sqr()).sum::<f64>());
        vecs.set_column(k, &(col / cr(nrm)));
    }
    inverse(&vecs, "eigenvector matrix")?;
    Ok((lambda, vecs))
}

/// Block-diagonal embedding helper: places `block` at rows `r0..`, cols `c0..`.
pub fn place(target: &mut CMat, r0: usize, c0: usize, block: &CMat) {
    target
        .view_mut((r0, c0), (block.nrows(), block.ncols()))
        .copy_from(block);
}

pub fn block(m: &CMat, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat {
    m.view((r0, c0), (rows, cols)).into_owned()
}

/// Relative difference `|a-b| / max(1, |a|, |b|)`.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![
            c(0.3, 1.0),
            c(-2.0, 0.5),
            c(7.0, -3.0)
        ]));
        let e = expm(&d);
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-12 * e[(i, i)].norm().max(1.0));
        }
    }

    #[test]
    fn expm_of_nilpotent_is_polynomial() {
        let mut n = zeros(3, 3);
        n[(0, 1)] = c(2.0, 0.0);
        n[(1, 2)] = c(0.0, 3.0);
        let e = expm(&n);
        let expect = identity(3) + &n + (&n * &n) * cr(0.5);
        assert!(max_abs(&(e - expect)) < 1e-14);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let m = CMat::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.37 - 1.0, (i as f64 - j as f64) * 0.21));
        let (lam, p) = eigen(&m).unwrap();
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(lam));
        let back = &p * d * inverse(&p, "p").unwrap();
        assert!(max_abs(&(back - m)) < 1e-10);
    }

    #[test]
    fn matpow_agrees_with_repeated_product() {
        let m = CMat::from_fn(3, 3, |i, j| c(0.1 * (i + 2 * j) as f64, 0.05 * i as f64));
        let mut acc = identity(3);
        for _ in 0..7 {
            acc = &acc * &m;
        }
        assert!(max_abs(&(matpow(&m, 7) - acc)) < 1e-12);
    }
}
