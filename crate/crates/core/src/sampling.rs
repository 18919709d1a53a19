//! Seeded sampling of coordinates and on-shell points.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, real, CMat, C64};
use crate::quiver::{ModelSpec, ParameterSet};
use crate::rep_space::{check_regular_positions, point_from_coordinates, LocalCoordinates, RepPoint};

const MAX_REJECTIONS: usize = 1000;
const POSITION_MARGIN: f64 = 1e-3;
const ROW_SUM_FLOOR: f64 = 0.25;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex standard normal (unit variance in total).
pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Point of the annulus `0.5 <= |z| <= 2` with log-uniform radius.
fn annulus<R: Rng>(rng: &mut R) -> C64 {
    let lr: f64 = rng.gen_range(real::ln(0.5)..=real::ln(2.0));
    let th: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
    let r = C64::new(lr, 0.0).exp().re;
    c(r * real::cos(th), r * real::sin(th))
}

/// Random local coordinates drawn from `rng`.
pub fn random_coordinates<R: Rng>(rng: &mut R, spec: &ModelSpec, params: &ParameterSet) -> Result<LocalCoordinates> {
    let (n, d) = (spec.n, spec.d);
    let mut rejections = 0;
    let x = loop {
        let x: Vec<C64> = (0..n).map(|_| annulus(rng)).collect();
        if check_regular_positions(&x, params.t(), POSITION_MARGIN).is_ok() {
            break x;
        }
        rejections += 1;
        if rejections >= MAX_REJECTIONS {
            return Err(Error::SamplingExhausted(rejections));
        }
    };
    let mut a = CMat::zeros(n, d);
    for i in 0..n {
        loop {
            let row: Vec<C64> = (0..d).map(|_| complex_normal(rng)).collect();
            let s: C64 = row.iter().sum();
            // With d = 1 the only admissible row is (1).
            if d == 1 {
                a[(i, 0)] = c(1.0, 0.0);
                break;
            }
            if s.norm() >= ROW_SUM_FLOOR {
                for (al, z) in row.iter().enumerate() {
                    a[(i, al)] = z / s;
                }
                break;
            }
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::SamplingExhausted(rejections));
            }
        }
    }
    let cm = random_matrix(rng, d, n);
    LocalCoordinates::new(x, a, cm)
}

/// Deterministic on-shell point for a seed.
pub fn random_point(spec: &ModelSpec, params: &ParameterSet, seed: u64) -> Result<RepPoint> {
    random_coordinates_and_point(spec, params, seed).map(|(_, p)| p)
}

/// Random coordinates together with their point.
pub fn random_coordinates_and_point(spec: &ModelSpec, params: &ParameterSet, seed: u64) -> Result<(LocalCoordinates, RepPoint)> {
    let mut rng = rng_from_seed(seed);
    let mut failures = 0;
    loop {
        let coords = random_coordinates(&mut rng, spec, params)?;
        match point_from_coordinates(&coords, params, spec) {
            Ok(p) => return Ok((coords, p)),
            Err(Error::Degenerate(_)) | Err(Error::SingularFactor(_)) => {
                failures += 1;
                if failures >= MAX_REJECTIONS {
                    return Err(Error::SamplingExhausted(failures));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Random coordinates and point with the spin coordinates `c` rescaled so
/// that the total `Z` has Frobenius norm `z_norm`. `Z` is linear in `c` while `V`
/// and `W` do not depend on its scale, so this only fixes the time scale of
/// the flows.
pub fn random_scaled_z_point(spec: &ModelSpec, params: &ParameterSet, seed: u64, z_norm: f64) -> Result<(LocalCoordinates, RepPoint)> {
    let (coords, point) = random_coordinates_and_point(spec, params, seed)?;
    let norm = real::sqrt(point.zs()?.iter().map(|z| z.iter().map(|e| e.norm_sqr()).sum::<f64>()).sum());
    let coords = LocalCoordinates::new(coords.x().to_vec(), coords.a().clone(), coords.c() * c(z_norm / norm, 0.0))?;
    let point = point_from_coordinates(&coords, params, spec)?;
    Ok((coords, point))
}
