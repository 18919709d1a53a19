#![allow(dead_code)]

use mqv_core::linalg::c;
use mqv_core::quiver::derive_params;
use mqv_core::rep_space::LocalCoordinates;
use mqv_core::sampling::random_coordinates_and_point;
use mqv_core::{ModelSpec, ParameterSet, RepPoint, C64};

/// Default deformation parameters `q_s = (1.1 + 0.3 s) + (0.2 - 0.1 s) i`.
pub fn default_q(m: usize) -> Vec<C64> {
    (0..m).map(|s| c(1.1 + 0.3 * s as f64, 0.2 - 0.1 * s as f64)).collect()
}

pub fn params(m: usize, n: usize) -> ParameterSet {
    derive_params(&default_q(m), n).unwrap()
}

pub struct Sample {
    pub spec: ModelSpec,
    pub params: ParameterSet,
    pub coords: LocalCoordinates,
    pub point: RepPoint,
}

pub fn sample(m: usize, d: usize, n: usize, seed: u64) -> Sample {
    let spec = ModelSpec::new(m, d, n).unwrap();
    let params = params(m, n);
    let (coords, point) = random_coordinates_and_point(&spec, &params, seed).unwrap();
    Sample { spec, params, coords, point }
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Random closed word over the full alphabet, based at vertex 0: random
/// steps along `x`, `y`, `z` and their inverses, with framing loops
/// `w_a v_b` and `fi_a` inserted whenever the path is at vertex 0.
pub fn random_closed_word<R: rand::Rng>(rng: &mut R, m: usize, d: usize, len: usize) -> mqv_core::bracket::Word {
    use mqv_core::bracket::{Letter, Word};
    let mut at = 0;
    let mut letters = Vec::new();
    while letters.len() < len {
        let prev = (at + m - 1) % m;
        if at == 0 && rng.gen_bool(0.3) {
            let (a, b) = (rng.gen_range(0..d), rng.gen_range(0..d));
            if rng.gen_bool(0.5) {
                letters.extend([Letter::W(a), Letter::V(b)]);
            } else {
                letters.push(Letter::FInv(a));
            }
            continue;
        }
        let l = match rng.gen_range(0..6) {
            0 => Letter::X(at),
            1 => Letter::ZInv(at),
            2 => Letter::Z(prev),
            3 => Letter::Y(prev),
            4 => Letter::XInv(prev),
            _ => Letter::X(at),
        };
        at = match l {
            Letter::X(_) | Letter::ZInv(_) => (at + 1) % m,
            _ => prev,
        };
        letters.push(l);
    }
    while at != 0 {
        letters.push(Letter::X(at));
        at = (at + 1) % m;
    }
    Word::from_letters(&letters, m).unwrap()
}

/// Like [`sample`] with the total `Z` scaled to Frobenius norm 2, the scale
/// at which the flow tests measure time.
pub fn flow_sample(m: usize, d: usize, n: usize, seed: u64) -> Sample {
    let spec = ModelSpec::new(m, d, n).unwrap();
    let params = params(m, n);
    let (coords, point) = mqv_core::sampling::random_scaled_z_point(&spec, &params, seed, 2.0).unwrap();
    Sample { spec, params, coords, point }
}
