mod common;

use common::{params, rel, sample};
use mqv_core::bracket::{trace_bracket_value, trace_power_bracket_scaled, BracketTable, Evaluator};
use mqv_core::hamiltonians::*;
use mqv_core::linalg::{block, c, cr, identity, inverse, matpow, max_abs, numeric_rank, singular_values, trace};
use mqv_core::quiver::derive_params;
use mqv_core::rep_space::spin_data;

#[test]
fn total_matrix_blocks() {
    for m in 1..=3 {
        let s = sample(m, 2, 3, 1);
        let tm = total_matrices(&s.point).unwrap();
        for k in 1..=2 * m {
            let tr = trace(&matpow(&tm.x, k));
            if k % m != 0 {
                assert!(tr.norm() < 1e-12, "tr X^{k} at m={m}");
            }
        }
        for sv in 1..m {
            assert!(max_abs(&(tm.theta_block(sv) - identity(3) * s.params.q()[sv])) < 1e-9);
        }
        let sd = spin_data(&s.point, &s.params).unwrap();
        let zinv = inverse(s.point.z(m - 1).unwrap(), "Z").unwrap();
        let q0 = s.params.q()[0];
        let want = identity(3) * q0 + &sd.am * &sd.cm * zinv * (q0 * s.params.t());
        assert!(max_abs(&(tm.theta_block(0) - want)) < 1e-9);
    }
    let s = sample(1, 1, 2, 2);
    let tm = total_matrices(&s.point).unwrap();
    assert_eq!(tm.x, *s.point.x(0));
}

#[test]
fn family_value_examples() {
    for m in 1..=3 {
        let s = sample(m, 2, 3, 4);
        let tm = total_matrices(&s.point).unwrap();
        let eta = c(0.4, 0.1);
        if m > 1 {
            assert!(family_value(&tm, Family::One, 1, eta).unwrap().norm() < 1e-12);
        }
        let want = cr((m * 3) as f64) + (0..m).map(|sv| trace(&(s.point.x(sv) * s.point.y(sv)))).sum::<mqv_core::C64>();
        assert!(rel(family_value(&tm, Family::Two, 1, cr(0.0)).unwrap(), want) < 1e-12);
    }
}

/// Criterion 4 at desk scale: all members of one family commute, including
/// at two different spectral parameters.
#[test]
fn families_in_involution() {
    let etas = [(c(0.3, 0.1), c(-0.2, 0.5)), (c(1.1, -0.4), c(0.7, 0.2))];
    for m in 1..=3 {
        let n = if m == 3 { 2 } else { 3 };
        let d = 2;
        let s = sample(m, d, n, 5);
        let ev = Evaluator::new(&s.point);
        let table = BracketTable::new(m, d);
        for fam in Family::ALL {
            for &(e1, e2) in &etas {
                let f = family_element(m, fam, e1);
                let g = family_element(m, fam, e2);
                let step = fam.step(m);
                for j in (step..=n * m).step_by(step) {
                    for k in (step..=n * m).step_by(step) {
                        let (v, scale) = trace_power_bracket_scaled(&ev, &table, &f, j, &g, k).unwrap();
                        assert!(v.norm() <= 1e-8 * scale.max(1.0), "m={m} {fam:?} j={j} k={k}: {:.2e} vs {scale:.2e}", v.norm());
                    }
                }
            }
        }
    }
}

#[test]
fn block_families_match_reduced_forms() {
    for m in 1..=3 {
        for seed in 0..3 {
            let s = sample(m, 2, 3, 19 + seed);
            let tm = total_matrices(&s.point).unwrap();
            let q = quadruple_of(&s.coords, &s.params);
            for j in 1..=3 {
                for eta in [c(0.3, -0.2), c(-1.2, 0.6)] {
                    let f4 = family_value(&tm, Family::Four, j * m, eta).unwrap();
                    let eta_p = s.params.q()[0] / s.params.t() * eta;
                    let g = reduced_g(&q, &s.params, j, eta_p).unwrap() * g_constant(&s.params, eta).powi(j as i32) * m as f64;
                    assert!(rel(f4, g) < 1e-8, "G m={m} j={j}");
                    let f3 = family_value(&tm, Family::Three, j * m, eta).unwrap();
                    let h = reduced_h(&q, &s.params, j, eta).unwrap() * h_constant(&s.params, eta).powi(j as i32) * m as f64;
                    assert!(rel(f3, h) < 1e-8, "H m={m} j={j}");
                    let f2 = family_value(&tm, Family::Two, j, eta).unwrap();
                    assert!(rel(f2, reduced_f(&q, &s.params, j, eta).unwrap()) < 1e-8, "F m={m} j={j}");
                }
            }
        }
    }
}

#[test]
fn single_factor_product_at_m1() {
    let p = params(1, 2);
    let s = sample(1, 1, 2, 3);
    let b = s.coords.lax_b(p.t());
    assert!(max_abs(&(p_of_b(&b, &p) - (&b - identity(2) / p.t()))) < 1e-15);
}

#[test]
fn end_coefficients_agree() {
    for m in 1..=3 {
        let s = sample(m, 2, 3, 23);
        let tm = total_matrices(&s.point).unwrap();
        let q = quadruple_of(&s.coords, &s.params);
        for j in 1..=2 {
            for fam in Family::ALL {
                let poly = family_poly(&tm, fam, j * fam.step(m)).unwrap();
                assert_eq!(poly.degree(), j * fam.step(m));
                assert!(poly.end_relation_residual() < 1e-9, "{fam:?} m={m} j={j}");
            }
            for rf in [ReducedFamily::F, ReducedFamily::G] {
                assert!(rf.poly(&q, &s.params, j).unwrap().end_relation_residual() < 1e-9, "{rf:?}");
            }
        }
    }
}

#[test]
fn h_approaches_g_for_large_q0() {
    let s = sample(2, 2, 3, 8);
    let mut last = f64::INFINITY;
    for q0 in [1e2, 1e4, 1e6] {
        let p = derive_params(&[cr(q0), c(1.3, 0.2)], 3).unwrap();
        let q = quadruple_of(&s.coords, &p);
        let h0 = reduced_h(&q, &p, 2, cr(0.0)).unwrap();
        let g0 = reduced_g(&q, &p, 2, cr(0.0)).unwrap() * p.t().powi(2);
        let gap = rel(h0, g0);
        assert!(gap < last, "q0 = {q0}: {gap:.3e} not below {last:.3e}");
        last = gap;
    }
    assert!(last < 1e-4);
}

#[test]
fn spectral_curve_vanishing() {
    for m in 1..=3 {
        for (n, d) in [(3, 1), (3, 2), (4, 2), (4, 3)] {
            let s = sample(m, d, n, 6);
            let q = quadruple_of(&s.coords, &s.params);
            let curve = spectral_coeffs(&q, &s.params).unwrap();
            let r = curve.vanishing_ratio(d);
            assert!(r <= 1e-7, "m={m} n={n} d={d}: {r:.2e}");
            let bm1 = matpow(&q.b, m - 1);
            let tmat = &q.big_a * &q.big_c * bm1 * inverse(&q.a, "A").unwrap();
            let sv = singular_values(&tmat);
            assert_eq!(numeric_rank(&sv, 1e-8).0, d);
        }
    }
    let s = sample(2, 3, 3, 6);
    let curve = spectral_coeffs(&quadruple_of(&s.coords, &s.params), &s.params).unwrap();
    assert_eq!(curve.vanishing_ratio(3), 0.0);
}

#[test]
fn index_set_sizes() {
    assert_eq!(expected_rank(3, 2), 5);
    assert_eq!(expected_rank(2, 2), 3);
    assert_eq!(expected_rank(3, 1), 3);
    assert_eq!(index_set(3, 2), vec![(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]);
}

#[test]
fn independence_rank_examples() {
    for (m, n, d, fam) in [(2, 3, 2, ReducedFamily::G), (2, 2, 2, ReducedFamily::H), (2, 3, 1, ReducedFamily::G)] {
        let s = sample(m, d, n, 0);
        let r = independence_rank(&s.coords, &s.params, fam).unwrap();
        assert_eq!(r.observed, expected_rank(n, d), "m={m} n={n} d={d} {fam:?}: {:?}", r.singular_values);
    }
}

#[test]
fn spectral_identity_on_shell() {
    for m in 1..=3 {
        for d in 1..=3 {
            let s = sample(m, d, 3, 9);
            for u in [CycleMatrix::Y, CycleMatrix::Z] {
                let r = spect_residual(&s.point, &s.params, u).unwrap();
                assert!(r <= 1e-9, "m={m} d={d} {u:?}: {r:.2e}");
            }
        }
    }
}

#[test]
fn framing_generators_central() {
    for m in 1..=3 {
        let d = 2;
        let s = sample(m, d, 3, 21);
        let ev = Evaluator::new(&s.point);
        let table = BracketTable::new(m, d);
        for u in [CycleMatrix::Y, CycleMatrix::Z] {
            let qv = qu_generator(&s.point, 1, 0, 1, u).unwrap();
            assert!(rel(qv, ev.eval_element(&qu_element(m, 1, 0, 1, u)).unwrap().trace()) < 1e-10);
            for k in 1..=2 {
                let power = element_pow(&u.element(m), k * m);
                for (al, be, l) in [(0, 1, 1), (1, 1, 2), (1, 0, 0)] {
                    let v = trace_bracket_value(&ev, &table, &power, &qu_element(m, al, be, l, u)).unwrap();
                    let scale = ev.eval_element(&power).unwrap().norm() * ev.eval_element(&qu_element(m, al, be, l, u)).unwrap().norm();
                    assert!(v.norm() <= 1e-8 * scale.max(1.0), "m={m} {u:?}: {v}");
                }
            }
        }
    }
}

#[test]
fn two_framing_functions_commute_and_are_independent() {
    for m in 1..=2 {
        let (n, d) = (2, 2);
        let s = sample(m, d, n, 12);
        let ev = Evaluator::new(&s.point);
        let table = BracketTable::new(m, d);
        for u in [CycleMatrix::Y, CycleMatrix::Z, CycleMatrix::X, CycleMatrix::T] {
            let mut elements = Vec::new();
            for l in 1..=n {
                elements.push(element_pow(&u.element(m), u.exponent(l, m)));
                elements.push(qu_element(m, 0, 0, l, u));
            }
            let values = cy2_functions(&s.point, u).unwrap();
            for (e, v) in elements.iter().zip(&values) {
                assert!(rel(ev.eval_element(e).unwrap().trace(), *v) < 1e-10);
            }
            for a in &elements {
                for b in &elements {
                    let v = trace_bracket_value(&ev, &table, a, b).unwrap();
                    let scale = ev.eval_element(a).unwrap().norm() * ev.eval_element(b).unwrap().norm();
                    assert!(v.norm() <= 1e-8 * scale.max(1.0), "m={m} {u:?}: {v}");
                }
            }
            let r = cy2_rank(&s.coords, &s.params, &s.spec, u).unwrap();
            assert_eq!(r.observed, 2 * n, "{u:?}: {:?}", r.singular_values);
        }
    }
}

#[test]
fn fg_brackets_three_ways() {
    for m in 2..=3 {
        for d in 1..=2 {
            let s = sample(m, d, 3, 19);
            let cmp = fg_comparison(&s.point, &s.params, &fg_functions(d, 2), 1e-6).unwrap();
            assert!(cmp.chain_vs_closed <= 1e-6, "{cmp:?}");
            assert!(cmp.engine_vs_chain <= 1e-6, "{cmp:?}");
            assert!(cmp.engine_vs_closed <= 1e-8, "{cmp:?}");
        }
    }
}

#[test]
fn fg_engine_values_match_quadruple() {
    let s = sample(3, 2, 3, 2);
    let q = mqv_core::rep_space::reduced_quadruple(&s.point, &s.params).unwrap();
    let ev = Evaluator::new(&s.point);
    for f in fg_functions(2, 2) {
        let a = mqv_core::rep_space::fg_value(&q, f);
        let b = ev.eval_element(&fg_element(&s.params, f)).unwrap().trace();
        assert!(rel(a, b) < 1e-9, "{f:?}");
    }
    let tm = total_matrices(&s.point).unwrap();
    assert!(max_abs(&(block(&tm.x, 0, 3, 3, 3) - s.point.x(0))) == 0.0);
}
