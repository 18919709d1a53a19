mod common;

use common::{params, rel, sample};
use mqv_core::bracket::{Element, Word};
use mqv_core::hamiltonians::total_matrices;
use mqv_core::linalg::{c, cr, frobenius, identity, CMat};
use mqv_core::reduction::*;
use mqv_core::rep_space::{gauge_act, moment_residual, reduced_quadruple, spin_data};
use mqv_core::sampling::{random_matrix, rng_from_seed};
use mqv_core::Error;

fn row_sums(h: &CMat) -> Vec<mqv_core::C64> {
    h.row_iter().map(|r| r.iter().sum()).collect()
}

#[test]
fn h_group_closed_on_random_pairs() {
    let mut rng = rng_from_seed(11);
    for k in 0..50 {
        let d = 1 + k % 3;
        let (a, b) = (HElement::random(&mut rng, d), HElement::random(&mut rng, d));
        let ab = a.mul(&b).unwrap();
        let ai = a.inverse().unwrap();
        for h in [&ab, &ai] {
            assert!(row_sums(h.matrix()).iter().all(|s| (s - cr(1.0)).norm() < 1e-12));
        }
        let back = ai.mul(&a).unwrap();
        assert!(frobenius(&(back.matrix() - identity(d))) < 1e-10);
    }
}

#[test]
fn h_element_rejects_bad_matrices() {
    let bad_rows = CMat::from_fn(2, 2, |i, j| if i == j { cr(2.0) } else { cr(0.0) });
    assert!(matches!(HElement::new(bad_rows), Err(Error::RowSum(0))));
    let singular = CMat::from_element(2, 2, cr(0.5));
    assert!(matches!(HElement::new(singular), Err(Error::SingularH)));
}

#[test]
fn h_act_is_a_right_action_and_fixes_s() {
    let s = sample(2, 2, 3, 4);
    let spin = spin_data(&s.point, &s.params).unwrap();
    let quad = reduced_quadruple(&s.point, &s.params).unwrap();
    let mut rng = rng_from_seed(5);
    let same = h_act(&HElement::identity(2), &spin).unwrap();
    assert!(frobenius(&(&same.am - &spin.am)) < 1e-14);
    for _ in 0..10 {
        let (h1, h2) = (HElement::random(&mut rng, 2), HElement::random(&mut rng, 2));
        let h12 = h1.mul(&h2).unwrap();
        let two = h_act(&h2, &h_act(&h1, &spin).unwrap()).unwrap();
        let one = h_act(&h12, &spin).unwrap();
        let scale = frobenius(&spin.am).max(frobenius(&spin.cm));
        assert!(frobenius(&(&two.am - &one.am)) < 1e-12 * scale * frobenius(h12.matrix()).max(1.0));
        assert!(frobenius(&(&two.cm - &one.cm)) / frobenius(&one.cm) < 1e-12 * 1e2);
        assert!(frobenius(&(&one.s - &spin.s)) / frobenius(&spin.s) < 1e-12);
        let q = h_act(&h1, &quad).unwrap();
        assert_eq!(q.a, quad.a);
        assert_eq!(q.b, quad.b);
        let sq = &q.big_a * &q.big_c;
        assert!(frobenius(&(sq - &quad.big_a * &quad.big_c)) < 1e-12 * frobenius(&(&quad.big_a * &quad.big_c)).max(1.0));
    }
}

#[test]
fn row_sums_preserved_by_h() {
    let mut rng = rng_from_seed(6);
    let mut a = random_matrix(&mut rng, 4, 3);
    for i in 0..4 {
        let s: mqv_core::C64 = a.row(i).iter().sum();
        for j in 0..3 {
            a[(i, j)] /= s;
        }
    }
    let h = HElement::random(&mut rng, 3);
    let ah = &a * h.matrix();
    assert!(row_sums(&ah).iter().all(|s| (s - cr(1.0)).norm() < 1e-12));
}

#[test]
fn minor_tests() {
    let mut rng = rng_from_seed(8);
    let a = random_matrix(&mut rng, 4, 2);
    assert!(minors_nonzero(&a));
    assert!(has_full_spin_rank(&a));
    let mut twin = a.clone();
    let row = twin.row(0).into_owned();
    twin.row_mut(2).copy_from(&row);
    assert!(!minors_nonzero(&twin));
    assert!(has_full_spin_rank(&twin));
    // d = n: the only minor is the determinant.
    let sq = random_matrix(&mut rng, 3, 3);
    assert!(minors_nonzero(&sq));
    let mut deg = sq.clone();
    let col = deg.column(0) * cr(2.0);
    deg.column_mut(2).copy_from(&col);
    assert!(!minors_nonzero(&deg));
    assert!(!has_full_spin_rank(&deg));
    assert!(!minors_nonzero(&random_matrix(&mut rng, 1, 2)));
}

#[test]
fn invariant_words_parse_and_trace_s() {
    let w = InvariantWord::parse("X^2 S Z").unwrap();
    assert_eq!(w.0, vec![InvariantLetter::X, InvariantLetter::X, InvariantLetter::S, InvariantLetter::Z]);
    assert_eq!(InvariantWord::parse("XXSZ").unwrap(), w);
    assert_eq!(w.to_string(), "X X S Z");
    assert!(InvariantWord::parse("").is_err());
    assert!(InvariantWord::parse("X Q").is_err());
    assert_eq!(invariant_words(2).len(), 3 + 9);

    let s = sample(1, 2, 3, 1);
    let spin = spin_data(&s.point, &s.params).unwrap();
    let tr_s = h_invariant_value(&s.point, &s.params, &InvariantWord::parse("S").unwrap()).unwrap();
    assert!(rel(tr_s, spin.s.trace()) < 1e-14);
    assert!(rel(tr_s, (&spin.cm * &spin.am).trace()) < 1e-12);
    // S runs from vertex 0 to vertex m - 1, so at m = 2 it closes up after one X.
    let s = sample(2, 2, 3, 1);
    let spin = spin_data(&s.point, &s.params).unwrap();
    let tr_sx = h_invariant_value(&s.point, &s.params, &InvariantWord::parse("S X").unwrap()).unwrap();
    assert!(rel(tr_sx, (&spin.s * s.point.x(1)).trace()) < 1e-12);
    assert_eq!(h_invariant_value(&s.point, &s.params, &InvariantWord::parse("S").unwrap()).unwrap(), cr(0.0));
}

#[test]
fn invariant_values_under_h_and_gauge() {
    for m in 1..=3 {
        for d in 1..=2 {
            let s = sample(m, d, 3, 20 + m as u64);
            let spin = spin_data(&s.point, &s.params).unwrap();
            let mut rng = rng_from_seed(30 + d as u64);
            let h = HElement::random(&mut rng, d);
            let moved = h_act(&h, &spin).unwrap();
            let base = InvariantEvaluator::new(&s.point, &spin).unwrap();
            let related = InvariantEvaluator::new(&s.point, &moved).unwrap();
            let g: Vec<CMat> = (0..m).map(|_| random_matrix(&mut rng, 3, 3)).collect();
            let pg = gauge_act(&g, &s.point).unwrap();
            for w in invariant_words(3) {
                let a = base.eval(&w);
                assert!(rel(a, related.eval(&w)) < 1e-12, "m={m} d={d} {w}");
                let b = h_invariant_value(&pg, &s.params, &w).unwrap();
                assert!(rel(a, b) < 1e-9, "m={m} d={d} {w}: {a} vs {b}");
            }
            // S ends at vertex m - 1, so one more X closes each occurrence.
            let long = InvariantWord::parse(&format!("X^{m} S X^{} S X", m + 1)).unwrap();
            let value = base.eval(&long);
            assert!(value.norm() > 1e-6);
            assert!(rel(value, related.eval(&long)) < 1e-12);
        }
    }
}

#[test]
fn lambda_gauge_at_one_vertex_keeps_eigenvalues() {
    let s = sample(1, 2, 3, 2);
    let lg = lambda_gauge(&s.point, &s.params, &[0, 0, 0]).unwrap();
    let quad = reduced_quadruple(&s.point, &s.params).unwrap();
    let mut x: Vec<_> = quad.a.diagonal().iter().copied().collect();
    x.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    for (l, xi) in lg.lambda.iter().zip(&x) {
        assert!((l - xi).norm() < 1e-9);
    }
}

#[test]
fn lambda_gauge_shape_and_z_formula() {
    for m in 1..=3 {
        for d in 1..=2 {
            let s = sample(m, d, 3, 40 + m as u64 + d as u64);
            for branch in [vec![0, 0, 0], vec![m - 1, 0, (m - 1).min(1)]] {
                let lg = lambda_gauge(&s.point, &s.params, &branch).unwrap();
                for sv in 1..m {
                    assert_eq!(lg.point.x(sv), lg.point.x(0));
                }
                for (i, l) in lg.lambda.iter().enumerate() {
                    assert_eq!(lg.point.x(0)[(i, i)], *l);
                }
                let sorted = lg.lambda.windows(2).all(|p| (p[0].re, p[0].im) <= (p[1].re, p[1].im));
                assert!(sorted);
                assert!(lambda_gauge_residual(&lg, &s.params).unwrap() < 1e-9, "m={m} d={d} {branch:?}");
                let before = moment_residual(&s.point, &s.params).unwrap().into_iter().fold(0.0, f64::max);
                let after = moment_residual(&lg.point, &s.params).unwrap().into_iter().fold(0.0, f64::max);
                assert!(before < 1e-10 && after < 1e-9, "m={m} d={d}: {before} {after}");
            }
        }
    }
}

#[test]
fn lambda_gauge_rejects_bad_branches() {
    let s = sample(2, 1, 3, 3);
    assert!(matches!(lambda_gauge(&s.point, &s.params, &[0, 0]), Err(Error::BranchInvalid(_))));
    assert!(matches!(lambda_gauge(&s.point, &s.params, &[0, 2, 0]), Err(Error::BranchInvalid(_))));
}

#[test]
fn quadratic_traces_at_two_vertices() {
    for seed in 0..10 {
        let s = sample(2, 1 + (seed as usize % 2), 3, 100 + seed);
        let lg = lambda_gauge(&s.point, &s.params, &[0, 0, 0]).unwrap();
        let f = lambda_gauge_spin(&lg, &s.params).unwrap();
        let tm = total_matrices(&lg.point).unwrap();
        let z = tm.z().unwrap();
        let tr_z2 = (z * z).trace();
        let tr_y2 = (&tm.y * &tm.y).trace();
        assert!(rel(tr_z2, tr_z2_closed_form(&lg.lambda, &f, &s.params).unwrap()) < 1e-8, "seed {seed}");
        assert!(rel(tr_y2, tr_y2_closed_form(&lg.lambda, &f, &s.params).unwrap()) < 1e-8, "seed {seed}");
    }
    let s = sample(3, 1, 3, 0);
    let lg = lambda_gauge(&s.point, &s.params, &[0, 0, 0]).unwrap();
    let f = lambda_gauge_spin(&lg, &s.params).unwrap();
    assert!(matches!(tr_z2_closed_form(&lg.lambda, &f, &s.params), Err(Error::InvalidSpec(_))));
}

#[test]
fn dual_parameters_and_moments() {
    for m in 1..=3 {
        let p = params(m, 3);
        let dp = dual_params(&p).unwrap();
        for sv in 0..m {
            assert!((dp.q()[sv] * p.q()[(m - sv) % m] - cr(1.0)).norm() < 1e-14);
        }
        assert!(rel(dp.t(), p.t().inv()) < 1e-12);
        let back = dual_params(&dp).unwrap();
        for sv in 0..m {
            assert!(rel(back.q()[sv], p.q()[sv]) < 1e-14);
        }
        let s = sample(m, 2, 3, 50 + m as u64);
        let dual = dual_point(&s.point, &s.params).unwrap();
        for r in dual.moment_residuals().unwrap() {
            assert!(r < 1e-9, "m={m}: {r}");
        }
    }
    assert!(DUAL_NOTICE.contains("dropped"));
}

#[test]
fn duality_is_an_involution() {
    let mut rng = rng_from_seed(9);
    for m in 1..=3 {
        let s = sample(m, 2, 3, 60 + m as u64);
        let dual = dual_point(&s.point, &s.params).unwrap();
        let twice = dual.dual().unwrap();
        let zs = s.point.zs().unwrap();
        let words: Vec<InvariantWord> = invariant_words(4).into_iter().filter(|w| !w.0.contains(&InvariantLetter::S)).collect();
        for w in &words {
            let a = trace_xz_word(s.point.xs(), &zs, w).unwrap();
            assert!(rel(a, twice.trace_xz(w).unwrap()) < 1e-9, "m={m} {w}");
        }
        assert!(dual.trace_xz(&InvariantWord::parse("S").unwrap()).is_err());
        // The word involution squares to the identity.
        for _ in 0..10 {
            let w = random_closed_xz_word(&mut rng, m, 6);
            assert_eq!(iota_word(&iota_word(&w, m).unwrap(), m).unwrap(), w);
        }
        assert!(iota_word(&Word::parse("w1.v1", m, 1).unwrap(), m).is_err());
    }
}

#[test]
fn first_and_fourth_families_swap() {
    for m in 1..=3 {
        for eta in [c(0.3, 0.2), c(-0.7, 0.4)] {
            let s = sample(m, 2, 3, 70 + m as u64);
            let r = family_swap_residual(&s.point, &s.params, 3, eta).unwrap();
            assert!(r < 1e-8, "m={m} eta={eta}: {r}");
        }
    }
}

#[test]
fn duality_reverses_brackets() {
    let mut rng = rng_from_seed(12);
    for m in 1..=3 {
        let s = sample(m, 2, 3, 80 + m as u64);
        for k in 0..20 {
            let f = Element::word(random_closed_xz_word(&mut rng, m, 1 + k % 4));
            let g = Element::word(random_closed_xz_word(&mut rng, m, 2 + k % 3));
            let r = anti_poisson_residual(&s.point, &s.params, &f, &g).unwrap();
            assert!(r < 1e-8, "m={m} pair {k}: {r}");
        }
    }
}
