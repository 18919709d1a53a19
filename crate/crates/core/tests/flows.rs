mod common;

use common::flow_sample;
use mqv_core::bracket::{BracketTable, Element, Word};
use mqv_core::flows::*;
use mqv_core::hamiltonians::{assemble, element_pow, family_element, total_matrices, Family};
use mqv_core::linalg::{c, cr, frobenius, identity, inverse, CMat};
use mqv_core::rep_space::{gauge_act, moment_residual};
use mqv_core::sampling::{random_matrix, rng_from_seed};
use mqv_core::{Error, RepPoint};

fn distance(a: &RepPoint, b: &RepPoint) -> f64 {
    let m = a.spec().m;
    (0..m).map(|s| frobenius(&(a.x(s) - b.x(s))) + frobenius(&(a.y(s) - b.y(s)))).sum()
}

fn explicit(m: usize) -> [Hamiltonian; 3] {
    [Hamiltonian::TrZ(m), Hamiltonian::TrY(m), Hamiltonian::TrT(1)]
}

#[test]
fn zero_time_is_identity() {
    for m in 1..=3 {
        let s = flow_sample(m, 2, 3, 1);
        for h in explicit(m) {
            let p = closed_form_flow(&s.point, h, cr(0.0)).unwrap();
            assert!(distance(&p, &s.point) < 1e-12, "{h:?}");
        }
    }
}

#[test]
fn conserved_blocks_are_copied() {
    for m in 1..=3 {
        let s = flow_sample(m, 2, 3, 2);
        let time = c(0.3, -0.1);
        let pz = flow_z(&s.point, m, time).unwrap();
        let py = flow_y(&s.point, m, time).unwrap();
        let pt = flow_t(&s.point, 2, time).unwrap();
        for sv in 0..m {
            assert_eq!(pz.z(sv).unwrap(), s.point.z(sv).unwrap());
            assert_eq!(py.y(sv), s.point.y(sv));
        }
        for p in [&pz, &py, &pt] {
            assert_eq!(p.vs(), s.point.vs());
            assert_eq!(p.ws(), s.point.ws());
        }
        let t0 = total_matrices(&s.point).unwrap().t();
        let t1 = total_matrices(&pt).unwrap().t();
        assert!(frobenius(&(t0 - t1)) < 1e-10);
    }
}

#[test]
fn closed_forms_stay_on_shell() {
    for m in 1..=3 {
        let s = flow_sample(m, 2, 3, 3);
        for h in explicit(m) {
            let p = closed_form_flow(&s.point, h, c(0.2, 0.1)).unwrap();
            let r = moment_residual(&p, &s.params).unwrap();
            assert!(r.iter().all(|v| *v < 1e-8), "{h:?}: {r:?}");
        }
    }
}

/// Richardson slope of the RK4 oracle against each closed form.
#[test]
fn oracle_converges_at_fourth_order() {
    for m in 1..=3 {
        let s = flow_sample(m, 2, 3, 4);
        for h in explicit(m) {
            let time = cr(1.0);
            let exact = closed_form_flow(&s.point, h, time).unwrap();
            let errors: Vec<f64> = [10, 20, 40]
                .iter()
                .map(|&steps| {
                    let spec = FlowSpec::new(h, time, steps, m).unwrap();
                    distance(ode_oracle(&s.point, &spec, &s.params).unwrap().endpoint(), &exact)
                })
                .collect();
            for w in errors.windows(2) {
                let order = observed_order(w[0], w[1]);
                assert!(order >= 3.7, "m={m} {h:?}: errors {errors:?}, order {order:.2}");
            }
        }
    }
}

#[test]
fn oracle_matches_flow_z_at_small_step() {
    for m in 1..=3 {
        let s = flow_sample(m, 1, 3, 5);
        let time = c(0.1, 0.05);
        let spec = FlowSpec::new(Hamiltonian::TrZ(m), time, 100, m).unwrap();
        let traj = ode_oracle(&s.point, &spec, &s.params).unwrap();
        assert!(traj.aborted.is_none());
        let exact = flow_z(&s.point, m, time).unwrap();
        assert!(distance(traj.endpoint(), &exact) <= 1e-9);
        assert!(traj.moment_residuals.iter().all(|r| *r <= 1e-8));
    }
}

#[test]
fn flow_t_semigroup() {
    let s = flow_sample(2, 2, 3, 6);
    let (t1, t2) = (c(0.2, 0.1), c(-0.05, 0.3));
    let two = flow_t(&flow_t(&s.point, 2, t1).unwrap(), 2, t2).unwrap();
    let one = flow_t(&s.point, 2, t1 + t2).unwrap();
    assert!(distance(&two, &one) < 1e-10);
}

#[test]
fn flows_commute_with_gauge() {
    for m in 1..=3 {
        let n = 3;
        let s = flow_sample(m, 2, n, 7);
        let mut rng = rng_from_seed(70);
        let g: Vec<CMat> = (0..m).map(|_| random_matrix(&mut rng, n, n) + identity(n) * cr(2.0)).collect();
        let moved = gauge_act(&g, &s.point).unwrap();
        for h in explicit(m) {
            let a = gauge_act(&g, &closed_form_flow(&s.point, h, c(0.2, 0.1)).unwrap()).unwrap();
            let b = closed_form_flow(&moved, h, c(0.2, 0.1)).unwrap();
            let scale: f64 = (0..m).map(|sv| frobenius(a.x(sv)) + frobenius(a.y(sv))).sum();
            assert!(distance(&a, &b) / scale < 1e-9, "{h:?}");
        }
    }
}

#[test]
fn lemma_fields_agree_with_engine() {
    for m in 1..=3 {
        let (n, d) = (2, 2);
        let s = flow_sample(m, d, n, 8);
        let table = BracketTable::new(m, d);
        let eta = c(0.3, 0.2);
        for h in [
            Hamiltonian::TrZ(m),
            Hamiltonian::TrY(m),
            Hamiltonian::TrT(2),
            Hamiltonian::Family { family: Family::Four, j: m, eta },
            Hamiltonian::Family { family: Family::Three, j: 2 * m, eta },
            Hamiltonian::Family { family: Family::Two, j: 2, eta },
        ] {
            let (fam, e, k) = h.as_family();
            let ev = engine_velocity(&s.point, &table, &family_element(m, fam, e), k).unwrap();
            let (lx, lp) = lemma_velocity(&s.point, h).unwrap().unwrap();
            let ex = assemble(&ev[..m], n, true);
            let ey = assemble(&ev[m..2 * m], n, false);
            let x = assemble(s.point.xs(), n, true);
            let y = assemble(s.point.ys(), n, false);
            let xi = inverse(&x, "X").unwrap();
            let ep = match fam {
                Family::Four => &ey - &xi * &ex * &xi,
                Family::Three => ey.clone(),
                _ => &ex * &y + &x * &ey,
            };
            let scale = frobenius(&lx).max(1.0);
            assert!(frobenius(&(&ex - &lx)) / scale < 1e-10, "m={m} {h:?}");
            assert!(frobenius(&(&ep - &lp)) / frobenius(&lp).max(1.0) < 1e-10, "m={m} {h:?}");
            let framing: f64 = ev[2 * m..].iter().map(frobenius).sum();
            assert!(framing / scale < 1e-12, "m={m} {h:?}: {framing:.2e}");
        }
        assert!(lemma_velocity(&s.point, Hamiltonian::Family { family: Family::One, j: m, eta }).unwrap().is_none());
    }
}

#[test]
fn families_conserved_along_oracle() {
    let eta = c(0.25, -0.15);
    for m in 1..=2 {
        let (n, d) = (2, 2);
        let s = flow_sample(m, d, n, 9);
        for fam in Family::ALL {
            let k = fam.step(m);
            // The moment residual decays like the RK4 error, h^4; the engine
            // route for the first family is costlier and already accurate.
            let steps = if fam == Family::One { 400 } else { 1600 };
            let flow = FlowSpec::new(Hamiltonian::Family { family: fam, j: k, eta }, cr(1.0), steps, m).unwrap();
            let gen = family_element(m, fam, eta);
            let other = family_element(m, fam, c(-0.4, 0.6));
            let observables = vec![
                Observable::new("same", element_pow(&gen, 2 * k)),
                Observable::new("other", element_pow(&other, k)),
            ];
            let times: Vec<_> = (0..=4).map(|i| cr(i as f64 * 0.25)).collect();
            let table = conservation_report(&s.point, &flow, &s.params, &observables, &times).unwrap();
            for row in &table.rows {
                assert!(row.max_rel_drift <= 1e-7, "m={m} {fam:?} {}: {:.2e}", row.name, row.max_rel_drift);
            }
            assert!(table.moment_residuals.iter().all(|r| *r <= 1e-8), "m={m} {fam:?}: {:?}", table.moment_residuals);
        }
    }
}

#[test]
fn engine_oracle_tracks_lemma_oracle() {
    let m = 2;
    let s = flow_sample(m, 1, 2, 10);
    // The two oracles integrate different variables, so they agree to the
    // RK4 error only.
    let flow = FlowSpec::new(Hamiltonian::Family { family: Family::Four, j: 2, eta: c(0.2, 0.1) }, cr(0.3), 300, m).unwrap();
    let a = ode_oracle(&s.point, &flow, &s.params).unwrap();
    let b = engine_oracle(&s.point, &flow, &s.params).unwrap();
    let gap = distance(a.endpoint(), b.endpoint());
    assert!(gap < 1e-9, "{gap:.2e}");
}

#[test]
fn non_conserved_observable_is_only_reported() {
    let m = 2;
    let s = flow_sample(m, 1, 3, 11);
    let flow = FlowSpec::new(Hamiltonian::TrZ(m), cr(0.5), 10, m).unwrap();
    let xm = Element::word(Word::parse("x0.x1", m, 1).unwrap());
    let table = conservation_report(&s.point, &flow, &s.params, &[Observable::new("trX", xm)], &[cr(0.0), cr(0.5)]).unwrap();
    let row = table.row("trX").unwrap();
    assert_eq!(row.values.len(), 2);
    assert!(row.max_abs_drift.is_finite());
}

#[test]
fn invalid_flow_requests() {
    assert!(matches!(FlowSpec::new(Hamiltonian::TrZ(3), cr(1.0), 10, 2), Err(Error::InvalidSpec(_))));
    assert!(matches!(FlowSpec::new(Hamiltonian::TrT(3), cr(1.0), 0, 2), Err(Error::InvalidSpec(_))));
    assert!(FlowSpec::new(Hamiltonian::TrT(3), cr(1.0), 5, 2).is_ok());
    let s = flow_sample(2, 1, 2, 1);
    assert!(closed_form_flow(&s.point, Hamiltonian::Family { family: Family::One, j: 2, eta: cr(0.0) }, cr(1.0)).is_err());
    assert!(flow_z(&s.point, 1, cr(1.0)).is_err());
}
