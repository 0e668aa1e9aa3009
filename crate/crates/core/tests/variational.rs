mod common;

use std::sync::Arc;

use common::*;
use gradspace::grid::{p_laplace_relation, GridDomain};
use gradspace::variational::{multi_obstacle_set, obstacle_set};
use gradspace::{
    check_feasible_obstacle, minimize_rayleigh, rayleigh_quotient, solve_dirichlet, solve_multi_obstacle,
    solve_obstacle, verify_rk_cone, ConeSpec, Constraint, Element, Error, FeasibleSet, GradientRelation,
    NormSpec, SolverConfig, SpaceDescriptor, SpaceKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> SolverConfig {
    SolverConfig::default().with_tolerance(1e-12)
}

/// Interval grid with boundary values `left`, `right`, its relation,
/// boundary subspace and boundary data.
fn interval(n: usize, p: f64, left: f64, right: f64) -> (GridDomain, GradientRelation, FeasibleSet, Element) {
    let mut v = vec![0.0; n];
    v[0] = left;
    v[n - 1] = right;
    let dom = GridDomain::unit_interval(n).unwrap().with_boundary_values(v.clone()).unwrap();
    let rel = p_laplace_relation(&dom, p, None).unwrap();
    let mask: Vec<bool> = dom.interior_mask().iter().map(|i| !i).collect();
    let f = element(rel.domain(), v);
    (dom, rel, FeasibleSet::subspace(mask), f)
}

/// Projected Gauss–Seidel for `min Σ (u_{i+1} − u_i)²` with fixed ends and
/// `lower ≤ u ≤ upper` on the interior.
fn pgs_oracle(u0: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let n = u0.len();
    let mut u = u0.to_vec();
    for i in 1..n - 1 {
        u[i] = lower[i].max(0.0).min(upper[i]);
    }
    loop {
        let mut change = 0.0_f64;
        for i in 1..n - 1 {
            let v = (0.5 * (u[i - 1] + u[i + 1])).max(lower[i]).min(upper[i]);
            change = change.max((v - u[i]).abs());
            u[i] = v;
        }
        if change < 1e-15 {
            return u;
        }
    }
}

fn complex_instance() -> (GradientRelation, FeasibleSet, Element) {
    let rel = GradientRelation::complex_max().unwrap();
    let k0 = FeasibleSet::whole(2)
        .with(Constraint::HalfSpace {
            normal: vec![1.0, 0.0],
            offset: 0.0,
        })
        .unwrap();
    let f = element(rel.domain(), vec![1.0, 0.0]);
    (rel, k0, f)
}

#[test]
fn toy_complex_dirichlet() {
    let (rel, k0, f) = complex_instance();
    for seed in [0, 2, 9] {
        let r = solve_dirichlet(&rel, &k0, &f, &SolverConfig::default().with_seed(seed)).unwrap();
        let u = r.minimizer.coords();
        assert!((r.objective - 1.0).abs() < 1e-8);
        assert!((u[0] - 1.0).abs() < 1e-6 && u[1].abs() <= 1.0 + 1e-6);
    }
}

#[test]
fn toy_complex_obstacle_matches_exhaustive_search() {
    let (rel, k0, f) = complex_instance();
    let psi = element(rel.domain(), vec![2.0, 0.0]);
    let r = solve_obstacle(&rel, &k0, &f, &psi, &SolverConfig::default()).unwrap();
    let step = 1e-3;
    let mut best = f64::INFINITY;
    for i in 0..=3000 {
        let a = i as f64 * step;
        for j in 0..=6000 {
            let b = -3.0 + j as f64 * step;
            // Re u − 1 ≥ 0 and u ≥ ψ
            if a - 1.0 >= 0.0 && a >= 2.0 && b >= 0.0 {
                best = best.min(a.abs().max(b.abs()));
            }
        }
    }
    assert!((r.objective - best).abs() < 1e-3);
    assert!((r.objective - 2.0).abs() < 1e-8);
    let u = r.minimizer.coords();
    assert!((u[0] - 2.0).abs() < 1e-6 && u[1] >= -1e-9 && u[1] <= 2.0 + 1e-6);
}

#[test]
fn affine_boundary_data_and_linear_uniqueness() {
    let (dom, rel, k0, f) = interval(33, 2.0, 0.0, 1.0);
    let a = solve_dirichlet(&rel, &k0, &f, &tight()).unwrap();
    let b = solve_dirichlet(&rel, &k0, &f, &tight().with_seed(5)).unwrap();
    assert!(max_abs_diff(a.minimizer.coords(), &dom.sample(|x| x[0])) < 1e-9);
    assert!(a.minimizer.distance(&b.minimizer).unwrap() <= 10.0 * 1e-12 * 33.0);
}

#[test]
fn gradient_is_unique_across_starts() {
    let (_, rel, k0, f) = interval(17, 3.0, 0.0, 1.0);
    let psi = element(rel.domain(), tent(17, 0.8, 0.3, 0.25));
    let cfg = SolverConfig::default().with_tolerance(1e-10);
    let a = solve_obstacle(&rel, &k0, &f, &psi, &cfg).unwrap();
    let b = solve_obstacle(&rel, &k0, &f, &psi, &cfg.with_seed(3)).unwrap();
    let d = a.minimal_gradient.distance(&b.minimal_gradient).unwrap();
    assert!(d <= 1e-6, "gradient distance {d}");
}

#[test]
fn inactive_obstacle_changes_nothing() {
    let (_, rel, k0, f) = interval(21, 2.0, 0.0, 1.0);
    let psi = element(rel.domain(), vec![-1.0; 21]);
    let a = solve_obstacle(&rel, &k0, &f, &psi, &tight()).unwrap();
    let b = solve_dirichlet(&rel, &k0, &f, &tight()).unwrap();
    let d = max_abs_diff(a.minimizer.coords(), b.minimizer.coords());
    // the bounded route stops on objective accuracy, not on the linear residual
    assert!(d < 1e-7, "{d:e}");
    assert!((a.objective - b.objective).abs() < 1e-10);
}

fn tent(n: usize, height: f64, center: f64, half_width: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            height * (1.0 - (x - center).abs() / half_width)
        })
        .collect()
}

#[test]
fn tent_obstacle_matches_a_qp_oracle() {
    let n = 41;
    let (_, rel, k0, f) = interval(n, 2.0, 0.0, 0.0);
    let psi = tent(n, 0.5, 0.5, 0.5);
    let r = solve_obstacle(&rel, &k0, &f, &element(rel.domain(), psi.clone()), &tight()).unwrap();
    let want = pgs_oracle(f.coords(), &psi, &vec![f64::INFINITY; n]);
    assert!(max_abs_diff(r.minimizer.coords(), &want) < 1e-6);
    assert!(r.minimizer.coords().iter().zip(&psi).all(|(u, p)| *u >= p - 1e-9));

    let narrow = tent(n, 0.5, 0.4, 0.15);
    let r = solve_obstacle(&rel, &k0, &f, &element(rel.domain(), narrow.clone()), &tight()).unwrap();
    let want = pgs_oracle(f.coords(), &narrow, &vec![f64::INFINITY; n]);
    assert!(max_abs_diff(r.minimizer.coords(), &want) < 1e-6);
}

#[test]
fn obstacle_is_dirichlet_over_the_shifted_set() {
    let n = 25;
    for p in [2.0, 3.0] {
        let (_, rel, k0, f) = interval(n, p, 0.0, 0.2);
        let psi = element(rel.domain(), tent(n, 0.4, 0.3, 0.2));
        let a = solve_obstacle(&rel, &k0, &f, &psi, &tight()).unwrap();
        let b = solve_dirichlet(&rel, &obstacle_set(&k0, &f, &psi).unwrap(), &f, &tight()).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.minimizer.coords(), b.minimizer.coords());
        let free = solve_dirichlet(&rel, &k0, &f, &tight()).unwrap();
        assert!(a.objective >= free.objective - 1e-10);
    }
}

#[test]
fn extra_obstacles_never_lower_the_objective() {
    let n = 25;
    let (_, rel, k0, f) = interval(n, 2.0, 0.0, 0.0);
    let mut prev = solve_dirichlet(&rel, &k0, &f, &tight()).unwrap().objective;
    let mut lower = Vec::new();
    for (h, c) in [(0.2, 0.3), (0.3, 0.6), (0.5, 0.45)] {
        lower.push(element(rel.domain(), tent(n, h, c, 0.2)));
        let r = solve_multi_obstacle(&rel, &k0, &f, &lower, &[], &tight()).unwrap();
        assert!(r.objective >= prev - 1e-10);
        prev = r.objective;
    }
}

#[test]
fn multi_obstacle_identities() {
    let n = 21;
    let (_, rel, k0, f) = interval(n, 2.0, 0.0, 0.0);
    let psi2 = element(rel.domain(), tent(n, 0.4, 0.5, 0.3));
    let psi1 = element(rel.domain(), tent(n, 0.2, 0.5, 0.3));
    let single = solve_obstacle(&rel, &k0, &f, &psi2, &tight()).unwrap();
    let multi = solve_multi_obstacle(&rel, &k0, &f, &[psi2.clone()], &[], &tight()).unwrap();
    assert_eq!(single.minimizer.coords(), multi.minimizer.coords());
    let both = solve_multi_obstacle(&rel, &k0, &f, &[psi1, psi2.clone()], &[], &tight()).unwrap();
    assert_eq!(both.minimizer.coords(), multi.minimizer.coords());
    assert_eq!(
        multi_obstacle_set(&k0, &f, &[psi2.clone()], &[]).unwrap(),
        obstacle_set(&k0, &f, &psi2).unwrap()
    );
}

#[test]
fn two_sided_obstacles_match_a_qp_oracle() {
    let n = 41;
    let (_, rel, k0, f) = interval(n, 2.0, 0.0, 1.0);
    let lower = tent(n, 0.3, 0.25, 0.1);
    let upper: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            if (0.5..=0.9).contains(&x) {
                0.7
            } else {
                2.0
            }
        })
        .collect();
    let r = solve_multi_obstacle(
        &rel,
        &k0,
        &f,
        &[element(rel.domain(), lower.clone())],
        &[element(rel.domain(), upper.clone())],
        &tight(),
    )
    .unwrap();
    let want = pgs_oracle(f.coords(), &lower, &upper);
    assert!(max_abs_diff(r.minimizer.coords(), &want) <= 1e-6);
    let crossing = element(rel.domain(), vec![3.0; n]);
    let err = solve_multi_obstacle(&rel, &k0, &f, &[crossing], &[element(rel.domain(), upper)], &tight());
    assert!(matches!(err, Err(Error::Infeasible(_))));
}

#[test]
fn feasibility_examples_and_closed_form() {
    let s = lp_space(SpaceKind::EuclideanGrid, 2.0, 4);
    let f = element(&s, vec![1.0, 2.0, 0.0, -1.0]);
    let below = element(&s, vec![0.0, 1.0, -1.0, -3.0]);
    assert!(check_feasible_obstacle(&FeasibleSet::whole(4), &f, &below).unwrap());
    let zero = FeasibleSet::subspace(vec![true; 4]);
    let above = element(&s, add(f.coords(), &[1.0; 4]));
    assert!(!check_feasible_obstacle(&zero, &f, &above).unwrap());
    assert!(check_feasible_obstacle(&zero, &f, &below).unwrap());

    // fixed coordinates need ψ ≤ f; bounded ones need ψ − f ≤ upper
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let n = 5;
        let s = lp_space(SpaceKind::EuclideanGrid, 2.0, n);
        let mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let upper: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..1.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let psi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let set = FeasibleSet::subspace(mask.clone())
            .with(Constraint::UpperBound(upper.clone()))
            .unwrap();
        let want = (0..n).all(|i| {
            let lo = psi[i] - f[i];
            if mask[i] {
                lo <= 0.0 && upper[i] >= 0.0
            } else {
                lo <= upper[i]
            }
        });
        let got = check_feasible_obstacle(&set, &element(&s, f), &element(&s, psi)).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn solver_errors() {
    let (_, rel, _, f) = interval(9, 2.0, 0.0, 1.0);
    let zero = FeasibleSet::subspace(vec![true; 9]);
    let psi = element(rel.domain(), add(f.coords(), &[1.0; 9]));
    match solve_obstacle(&rel, &zero, &f, &psi, &tight()) {
        Err(Error::Infeasible(msg)) => assert!(msg.contains("check_feasible_obstacle")),
        other => panic!("expected infeasibility, got {other:?}"),
    }

    let (_, rel, k0, f) = interval(65, 4.0, 0.0, 1.0);
    let cfg = tight().with_max_iterations(3).with_seed(4);
    match solve_dirichlet(&rel, &k0, &f, &cfg) {
        Err(Error::NotConverged { best, .. }) => assert_eq!(best.unwrap().len(), 65),
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn rayleigh_examples() {
    let s = lp_space(SpaceKind::EuclideanGrid, 2.0, 3);
    let id = GradientRelation::identity(Arc::clone(&s)).unwrap();
    let (u, v) = minimize_rayleigh(&id, &ConeSpec::whole(3), &SolverConfig::default()).unwrap();
    assert!((v - 1.0).abs() < 1e-12 && (u.norm() - 1.0).abs() < 1e-9);

    let n = 202;
    let (dom, rel, _, _) = interval(n, 2.0, 0.0, 0.0);
    let mask: Vec<bool> = dom.interior_mask().iter().map(|i| !i).collect();
    let cone = ConeSpec::subspace(mask.clone());
    let (u, value) = minimize_rayleigh(&rel, &cone, &SolverConfig::default().with_tolerance(1e-10)).unwrap();
    assert!((value - std::f64::consts::PI).abs() <= 0.01 * std::f64::consts::PI);
    assert!((u.norm() - 1.0).abs() <= 1e-9);
    let r2 = rayleigh_quotient(&rel, &u.scaled(2.0), &SolverConfig::default()).unwrap();
    assert!((r2 - value).abs() <= 1e-12 * value);
    assert!(rayleigh_quotient(&rel, &Element::zeros(Arc::clone(rel.domain())), &SolverConfig::default()).is_err());

    // p = 3: the returned value does not exceed the quotient of smooth probes
    let (dom, rel3, _, _) = interval(41, 3.0, 0.0, 0.0);
    let mask: Vec<bool> = dom.interior_mask().iter().map(|i| !i).collect();
    let cfg = SolverConfig::default().with_tolerance(1e-10);
    let (u, value) = minimize_rayleigh(&rel3, &ConeSpec::subspace(mask), &cfg).unwrap();
    assert!((u.norm() - 1.0).abs() <= 1e-9);
    for k in 1..=3 {
        let probe = element(
            rel3.domain(),
            dom.sample(|x| (k as f64 * std::f64::consts::PI * x[0]).sin() + 0.3 * x[0] * (1.0 - x[0])),
        );
        assert!(value <= rayleigh_quotient(&rel3, &probe, &cfg).unwrap() + 1e-8);
    }
}

#[test]
fn regularity_violation_on_the_whole_space() {
    let (_, rel, _, _) = interval(9, 2.0, 0.0, 0.0);
    let r = minimize_rayleigh(&rel, &ConeSpec::whole(9), &SolverConfig::default());
    assert!(matches!(r, Err(Error::RegularityViolation { .. })), "{r:?}");
}

#[test]
fn cone_reports() {
    let (dom, rel, _, _) = interval(33, 2.0, 0.0, 0.0);
    let cfg = SolverConfig::default();
    let degenerate = verify_rk_cone(&rel, &ConeSpec::subspace(vec![true; 33]), &[], &cfg).unwrap();
    assert!(degenerate.degenerate);

    let mask: Vec<bool> = dom.interior_mask().iter().map(|i| !i).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let samples: Vec<Element> = (0..40)
        .map(|_| {
            let mut v: Vec<f64> = (0..33).map(|_| rng.gen_range(-1.0..1.0)).collect();
            v[0] = 0.0;
            v[32] = 0.0;
            element(rel.domain(), v)
        })
        .collect();
    let report = verify_rk_cone(&rel, &ConeSpec::subspace(mask), &samples, &cfg).unwrap();
    assert!(report.regular && report.scaling_closed && !report.degenerate);
    // ‖u‖ / ‖Du‖ never exceeds one over the root of the least stiffness eigenvalue
    let h = dom.spacing();
    let m = 31;
    let mut k = vec![vec![0.0; m]; m];
    for i in 0..m {
        k[i][i] = 2.0 / (h * h);
        if i + 1 < m {
            k[i][i + 1] = -1.0 / (h * h);
            k[i + 1][i] = -1.0 / (h * h);
        }
    }
    let bound = 1.0 / jacobi_eigenvalues(k)[0].sqrt();
    let c = report.poincare.constant().unwrap();
    assert!(c > 0.0 && c <= bound * (1.0 + 1e-9), "{c} vs {bound}");
    assert!(bound <= 1.0 / std::f64::consts::PI * 1.01);

    let with_constant = [samples[0].clone(), element(rel.domain(), vec![1.0; 33])];
    let report = verify_rk_cone(&rel, &ConeSpec::whole(33), &with_constant, &cfg).unwrap();
    assert!(!report.regular);
    assert_eq!(report.violations, vec![1]);

    let outside = verify_rk_cone(
        &rel,
        &ConeSpec::subspace(dom.interior_mask().iter().map(|i| !i).collect()),
        &with_constant,
        &cfg,
    )
    .unwrap();
    assert_eq!(outside.outside, vec![1]);
}

#[test]
fn cone_rejects_shifted_constraints() {
    let lower = FeasibleSet::whole(2).with(Constraint::LowerBound(vec![1.0, 0.0])).unwrap();
    assert!(ConeSpec::new(lower).is_err());
    let half = FeasibleSet::whole(2)
        .with(Constraint::HalfSpace {
            normal: vec![1.0, 1.0],
            offset: 0.0,
        })
        .unwrap();
    let cone = ConeSpec::new(half).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let inside = cone.set().contains(&v, 1e-12).unwrap();
        for a in [0.1, 3.0, 50.0] {
            assert_eq!(cone.set().contains(&scale(&v, a), 1e-12).unwrap(), inside);
        }
    }
}

#[test]
fn midpoints_stay_in_feasible_sets() {
    let s = SpaceDescriptor::new(SpaceKind::EuclideanGrid, 3, NormSpec::lp(2.0, 3)).unwrap().shared();
    let set = FeasibleSet::whole(3)
        .with(Constraint::LowerBound(vec![-0.5, f64::NEG_INFINITY, 0.0]))
        .unwrap()
        .with(Constraint::HalfSpace {
            normal: vec![1.0, -1.0, 2.0],
            offset: -0.3,
        })
        .unwrap()
        .shifted(&element(&s, vec![0.1, 0.2, -0.1]))
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut checked = 0;
    while checked < 200 {
        let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if set.contains(&a, 1e-12).unwrap() && set.contains(&b, 1e-12).unwrap() {
            assert!(set.contains(&scale(&add(&a, &b), 0.5), 1e-12).unwrap());
            checked += 1;
        }
    }
}
