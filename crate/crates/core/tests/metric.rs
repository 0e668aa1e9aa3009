mod common;

use common::*;
use gradspace::metric::{
    compare_upper_and_hajlasz, friedrichs_check, graph_minimal_upper_gradient, hajlasz_minimal_gradient,
    poincare_minimal_gradient, FiniteMetricMeasureSpace, MetricGradient, WeightedGraph,
};
use gradspace::{solve_dirichlet, FeasibleSet, GradientRelation, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> SolverConfig {
    SolverConfig::default().with_tolerance(1e-11)
}

fn weighted_norm(h: &[f64], mu: &[f64], p: f64) -> f64 {
    h.iter().zip(mu).map(|(x, m)| m * x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(members, dilated members, radius)` for every closed ball with a
/// pairwise distance as radius.
fn balls(dist: &[Vec<f64>], lambda: f64) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let n = dist.len();
    let mut out = Vec::new();
    for c in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                let r = dist[i][j];
                let members = (0..n).filter(|y| dist[c][*y] <= r).collect();
                let dilated = (0..n).filter(|y| dist[c][*y] <= lambda * r).collect();
                out.push((members, dilated, r));
            }
        }
    }
    out
}

/// `(⨍_B |u − u_B|, r ⨍_{λB} k)` for one ball.
fn ball_sides(ball: &(Vec<usize>, Vec<usize>, f64), mu: &[f64], u: &[f64], k: &[f64]) -> (f64, f64) {
    let (members, dilated, r) = ball;
    let mass: f64 = members.iter().map(|i| mu[*i]).sum();
    let mean: f64 = members.iter().map(|i| mu[*i] * u[*i]).sum::<f64>() / mass;
    let lhs = members.iter().map(|i| mu[*i] * (u[*i] - mean).abs()).sum::<f64>() / mass;
    let dmass: f64 = dilated.iter().map(|i| mu[*i]).sum();
    let rhs = r * dilated.iter().map(|i| mu[*i] * k[*i]).sum::<f64>() / dmass;
    (lhs, rhs)
}

/// Grid search over the first `n − 1` entries of `k`, least admissible last entry.
fn poincare_brute_force(dist: &[Vec<f64>], mu: &[f64], u: &[f64], p: f64, lambda: f64, step: f64, top: f64) -> f64 {
    let n = u.len();
    let family = balls(dist, lambda);
    let steps = (top / step).ceil() as usize + 1;
    let last = n - 1;
    let mut best = f64::INFINITY;
    let mut k = vec![0.0; n];
    for code in 0..steps.pow(last as u32) {
        let mut c = code;
        for ki in k.iter_mut().take(last) {
            *ki = (c % steps) as f64 * step;
            c /= steps;
        }
        k[last] = 0.0;
        let mut ok = true;
        for b in &family {
            let (lhs, rhs) = ball_sides(b, mu, u, &k);
            if lhs <= rhs {
                continue;
            }
            if !b.1.contains(&last) {
                ok = false;
                break;
            }
            let dmass: f64 = b.1.iter().map(|i| mu[*i]).sum();
            k[last] += (lhs - rhs) * dmass / (b.2 * mu[last]);
        }
        if ok {
            best = best.min(weighted_norm(&k, mu, p));
        }
    }
    best
}

#[test]
fn hajlasz_examples() {
    let x = FiniteMetricMeasureSpace::on_line(&[0.0, 1.0], vec![1.0, 1.0]).unwrap();
    let h = hajlasz_minimal_gradient(&x, &[0.0, 1.0], 2.0, &cfg()).unwrap();
    let brute = hajlasz_brute_force(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0, 1.0], &[0.0, 1.0], 2.0, 1e-3);
    assert!((weighted_norm(&h, &[1.0, 1.0], 2.0) - brute).abs() < 1e-3);
    assert!((h[0] - 0.5).abs() < 1e-5 && (h[1] - 0.5).abs() < 1e-5);

    let x3 = FiniteMetricMeasureSpace::on_line(&[0.0, 1.0, 3.0], vec![1.0, 2.0, 0.5]).unwrap();
    assert_eq!(hajlasz_minimal_gradient(&x3, &[2.0; 3], 2.0, &cfg()).unwrap(), vec![0.0; 3]);
    let u = [0.3, -1.0, 0.7];
    let h = hajlasz_minimal_gradient(&x3, &u, 3.0, &cfg()).unwrap();
    let h3 = hajlasz_minimal_gradient(&x3, &scale(&u, 3.0), 3.0, &cfg()).unwrap();
    assert!(max_abs_diff(&h3, &scale(&h, 3.0)) < 1e-4);
    assert!(hajlasz_minimal_gradient(&x3, &u, 1.0, &cfg()).is_err());
    assert!(hajlasz_minimal_gradient(&x3, &u[..2], 2.0, &cfg()).is_err());
}

#[test]
fn hajlasz_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let pos = [0.0, rng.gen_range(0.3..1.5), rng.gen_range(1.6..3.0)];
        let mu: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dist: Vec<Vec<f64>> = pos.iter().map(|a| pos.iter().map(|b| f64::abs(a - b)).collect()).collect();
        let x = FiniteMetricMeasureSpace::from_rows(&dist, mu.clone()).unwrap();
        for p in [2.0, 3.0] {
            let h = hajlasz_minimal_gradient(&x, &u, p, &cfg()).unwrap();
            for i in 0..3 {
                assert!(h[i] >= -1e-9);
                for j in i + 1..3 {
                    assert!((u[i] - u[j]).abs() <= dist[i][j] * (h[i] + h[j]) + 1e-9);
                }
            }
            // the grid search only bounds the optimum from above
            let brute = hajlasz_brute_force(&dist, &mu, &u, p, 1e-3);
            let got = weighted_norm(&h, &mu, p);
            assert!(got <= brute + 1e-9 && brute - got < 1e-3, "p = {p}: {got} vs {brute}");
        }
    }
}

#[test]
fn graph_upper_gradient_examples() {
    let g = WeightedGraph::path(&[1.0]).unwrap();
    assert_eq!(graph_minimal_upper_gradient(&g, &[0.0, 1.0]).unwrap(), vec![1.0]);
    let g = WeightedGraph::path(&[1.0, 1.0]).unwrap();
    assert_eq!(graph_minimal_upper_gradient(&g, &[0.0, 1.0, 3.0]).unwrap(), vec![1.0, 2.0]);
    assert_eq!(graph_minimal_upper_gradient(&g, &[5.0; 3]).unwrap(), vec![0.0, 0.0]);
    let g = WeightedGraph::path(&[0.5, 2.0]).unwrap();
    assert_eq!(graph_minimal_upper_gradient(&g, &[0.0, 1.0, 3.0]).unwrap(), vec![2.0, 1.0]);
    assert!(graph_minimal_upper_gradient(&g, &[0.0]).is_err());
}

#[test]
fn poincare_examples() {
    let x = FiniteMetricMeasureSpace::on_line(&[0.0, 1.0], vec![1.0, 1.0]).unwrap();
    let k = poincare_minimal_gradient(&x, &[0.0, 1.0], 2.0, 1.0, &cfg()).unwrap();
    assert!((k[0] - 0.5).abs() < 1e-5 && (k[1] - 0.5).abs() < 1e-5);
    let dist = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let brute = poincare_brute_force(&dist, &[1.0, 1.0], &[0.0, 1.0], 2.0, 1.0, 1e-3, 2.0);
    assert!((weighted_norm(&k, &[1.0, 1.0], 2.0) - brute).abs() < 1e-3);
    assert!(poincare_minimal_gradient(&x, &[1.0, 1.0], 2.0, 1.0, &cfg())
        .unwrap()
        .iter()
        .all(|v| v.abs() < 1e-12));
    let k2 = poincare_minimal_gradient(&x, &[0.0, 2.5], 2.0, 1.0, &cfg()).unwrap();
    assert!(max_abs_diff(&k2, &scale(&k, 2.5)) < 1e-4);
    assert!(poincare_minimal_gradient(&x, &[0.0, 1.0], 2.0, 0.5, &cfg()).is_err());
}

#[test]
fn poincare_matches_exhaustive_search_and_binds() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..12 {
        let pos = [0.0, rng.gen_range(0.3..1.5), rng.gen_range(1.6..3.0)];
        let mu: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dist: Vec<Vec<f64>> = pos.iter().map(|a| pos.iter().map(|b| f64::abs(a - b)).collect()).collect();
        let x = FiniteMetricMeasureSpace::from_rows(&dist, mu.clone()).unwrap();
        for lambda in [1.0, 2.0] {
            let k = poincare_minimal_gradient(&x, &u, 2.0, lambda, &cfg()).unwrap();
            let family = balls(&dist, lambda);
            let mut slack = f64::INFINITY;
            for b in &family {
                let (lhs, rhs) = ball_sides(b, &mu, &u, &k);
                assert!(lhs <= rhs + 1e-8, "ball constraint violated by {}", lhs - rhs);
                slack = slack.min(rhs - lhs);
            }
            assert!(slack.abs() < 1e-6, "no binding ball, least slack {slack}");
            let top = k.iter().fold(0.0_f64, |a, v| a.max(*v)) * 1.5 + 0.1;
            let brute = poincare_brute_force(&dist, &mu, &u, 2.0, lambda, 2e-3, top);
            let got = weighted_norm(&k, &mu, 2.0);
            assert!(got <= brute + 1e-9 && brute - got < 1e-3, "{got} vs {brute}");
        }
    }
}

#[test]
fn friedrichs_constant_against_exhaustive_search() {
    let dist = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]];
    let mu = vec![1.0, 0.5, 2.0];
    let x = FiniteMetricMeasureSpace::from_rows(&dist, mu.clone()).unwrap();
    let samples: Vec<Vec<f64>> = (-10..=10).map(|t| vec![t as f64 * 0.1, 0.0, 0.0]).collect();
    let r = friedrichs_check(&x, MetricGradient::Hajlasz, &[0], &samples, 2.0, &cfg()).unwrap();
    assert_eq!(r.nonzero_samples, 20);
    let got = r.constant.constant().unwrap();
    let mut want = 0.0_f64;
    for u in &samples {
        let nu = weighted_norm(u, &mu, 2.0);
        if nu > 0.0 {
            want = want.max(nu / hajlasz_brute_force(&dist, &mu, u, 2.0, 1e-4));
        }
    }
    assert!((got - want).abs() <= 1e-3 * want, "{got} vs {want}");

    let r = friedrichs_check(
        &x,
        MetricGradient::BallPoincare { lambda: 1.0 },
        &[0],
        &samples,
        2.0,
        &cfg(),
    )
    .unwrap();
    assert!(r.constant.constant().unwrap().is_finite());
    assert!(friedrichs_check(&x, MetricGradient::Hajlasz, &[0, 1, 2], &samples, 2.0, &cfg()).is_err());
    assert!(friedrichs_check(&x, MetricGradient::Hajlasz, &[1], &samples, 2.0, &cfg()).is_err());
}

#[test]
fn vanishing_function_with_positive_gradient() {
    let x = FiniteMetricMeasureSpace::on_line(&[0.0, 1.0, 2.0], vec![1.0; 3]).unwrap();
    let u = [0.0, 0.0, 1.0];
    let h = hajlasz_minimal_gradient(&x, &u, 2.0, &cfg()).unwrap();
    assert_eq!(u[1], 0.0);
    assert!(h[1] > 0.4, "h = {h:?}");
}

#[test]
fn upper_gradient_ratio_report() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let lengths: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..2.0)).collect();
    let g = WeightedGraph::path(&lengths).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let u: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = compare_upper_and_hajlasz(&g, vec![1.0; 6], &u, 2.0, &cfg()).unwrap();
        assert_eq!(c.ratios.len(), 5);
        worst = worst.max(c.max_ratio);
    }
    println!("largest upper-gradient / Hajłasz-sum ratio on a path: {worst:.6}");
    assert!(worst <= 1.0 + 1e-6);
}

#[test]
fn dirichlet_gradient_is_independent_of_the_start() {
    let x = FiniteMetricMeasureSpace::on_line(&[0.0, 1.0, 1.5, 3.0], vec![1.0, 0.5, 2.0, 1.0]).unwrap();
    let rel = GradientRelation::hajlasz(x, 2.0).unwrap();
    let f = element(rel.domain(), vec![0.0, 0.2, -0.4, 1.0]);
    let k0 = FeasibleSet::subspace(vec![true, false, false, true]);
    let a = solve_dirichlet(&rel, &k0, &f, &cfg()).unwrap();
    let b = solve_dirichlet(&rel, &k0, &f, &cfg().with_seed(7)).unwrap();
    assert!((a.objective - b.objective).abs() < 1e-8);
    assert!(max_abs_diff(a.minimal_gradient.coords(), b.minimal_gradient.coords()) < 1e-3);
    let again = rel.minimal_gradient(&a.minimizer, &cfg()).unwrap();
    assert!((again.norm() - a.objective).abs() < 1e-8);
    assert!(a.feasibility_residual <= 1e-9);
}
