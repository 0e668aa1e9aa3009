mod common;

use common::*;
use gradspace::engine::linop::{DenseMatrix, LinearOperator};
use gradspace::grid::{p_energy, p_laplace_relation, GridDomain};
use gradspace::matrix::fredholm_poincare_constant;
use gradspace::metric::{graph_minimal_upper_gradient, Edge, WeightedGraph};
use gradspace::{order_leq, OrderSpec, SolverConfig, SpaceKind};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn nonneg(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0f64, n)
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn minimal_gradient_is_homogeneous(u in coords(12), alpha in -3.0..3.0f64) {
        let dom = GridDomain::unit_interval(12).unwrap();
        let rel = p_laplace_relation(&dom, 3.0, None).unwrap();
        let cfg = SolverConfig::default();
        let g = rel.minimal_gradient(&element(rel.domain(), u.clone()), &cfg).unwrap();
        let ga = rel.minimal_gradient(&element(rel.domain(), scale(&u, alpha)), &cfg).unwrap();
        prop_assert!(max_abs_diff(ga.coords(), &scale(g.coords(), alpha)) <= 1e-12 * (1.0 + norm2(g.coords())));
    }

    #[test]
    fn energy_is_p_homogeneous(u in coords(9), alpha in 0.1..4.0f64, p in 1.2..4.0f64) {
        let dom = GridDomain::unit_interval(9).unwrap();
        let e = p_energy(&u, &dom, p, None).unwrap();
        let ea = p_energy(&scale(&u, alpha), &dom, p, None).unwrap();
        prop_assert!(close(ea, alpha.powf(p) * e, 1e-10));
        prop_assert!(e >= 0.0);
    }

    #[test]
    fn graph_gradient_ignores_constants_and_scales(
        u in coords(6),
        lengths in prop::collection::vec(0.1..3.0f64, 7),
        shift in -5.0..5.0f64,
        alpha in -3.0..3.0f64,
    ) {
        // a path plus a chord
        let mut edges: Vec<Edge> = (0..5).map(|i| Edge { from: i, to: i + 1, length: lengths[i] }).collect();
        edges.push(Edge { from: 0, to: 5, length: lengths[5] });
        edges.push(Edge { from: 1, to: 4, length: lengths[6] });
        let graph = WeightedGraph::new(6, edges.clone()).unwrap();
        let g = graph_minimal_upper_gradient(&graph, &u).unwrap();
        for (e, ge) in edges.iter().zip(&g) {
            prop_assert_eq!(*ge, (u[e.from] - u[e.to]).abs() / e.length);
        }
        let shifted: Vec<f64> = u.iter().map(|v| v + shift).collect();
        let gs = graph_minimal_upper_gradient(&graph, &shifted).unwrap();
        prop_assert!(max_abs_diff(&g, &gs) <= 1e-12 * (1.0 + shift.abs()));
        let ga = graph_minimal_upper_gradient(&graph, &scale(&u, alpha)).unwrap();
        prop_assert!(max_abs_diff(&ga, &scale(&g, alpha.abs())) <= 1e-12);
    }

    #[test]
    fn fredholm_bound_holds_off_the_kernel(seed in any::<u64>(), v in coords(5), rank in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // a 4 × 5 map of the given rank: the first `rank` columns are random,
        // the rest repeat them
        let base = random_square(&mut rng, 5);
        let data: Vec<f64> = (0..4)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .map(|(i, j)| base[i * 5 + j % rank.min(4)])
            .collect();
        let f = DenseMatrix::new(4, 5, data).unwrap();
        let bound = fredholm_poincare_constant(&f).unwrap();
        prop_assert_eq!(bound.kernel.len(), 5 - rank.min(4));
        let w = bound.project_to_complement(&v);
        let fw = f.apply_vec(&w);
        prop_assert!(norm2(&w) <= bound.constant * norm2(&fw) * (1.0 + 1e-9) + 1e-12);
        for k in &bound.kernel {
            prop_assert!(norm2(&f.apply_vec(k)) <= 1e-6 * bound.constant.recip().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn componentwise_order_is_a_preorder(a in coords(5), d1 in nonneg(5), d2 in nonneg(5), c in coords(5)) {
        let s = lp_space(SpaceKind::EuclideanGrid, 2.0, 5);
        let (ea, eb) = (element(&s, a.clone()), element(&s, add(&a, &d1)));
        let ec = element(&s, add(&add(&a, &d1), &d2));
        let leq = |x, y| order_leq(OrderSpec::Componentwise, x, y, 0.0).unwrap();
        prop_assert!(leq(&ea, &ea));
        prop_assert!(leq(&ea, &eb) && leq(&eb, &ec) && leq(&ea, &ec));
        let other = element(&s, c);
        if leq(&ea, &other) && leq(&other, &ea) {
            prop_assert_eq!(ea.coords(), other.coords());
        }
    }

    #[test]
    fn psd_order_is_a_preorder(seed in any::<u64>(), r1 in 0usize..=3, r2 in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = matrix_space(2.0, 3);
        let a = random_symmetric(&mut rng, 3);
        let b = add(&a, &random_psd(&mut rng, 3, r1));
        let c = add(&b, &random_psd(&mut rng, 3, r2));
        let (ea, eb, ec) = (element(&s, a), element(&s, b), element(&s, c));
        let leq = |x, y| order_leq(OrderSpec::Psd, x, y, 1e-12).unwrap();
        prop_assert!(leq(&ea, &ea));
        prop_assert!(leq(&ea, &eb) && leq(&eb, &ec) && leq(&ea, &ec));
    }

    #[test]
    fn norms_respect_the_order(a in nonneg(6), d in nonneg(6), p in 1.0..5.0f64) {
        let s = lp_space(SpaceKind::EuclideanGrid, p, 6);
        let (ea, eb) = (element(&s, a.clone()), element(&s, add(&a, &d)));
        prop_assert!(ea.norm() <= eb.norm() * (1.0 + 1e-14));
    }

    #[test]
    fn schatten_norms_respect_the_psd_order(seed in any::<u64>(), r1 in 0usize..=3, r2 in 0usize..=3, p in 1.0..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = matrix_space(p, 3);
        let a = random_psd(&mut rng, 3, r1);
        let b = add(&a, &random_psd(&mut rng, 3, r2));
        let (ea, eb) = (element(&s, a), element(&s, b));
        prop_assert!(ea.norm() <= eb.norm() * (1.0 + 1e-12) + 1e-14);
    }
}
