//! Kernels for Rayleigh-quotient minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::engine::cg::cg_solve_from;
use crate::engine::descent::{EnergyOracle, STALL_WINDOW};
use crate::engine::dykstra::ProjectionOracle;
use crate::engine::vecops::{dot, norm_inf};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Normalized so that `vᵀ M v = 1`.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Smallest eigenpair of the generalized problem `A v = λ M v` with `A`
/// symmetric positive definite and `M` a positive diagonal, by inverse
/// iteration with inner conjugate-gradient solves.
pub fn inverse_power<F>(apply_a: F, mass: &[f64], cfg: &SolverConfig) -> Result<EigenPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = mass.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v: Vec<f64> = (0..n).map(|_| 1.0 + 0.5 * rng.gen::<f64>()).collect();
    normalize_mass(&mut v, mass);
    let mut av = vec![0.0; n];
    let mut value = f64::INFINITY;
    let inner_tol = (cfg.tol_objective * 1e-3).max(1e-15);

    for it in 1..=cfg.max_iterations {
        let rhs: Vec<f64> = v.iter().zip(mass).map(|(x, m)| x * m).collect();
        let solve = cg_solve_from(&apply_a, &rhs, Some(&v), inner_tol, 10 * n + 100)
            .or_else(|e| match e {
                Error::NotConverged { best: Some(x), .. } => Ok(crate::engine::cg::CgOutcome {
                    x,
                    iterations: 0,
                    residual: f64::NAN,
                }),
                other => Err(other),
            })?;
        let mut w = solve.x;
        normalize_mass(&mut w, mass);
        apply_a(&w, &mut av);
        let next = dot(&w, &av);
        let done = (value - next).abs() <= cfg.tol_objective * next.abs();
        value = next;
        v = w;
        if done {
            return Ok(EigenPair {
                value,
                vector: v,
                iterations: it,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: f64::NAN,
        best: Some(v),
    })
}

fn normalize_mass(v: &mut [f64], mass: &[f64]) {
    let m: f64 = v.iter().zip(mass).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

/// A positively homogeneous functional given through its power
/// `Φ = ‖·‖^degree` and the gradient of that power.
pub struct HomogeneousTerm<'a> {
    pub power: &'a dyn EnergyOracle,
    pub degree: f64,
}

impl HomogeneousTerm<'_> {
    fn norm(&self, x: &[f64]) -> f64 {
        self.power.value(x).max(0.0).powf(1.0 / self.degree)
    }
}

#[derive(Debug, Clone)]
pub struct RayleighOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes `R(u) = ‖g_u‖ / ‖u‖` over a cone by normalized projected
/// gradient steps with Barzilai-Borwein step sizes and Armijo backtracking.
/// The iterate is renormalized to unit denominator after every step.
pub fn rayleigh_iterate(
    numerator: &HomogeneousTerm<'_>,
    denominator: &HomogeneousTerm<'_>,
    cone: &dyn ProjectionOracle,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<RayleighOutcome> {
    let tol = cfg.tol_objective;
    let normalize = |x: &[f64]| -> Result<Vec<f64>> {
        let d = denominator.norm(x);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidInput("iterate left the cone or vanished".into()));
        }
        Ok(x.iter().map(|v| v / d).collect())
    };
    let quotient = |x: &[f64]| -> Result<f64> {
        let num = numerator.norm(x);
        let den = denominator.norm(x);
        if num <= 1e-12 * den {
            return Err(Error::RegularityViolation { norm: den });
        }
        Ok(num / den)
    };
    let grad = |x: &[f64], r: f64| -> Vec<f64> {
        let (pn, gn) = numerator.power.value_and_gradient(x);
        let (pd, gd) = denominator.power.value_and_gradient(x);
        gn.iter()
            .zip(&gd)
            .map(|(a, b)| r * (a / (numerator.degree * pn) - b / (denominator.degree * pd)))
            .collect()
    };

    let mut x = normalize(&cone.project(start))?;
    let mut r = quotient(&x)?;
    let mut g = grad(&x, r);
    let mut step = 1.0 / norm_inf(&g).max(1e-12);
    let mut history = vec![r];

    for it in 1..=cfg.max_iterations {
        let mut tau = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - tau * b).collect();
            let projected = cone.project(&trial);
            if denominator.norm(&projected) > 0.0 {
                let cand = normalize(&projected)?;
                let rc = quotient(&cand)?;
                let moved: f64 = cand.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
                if rc <= r - 1e-4 * moved / tau || moved == 0.0 {
                    accepted = Some((cand, rc));
                    break;
                }
            }
            tau *= 0.5;
        }
        let Some((cand, rc)) = accepted else {
            // no descent along the projected gradient: stationary
            return Ok(RayleighOutcome {
                point: x,
                value: r,
                iterations: it,
            });
        };
        let g_new = grad(&cand, rc);
        let s: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * tau };
        let moved = norm_inf(&s);
        x = cand;
        r = rc;
        g = g_new;
        history.push(r);
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if old - r <= tol * r && moved <= tol.sqrt() * norm_inf(&x).max(1.0) {
                return Ok(RayleighOutcome {
                    point: x,
                    value: r,
                    iterations: it,
                });
            }
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: f64::NAN,
        best: Some(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::dykstra::Unconstrained;
    use crate::engine::eigen::jacobi_eigh;
    use crate::matrix::SymmetricMatrix;

    fn laplacian(n: usize, x: &[f64], y: &mut [f64]) {
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            y[i] = 2.0 * x[i] - l - r;
        }
    }

    struct Quad(usize);
    impl EnergyOracle for Quad {
        fn value(&self, x: &[f64]) -> f64 {
            let mut y = vec![0.0; self.0];
            laplacian(self.0, x, &mut y);
            dot(x, &y)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            let mut y = vec![0.0; self.0];
            laplacian(self.0, x, &mut y);
            y.iter().map(|v| 2.0 * v).collect()
        }
    }

    struct SqNorm;
    impl EnergyOracle for SqNorm {
        fn value(&self, x: &[f64]) -> f64 {
            dot(x, x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter().map(|v| 2.0 * v).collect()
        }
    }

    fn dense_min_eigenvalue(n: usize) -> f64 {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 2.0;
            if i + 1 < n {
                data[i * n + i + 1] = -1.0;
                data[(i + 1) * n + i] = -1.0;
            }
        }
        jacobi_eigh(&SymmetricMatrix::new(n, data).unwrap()).values[0]
    }

    #[test]
    fn inverse_power_matches_dense_eigensolver() {
        let n = 40;
        let cfg = SolverConfig::default().with_tolerance(1e-12);
        let out = inverse_power(|x, y| laplacian(n, x, y), &vec![1.0; n], &cfg).unwrap();
        assert!((out.value - dense_min_eigenvalue(n)).abs() < 1e-10);
    }

    #[test]
    fn gradient_iteration_matches_inverse_power() {
        let n = 10;
        let cfg = SolverConfig::default().with_tolerance(1e-13);
        let num = HomogeneousTerm { power: &Quad(n), degree: 2.0 };
        let den = HomogeneousTerm { power: &SqNorm, degree: 2.0 };
        let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.01).collect();
        let out = rayleigh_iterate(&num, &den, &Unconstrained, &start, &cfg).unwrap();
        let ip = inverse_power(|x, y| laplacian(n, x, y), &vec![1.0; n], &cfg).unwrap();
        assert!((out.value - ip.value.sqrt()).abs() < 1e-6);

        let scaled: Vec<f64> = start.iter().map(|v| 7.5 * v).collect();
        let again = rayleigh_iterate(&num, &den, &Unconstrained, &scaled, &cfg).unwrap();
        assert!((again.value - out.value).abs() < 1e-9);
    }

    #[test]
    fn vanishing_numerator_is_a_regularity_violation() {
        struct Zero;
        impl EnergyOracle for Zero {
            fn value(&self, _: &[f64]) -> f64 {
                0.0
            }
            fn gradient(&self, x: &[f64]) -> Vec<f64> {
                vec![0.0; x.len()]
            }
        }
        let num = HomogeneousTerm { power: &Zero, degree: 2.0 };
        let den = HomogeneousTerm { power: &SqNorm, degree: 2.0 };
        let err = rayleigh_iterate(&num, &den, &Unconstrained, &[1.0, 0.0], &SolverConfig::default());
        assert!(matches!(err, Err(Error::RegularityViolation { .. })));
    }
}
