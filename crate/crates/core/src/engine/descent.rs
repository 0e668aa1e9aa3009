//! Projected accelerated descent (monotone FISTA with adaptive backtracking
//! and gradient-based restart).

use crate::config::SolverConfig;
use crate::engine::dykstra::ProjectionOracle;
use crate::engine::vecops::{dot, norm_inf};
use crate::error::{Error, Result};

/// A convex energy with a (sub)gradient.
pub trait EnergyOracle {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }
}

/// Window over which the relative objective decrease is measured.
pub const STALL_WINDOW: usize = 10;

const INITIAL_LIPSCHITZ: f64 = 1.0;
const LIPSCHITZ_SHRINK: f64 = 0.9;
const MAX_BACKTRACKS: usize = 200;

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Objective at every accepted iterate, starting with the projected
    /// start. Nonincreasing by construction.
    pub history: Vec<f64>,
}

/// Minimizes `energy` over the set described by `feasible`, starting from
/// the projection of `start`.
///
/// Stops when the proximal-gradient step satisfies
/// `‖z − y‖∞ ≤ tol · max(1, ‖z‖∞)` and the objective decreased by at most
/// `max(tol², 4ε)` (relative) over the last [`STALL_WINDOW`] iterations, or
/// when the objective did not change at all over that window.
pub fn projected_descent(
    energy: &dyn EnergyOracle,
    feasible: &dyn ProjectionOracle,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<DescentOutcome> {
    let tol = cfg.tol_objective;
    // quadratic growth turns an objective gap of tol² into a distance of tol
    let drop_tol = (tol * tol).max(4.0 * f64::EPSILON);
    let mut x = feasible.project(start);
    let mut fx = energy.value(&x);
    if !fx.is_finite() {
        return Err(Error::InvalidInput("energy is not finite at the start".into()));
    }
    let mut history = vec![fx];
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut lip = INITIAL_LIPSCHITZ;

    for it in 1..=cfg.max_iterations {
        let (fy, gy) = energy.value_and_gradient(&y);
        lip *= LIPSCHITZ_SHRINK;
        let mut z;
        let mut fz;
        let mut backtracks = 0;
        loop {
            let trial: Vec<f64> = y.iter().zip(&gy).map(|(v, g)| v - g / lip).collect();
            z = feasible.project(&trial);
            fz = energy.value(&z);
            let d: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
            let model = fy + dot(&gy, &d) + 0.5 * lip * dot(&d, &d);
            // small relative slack absorbs rounding once steps are tiny
            if fz <= model + 1e-15 * fy.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            lip *= 2.0;
            backtracks += 1;
            if backtracks > MAX_BACKTRACKS || !lip.is_finite() {
                return Err(Error::NotConverged {
                    iterations: it,
                    residual: f64::INFINITY,
                    best: Some(x),
                });
            }
        }

        let step = z
            .iter()
            .zip(&y)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let x_prev = x.clone();
        let accepted = fz <= fx;
        if accepted {
            x = z.clone();
            fx = fz;
        }
        let x_norm = norm_inf(&x);
        if x_norm > cfg.max_iterate_norm {
            return Err(Error::Unbounded {
                norm: x_norm,
                cap: cfg.max_iterate_norm,
            });
        }
        history.push(fx);

        let step_small = step <= tol * norm_inf(&z).max(1.0);
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            // No change at all over the window means the steps are below
            // the resolution of the objective.
            let stalled = old == fx;
            let relative_drop = old - fx <= drop_tol * fx.abs().max(f64::MIN_POSITIVE) || fx == 0.0;
            if (step_small && relative_drop) || stalled {
                return Ok(DescentOutcome {
                    point: x,
                    value: fx,
                    iterations: it,
                    history,
                });
            }
        }

        // Restart when the step opposes the momentum direction.
        let restart = !accepted
            || z.iter()
                .zip(&y)
                .zip(&x_prev)
                .map(|((zi, yi), xi)| (yi - zi) * (zi - xi))
                .sum::<f64>()
                > 0.0;
        if restart {
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let a = t / t_next;
        let b = (t - 1.0) / t_next;
        y = (0..x.len())
            .map(|i| x[i] + a * (z[i] - x[i]) + b * (x[i] - x_prev[i]))
            .collect();
        t = t_next;
    }

    let last = history.len() - 1;
    let residual = if last >= STALL_WINDOW {
        history[last - STALL_WINDOW] - history[last]
    } else {
        f64::INFINITY
    };
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual,
        best: Some(x),
    })
}
