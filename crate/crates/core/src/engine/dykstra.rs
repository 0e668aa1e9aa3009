//! Dykstra's alternating projections.
//!
//! Plain alternating projections only find *some* point of an intersection.
//! Dykstra's variant carries one correction vector per set and converges to
//! the Euclidean-nearest point of the intersection to the start, which is
//! what the norm-minimal lattice operations need (start = 0).

use std::fmt;

use crate::engine::vecops::{dist2, norm2};
use crate::error::{Error, Result};

/// Nearest-point map onto a fixed closed convex set in the Euclidean
/// coordinate inner product.
pub trait ProjectionOracle: fmt::Debug + Send + Sync {
    fn project(&self, x: &[f64]) -> Vec<f64>;

    /// `‖x − P(x)‖`.
    fn distance(&self, x: &[f64]) -> f64 {
        dist2(x, &self.project(x))
    }
}

/// The whole space.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unconstrained;

impl ProjectionOracle for Unconstrained {
    fn project(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// `{x : lower ≤ x ≤ upper}`; infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ProjectionOracle for BoxSet {
    fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| v.max(*lo).min(*hi))
            .collect()
    }
}

/// `{x : normal·x ≥ offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl ProjectionOracle for HalfSpace {
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let a2: f64 = self.normal.iter().map(|a| a * a).sum();
        let gap = self.offset - self.normal.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        if gap <= 0.0 || a2 == 0.0 {
            return x.to_vec();
        }
        let t = gap / a2;
        x.iter().zip(&self.normal).map(|(v, a)| v + t * a).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraOptions {
    pub max_sweeps: usize,
    /// Stop once the per-sweep change of the iterate plus the change of
    /// all correction vectors falls below `step_tol · max(1, ‖x‖)`.
    pub step_tol: f64,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 10_000,
            step_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DykstraOutcome {
    pub point: Vec<f64>,
    pub sweeps: usize,
    /// `max_i dist(point, C_i)` at exit.
    pub residual: f64,
    /// Per-sweep increment, kept as a convergence log.
    pub increments: Vec<f64>,
}

pub fn dykstra(
    oracles: &[&dyn ProjectionOracle],
    start: &[f64],
    opts: DykstraOptions,
) -> Result<DykstraOutcome> {
    if oracles.is_empty() {
        return Ok(DykstraOutcome {
            point: start.to_vec(),
            sweeps: 0,
            residual: 0.0,
            increments: Vec::new(),
        });
    }
    let n = start.len();
    let mut x = start.to_vec();
    let mut corrections = vec![vec![0.0; n]; oracles.len()];
    let mut increments = Vec::new();

    for sweep in 1..=opts.max_sweeps {
        let x_before = x.clone();
        let mut correction_change = 0.0;
        for (oracle, y) in oracles.iter().zip(corrections.iter_mut()) {
            let z: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| a + b).collect();
            let p = oracle.project(&z);
            let mut change = 0.0;
            for i in 0..n {
                let new_y = z[i] - p[i];
                change += (new_y - y[i]) * (new_y - y[i]);
                y[i] = new_y;
            }
            correction_change += change.sqrt();
            x = p;
        }
        let inc = dist2(&x, &x_before) + correction_change;
        increments.push(inc);
        if inc <= opts.step_tol * norm2(&x).max(1.0) {
            let residual = max_distance(oracles, &x);
            return Ok(DykstraOutcome {
                point: x,
                sweeps: sweep,
                residual,
                increments,
            });
        }
    }
    let residual = max_distance(oracles, &x);
    Err(Error::NotConverged {
        iterations: opts.max_sweeps,
        residual,
        best: Some(x),
    })
}

pub fn max_distance(oracles: &[&dyn ProjectionOracle], x: &[f64]) -> f64 {
    oracles.iter().map(|o| o.distance(x)).fold(0.0, f64::max)
}
