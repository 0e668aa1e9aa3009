//! Minimal gradients on finite metric measure spaces and graphs.

use std::sync::Arc;

use crate::config::SolverConfig;
use crate::error::{check_len, Error, Result};
use crate::metric::graph::WeightedGraph;
use crate::metric::space::FiniteMetricMeasureSpace;
use crate::relation::{GradientRelation, PoincareBound, VANISHING_GRADIENT_RTOL};
use crate::space::Element;

/// Least `‖h‖_{p,μ}` with `|u(x) − u(y)| ≤ d(x, y)(h(x) + h(y))` for all pairs.
pub fn hajlasz_minimal_gradient(
    x: &FiniteMetricMeasureSpace,
    u: &[f64],
    p: f64,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let rel = GradientRelation::hajlasz(x.clone(), p)?;
    check_len("function on the space", x.len(), u.len())?;
    rel.minimal_gradient_coords(u, cfg)
}

/// `g_e = |u(x) − u(y)| / ℓ_e` on every edge.
pub fn graph_minimal_upper_gradient(graph: &WeightedGraph, u: &[f64]) -> Result<Vec<f64>> {
    check_len("function on the vertices", graph.vertex_count(), u.len())?;
    Ok(graph
        .edges()
        .iter()
        .map(|e| (u[e.from] - u[e.to]).abs() / e.length)
        .collect())
}

/// Least `‖k‖_{p,μ}` with `⨍_B |u − u_B| dμ ≤ r ⨍_{λB} k dμ` for every ball.
pub fn poincare_minimal_gradient(
    x: &FiniteMetricMeasureSpace,
    u: &[f64],
    p: f64,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let rel = GradientRelation::ball_poincare(x.clone(), p, lambda)?;
    check_len("function on the space", x.len(), u.len())?;
    rel.minimal_gradient_coords(u, cfg)
}

/// Which metric gradient a Friedrichs check uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricGradient {
    Hajlasz,
    BallPoincare { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedrichsReport {
    /// `sup ‖u‖_p / ‖g_u‖_p` over the nonzero samples.
    pub constant: PoincareBound,
    pub nonzero_samples: usize,
}

/// Empirical Friedrichs constant for functions supported in `support`.
pub fn friedrichs_check(
    x: &FiniteMetricMeasureSpace,
    kind: MetricGradient,
    support: &[usize],
    samples: &[Vec<f64>],
    p: f64,
    cfg: &SolverConfig,
) -> Result<FriedrichsReport> {
    let n = x.len();
    let mut inside = vec![false; n];
    for &i in support {
        if i >= n {
            return Err(Error::InvalidInput(format!("point {i} is not in the space")));
        }
        inside[i] = true;
    }
    if inside.iter().all(|v| *v) {
        return Err(Error::Precondition("the support must leave some point outside".into()));
    }
    let rel = match kind {
        MetricGradient::Hajlasz => GradientRelation::hajlasz(x.clone(), p)?,
        MetricGradient::BallPoincare { lambda } => GradientRelation::ball_poincare(x.clone(), p, lambda)?,
    };
    let mut best = 0.0_f64;
    let mut nonzero = 0;
    for (k, u) in samples.iter().enumerate() {
        check_len("sample", n, u.len())?;
        if let Some(i) = (0..n).find(|i| !inside[*i] && u[*i] != 0.0) {
            return Err(Error::Precondition(format!("sample {k} is nonzero at point {i} outside the support")));
        }
        let e = Element::new(Arc::clone(rel.domain()), u.clone())?;
        let nu = e.norm();
        if nu == 0.0 {
            continue;
        }
        nonzero += 1;
        let ng = rel.minimal_gradient(&e, cfg)?.norm();
        if ng <= VANISHING_GRADIENT_RTOL * nu {
            return Ok(FriedrichsReport {
                constant: PoincareBound::Unbounded,
                nonzero_samples: nonzero,
            });
        }
        best = best.max(nu / ng);
    }
    Ok(FriedrichsReport {
        constant: PoincareBound::Bounded(best),
        nonzero_samples: nonzero,
    })
}

/// Edge upper gradients against the Hajłasz gradient of the shortest-path
/// metric: `ratios[e] = g_e / (h_x + h_y)`, zero where both vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientComparison {
    pub upper_gradient: Vec<f64>,
    pub hajlasz: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

pub fn compare_upper_and_hajlasz(
    graph: &WeightedGraph,
    measure: Vec<f64>,
    u: &[f64],
    p: f64,
    cfg: &SolverConfig,
) -> Result<GradientComparison> {
    let x = graph.shortest_path_space(measure)?;
    let upper_gradient = graph_minimal_upper_gradient(graph, u)?;
    let hajlasz = hajlasz_minimal_gradient(&x, u, p, cfg)?;
    let ratios: Vec<f64> = graph
        .edges()
        .iter()
        .zip(&upper_gradient)
        .map(|(e, g)| {
            let s = hajlasz[e.from] + hajlasz[e.to];
            if s > 0.0 {
                g / s
            } else {
                0.0
            }
        })
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(GradientComparison {
        upper_gradient,
        hajlasz,
        ratios,
        max_ratio,
    })
}
