//! Gradient relations `R ⊆ V × W` and the operations every relation shares:
//! membership, minimal gradients, Sobolev norms and Poincaré estimates.

use std::sync::Arc;

use crate::config::SolverConfig;
use crate::engine::dual::{Coordinate, DualOptions, Row, SeparableProgram};
use crate::engine::linop::{Identity, LinearOperator};
use crate::error::{check_len, Error, Result};
use crate::grid::domain::GridDomain;
use crate::grid::maximal::{ball_members, maximal_with_balls};
use crate::grid::operators::NodeGradient;
use crate::metric::graph::WeightedGraph;
use crate::metric::space::FiniteMetricMeasureSpace;
use crate::space::{Element, NormSpec, SpaceDescriptor, SpaceKind};

/// Relative size below which a minimal gradient counts as zero, measured
/// against the norm of the element it belongs to.
pub const VANISHING_GRADIENT_RTOL: f64 = 1e-12;

/// Relations of the form `g ≥ floor(u)` componentwise.
#[derive(Debug, Clone)]
pub enum Envelope {
    /// `g ≥ max(|Re u|, |Im u|)` on `ℂ ≅ ℝ²`, with a one-dimensional `W`.
    ComplexMax,
    /// `g ≥ |∇u|` at every grid node.
    GradientMagnitude(GridDomain),
    /// `g ≥ M|∇u|` with the discrete maximal function `M`.
    MaximalGradient(GridDomain),
}

#[derive(Debug, Clone)]
pub enum RelationKind {
    /// The graph `{(u, F u)}` of a linear map.
    LinearGraph(Arc<dyn LinearOperator>),
    Envelope(Envelope),
    /// `|u(x) − u(y)| ≤ d(x, y) (h(x) + h(y))` for all pairs of points.
    Hajlasz(FiniteMetricMeasureSpace),
    /// `⨍_B |u − u_B| dμ ≤ r ⨍_{λB} k dμ` for every ball `B = B(x, r)`.
    BallPoincare {
        space: FiniteMetricMeasureSpace,
        lambda: f64,
    },
    /// `|u(x) − u(y)| ≤ ℓ_e g_e` on every edge.
    GraphEdge(WeightedGraph),
}

/// Outcome of an empirical Poincaré estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoincareBound {
    Bounded(f64),
    /// Some sample has a vanishing minimal gradient but is itself nonzero.
    Unbounded,
}

impl PoincareBound {
    pub fn constant(&self) -> Option<f64> {
        match self {
            PoincareBound::Bounded(c) => Some(*c),
            PoincareBound::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradientRelation {
    domain: Arc<SpaceDescriptor>,
    codomain: Arc<SpaceDescriptor>,
    kind: RelationKind,
}

/// `(p, weights)` of an ℓp-type norm; Euclidean is `p = 2` with unit weights.
pub(crate) fn lp_parts(norm: &NormSpec, dim: usize) -> Option<(f64, Vec<f64>)> {
    match norm {
        NormSpec::Euclidean => Some((2.0, vec![1.0; dim])),
        NormSpec::WeightedLp { p, weights } => Some((*p, weights.clone())),
        _ => None,
    }
}

fn lp_space(kind: SpaceKind, p: f64, weights: Vec<f64>) -> Result<Arc<SpaceDescriptor>> {
    let dim = weights.len();
    Ok(SpaceDescriptor::new(kind, dim, NormSpec::WeightedLp { p, weights })?.shared())
}

impl GradientRelation {
    pub fn new(
        domain: Arc<SpaceDescriptor>,
        codomain: Arc<SpaceDescriptor>,
        kind: RelationKind,
    ) -> Result<Self> {
        let (n, m) = (domain.dimension(), codomain.dimension());
        let expect = |what, e_n: usize, e_m: usize| -> Result<()> {
            check_len(what, e_n, n)?;
            check_len(what, e_m, m)
        };
        match &kind {
            RelationKind::LinearGraph(op) => expect("linear map shape", op.ncols(), op.nrows())?,
            RelationKind::Envelope(Envelope::ComplexMax) => expect("complex envelope", 2, 1)?,
            RelationKind::Envelope(Envelope::GradientMagnitude(d) | Envelope::MaximalGradient(d)) => {
                expect("grid envelope", d.node_count(), d.node_count())?
            }
            RelationKind::Hajlasz(x) => expect("metric relation", x.len(), x.len())?,
            RelationKind::BallPoincare { space, lambda } => {
                if !(*lambda >= 1.0) || !lambda.is_finite() {
                    return Err(Error::InvalidInput(format!("ball dilation must be ≥ 1, got {lambda}")));
                }
                expect("metric relation", space.len(), space.len())?
            }
            RelationKind::GraphEdge(g) => expect("graph relation", g.vertex_count(), g.edges().len())?,
        }
        let needs_lp = !matches!(kind, RelationKind::LinearGraph(_));
        if needs_lp && lp_parts(codomain.norm_spec(), m).is_none() {
            return Err(Error::InvalidInput(
                "inequality relations need an ℓp-type gradient norm".into(),
            ));
        }
        Ok(Self {
            domain,
            codomain,
            kind,
        })
    }

    pub fn linear(
        domain: Arc<SpaceDescriptor>,
        codomain: Arc<SpaceDescriptor>,
        op: Arc<dyn LinearOperator>,
    ) -> Result<Self> {
        Self::new(domain, codomain, RelationKind::LinearGraph(op))
    }

    /// The graph of the identity map on `space`.
    pub fn identity(space: Arc<SpaceDescriptor>) -> Result<Self> {
        let n = space.dimension();
        Self::linear(Arc::clone(&space), space, Arc::new(Identity(n)))
    }

    /// `g ≥ max(|Re u|, |Im u|)` with Euclidean norms on both sides.
    pub fn complex_max() -> Result<Self> {
        Self::new(
            SpaceDescriptor::euclidean(SpaceKind::ToyComplex, 2)?.shared(),
            SpaceDescriptor::euclidean(SpaceKind::ToyComplex, 1)?.shared(),
            RelationKind::Envelope(Envelope::ComplexMax),
        )
    }

    fn grid_spaces(dom: &GridDomain, p: f64) -> Result<(Arc<SpaceDescriptor>, Arc<SpaceDescriptor>)> {
        let w = vec![dom.cell_volume(); dom.node_count()];
        Ok((
            lp_space(SpaceKind::EuclideanGrid, p, w.clone())?,
            lp_space(SpaceKind::EuclideanGrid, p, w)?,
        ))
    }

    /// `g ≥ |∇u|` nodewise, both norms `L^p` with node volume `hⁿ`.
    pub fn gradient_magnitude(dom: GridDomain, p: f64) -> Result<Self> {
        let (v, w) = Self::grid_spaces(&dom, p)?;
        Self::new(v, w, RelationKind::Envelope(Envelope::GradientMagnitude(dom)))
    }

    /// `g ≥ M|∇u|` nodewise.
    pub fn maximal_gradient(dom: GridDomain, p: f64) -> Result<Self> {
        let (v, w) = Self::grid_spaces(&dom, p)?;
        Self::new(v, w, RelationKind::Envelope(Envelope::MaximalGradient(dom)))
    }

    /// Hajłasz gradients; both norms are `L^p(μ)`.
    pub fn hajlasz(space: FiniteMetricMeasureSpace, p: f64) -> Result<Self> {
        let mu = space.measure().to_vec();
        Self::new(
            lp_space(SpaceKind::MetricPoints, p, mu.clone())?,
            lp_space(SpaceKind::MetricPoints, p, mu)?,
            RelationKind::Hajlasz(space),
        )
    }

    pub fn ball_poincare(space: FiniteMetricMeasureSpace, p: f64, lambda: f64) -> Result<Self> {
        let mu = space.measure().to_vec();
        Self::new(
            lp_space(SpaceKind::MetricPoints, p, mu.clone())?,
            lp_space(SpaceKind::MetricPoints, p, mu)?,
            RelationKind::BallPoincare { space, lambda },
        )
    }

    /// Edge upper gradients: vertices carry plain `ℓ^p`, edges `ℓ^p`
    /// weighted by their lengths.
    pub fn graph_edge(graph: WeightedGraph, p: f64) -> Result<Self> {
        let lengths = graph.edges().iter().map(|e| e.length).collect();
        Self::new(
            lp_space(SpaceKind::MetricPoints, p, vec![1.0; graph.vertex_count()])?,
            lp_space(SpaceKind::GraphEdges, p, lengths)?,
            RelationKind::GraphEdge(graph),
        )
    }

    pub fn domain(&self) -> &Arc<SpaceDescriptor> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<SpaceDescriptor> {
        &self.codomain
    }

    pub fn kind(&self) -> &RelationKind {
        &self.kind
    }

    /// True for relations whose minimal gradient is linear in `u`.
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, RelationKind::LinearGraph(_))
    }

    fn check_u(&self, u: &[f64]) -> Result<()> {
        check_len("element of V", self.domain.dimension(), u.len())
    }

    /// Is `g` a gradient of `u`, up to `tol`?
    pub fn check_gradient_pair(&self, u: &Element, g: &Element, tol: f64) -> Result<bool> {
        self.check_u(u.coords())?;
        check_len("element of W", self.codomain.dimension(), g.dimension())?;
        let (u, g) = (u.coords(), g.coords());
        Ok(match &self.kind {
            RelationKind::LinearGraph(op) => {
                let diff: Vec<f64> = op.apply_vec(u).iter().zip(g).map(|(a, b)| a - b).collect();
                self.codomain.norm(&diff) <= tol
            }
            RelationKind::Envelope(_) | RelationKind::GraphEdge(_) => {
                let floor = self.floor(u)?;
                floor.iter().zip(g).all(|(f, gi)| *gi >= f - tol)
            }
            RelationKind::Hajlasz(x) => {
                g.iter().all(|h| *h >= -tol)
                    && (0..x.len()).all(|i| {
                        (i + 1..x.len()).all(|j| {
                            (u[i] - u[j]).abs() <= x.distance(i, j) * (g[i] + g[j]) + tol
                        })
                    })
            }
            RelationKind::BallPoincare { space, lambda } => {
                g.iter().all(|k| *k >= -tol)
                    && ball_rows(space, *lambda, u)
                        .iter()
                        .all(|row| row.eval(g) >= row.rhs - tol)
            }
        })
    }

    /// The pointwise lower bound of the inequality relations.
    fn floor(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            RelationKind::Envelope(Envelope::ComplexMax) => vec![u[0].abs().max(u[1].abs())],
            RelationKind::Envelope(Envelope::GradientMagnitude(d)) => node_gradient_magnitude(d, u),
            RelationKind::Envelope(Envelope::MaximalGradient(d)) => {
                maximal_with_balls(&node_gradient_magnitude(d, u), d).0
            }
            RelationKind::GraphEdge(graph) => graph
                .edges()
                .iter()
                .map(|e| (u[e.from] - u[e.to]).abs() / e.length)
                .collect(),
            _ => {
                return Err(Error::InvalidInput(
                    "relation has no pointwise floor".into(),
                ))
            }
        })
    }

    /// The unique gradient of `u` with least `W`-norm.
    pub fn minimal_gradient(&self, u: &Element, cfg: &SolverConfig) -> Result<Element> {
        self.check_u(u.coords())?;
        let g = self.minimal_gradient_coords(u.coords(), cfg)?;
        Element::new(Arc::clone(&self.codomain), g)
    }

    pub(crate) fn minimal_gradient_coords(&self, u: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            RelationKind::LinearGraph(op) => op.apply_vec(u),
            RelationKind::Hajlasz(x) => self.metric_gradient(hajlasz_rows(x, u), cfg)?.0,
            RelationKind::BallPoincare { space, lambda } => {
                self.metric_gradient(ball_rows(space, *lambda, u), cfg)?.0
            }
            _ => self.floor(u)?,
        })
    }

    /// Minimal `k ≥ 0` subject to `rows`, with the multipliers of the rows.
    fn metric_gradient(&self, rows: Vec<Row>, cfg: &SolverConfig) -> Result<(Vec<f64>, Vec<f64>, Vec<Row>)> {
        let m = self.codomain.dimension();
        if rows.is_empty() {
            return Ok((vec![0.0; m], Vec::new(), rows));
        }
        let (p, weights) = lp_parts(self.codomain.norm_spec(), m).expect("validated ℓp norm");
        let scale = rows.iter().fold(0.0_f64, |s, r| s.max(r.rhs));
        let prog = SeparableProgram {
            coords: weights
                .iter()
                .map(|w| Coordinate::Power {
                    weight: *w,
                    exponent: p,
                })
                .collect(),
            rows,
        };
        let out = prog.solve(DualOptions {
            max_sweeps: cfg.max_iterations,
            tol_feasibility: cfg.tol_feasibility * scale,
            tol_gap: cfg.tol_objective,
            seed: cfg.seed,
        })?;
        // Scale up onto the feasible set: all coefficients are nonnegative
        // and every right-hand side positive.
        let theta = prog
            .rows
            .iter()
            .map(|r| r.rhs / r.eval(&out.x))
            .fold(1.0_f64, f64::max);
        let g = out.x.iter().map(|v| (theta * v).max(0.0)).collect();
        Ok((g, out.multipliers, prog.rows))
    }

    /// `Φ(u) = ‖g_u‖_W^q` and a (sub)gradient of `Φ` with respect to `u`.
    pub(crate) fn energy(&self, u: &[f64], cfg: &SolverConfig) -> Result<(f64, Vec<f64>)> {
        let norm = self.codomain.norm_spec();
        match &self.kind {
            RelationKind::LinearGraph(op) => {
                let fu = op.apply_vec(u);
                let value = norm.power(&fu);
                let grad = op.apply_transpose_vec(&norm.power_gradient(&fu));
                Ok((value, grad))
            }
            RelationKind::Envelope(Envelope::ComplexMax) => {
                let (a, b) = (u[0].abs(), u[1].abs());
                let (p, w) = lp_parts(norm, 1).expect("validated ℓp norm");
                let f = a.max(b);
                let d = p * w[0] * f.powf(p - 1.0);
                let grad = if a >= b {
                    vec![d * u[0].signum(), 0.0]
                } else {
                    vec![0.0, d * u[1].signum()]
                };
                Ok((w[0] * f.powf(p), grad))
            }
            RelationKind::Envelope(Envelope::GradientMagnitude(dom)) => {
                let d = dom.ndim();
                let (p, weights) = lp_parts(norm, dom.node_count()).expect("validated ℓp norm");
                let block = NormSpec::BlockLp {
                    p,
                    blocks: vec![d; dom.node_count()],
                    weights,
                };
                let op = NodeGradient::new(dom);
                let du = op.apply_vec(u);
                Ok((block.power(&du), op.apply_transpose_vec(&block.power_gradient(&du))))
            }
            RelationKind::Envelope(Envelope::MaximalGradient(dom)) => {
                let d = dom.ndim();
                let n = dom.node_count();
                let (p, weights) = lp_parts(norm, n).expect("validated ℓp norm");
                let op = NodeGradient::new(dom);
                let du = op.apply_vec(u);
                let mag: Vec<f64> = (0..n)
                    .map(|i| du[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt())
                    .collect();
                let (floor, balls) = maximal_with_balls(&mag, dom);
                let value = floor.iter().zip(&weights).map(|(f, w)| w * f.powf(p)).sum();
                let mut coeff = vec![0.0; n];
                for i in 0..n {
                    if floor[i] == 0.0 {
                        continue;
                    }
                    let members = ball_members(dom, balls[i]);
                    let c = p * weights[i] * floor[i].powf(p - 1.0) / members.len() as f64;
                    for j in members {
                        coeff[j] += c;
                    }
                }
                let mut y = vec![0.0; n * d];
                for j in 0..n {
                    if mag[j] > 0.0 {
                        for a in 0..d {
                            y[j * d + a] = coeff[j] * du[j * d + a] / mag[j];
                        }
                    }
                }
                Ok((value, op.apply_transpose_vec(&y)))
            }
            RelationKind::GraphEdge(graph) => {
                let (p, weights) = lp_parts(norm, graph.edges().len()).expect("validated ℓp norm");
                let mut value = 0.0;
                let mut grad = vec![0.0; u.len()];
                for (e, w) in graph.edges().iter().zip(&weights) {
                    let q = (u[e.from] - u[e.to]) / e.length;
                    value += w * q.abs().powf(p);
                    let d = p * w * q.signum() * q.abs().powf(p - 1.0) / e.length;
                    grad[e.from] += d;
                    grad[e.to] -= d;
                }
                Ok((value, grad))
            }
            RelationKind::Hajlasz(x) => {
                let (g, lambda, rows) = self.metric_gradient(hajlasz_rows(x, u), cfg)?;
                let mut grad = vec![0.0; u.len()];
                for (row, l) in rows.iter().zip(&lambda) {
                    let (i, j) = (row.entries[0].0, row.entries[1].0);
                    let s = (u[i] - u[j]).signum() * l / x.distance(i, j);
                    grad[i] += s;
                    grad[j] -= s;
                }
                Ok((norm.power(&g), grad))
            }
            RelationKind::BallPoincare { space, lambda: dil } => {
                let balls = space.ball_family(*dil);
                let mu = space.measure();
                let rows = ball_rows(space, *dil, u);
                let (g, lambda, rows) = self.metric_gradient(rows, cfg)?;
                let mut grad = vec![0.0; u.len()];
                // rows are emitted in ball order, skipping inactive balls
                let mut b_iter = balls.iter().filter(|b| ball_deviation(space, b, u) > 0.0);
                for (_row, l) in rows.iter().zip(&lambda) {
                    let b = b_iter.next().expect("row per active ball");
                    if *l == 0.0 {
                        continue;
                    }
                    let mass = space.mass(&b.members);
                    let avg = b.members.iter().map(|y| mu[*y] * u[*y]).sum::<f64>() / mass;
                    let signs: Vec<f64> = b.members.iter().map(|y| (u[*y] - avg).signum()).collect();
                    let sign_mass: f64 = b.members.iter().zip(&signs).map(|(y, s)| mu[*y] * s).sum();
                    for (y, s) in b.members.iter().zip(&signs) {
                        grad[*y] += l * mu[*y] * (s - sign_mass / mass) / mass;
                    }
                }
                Ok((norm.power(&g), grad))
            }
        }
    }

    /// `‖u‖_V + ‖g_u‖_W`.
    pub fn sobolev_norm(&self, u: &Element, cfg: &SolverConfig) -> Result<f64> {
        let g = self.minimal_gradient(u, cfg)?;
        Ok(self.domain.norm(u.coords()) + g.norm())
    }

    /// Checks `g_{αu} = α g_u` to within `cfg.tol_objective` in `W`.
    pub fn scale_gradient_check(&self, u: &Element, alpha: f64, cfg: &SolverConfig) -> Result<bool> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("scaling factor must be ≥ 0, got {alpha}")));
        }
        let g = self.minimal_gradient(u, cfg)?;
        let ga = self.minimal_gradient(&u.scaled(alpha), cfg)?;
        Ok(ga.distance(&g.scaled(alpha))? <= cfg.tol_objective)
    }

    /// Largest `‖u‖_V / ‖g_u‖_W` over the samples.
    pub fn estimate_poincare_constant(&self, samples: &[Element], cfg: &SolverConfig) -> Result<PoincareBound> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("Poincaré estimate needs at least one sample".into()));
        }
        let mut best = 0.0_f64;
        for u in samples {
            let nu = self.domain.norm(u.coords());
            if nu == 0.0 {
                continue;
            }
            let ng = self.minimal_gradient(u, cfg)?.norm();
            if ng <= VANISHING_GRADIENT_RTOL * nu {
                return Ok(PoincareBound::Unbounded);
            }
            best = best.max(nu / ng);
        }
        Ok(PoincareBound::Bounded(best))
    }
}

/// `|∇u|` at every node using [`NodeGradient`].
pub(crate) fn node_gradient_magnitude(dom: &GridDomain, u: &[f64]) -> Vec<f64> {
    let d = dom.ndim();
    let du = NodeGradient::new(dom).apply_vec(u);
    du.chunks(d)
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

/// `h_i + h_j ≥ |u_i − u_j| / d(i, j)` for every pair with `u_i ≠ u_j`.
fn hajlasz_rows(x: &FiniteMetricMeasureSpace, u: &[f64]) -> Vec<Row> {
    let mut rows = Vec::new();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let rhs = (u[i] - u[j]).abs() / x.distance(i, j);
            if rhs > 0.0 {
                rows.push(Row::new(vec![(i, 1.0), (j, 1.0)], rhs));
            }
        }
    }
    rows
}

/// `⨍_B |u − u_B| dμ`.
pub(crate) fn ball_deviation(x: &FiniteMetricMeasureSpace, ball: &crate::metric::space::Ball, u: &[f64]) -> f64 {
    let mu = x.measure();
    let mass = x.mass(&ball.members);
    let avg = ball.members.iter().map(|y| mu[*y] * u[*y]).sum::<f64>() / mass;
    ball.members
        .iter()
        .map(|y| mu[*y] * (u[*y] - avg).abs())
        .sum::<f64>()
        / mass
}

/// `r ⨍_{λB} k dμ ≥ ⨍_B |u − u_B| dμ` for every ball with a positive
/// left-hand side.
fn ball_rows(x: &FiniteMetricMeasureSpace, lambda: f64, u: &[f64]) -> Vec<Row> {
    let mu = x.measure();
    x.ball_family(lambda)
        .iter()
        .filter_map(|b| {
            let rhs = ball_deviation(x, b, u);
            if rhs <= 0.0 {
                return None;
            }
            let mass = x.mass(&b.dilated);
            let entries = b
                .dilated
                .iter()
                .map(|y| (*y, b.radius * mu[*y] / mass))
                .collect();
            Some(Row::new(entries, rhs))
        })
        .collect()
}
