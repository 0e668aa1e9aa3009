//! Problem files: one TOML document per problem instance, validated and
//! turned into solver inputs before anything runs.

use std::path::Path;
use std::sync::Arc;

use gradspace::engine::linop::DenseMatrix;
use gradspace::grid::{biharmonic_relation, p_laplace_relation, CoefficientField, GridDomain};
use gradspace::matrix::{bounded_below_relation, commutator_relation, SymmetricMatrix};
use gradspace::metric::{Edge, FiniteMetricMeasureSpace, WeightedGraph};
use gradspace::{
    ConeSpec, Constraint, Element, FeasibleSet, GradientRelation, NormSpec, OrderSpec, SolverConfig,
    SpaceDescriptor, SpaceKind,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Dirichlet,
    Obstacle,
    MultiObstacle,
    Rayleigh,
    LatticeMax,
    LatticeMin,
    Hajlasz,
    PoincareGradient,
    Biharmonic,
    Fredholm,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Dirichlet => "dirichlet",
            ProblemKind::Obstacle => "obstacle",
            ProblemKind::MultiObstacle => "multi-obstacle",
            ProblemKind::Rayleigh => "rayleigh",
            ProblemKind::LatticeMax => "lattice-max",
            ProblemKind::LatticeMin => "lattice-min",
            ProblemKind::Hajlasz => "hajlasz",
            ProblemKind::PoincareGradient => "poincare-gradient",
            ProblemKind::Biharmonic => "biharmonic",
            ProblemKind::Fredholm => "fredholm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Grid,
    Metric,
    Graph,
    Matrix,
    ToyComplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridPreset {
    /// `[−2.5, 2.5]²`, free nodes on `1 < |x| < 2`, value 1 inside and 0
    /// outside.
    Annulus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<GridPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
    /// Free nodes; the default is every node off the outer faces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<Vec<bool>>,
    /// Number of outer node rings with prescribed values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_layers: Option<usize>,
    /// Nodal values; only the prescribed nodes matter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    /// Distance matrix rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    /// Points on a line, as an alternative to `distances`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
    pub measure: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub vertices: usize,
    /// `[from, to, length]` triples.
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixOrder {
    Psd,
    Componentwise,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSection {
    /// Side of the square matrices in the data section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<MatrixOrder>,
    /// Rows of a (possibly rectangular) linear map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationVariant {
    PLaplace,
    GradientMagnitude,
    MaximalGradient,
    Laplacian,
    Hajlasz,
    BallPoincare,
    GraphEdge,
    ComplexMax,
    Identity,
    Commutator,
    BoundedBelow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSection {
    pub variant: RelationVariant,
    /// Ball dilation for `ball-poincare`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Row-major `d × d` coefficient matrices, one per grid node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipticity: Option<f64>,
    /// Row-major matrix for `commutator` and `bounded-below`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi2: Option<Vec<f64>>,
}

/// A constraint on `v − f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintEntry {
    Fixed { mask: Vec<bool> },
    Lower { values: Vec<f64> },
    Upper { values: Vec<f64> },
    HalfSpace { normal: Vec<f64>, offset: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_feasibility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub problem: ProblemKind,
    pub instance: InstanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintEntry>,
}

/// Which way a variational task is solved.
#[derive(Debug, Clone)]
pub enum VariationalMode {
    Dirichlet,
    Obstacle(Element),
    MultiObstacle { lower: Vec<Element>, upper: Vec<Element> },
    Biharmonic(GridDomain),
}

/// A validated problem, ready to solve or certify.
#[derive(Debug, Clone)]
pub enum Task {
    Variational {
        rel: GradientRelation,
        k0: FeasibleSet,
        f: Element,
        mode: VariationalMode,
    },
    Rayleigh {
        rel: GradientRelation,
        cone: ConeSpec,
    },
    Lattice {
        order: OrderSpec,
        psi1: Element,
        psi2: Element,
        maximum: bool,
    },
    Gradient {
        rel: GradientRelation,
        u: Element,
    },
    Fredholm {
        op: DenseMatrix,
    },
}

/// Which subcommand may run a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Any,
    Rayleigh,
    Lattice,
    Gradient,
}

impl Family {
    pub fn admits(self, kind: ProblemKind) -> bool {
        use ProblemKind as P;
        match self {
            Family::Any => true,
            Family::Rayleigh => kind == P::Rayleigh,
            Family::Lattice => matches!(kind, P::LatticeMax | P::LatticeMin),
            Family::Gradient => matches!(kind, P::Hajlasz | P::PoincareGradient),
        }
    }
}

fn schema<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::schema(msg))
}

fn finite(what: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => schema(format!("{what}[{i}] is not a finite number")),
        None => Ok(()),
    }
}

fn len(what: &str, v: &[impl Sized], n: usize) -> Result<()> {
    if v.len() != n {
        return schema(format!("{what} has {} entries, expected {n}", v.len()));
    }
    Ok(())
}

fn require<'a, T>(what: &str, v: &'a Option<T>) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| CliError::schema(format!("missing `{what}`")))
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = toml::from_str(text).map_err(|e| CliError::schema(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem documents always serialize")
    }

    /// Every number finite, every required section present.
    pub fn validate(&self) -> Result<()> {
        if let Some(g) = &self.grid {
            finite("grid.origin", g.origin.as_deref().unwrap_or_default())?;
            finite("grid.boundary", g.boundary.as_deref().unwrap_or_default())?;
            if let Some(h) = g.spacing {
                if !(h > 0.0 && h.is_finite()) {
                    return schema("grid.spacing must be positive");
                }
            }
        }
        if let Some(m) = &self.metric {
            for r in m.distances.iter().flatten() {
                finite("metric.distances", r)?;
            }
            finite("metric.positions", m.positions.as_deref().unwrap_or_default())?;
            finite("metric.measure", &m.measure)?;
        }
        if let Some(g) = &self.graph {
            let lengths: Vec<f64> = g.edges.iter().map(|e| e.2).collect();
            finite("graph.edges lengths", &lengths)?;
        }
        if let Some(m) = &self.matrix {
            for r in m.operator.iter().flatten() {
                finite("matrix.operator", r)?;
            }
        }
        if let Some(n) = &self.norms {
            for (what, p) in [("norms.p_v", n.p_v), ("norms.p_w", n.p_w)] {
                if let Some(p) = p {
                    if !(p >= 1.0 && p.is_finite()) {
                        return schema(format!("{what} must be a finite exponent ≥ 1"));
                    }
                }
            }
            finite("norms.weights", n.weights.as_deref().unwrap_or_default())?;
        }
        if let Some(r) = &self.relation {
            finite("relation.lambda", r.lambda.as_slice())?;
            finite("relation.coefficients", r.coefficients.as_deref().unwrap_or_default())?;
            finite("relation.ellipticity", r.ellipticity.as_slice())?;
            finite("relation.matrix", r.matrix.as_deref().unwrap_or_default())?;
        }
        if let Some(d) = &self.data {
            for (what, v) in [("data.f", &d.f), ("data.obstacle", &d.obstacle), ("data.u", &d.u), ("data.psi1", &d.psi1), ("data.psi2", &d.psi2)] {
                finite(what, v.as_deref().unwrap_or_default())?;
            }
            for v in d.lower.iter().chain(&d.upper).flatten() {
                finite("data.lower/upper", v)?;
            }
        }
        for c in &self.constraints {
            match c {
                ConstraintEntry::Fixed { .. } => {}
                ConstraintEntry::Lower { values } | ConstraintEntry::Upper { values } => finite("constraint values", values)?,
                ConstraintEntry::HalfSpace { normal, offset } => {
                    finite("constraint normal", normal)?;
                    finite("constraint offset", std::slice::from_ref(offset))?;
                }
            }
        }
        if let Some(s) = &self.solver {
            for (what, t) in [("solver.tol_objective", s.tol_objective), ("solver.tol_feasibility", s.tol_feasibility)] {
                if let Some(t) = t {
                    if !(t > 0.0 && t.is_finite()) {
                        return schema(format!("{what} must be positive"));
                    }
                }
            }
            if s.max_iterations == Some(0) {
                return schema("solver.max_iterations must be at least 1");
            }
        }
        let needed = match self.instance {
            InstanceKind::Grid => self.grid.is_none().then_some("grid"),
            InstanceKind::Metric => self.metric.is_none().then_some("metric"),
            InstanceKind::Graph => self.graph.is_none().then_some("graph"),
            InstanceKind::Matrix => self.matrix.is_none().then_some("matrix"),
            InstanceKind::ToyComplex => None,
        };
        if let Some(section) = needed {
            return schema(format!("instance `{section}` needs a [{section}] section"));
        }
        Ok(())
    }

    /// Solver settings from the file, overridden by command-line values.
    pub fn solver_config(&self, tol: Option<f64>, max_iter: Option<usize>, seed: Option<u64>) -> Result<SolverConfig> {
        let s = self.solver.clone().unwrap_or_default();
        let mut cfg = SolverConfig::default();
        cfg.tol_objective = s.tol_objective.unwrap_or(cfg.tol_objective);
        cfg.tol_feasibility = s.tol_feasibility.unwrap_or(cfg.tol_feasibility);
        cfg.max_iterations = s.max_iterations.unwrap_or(cfg.max_iterations);
        cfg.seed = s.seed.unwrap_or(cfg.seed);
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return schema("--tol must be positive");
            }
            cfg = cfg.with_tolerance(t);
        }
        if let Some(n) = max_iter {
            if n == 0 {
                return schema("--max-iter must be at least 1");
            }
            cfg.max_iterations = n;
        }
        if let Some(seed) = seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn data(&self) -> DataSection {
        self.data.clone().unwrap_or_default()
    }

    fn exponents(&self) -> (f64, f64) {
        let n = self.norms.clone().unwrap_or_default();
        let p_w = n.p_w.or(n.p_v).unwrap_or(2.0);
        (n.p_v.unwrap_or(p_w), p_w)
    }

    /// One exponent shared by both norms, as the grid and metric relations
    /// require.
    fn shared_exponent(&self) -> Result<f64> {
        let (p_v, p_w) = self.exponents();
        if p_v != p_w {
            return schema(format!("this relation uses one exponent for both norms, got p_v = {p_v}, p_w = {p_w}"));
        }
        if !(p_w > 1.0) {
            return schema("the gradient exponent must exceed 1");
        }
        Ok(p_w)
    }

    fn relation_variant(&self) -> RelationVariant {
        if let Some(r) = &self.relation {
            return r.variant;
        }
        match (self.problem, self.instance) {
            (ProblemKind::Biharmonic, _) => RelationVariant::Laplacian,
            (ProblemKind::PoincareGradient, _) => RelationVariant::BallPoincare,
            (_, InstanceKind::Grid) => RelationVariant::PLaplace,
            (_, InstanceKind::Metric) => RelationVariant::Hajlasz,
            (_, InstanceKind::Graph) => RelationVariant::GraphEdge,
            (_, InstanceKind::ToyComplex) => RelationVariant::ComplexMax,
            (_, InstanceKind::Matrix) => RelationVariant::Identity,
        }
    }

    fn grid_domain(&self) -> Result<GridDomain> {
        let g = require("grid", &self.grid)?;
        let mut dom = match g.preset {
            Some(GridPreset::Annulus) => {
                if g.dims.is_some() || g.origin.is_some() || g.interior.is_some() || g.boundary.is_some() {
                    return schema("the annulus preset fixes dims, origin, interior and boundary values");
                }
                GridDomain::annulus(*require("grid.spacing", &g.spacing)?)?
            }
            None => {
                let dims = require("grid.dims", &g.dims)?.clone();
                let spacing = match (g.spacing, dims.as_slice()) {
                    (Some(h), _) => h,
                    (None, [n]) if *n >= 2 => 1.0 / (*n - 1) as f64,
                    _ => return schema("missing `grid.spacing`"),
                };
                let mut dom = GridDomain::new(dims, spacing)?;
                if let Some(o) = &g.origin {
                    dom = dom.with_origin(o.clone())?;
                }
                let n = dom.node_count();
                let values = g.boundary.clone().unwrap_or_else(|| vec![0.0; n]);
                len("grid.boundary", &values, n)?;
                dom.with_boundary_values(values)?
            }
        };
        if let Some(layers) = g.boundary_layers {
            if g.interior.is_some() {
                return schema("give either grid.interior or grid.boundary_layers");
            }
            dom = dom.with_boundary_layers(layers)?;
        } else if self.problem == ProblemKind::Biharmonic && g.interior.is_none() {
            dom = dom.with_boundary_layers(2)?;
        }
        if let Some(mask) = &g.interior {
            len("grid.interior", mask, dom.node_count())?;
            dom = dom.with_interior(mask.clone())?;
        }
        Ok(dom)
    }

    fn metric_space(&self) -> Result<FiniteMetricMeasureSpace> {
        let m = require("metric", &self.metric)?;
        Ok(match (&m.distances, &m.positions) {
            (Some(rows), None) => FiniteMetricMeasureSpace::from_rows(rows, m.measure.clone())?,
            (None, Some(x)) => FiniteMetricMeasureSpace::on_line(x, m.measure.clone())?,
            _ => return schema("give exactly one of metric.distances and metric.positions"),
        })
    }

    fn graph(&self) -> Result<WeightedGraph> {
        let g = require("graph", &self.graph)?;
        let edges = g
            .edges
            .iter()
            .map(|&(from, to, length)| Edge { from, to, length })
            .collect();
        Ok(WeightedGraph::new(g.vertices, edges)?)
    }

    fn matrix_side(&self) -> Result<usize> {
        let n = *require("matrix.n", &require("matrix", &self.matrix)?.n)?;
        if n == 0 {
            return schema("matrix.n must be positive");
        }
        Ok(n)
    }

    fn square(&self, what: &str, v: &[f64]) -> Result<SymmetricMatrix> {
        let n = self.matrix_side()?;
        len(what, v, n * n)?;
        Ok(SymmetricMatrix::new(n, v.to_vec())?)
    }

    /// The gradient relation and the nodes a grid prescribes.
    fn relation(&self) -> Result<(GradientRelation, Option<GridDomain>)> {
        let variant = self.relation_variant();
        let section = self.relation.clone();
        let expect = |ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                schema(format!("relation {variant:?} does not apply to a {:?} instance", self.instance))
            }
        };
        use RelationVariant as R;
        Ok(match variant {
            R::PLaplace | R::GradientMagnitude | R::MaximalGradient | R::Laplacian => {
                expect(self.instance == InstanceKind::Grid)?;
                let dom = self.grid_domain()?;
                let rel = match variant {
                    R::Laplacian => {
                        let (p_v, p_w) = self.exponents();
                        if p_v != 2.0 || p_w != 2.0 {
                            return schema("the Laplacian relation uses L² norms");
                        }
                        biharmonic_relation(&dom)?
                    }
                    R::PLaplace => {
                        let p = self.shared_exponent()?;
                        let weights = self.norms.as_ref().and_then(|n| n.weights.clone());
                        let matrices = section.as_ref().and_then(|s| s.coefficients.clone());
                        let coeff = match (weights, matrices) {
                            (None, None) => None,
                            (Some(w), None) => Some(CoefficientField::Scalar(w)),
                            (None, Some(m)) => Some(CoefficientField::Matrix {
                                matrices: m,
                                ellipticity: *require("relation.ellipticity", &section.as_ref().unwrap().ellipticity)?,
                            }),
                            _ => return schema("give either norms.weights or relation.coefficients"),
                        };
                        p_laplace_relation(&dom, p, coeff.as_ref())?
                    }
                    R::GradientMagnitude => GradientRelation::gradient_magnitude(dom.clone(), self.shared_exponent()?)?,
                    _ => GradientRelation::maximal_gradient(dom.clone(), self.shared_exponent()?)?,
                };
                (rel, Some(dom))
            }
            R::Hajlasz => {
                expect(self.instance == InstanceKind::Metric)?;
                (GradientRelation::hajlasz(self.metric_space()?, self.shared_exponent()?)?, None)
            }
            R::BallPoincare => {
                expect(self.instance == InstanceKind::Metric)?;
                let lambda = section.as_ref().and_then(|s| s.lambda).unwrap_or(1.0);
                (GradientRelation::ball_poincare(self.metric_space()?, self.shared_exponent()?, lambda)?, None)
            }
            R::GraphEdge => {
                expect(self.instance == InstanceKind::Graph)?;
                (GradientRelation::graph_edge(self.graph()?, self.shared_exponent()?)?, None)
            }
            R::ComplexMax => {
                expect(self.instance == InstanceKind::ToyComplex)?;
                (GradientRelation::complex_max()?, None)
            }
            R::Identity => {
                let space = self.vector_space()?;
                (GradientRelation::identity(space)?, None)
            }
            R::Commutator | R::BoundedBelow => {
                expect(self.instance == InstanceKind::Matrix)?;
                let m = self.square("relation.matrix", require("relation.matrix", &section.as_ref().unwrap().matrix)?)?;
                let p = self.shared_exponent()?;
                let rel = if variant == R::Commutator {
                    commutator_relation(&m, p)?
                } else {
                    bounded_below_relation(&m, p)?
                };
                (rel, None)
            }
        })
    }

    /// The space elements of a non-relational problem live in.
    fn vector_space(&self) -> Result<Arc<SpaceDescriptor>> {
        let (p_v, _) = self.exponents();
        if self.instance == InstanceKind::Matrix {
            let n = self.matrix_side()?;
            return Ok(SpaceDescriptor::new(SpaceKind::SymmetricMatrix, n * n, NormSpec::Schatten { p: p_v })?.shared());
        }
        let d = self.data();
        let dim = match (&d.psi1, &d.f, &d.u) {
            (Some(v), _, _) | (None, Some(v), _) | (None, None, Some(v)) => v.len(),
            _ => return schema("cannot infer the dimension: give data.psi1, data.f or data.u"),
        };
        let kind = match self.instance {
            InstanceKind::Grid => SpaceKind::EuclideanGrid,
            InstanceKind::Metric => SpaceKind::MetricPoints,
            InstanceKind::Graph => SpaceKind::GraphEdges,
            InstanceKind::ToyComplex => SpaceKind::ToyComplex,
            InstanceKind::Matrix => unreachable!(),
        };
        let weights = self.norms.as_ref().and_then(|n| n.weights.clone()).unwrap_or_else(|| vec![1.0; dim]);
        Ok(SpaceDescriptor::new(kind, dim, NormSpec::WeightedLp { p: p_v, weights })?.shared())
    }

    /// `K₀` from the listed constraints, plus the prescribed grid nodes.
    fn base_set(&self, dim: usize, dom: Option<&GridDomain>) -> Result<FeasibleSet> {
        let mut set = match dom {
            Some(d) => FeasibleSet::subspace(d.interior_mask().iter().map(|i| !i).collect()),
            None => FeasibleSet::whole(dim),
        };
        for c in &self.constraints {
            let c = match c {
                ConstraintEntry::Fixed { mask } => Constraint::FixedMask(mask.clone()),
                ConstraintEntry::Lower { values } => Constraint::LowerBound(values.clone()),
                ConstraintEntry::Upper { values } => Constraint::UpperBound(values.clone()),
                ConstraintEntry::HalfSpace { normal, offset } => Constraint::HalfSpace {
                    normal: normal.clone(),
                    offset: *offset,
                },
            };
            set = set.with(c)?;
        }
        Ok(set)
    }

    fn element(space: &Arc<SpaceDescriptor>, what: &str, v: &[f64]) -> Result<Element> {
        len(what, v, space.dimension())?;
        Ok(Element::new(Arc::clone(space), v.to_vec())?)
    }

    /// Checks the whole document against the library and assembles the task.
    pub fn task(&self) -> Result<Task> {
        let data = self.data();
        use ProblemKind as P;
        match self.problem {
            P::Dirichlet | P::Obstacle | P::MultiObstacle | P::Biharmonic => {
                if self.problem == P::Biharmonic && self.instance != InstanceKind::Grid {
                    return schema("biharmonic problems live on a grid");
                }
                let (rel, dom) = self.relation()?;
                let space = rel.domain();
                let f = match (&dom, &data.f) {
                    (Some(_), Some(_)) => return schema("grid problems take their data from grid.boundary, not data.f"),
                    (Some(d), None) => d.boundary_values().expect("grids are built with values").to_vec(),
                    (None, Some(f)) => f.clone(),
                    (None, None) => vec![0.0; space.dimension()],
                };
                let f = Self::element(space, "data.f", &f)?;
                let k0 = self.base_set(space.dimension(), dom.as_ref())?;
                let mode = match self.problem {
                    P::Dirichlet => VariationalMode::Dirichlet,
                    P::Obstacle => VariationalMode::Obstacle(Self::element(space, "data.obstacle", require("data.obstacle", &data.obstacle)?)?),
                    P::MultiObstacle => {
                        let lower = data.lower.clone().unwrap_or_default();
                        let upper = data.upper.clone().unwrap_or_default();
                        if lower.is_empty() && upper.is_empty() {
                            return schema("a multi-obstacle problem needs data.lower or data.upper");
                        }
                        let elems = |vs: &[Vec<f64>]| -> Result<Vec<Element>> {
                            vs.iter().map(|v| Self::element(space, "obstacle", v)).collect()
                        };
                        VariationalMode::MultiObstacle {
                            lower: elems(&lower)?,
                            upper: elems(&upper)?,
                        }
                    }
                    _ => VariationalMode::Biharmonic(dom.expect("grid instance")),
                };
                Ok(Task::Variational { rel, k0, f, mode })
            }
            P::Rayleigh => {
                let (rel, dom) = self.relation()?;
                let set = self.base_set(rel.domain().dimension(), dom.as_ref())?;
                Ok(Task::Rayleigh {
                    cone: ConeSpec::new(set)?,
                    rel,
                })
            }
            P::LatticeMax | P::LatticeMin => {
                let order = match (self.instance, self.matrix.as_ref().and_then(|m| m.order)) {
                    (InstanceKind::Matrix, Some(MatrixOrder::Componentwise)) => OrderSpec::Componentwise,
                    (InstanceKind::Matrix, _) => OrderSpec::Psd,
                    _ => OrderSpec::Componentwise,
                };
                let space = self.vector_space()?;
                let psi1 = Self::element(&space, "data.psi1", require("data.psi1", &data.psi1)?)?;
                let psi2 = Self::element(&space, "data.psi2", require("data.psi2", &data.psi2)?)?;
                Ok(Task::Lattice {
                    order,
                    psi1,
                    psi2,
                    maximum: self.problem == P::LatticeMax,
                })
            }
            P::Hajlasz | P::PoincareGradient => {
                if self.instance != InstanceKind::Metric {
                    return schema("metric gradients need a metric instance");
                }
                let want = if self.problem == P::Hajlasz {
                    RelationVariant::Hajlasz
                } else {
                    RelationVariant::BallPoincare
                };
                if self.relation_variant() != want {
                    return schema(format!("problem {} needs relation {want:?}", self.problem.name()));
                }
                let (rel, _) = self.relation()?;
                let u = Self::element(rel.domain(), "data.u", require("data.u", &data.u)?)?;
                Ok(Task::Gradient { rel, u })
            }
            P::Fredholm => {
                if self.instance != InstanceKind::Matrix {
                    return schema("a Fredholm problem needs a matrix instance");
                }
                let rows = require("matrix.operator", &self.matrix.as_ref().unwrap().operator)?;
                let cols = rows.first().map_or(0, Vec::len);
                if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
                    return schema("matrix.operator must be a non-empty rectangle");
                }
                Ok(Task::Fredholm {
                    op: DenseMatrix::new(rows.len(), cols, rows.concat())?,
                })
            }
        }
    }
}
