//! Grid energies and their boundary-value problems.
//!
//! The `p`-energy is `Σ_c |A ∇u(c)|^p w(c) hⁿ` over every cell node `c`
//! (nodes with a forward neighbour along each axis), with forward
//! differences for `∇u`.

use std::sync::Arc;

use crate::config::{SolveReport, SolverConfig};
use crate::engine::linop::LinearOperator;
use crate::error::{check_finite, check_len, Error, Result};
use crate::grid::domain::GridDomain;
use crate::grid::operators::{CoefficientGradient, DiscreteLaplacian, ForwardDifference, NodeGradient, Selection, Stacked};
use crate::matrix::schatten::singular_values;
use crate::relation::GradientRelation;
use crate::space::{Element, NormSpec, SpaceDescriptor, SpaceKind};
use crate::variational::{solve_dirichlet, FeasibleSet};

/// Weight or coefficient matrix attached to every node.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    /// A positive weight `w(x)` per node.
    Scalar(Vec<f64>),
    /// Row-major `ndim × ndim` matrices per node with
    /// `‖A(x)ξ‖ ≥ ellipticity ‖ξ‖`.
    Matrix { matrices: Vec<f64>, ellipticity: f64 },
}

impl CoefficientField {
    pub fn validate(&self, dom: &GridDomain) -> Result<()> {
        let n = dom.node_count();
        match self {
            CoefficientField::Scalar(w) => {
                check_len("node weights", n, w.len())?;
                if let Some(i) = w.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::InvalidInput(format!("weight at node {i} is not positive")));
                }
            }
            CoefficientField::Matrix { matrices, ellipticity } => {
                let d = dom.ndim();
                check_len("coefficient matrices", n * d * d, matrices.len())?;
                check_finite("coefficient matrices", matrices)?;
                if !(*ellipticity > 0.0) {
                    return Err(Error::InvalidInput("ellipticity bound must be positive".into()));
                }
                for (i, a) in matrices.chunks(d * d).enumerate() {
                    let smallest = singular_values(d, a)[0];
                    if smallest < *ellipticity {
                        return Err(Error::InvalidInput(format!(
                            "coefficient at node {i} has smallest singular value {smallest:.3e} below {ellipticity:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn node_weights(&self, n: usize) -> Vec<f64> {
        match self {
            CoefficientField::Scalar(w) => w.clone(),
            CoefficientField::Matrix { .. } => vec![1.0; n],
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("the exponent must satisfy 1 < p < ∞, got {p}")));
    }
    Ok(())
}

fn check_field(u: &[f64], dom: &GridDomain) -> Result<()> {
    check_len("nodal field", dom.node_count(), u.len())
}

/// Gradient at every node, `ndim` entries per node: forward differences,
/// backward ones on the far faces.
pub fn grid_gradient(u: &[f64], dom: &GridDomain) -> Result<Vec<f64>> {
    check_field(u, dom)?;
    Ok(NodeGradient::new(dom).apply_vec(u))
}

/// The `p`-Dirichlet relation `u ↦ A∇u` with the weighted block norm.
pub fn p_laplace_relation(dom: &GridDomain, p: f64, coeff: Option<&CoefficientField>) -> Result<GradientRelation> {
    check_p(p)?;
    let n = dom.node_count();
    let d = dom.ndim();
    let vol = dom.cell_volume();
    if let Some(c) = coeff {
        c.validate(dom)?;
    }
    let weights = coeff.map_or_else(|| vec![1.0; n], |c| c.node_weights(n));
    let fd = ForwardDifference::new(dom);
    let cells = fd.cells().to_vec();
    let op: Arc<dyn LinearOperator> = match coeff {
        Some(CoefficientField::Matrix { matrices, .. }) => {
            let per_cell = cells
                .iter()
                .flat_map(|c| matrices[c * d * d..(c + 1) * d * d].iter().copied())
                .collect();
            Arc::new(CoefficientGradient::new(fd, per_cell))
        }
        _ => Arc::new(fd),
    };
    let domain = SpaceDescriptor::new(
        SpaceKind::EuclideanGrid,
        n,
        NormSpec::WeightedLp {
            p,
            weights: weights.iter().map(|w| w * vol).collect(),
        },
    )?
    .shared();
    let codomain = SpaceDescriptor::new(
        SpaceKind::EuclideanGrid,
        cells.len() * d,
        NormSpec::BlockLp {
            p,
            blocks: vec![d; cells.len()],
            weights: cells.iter().map(|c| weights[*c] * vol).collect(),
        },
    )?
    .shared();
    GradientRelation::linear(domain, codomain, op)
}

/// `Σ_c |A∇u(c)|^p w(c) hⁿ`.
pub fn p_energy(u: &[f64], dom: &GridDomain, p: f64, coeff: Option<&CoefficientField>) -> Result<f64> {
    check_field(u, dom)?;
    let rel = p_laplace_relation(dom, p, coeff)?;
    let crate::relation::RelationKind::LinearGraph(op) = rel.kind() else {
        unreachable!()
    };
    Ok(rel.codomain().norm_spec().power(&op.apply_vec(u)))
}

fn boundary_problem(dom: &GridDomain) -> Result<(FeasibleSet, Vec<f64>)> {
    let values = dom
        .boundary_values()
        .ok_or_else(|| Error::InvalidInput("the grid has no boundary values".into()))?;
    let mask = dom.interior_mask().iter().map(|i| !i).collect();
    Ok((FeasibleSet::subspace(mask), values.to_vec()))
}

fn solve_on_grid(rel: &GradientRelation, dom: &GridDomain, cfg: &SolverConfig) -> Result<SolveReport> {
    let (k0, f) = boundary_problem(dom)?;
    let f = Element::new(Arc::clone(rel.domain()), f)?;
    solve_dirichlet(rel, &k0, &f, cfg)
}

/// Minimizes the `p`-energy over fields that match the boundary values.
pub fn solve_p_laplace(
    dom: &GridDomain,
    p: f64,
    coeff: Option<&CoefficientField>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let rel = p_laplace_relation(dom, p, coeff)?;
    solve_on_grid(&rel, dom, cfg)
}

/// Zero-order part of the mixed functional.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroOrder {
    /// `Λu = u`.
    Identity,
    /// `Λu = χ_E u` for the listed nodes `E`.
    Indicator(Vec<usize>),
}

/// The relation `u ↦ (Λu, ∇u)` with energy `Σ |Λu|^p hⁿ + Σ |∇u|^p hⁿ`.
/// An empty indicator set gives exactly [`p_laplace_relation`].
pub fn mixed_relation(dom: &GridDomain, p: f64, lam: &ZeroOrder) -> Result<GradientRelation> {
    let n = dom.node_count();
    let nodes: Vec<usize> = match lam {
        ZeroOrder::Identity => (0..n).collect(),
        ZeroOrder::Indicator(e) => {
            if let Some(i) = e.iter().find(|i| **i >= n) {
                return Err(Error::InvalidInput(format!("node {i} is outside the grid")));
            }
            let mut e = e.clone();
            e.sort_unstable();
            e.dedup();
            e
        }
    };
    if nodes.is_empty() {
        return p_laplace_relation(dom, p, None);
    }
    check_p(p)?;
    let d = dom.ndim();
    let vol = dom.cell_volume();
    let fd = ForwardDifference::new(dom);
    let cells = fd.cells().len();
    let m = nodes.len();
    let op = Stacked::new(vec![Arc::new(Selection::new(nodes, n)), Arc::new(fd)]);
    let domain = SpaceDescriptor::new(SpaceKind::EuclideanGrid, n, NormSpec::WeightedLp { p, weights: vec![vol; n] })?.shared();
    let mut blocks = vec![1; m];
    blocks.extend(std::iter::repeat(d).take(cells));
    let codomain = SpaceDescriptor::new(
        SpaceKind::EuclideanGrid,
        m + cells * d,
        NormSpec::BlockLp {
            p,
            blocks,
            weights: vec![vol; m + cells],
        },
    )?
    .shared();
    GradientRelation::linear(domain, codomain, Arc::new(op))
}

pub fn solve_mixed_functional(dom: &GridDomain, p: f64, lam: &ZeroOrder, cfg: &SolverConfig) -> Result<SolveReport> {
    let rel = mixed_relation(dom, p, lam)?;
    solve_on_grid(&rel, dom, cfg)
}

/// `u ↦ Δ_h u` at every node with both neighbours along each axis, with
/// `L²(hⁿ)` norms.
pub fn biharmonic_relation(dom: &GridDomain) -> Result<GradientRelation> {
    let n = dom.node_count();
    let vol = dom.cell_volume();
    let lap = DiscreteLaplacian::new(dom);
    let m = lap.centres().len();
    let domain = SpaceDescriptor::new(SpaceKind::EuclideanGrid, n, NormSpec::WeightedLp { p: 2.0, weights: vec![vol; n] })?.shared();
    let codomain = SpaceDescriptor::new(SpaceKind::EuclideanGrid, m, NormSpec::WeightedLp { p: 2.0, weights: vec![vol; m] })?.shared();
    GradientRelation::linear(domain, codomain, Arc::new(lap))
}

/// Minimizes `Σ |Δ_h u|² hⁿ` with the two outer node layers prescribed,
/// which discretizes boundary data for `u` and its normal derivative.
pub fn solve_biharmonic(dom: &GridDomain, cfg: &SolverConfig) -> Result<SolveReport> {
    if let Some(i) = (0..dom.node_count()).find(|i| dom.interior_mask()[*i] && dom.face_depth(*i) < 2) {
        return Err(Error::InvalidInput(format!(
            "free node {i} is next to the boundary; two layers must be prescribed"
        )));
    }
    let rel = biharmonic_relation(dom)?;
    solve_on_grid(&rel, dom, cfg)
}
