//! Norm-minimal max and min of two elements in an ordered space.
//!
//! The componentwise order on coordinate vectors is a lattice and the
//! operations are pointwise. The PSD order on symmetric matrices is not: the
//! maximum is the norm-least common upper bound, found by projection.

use std::sync::Arc;

use crate::config::SolverConfig;
use crate::engine::descent::{projected_descent, EnergyOracle};
use crate::engine::dykstra::{dykstra, DykstraOptions, ProjectionOracle};
use crate::error::{check_len, Error, Result};
use crate::matrix::ops::{MATRIX_DYKSTRA_STEP, MATRIX_DYKSTRA_SWEEPS};
use crate::matrix::schatten::{schatten_power, schatten_power_gradient};
use crate::matrix::{matrix_max, matrix_min, PsdShift, SymmetricMatrix, PSD_TOL};
use crate::space::{Element, NormSpec};

/// Margin for strict norm comparisons, relative to `max(1, ‖v‖)`.
pub const STRICT_NORM_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderSpec {
    /// `a ≤ b` iff `a_i ≤ b_i` for every coordinate.
    Componentwise,
    /// `A ⪯ B` iff `B − A` is positive semidefinite.
    Psd,
}

fn same_space(a: &Element, b: &Element) -> Result<()> {
    check_len("ordered elements", a.dimension(), b.dimension())?;
    if a.space().kind() != b.space().kind() {
        return Err(Error::InvalidInput(format!(
            "elements live in different spaces ({} and {})",
            a.space().kind(),
            b.space().kind()
        )));
    }
    Ok(())
}

fn as_matrix(e: &Element) -> Result<SymmetricMatrix> {
    let n = e
        .space()
        .matrix_side()
        .ok_or_else(|| Error::InvalidInput(format!("the PSD order needs a matrix space, not {}", e.space().kind())))?;
    SymmetricMatrix::new(n, e.coords().to_vec())
}

fn difference(a: &Element, b: &Element) -> Vec<f64> {
    b.coords().iter().zip(a.coords()).map(|(x, y)| x - y).collect()
}

/// `a ≤ b` up to `tol`: every coordinate of `b − a` is at least `−tol`, or
/// the smallest eigenvalue of `B − A` is at least `−tol`.
pub fn order_leq(order: OrderSpec, a: &Element, b: &Element, tol: f64) -> Result<bool> {
    same_space(a, b)?;
    Ok(match order {
        OrderSpec::Componentwise => difference(a, b).iter().all(|d| *d >= -tol),
        OrderSpec::Psd => as_matrix(b)?.sub(&as_matrix(a)?).min_eigenvalue() >= -tol,
    })
}

/// PSD membership slack `PSD_TOL · (1 + ‖A‖_F)`.
fn psd_slack(a: &Element, b: &Element) -> f64 {
    let d: f64 = difference(a, b).iter().map(|v| v * v).sum::<f64>().sqrt();
    PSD_TOL * (1.0 + d)
}

fn leq_default(order: OrderSpec, a: &Element, b: &Element) -> Result<bool> {
    match order {
        OrderSpec::Componentwise => order_leq(order, a, b, 0.0),
        OrderSpec::Psd => order_leq(order, a, b, psd_slack(a, b)),
    }
}

/// Tolerance for comparisons against a computed max or min.
fn computed_slack(order: OrderSpec, a: &Element, b: &Element, cfg: &SolverConfig) -> f64 {
    let scale = 1.0 + a.norm().max(b.norm());
    match order {
        OrderSpec::Componentwise => cfg.tol_feasibility * scale,
        OrderSpec::Psd => cfg.tol_feasibility.max(1e-8) * scale,
    }
}

fn require_nonnegative(order: OrderSpec, what: &str, e: &Element) -> Result<()> {
    let zero = Element::zeros(Arc::clone(e.space()));
    if !leq_default(order, &zero, e)? {
        return Err(Error::Precondition(format!("{what} must be nonnegative in the order")));
    }
    Ok(())
}

fn schatten_exponent(e: &Element) -> Result<Option<f64>> {
    match e.space().norm_spec() {
        NormSpec::Schatten { p } if *p == 2.0 => Ok(None),
        NormSpec::Schatten { p } => Ok(Some(*p)),
        NormSpec::Euclidean => Ok(None),
        other => Err(Error::InvalidInput(format!(
            "the PSD order needs a Schatten or Euclidean norm, got {other:?}"
        ))),
    }
}

/// Intersection of shifted PSD cones, projected by Dykstra.
#[derive(Debug)]
struct ConeIntersection {
    cones: Vec<PsdShift>,
}

impl ProjectionOracle for ConeIntersection {
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let oracles: Vec<&dyn ProjectionOracle> = self.cones.iter().map(|c| c as &dyn ProjectionOracle).collect();
        let opts = DykstraOptions {
            max_sweeps: MATRIX_DYKSTRA_SWEEPS,
            step_tol: MATRIX_DYKSTRA_STEP,
        };
        match dykstra(&oracles, x, opts) {
            Ok(out) => out.point,
            Err(Error::NotConverged { best: Some(b), .. }) => b,
            Err(_) => x.to_vec(),
        }
    }
}

/// `‖X − target‖_p^p` on row-major matrices.
struct SchattenDistance {
    n: usize,
    p: f64,
    target: Vec<f64>,
}

impl SchattenDistance {
    fn offset(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.target).map(|(a, b)| a - b).collect()
    }
}

impl EnergyOracle for SchattenDistance {
    fn value(&self, x: &[f64]) -> f64 {
        schatten_power(self.n, &self.offset(x), self.p)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        schatten_power_gradient(self.n, &self.offset(x), self.p)
    }
}

fn schatten_nearest(
    target: &SymmetricMatrix,
    cones: Vec<PsdShift>,
    p: f64,
    start: &SymmetricMatrix,
    cfg: &SolverConfig,
) -> Result<SymmetricMatrix> {
    let n = target.n();
    let energy = SchattenDistance {
        n,
        p,
        target: target.as_slice().to_vec(),
    };
    let set = ConeIntersection { cones };
    let out = match projected_descent(&energy, &set, start.as_slice(), cfg) {
        Ok(out) => out.point,
        Err(Error::NotConverged { best: Some(b), .. }) => b,
        Err(e) => return Err(e),
    };
    Ok(SymmetricMatrix::symmetrize(n, &out))
}

/// The norm-least `u` with `u ≥ ψ₁` and `u ≥ ψ₂`.
///
/// Componentwise this is the pointwise maximum, also for inputs with
/// negative entries, where it is the lattice supremum rather than the
/// norm-least bound. The PSD order requires `ψ₁, ψ₂ ⪰ 0`.
pub fn lattice_max(order: OrderSpec, psi1: &Element, psi2: &Element, cfg: &SolverConfig) -> Result<Element> {
    same_space(psi1, psi2)?;
    cfg.validate()?;
    match order {
        OrderSpec::Componentwise => {
            let m = psi1.coords().iter().zip(psi2.coords()).map(|(a, b)| a.max(*b)).collect();
            psi1.with_coords(m)
        }
        OrderSpec::Psd => {
            require_nonnegative(order, "ψ₁", psi1)?;
            require_nonnegative(order, "ψ₂", psi2)?;
            let (a, b) = (as_matrix(psi1)?, as_matrix(psi2)?);
            let frob = matrix_max(&a, &b, cfg)?;
            let x = match schatten_exponent(psi1)? {
                None => frob,
                Some(p) => {
                    let zero = SymmetricMatrix::zeros(a.n());
                    schatten_nearest(&zero, vec![PsdShift::above(a), PsdShift::above(b)], p, &frob, cfg)?
                }
            };
            psi1.with_coords(x.into_vec())
        }
    }
}

/// The element of `{v : 0 ≤ v ≤ ψ₁, v ≤ ψ₂}` nearest to `lattice_max(ψ₁, ψ₂)`.
pub fn lattice_min(order: OrderSpec, psi1: &Element, psi2: &Element, cfg: &SolverConfig) -> Result<Element> {
    same_space(psi1, psi2)?;
    cfg.validate()?;
    require_nonnegative(order, "ψ₁", psi1)?;
    require_nonnegative(order, "ψ₂", psi2)?;
    match order {
        OrderSpec::Componentwise => {
            let m = psi1.coords().iter().zip(psi2.coords()).map(|(a, b)| a.min(*b)).collect();
            psi1.with_coords(m)
        }
        OrderSpec::Psd => {
            let (a, b) = (as_matrix(psi1)?, as_matrix(psi2)?);
            let frob = matrix_min(&a, &b, cfg)?;
            let x = match schatten_exponent(psi1)? {
                None => frob,
                Some(p) => {
                    let top = as_matrix(&lattice_max(order, psi1, psi2, cfg)?)?;
                    let cones = vec![
                        PsdShift::above(SymmetricMatrix::zeros(a.n())),
                        PsdShift::below(a),
                        PsdShift::below(b),
                    ];
                    schatten_nearest(&top, cones, p, &frob, cfg)?
                }
            };
            psi1.with_coords(x.into_vec())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundComparison {
    /// `c ≥ max` or `c ≤ max`.
    pub comparable: bool,
    /// `c ≥ max`.
    pub dominates: bool,
    /// `‖c‖ > ‖max‖` by more than the strictness margin.
    pub strictly_larger_norm: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LubReport {
    pub maximum: Element,
    pub candidates: Vec<BoundComparison>,
    /// Every comparable candidate dominates the maximum.
    pub consistent: bool,
}

/// Compares upper bounds of `ψ₁, ψ₂` with their maximum.
pub fn check_lub_property(
    order: OrderSpec,
    psi1: &Element,
    psi2: &Element,
    candidates: &[Element],
    cfg: &SolverConfig,
) -> Result<LubReport> {
    let maximum = lattice_max(order, psi1, psi2, cfg)?;
    let max_norm = maximum.norm();
    let mut out = Vec::with_capacity(candidates.len());
    for (k, c) in candidates.iter().enumerate() {
        same_space(psi1, c)?;
        if !leq_default(order, psi1, c)? || !leq_default(order, psi2, c)? {
            return Err(Error::Precondition(format!("candidate {k} is not an upper bound")));
        }
        let tol = computed_slack(order, &maximum, c, cfg);
        let dominates = order_leq(order, &maximum, c, tol)?;
        let below = order_leq(order, c, &maximum, tol)?;
        let nc = c.norm();
        out.push(BoundComparison {
            comparable: dominates || below,
            dominates,
            strictly_larger_norm: nc > max_norm + STRICT_NORM_MARGIN * nc.max(1.0),
        });
    }
    let consistent = out.iter().all(|c| !c.comparable || c.dominates);
    Ok(LubReport {
        maximum,
        candidates: out,
        consistent,
    })
}

/// For `0 ≤ u ≤ v` with `u ≠ v`: whether `‖u‖ < ‖v‖` by more than
/// [`STRICT_NORM_MARGIN`]` · max(1, ‖v‖)`.
pub fn strict_norm_monotonicity_check(order: OrderSpec, u: &Element, v: &Element) -> Result<bool> {
    same_space(u, v)?;
    if u.coords() == v.coords() {
        return Err(Error::Precondition("u and v must differ".into()));
    }
    require_nonnegative(order, "u", u)?;
    if !leq_default(order, u, v)? {
        return Err(Error::Precondition("u ≤ v does not hold".into()));
    }
    let nv = v.norm();
    Ok(u.norm() < nv - STRICT_NORM_MARGIN * nv.max(1.0))
}
