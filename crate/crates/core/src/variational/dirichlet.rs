//! Dirichlet, obstacle and multi-obstacle problems: minimize `‖g_u‖_W` over
//! `u ∈ K_f = K₀ + f`.
//!
//! The route depends on the relation and the constraints:
//!
//! * a linear graph with a quadratic `W`-norm over a coordinate subspace is
//!   a linear system, solved by conjugate gradients on the free nodes;
//! * Hajłasz, ball-Poincaré and complex-envelope relations go through the
//!   proximal dual solver in [`super::polyhedral`];
//! * everything else runs projected accelerated descent on `‖g_u‖_W^p`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{SolveReport, SolverConfig};
use crate::engine::cg::cg_solve_from;
use crate::engine::descent::{projected_descent, EnergyOracle};
use crate::engine::dykstra::ProjectionOracle;
use crate::engine::vecops::norm_inf;
use crate::error::{check_len, Error, Result};
use crate::relation::{GradientRelation, RelationKind};
use crate::space::Element;
use crate::variational::feasible::{Constraint, FeasibleSet, ReducedSet};
use crate::variational::polyhedral;

/// `Φ(u) = ‖g_u‖_W^p` as a function of the free coordinates.
struct ReducedEnergy<'a> {
    rel: &'a GradientRelation,
    red: &'a ReducedSet,
    cfg: &'a SolverConfig,
}

impl EnergyOracle for ReducedEnergy<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        self.value_and_gradient(z).0
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.value_and_gradient(z).1
    }

    fn value_and_gradient(&self, z: &[f64]) -> (f64, Vec<f64>) {
        match self.rel.energy(&self.red.expand(z), self.cfg) {
            Ok((v, g)) => (v, self.red.restrict(&g)),
            Err(_) => (f64::INFINITY, vec![0.0; z.len()]),
        }
    }
}

fn check_inputs(rel: &GradientRelation, k0: &FeasibleSet, f: &Element, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    let n = rel.domain().dimension();
    check_len("constraint set", n, k0.dimension())?;
    check_len("boundary data", n, f.dimension())?;
    if k0.shift().is_some() {
        return Err(Error::InvalidInput("K₀ must be given without a shift".into()));
    }
    Ok(())
}

/// Deterministic for seed 0; otherwise a seeded perturbation of `f`.
fn start_point(f: &[f64], seed: u64) -> Vec<f64> {
    if seed == 0 {
        return f.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = 0.5 * norm_inf(f).max(1.0);
    f.iter().map(|v| v + amp * rng.gen_range(-1.0..1.0)).collect()
}

fn uses_linear_system(rel: &GradientRelation, red: &ReducedSet) -> bool {
    matches!(rel.kind(), RelationKind::LinearGraph(_))
        && rel.codomain().norm_spec().is_quadratic()
        && red.is_box()
        && red.lower.iter().all(|v| *v == f64::NEG_INFINITY)
        && red.upper.iter().all(|v| *v == f64::INFINITY)
}

/// Solves `FᵀWF u = 0` on the free coordinates with the fixed ones as data.
fn linear_route(rel: &GradientRelation, red: &ReducedSet, start: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, usize)> {
    let RelationKind::LinearGraph(op) = rel.kind() else {
        unreachable!("checked by uses_linear_system")
    };
    let norm = rel.codomain().norm_spec();
    let nf = red.free().len();
    // ½ ∇‖·‖² is linear for quadratic norms
    let apply_full = |v: &[f64]| -> Vec<f64> {
        let g = norm.power_gradient(&op.apply_vec(v));
        op.apply_transpose_vec(&g).iter().map(|x| 0.5 * x).collect()
    };
    let fixed_part = apply_full(&red.expand(&vec![0.0; nf]));
    let b: Vec<f64> = red.restrict(&fixed_part).iter().map(|v| -v).collect();
    let zero_base = {
        let mut r = red.clone();
        r.zero_base();
        r
    };
    let out = cg_solve_from(
        |z, y| y.copy_from_slice(&zero_base.restrict(&apply_full(&zero_base.expand(z)))),
        &b,
        Some(start),
        cfg.tol_objective,
        cfg.max_iterations,
    )
    .map_err(|e| match e {
        Error::NotConverged { iterations, residual, best } => Error::NotConverged {
            iterations,
            residual,
            best: best.map(|z| red.expand(&z)),
        },
        Error::Indefinite => Error::Precondition(
            "the constraint set is not a Poincaré set for this relation (singular system)".into(),
        ),
        other => other,
    })?;
    if norm_inf(&out.x) > cfg.max_iterate_norm {
        return Err(Error::Unbounded {
            norm: norm_inf(&out.x),
            cap: cfg.max_iterate_norm,
        });
    }
    Ok((out.x, out.iterations))
}

fn descent_route(rel: &GradientRelation, red: &ReducedSet, start: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, usize)> {
    let energy = ReducedEnergy { rel, red, cfg };
    match projected_descent(&energy, red, start, cfg) {
        Ok(out) => Ok((out.point, out.iterations)),
        Err(Error::NotConverged { iterations, residual, best }) => Err(Error::NotConverged {
            iterations,
            residual,
            best: best.map(|z| red.expand(&z)),
        }),
        Err(e) => Err(e),
    }
}

fn report(
    rel: &GradientRelation,
    kf: &FeasibleSet,
    u: Vec<f64>,
    iterations: usize,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let minimizer = Element::new(Arc::clone(rel.domain()), u)?;
    let minimal_gradient = rel.minimal_gradient(&minimizer, cfg)?;
    let energy = rel.codomain().norm_spec().power(minimal_gradient.coords());
    let feasibility_residual = kf.residual(minimizer.coords())?;
    Ok(SolveReport {
        objective: minimal_gradient.norm(),
        energy,
        iterations,
        converged: feasibility_residual <= cfg.tol_feasibility,
        feasibility_residual,
        minimizer,
        minimal_gradient,
    })
}

/// Minimizes `‖g_u‖_W` over `u − f ∈ K₀`.
///
/// `K₀` should be a Poincaré set for `rel`, or the minimizing sequence must
/// stay bounded; iterates beyond `cfg.max_iterate_norm` abort with
/// [`Error::Unbounded`].
pub fn solve_dirichlet(
    rel: &GradientRelation,
    k0: &FeasibleSet,
    f: &Element,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    check_inputs(rel, k0, f, cfg)?;
    let kf = k0.shifted(f)?;
    let red = ReducedSet::new(&kf, f.coords())?;
    if red.empty_box() {
        return Err(Error::Infeasible("the bounds cross on some coordinate".into()));
    }
    let start = red.project(&red.restrict(&start_point(f.coords(), cfg.seed)));
    let scale = 1.0 + norm_inf(f.coords());
    let start_residual = kf.residual(&red.expand(&start))?;
    if start_residual > cfg.tol_feasibility * scale {
        return Err(Error::Infeasible(format!(
            "no point of K_f found (residual {start_residual:.3e})"
        )));
    }
    let (z, iterations) = if uses_linear_system(rel, &red) {
        linear_route(rel, &red, &start, cfg)?
    } else if polyhedral::handles(rel) {
        polyhedral::solve(rel, &red, &start, cfg)?
    } else {
        descent_route(rel, &red, &start, cfg)?
    };
    report(rel, &kf, red.expand(&z), iterations, cfg)
}

/// `K̃₀(ψ, f) = {v ∈ K₀ : v + f ≥ ψ}`.
pub fn obstacle_set(k0: &FeasibleSet, f: &Element, psi: &Element) -> Result<FeasibleSet> {
    check_len("obstacle", f.dimension(), psi.dimension())?;
    let lower = psi.coords().iter().zip(f.coords()).map(|(p, v)| p - v).collect();
    k0.clone().with(Constraint::LowerBound(lower))
}

/// Is there `v ∈ K₀` with `v ≥ ψ − f`?
pub fn check_feasible_obstacle(k0: &FeasibleSet, f: &Element, psi: &Element) -> Result<bool> {
    check_feasible_obstacle_with(k0, f, psi, &SolverConfig::default())
}

pub fn check_feasible_obstacle_with(
    k0: &FeasibleSet,
    f: &Element,
    psi: &Element,
    cfg: &SolverConfig,
) -> Result<bool> {
    check_len("constraint set", k0.dimension(), f.dimension())?;
    Ok(obstacle_set(k0, f, psi)?.find_point(cfg)?.is_some())
}

/// Minimizes `‖g_u‖_W` over `u − f ∈ K₀` and `u ≥ ψ`; this is
/// [`solve_dirichlet`] over [`obstacle_set`].
pub fn solve_obstacle(
    rel: &GradientRelation,
    k0: &FeasibleSet,
    f: &Element,
    psi: &Element,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    check_inputs(rel, k0, f, cfg)?;
    if !check_feasible_obstacle_with(k0, f, psi, cfg)? {
        return Err(Error::Infeasible(
            "no admissible function lies above the obstacle (see check_feasible_obstacle)".into(),
        ));
    }
    solve_dirichlet(rel, &obstacle_set(k0, f, psi)?, f, cfg)
}

/// `K₀` intersected with `u ≥ ψ` for every lower obstacle and `u ≤ φ` for
/// every upper one, bounds merged elementwise.
pub fn multi_obstacle_set(
    k0: &FeasibleSet,
    f: &Element,
    lower: &[Element],
    upper: &[Element],
) -> Result<FeasibleSet> {
    let n = f.dimension();
    let merge = |list: &[Element], pick: fn(f64, f64) -> f64| -> Result<Option<Vec<f64>>> {
        let mut acc: Option<Vec<f64>> = None;
        for b in list {
            check_len("obstacle", n, b.dimension())?;
            let shifted: Vec<f64> = b.coords().iter().zip(f.coords()).map(|(p, v)| p - v).collect();
            acc = Some(match acc {
                None => shifted,
                Some(a) => a.iter().zip(&shifted).map(|(x, y)| pick(*x, *y)).collect(),
            });
        }
        Ok(acc)
    };
    let mut set = k0.clone();
    if let Some(lo) = merge(lower, f64::max)? {
        set = set.with(Constraint::LowerBound(lo))?;
    }
    if let Some(hi) = merge(upper, f64::min)? {
        set = set.with(Constraint::UpperBound(hi))?;
    }
    Ok(set)
}

pub fn solve_multi_obstacle(
    rel: &GradientRelation,
    k0: &FeasibleSet,
    f: &Element,
    lower: &[Element],
    upper: &[Element],
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    check_inputs(rel, k0, f, cfg)?;
    let set = multi_obstacle_set(k0, f, lower, upper)?;
    if set.find_point(cfg)?.is_none() {
        return Err(Error::Infeasible("the obstacles admit no function in K_f".into()));
    }
    solve_dirichlet(rel, &set, f, cfg)
}
