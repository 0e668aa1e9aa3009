//! Dirichlet problems whose gradient constraints are linear inequalities in
//! `(u, g)` jointly: Hajłasz, ball-Poincaré and the complex envelope.
//!
//! The joint program `min Σ w_i |g_i|^p` over `(u, g)` is not strictly
//! convex in `u`, so it is solved by a proximal-point loop: each outer step
//! adds `(ρ/2)‖u − u_k‖²` and solves the resulting separable program by dual
//! coordinate ascent, warm-started from the previous multipliers.

use crate::config::SolverConfig;
use crate::engine::dual::{Coordinate, DualOptions, Row, SeparableProgram};
use crate::engine::dykstra::ProjectionOracle;
use crate::engine::vecops::norm_inf;
use crate::error::{Error, Result};
use crate::relation::{lp_parts, Envelope, GradientRelation, RelationKind};
use crate::variational::feasible::ReducedSet;

const RHO_DECAY: f64 = 0.5;
const RHO_FLOOR: f64 = 1e-3;

/// A linear form in `u` over all coordinates, reduced to free variables.
struct Affine {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

struct Layout {
    /// Position of each `u` coordinate among the free variables.
    free_pos: Vec<Option<usize>>,
    base: Vec<f64>,
    n_free: usize,
    n_grad: usize,
    n_aux: usize,
}

impl Layout {
    fn grad(&self, i: usize) -> usize {
        self.n_free + i
    }

    fn aux(&self, k: usize) -> usize {
        self.n_free + self.n_grad + k
    }

    /// `Σ c_i u_i` in program variables.
    fn form(&self, coeffs: &[(usize, f64)]) -> Affine {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        for (i, c) in coeffs {
            match self.free_pos[*i] {
                Some(k) => terms.push((k, *c)),
                None => constant += c * self.base[*i],
            }
        }
        Affine { terms, constant }
    }
}

/// `Σ extra + sign·form ≥ 0`.
fn row_with(extra: Vec<(usize, f64)>, form: &Affine, sign: f64) -> Row {
    let mut entries = extra;
    entries.extend(form.terms.iter().map(|(k, c)| (*k, sign * c)));
    Row::new(entries, -sign * form.constant)
}

fn gradient_rows(rel: &GradientRelation, lay: &mut Layout) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    match rel.kind() {
        RelationKind::Hajlasz(x) => {
            for i in 0..x.len() {
                for j in i + 1..x.len() {
                    let d = x.distance(i, j);
                    let diff = lay.form(&[(i, 1.0 / d), (j, -1.0 / d)]);
                    for s in [1.0, -1.0] {
                        rows.push(row_with(vec![(lay.grad(i), 1.0), (lay.grad(j), 1.0)], &diff, s));
                    }
                }
            }
        }
        RelationKind::Envelope(Envelope::ComplexMax) => {
            for k in 0..2 {
                let part = lay.form(&[(k, 1.0)]);
                for s in [1.0, -1.0] {
                    rows.push(row_with(vec![(lay.grad(0), 1.0)], &part, s));
                }
            }
        }
        RelationKind::BallPoincare { space, lambda } => {
            let mu = space.measure();
            for ball in space.ball_family(*lambda) {
                let mass = space.mass(&ball.members);
                let dmass = space.mass(&ball.dilated);
                let mut main: Vec<(usize, f64)> = ball
                    .dilated
                    .iter()
                    .map(|y| (lay.grad(*y), ball.radius * mu[*y] / dmass))
                    .collect();
                for &y in &ball.members {
                    let t = lay.aux(lay.n_aux);
                    lay.n_aux += 1;
                    // u_y − u_B
                    let mut coeffs: Vec<(usize, f64)> =
                        ball.members.iter().map(|z| (*z, -mu[*z] / mass)).collect();
                    coeffs.push((y, 1.0));
                    let dev = lay.form(&coeffs);
                    for s in [1.0, -1.0] {
                        rows.push(row_with(vec![(t, 1.0)], &dev, s));
                    }
                    main.push((t, -mu[y] / mass));
                }
                rows.push(Row::new(main, 0.0));
            }
        }
        _ => {
            return Err(Error::InvalidInput(
                "relation is not handled by the polyhedral solver".into(),
            ))
        }
    }
    Ok(rows)
}

pub(crate) fn handles(rel: &GradientRelation) -> bool {
    matches!(
        rel.kind(),
        RelationKind::Hajlasz(_)
            | RelationKind::BallPoincare { .. }
            | RelationKind::Envelope(Envelope::ComplexMax)
    )
}

/// Returns the free coordinates of a minimizer and the number of outer
/// iterations.
pub(crate) fn solve(
    rel: &GradientRelation,
    red: &ReducedSet,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, usize)> {
    if red.has_psd() {
        return Err(Error::InvalidInput(
            "PSD order bounds are not supported for this relation".into(),
        ));
    }
    let n = rel.domain().dimension();
    let m = rel.codomain().dimension();
    let (p, weights) = lp_parts(rel.codomain().norm_spec(), m).expect("validated ℓp norm");
    let mut free_pos = vec![None; n];
    for (k, i) in red.free().iter().enumerate() {
        free_pos[*i] = Some(k);
    }
    let mut lay = Layout {
        free_pos,
        base: red.expand(&vec![0.0; red.free().len()]),
        n_free: red.free().len(),
        n_grad: m,
        n_aux: 0,
    };
    let mut rows = gradient_rows(rel, &mut lay)?;
    for (k, (lo, hi)) in red.lower.iter().zip(&red.upper).enumerate() {
        if lo.is_finite() {
            rows.push(Row::new(vec![(k, 1.0)], *lo));
        }
        if hi.is_finite() {
            rows.push(Row::new(vec![(k, -1.0)], -hi));
        }
    }
    for h in &red.halfspaces {
        let entries = h
            .normal
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(k, a)| (k, *a))
            .collect();
        rows.push(Row::new(entries, h.offset));
    }

    let rho0 = weights.iter().sum::<f64>() / m.max(1) as f64;
    let rho_min = rho0 * RHO_FLOOR;
    let mut rho = rho0;
    let mut z = start.to_vec();
    let mut aux = vec![0.0; lay.n_aux];
    let mut warm: Option<Vec<f64>> = None;
    let opts = DualOptions {
        max_sweeps: cfg.max_iterations,
        tol_feasibility: cfg.tol_feasibility * 1e-2,
        tol_gap: cfg.tol_objective * 1e-2,
        seed: cfg.seed,
    };

    for outer in 1..=cfg.max_iterations {
        let mut coords = Vec::with_capacity(lay.n_free + m + lay.n_aux);
        coords.extend(z.iter().map(|c| Coordinate::Proximal { center: *c, weight: rho }));
        coords.extend(weights.iter().map(|w| Coordinate::Power { weight: *w, exponent: p }));
        coords.extend(aux.iter().map(|c| Coordinate::Proximal { center: *c, weight: rho }));
        let prog = SeparableProgram {
            coords,
            rows: rows.clone(),
        };
        let out = match prog.solve_from(warm.as_deref(), opts) {
            Ok(o) => o,
            Err(Error::NotConverged { best: Some(x), residual, .. }) => {
                return Err(Error::NotConverged {
                    iterations: outer,
                    residual,
                    best: Some(red.project(&x[..lay.n_free])),
                })
            }
            Err(e) => return Err(e),
        };
        let z_new = out.x[..lay.n_free].to_vec();
        let aux_new = out.x[lay.n_free + m..].to_vec();
        let step = z_new
            .iter()
            .zip(&z)
            .chain(aux_new.iter().zip(&aux))
            .fold(0.0_f64, |s, (a, b)| s.max((a - b).abs()));
        let scale = norm_inf(&z_new).max(norm_inf(&aux_new)).max(1.0);
        z = z_new;
        aux = aux_new;
        warm = Some(out.multipliers);
        if norm_inf(&z) > cfg.max_iterate_norm {
            return Err(Error::Unbounded {
                norm: norm_inf(&z),
                cap: cfg.max_iterate_norm,
            });
        }
        if rho <= rho_min && step <= cfg.tol_objective * scale {
            return Ok((red.project(&z), outer));
        }
        rho = (rho * RHO_DECAY).max(rho_min);
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: f64::NAN,
        best: Some(red.project(&z)),
    })
}
