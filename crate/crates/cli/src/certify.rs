//! Re-checks a stored solution without solving the problem again.
//!
//! Linear relations over box constraints get a KKT residual of the energy.
//! Everything else is probed: small feasible moves from the stored point
//! must not lower the objective, which for convex problems is necessary
//! and, on the sampled directions, checks global optimality.

use std::collections::BTreeMap;
use std::sync::Arc;

use gradspace::engine::linop::{DenseMatrix, LinearOperator};
use gradspace::matrix::fredholm::RANK_RTOL;
use gradspace::matrix::SymmetricMatrix;
use gradspace::variational::{multi_obstacle_set, obstacle_set};
use gradspace::{
    Element, FeasibleSet, GradientRelation, NormSpec, OrderSpec, RelationKind, SolverConfig, SpaceDescriptor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::problem::{Task, VariationalMode};
use crate::report::Certificate;

/// Feasibility tolerance, in units of `tol_feasibility · (1 + data scale)`.
pub const FEASIBILITY_SLACK: f64 = 100.0;
/// Bound on the relative KKT residual of the energy.
pub const KKT_RTOL: f64 = 1e-4;
/// Coordinates within this distance (relative to `1 + ‖u‖∞`) of a bound
/// count as active.
pub const ACTIVE_RTOL: f64 = 1e-6;
/// Bound on the relative objective decrease any feasible probe may find.
pub const PROBE_RTOL: f64 = 1e-6;
/// Coordinate probes beyond this many free coordinates are subsampled.
const PROBE_COORDINATES: usize = 2048;
const RANDOM_PROBES: usize = 16;
const PROBE_STEPS: [f64; 2] = [1e-2, 1e-4];

/// A certificate together with the objective recomputed from the fields.
#[derive(Debug, Clone)]
pub struct Checked {
    pub certificate: Certificate,
    pub objective: f64,
}

fn field<'a>(fields: &'a BTreeMap<String, Vec<f64>>, name: &str, len: usize) -> Result<&'a [f64]> {
    let v = fields
        .get(name)
        .ok_or_else(|| CliError::Rejected(format!("field `{name}` is missing")))?;
    if v.len() != len {
        return Err(CliError::Rejected(format!("field `{name}` has {} entries, expected {len}", v.len())));
    }
    Ok(v)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn certificate(method: &str, feas: (f64, f64), opt: (f64, f64)) -> Certificate {
    Certificate {
        method: method.to_string(),
        feasibility_residual: feas.0,
        feasibility_tolerance: feas.1,
        optimality_residual: opt.0,
        optimality_tolerance: opt.1,
        passed: feas.0 <= feas.1 && opt.0 <= opt.1,
    }
}

/// Moves of a probe: signed coordinate steps on `free`, plus random
/// directions supported there, all with sup-norm one.
fn probe_directions(free: &[usize], rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<(usize, f64)>> {
    let mut coords: Vec<usize> = free.to_vec();
    if coords.len() > PROBE_COORDINATES {
        for k in 0..PROBE_COORDINATES {
            let j = rng.gen_range(k..coords.len());
            coords.swap(k, j);
        }
        coords.truncate(PROBE_COORDINATES);
        coords.sort_unstable();
    }
    let mut dirs: Vec<Vec<(usize, f64)>> = coords
        .iter()
        .flat_map(|&i| [vec![(i, 1.0)], vec![(i, -1.0)]])
        .collect();
    if !free.is_empty() {
        for _ in 0..RANDOM_PROBES {
            let d: Vec<(usize, f64)> = free.iter().map(|&i| (i, rng.gen_range(-1.0..1.0))).collect();
            let top = d.iter().fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
            if top > 0.0 {
                dirs.push(d.into_iter().map(|(i, v)| (i, v / top)).collect());
            }
        }
    }
    debug_assert!(dirs.iter().flatten().all(|(i, _)| *i < dim));
    dirs
}

/// Largest relative decrease of `phi` over the feasible probes.
fn probe(
    u: &[f64],
    dirs: &[Vec<(usize, f64)>],
    step_scale: f64,
    feasible: impl Fn(&[f64]) -> Result<bool>,
    phi: impl Fn(&[f64]) -> Result<f64>,
) -> Result<f64> {
    let base = phi(u)?;
    let mut worst = 0.0_f64;
    let mut v = u.to_vec();
    for d in dirs {
        for step in PROBE_STEPS {
            let eps = step * step_scale;
            for &(i, s) in d {
                v[i] = u[i] + eps * s;
            }
            if feasible(&v)? {
                worst = worst.max(base - phi(&v)?);
            }
            for &(i, _) in d {
                v[i] = u[i];
            }
        }
    }
    Ok(worst / base.max(f64::MIN_POSITIVE))
}

fn element(space: &Arc<SpaceDescriptor>, v: &[f64]) -> Result<Element> {
    Ok(Element::new(Arc::clone(space), v.to_vec())?)
}

fn gradient_norm(rel: &GradientRelation, v: &[f64], cfg: &SolverConfig) -> Result<f64> {
    Ok(rel.minimal_gradient(&element(rel.domain(), v)?, cfg)?.norm())
}

fn is_lp_family(norm: &NormSpec) -> bool {
    !matches!(norm, NormSpec::Schatten { .. })
}

/// Relative KKT residual of `E(u) = ‖Fu‖^q` over a box.
fn kkt_residual(op: &dyn LinearOperator, norm: &NormSpec, set: &FeasibleSet, u: &[f64]) -> f64 {
    let y = op.apply_vec(u);
    let grad = op.apply_transpose_vec(&norm.power_gradient(&y));
    let energy = norm.power(&y);
    let (lo, hi) = set.bounds_on_offset();
    let zeros = vec![0.0; u.len()];
    let base = set.shift().unwrap_or(&zeros);
    let delta = ACTIVE_RTOL * (1.0 + sup(u));
    let mut worst = 0.0_f64;
    for i in 0..u.len() {
        if lo[i] == hi[i] {
            continue;
        }
        let w = u[i] - base[i];
        let (at_lo, at_hi) = (w - lo[i] <= delta, hi[i] - w <= delta);
        let r = match (at_lo, at_hi) {
            (true, true) => 0.0,
            (true, false) => (-grad[i]).max(0.0),
            (false, true) => grad[i].max(0.0),
            (false, false) => grad[i].abs(),
        };
        worst = worst.max(r);
    }
    let l1: f64 = u.iter().map(|v| v.abs()).sum();
    let scale = sup(&grad).max(if l1 > 0.0 { norm.exponent() * energy / l1 } else { 0.0 });
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// `max(0, a − b)` in the given order: how far `a ≤ b` is from holding.
fn order_violation(order: OrderSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(match order {
        OrderSpec::Componentwise => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max(x - y)),
        OrderSpec::Psd => {
            let n = (a.len() as f64).sqrt().round() as usize;
            let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            (-SymmetricMatrix::symmetrize(n, &diff).min_eigenvalue()).max(0.0)
        }
    })
}

/// Symmetric unit moves `E_ij + E_ji` and random symmetric directions.
fn symmetric_directions(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<(usize, f64)>> {
    let mut dirs = Vec::new();
    for i in 0..n {
        for j in i..n {
            for s in [1.0, -1.0] {
                let mut d = vec![(i * n + j, s)];
                if i != j {
                    d.push((j * n + i, s));
                }
                dirs.push(d);
            }
        }
    }
    for _ in 0..RANDOM_PROBES {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        dirs.push(m.into_iter().enumerate().collect());
    }
    dirs
}

fn full_set(k0: &FeasibleSet, f: &Element, mode: &VariationalMode) -> Result<FeasibleSet> {
    Ok(match mode {
        VariationalMode::Dirichlet | VariationalMode::Biharmonic(_) => k0.shifted(f)?,
        VariationalMode::Obstacle(psi) => obstacle_set(k0, f, psi)?,
        VariationalMode::MultiObstacle { lower, upper } => multi_obstacle_set(k0, f, lower, upper)?,
    })
}

fn data_scale(mode: &VariationalMode, f: &Element) -> f64 {
    let mut s = sup(f.coords());
    match mode {
        VariationalMode::Obstacle(psi) => s = s.max(sup(psi.coords())),
        VariationalMode::MultiObstacle { lower, upper } => {
            for e in lower.iter().chain(upper) {
                s = s.max(sup(e.coords()));
            }
        }
        _ => {}
    }
    s
}

/// Checks the stored fields of a solved task.
pub fn check(task: &Task, fields: &BTreeMap<String, Vec<f64>>, cfg: &SolverConfig) -> Result<Checked> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let feas_tol = |scale: f64| FEASIBILITY_SLACK * cfg.tol_feasibility * (1.0 + scale);
    match task {
        Task::Variational { rel, k0, f, mode } => {
            let n = rel.domain().dimension();
            let u = field(fields, "minimizer", n)?;
            let set = full_set(k0, f, mode)?;
            let feas = (set.residual(u)?, feas_tol(data_scale(mode, f)));
            let objective = gradient_norm(rel, u, cfg)?;
            let fixed = set.fixed_mask();
            let certificate = match rel.kind() {
                RelationKind::LinearGraph(op) if set.is_box() && is_lp_family(rel.codomain().norm_spec()) => {
                    let r = kkt_residual(op.as_ref(), rel.codomain().norm_spec(), &set, u);
                    certificate("kkt", feas, (r, KKT_RTOL))
                }
                _ => {
                    let free: Vec<usize> = (0..n).filter(|i| !fixed[*i]).collect();
                    let dirs = probe_directions(&free, &mut rng, n);
                    let r = probe(
                        u,
                        &dirs,
                        sup(u).max(1.0),
                        |v| Ok(set.residual(v)? <= feas.1),
                        |v| gradient_norm(rel, v, cfg),
                    )?;
                    certificate("probe", feas, (r, PROBE_RTOL))
                }
            };
            Ok(Checked { certificate, objective })
        }
        Task::Rayleigh { rel, cone } => {
            let n = rel.domain().dimension();
            let u = field(fields, "minimizer", n)?;
            let norm = |v: &[f64]| rel.domain().norm(v);
            let feas = (cone.set().residual(u)?.max((norm(u) - 1.0).abs()), feas_tol(0.0));
            let quotient = |v: &[f64]| -> Result<f64> { Ok(gradient_norm(rel, v, cfg)? / norm(v)) };
            let fixed = cone.set().fixed_mask();
            let free: Vec<usize> = (0..n).filter(|i| !fixed[*i]).collect();
            let dirs = probe_directions(&free, &mut rng, n);
            let r = probe(u, &dirs, 0.1 * sup(u), |v| Ok(cone.set().residual(v)? <= feas.1), quotient)?;
            Ok(Checked {
                certificate: certificate("probe", feas, (r, PROBE_RTOL)),
                objective: quotient(u)?,
            })
        }
        Task::Lattice {
            order,
            psi1,
            psi2,
            maximum,
        } => {
            let n = psi1.dimension();
            let space = psi1.space();
            let top = field(fields, "maximum", n)?;
            let (a, b) = (psi1.coords(), psi2.coords());
            let tol = feas_tol(sup(a).max(sup(b)));
            let above = |v: &[f64]| -> Result<f64> { Ok(order_violation(*order, a, v)?.max(order_violation(*order, b, v)?)) };
            let below = |v: &[f64]| -> Result<f64> {
                let zero = vec![0.0; n];
                Ok(order_violation(*order, v, a)?
                    .max(order_violation(*order, v, b)?)
                    .max(order_violation(*order, &zero, v)?))
            };
            let (v, feasible): (&[f64], &dyn Fn(&[f64]) -> Result<f64>) = if *maximum {
                (top, &above)
            } else {
                (field(fields, "minimum", n)?, &below)
            };
            let feas = (feasible(v)?.max(above(top)?), tol);
            let target: Vec<f64> = if *maximum { vec![0.0; n] } else { top.to_vec() };
            let phi = |x: &[f64]| -> f64 {
                let d: Vec<f64> = x.iter().zip(&target).map(|(p, q)| p - q).collect();
                space.norm(&d)
            };
            let certificate = match order {
                OrderSpec::Componentwise => {
                    // the supremum and infimum of the coordinate order
                    let pick = |x: f64, y: f64, hi: bool| if hi { x.max(y) } else { x.min(y) };
                    let gap = |w: &[f64], hi: bool| {
                        w.iter()
                            .zip(a.iter().zip(b))
                            .fold(0.0_f64, |m, (w, (x, y))| m.max((w - pick(*x, *y, hi)).abs() / (1.0 + x.abs().max(y.abs()))))
                    };
                    let r = if *maximum { gap(v, true) } else { gap(v, false).max(gap(top, true)) };
                    certificate("exact", feas, (r, KKT_RTOL))
                }
                OrderSpec::Psd => {
                    let side = (n as f64).sqrt().round() as usize;
                    let dirs = symmetric_directions(side, &mut rng);
                    let scale = sup(v).max(sup(top)).max(f64::MIN_POSITIVE);
                    let mut r = probe(v, &dirs, scale, |x| Ok(feasible(x)? <= tol), |x| Ok(phi(x)))?;
                    if !*maximum {
                        let norm = |x: &[f64]| -> Result<f64> { Ok(space.norm(x)) };
                        r = r.max(probe(top, &dirs, scale, |x| Ok(above(x)? <= tol), norm)?);
                    }
                    certificate("probe", feas, (r, PROBE_RTOL))
                }
            };
            Ok(Checked {
                certificate,
                objective: phi(v),
            })
        }
        Task::Gradient { rel, u } => {
            let m = rel.codomain().dimension();
            let h = field(fields, "minimal_gradient", m)?;
            let tol = feas_tol(sup(u.coords()));
            let codomain = rel.codomain();
            let is_gradient = |g: &[f64], t: f64| -> Result<bool> { Ok(rel.check_gradient_pair(u, &element(codomain, g)?, t)?) };
            // the smallest tolerance of the ladder at which `h` is a gradient
            let ladder = std::iter::once(0.0).chain((0..=30).map(|k| 10f64.powi(k - 18)));
            let mut residual = f64::INFINITY;
            for t in ladder {
                if is_gradient(h, t)? {
                    residual = t;
                    break;
                }
            }
            let mut dirs = probe_directions(&(0..m).collect::<Vec<_>>(), &mut rng, m);
            if m <= 64 {
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            dirs.push(vec![(i, -1.0), (j, 1.0)]);
                        }
                    }
                }
            }
            let norm = |g: &[f64]| -> Result<f64> { Ok(codomain.norm(g)) };
            let r = if sup(h) == 0.0 {
                0.0
            } else {
                probe(h, &dirs, sup(h), |g| is_gradient(g, tol), norm)?
            };
            Ok(Checked {
                certificate: certificate("probe", (residual, tol), (r, PROBE_RTOL)),
                objective: codomain.norm(h),
            })
        }
        Task::Fredholm { op } => fredholm(op, fields, &mut rng),
    }
}

fn fredholm(op: &DenseMatrix, fields: &BTreeMap<String, Vec<f64>>, rng: &mut ChaCha8Rng) -> Result<Checked> {
    let n = op.ncols();
    let sv = field(fields, "singular_values", n)?;
    let top = sv.iter().fold(0.0_f64, |m, s| m.max(*s));
    if !(top > 0.0) {
        return Err(CliError::Rejected("no positive singular value".into()));
    }
    let cut = (RANK_RTOL * top * top).sqrt();
    let smallest = sv.iter().filter(|s| **s > cut).fold(f64::INFINITY, |m, s| m.min(*s));
    let constant = 1.0 / smallest;
    let k = sv.iter().filter(|s| **s <= cut).count();
    let kernel = field(fields, "kernel", k * n)?;
    let kernel: Vec<&[f64]> = kernel.chunks(n).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // kernel vectors: orthonormal and mapped to (numerical) zero
    let mut feas = 0.0_f64;
    for (i, a) in kernel.iter().enumerate() {
        feas = feas.max(norm(&op.apply_vec(a)) / top);
        for (j, b) in kernel.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            feas = feas.max((dot(a, b) - want).abs());
        }
    }
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for kv in &kernel {
            let c = dot(kv, &v);
            v.iter_mut().zip(kv.iter()).for_each(|(x, y)| *x -= c * y);
        }
        let fv = norm(&op.apply_vec(&v));
        if norm(&v) > 0.0 {
            worst = worst.max(norm(&v) / (constant * fv) - 1.0);
            worst = worst.max(fv / (top * norm(&v)) - 1.0);
        }
    }
    Ok(Checked {
        certificate: certificate("sampled", (feas, 1e-6), (worst.max(0.0), 1e-9)),
        objective: constant,
    })
}
