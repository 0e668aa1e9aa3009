//! Log-barrier Newton method for the Frobenius-nearest point of
//! `{W : 0 ⪯ W, W ⪯ S_k for every k}` when every `S_k ≻ 0`.
//!
//! Used where alternating projections stall: at corners where several
//! cones are active their boundaries meet tangentially and the projections
//! only converge sublinearly.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::symmetric::SymmetricMatrix;

const MU_SHRINK: f64 = 0.1;
/// Final barrier weight relative to the squared problem scale.
const MU_FLOOR: f64 = 1e-14;
const NEWTON_STEPS: usize = 100;

/// Index pairs `(i, j)`, `i ≤ j`, of an orthonormal basis of the symmetric
/// `r × r` matrices.
fn basis(r: usize) -> Vec<(usize, usize)> {
    (0..r).flat_map(|i| (i..r).map(move |j| (i, j))).collect()
}

fn from_coords(r: usize, pairs: &[(usize, usize)], x: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; r * r];
    for (&(i, j), v) in pairs.iter().zip(x) {
        if i == j {
            m[i * r + i] = *v;
        } else {
            m[i * r + j] = v / std::f64::consts::SQRT_2;
            m[j * r + i] = v / std::f64::consts::SQRT_2;
        }
    }
    m
}

fn to_coords(r: usize, pairs: &[(usize, usize)], m: &[f64]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(i, j)| {
            if i == j {
                m[i * r + i]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (m[i * r + j] + m[j * r + i])
            }
        })
        .collect()
}

fn matmul(r: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; r * r];
    for i in 0..r {
        for k in 0..r {
            let aik = a[i * r + k];
            for j in 0..r {
                out[i * r + j] += aik * b[k * r + j];
            }
        }
    }
    out
}

/// The slack matrices `W` and `S_k − W`, or `None` if one is not positive
/// definite.
fn slacks(w: &SymmetricMatrix, bounds: &[SymmetricMatrix]) -> Option<Vec<SymmetricMatrix>> {
    let mut out = vec![w.clone()];
    out.extend(bounds.iter().map(|s| s.sub(w)));
    out.iter().all(|c| c.min_eigenvalue() > 0.0).then_some(out)
}

fn barrier_value(w: &SymmetricMatrix, target: &SymmetricMatrix, slack: &[SymmetricMatrix], mu: f64) -> f64 {
    let logdet: f64 = slack.iter().map(|c| c.eigh().values.iter().map(|l| l.ln()).sum::<f64>()).sum();
    0.5 * w.sub(target).inner(&w.sub(target)) - mu * logdet
}

fn cholesky_solve(d: usize, mut a: Vec<f64>, b: &[f64]) -> Result<Vec<f64>> {
    for j in 0..d {
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= a[j * d + k] * a[j * d + k];
        }
        if !(s > 0.0) {
            return Err(Error::Indefinite);
        }
        let l = s.sqrt();
        a[j * d + j] = l;
        for i in j + 1..d {
            let mut t = a[i * d + j];
            for k in 0..j {
                t -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = t / l;
        }
    }
    let mut y = b.to_vec();
    for i in 0..d {
        for k in 0..i {
            y[i] -= a[i * d + k] * y[k];
        }
        y[i] /= a[i * d + i];
    }
    for i in (0..d).rev() {
        for k in i + 1..d {
            y[i] -= a[k * d + i] * y[k];
        }
        y[i] /= a[i * d + i];
    }
    Ok(y)
}

/// Nearest point to `target` in `{W : 0 ⪯ W ⪯ S_k}` along the central path
/// of `½‖W − T‖² − μ Σ log det(slack)`.
pub(crate) fn nearest_below(
    target: &SymmetricMatrix,
    bounds: &[SymmetricMatrix],
    cfg: &SolverConfig,
) -> Result<SymmetricMatrix> {
    let r = target.n();
    let pairs = basis(r);
    let d = pairs.len();
    let floor = bounds
        .iter()
        .map(|s| s.min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    if !(floor > 0.0) {
        return Err(Error::Precondition("barrier bounds must be positive definite".into()));
    }
    let scale = bounds
        .iter()
        .map(|s| s.frobenius_norm())
        .fold(target.frobenius_norm(), f64::max);
    let mut w = SymmetricMatrix::identity(r).scale(0.5 * floor);
    let mut mu = 0.1 * scale * scale;
    let mu_end = MU_FLOOR * scale * scale;
    let mut steps = 0;
    loop {
        for _ in 0..NEWTON_STEPS {
            let slack = slacks(&w, bounds).ok_or(Error::Indefinite)?;
            let inv: Vec<Vec<f64>> = slack.iter().map(|c| c.map_eigenvalues(|l| 1.0 / l).into_vec()).collect();
            // ∇ = (W − T) − μ(W⁻¹ − Σ (S_k − W)⁻¹)
            let mut grad = w.sub(target).into_vec();
            for (k, ci) in inv.iter().enumerate() {
                let sign = if k == 0 { -mu } else { mu };
                for (g, v) in grad.iter_mut().zip(ci) {
                    *g += sign * v;
                }
            }
            let g = to_coords(r, &pairs, &grad);
            let mut hess = vec![0.0; d * d];
            for (col, _) in pairs.iter().enumerate() {
                let mut e = vec![0.0; d];
                e[col] = 1.0;
                let dir = from_coords(r, &pairs, &e);
                let mut h = dir.clone();
                for ci in &inv {
                    let s = matmul(r, ci, &matmul(r, &dir, ci));
                    for (hv, sv) in h.iter_mut().zip(&s) {
                        *hv += mu * sv;
                    }
                }
                for (row, v) in to_coords(r, &pairs, &h).into_iter().enumerate() {
                    hess[row * d + col] = v;
                }
            }
            let step = cholesky_solve(d, hess, &g.iter().map(|v| -v).collect::<Vec<_>>())?;
            let decrement: f64 = -g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            steps += 1;
            if decrement <= 1e-3 * mu || steps >= cfg.max_iterations {
                break;
            }
            let dir = SymmetricMatrix::symmetrize(r, &from_coords(r, &pairs, &step));
            let f0 = barrier_value(&w, target, &slack, mu);
            let mut t = 1.0;
            loop {
                let trial = w.add(&dir.scale(t));
                if let Some(sl) = slacks(&trial, bounds) {
                    if barrier_value(&trial, target, &sl, mu) <= f0 - 0.25 * t * decrement {
                        w = trial;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    break;
                }
            }
            if t < 1e-12 {
                break;
            }
        }
        if steps >= cfg.max_iterations {
            return Err(Error::NotConverged {
                iterations: steps,
                residual: mu,
                best: Some(w.into_vec()),
            });
        }
        if mu <= mu_end {
            return Ok(w);
        }
        mu = (mu * MU_SHRINK).max(mu_end);
    }
}
