use crate::config::SolverConfig;
use crate::engine::vecops::{axpy, dot, norm2};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖b − A x‖`.
    pub residual: f64,
}

/// Conjugate gradients for a symmetric positive (semi)definite operator,
/// started from zero. Stops once `‖A x − b‖ ≤ tol_objective · ‖b‖`.
pub fn cg_solve<F>(apply: F, b: &[f64], cfg: &SolverConfig) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    cg_solve_from(apply, b, None, cfg.tol_objective, cfg.max_iterations)
}

pub fn cg_solve_from<F>(
    apply: F,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iterations: usize,
) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if b_norm == 0.0 && x0.is_none() {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }

    let mut ap = vec![0.0; n];
    apply(&x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = tol * b_norm.max(f64::MIN_POSITIVE);

    for it in 0..max_iterations {
        if rr.sqrt() <= target {
            return Ok(CgOutcome {
                x,
                iterations: it,
                residual: rr.sqrt(),
            });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Indefinite);
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }

    // Recompute the true residual before giving up.
    apply(&x, &mut ap);
    let res = norm2(&b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect::<Vec<_>>());
    if res <= target {
        return Ok(CgOutcome {
            x,
            iterations: max_iterations,
            residual: res,
        });
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual: res,
        best: Some(x),
    })
}
