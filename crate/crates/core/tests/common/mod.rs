//! Reference solvers and fixtures shared by the integration tests. Nothing
//! here calls into the crate's numerics.

#![allow(dead_code)]

use std::sync::Arc;

use gradspace::grid::GridDomain;
use gradspace::{Element, NormSpec, SpaceDescriptor, SpaceKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|i, j| a[*i][k].abs().partial_cmp(&a[*j][k].abs()).unwrap())
            .unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Solves a symmetric positive definite system with half-bandwidth `bw`,
/// stored as `band[i][k] = A[i][i + k]` for `k = 0..=bw`, by banded Cholesky.
pub fn banded_spd_solve(band: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let bw = band[0].len() - 1;
    // l[i][k] = L[i][i - k]
    let mut l = vec![vec![0.0; bw + 1]; n];
    for i in 0..n {
        for k in (0..=bw.min(i)).rev() {
            let j = i - k;
            let mut s = band[j][k];
            for m in 1..=bw {
                if k + m > bw || m > j {
                    break;
                }
                s -= l[i][k + m] * l[j][m];
            }
            if k == 0 {
                l[i][0] = s.sqrt();
            } else {
                l[i][k] = s / l[j][0];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 1..=bw.min(i) {
            s -= l[i][k] * y[i - k];
        }
        y[i] = s / l[i][0];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in 1..=bw {
            if i + k >= n {
                break;
            }
            s -= l[i + k][k] * x[i + k];
        }
        x[i] = s / l[i][0];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Minimizer of `Σ_c Σ_a (u(c + e_a) − u(c))²` over the interior nodes,
/// where `c` runs over nodes with a forward neighbour on every axis.
pub fn grid_harmonic_oracle(dom: &GridDomain) -> Vec<f64> {
    let n = dom.node_count();
    let dims = dom.dims().to_vec();
    let d = dims.len();
    let values = dom.boundary_values().unwrap().to_vec();
    let interior = dom.interior_mask().to_vec();
    let unknowns: Vec<usize> = (0..n).filter(|i| interior[*i]).collect();
    let mut index = vec![usize::MAX; n];
    for (k, i) in unknowns.iter().enumerate() {
        index[*i] = k;
    }
    let m = unknowns.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    let stride = |axis: usize| dims[..axis].iter().product::<usize>();
    for c in 0..n {
        let idx: Vec<usize> = (0..d).map(|ax| (c / stride(ax)) % dims[ax]).collect();
        if (0..d).any(|ax| idx[ax] + 1 >= dims[ax]) {
            continue;
        }
        for ax in 0..d {
            let nb = c + stride(ax);
            // (u_nb − u_c)² contributes to the normal equations
            for (x, sx) in [(nb, 1.0), (c, -1.0)] {
                if !interior[x] {
                    continue;
                }
                for (y, sy) in [(nb, 1.0), (c, -1.0)] {
                    if interior[y] {
                        a[index[x]][index[y]] += sx * sy;
                    } else {
                        b[index[x]] -= sx * sy * values[y];
                    }
                }
            }
        }
    }
    let sol = dense_solve(a, b);
    let mut u = values;
    for (k, i) in unknowns.iter().enumerate() {
        u[*i] = sol[k];
    }
    u
}

pub fn lp_space(kind: SpaceKind, p: f64, n: usize) -> Arc<SpaceDescriptor> {
    SpaceDescriptor::new(kind, n, NormSpec::lp(p, n)).unwrap().shared()
}

pub fn matrix_space(p: f64, n: usize) -> Arc<SpaceDescriptor> {
    SpaceDescriptor::new(SpaceKind::SymmetricMatrix, n * n, NormSpec::Schatten { p })
        .unwrap()
        .shared()
}

pub fn element(space: &Arc<SpaceDescriptor>, v: Vec<f64>) -> Element {
    Element::new(Arc::clone(space), v).unwrap()
}

/// Row-major `n × n` matrix with standard-normal-ish entries in (−1, 1).
pub fn random_square(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let a = random_square(rng, n);
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
        }
    }
    s
}

/// `B Bᵀ` for a random `B`, so positive semidefinite by construction.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Vec<f64> {
    let b: Vec<f64> = (0..n * rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = (0..rank).map(|k| b[i * rank + k] * b[j * rank + k]).sum();
        }
    }
    s
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

pub fn rows(n: usize, flat: &[f64]) -> Vec<Vec<f64>> {
    flat.chunks(n).map(|r| r.to_vec()).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `Σ |λ_i|^p` over the eigenvalues of a symmetric matrix.
pub fn trace_power(n: usize, a: &[f64], p: f64) -> f64 {
    jacobi_eigenvalues(rows(n, a)).iter().map(|l| l.abs().powf(p)).sum()
}

/// Brute-force least `(Σ μ_i h_i^p)^{1/p}` over Hajłasz gradients of `u`
/// on at most three points: the first `n − 1` entries run over a grid of
/// step `step`, the last is the least admissible value.
pub fn hajlasz_brute_force(dist: &[Vec<f64>], mu: &[f64], u: &[f64], p: f64, step: f64) -> f64 {
    let n = u.len();
    let need = |i: usize, j: usize| if i == j { 0.0 } else { (u[i] - u[j]).abs() / dist[i][j] };
    let top = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| need(i, j))
        .fold(0.0, f64::max);
    let steps = (top / step).ceil() as usize + 1;
    let last = n - 1;
    let mut best = f64::INFINITY;
    let mut h = vec![0.0; n];
    let total = steps.pow(last as u32);
    for code in 0..total {
        let mut c = code;
        for hi in h.iter_mut().take(last) {
            *hi = (c % steps) as f64 * step;
            c /= steps;
        }
        let ok = (0..last).all(|i| (0..last).all(|j| i >= j || h[i] + h[j] >= need(i, j) - 1e-15));
        if !ok {
            continue;
        }
        h[last] = (0..last).map(|i| need(i, last) - h[i]).fold(0.0, f64::max);
        let v: f64 = h.iter().zip(mu).map(|(x, m)| m * x.powf(p)).sum::<f64>().powf(1.0 / p);
        best = best.min(v);
    }
    best
}
