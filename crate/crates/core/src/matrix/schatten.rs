//! Schatten norms of square matrices stored row-major.

use crate::engine::eigen::jacobi_eigh;
use crate::engine::linop::DenseMatrix;
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Side length of a square matrix with `len` entries.
pub(crate) fn side(len: usize) -> Option<usize> {
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len && n > 0).then_some(n)
}

fn is_exactly_symmetric(n: usize, data: &[f64]) -> bool {
    (0..n).all(|i| (i + 1..n).all(|j| data[i * n + j] == data[j * n + i]))
}

/// Singular values in ascending order. Symmetric input takes absolute
/// eigenvalues directly; otherwise they come from the eigenvalues of `XᵀX`.
pub fn singular_values(n: usize, data: &[f64]) -> Vec<f64> {
    if is_exactly_symmetric(n, data) {
        let e = jacobi_eigh(&SymmetricMatrix::symmetrize(n, data));
        let mut s: Vec<f64> = e.values.iter().map(|v| v.abs()).collect();
        s.sort_by(f64::total_cmp);
        return s;
    }
    let x = DenseMatrix::from_fn(n, n, |i, j| data[i * n + j]);
    let gram = SymmetricMatrix::symmetrize(n, x.gram().data());
    jacobi_eigh(&gram)
        .values
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect()
}

/// `Σ σ_i^p`.
pub fn schatten_power(n: usize, data: &[f64], p: f64) -> f64 {
    singular_values(n, data).iter().map(|s| s.powf(p)).sum()
}

/// Gradient of `X ↦ Σ σ_i(X)^p` in the Frobenius inner product.
pub fn schatten_power_gradient(n: usize, data: &[f64], p: f64) -> Vec<f64> {
    if is_exactly_symmetric(n, data) {
        let a = SymmetricMatrix::symmetrize(n, data);
        return a
            .map_eigenvalues(|l| p * l.signum() * l.abs().powf(p - 1.0))
            .into_vec();
    }
    // X = U Σ Vᵀ: gradient p U Σ^{p-1} Vᵀ = p X V Σ^{p-2} Vᵀ
    let x = DenseMatrix::from_fn(n, n, |i, j| data[i * n + j]);
    let gram = SymmetricMatrix::symmetrize(n, x.gram().data());
    let e = jacobi_eigh(&gram);
    let cutoff = 1e-300_f64.max(f64::EPSILON * e.values.last().copied().unwrap_or(0.0).max(0.0));
    let factors: Vec<f64> = e
        .values
        .iter()
        .map(|l| {
            if *l <= cutoff {
                0.0
            } else {
                p * l.sqrt().powf(p - 2.0)
            }
        })
        .collect();
    let middle = SymmetricMatrix::from_eigen(&factors, &e.vectors).to_dense();
    x.matmul(&middle).expect("square factors").into_data()
}

/// `‖A‖_p = (Σ |λ_i(A)|^p)^{1/p}` for symmetric `A`.
pub fn schatten_norm(a: &SymmetricMatrix, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("Schatten exponent must satisfy 1 < p < ∞, got {p}")));
    }
    let s: f64 = a.eigh().values.iter().map(|l| l.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}
