//! Poincaré constants of linear maps with closed range.

use crate::engine::eigen::jacobi_eigh;
use crate::engine::linop::DenseMatrix;
use crate::error::{Error, Result};
use crate::matrix::symmetric::SymmetricMatrix;

/// Eigenvalues of `FᵀF` below this fraction of the largest count as zero.
/// Squaring leaves kernel singular values near `√ε · σ_max`, so the cut
/// is placed on the eigenvalues.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FredholmBound {
    /// `C = 1 / σ_min₊`: `‖v‖ ≤ C ‖Fv‖` on the orthogonal complement of
    /// the kernel.
    pub constant: f64,
    /// Orthonormal kernel basis.
    pub kernel: Vec<Vec<f64>>,
    /// Singular values in ascending order.
    pub singular_values: Vec<f64>,
}

impl FredholmBound {
    /// Removes the kernel component of `v`.
    pub fn project_to_complement(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for k in &self.kernel {
            let c: f64 = k.iter().zip(v).map(|(a, b)| a * b).sum();
            for (o, ki) in out.iter_mut().zip(k) {
                *o -= c * ki;
            }
        }
        out
    }
}

/// Kernel and complement constant of `F` from the eigen-decomposition of
/// `FᵀF`.
pub fn fredholm_poincare_constant(f: &DenseMatrix) -> Result<FredholmBound> {
    let n = f.cols();
    let gram = SymmetricMatrix::symmetrize(n, f.gram().data());
    let eig = jacobi_eigh(&gram);
    let singular_values: Vec<f64> = eig.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    let top = eig.values.last().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::InvalidInput("the zero map has no complement bound".into()));
    }
    let cut = RANK_RTOL * top;
    let mut kernel = Vec::new();
    let mut smallest = f64::INFINITY;
    for (k, s) in singular_values.iter().enumerate() {
        if eig.values[k] <= cut {
            kernel.push(eig.vectors.column(k));
        } else {
            smallest = smallest.min(*s);
        }
    }
    Ok(FredholmBound {
        constant: 1.0 / smallest,
        kernel,
        singular_values,
    })
}
