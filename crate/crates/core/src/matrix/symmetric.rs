use crate::engine::eigen::{jacobi_eigh, SymmetricEigen};
use crate::engine::linop::DenseMatrix;
use crate::error::{check_finite, check_len, Error, Result};

/// Relative tolerance for the symmetry check at construction.
const SYMMETRY_TOL: f64 = 1e-12;

/// Relative eigenvalue slack used when deciding semidefiniteness:
/// `λ_min ≥ −PSD_TOL · (1 + ‖A‖_F)`.
pub const PSD_TOL: f64 = 1e-9;

/// A real symmetric `n × n` matrix stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Validates shape, finiteness and symmetry (to `1e-12` relative), then
    /// stores the exactly symmetrized matrix.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix order must be positive".into()));
        }
        check_len("symmetric matrix entries", n * n, data.len())?;
        check_finite("symmetric matrix", &data)?;
        let scale = data.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self::symmetrize(n, &data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must form a square".into()));
        }
        Self::new(n, rows.concat())
    }

    /// `(A + Aᵀ)/2` of an arbitrary square matrix given row-major.
    pub fn symmetrize(n: usize, data: &[f64]) -> Self {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            out[i * n + i] = data[i * n + i];
            for j in (i + 1)..n {
                let v = 0.5 * (data[i * n + j] + data[j * n + i]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Self { n, data: out }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// `Q diag(values) Qᵀ` with `Q` given column-wise.
    pub fn from_eigen(values: &[f64], vectors: &DenseMatrix) -> Self {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (k, lam) in values.iter().enumerate() {
            if *lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let qi = vectors.get(i, k) * lam;
                if qi == 0.0 {
                    continue;
                }
                for j in i..n {
                    data[i * n + j] += qi * vectors.get(j, k);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "matrix order mismatch");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Frobenius inner product `tr(AᵀB)`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn eigh(&self) -> SymmetricEigen {
        jacobi_eigh(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().values[0]
    }

    /// Spectral norm `max |λ_i|`.
    pub fn operator_norm(&self) -> f64 {
        let e = self.eigh();
        e.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Applies `f` to every eigenvalue (functional calculus).
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eigh();
        let values: Vec<f64> = e.values.iter().map(|v| f(*v)).collect();
        Self::from_eigen(&values, &e.vectors)
    }

    /// `A ⪰ 0` up to the eigenvalue slack [`PSD_TOL`].
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL * (1.0 + self.frobenius_norm())
    }

    /// `Qᵀ A Q` for a square `Q`.
    pub fn conjugate(&self, q: &DenseMatrix) -> Self {
        let a = self.to_dense();
        let qt = q.transpose();
        let prod = qt
            .matmul(&a)
            .and_then(|m| m.matmul(q))
            .expect("conjugation by a matrix of matching order");
        Self::symmetrize(self.n, prod.data())
    }
}
