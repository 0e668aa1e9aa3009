//! Norm-minimal bounds in the PSD order and the matrix gradient relations.

use std::sync::Arc;

use crate::config::SolverConfig;
use crate::engine::dykstra::{dykstra, DykstraOptions, ProjectionOracle};
use crate::engine::linop::{DenseMatrix, LinearOperator};
use crate::error::{check_len, Error, Result};
use crate::matrix::barrier;
use crate::matrix::psd::{psd_leq, require_psd, PsdShift};
use crate::matrix::symmetric::{SymmetricMatrix, PSD_TOL};
use crate::relation::GradientRelation;
use crate::space::{NormSpec, SpaceDescriptor, SpaceKind};

/// Sweep cap for the matrix lattice operations.
pub const MATRIX_DYKSTRA_SWEEPS: usize = 10_000;
/// Frobenius increment at which the matrix lattice operations stop.
pub const MATRIX_DYKSTRA_STEP: f64 = 1e-10;

fn dykstra_options(cfg: &SolverConfig) -> DykstraOptions {
    DykstraOptions {
        max_sweeps: cfg.max_iterations.min(MATRIX_DYKSTRA_SWEEPS),
        step_tol: MATRIX_DYKSTRA_STEP,
    }
}

/// Frobenius-least `X` with `X ⪰ ψ₁` and `X ⪰ ψ₂`: Dykstra's projections of
/// the zero matrix onto the two shifted cones.
pub fn matrix_max(psi1: &SymmetricMatrix, psi2: &SymmetricMatrix, cfg: &SolverConfig) -> Result<SymmetricMatrix> {
    check_len("matrix order", psi1.n(), psi2.n())?;
    let n = psi1.n();
    let a = PsdShift::above(psi1.clone());
    let b = PsdShift::above(psi2.clone());
    let oracles: [&dyn ProjectionOracle; 2] = [&a, &b];
    let out = dykstra(&oracles, &vec![0.0; n * n], dykstra_options(cfg))?;
    let x = SymmetricMatrix::symmetrize(n, &out.point);
    // ψ₁ + ψ₂ + ‖ψ₁‖·I is a common upper bound, so the minimal one is no larger.
    let hint = psi1
        .add(psi2)
        .add(&SymmetricMatrix::identity(n).scale(psi1.operator_norm() + psi2.operator_norm()));
    debug_assert!(x.frobenius_norm() <= hint.frobenius_norm() * (1.0 + 1e-8) + 1e-8);
    Ok(x)
}

/// Eigenvalues at or below this fraction of the largest count as zero when
/// locating the kernel of a lower-set bound.
pub const KERNEL_RTOL: f64 = 1e-10;

/// Frobenius-nearest point to `matrix_max(ψ₁, ψ₂)` in
/// `{V : 0 ⪯ V ⪯ ψ₁, V ⪯ ψ₂}`.
///
/// Every such `V` vanishes on `ker ψ₁ + ker ψ₂`, so the projection runs on
/// the orthogonal complement `R`, where `V ⪯ ψ` becomes
/// `W ⪯ (Uᵀψ⁺U)⁻¹` for an orthonormal basis `U` of `R`. On `R` the set has
/// interior and the alternating projections converge linearly.
pub fn matrix_min(psi1: &SymmetricMatrix, psi2: &SymmetricMatrix, cfg: &SolverConfig) -> Result<SymmetricMatrix> {
    check_len("matrix order", psi1.n(), psi2.n())?;
    require_psd("ψ₁", psi1)?;
    require_psd("ψ₂", psi2)?;
    let n = psi1.n();
    let top = matrix_max(psi1, psi2, cfg)?;
    let k1 = kernel_basis(psi1);
    let k2 = kernel_basis(psi2);
    if k1.is_empty() && k2.is_empty() {
        return below_both(&top, psi1.clone(), psi2.clone(), cfg);
    }
    let u = common_range(n, k1.iter().chain(&k2));
    let r = u.cols();
    if r == 0 {
        return Ok(SymmetricMatrix::zeros(n));
    }
    let s1 = compressed_bound(psi1, &u);
    let s2 = compressed_bound(psi2, &u);
    let w = below_both(&compress(&top, &u), s1, s2, cfg)?;
    let w = DenseMatrix::new(r, r, w.into_vec())?;
    let v = u.matmul(&w)?.matmul(&u.transpose())?;
    Ok(SymmetricMatrix::symmetrize(n, v.data()))
}

/// Nearest point to `start` in `{W : 0 ⪯ W ⪯ s1, W ⪯ s2}`. Dykstra first;
/// where it stalls the barrier method finishes.
fn below_both(
    start: &SymmetricMatrix,
    s1: SymmetricMatrix,
    s2: SymmetricMatrix,
    cfg: &SolverConfig,
) -> Result<SymmetricMatrix> {
    let n = start.n();
    let pos = PsdShift::above(SymmetricMatrix::zeros(n));
    let a = PsdShift::below(s1.clone());
    let b = PsdShift::below(s2.clone());
    let oracles: [&dyn ProjectionOracle; 3] = [&pos, &a, &b];
    match dykstra(&oracles, start.as_slice(), dykstra_options(cfg)) {
        Ok(out) => Ok(SymmetricMatrix::symmetrize(n, &out.point)),
        Err(Error::NotConverged { .. }) => barrier::nearest_below(start, &[s1, s2], cfg),
        Err(e) => Err(e),
    }
}

fn kernel_cut(m: &SymmetricMatrix) -> (crate::engine::eigen::SymmetricEigen, f64) {
    let eig = m.eigh();
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    (eig, KERNEL_RTOL * top)
}

/// Orthonormal eigenvectors of a PSD matrix for its (numerically) zero
/// eigenvalues.
fn kernel_basis(m: &SymmetricMatrix) -> Vec<Vec<f64>> {
    let (eig, cut) = kernel_cut(m);
    (0..m.n())
        .filter(|k| eig.values[*k] <= cut)
        .map(|k| eig.vectors.column(k))
        .collect()
}

/// Orthonormal basis, as columns, of the complement of the span of `kernels`.
fn common_range<'a>(n: usize, kernels: impl Iterator<Item = &'a Vec<f64>>) -> DenseMatrix {
    let mut proj = vec![0.0; n * n];
    for k in kernels {
        for i in 0..n {
            for j in 0..n {
                proj[i * n + j] += k[i] * k[j];
            }
        }
    }
    let eig = SymmetricMatrix::symmetrize(n, &proj).eigh();
    let keep: Vec<usize> = (0..n).filter(|k| eig.values[*k] <= KERNEL_RTOL).collect();
    DenseMatrix::from_fn(n, keep.len(), |i, c| eig.vectors.get(i, keep[c]))
}

/// `UᵀMU`.
fn compress(m: &SymmetricMatrix, u: &DenseMatrix) -> SymmetricMatrix {
    let prod = u
        .transpose()
        .matmul(&m.to_dense())
        .and_then(|x| x.matmul(u))
        .expect("basis rows match the matrix order");
    SymmetricMatrix::symmetrize(u.cols(), prod.data())
}

/// `(Uᵀψ⁺U)⁻¹`: the largest `W` on the range of `U` with `UWUᵀ ⪯ ψ`.
fn compressed_bound(psi: &SymmetricMatrix, u: &DenseMatrix) -> SymmetricMatrix {
    let (_, cut) = kernel_cut(psi);
    let pinv = psi.map_eigenvalues(|l| if l > cut { 1.0 / l } else { 0.0 });
    compress(&pinv, u).map_eigenvalues(|l| 1.0 / l)
}

/// Checks that a convergent sequence above `bound` has its limit above
/// `bound`. `approach_tol` caps `‖limit − A_last‖_F`.
pub fn order_limit_check(
    seq: &[SymmetricMatrix],
    bound: &SymmetricMatrix,
    limit: &SymmetricMatrix,
    approach_tol: f64,
) -> Result<bool> {
    let last = seq
        .last()
        .ok_or_else(|| Error::InvalidInput("sequence must not be empty".into()))?;
    for (i, a) in seq.iter().enumerate() {
        if !psd_leq(bound, a, PSD_TOL)? {
            return Err(Error::Precondition(format!("sequence element {i} is not above the bound")));
        }
    }
    check_len("matrix order", bound.n(), limit.n())?;
    let gap = limit.sub(last).frobenius_norm();
    if gap > approach_tol {
        return Err(Error::Precondition(format!(
            "last element is {gap:.3e} from the limit, above {approach_tol:.3e}"
        )));
    }
    psd_leq(bound, limit, PSD_TOL)
}

fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn symmetric_part(n: usize, x: &mut [f64]) {
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (x[i * n + j] + x[j * n + i]);
            x[i * n + j] = s;
            x[j * n + i] = s;
        }
    }
}

/// `A ↦ Aδ − δA` from symmetric to square matrices. The transpose lands
/// back in the symmetric matrices.
#[derive(Debug, Clone)]
pub struct Commutator {
    delta: SymmetricMatrix,
}

impl LinearOperator for Commutator {
    fn nrows(&self) -> usize {
        self.delta.n() * self.delta.n()
    }

    fn ncols(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.delta.n();
        let d = self.delta.as_slice();
        let ad = mat_mul(n, x, d);
        let da = mat_mul(n, d, x);
        for (yi, (a, b)) in y.iter_mut().zip(ad.iter().zip(&da)) {
            *yi = a - b;
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        let n = self.delta.n();
        let d = self.delta.as_slice();
        let yd = mat_mul(n, y, d);
        let dy = mat_mul(n, d, y);
        for (xi, (a, b)) in x.iter_mut().zip(yd.iter().zip(&dy)) {
            *xi = a - b;
        }
        symmetric_part(n, x);
    }
}

/// `A ↦ A − M A / (2‖M‖_op)`.
#[derive(Debug, Clone)]
pub struct BoundedBelow {
    scaled: Vec<f64>,
    n: usize,
}

impl LinearOperator for BoundedBelow {
    fn nrows(&self) -> usize {
        self.n * self.n
    }

    fn ncols(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let ma = mat_mul(self.n, &self.scaled, x);
        for (yi, (a, b)) in y.iter_mut().zip(x.iter().zip(&ma)) {
            *yi = a - b;
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        // M is symmetric, so (MA)ᵀ-adjoint is Y ↦ MY
        let my = mat_mul(self.n, &self.scaled, y);
        for (xi, (a, b)) in x.iter_mut().zip(y.iter().zip(&my)) {
            *xi = a - b;
        }
        symmetric_part(self.n, x);
    }
}

fn matrix_spaces(n: usize, p: f64) -> Result<(Arc<SpaceDescriptor>, Arc<SpaceDescriptor>)> {
    if n == 0 {
        return Err(Error::InvalidInput("matrix order must be positive".into()));
    }
    Ok((
        SpaceDescriptor::new(SpaceKind::SymmetricMatrix, n * n, NormSpec::Schatten { p })?.shared(),
        SpaceDescriptor::new(SpaceKind::SquareMatrix, n * n, NormSpec::Schatten { p })?.shared(),
    ))
}

/// The graph of `A ↦ [A, δ]` with Schatten-`p` norms on both sides.
pub fn commutator_relation(delta: &SymmetricMatrix, p: f64) -> Result<GradientRelation> {
    let (v, w) = matrix_spaces(delta.n(), p)?;
    GradientRelation::linear(v, w, Arc::new(Commutator { delta: delta.clone() }))
}

/// The graph of `A ↦ A − MA/(2‖M‖_op)`, which satisfies
/// `‖T(A)‖_p ≥ ½‖A‖_p` for every `A`.
pub fn bounded_below_relation(m: &SymmetricMatrix, p: f64) -> Result<GradientRelation> {
    let op_norm = m.operator_norm();
    if op_norm == 0.0 {
        return Err(Error::InvalidInput("the multiplier must be nonzero".into()));
    }
    let (v, w) = matrix_spaces(m.n(), p)?;
    let scaled = m.scale(0.5 / op_norm).into_vec();
    GradientRelation::linear(v, w, Arc::new(BoundedBelow { scaled, n: m.n() }))
}
