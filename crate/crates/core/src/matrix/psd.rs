//! Projections onto shifted PSD cones and the PSD order.

use crate::engine::dykstra::ProjectionOracle;
use crate::error::{check_len, Error, Result};
use crate::matrix::symmetric::{SymmetricMatrix, PSD_TOL};

/// `floor + clip₊(A − floor)`: the Frobenius-nearest matrix `X ⪰ floor`.
pub fn psd_project(a: &SymmetricMatrix, floor: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    check_len("matrix order", a.n(), floor.n())?;
    Ok(floor.add(&a.sub(floor).map_eigenvalues(|l| l.max(0.0))))
}

/// `B − A ⪰ 0` up to the eigenvalue slack `tol · (1 + ‖B − A‖_F)`.
pub fn psd_leq(a: &SymmetricMatrix, b: &SymmetricMatrix, tol: f64) -> Result<bool> {
    check_len("matrix order", a.n(), b.n())?;
    let d = b.sub(a);
    Ok(d.min_eigenvalue() >= -tol * (1.0 + d.frobenius_norm()))
}

/// Default PSD comparison with slack [`PSD_TOL`].
pub fn psd_leq_default(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<bool> {
    psd_leq(a, b, PSD_TOL)
}

/// `{X : X ⪰ bound}` or `{X : X ⪯ bound}` on row-major `n × n` vectors.
/// Non-symmetric input is first replaced by its symmetric part, which is
/// its Frobenius projection onto the symmetric matrices.
#[derive(Debug, Clone)]
pub struct PsdShift {
    bound: SymmetricMatrix,
    above: bool,
}

impl PsdShift {
    /// `X ⪰ bound`.
    pub fn above(bound: SymmetricMatrix) -> Self {
        Self { bound, above: true }
    }

    /// `X ⪯ bound`.
    pub fn below(bound: SymmetricMatrix) -> Self {
        Self { bound, above: false }
    }

    pub fn bound(&self) -> &SymmetricMatrix {
        &self.bound
    }

    pub fn is_lower_bound(&self) -> bool {
        self.above
    }

    /// How far `x` is from the set in the order sense: the most negative
    /// eigenvalue of the relevant difference, as a nonnegative number.
    pub fn order_violation(&self, x: &[f64]) -> f64 {
        let n = self.bound.n();
        let m = SymmetricMatrix::symmetrize(n, x);
        let d = if self.above {
            m.sub(&self.bound)
        } else {
            self.bound.sub(&m)
        };
        (-d.min_eigenvalue()).max(0.0)
    }
}

impl ProjectionOracle for PsdShift {
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let n = self.bound.n();
        let m = SymmetricMatrix::symmetrize(n, x);
        let out = if self.above {
            self.bound.add(&m.sub(&self.bound).map_eigenvalues(|l| l.max(0.0)))
        } else {
            self.bound.sub(&self.bound.sub(&m).map_eigenvalues(|l| l.max(0.0)))
        };
        out.into_vec()
    }
}

pub(crate) fn require_psd(what: &str, a: &SymmetricMatrix) -> Result<()> {
    if !a.is_psd() {
        return Err(Error::Precondition(format!(
            "{what} must be positive semidefinite (smallest eigenvalue {:.3e})",
            a.min_eigenvalue()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_examples() {
        let a = SymmetricMatrix::diagonal(&[-1.0, 2.0]);
        let z = SymmetricMatrix::zeros(2);
        let p = psd_project(&a, &z).unwrap();
        assert!(p.sub(&SymmetricMatrix::diagonal(&[0.0, 2.0])).frobenius_norm() < 1e-15);
        let q = psd_project(&p, &z).unwrap();
        assert!(q.sub(&p).frobenius_norm() < 1e-15);
        let b = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(psd_project(&b, &z).unwrap().sub(&b).frobenius_norm() < 1e-14);
    }

    #[test]
    fn projection_beats_random_feasible_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let rand_sym = |rng: &mut rand_chacha::ChaCha8Rng| {
            let d: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            SymmetricMatrix::symmetrize(3, &d)
        };
        for _ in 0..20 {
            let a = rand_sym(&mut rng);
            let floor = rand_sym(&mut rng);
            let p = psd_project(&a, &floor).unwrap();
            assert!(psd_leq(&floor, &p, 1e-12).unwrap());
            let best = p.sub(&a).frobenius_norm();
            for _ in 0..50 {
                let r = rand_sym(&mut rng);
                let feasible = floor.add(&r.map_eigenvalues(|l| l.abs()));
                assert!(feasible.sub(&a).frobenius_norm() >= best - 1e-12);
            }
        }
    }

    #[test]
    fn stored_witness_is_incomparable_to_identity() {
        let s5 = 5f64.sqrt();
        let a = SymmetricMatrix::from_rows(&[vec![3.0, s5], vec![s5, 3.0]]).unwrap();
        let i = SymmetricMatrix::identity(2);
        assert!(!psd_leq_default(&a, &i).unwrap());
        assert!(!psd_leq_default(&i, &a).unwrap());
    }
}
