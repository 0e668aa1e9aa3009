use thiserror::Error;

/// Errors produced by the solvers and constructors in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    /// The iteration cap was hit. `best` carries the best iterate seen, when
    /// the solver had one.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Option<Vec<f64>>,
    },

    #[error("regularity violated: element of norm {norm:.3e} has a vanishing minimal gradient")]
    RegularityViolation { norm: f64 },

    #[error("iterate norm {norm:.3e} exceeded the configured cap {cap:.3e}")]
    Unbounded { norm: f64, cap: f64 },

    #[error("operator is not positive definite on the iteration subspace")]
    Indefinite,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} has a non-finite entry at index {pos}"
        )));
    }
    Ok(())
}
