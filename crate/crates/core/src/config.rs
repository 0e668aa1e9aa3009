use crate::error::{Error, Result};
use crate::space::Element;

/// Tolerances and limits shared by every iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Objective / stationarity tolerance.
    pub tol_objective: f64,
    /// Constraint-violation tolerance.
    pub tol_feasibility: f64,
    pub max_iterations: usize,
    /// Seed for randomized starts and sweep orders. Seed 0 uses the
    /// deterministic default start.
    pub seed: u64,
    /// Abort when an iterate's sup-norm exceeds this cap.
    pub max_iterate_norm: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_objective: 1e-9,
            tol_feasibility: 1e-9,
            max_iterations: 100_000,
            seed: 0,
            max_iterate_norm: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_objective > 0.0 && self.tol_feasibility > 0.0) {
            return Err(Error::InvalidInput("solver tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        if !(self.max_iterate_norm > 0.0) {
            return Err(Error::InvalidInput("max_iterate_norm must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol_objective = tol;
        self.tol_feasibility = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }
}

/// Outcome of a variational solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub minimizer: Element,
    pub minimal_gradient: Element,
    /// `‖g_u‖_W` of the minimizer.
    pub objective: f64,
    /// `‖g_u‖_W^q` where `q` is the exponent of the gradient norm; this is
    /// the quantity the descent kernels actually minimize.
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feasibility_residual: f64,
}
