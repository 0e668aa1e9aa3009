//! Finite-difference instantiations on rectangular grids.

pub mod domain;
pub mod maximal;
pub mod operators;
pub mod solvers;

pub use domain::GridDomain;
pub use maximal::maximal_function;
pub use solvers::{
    biharmonic_relation, grid_gradient, mixed_relation, p_energy, p_laplace_relation, solve_biharmonic,
    solve_mixed_functional, solve_p_laplace, CoefficientField, ZeroOrder,
};
