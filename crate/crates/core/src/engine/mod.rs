//! Numerical kernels shared by every instantiation: a Jacobi eigensolver,
//! conjugate gradients, Dykstra's projections, projected accelerated
//! descent, dual coordinate ascent and Rayleigh-quotient iterations.

pub mod cg;
pub mod descent;
pub mod dual;
pub mod dykstra;
pub mod eigen;
pub mod linop;
pub mod rayleigh;
pub mod vecops;

pub use cg::{cg_solve, CgOutcome};
pub use descent::{projected_descent, DescentOutcome, EnergyOracle};
pub use dykstra::{dykstra, BoxSet, DykstraOptions, DykstraOutcome, HalfSpace, ProjectionOracle, Unconstrained};
pub use eigen::{jacobi_eigh, SymmetricEigen};
pub use linop::{DenseMatrix, Identity, LinearOperator};
pub use rayleigh::{inverse_power, rayleigh_iterate, EigenPair, HomogeneousTerm, RayleighOutcome};
