//! Minimal gradients and convex variational problems over abstract
//! gradient relations.
//!
//! A [`GradientRelation`] pairs a domain space `V` with a gradient space
//! `W` and says which `g ∈ W` count as gradients of `u ∈ V`. From that the
//! crate computes the least-norm gradient of `u`, solves Dirichlet,
//! obstacle and multi-obstacle problems, minimizes Rayleigh quotients, and
//! forms norm-minimal max/min in ordered spaces.
//!
//! Concrete instances:
//!
//! * [`grid`]: finite differences on rectangular grids (p-Laplace,
//!   weighted and matrix coefficients, biharmonic, mixed functionals).
//! * [`metric`]: finite metric measure spaces and graphs (Hajłasz and
//!   ball-Poincaré gradients, edge upper gradients).
//! * [`matrix`]: symmetric matrices with Schatten norms and the PSD order.
//!
//! Every solve takes a [`SolverConfig`] and is deterministic given its seed.

pub mod config;
pub mod engine;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod matrix;
pub mod metric;
pub mod relation;
pub mod space;
pub mod variational;

pub use config::{SolveReport, SolverConfig};
pub use error::{Error, Result};
pub use lattice::{
    check_lub_property, lattice_max, lattice_min, order_leq, strict_norm_monotonicity_check, BoundComparison,
    LubReport, OrderSpec,
};
pub use relation::{Envelope, GradientRelation, PoincareBound, RelationKind};
pub use space::{Element, NormSpec, SpaceDescriptor, SpaceKind};
pub use variational::{
    check_feasible_obstacle, minimize_rayleigh, rayleigh_quotient, solve_dirichlet, solve_multi_obstacle,
    solve_obstacle, verify_rk_cone, ConeReport, ConeSpec, Constraint, FeasibleSet,
};
