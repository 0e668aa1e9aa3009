//! Dirichlet, obstacle and Rayleigh problems over any gradient relation.

pub mod dirichlet;
pub mod feasible;
mod polyhedral;
pub mod rayleigh;

pub use dirichlet::{
    check_feasible_obstacle, check_feasible_obstacle_with, multi_obstacle_set, obstacle_set, solve_dirichlet,
    solve_multi_obstacle, solve_obstacle,
};
pub use feasible::{ConeSpec, Constraint, FeasibleSet};
pub use rayleigh::{minimize_rayleigh, rayleigh_quotient, verify_rk_cone, ConeReport};
