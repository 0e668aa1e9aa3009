//! Symmetric-matrix instantiations: Schatten norms, PSD projections and
//! order, commutator and bounded-below relations, Fredholm constants.

mod barrier;
pub mod fredholm;
pub mod ops;
pub mod psd;
pub mod schatten;
pub mod symmetric;

pub use fredholm::{fredholm_poincare_constant, FredholmBound};
pub use ops::{bounded_below_relation, commutator_relation, matrix_max, matrix_min, order_limit_check};
pub use psd::{psd_leq, psd_project, PsdShift};
pub use schatten::schatten_norm;
pub use symmetric::{SymmetricMatrix, PSD_TOL};
