//! Finite metric measure spaces and graphs.

pub mod graph;
pub mod ops;
pub mod space;

pub use graph::{Edge, WeightedGraph};
pub use ops::{
    compare_upper_and_hajlasz, friedrichs_check, graph_minimal_upper_gradient, hajlasz_minimal_gradient,
    poincare_minimal_gradient, FriedrichsReport, GradientComparison, MetricGradient,
};
pub use space::{Ball, FiniteMetricMeasureSpace};
