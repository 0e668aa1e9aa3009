//! Runs a task and collects what goes into the report.

use std::collections::BTreeMap;

use gradspace::grid::solve_biharmonic;
use gradspace::matrix::fredholm_poincare_constant;
use gradspace::{
    lattice_max, lattice_min, minimize_rayleigh, solve_dirichlet, solve_multi_obstacle, solve_obstacle, SolveReport,
    SolverConfig,
};

use crate::problem::{InstanceKind, Task, VariationalMode};
use crate::report::Field;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub objective: f64,
    pub energy: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub feasibility_residual: Option<f64>,
    pub values: BTreeMap<String, f64>,
    pub fields: BTreeMap<String, Field>,
}

impl Solution {
    fn new(objective: f64) -> Self {
        Self {
            objective,
            energy: None,
            iterations: None,
            converged: None,
            feasibility_residual: None,
            values: BTreeMap::new(),
            fields: BTreeMap::new(),
        }
    }

    fn field(mut self, name: &str, index: &'static str, values: Vec<f64>) -> Self {
        self.fields.insert(name.to_string(), Field { index, values });
        self
    }

    fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }

    /// The bare values of every field, as a certificate reads them back.
    pub fn field_values(&self) -> BTreeMap<String, Vec<f64>> {
        self.fields.iter().map(|(k, f)| (k.clone(), f.values.clone())).collect()
    }
}

/// Index column name for fields over the instance's points.
pub fn point_index(instance: InstanceKind) -> &'static str {
    match instance {
        InstanceKind::Grid | InstanceKind::Metric | InstanceKind::Graph => "node",
        InstanceKind::Matrix | InstanceKind::ToyComplex => "entry",
    }
}

fn from_report(r: SolveReport, index: &'static str) -> Solution {
    let mut s = Solution::new(r.objective)
        .field("minimizer", index, r.minimizer.into_coords())
        .field("minimal_gradient", "entry", r.minimal_gradient.into_coords());
    s.energy = Some(r.energy);
    s.iterations = Some(r.iterations);
    s.converged = Some(r.converged);
    s.feasibility_residual = Some(r.feasibility_residual);
    s
}

pub fn solve(task: &Task, instance: InstanceKind, cfg: &SolverConfig) -> gradspace::Result<Solution> {
    let index = point_index(instance);
    Ok(match task {
        Task::Variational { rel, k0, f, mode } => {
            let r = match mode {
                VariationalMode::Dirichlet => solve_dirichlet(rel, k0, f, cfg)?,
                VariationalMode::Obstacle(psi) => solve_obstacle(rel, k0, f, psi, cfg)?,
                VariationalMode::MultiObstacle { lower, upper } => solve_multi_obstacle(rel, k0, f, lower, upper, cfg)?,
                VariationalMode::Biharmonic(dom) => solve_biharmonic(dom, cfg)?,
            };
            from_report(r, index)
        }
        Task::Rayleigh { rel, cone } => {
            let (u, value) = minimize_rayleigh(rel, cone, cfg)?;
            let g = rel.minimal_gradient(&u, cfg)?;
            Solution::new(value)
                .field("minimizer", index, u.into_coords())
                .field("minimal_gradient", "entry", g.into_coords())
        }
        Task::Lattice {
            order,
            psi1,
            psi2,
            maximum,
        } => {
            let top = lattice_max(*order, psi1, psi2, cfg)?;
            if *maximum {
                Solution::new(top.norm()).field("maximum", "entry", top.into_coords())
            } else {
                let low = lattice_min(*order, psi1, psi2, cfg)?;
                Solution::new(low.distance(&top)?)
                    .field("minimum", "entry", low.into_coords())
                    .field("maximum", "entry", top.into_coords())
            }
        }
        Task::Gradient { rel, u } => {
            let g = rel.minimal_gradient(u, cfg)?;
            Solution::new(g.norm()).field("minimal_gradient", index, g.into_coords())
        }
        Task::Fredholm { op } => {
            let b = fredholm_poincare_constant(op)?;
            let n = b.singular_values.len();
            Solution::new(b.constant)
                .value("constant", b.constant)
                .value("kernel_dimension", b.kernel.len() as f64)
                .value("rank", (n - b.kernel.len()) as f64)
                .field("singular_values", "entry", b.singular_values)
                .field("kernel", "entry", b.kernel.concat())
        }
    })
}
