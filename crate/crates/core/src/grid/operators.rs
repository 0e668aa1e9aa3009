//! Finite-difference operators on a [`GridDomain`].

use std::sync::Arc;

use crate::engine::linop::LinearOperator;
use crate::grid::domain::GridDomain;

/// Forward differences at every cell node: one block of `ndim` partial
/// derivatives per entry of [`GridDomain::cell_nodes`].
#[derive(Debug, Clone)]
pub struct ForwardDifference {
    nodes: usize,
    strides: Vec<usize>,
    active_axes: Vec<bool>,
    inv_h: f64,
    cells: Vec<usize>,
}

impl ForwardDifference {
    pub fn new(dom: &GridDomain) -> Self {
        Self {
            nodes: dom.node_count(),
            strides: (0..dom.ndim()).map(|a| dom.stride(a)).collect(),
            active_axes: dom.dims().iter().map(|d| *d > 1).collect(),
            inv_h: 1.0 / dom.spacing(),
            cells: dom.cell_nodes(),
        }
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn ndim(&self) -> usize {
        self.strides.len()
    }
}

impl LinearOperator for ForwardDifference {
    fn nrows(&self) -> usize {
        self.cells.len() * self.ndim()
    }

    fn ncols(&self) -> usize {
        self.nodes
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.ndim();
        for (c, &node) in self.cells.iter().enumerate() {
            for axis in 0..d {
                y[c * d + axis] = if self.active_axes[axis] {
                    (x[node + self.strides[axis]] - x[node]) * self.inv_h
                } else {
                    0.0
                };
            }
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        let d = self.ndim();
        for (c, &node) in self.cells.iter().enumerate() {
            for axis in 0..d {
                if self.active_axes[axis] {
                    let v = y[c * d + axis] * self.inv_h;
                    x[node + self.strides[axis]] += v;
                    x[node] -= v;
                }
            }
        }
    }
}

/// Gradient at every node: forward differences where the forward
/// neighbour exists, backward differences on the far faces.
#[derive(Debug, Clone)]
pub struct NodeGradient {
    dims: Vec<usize>,
    strides: Vec<usize>,
    inv_h: f64,
}

impl NodeGradient {
    pub fn new(dom: &GridDomain) -> Self {
        Self {
            dims: dom.dims().to_vec(),
            strides: (0..dom.ndim()).map(|a| dom.stride(a)).collect(),
            inv_h: 1.0 / dom.spacing(),
        }
    }

    fn nodes(&self) -> usize {
        self.dims.iter().product()
    }

    /// `(low, high)` nodes of the difference taken at `node` along `axis`.
    #[inline]
    fn stencil(&self, node: usize, axis: usize) -> Option<(usize, usize)> {
        let d = self.dims[axis];
        if d == 1 {
            return None;
        }
        let s = self.strides[axis];
        let i = (node / s) % d;
        Some(if i + 1 < d { (node, node + s) } else { (node - s, node) })
    }
}

impl LinearOperator for NodeGradient {
    fn nrows(&self) -> usize {
        self.nodes() * self.dims.len()
    }

    fn ncols(&self) -> usize {
        self.nodes()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.dims.len();
        for node in 0..self.nodes() {
            for axis in 0..d {
                y[node * d + axis] = match self.stencil(node, axis) {
                    Some((lo, hi)) => (x[hi] - x[lo]) * self.inv_h,
                    None => 0.0,
                };
            }
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        let d = self.dims.len();
        for node in 0..self.nodes() {
            for axis in 0..d {
                if let Some((lo, hi)) = self.stencil(node, axis) {
                    let v = y[node * d + axis] * self.inv_h;
                    x[hi] += v;
                    x[lo] -= v;
                }
            }
        }
    }
}

/// `A(x) ∇u(x)` at every cell node, with one `ndim × ndim` row-major matrix
/// per cell.
#[derive(Debug, Clone)]
pub struct CoefficientGradient {
    inner: ForwardDifference,
    matrices: Vec<f64>,
}

impl CoefficientGradient {
    pub fn new(inner: ForwardDifference, matrices: Vec<f64>) -> Self {
        debug_assert_eq!(matrices.len(), inner.cells().len() * inner.ndim() * inner.ndim());
        Self { inner, matrices }
    }
}

impl LinearOperator for CoefficientGradient {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.inner.ndim();
        let mut g = vec![0.0; self.inner.nrows()];
        self.inner.apply(x, &mut g);
        for c in 0..self.inner.cells().len() {
            let a = &self.matrices[c * d * d..(c + 1) * d * d];
            for i in 0..d {
                y[c * d + i] = (0..d).map(|j| a[i * d + j] * g[c * d + j]).sum();
            }
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        let d = self.inner.ndim();
        let mut g = vec![0.0; self.inner.nrows()];
        for c in 0..self.inner.cells().len() {
            let a = &self.matrices[c * d * d..(c + 1) * d * d];
            for j in 0..d {
                g[c * d + j] = (0..d).map(|i| a[i * d + j] * y[c * d + i]).sum();
            }
        }
        self.inner.apply_transpose(&g, x);
    }
}

/// The standard `(2n+1)`-point Laplacian at every node that has both
/// neighbours along each axis.
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    nodes: usize,
    strides: Vec<usize>,
    active_axes: Vec<bool>,
    inv_h2: f64,
    centres: Vec<usize>,
}

impl DiscreteLaplacian {
    pub fn new(dom: &GridDomain) -> Self {
        Self {
            nodes: dom.node_count(),
            strides: (0..dom.ndim()).map(|a| dom.stride(a)).collect(),
            active_axes: dom.dims().iter().map(|d| *d > 1).collect(),
            inv_h2: 1.0 / (dom.spacing() * dom.spacing()),
            centres: dom.laplacian_nodes(),
        }
    }

    pub fn centres(&self) -> &[usize] {
        &self.centres
    }
}

impl LinearOperator for DiscreteLaplacian {
    fn nrows(&self) -> usize {
        self.centres.len()
    }

    fn ncols(&self) -> usize {
        self.nodes
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, &c) in self.centres.iter().enumerate() {
            let mut acc = 0.0;
            for (s, active) in self.strides.iter().zip(&self.active_axes) {
                if *active {
                    acc += x[c + s] + x[c - s] - 2.0 * x[c];
                }
            }
            y[r] = acc * self.inv_h2;
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (r, &c) in self.centres.iter().enumerate() {
            let v = y[r] * self.inv_h2;
            for (s, active) in self.strides.iter().zip(&self.active_axes) {
                if *active {
                    x[c + s] += v;
                    x[c - s] += v;
                    x[c] -= 2.0 * v;
                }
            }
        }
    }
}

/// Picks the listed coordinates.
#[derive(Debug, Clone)]
pub struct Selection {
    indices: Vec<usize>,
    ncols: usize,
}

impl Selection {
    pub fn new(indices: Vec<usize>, ncols: usize) -> Self {
        Self { indices, ncols }
    }
}

impl LinearOperator for Selection {
    fn nrows(&self) -> usize {
        self.indices.len()
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, &i) in y.iter_mut().zip(&self.indices) {
            *yi = x[i];
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (yi, &i) in y.iter().zip(&self.indices) {
            x[i] += yi;
        }
    }
}

/// Operators with a common domain, outputs concatenated.
#[derive(Debug, Clone)]
pub struct Stacked {
    parts: Vec<Arc<dyn LinearOperator>>,
}

impl Stacked {
    pub fn new(parts: Vec<Arc<dyn LinearOperator>>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0].ncols() == w[1].ncols()));
        Self { parts }
    }
}

impl LinearOperator for Stacked {
    fn nrows(&self) -> usize {
        self.parts.iter().map(|p| p.nrows()).sum()
    }

    fn ncols(&self) -> usize {
        self.parts.first().map_or(0, |p| p.ncols())
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut start = 0;
        for p in &self.parts {
            let m = p.nrows();
            p.apply(x, &mut y[start..start + m]);
            start += m;
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        let mut tmp = vec![0.0; x.len()];
        let mut start = 0;
        for p in &self.parts {
            let m = p.nrows();
            p.apply_transpose(&y[start..start + m], &mut tmp);
            x.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
            start += m;
        }
    }
}
