use crate::error::{check_finite, check_len, Error, Result};

/// A rectangular node grid with uniform spacing. Nodes are numbered with
/// the first axis running fastest.
///
/// Interior nodes are the unknowns of a boundary-value problem; every other
/// node carries a prescribed value.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    dims: Vec<usize>,
    spacing: f64,
    origin: Vec<f64>,
    interior: Vec<bool>,
    boundary_values: Option<Vec<f64>>,
}

impl GridDomain {
    /// A box grid whose interior is every node off the outer faces.
    pub fn new(dims: Vec<usize>, spacing: f64) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|d| *d == 0) {
            return Err(Error::InvalidInput("grid needs at least one node per axis".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidInput(format!("grid spacing must be positive, got {spacing}")));
        }
        let origin = vec![0.0; dims.len()];
        let mut dom = Self {
            dims,
            spacing,
            origin,
            interior: Vec::new(),
            boundary_values: None,
        };
        dom.interior = (0..dom.node_count()).map(|i| !dom.on_face(i)).collect();
        Ok(dom)
    }

    /// `n` nodes on `[0, 1]` with the two end points as boundary.
    pub fn unit_interval(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("an interval grid needs two nodes".into()));
        }
        Self::new(vec![n], 1.0 / (n - 1) as f64)
    }

    /// The square `[−2.5, 2.5]²` with spacing `h`, interior the open annulus
    /// `1 < |x| < 2`, value 1 on `|x| ≤ 1` and 0 on `|x| ≥ 2`.
    pub fn annulus(h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!("grid spacing must be positive, got {h}")));
        }
        let n = (5.0 / h).round() as usize + 1;
        let dom = Self::new(vec![n, n], h)?.with_origin(vec![-2.5, -2.5])?;
        let radius: Vec<f64> = (0..dom.node_count())
            .map(|i| {
                let x = dom.coordinates(i);
                (x[0] * x[0] + x[1] * x[1]).sqrt()
            })
            .collect();
        let interior = radius.iter().map(|r| *r > 1.0 && *r < 2.0).collect();
        let values = radius
            .iter()
            .map(|r| if *r <= 1.0 { 1.0 } else { 0.0 })
            .collect();
        dom.with_interior(interior)?.with_boundary_values(values)
    }

    pub fn with_origin(mut self, origin: Vec<f64>) -> Result<Self> {
        check_len("grid origin", self.dims.len(), origin.len())?;
        check_finite("grid origin", &origin)?;
        self.origin = origin;
        Ok(self)
    }

    /// Replaces the interior mask. Interior nodes may not lie on an outer
    /// face, so that every axis neighbour exists.
    pub fn with_interior(mut self, interior: Vec<bool>) -> Result<Self> {
        check_len("interior mask", self.node_count(), interior.len())?;
        if let Some(i) = (0..interior.len()).find(|i| interior[*i] && self.on_face(*i)) {
            return Err(Error::InvalidInput(format!(
                "interior node {i} lies on the outer face of the grid"
            )));
        }
        self.interior = interior;
        Ok(self)
    }

    /// Full-length nodal data; entries at interior nodes are only used as a
    /// starting guess.
    pub fn with_boundary_values(mut self, values: Vec<f64>) -> Result<Self> {
        check_len("boundary values", self.node_count(), values.len())?;
        check_finite("boundary values", &values)?;
        self.boundary_values = Some(values);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// `hⁿ`, the volume attached to one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.ndim() as i32)
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn boundary_values(&self) -> Option<&[f64]> {
        self.boundary_values.as_deref()
    }

    /// Offset between consecutive nodes along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[..axis].iter().product()
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut rest = node;
        self.dims
            .iter()
            .map(|d| {
                let i = rest % d;
                rest /= d;
                i
            })
            .collect()
    }

    pub fn node(&self, index: &[usize]) -> usize {
        index
            .iter()
            .enumerate()
            .map(|(axis, i)| i * self.stride(axis))
            .sum()
    }

    pub fn coordinates(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .zip(&self.origin)
            .map(|(i, o)| o + *i as f64 * self.spacing)
            .collect()
    }

    /// Distance in nodes to the nearest outer face.
    pub fn face_depth(&self, node: usize) -> usize {
        self.multi_index(node)
            .iter()
            .zip(&self.dims)
            .map(|(i, d)| (*i).min(d - 1 - i))
            .min()
            .unwrap_or(0)
    }

    /// Interior = nodes at least `layers` nodes away from every face, so
    /// the outer `layers` rings carry prescribed values.
    pub fn with_boundary_layers(self, layers: usize) -> Result<Self> {
        let interior = (0..self.node_count()).map(|n| self.face_depth(n) >= layers.max(1)).collect();
        self.with_interior(interior)
    }

    fn on_face(&self, node: usize) -> bool {
        self.multi_index(node)
            .iter()
            .zip(&self.dims)
            .any(|(i, d)| *i == 0 || *i + 1 == *d)
    }

    /// Nodes whose forward neighbour exists along every axis; each carries
    /// one forward-difference gradient in the energy.
    pub fn cell_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|n| {
                self.multi_index(*n)
                    .iter()
                    .zip(&self.dims)
                    .all(|(i, d)| *d == 1 || *i + 1 < *d)
            })
            .collect()
    }

    /// Nodes with both neighbours along every axis of extent > 1.
    pub fn laplacian_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|n| {
                self.multi_index(*n)
                    .iter()
                    .zip(&self.dims)
                    .all(|(i, d)| *d == 1 || (*i > 0 && *i + 1 < *d))
            })
            .collect()
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.node_count()).map(|n| f(&self.coordinates(n))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let d = GridDomain::new(vec![3, 4, 2], 0.5).unwrap();
        for n in 0..d.node_count() {
            assert_eq!(d.node(&d.multi_index(n)), n);
        }
        assert_eq!(d.stride(2), 12);
    }

    #[test]
    fn interior_must_avoid_faces() {
        let d = GridDomain::new(vec![4], 1.0).unwrap();
        assert_eq!(d.interior_mask(), &[false, true, true, false]);
        assert!(d.with_interior(vec![true, true, true, false]).is_err());
    }

    #[test]
    fn annulus_layout() {
        let d = GridDomain::annulus(0.25).unwrap();
        assert_eq!(d.dims(), &[21, 21]);
        let centre = d.node(&[10, 10]);
        assert_eq!(d.coordinates(centre), vec![0.0, 0.0]);
        assert_eq!(d.boundary_values().unwrap()[centre], 1.0);
        assert!(!d.interior_mask()[centre]);
        let ring = d.node(&[16, 10]); // x = 1.5
        assert!(d.interior_mask()[ring]);
    }
}
