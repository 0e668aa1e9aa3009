//! Closed convex constraint sets `K_f = K₀ + f` and their projections.

use crate::config::SolverConfig;
use crate::engine::dykstra::{dykstra, BoxSet, DykstraOptions, HalfSpace, ProjectionOracle};
use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::psd::PsdShift;
use crate::matrix::schatten::side;
use crate::matrix::symmetric::SymmetricMatrix;
use crate::space::Element;

/// One constraint on `w = v − f`.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `w_i = 0` wherever the mask is true.
    FixedMask(Vec<bool>),
    /// `w ≥ lower`; entries may be `−∞`.
    LowerBound(Vec<f64>),
    /// `w ≤ upper`; entries may be `+∞`.
    UpperBound(Vec<f64>),
    /// `normal · w ≥ offset`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// `w ⪰ bound` for row-major square matrices.
    PsdLower(SymmetricMatrix),
    /// `w ⪯ bound`.
    PsdUpper(SymmetricMatrix),
}

impl Constraint {
    /// Scaling `w` by `α > 0` preserves membership.
    pub fn is_homogeneous(&self) -> bool {
        match self {
            Constraint::FixedMask(_) => true,
            Constraint::LowerBound(l) => l.iter().all(|v| *v == 0.0 || *v == f64::NEG_INFINITY),
            Constraint::UpperBound(u) => u.iter().all(|v| *v == 0.0 || *v == f64::INFINITY),
            Constraint::HalfSpace { offset, .. } => *offset == 0.0,
            Constraint::PsdLower(m) | Constraint::PsdUpper(m) => m.frobenius_norm() == 0.0,
        }
    }

    fn is_box(&self) -> bool {
        matches!(
            self,
            Constraint::FixedMask(_) | Constraint::LowerBound(_) | Constraint::UpperBound(_)
        )
    }

    fn violation(&self, w: &[f64]) -> f64 {
        match self {
            Constraint::FixedMask(mask) => mask
                .iter()
                .zip(w)
                .filter(|(m, _)| **m)
                .fold(0.0, |a, (_, v)| a.max(v.abs())),
            Constraint::LowerBound(l) => l.iter().zip(w).fold(0.0, |a, (lo, v)| a.max(lo - v)),
            Constraint::UpperBound(u) => u.iter().zip(w).fold(0.0, |a, (hi, v)| a.max(v - hi)),
            Constraint::HalfSpace { normal, offset } => {
                let s: f64 = normal.iter().zip(w).map(|(a, b)| a * b).sum();
                let len = normal.iter().map(|a| a * a).sum::<f64>().sqrt();
                if len == 0.0 {
                    (offset - s).max(0.0)
                } else {
                    ((offset - s) / len).max(0.0)
                }
            }
            Constraint::PsdLower(m) => PsdShift::above(m.clone()).order_violation(w),
            Constraint::PsdUpper(m) => PsdShift::below(m.clone()).order_violation(w),
        }
    }
}

/// `{v : v − f ∈ K₀}` where `K₀` is the intersection of the constraints;
/// without a shift `f = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    dimension: usize,
    constraints: Vec<Constraint>,
    shift: Option<Vec<f64>>,
}

impl FeasibleSet {
    /// The whole space.
    pub fn whole(dimension: usize) -> Self {
        Self {
            dimension,
            constraints: Vec::new(),
            shift: None,
        }
    }

    /// `{w : w_i = 0 where mask_i}`.
    pub fn subspace(mask: Vec<bool>) -> Self {
        let dimension = mask.len();
        Self {
            dimension,
            constraints: vec![Constraint::FixedMask(mask)],
            shift: None,
        }
    }

    pub fn with(mut self, c: Constraint) -> Result<Self> {
        let n = self.dimension;
        match &c {
            Constraint::FixedMask(m) => check_len("constraint mask", n, m.len())?,
            Constraint::LowerBound(l) => {
                check_len("lower bound", n, l.len())?;
                if l.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
                    return Err(Error::InvalidInput("lower bounds must be below +∞".into()));
                }
            }
            Constraint::UpperBound(u) => {
                check_len("upper bound", n, u.len())?;
                if u.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
                    return Err(Error::InvalidInput("upper bounds must be above −∞".into()));
                }
            }
            Constraint::HalfSpace { normal, offset } => {
                check_len("half-space normal", n, normal.len())?;
                check_finite("half-space normal", normal)?;
                check_finite("half-space offset", &[*offset])?;
            }
            Constraint::PsdLower(m) | Constraint::PsdUpper(m) => {
                if side(n) != Some(m.n()) {
                    return Err(Error::InvalidInput(format!(
                        "a {0}×{0} order bound does not fit a space of dimension {n}",
                        m.n()
                    )));
                }
            }
        }
        let psd = |c: &Constraint| matches!(c, Constraint::PsdLower(_) | Constraint::PsdUpper(_));
        let mask = |c: &Constraint| matches!(c, Constraint::FixedMask(_));
        if (psd(&c) && self.constraints.iter().any(mask)) || (mask(&c) && self.constraints.iter().any(psd)) {
            return Err(Error::InvalidInput(
                "coordinate masks cannot be combined with PSD order bounds".into(),
            ));
        }
        self.constraints.push(c);
        Ok(self)
    }

    /// The same constraints around a new base point `f`.
    pub fn shifted(&self, f: &Element) -> Result<Self> {
        check_len("shift", self.dimension, f.dimension())?;
        Ok(Self {
            dimension: self.dimension,
            constraints: self.constraints.clone(),
            shift: Some(f.coords().to_vec()),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn shift(&self) -> Option<&[f64]> {
        self.shift.as_deref()
    }

    fn base(&self) -> Vec<f64> {
        self.shift.clone().unwrap_or_else(|| vec![0.0; self.dimension])
    }

    /// Largest violation over the constraints, each measured as a distance
    /// (coordinates, half-space distance, or negative eigenvalue mass).
    pub fn residual(&self, v: &[f64]) -> Result<f64> {
        check_len("element", self.dimension, v.len())?;
        let f = self.base();
        let w: Vec<f64> = v.iter().zip(&f).map(|(a, b)| a - b).collect();
        Ok(self.constraints.iter().map(|c| c.violation(&w)).fold(0.0, f64::max))
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        Ok(self.residual(v)? <= tol)
    }

    /// Only masks and bounds.
    pub fn is_box(&self) -> bool {
        self.constraints.iter().all(Constraint::is_box)
    }

    pub fn has_psd(&self) -> bool {
        self.constraints
            .iter()
            .any(|c| matches!(c, Constraint::PsdLower(_) | Constraint::PsdUpper(_)))
    }

    /// Merged mask of fixed coordinates.
    pub fn fixed_mask(&self) -> Vec<bool> {
        let mut fixed = vec![false; self.dimension];
        for c in &self.constraints {
            if let Constraint::FixedMask(m) = c {
                fixed.iter_mut().zip(m).for_each(|(a, b)| *a |= *b);
            }
        }
        fixed
    }

    /// Elementwise intersection of all bounds on `w`, masks included.
    pub fn bounds_on_offset(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dimension;
        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        for c in &self.constraints {
            match c {
                Constraint::FixedMask(m) => {
                    for i in (0..n).filter(|i| m[*i]) {
                        lo[i] = lo[i].max(0.0);
                        hi[i] = hi[i].min(0.0);
                    }
                }
                Constraint::LowerBound(l) => lo.iter_mut().zip(l).for_each(|(a, b)| *a = a.max(*b)),
                Constraint::UpperBound(u) => hi.iter_mut().zip(u).for_each(|(a, b)| *a = a.min(*b)),
                _ => {}
            }
        }
        (lo, hi)
    }

    /// Some point of the set, or `None` when none is found to `tol_feasibility`.
    pub fn find_point(&self, cfg: &SolverConfig) -> Result<Option<Vec<f64>>> {
        let f = self.base();
        let reduced = ReducedSet::new(self, &f)?;
        if reduced.empty_box() {
            return Ok(None);
        }
        let z = reduced.project(&reduced.restrict(&f));
        let v = reduced.expand(&z);
        Ok(if self.residual(&v)? <= cfg.tol_feasibility * (1.0 + crate::engine::vecops::norm_inf(&f)) {
            Some(v)
        } else {
            None
        })
    }
}

/// A feasible set restricted to its free coordinates, in `v`-coordinates.
#[derive(Debug, Clone)]
pub(crate) struct ReducedSet {
    free: Vec<usize>,
    base: Vec<f64>,
    pub(crate) lower: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    pub(crate) halfspaces: Vec<HalfSpace>,
    psd: Vec<PsdShift>,
    /// Some coordinate has crossing bounds, fixed ones included.
    crossed: bool,
    opts: DykstraOptions,
}

impl ReducedSet {
    /// Fixed coordinates take their value from `f`.
    pub(crate) fn new(set: &FeasibleSet, f: &[f64]) -> Result<Self> {
        check_len("shift", set.dimension, f.len())?;
        let base = set.shift.clone().unwrap_or_else(|| vec![0.0; set.dimension]);
        let fixed = set.fixed_mask();
        let free: Vec<usize> = (0..set.dimension).filter(|i| !fixed[*i]).collect();
        let (lo_w, hi_w) = set.bounds_on_offset();
        let crossed = lo_w.iter().zip(&hi_w).any(|(l, h)| l > h);
        let lower = free.iter().map(|i| base[*i] + lo_w[*i]).collect();
        let upper = free.iter().map(|i| base[*i] + hi_w[*i]).collect();
        let mut halfspaces = Vec::new();
        let mut psd = Vec::new();
        let n = set.dimension;
        for c in &set.constraints {
            match c {
                Constraint::HalfSpace { normal, offset } => {
                    // normal·(v − base) ≥ offset with fixed v_i = base_i
                    let rhs = offset + free.iter().map(|i| normal[*i] * base[*i]).sum::<f64>();
                    halfspaces.push(HalfSpace {
                        normal: free.iter().map(|i| normal[*i]).collect(),
                        offset: rhs,
                    });
                }
                Constraint::PsdLower(m) => {
                    let shift = SymmetricMatrix::symmetrize(m.n(), &base);
                    psd.push(PsdShift::above(m.add(&shift)));
                }
                Constraint::PsdUpper(m) => {
                    let shift = SymmetricMatrix::symmetrize(m.n(), &base);
                    psd.push(PsdShift::below(m.add(&shift)));
                }
                _ => {}
            }
        }
        debug_assert!(psd.is_empty() || free.len() == n);
        Ok(Self {
            free,
            base,
            lower,
            upper,
            halfspaces,
            psd,
            crossed,
            opts: DykstraOptions {
                max_sweeps: 100_000,
                step_tol: 1e-14,
            },
        })
    }

    pub(crate) fn free(&self) -> &[usize] {
        &self.free
    }

    pub(crate) fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.free.iter().map(|i| v[*i]).collect()
    }

    pub(crate) fn expand(&self, z: &[f64]) -> Vec<f64> {
        let mut v = self.base.clone();
        for (i, zi) in self.free.iter().zip(z) {
            v[*i] = *zi;
        }
        v
    }

    /// The same constraints with the fixed coordinates set to zero.
    pub(crate) fn zero_base(&mut self) {
        self.base.iter_mut().for_each(|v| *v = 0.0);
    }

    pub(crate) fn empty_box(&self) -> bool {
        self.crossed
    }

    pub(crate) fn is_box(&self) -> bool {
        self.halfspaces.is_empty() && self.psd.is_empty()
    }

    pub(crate) fn has_psd(&self) -> bool {
        !self.psd.is_empty()
    }

    fn box_set(&self) -> BoxSet {
        BoxSet {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

impl ProjectionOracle for ReducedSet {
    fn project(&self, z: &[f64]) -> Vec<f64> {
        let bx = self.box_set();
        if self.is_box() {
            return bx.project(z);
        }
        let mut oracles: Vec<&dyn ProjectionOracle> = vec![&bx];
        oracles.extend(self.halfspaces.iter().map(|h| h as &dyn ProjectionOracle));
        oracles.extend(self.psd.iter().map(|p| p as &dyn ProjectionOracle));
        if oracles.len() == 2 && self.lower.iter().chain(&self.upper).all(|b| b.is_infinite()) {
            return oracles[1].project(z);
        }
        match dykstra(&oracles, z, self.opts) {
            Ok(out) => out.point,
            Err(Error::NotConverged { best: Some(p), .. }) => p,
            Err(_) => z.to_vec(),
        }
    }
}

/// A set closed under positive scaling; the constraint set of a Rayleigh
/// problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    set: FeasibleSet,
}

impl ConeSpec {
    pub fn new(set: FeasibleSet) -> Result<Self> {
        if set.shift.as_ref().is_some_and(|f| f.iter().any(|v| *v != 0.0)) {
            return Err(Error::InvalidInput("a cone must not be shifted".into()));
        }
        if let Some(c) = set.constraints.iter().find(|c| !c.is_homogeneous()) {
            return Err(Error::InvalidInput(format!(
                "constraint {c:?} is not closed under positive scaling"
            )));
        }
        Ok(Self { set })
    }

    /// The whole space as a cone.
    pub fn whole(dimension: usize) -> Self {
        Self {
            set: FeasibleSet::whole(dimension),
        }
    }

    /// `{u : u_i = 0 where mask_i}`.
    pub fn subspace(mask: Vec<bool>) -> Self {
        Self {
            set: FeasibleSet::subspace(mask),
        }
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn dimension(&self) -> usize {
        self.set.dimension
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn sample_sets() -> Vec<FeasibleSet> {
        let s = SymmetricMatrix::diagonal(&[0.5, -0.2]);
        vec![
            FeasibleSet::subspace(vec![true, false, false, true]),
            FeasibleSet::whole(4).with(Constraint::LowerBound(vec![0.0, -1.0, f64::NEG_INFINITY, 0.3])).unwrap(),
            FeasibleSet::whole(4)
                .with(Constraint::HalfSpace {
                    normal: vec![1.0, -2.0, 0.5, 0.0],
                    offset: 0.2,
                })
                .unwrap()
                .with(Constraint::UpperBound(vec![1.0; 4]))
                .unwrap(),
            FeasibleSet::whole(4).with(Constraint::PsdLower(s.clone())).unwrap(),
            FeasibleSet::whole(4).with(Constraint::PsdUpper(s)).unwrap(),
        ]
    }

    #[test]
    fn projections_land_inside_and_sets_are_convex() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for set in sample_sets() {
            let red = ReducedSet::new(&set, &[0.0; 4]).unwrap();
            for _ in 0..30 {
                let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let b: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let pa = red.expand(&red.project(&red.restrict(&a)));
                let pb = red.expand(&red.project(&red.restrict(&b)));
                assert!(set.residual(&pa).unwrap() < 1e-9, "{set:?}");
                let mid: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| 0.5 * (x + y)).collect();
                assert!(set.residual(&mid).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn mask_and_psd_do_not_mix() {
        let s = FeasibleSet::subspace(vec![false; 4]);
        assert!(s.with(Constraint::PsdLower(SymmetricMatrix::zeros(2))).is_err());
    }

    #[test]
    fn cones_are_scaling_closed() {
        assert!(ConeSpec::new(FeasibleSet::whole(2).with(Constraint::LowerBound(vec![1.0, 0.0])).unwrap()).is_err());
        let cone = ConeSpec::new(
            FeasibleSet::whole(2)
                .with(Constraint::LowerBound(vec![0.0, f64::NEG_INFINITY]))
                .unwrap(),
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u = [rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0)];
            let alpha = rng.gen_range(0.01..100.0);
            assert!(cone.set().contains(&[alpha * u[0], alpha * u[1]], 0.0).unwrap());
        }
    }

    #[test]
    fn point_finding() {
        let empty = FeasibleSet::subspace(vec![true, true])
            .with(Constraint::LowerBound(vec![1.0, 1.0]))
            .unwrap();
        assert!(empty.find_point(&SolverConfig::default()).unwrap().is_none());
        let two = FeasibleSet::whole(2)
            .with(Constraint::HalfSpace {
                normal: vec![1.0, 1.0],
                offset: 1.0,
            })
            .unwrap()
            .with(Constraint::HalfSpace {
                normal: vec![-1.0, -1.0],
                offset: -0.5,
            })
            .unwrap();
        assert!(two.find_point(&SolverConfig::default()).unwrap().is_none());
    }
}
