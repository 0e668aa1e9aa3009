//! Coordinate spaces, their norms, and elements.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::schatten::{schatten_power, schatten_power_gradient, side};

/// What a coordinate vector stands for. Only used for validation and
/// reporting; the numerics see plain vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    EuclideanGrid,
    MetricPoints,
    GraphEdges,
    SymmetricMatrix,
    /// Full `n × n` matrices, the codomain of commutator-type maps.
    SquareMatrix,
    /// `ℂ` as `(Re, Im)`.
    ToyComplex,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceKind::EuclideanGrid => "euclidean-grid",
            SpaceKind::MetricPoints => "metric-points",
            SpaceKind::GraphEdges => "graph-edges",
            SpaceKind::SymmetricMatrix => "symmetric-matrix",
            SpaceKind::SquareMatrix => "square-matrix",
            SpaceKind::ToyComplex => "toy-complex",
        };
        f.write_str(s)
    }
}

/// A norm on `ℝ^d`. Every variant is uniformly convex (`1 < p < ∞`).
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Euclidean,
    /// `(Σ w_i |x_i|^p)^{1/p}`.
    WeightedLp { p: f64, weights: Vec<f64> },
    /// `(Σ_b w_b |x_b|^p)^{1/p}` where `x_b` runs over consecutive blocks of
    /// the given sizes and `|·|` is the Euclidean length of a block.
    BlockLp {
        p: f64,
        blocks: Vec<usize>,
        weights: Vec<f64>,
    },
    /// Schatten-p norm of a square matrix stored row-major.
    Schatten { p: f64 },
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "norm exponent must satisfy 1 < p < ∞, got {p}"
        )));
    }
    Ok(())
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput(format!("norm weights must be positive and finite, got {w}")));
    }
    Ok(())
}

impl NormSpec {
    pub fn lp(p: f64, dimension: usize) -> Self {
        NormSpec::WeightedLp {
            p,
            weights: vec![1.0; dimension],
        }
    }

    /// The exponent `q` for which [`power`](Self::power) is `‖x‖^q`.
    pub fn exponent(&self) -> f64 {
        match self {
            NormSpec::Euclidean => 2.0,
            NormSpec::WeightedLp { p, .. } | NormSpec::BlockLp { p, .. } | NormSpec::Schatten { p } => *p,
        }
    }

    /// True when the power `‖x‖^q` is a quadratic form.
    pub fn is_quadratic(&self) -> bool {
        match self {
            NormSpec::Euclidean => true,
            NormSpec::WeightedLp { p, .. } | NormSpec::BlockLp { p, .. } => *p == 2.0,
            NormSpec::Schatten { p } => *p == 2.0,
        }
    }

    pub fn validate(&self, kind: SpaceKind, dimension: usize) -> Result<()> {
        match self {
            NormSpec::Euclidean => Ok(()),
            NormSpec::WeightedLp { p, weights } => {
                check_exponent(*p)?;
                check_len("norm weights", dimension, weights.len())?;
                check_weights(weights)
            }
            NormSpec::BlockLp { p, blocks, weights } => {
                check_exponent(*p)?;
                check_len("block weights", blocks.len(), weights.len())?;
                check_weights(weights)?;
                if blocks.iter().any(|b| *b == 0) {
                    return Err(Error::InvalidInput("blocks must be nonempty".into()));
                }
                check_len("block sizes total", dimension, blocks.iter().sum())
            }
            NormSpec::Schatten { p } => {
                check_exponent(*p)?;
                if !matches!(kind, SpaceKind::SymmetricMatrix | SpaceKind::SquareMatrix) {
                    return Err(Error::InvalidInput(format!(
                        "Schatten norms need a matrix space, not {kind}"
                    )));
                }
                if side(dimension).is_none() {
                    return Err(Error::InvalidInput(format!(
                        "dimension {dimension} is not a square number"
                    )));
                }
                Ok(())
            }
        }
    }

    /// `‖x‖^q` with `q` = [`exponent`](Self::exponent), evaluated without
    /// taking roots.
    pub fn power(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::Euclidean => x.iter().map(|v| v * v).sum(),
            NormSpec::WeightedLp { p, weights } => {
                if *p == 2.0 {
                    x.iter().zip(weights).map(|(v, w)| w * v * v).sum()
                } else {
                    x.iter().zip(weights).map(|(v, w)| w * v.abs().powf(*p)).sum()
                }
            }
            NormSpec::BlockLp { p, blocks, weights } => {
                let mut start = 0;
                let mut total = 0.0;
                for (b, w) in blocks.iter().zip(weights) {
                    let sq: f64 = x[start..start + b].iter().map(|v| v * v).sum();
                    total += w * if *p == 2.0 { sq } else { sq.powf(0.5 * p) };
                    start += b;
                }
                total
            }
            NormSpec::Schatten { p } => {
                let n = side(x.len()).expect("validated square dimension");
                schatten_power(n, x, *p)
            }
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        let q = self.exponent();
        let pw = self.power(x);
        if q == 2.0 {
            pw.sqrt()
        } else {
            pw.powf(1.0 / q)
        }
    }

    /// Gradient of [`power`](Self::power).
    pub fn power_gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            NormSpec::Euclidean => x.iter().map(|v| 2.0 * v).collect(),
            NormSpec::WeightedLp { p, weights } => x
                .iter()
                .zip(weights)
                .map(|(v, w)| {
                    if *p == 2.0 {
                        2.0 * w * v
                    } else {
                        p * w * v.signum() * v.abs().powf(p - 1.0)
                    }
                })
                .collect(),
            NormSpec::BlockLp { p, blocks, weights } => {
                let mut out = vec![0.0; x.len()];
                let mut start = 0;
                for (b, w) in blocks.iter().zip(weights) {
                    let block = &x[start..start + b];
                    let sq: f64 = block.iter().map(|v| v * v).sum();
                    let factor = if *p == 2.0 {
                        2.0 * w
                    } else if sq == 0.0 {
                        0.0
                    } else {
                        p * w * sq.powf(0.5 * (p - 2.0))
                    };
                    for (o, v) in out[start..start + b].iter_mut().zip(block) {
                        *o = factor * v;
                    }
                    start += b;
                }
                out
            }
            NormSpec::Schatten { p } => {
                let n = side(x.len()).expect("validated square dimension");
                schatten_power_gradient(n, x, *p)
            }
        }
    }
}

/// A finite-dimensional coordinate space with a norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDescriptor {
    kind: SpaceKind,
    dimension: usize,
    norm: NormSpec,
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind, dimension: usize, norm: NormSpec) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("space dimension must be at least 1".into()));
        }
        norm.validate(kind, dimension)?;
        Ok(Self {
            kind,
            dimension,
            norm,
        })
    }

    pub fn euclidean(kind: SpaceKind, dimension: usize) -> Result<Self> {
        Self::new(kind, dimension, NormSpec::Euclidean)
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn norm_spec(&self) -> &NormSpec {
        &self.norm
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.norm.norm(x)
    }

    /// Matrix side length for matrix spaces.
    pub fn matrix_side(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::SymmetricMatrix | SpaceKind::SquareMatrix => side(self.dimension),
            _ => None,
        }
    }
}

/// A vector of a [`SpaceDescriptor`].
///
/// Obstacles and other ambient data use the same carrier; nothing beyond
/// length and finiteness is enforced here.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    space: Arc<SpaceDescriptor>,
    coords: Vec<f64>,
}

impl Element {
    pub fn new(space: Arc<SpaceDescriptor>, coords: Vec<f64>) -> Result<Self> {
        check_len("element coordinates", space.dimension(), coords.len())?;
        check_finite("element", &coords)?;
        Ok(Self { space, coords })
    }

    pub fn zeros(space: Arc<SpaceDescriptor>) -> Self {
        let coords = vec![0.0; space.dimension()];
        Self { space, coords }
    }

    pub fn space(&self) -> &Arc<SpaceDescriptor> {
        &self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.space.norm(&self.coords)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            space: Arc::clone(&self.space),
            coords: self.coords.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Same space, new coordinates.
    pub fn with_coords(&self, coords: Vec<f64>) -> Result<Self> {
        Self::new(Arc::clone(&self.space), coords)
    }

    pub fn distance(&self, other: &Element) -> Result<f64> {
        check_len("element coordinates", self.dimension(), other.dimension())?;
        let diff: Vec<f64> = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        Ok(self.space.norm(&diff))
    }
}
