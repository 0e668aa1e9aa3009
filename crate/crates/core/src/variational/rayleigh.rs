//! Rayleigh quotients `‖g_u‖_W / ‖u‖_V` over cones.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::engine::descent::EnergyOracle;
use crate::engine::rayleigh::{inverse_power, rayleigh_iterate, HomogeneousTerm};
use crate::error::{check_len, Error, Result};
use crate::relation::{GradientRelation, PoincareBound, RelationKind, VANISHING_GRADIENT_RTOL};
use crate::space::{Element, NormSpec};
use crate::variational::feasible::{ConeSpec, ReducedSet};

/// Scalings used to probe closure of a cone under positive multiples.
pub const SCALING_PROBES: [f64; 3] = [0.5, 2.0, 10.0];

/// `‖g_u‖_W / ‖u‖_V`.
pub fn rayleigh_quotient(rel: &GradientRelation, u: &Element, cfg: &SolverConfig) -> Result<f64> {
    let nu = u.norm();
    if nu == 0.0 {
        return Err(Error::InvalidInput("the Rayleigh quotient of 0 is undefined".into()));
    }
    Ok(rel.minimal_gradient(u, cfg)?.norm() / nu)
}

struct NumeratorPower<'a> {
    rel: &'a GradientRelation,
    red: &'a ReducedSet,
    cfg: &'a SolverConfig,
}

impl EnergyOracle for NumeratorPower<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        self.value_and_gradient(z).0
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.value_and_gradient(z).1
    }

    fn value_and_gradient(&self, z: &[f64]) -> (f64, Vec<f64>) {
        match self.rel.energy(&self.red.expand(z), self.cfg) {
            Ok((v, g)) => (v, self.red.restrict(&g)),
            Err(_) => (f64::NAN, vec![0.0; z.len()]),
        }
    }
}

struct DomainPower<'a> {
    norm: &'a NormSpec,
    red: &'a ReducedSet,
}

impl EnergyOracle for DomainPower<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        self.norm.power(&self.red.expand(z))
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.red.restrict(&self.norm.power_gradient(&self.red.expand(z)))
    }
}

/// Diagonal weights `m` with `‖v‖² = Σ m_i v_i²`, when the norm has that form.
fn diagonal_mass(norm: &NormSpec, dim: usize) -> Option<Vec<f64>> {
    match norm {
        NormSpec::Euclidean | NormSpec::WeightedLp { .. } | NormSpec::BlockLp { .. } | NormSpec::Schatten { .. }
            if norm.is_quadratic() =>
        {
            Some(norm.power_gradient(&vec![1.0; dim]).iter().map(|g| 0.5 * g).collect())
        }
        _ => None,
    }
}

fn normalized(rel: &GradientRelation, u: Vec<f64>) -> Result<Element> {
    let e = Element::new(Arc::clone(rel.domain()), u)?;
    let n = e.norm();
    if !(n > 0.0) {
        return Err(Error::InvalidInput("the minimizing direction vanished".into()));
    }
    Ok(e.scaled(1.0 / n))
}

/// Minimizes `‖g_u‖_W / ‖u‖_V` over the nonzero elements of the cone.
/// Returns `u` with `‖u‖_V = 1` and the quotient at `u`.
///
/// Quadratic norms with a linear relation over a coordinate subspace use
/// inverse iteration on `FᵀWF`. Otherwise the quotient is decreased by
/// normalized projected gradient steps, which finds a critical value.
pub fn minimize_rayleigh(rel: &GradientRelation, cone: &ConeSpec, cfg: &SolverConfig) -> Result<(Element, f64)> {
    cfg.validate()?;
    let n = rel.domain().dimension();
    check_len("cone", n, cone.dimension())?;
    let red = ReducedSet::new(cone.set(), &vec![0.0; n])?;
    let nf = red.free().len();
    if nf == 0 {
        return Err(Error::InvalidInput("the cone is {0}".into()));
    }
    let subspace = red.is_box()
        && red.lower.iter().all(|v| *v == f64::NEG_INFINITY)
        && red.upper.iter().all(|v| *v == f64::INFINITY);
    let mass = diagonal_mass(rel.domain().norm_spec(), n);

    let u = match (rel.kind(), mass) {
        (RelationKind::LinearGraph(op), Some(mass)) if subspace && rel.codomain().norm_spec().is_quadratic() => {
            let norm = rel.codomain().norm_spec();
            let apply = |z: &[f64], y: &mut [f64]| {
                let v = red.expand(z);
                let g = op.apply_transpose_vec(&norm.power_gradient(&op.apply_vec(&v)));
                for (yi, gi) in y.iter_mut().zip(red.restrict(&g)) {
                    *yi = 0.5 * gi;
                }
            };
            let pair = inverse_power(apply, &red.restrict(&mass), cfg).map_err(|e| match e {
                Error::Indefinite => Error::RegularityViolation { norm: 1.0 },
                other => other,
            })?;
            red.expand(&pair.vector)
        }
        _ => {
            let num = NumeratorPower { rel, red: &red, cfg };
            let den = DomainPower {
                norm: rel.domain().norm_spec(),
                red: &red,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let start: Vec<f64> = (0..nf).map(|_| 1.0 + 0.5 * rng.gen::<f64>()).collect();
            let out = rayleigh_iterate(
                &HomogeneousTerm {
                    power: &num,
                    degree: rel.codomain().norm_spec().exponent(),
                },
                &HomogeneousTerm {
                    power: &den,
                    degree: rel.domain().norm_spec().exponent(),
                },
                &red,
                &start,
                cfg,
            )?;
            red.expand(&out.point)
        }
    };
    let u = normalized(rel, u)?;
    let g = rel.minimal_gradient(&u, cfg)?.norm();
    if g <= VANISHING_GRADIENT_RTOL * u.norm() {
        return Err(Error::RegularityViolation { norm: u.norm() });
    }
    let value = rayleigh_quotient(rel, &u, cfg)?;
    Ok((u, value))
}

/// Empirical evidence that a cone is a regular Rellich–Kondrachov cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    /// Every sample stays in the cone under the probe scalings.
    pub scaling_closed: bool,
    /// No nonzero sample has a vanishing minimal gradient.
    pub regular: bool,
    /// Indices of nonzero samples with vanishing minimal gradient.
    pub violations: Vec<usize>,
    /// Indices of samples outside the cone.
    pub outside: Vec<usize>,
    /// Largest `‖u‖_V / ‖g_u‖_W` over the regular samples.
    pub poincare: PoincareBound,
    /// The cone is `{0}` or every sample is zero.
    pub degenerate: bool,
}

pub fn verify_rk_cone(
    rel: &GradientRelation,
    cone: &ConeSpec,
    samples: &[Element],
    cfg: &SolverConfig,
) -> Result<ConeReport> {
    let n = rel.domain().dimension();
    check_len("cone", n, cone.dimension())?;
    let tol = cfg.tol_feasibility;
    let mut report = ConeReport {
        scaling_closed: true,
        regular: true,
        violations: Vec::new(),
        outside: Vec::new(),
        poincare: PoincareBound::Bounded(0.0),
        degenerate: cone.set().fixed_mask().iter().all(|f| *f),
    };
    let mut best = 0.0_f64;
    let mut nonzero = 0;
    for (k, u) in samples.iter().enumerate() {
        check_len("sample", n, u.dimension())?;
        let set = cone.set();
        if !set.contains(u.coords(), tol)? {
            report.outside.push(k);
            continue;
        }
        for alpha in SCALING_PROBES {
            let scaled = u.scaled(alpha);
            if !set.contains(scaled.coords(), tol * alpha.max(1.0))? {
                report.scaling_closed = false;
            }
        }
        let nu = u.norm();
        if nu == 0.0 {
            continue;
        }
        nonzero += 1;
        let ng = rel.minimal_gradient(u, cfg)?.norm();
        if ng <= VANISHING_GRADIENT_RTOL * nu {
            report.violations.push(k);
        } else {
            best = best.max(nu / ng);
        }
    }
    report.regular = report.violations.is_empty();
    report.degenerate |= nonzero == 0;
    report.poincare = if report.regular {
        PoincareBound::Bounded(best)
    } else {
        PoincareBound::Unbounded
    };
    Ok(report)
}
