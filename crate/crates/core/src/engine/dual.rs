//! Dual coordinate ascent for separable convex programs with linear
//! inequality constraints,
//!
//! ```text
//! minimize   Σ_i φ_i(x_i)
//! subject to a_k · x ≥ b_k   for every row k,
//! ```
//!
//! where each `φ_i` is either a weighted power `w |x|^p` or a proximal term
//! `(ρ/2)(x − c)²`. Both have explicit conjugate maximizers, so the primal
//! point is a closed-form function of `s = Aᵀλ`. Each step maximizes the
//! dual over one multiplier `λ_k ≥ 0`, which is a monotone scalar root
//! problem (Hildreth's method for general separable objectives).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coordinate {
    /// `weight · |x|^exponent` with `exponent > 1`.
    Power { weight: f64, exponent: f64 },
    /// `(weight/2)(x − center)²`.
    Proximal { center: f64, weight: f64 },
}

impl Coordinate {
    /// Minimizer of `φ(x) − s x`.
    #[inline]
    fn response(&self, s: f64) -> f64 {
        match *self {
            Coordinate::Power { weight, exponent } => {
                if s == 0.0 {
                    0.0
                } else {
                    s.signum() * (s.abs() / (exponent * weight)).powf(1.0 / (exponent - 1.0))
                }
            }
            Coordinate::Proximal { center, weight } => center + s / weight,
        }
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            Coordinate::Power { weight, exponent } => weight * x.abs().powf(exponent),
            Coordinate::Proximal { center, weight } => 0.5 * weight * (x - center) * (x - center),
        }
    }
}

/// One sparse inequality `Σ coeffs · x ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub entries: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Row {
    pub fn new(entries: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self { entries, rhs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|(i, a)| a * x[*i]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SeparableProgram {
    pub coords: Vec<Coordinate>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    pub max_sweeps: usize,
    /// Absolute violation allowed on every row (after scaling by the row's
    /// magnitude).
    pub tol_feasibility: f64,
    /// Relative duality gap `Σ λ_k · slack_k` at exit.
    pub tol_gap: f64,
    /// Seed for the sweep order; 0 keeps the natural order.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DualOutcome {
    pub x: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub objective: f64,
    pub max_violation: f64,
    pub gap: f64,
    pub sweeps: usize,
}

impl SeparableProgram {
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.coords.iter().zip(x).map(|(c, v)| c.value(*v)).sum()
    }

    /// Largest row violation, each row scaled by `max(1, ‖a_k‖∞)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.rhs - r.eval(x)).max(0.0) / row_scale(r))
            .fold(0.0, f64::max)
    }

    pub fn solve(&self, opts: DualOptions) -> Result<DualOutcome> {
        self.solve_from(None, opts)
    }

    /// Runs coordinate ascent, optionally warm-started from multipliers of
    /// a previous, structurally identical program.
    pub fn solve_from(&self, warm: Option<&[f64]>, opts: DualOptions) -> Result<DualOutcome> {
        let n = self.coords.len();
        for r in &self.rows {
            if r.entries.iter().any(|(i, _)| *i >= n) {
                return Err(Error::InvalidInput("constraint row refers to a missing coordinate".into()));
            }
        }
        let mut lambda = match warm {
            Some(w) if w.len() == self.rows.len() => w.iter().map(|v| v.max(0.0)).collect(),
            _ => vec![0.0; self.rows.len()],
        };
        let mut s = vec![0.0; n];
        for (r, l) in self.rows.iter().zip(&lambda) {
            for (i, a) in &r.entries {
                s[*i] += a * l;
            }
        }
        let mut x: Vec<f64> = self.coords.iter().zip(&s).map(|(c, si)| c.response(*si)).collect();

        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        if opts.seed != 0 {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
        }

        let mut last = (f64::INFINITY, f64::INFINITY);
        for sweep in 0..=opts.max_sweeps {
            let (viol, gap, obj) = self.certificate(&x, &lambda);
            last = (viol, gap);
            if viol <= opts.tol_feasibility && gap <= opts.tol_gap * obj.abs().max(1e-300) {
                return Ok(DualOutcome {
                    x,
                    multipliers: lambda,
                    objective: obj,
                    max_violation: viol,
                    gap,
                    sweeps: sweep,
                });
            }
            if sweep == opts.max_sweeps {
                break;
            }
            for &k in &order {
                self.update(k, &mut lambda, &mut s, &mut x);
            }
        }
        Err(Error::NotConverged {
            iterations: opts.max_sweeps,
            residual: last.0.max(last.1),
            best: Some(x),
        })
    }

    fn certificate(&self, x: &[f64], lambda: &[f64]) -> (f64, f64, f64) {
        let mut viol = 0.0_f64;
        let mut gap = 0.0;
        for (r, l) in self.rows.iter().zip(lambda) {
            let slack = r.eval(x) - r.rhs;
            viol = viol.max((-slack).max(0.0) / row_scale(r));
            gap += l * slack.abs();
        }
        (viol, gap, self.objective(x))
    }

    /// Exact maximization of the dual over `λ_k`.
    fn update(&self, k: usize, lambda: &mut [f64], s: &mut [f64], x: &mut [f64]) {
        let row = &self.rows[k];
        let lk = lambda[k];
        // h(δ) = a·x(s + aδ) − b is nondecreasing in δ
        let h = |delta: f64| -> f64 {
            row.entries
                .iter()
                .map(|(i, a)| a * self.coords[*i].response(s[*i] + a * delta))
                .sum::<f64>()
                - row.rhs
        };
        let h0 = row.eval(x) - row.rhs;
        let delta = if h0 >= 0.0 {
            // constraint slack: shrink λ_k, possibly to zero
            if lk == 0.0 {
                return;
            }
            if h(-lk) >= 0.0 {
                -lk
            } else {
                root(&h, -lk, 0.0)
            }
        } else {
            let mut hi = self.initial_step(row, -h0);
            let mut guard = 0;
            while h(hi) < 0.0 {
                hi *= 2.0;
                guard += 1;
                if guard > 2000 || !hi.is_finite() {
                    return;
                }
            }
            root(&h, 0.0, hi)
        };
        if delta == 0.0 {
            return;
        }
        lambda[k] = (lk + delta).max(0.0);
        let delta = lambda[k] - lk;
        for (i, a) in &row.entries {
            s[*i] += a * delta;
            x[*i] = self.coords[*i].response(s[*i]);
        }
    }

    /// A first bracket guess from the linearization at `x`.
    fn initial_step(&self, row: &Row, deficit: f64) -> f64 {
        let curvature: f64 = row
            .entries
            .iter()
            .map(|(i, a)| match self.coords[*i] {
                Coordinate::Proximal { weight, .. } => a * a / weight,
                Coordinate::Power { weight, .. } => a * a / weight,
            })
            .sum();
        (deficit / curvature.max(1e-300)).max(1e-300)
    }
}

fn row_scale(r: &Row) -> f64 {
    r.entries.iter().fold(1.0_f64, |m, (_, a)| m.max(a.abs()))
}

/// Root of a nondecreasing `h` on `[lo, hi]` with `h(lo) ≤ 0 ≤ h(hi)`,
/// by the Illinois variant of regula falsi with a bisection safeguard.
fn root(h: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = h(lo);
    let mut f_hi = h(hi);
    if f_lo >= 0.0 {
        return lo;
    }
    if f_hi <= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for iter in 0..200 {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        let mut mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(mid > lo && mid < hi) || iter % 8 == 7 {
            mid = 0.5 * (lo + hi);
        }
        let f_mid = h(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    // the upper end keeps the row satisfied
    hi
}
