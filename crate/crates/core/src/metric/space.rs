use crate::error::{check_finite, check_len, Error, Result};

const METRIC_TOL: f64 = 1e-12;

/// Finitely many points with a metric and positive point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    measure: Vec<f64>,
}

/// A closed ball `B(center, radius)` together with its dilation `λB`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
    pub dilated: Vec<usize>,
}

impl FiniteMetricMeasureSpace {
    /// `dist` is row-major `n × n`. Checks symmetry, zero diagonal,
    /// positivity off the diagonal and every triangle inequality.
    pub fn new(n: usize, dist: Vec<f64>, measure: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("a metric space needs at least one point".into()));
        }
        check_len("distance matrix entries", n * n, dist.len())?;
        check_len("measure", n, measure.len())?;
        check_finite("distance matrix", &dist)?;
        check_finite("measure", &measure)?;
        if let Some(m) = measure.iter().find(|m| !(**m > 0.0)) {
            return Err(Error::InvalidInput(format!("point masses must be positive, got {m}")));
        }
        let scale = dist.iter().fold(1.0_f64, |m, d| m.max(d.abs()));
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("d({i},{i}) must be zero")));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if i != j && !(d > 0.0) {
                    return Err(Error::InvalidInput(format!("d({i},{j}) = {d} must be positive")));
                }
                if (d - dist[j * n + i]).abs() > METRIC_TOL * scale {
                    return Err(Error::InvalidInput(format!("distance matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i * n + j] > dist[i * n + k] + dist[k * n + j] + METRIC_TOL * scale {
                        return Err(Error::InvalidInput(format!(
                            "triangle inequality fails for ({i},{j}) via {k}"
                        )));
                    }
                }
            }
        }
        Ok(Self { n, dist, measure })
    }

    pub fn from_rows(rows: &[Vec<f64>], measure: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("distance rows must form a square".into()));
        }
        Self::new(n, rows.concat(), measure)
    }

    /// Points on the real line with the induced metric.
    pub fn on_line(positions: &[f64], measure: Vec<f64>) -> Result<Self> {
        let n = positions.len();
        let dist = (0..n * n)
            .map(|k| (positions[k / n] - positions[k % n]).abs())
            .collect();
        Self::new(n, dist, measure)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn mass(&self, points: &[usize]) -> f64 {
        points.iter().map(|i| self.measure[*i]).sum()
    }

    /// Distinct positive pairwise distances, ascending.
    pub fn radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.distance(i, j))
            .collect();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    pub fn closed_ball(&self, center: usize, radius: f64) -> Vec<usize> {
        (0..self.n)
            .filter(|y| self.distance(center, *y) <= radius)
            .collect()
    }

    /// All closed balls with at least two points and radius in
    /// [`radii`](Self::radii). Balls with the same point set and dilation
    /// keep only the smallest radius, which gives the strongest inequality.
    pub fn ball_family(&self, lambda: f64) -> Vec<Ball> {
        let mut out: Vec<Ball> = Vec::new();
        for center in 0..self.n {
            for r in self.radii() {
                let members = self.closed_ball(center, r);
                if members.len() < 2 {
                    continue;
                }
                let dilated = self.closed_ball(center, lambda * r);
                if out
                    .iter()
                    .any(|b| b.members == members && b.dilated == dilated && b.radius <= r)
                {
                    continue;
                }
                out.push(Ball {
                    center,
                    radius: r,
                    members,
                    dilated,
                });
            }
        }
        out
    }
}
