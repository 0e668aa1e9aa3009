//! Uncentred discrete Hardy–Littlewood maximal function.
//!
//! Balls are closed, centred at grid nodes, with radii `k·h` for
//! `k = 0, 1, …` up to the grid diameter; `k = 0` is the singleton ball.
//! The value at a node is the largest counting-measure average over all
//! balls that contain it.

use crate::error::{Error, Result};
use crate::grid::domain::GridDomain;

/// Nodes sorted by squared index distance to `centre` (ties by node id)
/// with those squared distances.
fn sorted_by_distance(dom: &GridDomain, centre: usize) -> Vec<(u64, usize)> {
    let c = dom.multi_index(centre);
    let mut out: Vec<(u64, usize)> = (0..dom.node_count())
        .map(|n| {
            let d2 = dom
                .multi_index(n)
                .iter()
                .zip(&c)
                .map(|(a, b)| {
                    let d = *a as i64 - *b as i64;
                    (d * d) as u64
                })
                .sum();
            (d2, n)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Prefix lengths of the balls of radius `0, h, 2h, …` in a sorted list.
fn ball_sizes(sorted: &[(u64, usize)]) -> Vec<usize> {
    let max_d2 = sorted.last().map_or(0, |s| s.0);
    let mut sizes = Vec::new();
    let mut k: u64 = 0;
    let mut idx = 0;
    loop {
        while idx < sorted.len() && sorted[idx].0 <= k * k {
            idx += 1;
        }
        if sizes.last() != Some(&idx) {
            sizes.push(idx);
        }
        if k * k >= max_d2 {
            break;
        }
        k += 1;
    }
    sizes
}

/// The maximizing ball of one node, as `(centre, size)`; its members are
/// the first `size` nodes in distance order from `centre`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallRef {
    pub centre: usize,
    pub size: usize,
}

pub(crate) fn maximal_with_balls(v: &[f64], dom: &GridDomain) -> (Vec<f64>, Vec<BallRef>) {
    let n = dom.node_count();
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut arg = vec![BallRef { centre: 0, size: 1 }; n];
    for centre in 0..n {
        let sorted = sorted_by_distance(dom, centre);
        let sizes = ball_sizes(&sorted);
        let mut prefix = vec![0.0; n + 1];
        for (k, (_, node)) in sorted.iter().enumerate() {
            prefix[k + 1] = prefix[k] + v[*node];
        }
        // suffix maximum over balls: position j lies in every ball of size > j
        let mut run = f64::NEG_INFINITY;
        let mut run_size = 0;
        let mut b = sizes.len();
        for j in (0..n).rev() {
            while b > 0 && sizes[b - 1] > j {
                let s = sizes[b - 1];
                let avg = prefix[s] / s as f64;
                if avg > run {
                    run = avg;
                    run_size = s;
                }
                b -= 1;
            }
            let node = sorted[j].1;
            if run > best[node] {
                best[node] = run;
                arg[node] = BallRef {
                    centre,
                    size: run_size,
                };
            }
        }
    }
    (best, arg)
}

pub(crate) fn ball_members(dom: &GridDomain, ball: BallRef) -> Vec<usize> {
    sorted_by_distance(dom, ball.centre)
        .into_iter()
        .take(ball.size)
        .map(|(_, n)| n)
        .collect()
}

pub fn maximal_function(v: &[f64], dom: &GridDomain) -> Result<Vec<f64>> {
    if v.len() != dom.node_count() {
        return Err(Error::DimensionMismatch {
            what: "nodal field",
            expected: dom.node_count(),
            found: v.len(),
        });
    }
    if let Some(x) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "maximal function needs a finite nonnegative field, found {x}"
        )));
    }
    Ok(maximal_with_balls(v, dom).0)
}
