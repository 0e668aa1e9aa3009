use crate::error::{check_finite, Error, Result};
use crate::metric::space::FiniteMetricMeasureSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

/// An undirected graph with positive edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertices: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidInput("a graph needs at least one vertex".into()));
        }
        if edges.is_empty() {
            return Err(Error::InvalidInput("a graph needs at least one edge".into()));
        }
        let lengths: Vec<f64> = edges.iter().map(|e| e.length).collect();
        check_finite("edge lengths", &lengths)?;
        for e in &edges {
            if e.from >= vertices || e.to >= vertices {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) refers to a missing vertex",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(Error::InvalidInput(format!("self-loop at vertex {}", e.from)));
            }
            if !(e.length > 0.0) {
                return Err(Error::InvalidInput(format!("edge length must be positive, got {}", e.length)));
            }
        }
        Ok(Self { vertices, edges })
    }

    /// A path `0 – 1 – … – (lengths.len())`.
    pub fn path(lengths: &[f64]) -> Result<Self> {
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(i, l)| Edge {
                from: i,
                to: i + 1,
                length: *l,
            })
            .collect();
        Self::new(lengths.len() + 1, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertices];
        for e in &self.edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Shortest-path distances (Floyd–Warshall) as a metric measure space.
    pub fn shortest_path_space(&self, measure: Vec<f64>) -> Result<FiniteMetricMeasureSpace> {
        if !self.is_connected() {
            return Err(Error::Precondition("graph is not connected".into()));
        }
        let n = self.vertices;
        let mut d = vec![f64::INFINITY; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        for e in &self.edges {
            let (a, b) = (e.from, e.to);
            d[a * n + b] = d[a * n + b].min(e.length);
            d[b * n + a] = d[a * n + b];
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i * n + k] + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        FiniteMetricMeasureSpace::new(n, d, measure)
    }
}
