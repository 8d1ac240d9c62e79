//! Graphs, Laplacian spectra, spectral kernels, combination matrices and
//! subspaces.
//!
//! Everything here is immutable once built and can be shared between
//! concurrent experiment runs.

mod combination;
mod kernel;
mod spectrum;
mod subspace;

pub(crate) use combination::metropolis_matrix;
pub use combination::{
    check_feasibility, check_feasibility_with, laplacian_rule_weights, metropolis_weights, spectral_norm,
    spectral_radius, CombinationMatrix, FeasibilityReport, DEFAULT_FEASIBILITY_POWER,
};
pub use kernel::{
    apply_spectral_kernel, chebyshev_fit, polynomial_of_laplacian, ChebyshevFit, KernelFn, SpectralKernel,
    DEFAULT_CHEBYSHEV_DEGREE,
};
pub use spectrum::{
    build_laplacian, graph_fourier, inverse_graph_fourier, smoothness, smoothness_edge_sum, smoothness_spectral,
    Spectrum,
};
pub use subspace::{
    cluster_subspace, consensus_subspace, laplacian_band_subspace, projector, ClusterPartition, Subspace,
};

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected weighted graph with symmetric nonnegative adjacency `C`
/// and zero diagonal.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: DMatrix<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
    connected: bool,
}

impl Graph {
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "adjacency must be a non-empty square matrix, got {}x{}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        for k in 0..n {
            if adjacency[(k, k)] != 0.0 {
                return Err(Error::InvalidGraph(format!("self loop at agent {k}")));
            }
            for l in 0..n {
                let c = adjacency[(k, l)];
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "weight c[{k},{l}] = {c} must be finite and nonnegative"
                    )));
                }
                if c != adjacency[(l, k)] {
                    return Err(Error::InvalidGraph(format!("adjacency is not symmetric at ({k},{l})")));
                }
            }
        }
        let neighbors: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|k| {
                (0..n)
                    .filter(|&l| adjacency[(k, l)] > 0.0)
                    .map(|l| (l, adjacency[(k, l)]))
                    .collect()
            })
            .collect();
        let connected = reachable_count(&neighbors, 0) == n;
        Ok(Graph {
            adjacency,
            neighbors,
            connected,
        })
    }

    /// Builds a graph from `(k, l, c_kl)` triples with 0-based indices.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one agent".into()));
        }
        let mut c = DMatrix::zeros(n, n);
        for &(k, l, w) in edges {
            if k >= n || l >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({k},{l}) out of range for {n} agents"
                )));
            }
            if k == l {
                return Err(Error::InvalidGraph(format!("self loop at agent {k}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!("edge ({k},{l}) has invalid weight {w}")));
            }
            if c[(k, l)] != 0.0 && c[(k, l)] != w {
                return Err(Error::InvalidGraph(format!(
                    "edge ({k},{l}) listed twice with different weights"
                )));
            }
            c[(k, l)] = w;
            c[(l, k)] = w;
        }
        Self::from_adjacency(c)
    }

    pub fn path(n: usize, weight: f64) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|k| (k - 1, k, weight)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn ring(n: usize, weight: f64) -> Result<Self> {
        if n < 3 {
            return Self::path(n, weight);
        }
        let edges: Vec<_> = (0..n).map(|k| (k, (k + 1) % n, weight)).collect();
        Self::from_edges(n, &edges)
    }

    /// Star with agent 0 as the hub.
    pub fn star(leaves: usize, weight: f64) -> Result<Self> {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l, weight)).collect();
        Self::from_edges(leaves + 1, &edges)
    }

    pub fn complete(n: usize, weight: f64) -> Result<Self> {
        let mut edges = Vec::new();
        for k in 0..n {
            for l in k + 1..n {
                edges.push((k, l, weight));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Agents uniform in the unit square, linked when closer than `radius`,
    /// with Gaussian kernel weights `exp(-d^2 / (2 sigma^2))`.
    pub fn random_geometric<R: Rng + ?Sized>(
        n: usize,
        radius: f64,
        sigma: f64,
        rng: &mut R,
    ) -> Result<(Self, Vec<[f64; 2]>)> {
        if !(radius > 0.0) || !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius and sigma must be positive, got {radius} and {sigma}"
            )));
        }
        let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let mut edges = Vec::new();
        for k in 0..n {
            for l in k + 1..n {
                let dx = positions[k][0] - positions[l][0];
                let dy = positions[k][1] - positions[l][1];
                let d2 = dx * dx + dy * dy;
                if d2 <= radius * radius {
                    edges.push((k, l, (-d2 / (2.0 * sigma * sigma)).exp()));
                }
            }
        }
        Ok((Self::from_edges(n, &edges)?, positions))
    }

    pub fn n_agents(&self) -> usize {
        self.neighbors.len()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.adjacency[(k, l)]
    }

    pub fn has_edge(&self, k: usize, l: usize) -> bool {
        k != l && self.adjacency[(k, l)] > 0.0
    }

    /// Neighbors of `k` (excluding `k`) with their weights.
    pub fn neighbors(&self, k: usize) -> &[(usize, f64)] {
        &self.neighbors[k]
    }

    /// Number of neighbors of `k`, excluding `k`.
    pub fn degree(&self, k: usize) -> usize {
        self.neighbors[k].len()
    }

    pub fn weighted_degree(&self, k: usize) -> f64 {
        self.neighbors[k].iter().map(|(_, c)| c).sum()
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Edges `(k, l, c_kl)` with `k < l`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (k, nb) in self.neighbors.iter().enumerate() {
            for &(l, c) in nb {
                if k < l {
                    out.push((k, l, c));
                }
            }
        }
        out
    }

    /// Graph restricted to edges for which `keep(k, l)` holds.
    pub fn filter_edges(&self, keep: impl Fn(usize, usize) -> bool) -> Graph {
        let edges: Vec<_> = self.edges().into_iter().filter(|&(k, l, _)| keep(k, l)).collect();
        Graph::from_edges(self.n_agents(), &edges).expect("subgraph of a valid graph")
    }

    /// True when the agents in `members` are connected using only edges among them.
    pub fn is_connected_within(&self, members: &[usize]) -> bool {
        if members.len() <= 1 {
            return true;
        }
        let mut inside = vec![false; self.n_agents()];
        members.iter().for_each(|&k| inside[k] = true);
        let mut seen = vec![false; self.n_agents()];
        let mut queue = VecDeque::from([members[0]]);
        seen[members[0]] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for &(l, _) in &self.neighbors[k] {
                if inside[l] && !seen[l] {
                    seen[l] = true;
                    count += 1;
                    queue.push_back(l);
                }
            }
        }
        count == members.len()
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            n: self.n_agents(),
            edges: self.edges(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(s)?;
        doc.build()
    }
}

/// JSON form `{"n": N, "edges": [[k, l, c_kl], ...]}` with 0-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphDoc {
    pub fn build(&self) -> Result<Graph> {
        Graph::from_edges(self.n, &self.edges)
    }
}

fn reachable_count(neighbors: &[Vec<(usize, f64)>], start: usize) -> usize {
    let mut seen = vec![false; neighbors.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(k) = queue.pop_front() {
        for &(l, _) in &neighbors[k] {
            if !seen[l] {
                seen[l] = true;
                count += 1;
                queue.push_back(l);
            }
        }
    }
    count
}
