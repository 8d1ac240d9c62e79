use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClusterPartition, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    L1,
    Quadratic,
}

/// Symmetric per-edge weights `rho_kl` supported on graph edges.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRegularizer {
    penalty: Penalty,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl EdgeRegularizer {
    /// Same weight on every edge for which `keep(k, l)` holds.
    pub fn uniform(graph: &Graph, rho: f64, penalty: Penalty, keep: impl Fn(usize, usize) -> bool) -> Result<Self> {
        check_rho(rho)?;
        let edges: Vec<_> = graph
            .edges()
            .into_iter()
            .filter(|&(k, l, _)| keep(k, l))
            .map(|(k, l, _)| (k, l, rho))
            .collect();
        Self::from_edges(graph, &edges, penalty)
    }

    /// Explicit `(k, l, rho)` triples; each undirected edge may appear once.
    pub fn from_edges(graph: &Graph, edges: &[(usize, usize, f64)], penalty: Penalty) -> Result<Self> {
        let n = graph.n_agents();
        let mut neighbors = vec![Vec::new(); n];
        for &(k, l, rho) in edges {
            check_rho(rho)?;
            if k >= n || l >= n || !graph.has_edge(k, l) {
                return Err(Error::Config(format!(
                    "regularizer edge ({k}, {l}) is not a graph edge"
                )));
            }
            if neighbors[k].iter().any(|&(j, _)| j == l) {
                return Err(Error::Config(format!("regularizer edge ({k}, {l}) listed twice")));
            }
            if rho > 0.0 {
                neighbors[k].push((l, rho));
                neighbors[l].push((k, rho));
            }
        }
        neighbors.iter_mut().for_each(|v| v.sort_by_key(|&(l, _)| l));
        Ok(EdgeRegularizer { penalty, neighbors })
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    pub fn n_agents(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, k: usize) -> &[(usize, f64)] {
        &self.neighbors[k]
    }

    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.neighbors[k]
            .iter()
            .find(|&&(j, _)| j == l)
            .map_or(0.0, |&(_, r)| r)
    }

    /// Edges with nonzero weight that join agents of the same cluster.
    pub fn intra_cluster_edges(&self, partition: &ClusterPartition) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (k, nb) in self.neighbors.iter().enumerate() {
            for &(l, _) in nb {
                if k < l && partition.same_cluster(k, l) {
                    out.push((k, l));
                }
            }
        }
        out
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "edge weight rho must be finite and >= 0, got {rho}"
        )))
    }
}

/// Exact minimizer of `sum_j rho_j |x - a_j| + (x - z)^2 / (2 gamma)`.
///
/// `anchors` holds `(a_j, rho_j)` pairs and is sorted in place. The
/// objective is convex and piecewise quadratic, so either the stationary
/// point of one open interval between breakpoints lies inside it, or some
/// breakpoint has a subdifferential containing zero.
pub fn prox_l1_scalar(z: f64, anchors: &mut [(f64, f64)], gamma: f64) -> f64 {
    if gamma == 0.0 || anchors.is_empty() {
        return z;
    }
    anchors.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = anchors.iter().map(|a| a.1).sum();
    // cum = weight of anchors strictly left of the current interval
    let mut cum = 0.0;
    let mut lower = f64::NEG_INFINITY;
    let mut i = 0;
    while i <= anchors.len() {
        let upper = anchors.get(i).map_or(f64::INFINITY, |a| a.0);
        let x = z - gamma * (2.0 * cum - total);
        if x > lower && x < upper {
            return x;
        }
        if i == anchors.len() {
            break;
        }
        // merge coincident anchors into one breakpoint
        let mut w = 0.0;
        let mut j = i;
        while j < anchors.len() && anchors[j].0 == upper {
            w += anchors[j].1;
            j += 1;
        }
        let base = (upper - z) / gamma;
        let left = 2.0 * cum - total + base;
        let right = 2.0 * (cum + w) - total + base;
        if left <= 0.0 && right >= 0.0 {
            return upper;
        }
        cum += w;
        lower = upper;
        i = j;
    }
    // Rounding can make every test miss by an ulp; fall back to the best breakpoint.
    anchors
        .iter()
        .map(|a| a.0)
        .chain(std::iter::once(z))
        .min_by(|&x, &y| prox_objective(x, z, anchors, gamma).total_cmp(&prox_objective(y, z, anchors, gamma)))
        .unwrap_or(z)
}

pub fn prox_objective(x: f64, z: f64, anchors: &[(f64, f64)], gamma: f64) -> f64 {
    anchors.iter().map(|&(a, r)| r * (x - a).abs()).sum::<f64>() + (x - z).powi(2) / (2.0 * gamma)
}
