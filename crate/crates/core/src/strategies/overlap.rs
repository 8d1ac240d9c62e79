use serde::{Deserialize, Serialize};

use crate::data::TaskField;
use crate::error::{Error, Result};
use crate::graph::metropolis_matrix;
use crate::graph::Graph;

/// Which global variables each agent estimates. Agent `k`'s local vector
/// holds the variables `interest[k]`, in that order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterestMap {
    pub variables: usize,
    pub interest: Vec<Vec<usize>>,
}

impl InterestMap {
    pub fn new(variables: usize, interest: Vec<Vec<usize>>) -> Result<Self> {
        let map = InterestMap { variables, interest };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, vars) in self.interest.iter().enumerate() {
            if vars.is_empty() {
                return Err(Error::Config(format!("agent {k} has no variables of interest")));
            }
            for (i, &v) in vars.iter().enumerate() {
                if v >= self.variables {
                    return Err(Error::Config(format!(
                        "agent {k} lists variable {v}, only {} exist",
                        self.variables
                    )));
                }
                if vars[..i].contains(&v) {
                    return Err(Error::Config(format!("agent {k} lists variable {v} twice")));
                }
            }
        }
        for v in 0..self.variables {
            if self.agents_of(v).is_empty() {
                return Err(Error::Config(format!("variable {v} is not estimated by any agent")));
            }
        }
        Ok(())
    }

    pub fn n_agents(&self) -> usize {
        self.interest.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.interest.iter().map(Vec::len).collect()
    }

    /// `(agent, local index)` pairs holding variable `v`.
    pub fn agents_of(&self, v: usize) -> Vec<(usize, usize)> {
        self.interest
            .iter()
            .enumerate()
            .filter_map(|(k, vars)| vars.iter().position(|&x| x == v).map(|j| (k, j)))
            .collect()
    }

    /// Restricts a global vector to each agent's variables.
    pub fn localize(&self, global: &[f64]) -> Result<TaskField> {
        if global.len() != self.variables {
            return Err(Error::Dimension(format!(
                "global vector has length {}, map has {} variables",
                global.len(),
                self.variables
            )));
        }
        let blocks: Vec<Vec<f64>> = self
            .interest
            .iter()
            .map(|vars| vars.iter().map(|&v| global[v]).collect())
            .collect();
        Ok(TaskField::from_blocks(&blocks))
    }
}

/// Per-variable combination weights on the interest subgraphs.
#[derive(Clone, Debug)]
pub struct OverlapCombiner {
    map: InterestMap,
    groups: Vec<VariableGroup>,
}

#[derive(Clone, Debug)]
struct VariableGroup {
    members: Vec<(usize, usize)>,
    // row-major |members| x |members|
    weights: Vec<f64>,
}

impl OverlapCombiner {
    /// Metropolis weights on each variable's interest subgraph. Fails when
    /// some subgraph is disconnected, since its agents could never agree.
    pub fn metropolis(graph: &Graph, map: InterestMap) -> Result<Self> {
        map.validate()?;
        if map.n_agents() != graph.n_agents() {
            return Err(Error::Dimension(format!(
                "interest map has {} agents, graph {}",
                map.n_agents(),
                graph.n_agents()
            )));
        }
        let mut groups = Vec::with_capacity(map.variables);
        for v in 0..map.variables {
            let members = map.agents_of(v);
            let agents: Vec<usize> = members.iter().map(|m| m.0).collect();
            if !graph.is_connected_within(&agents) {
                return Err(Error::Config(format!(
                    "interest subgraph of variable {v} (agents {agents:?}) is disconnected"
                )));
            }
            let mut edges = Vec::new();
            for (i, &k) in agents.iter().enumerate() {
                for (j, &l) in agents.iter().enumerate().skip(i + 1) {
                    if graph.has_edge(k, l) {
                        edges.push((i, j, 1.0));
                    }
                }
            }
            let sub = Graph::from_edges(agents.len(), &edges)?;
            let a = metropolis_matrix(&sub);
            let p = agents.len();
            let weights = (0..p * p).map(|idx| a[(idx / p, idx % p)]).collect();
            groups.push(VariableGroup { members, weights });
        }
        Ok(OverlapCombiner { map, groups })
    }

    pub fn map(&self) -> &InterestMap {
        &self.map
    }

    /// Weight `a^v_kl`, zero when either agent does not hold `v`.
    pub fn weight(&self, v: usize, k: usize, l: usize) -> f64 {
        let g = &self.groups[v];
        let pos = |a: usize| g.members.iter().position(|m| m.0 == a);
        match (pos(k), pos(l)) {
            (Some(i), Some(j)) => g.weights[i * g.members.len() + j],
            _ => 0.0,
        }
    }

    pub fn apply_into(&self, psi: &TaskField, out: &mut TaskField) {
        for g in &self.groups {
            let p = g.members.len();
            for (i, &(k, jk)) in g.members.iter().enumerate() {
                let row = &g.weights[i * p..(i + 1) * p];
                let mut acc = 0.0;
                for (&a, &(l, jl)) in row.iter().zip(&g.members) {
                    if a != 0.0 {
                        acc += a * psi.block(l)[jl];
                    }
                }
                out.block_mut(k)[jk] = acc;
            }
        }
    }
}
