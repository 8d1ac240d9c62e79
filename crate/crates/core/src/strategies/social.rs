use crate::data::{instantaneous_gradient_into, Samples, StreamModel, TaskField};
use crate::error::{Error, Result};
use crate::graph::{ClusterPartition, CombinationMatrix, Graph};

use super::overlap::OverlapCombiner;
use super::prox::{prox_l1_scalar, EdgeRegularizer, Penalty};

fn check_shape(a: &TaskField, b: &TaskField, what: &str) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what}: block sizes {:?} vs {:?}",
            a.sizes(),
            b.sizes()
        )))
    }
}

/// `psi_k = w_k - mu * grad Q_k(w_k; x_k)` for every agent.
pub fn self_learn(model: &StreamModel, w: &TaskField, samples: &Samples, mu: f64, psi: &mut TaskField) -> Result<()> {
    check_shape(w, &samples.regressors, "self-learning sample")?;
    check_shape(w, psi, "self-learning output")?;
    if model.sizes() != w.sizes() {
        return Err(Error::Dimension("model and estimate shapes differ".into()));
    }
    for k in 0..w.n_agents() {
        let wk = w.block(k);
        let out = psi.block_mut(k);
        instantaneous_gradient_into(model, wk, samples.regressors.block(k), samples.targets[k], out);
        for (o, x) in out.iter_mut().zip(wk) {
            *o = x - mu * *o;
        }
    }
    Ok(())
}

pub fn social_noncooperative(psi: &TaskField, out: &mut TaskField) {
    out.copy_from(psi);
}

/// `out_k = psi_k - mu_eta * sum_l c_kl (psi_k - psi_l)`.
pub fn social_smooth(psi: &TaskField, graph: &Graph, mu_eta: f64, out: &mut TaskField) {
    laplacian_into(psi, graph, out);
    for (o, p) in out.as_mut_slice().iter_mut().zip(psi.as_slice()) {
        *o = p - mu_eta * *o;
    }
}

/// `out = (L kron I) x` via neighbor differences.
fn laplacian_into(x: &TaskField, graph: &Graph, out: &mut TaskField) {
    for k in 0..x.n_agents() {
        let xk = x.block(k);
        let dst = out.block_mut(k);
        dst.iter_mut().for_each(|d| *d = 0.0);
        for &(l, c) in graph.neighbors(k) {
            for ((d, a), b) in dst.iter_mut().zip(xk).zip(x.block(l)) {
                *d += c * (a - b);
            }
        }
    }
}

/// `out = psi - mu_eta * r(L) psi` with `r(L) = sum_s beta_s L^s`, evaluated
/// through the S-hop neighbor recursion.
pub fn social_spectral(
    psi: &TaskField,
    graph: &Graph,
    coefficients: &[f64],
    mu_eta: f64,
    out: &mut TaskField,
) -> Result<()> {
    let s = coefficients
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidKernel("kernel needs at least one coefficient".into()))?;
    let mut prev = psi.clone();
    for (p, x) in prev.as_mut_slice().iter_mut().zip(psi.as_slice()) {
        *p = coefficients[s] * x;
    }
    let mut next = psi.clone();
    for hop in 1..=s {
        laplacian_into(&prev, graph, &mut next);
        let beta = coefficients[s - hop];
        for (n, x) in next.as_mut_slice().iter_mut().zip(psi.as_slice()) {
            *n += beta * x;
        }
        std::mem::swap(&mut prev, &mut next);
    }
    for ((o, p), h) in out.as_mut_slice().iter_mut().zip(psi.as_slice()).zip(prev.as_slice()) {
        *o = p - mu_eta * h;
    }
    Ok(())
}

/// Per agent and coordinate, the proximal point of the l1 edge penalty
/// with neighbors frozen at `psi`.
pub fn social_prox_l1(psi: &TaskField, reg: &EdgeRegularizer, mu_eta: f64, out: &mut TaskField) {
    prox_l1_into(psi, psi, reg, mu_eta, out);
}

fn prox_l1_into(center: &TaskField, anchors: &TaskField, reg: &EdgeRegularizer, mu_eta: f64, out: &mut TaskField) {
    let mut buf = Vec::new();
    for k in 0..center.n_agents() {
        let nb = reg.neighbors(k);
        let zk = center.block(k);
        let dst = out.block_mut(k);
        for j in 0..zk.len() {
            buf.clear();
            buf.extend(nb.iter().map(|&(l, rho)| (anchors.block(l)[j], rho)));
            dst[j] = prox_l1_scalar(zk[j], &mut buf, mu_eta);
        }
    }
}

/// Convex combination with a scalar doubly-stochastic `A`.
pub fn social_diffusion(psi: &TaskField, a: &CombinationMatrix, out: &mut TaskField) {
    a.apply_into(psi, out);
}

/// Block combination `w = A psi`.
pub fn social_subspace(psi: &TaskField, a: &CombinationMatrix, out: &mut TaskField) {
    a.apply_into(psi, out);
}

/// Per-variable convex combination among the agents sharing each variable.
pub fn social_overlapping(psi: &TaskField, combiner: &OverlapCombiner, out: &mut TaskField) {
    combiner.apply_into(psi, out);
}

/// Intra-cluster combination into `phi`, then the inter-cluster
/// regularization step into `out`.
pub fn social_clustered(
    psi: &TaskField,
    intra: &CombinationMatrix,
    reg: &EdgeRegularizer,
    mu_eta: f64,
    phi: &mut TaskField,
    out: &mut TaskField,
) {
    intra.apply_into(psi, phi);
    match reg.penalty() {
        Penalty::L1 => prox_l1_into(phi, phi, reg, mu_eta, out),
        Penalty::Quadratic => {
            for k in 0..phi.n_agents() {
                let pk = phi.block(k);
                let dst = out.block_mut(k);
                dst.copy_from_slice(pk);
                for &(l, rho) in reg.neighbors(k) {
                    for ((d, a), b) in dst.iter_mut().zip(pk).zip(phi.block(l)) {
                        *d -= mu_eta * rho * (a - b);
                    }
                }
            }
        }
    }
}

/// Intra-cluster Metropolis weights: edges across clusters are dropped and
/// every cluster must stay connected.
pub fn intra_cluster_metropolis(graph: &Graph, partition: &ClusterPartition) -> Result<CombinationMatrix> {
    if partition.n_agents() != graph.n_agents() {
        return Err(Error::Dimension(format!(
            "partition has {} agents, graph {}",
            partition.n_agents(),
            graph.n_agents()
        )));
    }
    for q in 0..partition.n_clusters() {
        let members: Vec<usize> = partition.members(q).collect();
        if !graph.is_connected_within(&members) {
            return Err(Error::Config(format!("cluster {q} is disconnected")));
        }
    }
    let sub = graph.filter_edges(|k, l| partition.same_cluster(k, l));
    Ok(CombinationMatrix::Scalar(crate::graph::metropolis_matrix(&sub)))
}
