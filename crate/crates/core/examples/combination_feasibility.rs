//! Metropolis and Laplacian-rule combination matrices, the feasibility
//! report against the consensus and a cluster subspace, and an infeasible A.

use nalgebra::DMatrix;
use netmtl::graph::{
    check_feasibility, check_feasibility_with, cluster_subspace, consensus_subspace, laplacian_rule_weights,
    metropolis_weights, ClusterPartition, CombinationMatrix, Graph,
};

fn main() -> netmtl::Result<()> {
    let graph = Graph::ring(10, 1.0)?;
    let u = consensus_subspace(10, 1)?;
    for (name, a) in [
        ("metropolis", metropolis_weights(&graph)?),
        ("laplacian rule", laplacian_rule_weights(&graph)?),
    ] {
        let r = check_feasibility_with(&a, &u, &graph, 5)?;
        println!(
            "{name}: rho(A - P_U) = {:.4}, ||A^i - P_U|| for i = 1..5: {:.4?}, feasible {}",
            r.spectral_radius,
            r.power_norms,
            r.passed()
        );
    }

    let partition = ClusterPartition::from_sizes(&[5, 5])?;
    let intra = netmtl::strategies::intra_cluster_metropolis(&graph, &partition)?;
    let report = check_feasibility(
        &intra,
        &cluster_subspace(&partition, 1)?,
        &graph.filter_edges(|k, l| partition.same_cluster(k, l)),
    )?;
    println!(
        "intra-cluster Metropolis vs cluster subspace: feasible {}",
        report.passed()
    );

    let identity = CombinationMatrix::Scalar(DMatrix::identity(10, 10));
    let report = check_feasibility(&identity, &u, &graph)?;
    println!("A = I vs consensus: violated {:?}", report.failures());
    Ok(())
}
