//! Clustered multitask learning: Metropolis averaging inside two clusters
//! and an l1 (or quadratic) coupling across the inter-cluster edges. The
//! two clusters have different tasks here, so any coupling adds bias: the
//! l1 bias saturates once the boundary agents fuse, the quadratic bias
//! grows smoothly with eta.

use netmtl::harness::{Experiment, ExperimentConfig};
use serde_json::json;

fn main() -> netmtl::Result<()> {
    let base = ExperimentConfig::from_json(include_str!("configs/clustered_prox.json"))?;
    for (penalty, eta) in [
        ("l1", 0.0),
        ("l1", 0.05),
        ("l1", 0.5),
        ("l1", 5.0),
        ("quadratic", 0.05),
        ("quadratic", 0.5),
    ] {
        let mut config = base.clone();
        config.strategy.eta = eta;
        config.strategy.payload = Some(json!({"clusters": [5, 5], "penalty": penalty, "rho": 1.0}));
        let result = Experiment::build(&config)?.run()?;
        println!(
            "{penalty:>9} eta = {eta:>4}: steady-state MSD {:.4e}",
            result.steady_wo.mean
        );
    }
    Ok(())
}
