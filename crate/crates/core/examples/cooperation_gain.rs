//! Cooperation gain: noncooperative, consensus diffusion and two-cluster
//! subspace projection on 10 agents, against MSD_nc, MSD_nc / N and
//! 2 MSD_nc / N.

use netmtl::harness::{Experiment, ExperimentConfig};
use netmtl::strategies::{StrategyConfig, StrategyKind};

fn main() -> netmtl::Result<()> {
    let mut diffusion = ExperimentConfig::from_json(include_str!("configs/diffusion.json"))?;
    diffusion.runs = 30;
    let mut clustered = ExperimentConfig::from_json(include_str!("configs/clustered_subspace.json"))?;
    clustered.runs = 30;
    let mut alone = diffusion.clone();
    alone.strategy = StrategyConfig::new(StrategyKind::Noncooperative, diffusion.strategy.mu, 0.0);

    for (name, config) in [
        ("noncooperative", &alone),
        ("diffusion", &diffusion),
        ("two clusters", &clustered),
    ] {
        let exp = Experiment::build(config)?;
        let theory = exp.theory.clone().expect("mse model");
        let predicted = theory.msd_projection.unwrap_or(theory.msd_nc);
        let result = exp.run()?;
        println!(
            "{name:>15}: simulated {:.4e}, predicted {:.4e}",
            result.steady_wo.mean, predicted
        );
    }
    Ok(())
}
