//! Noncooperative LMS on 20 agents: simulated steady-state MSD against
//! mu M sigma^2 / 2, network-wide and per agent.

use netmtl::harness::{Experiment, ExperimentConfig, NoiseSpec};
use netmtl::theory::msd_noncooperative;

fn main() -> netmtl::Result<()> {
    let mut config = ExperimentConfig::from_json(include_str!("configs/noncooperative.json"))?;
    config.runs = 30;
    let noise: Vec<f64> = (0..20).map(|k| 0.05 + 0.005 * k as f64).collect();
    config.model.noise = Some(NoiseSpec::PerAgent(noise.clone()));
    let result = Experiment::build(&config)?.run()?;
    let theory = msd_noncooperative(config.strategy.mu, 2, &noise);
    println!(
        "network MSD: simulated {:.4e} +/- {:.1e}, theory {:.4e}",
        result.steady_wo.mean, result.steady_wo.stderr, theory.network
    );
    for k in [0, 5, 10, 19] {
        println!(
            "agent {k:>2}: simulated {:.4e}, theory {:.4e}",
            result.per_agent[k], theory.per_agent[k]
        );
    }
    println!("{:.2}s", result.wall_time_s);
    Ok(())
}
