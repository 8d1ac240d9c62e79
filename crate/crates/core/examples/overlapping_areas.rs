//! Overlapping parameter vectors: four areas of a 14-variable system, each
//! estimating only the variables it is interested in, with per-variable
//! Metropolis averaging among the areas that share a variable.

use netmtl::harness::{Experiment, ExperimentConfig, GraphSpec, ModelSpec, NoiseSpec, TruthSpec};
use netmtl::strategies::{InterestMap, StrategyConfig, StrategyKind};

fn main() -> netmtl::Result<()> {
    let map = InterestMap::new(
        14,
        vec![
            vec![0, 1, 4],
            vec![2, 3, 4, 6, 7, 8],
            vec![5, 11, 12],
            vec![8, 9, 10, 13],
        ],
    )?;
    let strategy = StrategyConfig::new(StrategyKind::Overlapping, 0.01, 0.0).with_payload(serde_json::to_value(&map)?);
    let values: Vec<f64> = (0..14).map(|v| (v as f64 * 0.37).sin()).collect();
    let mut config = ExperimentConfig::new(
        GraphSpec::Inline {
            n: 4,
            edges: vec![(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)],
        },
        ModelSpec::mse(NoiseSpec::Uniform(0.01)),
        TruthSpec::Global { values },
        strategy,
    );
    config.iters = 5000;
    config.runs = 20;
    let overlapping = Experiment::build(&config)?;
    let mut alone = config.clone();
    alone.strategy = StrategyConfig::new(StrategyKind::Noncooperative, 0.01, 0.0);
    let alone = overlapping.with_config(&alone)?;
    println!("variables per area: {:?}", map.sizes());
    println!("overlapping:    MSD {:.4e}", overlapping.run()?.steady_wo.mean);
    println!("noncooperative: MSD {:.4e}", alone.run()?.steady_wo.mean);
    Ok(())
}
