//! Laplacian-regularized multitask LMS on a 50-node geometric graph: the
//! eta sweep with simulated MSD, variance, and the closed-form variance and
//! bias, printed as the sweep CSV.

use netmtl::harness::{eta_sweep, sweep_csv, ExperimentConfig};

fn main() -> netmtl::Result<()> {
    let mut config = ExperimentConfig::from_json(include_str!("configs/smooth_rgg.json"))?;
    config.runs = 10;
    config.iters = 6000;
    let sweep = eta_sweep(&config, &[0.0, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0])?;
    print!("{}", sweep_csv(&sweep));
    println!("best eta on the grid: {}", sweep.best_eta);
    Ok(())
}
