//! Streaming data for the two model families: per-agent random streams,
//! instantaneous gradients and a finite-difference check.

use netmtl::data::{
    agent_rng, instantaneous_gradient, instantaneous_loss, logistic_sample, mse_sample, StreamModel, TaskField,
};

fn main() -> netmtl::Result<()> {
    let truth = TaskField::from_blocks(&[vec![1.0, -0.5], vec![0.3, 0.8]]);
    let mse = StreamModel::mse_isotropic(truth.clone(), 1.0, vec![0.1, 0.2])?;
    let logistic = StreamModel::logistic_isotropic(truth, 1.0, 0.01)?;
    let w = [0.2, 0.1];
    for (name, model) in [("mse", &mse), ("logistic", &logistic)] {
        // agent 1 of run 0 with seed 42: the same stream on every execution
        let mut rng = agent_rng(42, 0, 1);
        let sample = if model.is_mse() {
            mse_sample(model, 1, &mut rng)?
        } else {
            logistic_sample(model, 1, &mut rng)?
        };
        let g = instantaneous_gradient(model, 1, &w, &sample)?;
        let h = 1e-6;
        let fd: Vec<f64> = (0..2)
            .map(|j| {
                let (mut p, mut q) = (w, w);
                p[j] += h;
                q[j] -= h;
                (instantaneous_loss(model, &p, &sample) - instantaneous_loss(model, &q, &sample)) / (2.0 * h)
            })
            .collect();
        println!(
            "{name}: u = {:.3?}, d = {:.3}, grad = {g:.6?}, finite diff = {fd:.6?}",
            sample.regressor, sample.target
        );
    }
    Ok(())
}
