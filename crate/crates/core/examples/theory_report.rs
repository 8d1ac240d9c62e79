//! Closed-form predictions for a smooth multitask setup: variance and bias
//! per graph mode, the limit point, and the filter ratios, printed as JSON.

use nalgebra::DMatrix;
use netmtl::data::{agent_rng, synth_smooth_tasks, AmplitudeProfile};
use netmtl::graph::{build_laplacian, Graph};
use netmtl::theory::{bias_smoothness, report, variance_smoothness, TheoryInputs};

fn main() -> netmtl::Result<()> {
    let graph = Graph::ring(10, 1.0)?;
    let spectrum = build_laplacian(&graph)?;
    let truth = synth_smooth_tasks(
        &spectrum,
        2,
        spectrum.eigenvalues()[2],
        AmplitudeProfile::Flat,
        &mut agent_rng(1, 0, 0),
    )?;
    for eta in [0.0, 0.5, 2.0, 8.0] {
        let inputs = TheoryInputs::new(0.01, eta, vec![0.1; 10], DMatrix::identity(2, 2))
            .with_spectrum(&spectrum)
            .with_truth(&truth);
        let variance = variance_smoothness(&inputs)?.total;
        let bias = bias_smoothness(&inputs)?.total;
        println!(
            "eta = {eta:>3}: variance {variance:.4e}, bias {:.4e}, sum {:.4e}",
            bias / 10.0,
            variance + bias / 10.0
        );
    }
    let inputs = TheoryInputs::new(0.01, 2.0, vec![0.1; 10], DMatrix::identity(2, 2))
        .with_spectrum(&spectrum)
        .with_truth(&truth);
    println!("{}", serde_json::to_string_pretty(&report(&inputs)?)?);
    Ok(())
}
