//! Random geometric graph, Laplacian spectrum, graph Fourier transform and
//! smoothness of a bandlimited task field.

use netmtl::data::{agent_rng, synth_smooth_tasks, AmplitudeProfile};
use netmtl::graph::{build_laplacian, graph_fourier, smoothness, Graph};

fn main() -> netmtl::Result<()> {
    let mut rng = agent_rng(3, 0, 0);
    let (graph, _coords) = Graph::random_geometric(30, 0.3, 0.2, &mut rng)?;
    let spectrum = build_laplacian(&graph)?;
    let lambda = spectrum.eigenvalues();
    println!(
        "agents {}, edges {}, connected {}",
        graph.n_agents(),
        graph.edges().len(),
        graph.is_connected()
    );
    println!(
        "lambda_1..4 = {:.4?}, lambda_max = {:.4}",
        &lambda.as_slice()[..4],
        spectrum.lambda_max()
    );
    println!("reconstruction residual {:.2e}", spectrum.reconstruction_residual());

    let cutoff = lambda[4];
    let field = synth_smooth_tasks(&spectrum, 2, cutoff, AmplitudeProfile::Decaying, &mut rng)?;
    let coeffs = graph_fourier(&field, &spectrum)?;
    let energy: Vec<f64> = (0..graph.n_agents())
        .map(|m| coeffs.block(m).iter().map(|x| x * x).sum())
        .collect();
    let shown: Vec<String> = energy[..8].iter().map(|e| format!("{e:.2e}")).collect();
    println!("spectral energy of the first 8 modes: {}", shown.join(" "));
    println!(
        "smoothness S(W) = {:.4e} (at most lambda_5 ||W||^2 = {:.4e})",
        smoothness(&field, &spectrum)?,
        cutoff * field.norm_squared()
    );
    Ok(())
}
