//! Chebyshev approximation of a spectral kernel and the distributed S-hop
//! social step compared with the dense filter.

use nalgebra::{DMatrix, DVector};
use netmtl::data::TaskField;
use netmtl::graph::{build_laplacian, polynomial_of_laplacian, Graph, KernelFn, SpectralKernel};
use netmtl::strategies::social_spectral;

fn main() -> netmtl::Result<()> {
    let graph = Graph::ring(12, 1.0)?;
    let spectrum = build_laplacian(&graph)?;
    for degree in [2, 4, 6, 8] {
        let kernel = SpectralKernel::chebyshev(KernelFn::Exp { tau: 0.5 }, degree, &spectrum)?;
        println!(
            "exp(0.5 lambda) - 1, degree {degree}: max fit error {:.3e}",
            kernel.fit_error()
        );
    }
    let kernel = SpectralKernel::chebyshev(KernelFn::Power { exponent: 2.0 }, 4, &spectrum)?;
    let coeffs = kernel.coefficients().to_vec();
    println!("lambda^2 as a polynomial: {coeffs:.4?}");

    let m = 2;
    let psi = TaskField::from_blocks(
        &(0..12)
            .map(|k| vec![(k as f64).sin(), (k as f64 * 0.5).cos()])
            .collect::<Vec<_>>(),
    );
    let mut out = psi.clone();
    let mu_eta = 0.05;
    social_spectral(&psi, &graph, &coeffs, mu_eta, &mut out)?;
    let dense = polynomial_of_laplacian(&coeffs, spectrum.laplacian()).kronecker(&DMatrix::<f64>::identity(m, m));
    let x = psi.to_dvector();
    let oracle: DVector<f64> = &x - (&dense * &x) * mu_eta;
    println!("distributed vs dense: {:.2e}", (out.to_dvector() - oracle).norm());
    Ok(())
}
