//! The exact l1 prox used by the nonsmooth strategies: soft thresholding
//! with one neighbour, and a multi-anchor instance checked against its
//! optimality condition.

use netmtl::strategies::{prox_l1_scalar, prox_objective};

fn main() {
    // min_x (x - z)^2 / (2 gamma) + rho |x - a| with a = 0 is soft thresholding.
    for z in [-2.0, -0.3, 0.0, 0.4, 1.5] {
        let x = prox_l1_scalar(z, &mut [(0.0, 1.0)], 0.5);
        println!(
            "z = {z:>5}: prox = {x:>6.3} (soft threshold {:>6.3})",
            z.signum() * (z.abs() - 0.5f64).max(0.0)
        );
    }

    let anchors = [(-1.0, 0.4), (0.2, 0.3), (0.25, 0.1), (2.0, 0.2)];
    let (z, gamma) = (1.1, 0.7);
    let x = prox_l1_scalar(z, &mut anchors.clone(), gamma);
    let f = |t: f64| prox_objective(t, z, &anchors, gamma);
    println!("four anchors: x* = {x:.6}");
    println!(
        "f(x*) = {:.10}, f(x* - 1e-4) = {:.10}, f(x* + 1e-4) = {:.10}",
        f(x),
        f(x - 1e-4),
        f(x + 1e-4)
    );
}
