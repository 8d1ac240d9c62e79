use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::TaskField;
use crate::error::{Error, Result};
use crate::graph::{inverse_graph_fourier, Spectrum};

/// Scale applied to the i.i.d. standard normal spectral coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeProfile {
    /// `1 / (1 + lambda_m)`
    #[default]
    Decaying,
    Flat,
}

impl AmplitudeProfile {
    fn scale(self, lambda: f64) -> f64 {
        match self {
            AmplitudeProfile::Decaying => 1.0 / (1.0 + lambda),
            AmplitudeProfile::Flat => 1.0,
        }
    }
}

/// Random task field whose graph Fourier content is confined to
/// eigenvalues `lambda_m <= bandwidth`.
pub fn synth_smooth_tasks<R: Rng + ?Sized>(
    spectrum: &Spectrum,
    m: usize,
    bandwidth: f64,
    profile: AmplitudeProfile,
    rng: &mut R,
) -> Result<TaskField> {
    if !(bandwidth >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be nonnegative, got {bandwidth}"
        )));
    }
    let n = spectrum.n();
    let mut coeffs = TaskField::uniform(n, m);
    for (mode, &lambda) in spectrum.eigenvalues().iter().enumerate() {
        let scale = profile.scale(lambda);
        for c in coeffs.block_mut(mode) {
            let z: f64 = rng.sample(StandardNormal);
            *c = if lambda <= bandwidth { scale * z } else { 0.0 };
        }
    }
    inverse_graph_fourier(&coeffs, spectrum)
}
