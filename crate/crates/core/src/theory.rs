//! Closed-form steady-state predictors for MSE networks with a shared
//! regressor covariance `R_u` and equal task lengths `M`.
//!
//! These are small-step-size expressions. The harness compares each one to
//! its own simulated counterpart: the noncooperative and projection MSDs to
//! the distance from `W^o`, the smoothness variance to the distance from
//! `W*`, and the bias to `||W^o - W*||^2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::data::TaskField;
use crate::error::{Error, Result};
use crate::graph::{graph_fourier, inverse_graph_fourier, SpectralKernel, Spectrum, Subspace};

/// Inputs shared by the predictors. Optional parts are only needed by the
/// predictors that use them.
#[derive(Clone, Debug)]
pub struct TheoryInputs<'a> {
    pub mu: f64,
    pub eta: f64,
    pub noise: Vec<f64>,
    pub r_u: DMatrix<f64>,
    pub spectrum: Option<&'a Spectrum>,
    /// Defaults to `r(lambda) = lambda`.
    pub kernel: Option<SpectralKernel>,
    pub truth: Option<&'a TaskField>,
    pub subspace: Option<&'a Subspace>,
}

impl<'a> TheoryInputs<'a> {
    pub fn new(mu: f64, eta: f64, noise: Vec<f64>, r_u: DMatrix<f64>) -> Self {
        TheoryInputs {
            mu,
            eta,
            noise,
            r_u,
            spectrum: None,
            kernel: None,
            truth: None,
            subspace: None,
        }
    }

    pub fn with_spectrum(mut self, spectrum: &'a Spectrum) -> Self {
        self.spectrum = Some(spectrum);
        self
    }

    pub fn with_kernel(mut self, kernel: SpectralKernel) -> Self {
        self.kernel = Some(kernel);
        self
    }

    pub fn with_truth(mut self, truth: &'a TaskField) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn with_subspace(mut self, subspace: &'a Subspace) -> Self {
        self.subspace = Some(subspace);
        self
    }

    pub fn m(&self) -> usize {
        self.r_u.nrows()
    }

    pub fn n_agents(&self) -> usize {
        self.noise.len()
    }

    /// Eigenvalues `lambda_{u,q}` of `R_u`.
    pub fn regressor_eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.r_u.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    fn spectrum(&self) -> Result<&'a Spectrum> {
        let s = self
            .spectrum
            .ok_or_else(|| Error::Config("prediction needs the graph spectrum".into()))?;
        if s.n() != self.n_agents() {
            return Err(Error::Dimension(format!(
                "spectrum has {} agents, noise profile {}",
                s.n(),
                self.n_agents()
            )));
        }
        Ok(s)
    }

    fn kernel_values(&self, spectrum: &Spectrum) -> Vec<f64> {
        match &self.kernel {
            Some(k) => k.on_spectrum(spectrum),
            None => spectrum.eigenvalues().iter().copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoncooperativeMsd {
    pub per_agent: Vec<f64>,
    pub network: f64,
}

/// `MSD_k = (mu M / 2) sigma_k^2` and their network average.
pub fn msd_noncooperative(mu: f64, m: usize, noise: &[f64]) -> NoncooperativeMsd {
    let scale = mu * m as f64 / 2.0;
    let per_agent: Vec<f64> = noise.iter().map(|s| scale * s).collect();
    let network = if noise.is_empty() {
        0.0
    } else {
        per_agent.iter().sum::<f64>() / noise.len() as f64
    };
    NoncooperativeMsd { per_agent, network }
}

/// Total with per-graph-frequency terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeBreakdown {
    pub total: f64,
    pub modes: Vec<f64>,
}

/// Steady-state variance around `W*` of the smoothness-regularized strategy:
/// `sum_m phi(r(lambda_m))` with
/// `phi = (mu / 2N) (sum_k [v_m]_k^2 sigma_k^2) (sum_q l_q / (l_q + eta r(lambda_m)))`.
pub fn variance_smoothness(inputs: &TheoryInputs) -> Result<ModeBreakdown> {
    let spectrum = inputs.spectrum()?;
    let n = spectrum.n();
    let r = inputs.kernel_values(spectrum);
    let ru = inputs.regressor_eigenvalues();
    let v = spectrum.eigenvectors();
    let modes: Vec<f64> = (0..n)
        .map(|mode| {
            let weighted_noise: f64 = (0..n).map(|k| v[(k, mode)].powi(2) * inputs.noise[k]).sum();
            let gain: f64 = ru.iter().map(|&l| l / (l + inputs.eta * r[mode])).sum();
            inputs.mu / (2.0 * n as f64) * weighted_noise * gain
        })
        .collect();
    Ok(ModeBreakdown {
        total: modes.iter().sum(),
        modes,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasPrediction {
    /// `||W^o - W*||^2 = sum_m zeta(r(lambda_m))`
    pub total: f64,
    pub modes: Vec<f64>,
    /// Regularized solution, `wbar*_m = R_u (R_u + eta r(lambda_m) I)^{-1} wbar^o_m`.
    pub w_star: TaskField,
}

/// `zeta_m = || eta r_m (R_u + eta r_m I)^{-1} wbar^o_m ||^2` per mode, plus `W*`.
pub fn bias_smoothness(inputs: &TheoryInputs) -> Result<BiasPrediction> {
    let spectrum = inputs.spectrum()?;
    let truth = inputs
        .truth
        .ok_or_else(|| Error::Config("bias prediction needs the true task field".into()))?;
    let m = inputs.m();
    if truth.uniform_len() != Some(m) {
        return Err(Error::Dimension(format!("truth blocks must all have length {m}")));
    }
    let r = inputs.kernel_values(spectrum);
    let coeffs = graph_fourier(truth, spectrum)?;
    let mut star_coeffs = TaskField::uniform(spectrum.n(), m);
    let mut modes = Vec::with_capacity(spectrum.n());
    for mode in 0..spectrum.n() {
        let shift = inputs.eta * r[mode];
        let wo = DVector::from_column_slice(coeffs.block(mode));
        let mut resolvent = inputs.r_u.clone();
        for q in 0..m {
            resolvent[(q, q)] += shift;
        }
        let lu = resolvent
            .lu()
            .solve(&wo)
            .ok_or_else(|| Error::InvalidParameter("R_u + eta r I is singular".into()))?;
        let offset = &lu * shift;
        modes.push(offset.norm_squared());
        let star = &inputs.r_u * &lu;
        star_coeffs.block_mut(mode).copy_from_slice(star.as_slice());
    }
    Ok(BiasPrediction {
        total: modes.iter().sum(),
        modes,
        w_star: inverse_graph_fourier(&star_coeffs, spectrum)?,
    })
}

/// Network MSD of projection strategies, `(mu M / 2N) sum_m sum_k [u_m]_k^2 sigma_k^2`,
/// for a semi-orthogonal `U = U_s kron I_M`.
pub fn msd_projection(inputs: &TheoryInputs) -> Result<f64> {
    let subspace = inputs
        .subspace
        .ok_or_else(|| Error::Config("projection MSD needs a subspace".into()))?;
    if !subspace.is_semi_orthogonal() {
        let u = subspace.basis();
        let p = u.ncols();
        return Err(Error::NotSemiOrthogonal(
            (u.transpose() * u - DMatrix::identity(p, p)).norm(),
        ));
    }
    let scalar = subspace
        .scalar_basis()
        .ok_or_else(|| Error::Config("projection MSD needs a basis of the form U_s kron I_M".into()))?;
    let n = scalar.nrows();
    if n != inputs.n_agents() {
        return Err(Error::Dimension(format!(
            "subspace has {n} agents, noise profile {}",
            inputs.n_agents()
        )));
    }
    let mut acc = 0.0;
    for col in scalar.column_iter() {
        acc += col.iter().zip(&inputs.noise).map(|(u, s)| u * u * s).sum::<f64>();
    }
    Ok(inputs.mu * inputs.m() as f64 / (2.0 * n as f64) * acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterBound {
    /// `l_max / (l_max + eta r(lambda_m))` per mode.
    pub ratios: Vec<f64>,
    /// Whether `||wbar*_m|| <= ratio_m ||wbar^o_m|| + 1e-12` holds for every mode
    /// (present when the truth is supplied).
    pub satisfied: Option<bool>,
}

/// Low-pass response of the regularized solution; requires a kernel that is
/// nondecreasing on the spectrum.
pub fn filter_bound(inputs: &TheoryInputs) -> Result<FilterBound> {
    let spectrum = inputs.spectrum()?;
    if let Some(k) = &inputs.kernel {
        if !k.is_monotone_on(spectrum) {
            return Err(Error::InvalidKernel(
                "filter bound needs a kernel nondecreasing on the spectrum".into(),
            ));
        }
    }
    let l_max = inputs.regressor_eigenvalues().into_iter().fold(f64::MIN, f64::max);
    let ratios: Vec<f64> = inputs
        .kernel_values(spectrum)
        .iter()
        .map(|&r| l_max / (l_max + inputs.eta * r))
        .collect();
    let satisfied = match inputs.truth {
        Some(truth) => {
            let bias = bias_smoothness(inputs)?;
            let wo = graph_fourier(truth, spectrum)?;
            let ws = graph_fourier(&bias.w_star, spectrum)?;
            Some((0..spectrum.n()).all(|m| {
                let a: f64 = ws.block(m).iter().map(|x| x * x).sum::<f64>().sqrt();
                let b: f64 = wo.block(m).iter().map(|x| x * x).sum::<f64>().sqrt();
                a <= ratios[m] * b + 1e-12
            }))
        }
        None => None,
    };
    Ok(FilterBound { ratios, satisfied })
}

/// Everything the `theory` subcommand prints. Inapplicable entries are `null`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryReport {
    pub msd_nc: f64,
    pub msd_nc_per_agent: Vec<f64>,
    pub variance: Option<ModeBreakdown>,
    pub bias: Option<ModeBreakdown>,
    pub msd_projection: Option<f64>,
    pub filter_ratios: Option<Vec<f64>>,
}

/// Runs every predictor the inputs allow.
pub fn report(inputs: &TheoryInputs) -> Result<TheoryReport> {
    let nc = msd_noncooperative(inputs.mu, inputs.m(), &inputs.noise);
    let variance = match inputs.spectrum {
        Some(_) => Some(variance_smoothness(inputs)?),
        None => None,
    };
    let bias = match (inputs.spectrum, inputs.truth) {
        (Some(_), Some(_)) => {
            let b = bias_smoothness(inputs)?;
            Some(ModeBreakdown {
                total: b.total,
                modes: b.modes,
            })
        }
        _ => None,
    };
    let msd_projection = match inputs.subspace {
        Some(s) if s.is_semi_orthogonal() && s.scalar_basis().is_some() => Some(msd_projection(inputs)?),
        _ => None,
    };
    let monotone = match (&inputs.kernel, inputs.spectrum) {
        (Some(k), Some(s)) => k.is_monotone_on(s),
        _ => true,
    };
    let filter_ratios = match inputs.spectrum {
        Some(_) if monotone => Some(filter_bound(inputs)?.ratios),
        _ => None,
    };
    Ok(TheoryReport {
        msd_nc: nc.network,
        msd_nc_per_agent: nc.per_agent,
        variance,
        bias,
        msd_projection,
        filter_ratios,
    })
}
