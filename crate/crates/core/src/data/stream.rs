use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::TaskField;
use crate::error::{Error, Result};

/// Per-(run, agent) random stream.
pub type AgentRng = ChaCha8Rng;

/// Independent stream for `(run, agent)` derived from a base seed.
///
/// The ChaCha stream id carries `run` in its high 32 bits and `agent` in the
/// low 32 bits, so streams never overlap and can be created in any order.
pub fn agent_rng(seed: u64, run: usize, agent: usize) -> AgentRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((run as u64) << 32) | (agent as u64 & 0xffff_ffff));
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    /// `d = u^T w^o_k + v` with per-agent noise variances.
    Mse { noise: Vec<f64> },
    /// Labels in `{+1, -1}` drawn from the logistic likelihood, risk
    /// regularized by `rho/2 ||w||^2`.
    Logistic { rho: f64 },
}

/// Immutable per-agent data source.
#[derive(Clone, Debug)]
pub struct StreamModel {
    kind: ModelKind,
    truth: TaskField,
    /// Shared regressor covariance when every block has the same length.
    shared_cov: Option<DMatrix<f64>>,
    /// Lower Cholesky factor of each agent's regressor covariance.
    factors: Vec<DMatrix<f64>>,
}

fn cholesky_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !cov.is_square() {
        return Err(Error::Dimension("regressor covariance must be square".into()));
    }
    let asym = (cov - cov.transpose()).norm();
    if asym > 1e-12 * cov.norm().max(1.0) {
        return Err(Error::InvalidParameter("regressor covariance is not symmetric".into()));
    }
    cov.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidParameter("regressor covariance is not positive definite".into()))
}

fn check_noise(noise: &[f64], n: usize) -> Result<()> {
    if noise.len() != n {
        return Err(Error::Dimension(format!(
            "noise profile has {} entries for {n} agents",
            noise.len()
        )));
    }
    if let Some(k) = noise.iter().position(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance of agent {k} must be >= 0, got {}",
            noise[k]
        )));
    }
    Ok(())
}

impl StreamModel {
    /// MSE model with covariance `r_u` shared by all agents (uniform block length).
    pub fn mse(truth: TaskField, r_u: DMatrix<f64>, noise: Vec<f64>) -> Result<Self> {
        check_noise(&noise, truth.n_agents())?;
        Self::shared(ModelKind::Mse { noise }, truth, r_u)
    }

    /// MSE model with `R_u = variance * I` at every agent; block lengths may differ.
    pub fn mse_isotropic(truth: TaskField, variance: f64, noise: Vec<f64>) -> Result<Self> {
        check_noise(&noise, truth.n_agents())?;
        Self::isotropic(ModelKind::Mse { noise }, truth, variance)
    }

    pub fn logistic(truth: TaskField, r_u: DMatrix<f64>, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Self::shared(ModelKind::Logistic { rho }, truth, r_u)
    }

    pub fn logistic_isotropic(truth: TaskField, variance: f64, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Self::isotropic(ModelKind::Logistic { rho }, truth, variance)
    }

    fn shared(kind: ModelKind, truth: TaskField, r_u: DMatrix<f64>) -> Result<Self> {
        let m = truth.require_uniform()?;
        if r_u.nrows() != m {
            return Err(Error::Dimension(format!(
                "regressor covariance is {}x{}, blocks have length {m}",
                r_u.nrows(),
                r_u.ncols()
            )));
        }
        let factor = cholesky_factor(&r_u)?;
        Ok(StreamModel {
            kind,
            factors: vec![factor; truth.n_agents()],
            truth,
            shared_cov: Some(r_u),
        })
    }

    fn isotropic(kind: ModelKind, truth: TaskField, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "regressor variance must be positive, got {variance}"
            )));
        }
        let sd = variance.sqrt();
        let factors = truth
            .sizes()
            .into_iter()
            .map(|m| DMatrix::identity(m, m) * sd)
            .collect();
        let shared_cov = truth.uniform_len().map(|m| DMatrix::identity(m, m) * variance);
        Ok(StreamModel {
            kind,
            truth,
            shared_cov,
            factors,
        })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn is_mse(&self) -> bool {
        matches!(self.kind, ModelKind::Mse { .. })
    }

    pub fn truth(&self) -> &TaskField {
        &self.truth
    }

    pub fn n_agents(&self) -> usize {
        self.truth.n_agents()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.truth.sizes()
    }

    pub fn regressor_covariance(&self) -> Option<&DMatrix<f64>> {
        self.shared_cov.as_ref()
    }

    pub fn noise(&self) -> Option<&[f64]> {
        match &self.kind {
            ModelKind::Mse { noise } => Some(noise),
            ModelKind::Logistic { .. } => None,
        }
    }

    /// Same model with a different noise profile (MSE only).
    pub fn with_noise(&self, noise: Vec<f64>) -> Result<Self> {
        if !self.is_mse() {
            return Err(Error::InvalidParameter("noise profile applies to mse models".into()));
        }
        check_noise(&noise, self.n_agents())?;
        let mut out = self.clone();
        out.kind = ModelKind::Mse { noise };
        Ok(out)
    }

    /// Draws one observation for agent `k` into `regressor`, returning the
    /// target (`d` for mse, `gamma` for logistic).
    pub fn draw_into<R: Rng + ?Sized>(&self, k: usize, rng: &mut R, regressor: &mut [f64]) -> f64 {
        let factor = &self.factors[k];
        let m = factor.nrows();
        debug_assert_eq!(regressor.len(), m);
        let mut z = [0.0f64; 16];
        let mut z_heap;
        let z: &mut [f64] = if m <= 16 {
            &mut z[..m]
        } else {
            z_heap = vec![0.0; m];
            &mut z_heap
        };
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for (r, out) in regressor.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, zc) in z.iter().enumerate().take(r + 1) {
                acc += factor[(r, c)] * zc;
            }
            *out = acc;
        }
        let wo = self.truth.block(k);
        let inner: f64 = regressor.iter().zip(wo).map(|(u, w)| u * w).sum();
        match &self.kind {
            ModelKind::Mse { noise } => {
                let v: f64 = rng.sample(StandardNormal);
                inner + noise[k].sqrt() * v
            }
            ModelKind::Logistic { .. } => {
                let p = 1.0 / (1.0 + (-inner).exp());
                let uniform: f64 = rng.random();
                if uniform < p {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "logistic regularization must be nonnegative, got {rho}"
        )));
    }
    Ok(())
}

/// One observation: `(u, d)` for mse, `(h, gamma)` for logistic.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub regressor: Vec<f64>,
    pub target: f64,
}

pub fn mse_sample<R: Rng + ?Sized>(model: &StreamModel, k: usize, rng: &mut R) -> Result<Sample> {
    if !model.is_mse() {
        return Err(Error::InvalidParameter("mse_sample on a logistic model".into()));
    }
    let mut regressor = vec![0.0; model.truth.block_len(k)];
    let target = model.draw_into(k, rng, &mut regressor);
    Ok(Sample { regressor, target })
}

pub fn logistic_sample<R: Rng + ?Sized>(model: &StreamModel, k: usize, rng: &mut R) -> Result<Sample> {
    if model.is_mse() {
        return Err(Error::InvalidParameter("logistic_sample on an mse model".into()));
    }
    let mut regressor = vec![0.0; model.truth.block_len(k)];
    let target = model.draw_into(k, rng, &mut regressor);
    Ok(Sample { regressor, target })
}

/// One sample per agent for a single time instant.
#[derive(Clone, Debug)]
pub struct Samples {
    pub regressors: TaskField,
    pub targets: Vec<f64>,
}

impl Samples {
    pub fn new(sizes: &[usize]) -> Self {
        Samples {
            regressors: TaskField::zeros(sizes),
            targets: vec![0.0; sizes.len()],
        }
    }

    /// Fills every agent's sample from its own stream.
    pub fn draw(&mut self, model: &StreamModel, rngs: &mut [AgentRng]) {
        for (k, rng) in rngs.iter_mut().enumerate() {
            self.targets[k] = model.draw_into(k, rng, self.regressors.block_mut(k));
        }
    }

    pub fn sample(&self, k: usize) -> Sample {
        Sample {
            regressor: self.regressors.block(k).to_vec(),
            target: self.targets[k],
        }
    }
}

/// Gradient of the instantaneous loss at `w`, written into `out`.
///
/// mse: `-u (d - u^T w)`; logistic: `rho w - gamma h / (1 + exp(gamma h^T w))`.
pub fn instantaneous_gradient_into(model: &StreamModel, w: &[f64], regressor: &[f64], target: f64, out: &mut [f64]) {
    let inner: f64 = regressor.iter().zip(w).map(|(u, w)| u * w).sum();
    match model.kind {
        ModelKind::Mse { .. } => {
            let err = target - inner;
            for (o, u) in out.iter_mut().zip(regressor) {
                *o = -u * err;
            }
        }
        ModelKind::Logistic { rho } => {
            let s = target / (1.0 + (target * inner).exp());
            for ((o, h), wj) in out.iter_mut().zip(regressor).zip(w) {
                *o = rho * wj - s * h;
            }
        }
    }
}

pub fn instantaneous_gradient(model: &StreamModel, k: usize, w: &[f64], sample: &Sample) -> Result<Vec<f64>> {
    let m = model.truth.block_len(k);
    if w.len() != m || sample.regressor.len() != m {
        return Err(Error::Dimension(format!(
            "agent {k} expects length {m}, got w={} regressor={}",
            w.len(),
            sample.regressor.len()
        )));
    }
    let mut out = vec![0.0; m];
    instantaneous_gradient_into(model, w, &sample.regressor, sample.target, &mut out);
    Ok(out)
}

/// Instantaneous loss `Q_k(w; x)` whose gradient [`instantaneous_gradient`] returns.
pub fn instantaneous_loss(model: &StreamModel, w: &[f64], sample: &Sample) -> f64 {
    let inner: f64 = sample.regressor.iter().zip(w).map(|(u, w)| u * w).sum();
    match model.kind {
        ModelKind::Mse { .. } => 0.5 * (sample.target - inner).powi(2),
        ModelKind::Logistic { rho } => {
            let z = -sample.target * inner;
            // ln(1 + e^z) without overflow
            let softplus = if z > 0.0 {
                z + (-z).exp().ln_1p()
            } else {
                z.exp().ln_1p()
            };
            softplus + 0.5 * rho * w.iter().map(|x| x * x).sum::<f64>()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_mse(wo: f64, noise: f64) -> StreamModel {
        StreamModel::mse(
            TaskField::from_blocks(&[vec![wo]]),
            DMatrix::identity(1, 1),
            vec![noise],
        )
        .unwrap()
    }

    #[test]
    fn lms_gradient_example() {
        let model = scalar_mse(1.0, 0.1);
        let sample = Sample {
            regressor: vec![1.0],
            target: 1.0,
        };
        let g = instantaneous_gradient(&model, 0, &[0.0], &sample).unwrap();
        assert_eq!(g, vec![-1.0]);
        assert_eq!(0.0 - 0.5 * g[0], 0.5);
    }

    #[test]
    fn logistic_gradient_at_origin() {
        let model = StreamModel::logistic(TaskField::from_blocks(&[vec![0.0]]), DMatrix::identity(1, 1), 0.0).unwrap();
        let sample = Sample {
            regressor: vec![1.0],
            target: 1.0,
        };
        let g = instantaneous_gradient(&model, 0, &[0.0], &sample).unwrap();
        assert_eq!(g, vec![-0.5]);
    }

    #[test]
    fn mse_gradient_vanishes_at_truth_without_noise() {
        let truth = TaskField::from_blocks(&[vec![0.3, -1.2]]);
        let model = StreamModel::mse(truth.clone(), DMatrix::identity(2, 2), vec![1e-300]).unwrap();
        let mut rng = agent_rng(3, 0, 0);
        for _ in 0..10 {
            let s = mse_sample(&model, 0, &mut rng).unwrap();
            let g = instantaneous_gradient(&model, 0, truth.block(0), &s).unwrap();
            assert!(g.iter().all(|x| x.abs() < 1e-120));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let truth = TaskField::uniform(2, 1);
        assert!(StreamModel::mse(truth.clone(), DMatrix::identity(1, 1), vec![0.1, -0.1]).is_err());
        assert!(StreamModel::mse(truth.clone(), DMatrix::identity(1, 1), vec![0.1]).is_err());
        assert!(StreamModel::mse(truth.clone(), DMatrix::identity(2, 2), vec![0.1, 0.1]).is_err());
        let not_pd = DMatrix::from_row_slice(1, 1, &[-1.0]);
        assert!(StreamModel::mse(truth.clone(), not_pd, vec![0.1, 0.1]).is_err());
        assert!(StreamModel::logistic(truth, DMatrix::identity(1, 1), -1.0).is_err());
    }

    #[test]
    fn sampler_kind_mismatch() {
        let model = scalar_mse(0.0, 1.0);
        let mut rng = agent_rng(0, 0, 0);
        assert!(logistic_sample(&model, 0, &mut rng).is_err());
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = agent_rng(7, 0, 1).random();
        let b: u64 = agent_rng(7, 1, 0).random();
        let c: u64 = agent_rng(7, 0, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
