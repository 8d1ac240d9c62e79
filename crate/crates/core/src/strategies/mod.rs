//! Adaptation strategies: a per-agent stochastic-gradient step followed by
//! one social step chosen by [`StrategyKind`].
//!
//! Strategies are configured with [`StrategyConfig`], a JSON object
//! `{"kind", "mu", "eta", "payload"}`. Payload schemas by kind:
//!
//! | kind | payload |
//! |---|---|
//! | `noncooperative`, `laplacian_reg` | none |
//! | `spectral_reg` | `{"coefficients": [b0, ..]}` or `{"kernel": {"function": "power", "exponent": 2}, "degree": 5}` |
//! | `prox_l1` | `{"rho": 1.0}` or `{"edges": [[k, l, rho], ..]}` |
//! | `diffusion` | `{"weights": "metropolis" \| "laplacian_rule" \| {"matrix": [[..]]}}` |
//! | `subspace_projection` | `{"subspace": "consensus" \| {"clusters": [..]} \| {"band": c} \| {"basis": [[..]]}, "weights": ..}` |
//! | `overlapping` | `{"variables": V, "interest": [[v, ..], ..]}` |
//! | `clustered` | `{"clusters": [N_1, ..], "penalty": "l1" \| "quadratic", "rho": 1.0}` or `"edges"` instead of `"rho"` |
//!
//! Subspace weights additionally accept `"cluster_metropolis"` and
//! `"projector"`; a `"matrix"` may be `N x N` (scalar) or full block size.

mod overlap;
mod prox;
mod social;

pub use overlap::{InterestMap, OverlapCombiner};
pub use prox::{prox_l1_scalar, prox_objective, EdgeRegularizer, Penalty};
pub use social::{
    intra_cluster_metropolis, self_learn, social_clustered, social_diffusion, social_noncooperative,
    social_overlapping, social_prox_l1, social_smooth, social_spectral, social_subspace,
};

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{Samples, StreamModel, TaskField};
use crate::error::{Error, Result};
use crate::graph::{
    build_laplacian, check_feasibility, cluster_subspace, consensus_subspace, laplacian_band_subspace,
    laplacian_rule_weights, metropolis_weights, projector, ClusterPartition, CombinationMatrix, Graph, KernelFn,
    SpectralKernel, Spectrum, Subspace, DEFAULT_CHEBYSHEV_DEGREE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Noncooperative,
    Diffusion,
    LaplacianReg,
    SpectralReg,
    ProxL1,
    SubspaceProjection,
    Overlapping,
    Clustered,
}

impl StrategyKind {
    pub fn needs_payload(self) -> bool {
        !matches!(self, StrategyKind::Noncooperative | StrategyKind::LaplacianReg)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Noncooperative => "noncooperative",
            StrategyKind::Diffusion => "diffusion",
            StrategyKind::LaplacianReg => "laplacian_reg",
            StrategyKind::SpectralReg => "spectral_reg",
            StrategyKind::ProxL1 => "prox_l1",
            StrategyKind::SubspaceProjection => "subspace_projection",
            StrategyKind::Overlapping => "overlapping",
            StrategyKind::Clustered => "clustered",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub mu: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<serde_json::Value>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, mu: f64, eta: f64) -> Self {
        StrategyConfig {
            kind,
            mu,
            eta,
            payload: None,
        }
    }

    pub fn with_payload(mut self, payload: serde_json::Value) -> Self {
        self.payload = Some(payload);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::Config(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Config(format!("eta must be >= 0, got {}", self.eta)));
        }
        match (self.kind.needs_payload(), &self.payload) {
            (true, None) => Err(Error::Config(format!(
                "strategy {} needs a payload",
                self.kind.as_str()
            ))),
            (false, Some(_)) => Err(Error::Config(format!(
                "strategy {} takes no payload",
                self.kind.as_str()
            ))),
            _ => Ok(()),
        }
    }

    fn payload<T: DeserializeOwned>(&self) -> Result<T> {
        let value = self.payload.clone().unwrap_or(serde_json::Value::Null);
        serde_json::from_value(value).map_err(|e| Error::Config(format!("{} payload: {e}", self.kind.as_str())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsSpec {
    Metropolis,
    LaplacianRule,
    ClusterMetropolis,
    Projector,
    Matrix(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceSpec {
    Consensus,
    Clusters(Vec<usize>),
    Band(usize),
    Basis(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiffusionPayload {
    weights: WeightsSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralPayload {
    coefficients: Option<Vec<f64>>,
    kernel: Option<KernelFn>,
    degree: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProxPayload {
    rho: Option<f64>,
    edges: Option<Vec<(usize, usize, f64)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubspacePayload {
    subspace: SubspaceSpec,
    weights: WeightsSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusteredPayload {
    clusters: Vec<usize>,
    #[serde(default = "default_penalty")]
    penalty: Penalty,
    rho: Option<f64>,
    edges: Option<Vec<(usize, usize, f64)>>,
}

fn default_penalty() -> Penalty {
    Penalty::L1
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config("matrix rows must be non-empty and equally long".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn edge_regularizer(
    graph: &Graph,
    rho: Option<f64>,
    edges: Option<Vec<(usize, usize, f64)>>,
    penalty: Penalty,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<EdgeRegularizer> {
    match (rho, edges) {
        (Some(_), Some(_)) => Err(Error::Config("give either rho or edges, not both".into())),
        (None, Some(edges)) => EdgeRegularizer::from_edges(graph, &edges, penalty),
        (rho, None) => EdgeRegularizer::uniform(graph, rho.unwrap_or(1.0), penalty, keep),
    }
}

#[derive(Clone, Debug)]
enum Social {
    Noncooperative,
    Smooth,
    Spectral(SpectralKernel),
    ProxL1(EdgeRegularizer),
    Diffusion(CombinationMatrix),
    Subspace(CombinationMatrix),
    Overlapping(OverlapCombiner),
    Clustered {
        partition: ClusterPartition,
        intra: CombinationMatrix,
        reg: EdgeRegularizer,
    },
}

/// A validated strategy bound to a graph and per-agent task lengths.
#[derive(Clone, Debug)]
pub struct Strategy {
    config: StrategyConfig,
    graph: Graph,
    sizes: Vec<usize>,
    social: Social,
    subspace: Option<Subspace>,
}

/// Mutable per-run state. `w` holds the current estimates.
#[derive(Clone, Debug)]
pub struct StrategyState {
    pub w: TaskField,
    psi: TaskField,
    phi: TaskField,
    next: TaskField,
    iter: usize,
}

impl StrategyState {
    pub fn new(init: TaskField) -> Self {
        StrategyState {
            psi: init.clone(),
            phi: init.clone(),
            next: init.clone(),
            w: init,
            iter: 0,
        }
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    /// Intermediate estimate from the latest self-learning step.
    pub fn psi(&self) -> &TaskField {
        &self.psi
    }
}

impl Strategy {
    pub fn build(config: &StrategyConfig, graph: &Graph, sizes: &[usize]) -> Result<Self> {
        config.validate()?;
        if sizes.len() != graph.n_agents() {
            return Err(Error::Dimension(format!(
                "{} task blocks for {} agents",
                sizes.len(),
                graph.n_agents()
            )));
        }
        let mu_eta = config.mu * config.eta;
        let uniform_m = || -> Result<usize> {
            let m = sizes[0];
            if sizes.iter().any(|&s| s != m) {
                return Err(Error::Config(format!(
                    "strategy {} needs equal task lengths",
                    config.kind.as_str()
                )));
            }
            Ok(m)
        };
        let spectrum = || -> Result<Spectrum> { build_laplacian(graph) };
        let mut subspace = None;
        let social = match config.kind {
            StrategyKind::Noncooperative => Social::Noncooperative,
            StrategyKind::LaplacianReg => {
                uniform_m()?;
                let lmax = spectrum()?.lambda_max();
                if mu_eta * lmax > 2.0 {
                    return Err(Error::Unstable(format!(
                        "mu*eta = {mu_eta} exceeds 2/lambda_max = {}",
                        2.0 / lmax
                    )));
                }
                Social::Smooth
            }
            StrategyKind::SpectralReg => {
                uniform_m()?;
                let p: SpectralPayload = config.payload()?;
                let spec = spectrum()?;
                let kernel = match (p.coefficients, p.kernel) {
                    (Some(c), None) if p.degree.is_none() => SpectralKernel::polynomial(c, &spec)?,
                    (None, Some(f)) => {
                        SpectralKernel::chebyshev(f, p.degree.unwrap_or(DEFAULT_CHEBYSHEV_DEGREE), &spec)?
                    }
                    _ => {
                        return Err(Error::Config(
                            "spectral_reg payload needs coefficients, or kernel with optional degree".into(),
                        ))
                    }
                };
                let rmax = spec.eigenvalues().iter().map(|&l| kernel.eval(l)).fold(0.0, f64::max);
                if mu_eta * rmax > 2.0 {
                    return Err(Error::Unstable(format!(
                        "mu*eta*max r(lambda) = {} exceeds 2",
                        mu_eta * rmax
                    )));
                }
                Social::Spectral(kernel)
            }
            StrategyKind::ProxL1 => {
                let p: ProxPayload = config.payload()?;
                Social::ProxL1(edge_regularizer(graph, p.rho, p.edges, Penalty::L1, |_, _| true)?)
            }
            StrategyKind::Diffusion => {
                let m = uniform_m()?;
                let p: DiffusionPayload = config.payload()?;
                let a = match p.weights {
                    WeightsSpec::Metropolis => metropolis_weights(graph)?,
                    WeightsSpec::LaplacianRule => laplacian_rule_weights(graph)?,
                    WeightsSpec::Matrix(rows) => CombinationMatrix::Scalar(matrix_from_rows(&rows)?),
                    other => return Err(Error::Config(format!("diffusion weights {other:?} are not supported"))),
                };
                let n = graph.n_agents();
                if a.scalar_weights().is_none_or(|s| s.nrows() != n || s.ncols() != n) {
                    return Err(Error::Config(format!("diffusion needs an {n} x {n} scalar matrix")));
                }
                match a.stochasticity_defect() {
                    Some(d) if d <= 1e-10 => {}
                    Some(d) => {
                        return Err(Error::Infeasible(format!(
                            "combination matrix is not doubly stochastic (defect {d:.3e})"
                        )))
                    }
                    None => return Err(Error::Infeasible("combination matrix has negative weights".into())),
                }
                if !a.sparsity_violations(graph).is_empty() {
                    return Err(Error::Infeasible("sparsity".into()));
                }
                // consensus feasibility also certifies rho(A - P) < 1
                let u = consensus_subspace(n, m)?;
                let report = check_feasibility(&a, &u, graph)?;
                if !report.passed() {
                    return Err(Error::Infeasible(report.failures().join(", ")));
                }
                subspace = Some(u);
                Social::Diffusion(a)
            }
            StrategyKind::SubspaceProjection => {
                let m = uniform_m()?;
                let p: SubspacePayload = config.payload()?;
                let n = graph.n_agents();
                let mut partition = None;
                let u = match &p.subspace {
                    SubspaceSpec::Consensus => consensus_subspace(n, m)?,
                    SubspaceSpec::Clusters(sizes) => {
                        let part = ClusterPartition::from_sizes(sizes)?;
                        if part.n_agents() != n {
                            return Err(Error::Config(format!(
                                "cluster sizes cover {} agents, graph has {n}",
                                part.n_agents()
                            )));
                        }
                        let u = cluster_subspace(&part, m)?;
                        partition = Some(part);
                        u
                    }
                    SubspaceSpec::Band(c) => laplacian_band_subspace(&spectrum()?, *c, m)?,
                    SubspaceSpec::Basis(rows) => {
                        let b = matrix_from_rows(rows)?;
                        if b.nrows() == n {
                            Subspace::from_scalar(b, m)?
                        } else {
                            Subspace::new(b, sizes.to_vec())?
                        }
                    }
                };
                let a = match p.weights {
                    WeightsSpec::Metropolis => metropolis_weights(graph)?,
                    WeightsSpec::LaplacianRule => laplacian_rule_weights(graph)?,
                    WeightsSpec::ClusterMetropolis => {
                        let part = partition.as_ref().ok_or_else(|| {
                            Error::Config("cluster_metropolis weights need a clusters subspace".into())
                        })?;
                        intra_cluster_metropolis(graph, part)?
                    }
                    WeightsSpec::Projector => CombinationMatrix::block(projector(&u)?, sizes.to_vec())?,
                    WeightsSpec::Matrix(rows) => {
                        let mat = matrix_from_rows(&rows)?;
                        if mat.nrows() == n {
                            CombinationMatrix::Scalar(mat)
                        } else {
                            CombinationMatrix::block(mat, sizes.to_vec())?
                        }
                    }
                };
                let report = check_feasibility(&a, &u, graph)?;
                if !report.passed() {
                    return Err(Error::Infeasible(report.failures().join(", ")));
                }
                subspace = Some(u);
                Social::Subspace(a)
            }
            StrategyKind::Overlapping => {
                let map: InterestMap = config.payload()?;
                if map.sizes() != sizes {
                    return Err(Error::Config(format!(
                        "interest map gives block sizes {:?}, tasks have {sizes:?}",
                        map.sizes()
                    )));
                }
                Social::Overlapping(OverlapCombiner::metropolis(graph, map)?)
            }
            StrategyKind::Clustered => {
                let m = uniform_m()?;
                let p: ClusteredPayload = config.payload()?;
                let partition = ClusterPartition::from_sizes(&p.clusters)?;
                if partition.n_agents() != graph.n_agents() {
                    return Err(Error::Config(format!(
                        "cluster sizes cover {} agents, graph has {}",
                        partition.n_agents(),
                        graph.n_agents()
                    )));
                }
                let intra = intra_cluster_metropolis(graph, &partition)?;
                let reg = edge_regularizer(graph, p.rho, p.edges, p.penalty, |k, l| !partition.same_cluster(k, l))?;
                let overlap = reg.intra_cluster_edges(&partition);
                if !overlap.is_empty() {
                    return Err(Error::Config(format!(
                        "regularizer weights on intra-cluster edges {overlap:?}"
                    )));
                }
                if p.penalty == Penalty::Quadratic {
                    // Gershgorin bound on the inter-cluster Laplacian
                    let dmax = (0..graph.n_agents())
                        .map(|k| reg.neighbors(k).iter().map(|e| e.1).sum::<f64>())
                        .fold(0.0, f64::max);
                    if mu_eta * 2.0 * dmax > 2.0 {
                        return Err(Error::Unstable(format!(
                            "mu*eta = {mu_eta} too large for inter-cluster degree {dmax}"
                        )));
                    }
                }
                subspace = Some(cluster_subspace(&partition, m)?);
                Social::Clustered { partition, intra, reg }
            }
        };
        Ok(Strategy {
            config: config.clone(),
            graph: graph.clone(),
            sizes: sizes.to_vec(),
            social,
            subspace,
        })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn kind(&self) -> StrategyKind {
        self.config.kind
    }

    pub fn mu(&self) -> f64 {
        self.config.mu
    }

    pub fn eta(&self) -> f64 {
        self.config.eta
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Kernel of the smoothness-regularized kinds.
    pub fn kernel(&self) -> Option<SpectralKernel> {
        match &self.social {
            Social::Smooth => Some(SpectralKernel::laplacian()),
            Social::Spectral(k) => Some(k.clone()),
            _ => None,
        }
    }

    /// Subspace whose projector the combination step converges to
    /// (consensus for diffusion, clusters for clustered).
    pub fn subspace(&self) -> Option<&Subspace> {
        self.subspace.as_ref()
    }

    pub fn combination(&self) -> Option<&CombinationMatrix> {
        match &self.social {
            Social::Diffusion(a) | Social::Subspace(a) => Some(a),
            Social::Clustered { intra, .. } => Some(intra),
            _ => None,
        }
    }

    pub fn partition(&self) -> Option<&ClusterPartition> {
        match &self.social {
            Social::Clustered { partition, .. } => Some(partition),
            _ => None,
        }
    }

    pub fn init_state(&self, init: Option<TaskField>) -> Result<StrategyState> {
        let w = match init {
            Some(w) if w.sizes() == self.sizes => w,
            Some(w) => {
                return Err(Error::Dimension(format!(
                    "initial estimate has blocks {:?}, expected {:?}",
                    w.sizes(),
                    self.sizes
                )))
            }
            None => TaskField::zeros(&self.sizes),
        };
        Ok(StrategyState::new(w))
    }

    /// The configured social step, reading `psi` and writing `out`.
    pub fn social_step(&self, psi: &TaskField, out: &mut TaskField) -> Result<()> {
        let mut phi = psi.clone();
        self.social_into(psi, &mut phi, out)
    }

    fn social_into(&self, psi: &TaskField, phi: &mut TaskField, out: &mut TaskField) -> Result<()> {
        if psi.sizes() != self.sizes || !psi.same_shape(out) {
            return Err(Error::Dimension("social step shape mismatch".into()));
        }
        let mu_eta = self.config.mu * self.config.eta;
        match &self.social {
            Social::Noncooperative => social_noncooperative(psi, out),
            Social::Smooth => social_smooth(psi, &self.graph, mu_eta, out),
            Social::Spectral(k) => social_spectral(psi, &self.graph, k.coefficients(), mu_eta, out)?,
            Social::ProxL1(reg) => social_prox_l1(psi, reg, mu_eta, out),
            Social::Diffusion(a) => social_diffusion(psi, a, out),
            Social::Subspace(a) => social_subspace(psi, a, out),
            Social::Overlapping(c) => social_overlapping(psi, c, out),
            Social::Clustered { intra, reg, .. } => social_clustered(psi, intra, reg, mu_eta, phi, out),
        }
        Ok(())
    }

    /// Self-learning then the social step; advances the iteration counter.
    pub fn step(&self, state: &mut StrategyState, model: &StreamModel, samples: &Samples) -> Result<()> {
        self_learn(model, &state.w, samples, self.config.mu, &mut state.psi)?;
        self.social_into(&state.psi, &mut state.phi, &mut state.next)?;
        std::mem::swap(&mut state.w, &mut state.next);
        state.iter += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{agent_rng, AgentRng};
    use serde_json::json;

    fn smooth_model(n: usize, m: usize, noise: f64) -> StreamModel {
        let vals: Vec<f64> = (0..n * m).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.5).collect();
        let truth = TaskField::from_stacked(&vec![m; n], &vals).unwrap();
        StreamModel::mse_isotropic(truth, 1.0, vec![noise; n]).unwrap()
    }

    fn run(strategy: &Strategy, model: &StreamModel, iters: usize, seed: u64) -> TaskField {
        let n = model.n_agents();
        let mut rngs: Vec<AgentRng> = (0..n).map(|k| agent_rng(seed, 0, k)).collect();
        let mut samples = Samples::new(&model.sizes());
        let mut state = strategy.init_state(None).unwrap();
        for _ in 0..iters {
            samples.draw(model, &mut rngs);
            strategy.step(&mut state, model, &samples).unwrap();
        }
        state.w
    }

    fn build(
        kind: StrategyKind,
        mu: f64,
        eta: f64,
        payload: Option<serde_json::Value>,
        g: &Graph,
        m: usize,
    ) -> Strategy {
        let mut c = StrategyConfig::new(kind, mu, eta);
        c.payload = payload;
        Strategy::build(&c, g, &vec![m; g.n_agents()]).unwrap()
    }

    #[test]
    fn config_validation() {
        let g = Graph::ring(4, 1.0).unwrap();
        let sizes = [2; 4];
        let bad_mu = StrategyConfig::new(StrategyKind::Noncooperative, 0.0, 0.0);
        assert!(matches!(Strategy::build(&bad_mu, &g, &sizes), Err(Error::Config(_))));
        let bad_eta = StrategyConfig::new(StrategyKind::LaplacianReg, 0.1, -1.0);
        assert!(Strategy::build(&bad_eta, &g, &sizes).is_err());
        let missing = StrategyConfig::new(StrategyKind::Diffusion, 0.1, 0.0);
        assert!(Strategy::build(&missing, &g, &sizes).is_err());
        let extra = StrategyConfig::new(StrategyKind::Noncooperative, 0.1, 0.0).with_payload(json!({}));
        assert!(Strategy::build(&extra, &g, &sizes).is_err());
        let unknown = StrategyConfig::new(StrategyKind::ProxL1, 0.1, 1.0).with_payload(json!({"rho": 1.0, "x": 2}));
        assert!(Strategy::build(&unknown, &g, &sizes).is_err());
        // ring of 4: lambda_max = 4, so mu*eta must stay <= 0.5
        let unstable = StrategyConfig::new(StrategyKind::LaplacianReg, 0.1, 6.0);
        assert!(matches!(
            Strategy::build(&unstable, &g, &sizes),
            Err(Error::Unstable(_))
        ));
        let ok = StrategyConfig::new(StrategyKind::LaplacianReg, 0.1, 5.0);
        assert!(Strategy::build(&ok, &g, &sizes).is_ok());
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"kind":"spectral_reg","mu":0.01,"eta":2.0,"payload":{"kernel":{"function":"exp","tau":0.5},"degree":5}}"#;
        let c: StrategyConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.kind, StrategyKind::SpectralReg);
        let back: StrategyConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<StrategyConfig>(r#"{"kind":"nope","mu":1}"#).is_err());
        assert!(serde_json::from_str::<StrategyConfig>(r#"{"kind":"diffusion","mu":1,"extra":0}"#).is_err());
        let g = Graph::ring(6, 1.0).unwrap();
        let s = Strategy::build(&c, &g, &[2; 6]).unwrap();
        assert_eq!(s.kernel().unwrap().degree(), 5);
    }

    #[test]
    fn infeasible_subspace_weights() {
        let g = Graph::ring(5, 1.0).unwrap();
        let c = StrategyConfig::new(StrategyKind::SubspaceProjection, 0.01, 0.0)
            .with_payload(json!({"subspace": "consensus", "weights": {"matrix": vec![vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 0.0, 1.0]]}}));
        match Strategy::build(&c, &g, &[1; 5]) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("rho(A-P_U)<1"), "{msg}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn clustered_rejects_intra_cluster_regularizer() {
        let g = Graph::ring(4, 1.0).unwrap();
        let c = StrategyConfig::new(StrategyKind::Clustered, 0.01, 1.0)
            .with_payload(json!({"clusters": [2, 2], "edges": [[0, 1, 1.0]]}));
        assert!(matches!(Strategy::build(&c, &g, &[1; 4]), Err(Error::Config(_))));
    }

    #[test]
    fn reduction_lattice() {
        let g = Graph::ring(6, 1.0).unwrap();
        let model = smooth_model(6, 2, 0.05);
        let nc = run(
            &build(StrategyKind::Noncooperative, 0.02, 0.0, None, &g, 2),
            &model,
            200,
            3,
        );
        let lap0 = run(
            &build(StrategyKind::LaplacianReg, 0.02, 0.0, None, &g, 2),
            &model,
            200,
            3,
        );
        assert_eq!(nc, lap0);

        let lap = run(
            &build(StrategyKind::LaplacianReg, 0.02, 3.0, None, &g, 2),
            &model,
            200,
            3,
        );
        let spec = run(
            &build(
                StrategyKind::SpectralReg,
                0.02,
                3.0,
                Some(json!({"coefficients": [0.0, 1.0]})),
                &g,
                2,
            ),
            &model,
            200,
            3,
        );
        assert_eq!(lap, spec);

        let diff = run(
            &build(
                StrategyKind::Diffusion,
                0.02,
                0.0,
                Some(json!({"weights": "metropolis"})),
                &g,
                2,
            ),
            &model,
            200,
            3,
        );
        let clus = run(
            &build(
                StrategyKind::Clustered,
                0.02,
                0.0,
                Some(json!({"clusters": [6]})),
                &g,
                2,
            ),
            &model,
            200,
            3,
        );
        assert_eq!(diff, clus);
        let sub = run(
            &build(
                StrategyKind::SubspaceProjection,
                0.02,
                0.0,
                Some(json!({"subspace": "consensus", "weights": "metropolis"})),
                &g,
                2,
            ),
            &model,
            200,
            3,
        );
        assert_eq!(diff, sub);
    }

    #[test]
    fn single_agent_reduces_to_noncooperative() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let model = smooth_model(1, 3, 0.1);
        let nc = run(
            &build(StrategyKind::Noncooperative, 0.05, 0.0, None, &g, 3),
            &model,
            100,
            1,
        );
        for (kind, payload) in [
            (StrategyKind::LaplacianReg, None),
            (StrategyKind::Diffusion, Some(json!({"weights": "metropolis"}))),
            (StrategyKind::ProxL1, Some(json!({"rho": 1.0}))),
            (StrategyKind::Clustered, Some(json!({"clusters": [1]}))),
        ] {
            let w = run(&build(kind, 0.05, 0.0, payload, &g, 3), &model, 100, 1);
            assert_eq!(w, nc, "{kind:?}");
        }
    }

    #[test]
    fn step_is_self_learn_then_social() {
        let g = Graph::ring(5, 1.0).unwrap();
        let model = smooth_model(5, 2, 0.1);
        let s = build(StrategyKind::ProxL1, 0.1, 0.5, Some(json!({"rho": 0.8})), &g, 2);
        let mut rngs: Vec<AgentRng> = (0..5).map(|k| agent_rng(11, 0, k)).collect();
        let mut samples = Samples::new(&[2; 5]);
        let mut state = s.init_state(Some(model.truth().clone())).unwrap();
        samples.draw(&model, &mut rngs);
        let w0 = state.w.clone();
        s.step(&mut state, &model, &samples).unwrap();
        let mut psi = w0.clone();
        self_learn(&model, &w0, &samples, 0.1, &mut psi).unwrap();
        let mut out = psi.clone();
        s.social_step(&psi, &mut out).unwrap();
        assert_eq!(state.w, out);
        assert_eq!(state.iteration(), 1);
    }

    #[test]
    fn noiseless_noncooperative_contracts() {
        let g = Graph::ring(4, 1.0).unwrap();
        let model = smooth_model(4, 2, 0.0);
        let s = build(StrategyKind::Noncooperative, 0.05, 0.0, None, &g, 2);
        let mut rngs: Vec<AgentRng> = (0..4).map(|k| agent_rng(2, 0, k)).collect();
        let mut samples = Samples::new(&[2; 4]);
        let mut state = s.init_state(None).unwrap();
        let mut prev = state.w.distance_squared(model.truth());
        for _ in 0..2000 {
            samples.draw(&model, &mut rngs);
            s.step(&mut state, &model, &samples).unwrap();
            let d = state.w.distance_squared(model.truth());
            assert!(d <= prev * (1.0 + 1e-12) + 1e-28);
            prev = d;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn subspace_projection_is_unbiased_without_noise() {
        let g = Graph::ring(6, 1.0).unwrap();
        let truth = TaskField::from_blocks(&vec![vec![0.4, -1.0]; 6]);
        let model = StreamModel::mse_isotropic(truth.clone(), 1.0, vec![0.0; 6]).unwrap();
        let s = build(
            StrategyKind::SubspaceProjection,
            0.05,
            0.0,
            Some(json!({"subspace": "consensus", "weights": "metropolis"})),
            &g,
            2,
        );
        let w = run(&s, &model, 3000, 5);
        assert!(w.distance_squared(&truth) < 1e-16);
    }

    #[test]
    fn overlapping_ieee14_areas_agree() {
        // four areas over 14 bus variables, area graph 1-2, 2-4, 1-3, 3-4
        let interest = vec![
            vec![0, 1, 4],
            vec![2, 3, 4, 6, 7, 8],
            vec![5, 11, 12],
            vec![8, 9, 10, 13],
        ];
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let map = InterestMap::new(14, interest.clone()).unwrap();
        let global: Vec<f64> = (0..14).map(|v| (v as f64 * 0.37).sin()).collect();
        let truth = map.localize(&global).unwrap();
        let model = StreamModel::mse_isotropic(truth.clone(), 1.0, vec![0.0; 4]).unwrap();
        let c =
            StrategyConfig::new(StrategyKind::Overlapping, 0.05, 0.0).with_payload(serde_json::to_value(&map).unwrap());
        let s = Strategy::build(&c, &g, &map.sizes()).unwrap();
        let w = run(&s, &model, 4000, 8);
        assert!(w.distance_squared(&truth) < 1e-20);
        // w^5 is shared by areas 1 and 2, w^9 by areas 2 and 4
        assert!((w.block(0)[2] - w.block(1)[2]).abs() < 1e-10);
        assert!((w.block(1)[5] - w.block(3)[0]).abs() < 1e-10);
    }
}
