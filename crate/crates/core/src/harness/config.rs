use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{agent_rng, synth_smooth_tasks, AmplitudeProfile, StreamModel, TaskField, TaskFieldDoc};
use crate::error::{Error, Result};
use crate::graph::{ClusterPartition, Graph, GraphDoc, Spectrum};
use crate::strategies::{InterestMap, StrategyConfig, StrategyKind};

pub const SCHEMA_VERSION: u32 = 1;
/// Run index reserved for setup streams (graph and truth generation).
const SETUP_RUN: usize = 0xffff_ffff;
const RGG_ATTEMPTS: usize = 1000;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Ring {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    Path {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    Star {
        leaves: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    Complete {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    /// Redrawn until connected.
    RandomGeometric {
        n: usize,
        radius: f64,
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
    Inline {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
}

impl GraphSpec {
    pub fn build(&self, base_seed: u64) -> Result<Graph> {
        match self {
            GraphSpec::Ring { n, weight } => Graph::ring(*n, *weight),
            GraphSpec::Path { n, weight } => Graph::path(*n, *weight),
            GraphSpec::Star { leaves, weight } => Graph::star(*leaves, *weight),
            GraphSpec::Complete { n, weight } => Graph::complete(*n, *weight),
            GraphSpec::RandomGeometric { n, radius, sigma, seed } => {
                let mut rng = agent_rng(seed.unwrap_or(base_seed), SETUP_RUN, 0);
                for _ in 0..RGG_ATTEMPTS {
                    let (g, _) = Graph::random_geometric(*n, *radius, *sigma, &mut rng)?;
                    if g.is_connected() {
                        return Ok(g);
                    }
                }
                Err(Error::Config(format!(
                    "no connected random geometric graph in {RGG_ATTEMPTS} draws (n={n}, radius={radius})"
                )))
            }
            GraphSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Graph::from_json(&text)
            }
            GraphSpec::Inline { n, edges } => GraphDoc {
                n: *n,
                edges: edges.clone(),
            }
            .build(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Mse,
    Logistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

impl NoiseSpec {
    pub fn profile(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            NoiseSpec::Uniform(s) => Ok(vec![*s; n]),
            NoiseSpec::PerAgent(v) if v.len() == n => Ok(v.clone()),
            NoiseSpec::PerAgent(v) => Err(Error::Config(format!(
                "noise profile has {} entries for {n} agents",
                v.len()
            ))),
        }
    }
}

/// Streaming data law. Regressors default to `R_u = I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regressor_variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regressor_covariance: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl ModelSpec {
    pub fn mse(noise: NoiseSpec) -> Self {
        ModelSpec {
            kind: ModelFamily::Mse,
            regressor_variance: None,
            regressor_covariance: None,
            noise: Some(noise),
            rho: None,
        }
    }

    pub fn build(&self, truth: TaskField) -> Result<StreamModel> {
        let n = truth.n_agents();
        if self.regressor_variance.is_some() && self.regressor_covariance.is_some() {
            return Err(Error::Config(
                "give regressor_variance or regressor_covariance, not both".into(),
            ));
        }
        let cov = match &self.regressor_covariance {
            Some(rows) => {
                let m = rows.len();
                if rows.iter().any(|r| r.len() != m) {
                    return Err(Error::Config("regressor_covariance must be square".into()));
                }
                Some(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
            }
            None => None,
        };
        let variance = self.regressor_variance.unwrap_or(1.0);
        match self.kind {
            ModelFamily::Mse => {
                if self.rho.is_some() {
                    return Err(Error::Config("rho applies to the logistic model only".into()));
                }
                let noise = self
                    .noise
                    .as_ref()
                    .ok_or_else(|| Error::Config("mse model needs a noise profile".into()))?
                    .profile(n)?;
                match cov {
                    Some(c) => StreamModel::mse(truth, c, noise),
                    None => StreamModel::mse_isotropic(truth, variance, noise),
                }
            }
            ModelFamily::Logistic => {
                if self.noise.is_some() {
                    return Err(Error::Config("noise applies to the mse model only".into()));
                }
                let rho = self.rho.unwrap_or(0.0);
                match cov {
                    Some(c) => StreamModel::logistic(truth, c, rho),
                    None => StreamModel::logistic_isotropic(truth, variance, rho),
                }
            }
        }
    }
}

fn default_scale() -> f64 {
    1.0
}

/// True task vectors `W^o`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthSpec {
    /// Graph-bandlimited field. `bandwidth_index` c selects `lambda_c`
    /// (1-based, ascending); `bandwidth` gives the cutoff directly.
    Smooth {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth_index: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<f64>,
        #[serde(default)]
        profile: AmplitudeProfile,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// The same vector at every agent.
    Constant {
        value: Vec<f64>,
    },
    /// One standard normal vector per cluster, times `scale`.
    Clustered {
        m: usize,
        clusters: Vec<usize>,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Independent standard normal vectors, times `scale`.
    Random {
        m: usize,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
    Inline {
        #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        blocks: Vec<Vec<f64>>,
    },
    /// Global parameter vector restricted by the overlapping strategy's interest map.
    Global {
        values: Vec<f64>,
    },
}

impl TruthSpec {
    pub fn build(
        &self,
        graph: &Graph,
        spectrum: &Spectrum,
        strategy: &StrategyConfig,
        base_seed: u64,
    ) -> Result<TaskField> {
        let n = graph.n_agents();
        let rng = |seed: &Option<u64>| agent_rng(seed.unwrap_or(base_seed), SETUP_RUN, 1);
        let field = match self {
            TruthSpec::Smooth {
                m,
                bandwidth_index,
                bandwidth,
                profile,
                scale,
                seed,
            } => {
                let cutoff = match (bandwidth_index, bandwidth) {
                    (Some(c), None) if (1..=n).contains(c) => spectrum.eigenvalues()[c - 1],
                    (None, Some(b)) => *b,
                    (None, None) => spectrum.lambda_max(),
                    _ => {
                        return Err(Error::Config(format!(
                            "smooth truth needs bandwidth_index in 1..={n} or bandwidth, not both"
                        )))
                    }
                };
                let mut f = synth_smooth_tasks(spectrum, *m, cutoff, *profile, &mut rng(seed))?;
                f.scale(*scale);
                f
            }
            TruthSpec::Constant { value } => TaskField::from_blocks(&vec![value.clone(); n]),
            TruthSpec::Clustered {
                m,
                clusters,
                scale,
                seed,
            } => {
                let part = ClusterPartition::from_sizes(clusters)?;
                if part.n_agents() != n {
                    return Err(Error::Config(format!(
                        "truth clusters cover {} agents, graph has {n}",
                        part.n_agents()
                    )));
                }
                let mut r = rng(seed);
                let centers: Vec<Vec<f64>> = (0..part.n_clusters())
                    .map(|_| (0..*m).map(|_| scale * r.sample::<f64, _>(StandardNormal)).collect())
                    .collect();
                let blocks: Vec<Vec<f64>> = (0..n).map(|k| centers[part.cluster_of(k)].clone()).collect();
                TaskField::from_blocks(&blocks)
            }
            TruthSpec::Random { m, scale, seed } => {
                let mut r = rng(seed);
                let mut f = TaskField::uniform(n, *m);
                for x in f.as_mut_slice() {
                    *x = scale * r.sample::<f64, _>(StandardNormal);
                }
                f
            }
            TruthSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                TaskField::from_json(&text)?
            }
            TruthSpec::Inline { m, blocks } => TaskFieldDoc {
                m: *m,
                blocks: blocks.clone(),
            }
            .into_field()?,
            TruthSpec::Global { values } => {
                if strategy.kind != StrategyKind::Overlapping {
                    return Err(Error::Config("global truth needs the overlapping strategy".into()));
                }
                let map: InterestMap = serde_json::from_value(strategy.payload.clone().unwrap_or_default())
                    .map_err(|e| Error::Config(format!("overlapping payload: {e}")))?;
                map.localize(values)?
            }
        };
        if field.n_agents() != n {
            return Err(Error::Config(format!(
                "truth has {} agents, graph has {n}",
                field.n_agents()
            )));
        }
        Ok(field)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

fn default_iters() -> usize {
    20_000
}

fn default_runs() -> usize {
    100
}

fn default_window() -> f64 {
    0.1
}

fn default_decimate() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub graph: GraphSpec,
    pub model: ModelSpec,
    pub truth: TruthSpec,
    pub strategy: StrategyConfig,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    /// Fraction of the trajectory averaged for steady-state values.
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<Vec<f64>>,
    /// Worker threads; `None` uses every core, 1 runs serially.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
    /// Record every `decimate`-th iteration (the last one is always kept).
    #[serde(default = "default_decimate")]
    pub decimate: usize,
    /// Initial estimates as per-agent blocks; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSpec, model: ModelSpec, truth: TruthSpec, strategy: StrategyConfig) -> Self {
        ExperimentConfig {
            schema: SCHEMA_VERSION,
            graph,
            model,
            truth,
            strategy,
            iters: default_iters(),
            runs: default_runs(),
            seed: 0,
            window: default_window(),
            eta_grid: None,
            parallel: None,
            decimate: default_decimate(),
            init: None,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config and resolves relative file paths against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let GraphSpec::File { path } = &mut config.graph {
            resolve(path);
        }
        if let TruthSpec::File { path } = &mut config.truth {
            resolve(path);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.iters == 0 || self.runs == 0 {
            return Err(Error::Config("iters and runs must be >= 1".into()));
        }
        if self.runs >= SETUP_RUN {
            return Err(Error::Config(format!("runs must be below {SETUP_RUN}")));
        }
        if !(self.window > 0.0 && self.window <= 1.0) {
            return Err(Error::Config(format!("window must lie in (0, 1], got {}", self.window)));
        }
        if self.decimate == 0 {
            return Err(Error::Config("decimate must be >= 1".into()));
        }
        if self.parallel == Some(0) {
            return Err(Error::Config("parallel must be >= 1".into()));
        }
        if let Some(grid) = &self.eta_grid {
            if grid.is_empty() || grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(Error::Config("eta_grid must hold finite values >= 0".into()));
            }
        }
        self.strategy.validate()
    }

    /// SHA-256 of the settings that determine the numbers produced; thread
    /// count and output location are excluded.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.parallel = None;
        canon.output = OutputSpec::default();
        let text = serde_json::to_string(&canon).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "graph": {"kind": "ring", "n": 6},
        "model": {"kind": "mse", "noise": 0.1},
        "truth": {"kind": "smooth", "m": 2, "bandwidth_index": 2},
        "strategy": {"kind": "laplacian_reg", "mu": 0.01, "eta": 1.0},
        "iters": 100,
        "runs": 2
    }"#;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.window, 0.1);
        assert_eq!(c.seed, 0);
        let back = ExperimentConfig::from_json(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let extra = MINIMAL.replace("\"runs\": 2", "\"runs\": 2, \"bogus\": 1");
        assert!(matches!(ExperimentConfig::from_json(&extra), Err(Error::Config(_))));
        let nested = MINIMAL.replace("\"n\": 6}", "\"n\": 6, \"w\": 1}");
        assert!(ExperimentConfig::from_json(&nested).is_err());
        let schema = MINIMAL.replace("\"schema\": 1", "\"schema\": 2");
        assert!(ExperimentConfig::from_json(&schema).is_err());
        let window = MINIMAL.replace("\"runs\": 2", "\"runs\": 2, \"window\": 0");
        assert!(ExperimentConfig::from_json(&window).is_err());
        let iters = MINIMAL.replace("\"iters\": 100", "\"iters\": 0");
        assert!(ExperimentConfig::from_json(&iters).is_err());
    }

    #[test]
    fn hash_ignores_parallelism() {
        let a = ExperimentConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        b.parallel = Some(4);
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn random_geometric_spec_is_connected_and_reproducible() {
        let spec = GraphSpec::RandomGeometric {
            n: 30,
            radius: 0.3,
            sigma: 0.2,
            seed: None,
        };
        let a = spec.build(5).unwrap();
        let b = spec.build(5).unwrap();
        assert!(a.is_connected());
        assert_eq!(a.adjacency(), b.adjacency());
    }
}
