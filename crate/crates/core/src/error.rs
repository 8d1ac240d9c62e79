use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid spectral kernel: {0}")]
    InvalidKernel(String),

    #[error("basis is rank deficient (rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("basis is not semi-orthogonal (|U^T U - I|_F = {0:.3e})")]
    NotSemiOrthogonal(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unstable configuration: {0}")]
    Unstable(String),

    #[error("infeasible combination matrix: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("run {run} diverged at iteration {iter} (mu={mu}, eta={eta})")]
    Divergence { run: usize, iter: usize, mu: f64, eta: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
