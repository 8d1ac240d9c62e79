use nalgebra::{DMatrix, Schur, SymmetricEigen};
use serde::Serialize;

use super::{projector, Graph, Subspace};
use crate::data::TaskField;
use crate::error::{Error, Result};

/// Highest power of `A` inspected by the semi-convergence check.
pub const DEFAULT_FEASIBILITY_POWER: usize = 200;
/// `rho(A - P_U)` must stay below this value.
const RADIUS_LIMIT: f64 = 1.0 - 1e-8;
const FIXED_POINT_TOL: f64 = 1e-9;

/// Combination matrix `A` of the social step.
///
/// `Scalar` stores the `N x N` weights `a_kl` applied as `a_kl I_M`;
/// `Block` stores the full `M_t x M_t` matrix with per-agent block sizes.
#[derive(Clone, Debug, PartialEq)]
pub enum CombinationMatrix {
    Scalar(DMatrix<f64>),
    Block { matrix: DMatrix<f64>, sizes: Vec<usize> },
}

impl CombinationMatrix {
    pub fn block(matrix: DMatrix<f64>, sizes: Vec<usize>) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::Dimension(format!(
                "combination matrix is {}x{}, block sizes sum to {total}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(CombinationMatrix::Block { matrix, sizes })
    }

    pub fn n_agents(&self) -> usize {
        match self {
            CombinationMatrix::Scalar(a) => a.nrows(),
            CombinationMatrix::Block { sizes, .. } => sizes.len(),
        }
    }

    pub fn scalar_weights(&self) -> Option<&DMatrix<f64>> {
        match self {
            CombinationMatrix::Scalar(a) => Some(a),
            CombinationMatrix::Block { .. } => None,
        }
    }

    /// Dense `M_t x M_t` form for agents with the given block sizes.
    pub fn to_dense(&self, sizes: &[usize]) -> Result<DMatrix<f64>> {
        match self {
            CombinationMatrix::Scalar(a) => {
                let m = uniform(sizes)?;
                if a.nrows() != sizes.len() {
                    return Err(Error::Dimension(format!(
                        "{} weights for {} agents",
                        a.nrows(),
                        sizes.len()
                    )));
                }
                Ok(a.kronecker(&DMatrix::<f64>::identity(m, m)))
            }
            CombinationMatrix::Block { matrix, sizes: own } => {
                if own != sizes {
                    return Err(Error::Dimension("block sizes differ".into()));
                }
                Ok(matrix.clone())
            }
        }
    }

    /// True when block `(k, l)` has a nonzero entry.
    pub fn block_nonzero(&self, k: usize, l: usize) -> bool {
        match self {
            CombinationMatrix::Scalar(a) => a[(k, l)] != 0.0,
            CombinationMatrix::Block { matrix, sizes } => {
                let off = offsets(sizes);
                matrix
                    .view((off[k], off[l]), (sizes[k], sizes[l]))
                    .iter()
                    .any(|&x| x != 0.0)
            }
        }
    }

    /// Pairs `(k, l)`, `l != k`, that are nonzero without being graph edges.
    pub fn sparsity_violations(&self, graph: &Graph) -> Vec<(usize, usize)> {
        let n = self.n_agents();
        let mut out = Vec::new();
        for k in 0..n {
            for l in 0..n {
                if l != k && !graph.has_edge(k, l) && self.block_nonzero(k, l) {
                    out.push((k, l));
                }
            }
        }
        out
    }

    /// Largest deviation from row/column sums of one, or `None` when a
    /// weight is negative. Scalar form only.
    pub fn stochasticity_defect(&self) -> Option<f64> {
        let a = self.scalar_weights()?;
        if a.iter().any(|&x| x < 0.0) {
            return None;
        }
        let rows = a.row_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = a.column_iter().map(|c| (c.sum() - 1.0).abs());
        Some(rows.chain(cols).fold(0.0, f64::max))
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        self.stochasticity_defect().is_some_and(|d| d <= tol)
    }

    /// `out = A psi`, block by block.
    pub fn apply_into(&self, psi: &TaskField, out: &mut TaskField) {
        match self {
            CombinationMatrix::Scalar(a) => {
                let n = a.nrows();
                for k in 0..n {
                    let dst = out.block_mut(k);
                    dst.iter_mut().for_each(|x| *x = 0.0);
                    for l in 0..n {
                        let w = a[(k, l)];
                        if w != 0.0 {
                            for (d, p) in dst.iter_mut().zip(psi.block(l)) {
                                *d += w * p;
                            }
                        }
                    }
                }
            }
            CombinationMatrix::Block { matrix, .. } => {
                let x = psi.as_slice();
                for (i, dst) in out.as_mut_slice().iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, &xj) in x.iter().enumerate() {
                        let w = matrix[(i, j)];
                        if w != 0.0 {
                            acc += w * xj;
                        }
                    }
                    *dst = acc;
                }
            }
        }
    }

    pub fn apply(&self, psi: &TaskField) -> TaskField {
        let mut out = psi.clone();
        self.apply_into(psi, &mut out);
        out
    }
}

fn uniform(sizes: &[usize]) -> Result<usize> {
    let m = *sizes.first().ok_or_else(|| Error::Dimension("no agents".into()))?;
    if sizes.iter().any(|&s| s != m) {
        return Err(Error::Dimension(
            "scalar combination weights need equal block lengths".into(),
        ));
    }
    Ok(m)
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(sizes.len() + 1);
    off.push(0);
    for s in sizes {
        off.push(off.last().unwrap() + s);
    }
    off
}

/// Metropolis weights without the connectivity requirement.
pub(crate) fn metropolis_matrix(graph: &Graph) -> DMatrix<f64> {
    let n = graph.n_agents();
    let mut a = DMatrix::zeros(n, n);
    for k in 0..n {
        let nk = graph.degree(k) + 1;
        let mut off_diag = 0.0;
        for &(l, _) in graph.neighbors(k) {
            let nl = graph.degree(l) + 1;
            let w = 1.0 / nk.max(nl) as f64;
            a[(k, l)] = w;
            off_diag += w;
        }
        a[(k, k)] = 1.0 - off_diag;
    }
    a
}

/// Metropolis rule `a_kl = 1 / max(n_k, n_l)` with `n_k = |N_k| + 1`.
pub fn metropolis_weights(graph: &Graph) -> Result<CombinationMatrix> {
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(CombinationMatrix::Scalar(metropolis_matrix(graph)))
}

/// Laplacian rule `A = I - L / (1 + d_max)` with `d_max` the largest weighted degree.
pub fn laplacian_rule_weights(graph: &Graph) -> Result<CombinationMatrix> {
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = graph.n_agents();
    let d_max = (0..n).map(|k| graph.weighted_degree(k)).fold(0.0, f64::max);
    let scale = 1.0 / (1.0 + d_max);
    let mut a = DMatrix::zeros(n, n);
    for k in 0..n {
        for &(l, c) in graph.neighbors(k) {
            a[(k, l)] = scale * c;
        }
        a[(k, k)] = 1.0 - scale * graph.weighted_degree(k);
    }
    Ok(CombinationMatrix::Scalar(a))
}

/// Per-constraint outcome of [`check_feasibility`].
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    /// `||A U - U||_F`
    pub right_residual: f64,
    /// `||U^T A - U^T||_F`
    pub left_residual: f64,
    /// `rho(A - P_U)`
    pub spectral_radius: f64,
    pub sparsity_violations: Vec<(usize, usize)>,
    /// `||A^i - P_U||_2` for `i = 1..=max_power`.
    pub power_norms: Vec<f64>,
}

impl FeasibilityReport {
    pub fn right_fixed(&self) -> bool {
        self.right_residual <= FIXED_POINT_TOL
    }

    pub fn left_fixed(&self) -> bool {
        self.left_residual <= FIXED_POINT_TOL
    }

    pub fn radius_ok(&self) -> bool {
        self.spectral_radius < RADIUS_LIMIT
    }

    pub fn sparsity_ok(&self) -> bool {
        self.sparsity_violations.is_empty()
    }

    /// `||A^i - P_U||` shrinks over the inspected powers (or is already zero).
    pub fn semi_convergent(&self) -> bool {
        match (self.power_norms.first(), self.power_norms.last()) {
            (Some(&first), Some(&last)) => last <= 1e-12 || last < first * (1.0 - 1e-8),
            _ => false,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    /// Names of the violated constraints.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.right_fixed() {
            out.push("AU=U");
        }
        if !self.left_fixed() {
            out.push("U^T A=U^T");
        }
        if !self.radius_ok() {
            out.push("rho(A-P_U)<1");
        }
        if !self.sparsity_ok() {
            out.push("sparsity");
        }
        if !self.semi_convergent() {
            out.push("semi-convergence");
        }
        out
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let symmetric = (m - m.transpose()).norm() <= 1e-14 * m.norm().max(1.0);
    if symmetric {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
        return Ok(eig.eigenvalues.iter().fold(0.0, |acc, x| acc.max(x.abs())));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().fold(0.0, |acc, z| acc.max(z.norm())))
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

pub fn check_feasibility(a: &CombinationMatrix, subspace: &Subspace, graph: &Graph) -> Result<FeasibilityReport> {
    check_feasibility_with(a, subspace, graph, DEFAULT_FEASIBILITY_POWER)
}

/// Verifies `A U = U`, `U^T A = U^T`, `rho(A - P_U) < 1`, the graph sparsity
/// pattern, and that `||A^i - P_U||` decays up to `max_power`.
pub fn check_feasibility_with(
    a: &CombinationMatrix,
    subspace: &Subspace,
    graph: &Graph,
    max_power: usize,
) -> Result<FeasibilityReport> {
    if a.n_agents() != graph.n_agents() || subspace.sizes().len() != graph.n_agents() {
        return Err(Error::Dimension(format!(
            "A has {} agents, subspace {}, graph {}",
            a.n_agents(),
            subspace.sizes().len(),
            graph.n_agents()
        )));
    }
    let dense = a.to_dense(subspace.sizes())?;
    let u = subspace.basis();
    let p = projector(subspace)?;

    let right_residual = (&dense * u - u).norm();
    let left_residual = (u.transpose() * &dense - u.transpose()).norm();
    let spectral_radius = spectral_radius(&(&dense - &p))?;
    let sparsity_violations = a.sparsity_violations(graph);

    let mut power_norms = Vec::with_capacity(max_power);
    let mut power = dense.clone();
    for i in 1..=max_power {
        if i > 1 {
            power = &power * &dense;
        }
        power_norms.push(spectral_norm(&(&power - &p)));
    }

    Ok(FeasibilityReport {
        right_residual,
        left_residual,
        spectral_radius,
        sparsity_violations,
        power_norms,
    })
}
