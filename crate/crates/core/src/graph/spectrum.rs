use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Graph;
use crate::data::TaskField;
use crate::error::{Error, Result};

/// Laplacian `L = diag(C 1) - C` with its full eigendecomposition
/// `L = V diag(lambda) V^T`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    laplacian: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Columns are the orthonormal eigenvectors `v_1, ..., v_N`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.n() - 1]
    }

    /// `|| L - V Lambda V^T ||_F`
    pub fn reconstruction_residual(&self) -> f64 {
        let v = &self.eigenvectors;
        let rebuilt = v * DMatrix::from_diagonal(&self.eigenvalues) * v.transpose();
        (&self.laplacian - rebuilt).norm()
    }

    /// `|| V^T V - I ||_F`
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.n();
        (self.eigenvectors.transpose() * &self.eigenvectors - DMatrix::identity(n, n)).norm()
    }
}

const MAX_EIGEN_SWEEPS: usize = 10_000;

pub fn build_laplacian(graph: &Graph) -> Result<Spectrum> {
    let c = graph.adjacency();
    let n = c.nrows();
    let mut laplacian = -c.clone();
    for k in 0..n {
        laplacian[(k, k)] = c.row(k).sum();
    }

    let eig = SymmetricEigen::try_new(laplacian.clone(), f64::EPSILON, MAX_EIGEN_SWEEPS)
        .ok_or_else(|| Error::Eigen(format!("symmetric eigensolver did not converge on a {n}x{n} Laplacian")))?;
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = laplacian.norm().max(1.0);
    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut lambda = eig.eigenvalues[src];
        // Laplacians are PSD; clear round-off below zero.
        if lambda < 0.0 && lambda > -1e-10 * scale {
            lambda = 0.0;
        }
        eigenvalues[dst] = lambda;
        let mut col = eig.eigenvectors.column(src).into_owned();
        // Sign convention: largest-magnitude entry positive.
        let pivot = col
            .iter()
            .enumerate()
            .fold(
                (0, 0.0f64),
                |best, (i, &x)| {
                    if x.abs() > best.1.abs() + 1e-12 {
                        (i, x)
                    } else {
                        best
                    }
                },
            )
            .0;
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }

    Ok(Spectrum {
        laplacian,
        eigenvalues,
        eigenvectors,
    })
}

fn check_field(field: &TaskField, spectrum: &Spectrum) -> Result<usize> {
    let m = field.require_uniform()?;
    if field.n_agents() != spectrum.n() {
        return Err(Error::Dimension(format!(
            "field has {} agents, graph has {}",
            field.n_agents(),
            spectrum.n()
        )));
    }
    Ok(m)
}

/// Smoothness `W^T (L kron I_M) W`.
pub fn smoothness(field: &TaskField, spectrum: &Spectrum) -> Result<f64> {
    check_field(field, spectrum)?;
    let l = spectrum.laplacian();
    let n = spectrum.n();
    let mut total = 0.0;
    for k in 0..n {
        for j in 0..n {
            let lkj = l[(k, j)];
            if lkj != 0.0 {
                let inner: f64 = field.block(k).iter().zip(field.block(j)).map(|(a, b)| a * b).sum();
                total += lkj * inner;
            }
        }
    }
    Ok(total)
}

/// Smoothness as `(1/2) sum_k sum_{l in N_k} c_kl ||w_k - w_l||^2`.
pub fn smoothness_edge_sum(field: &TaskField, spectrum: &Spectrum) -> Result<f64> {
    check_field(field, spectrum)?;
    let l = spectrum.laplacian();
    let n = spectrum.n();
    let mut total = 0.0;
    for k in 0..n {
        for j in 0..n {
            let c = -l[(k, j)];
            if j != k && c != 0.0 {
                let d2: f64 = field
                    .block(k)
                    .iter()
                    .zip(field.block(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                total += c * d2;
            }
        }
    }
    Ok(0.5 * total)
}

/// Smoothness as `sum_m lambda_m ||wbar_m||^2`.
pub fn smoothness_spectral(field: &TaskField, spectrum: &Spectrum) -> Result<f64> {
    let coeffs = graph_fourier(field, spectrum)?;
    Ok(spectrum
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(m, lambda)| lambda * coeffs.block(m).iter().map(|x| x * x).sum::<f64>())
        .sum())
}

/// Graph Fourier transform `wbar_m = (v_m^T kron I_M) W`; block `m` of the
/// result holds the coefficient of mode `m`.
pub fn graph_fourier(field: &TaskField, spectrum: &Spectrum) -> Result<TaskField> {
    let m = check_field(field, spectrum)?;
    let v = spectrum.eigenvectors();
    let n = spectrum.n();
    let mut out = TaskField::uniform(n, m);
    for mode in 0..n {
        let dst = out.block_mut(mode);
        for k in 0..n {
            let vk = v[(k, mode)];
            for (d, w) in dst.iter_mut().zip(field.block(k)) {
                *d += vk * w;
            }
        }
    }
    Ok(out)
}

/// Inverse transform `W = (V kron I_M) wbar`.
pub fn inverse_graph_fourier(coeffs: &TaskField, spectrum: &Spectrum) -> Result<TaskField> {
    let m = check_field(coeffs, spectrum)?;
    let v = spectrum.eigenvectors();
    let n = spectrum.n();
    let mut out = TaskField::uniform(n, m);
    for k in 0..n {
        let dst = out.block_mut(k);
        for mode in 0..n {
            let vk = v[(k, mode)];
            for (d, c) in dst.iter_mut().zip(coeffs.block(mode)) {
                *d += vk * c;
            }
        }
    }
    Ok(out)
}
