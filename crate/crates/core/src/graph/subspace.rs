use nalgebra::DMatrix;

use super::Spectrum;
use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-10;

/// Agents grouped into clusters of consecutive indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterPartition {
    sizes: Vec<usize>,
    assignment: Vec<usize>,
}

impl ClusterPartition {
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "cluster sizes must be positive, got {sizes:?}"
            )));
        }
        let assignment = sizes
            .iter()
            .enumerate()
            .flat_map(|(q, &s)| std::iter::repeat_n(q, s))
            .collect();
        Ok(ClusterPartition {
            sizes: sizes.to_vec(),
            assignment,
        })
    }

    /// From an agent-to-cluster map; clusters must occupy consecutive index
    /// ranges and be numbered in order of appearance.
    pub fn from_assignment(assignment: &[usize]) -> Result<Self> {
        let mut sizes: Vec<usize> = Vec::new();
        for (k, &q) in assignment.iter().enumerate() {
            if q == sizes.len() {
                sizes.push(1);
            } else if q + 1 == sizes.len() {
                sizes[q] += 1;
            } else {
                return Err(Error::InvalidParameter(format!(
                    "agent {k} is assigned to cluster {q}; clusters must be consecutive and ordered"
                )));
            }
        }
        Self::from_sizes(&sizes)
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::from_sizes(&[n])
    }

    pub fn singletons(n: usize) -> Result<Self> {
        Self::from_sizes(&vec![1; n])
    }

    pub fn n_agents(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn cluster_of(&self, k: usize) -> usize {
        self.assignment[k]
    }

    pub fn same_cluster(&self, k: usize, l: usize) -> bool {
        self.assignment[k] == self.assignment[l]
    }

    pub fn members(&self, q: usize) -> std::ops::Range<usize> {
        let start: usize = self.sizes[..q].iter().sum();
        start..start + self.sizes[q]
    }
}

/// Full-column-rank basis `U` (`M_t x P`) with per-agent block sizes.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: DMatrix<f64>,
    sizes: Vec<usize>,
    semi_orthogonal: bool,
    scalar_basis: Option<DMatrix<f64>>,
}

fn numerical_rank(u: &DMatrix<f64>) -> usize {
    let sv = u.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

impl Subspace {
    pub fn new(basis: DMatrix<f64>, sizes: Vec<usize>) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        if basis.nrows() != total {
            return Err(Error::Dimension(format!(
                "basis has {} rows, block sizes sum to {total}",
                basis.nrows()
            )));
        }
        let cols = basis.ncols();
        let rank = numerical_rank(&basis);
        if cols == 0 || rank < cols {
            return Err(Error::RankDeficient { rank, cols });
        }
        let gram = basis.transpose() * &basis;
        let semi_orthogonal = (gram - DMatrix::identity(cols, cols)).norm() <= ORTHO_TOL;
        Ok(Subspace {
            basis,
            sizes,
            semi_orthogonal,
            scalar_basis: None,
        })
    }

    /// `U = U_s kron I_M` from an `N x P` scalar basis.
    pub fn from_scalar(scalar: DMatrix<f64>, m: usize) -> Result<Self> {
        let n = scalar.nrows();
        let basis = scalar.kronecker(&DMatrix::<f64>::identity(m, m));
        let mut s = Self::new(basis, vec![m; n])?;
        s.scalar_basis = Some(scalar);
        Ok(s)
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_semi_orthogonal(&self) -> bool {
        self.semi_orthogonal
    }

    /// `N x P_bar` factor when the basis has Kronecker form.
    pub fn scalar_basis(&self) -> Option<&DMatrix<f64>> {
        self.scalar_basis.as_ref()
    }

    pub fn contains(&self, stacked: &[f64], tol: f64) -> bool {
        let p = projector(self).expect("basis validated at construction");
        let x = nalgebra::DVector::from_column_slice(stacked);
        (&p * &x - &x).norm() <= tol * x.norm().max(1.0)
    }
}

/// Consensus subspace `(1/sqrt(N)) (1_N kron I_M)`.
pub fn consensus_subspace(n: usize, m: usize) -> Result<Subspace> {
    cluster_subspace(&ClusterPartition::single(n)?, m)
}

/// Block-diagonal subspace `diag{(1/sqrt(N_q)) (1_{N_q} kron I_M)}`.
pub fn cluster_subspace(partition: &ClusterPartition, m: usize) -> Result<Subspace> {
    let n = partition.n_agents();
    let mut scalar = DMatrix::zeros(n, partition.n_clusters());
    for q in 0..partition.n_clusters() {
        let value = 1.0 / (partition.sizes()[q] as f64).sqrt();
        for k in partition.members(q) {
            scalar[(k, q)] = value;
        }
    }
    Subspace::from_scalar(scalar, m)
}

/// Span of the first `count` Laplacian eigenvectors, `[v_1..v_c] kron I_M`.
pub fn laplacian_band_subspace(spectrum: &Spectrum, count: usize, m: usize) -> Result<Subspace> {
    if count == 0 || count > spectrum.n() {
        return Err(Error::InvalidParameter(format!(
            "band size must be in 1..={}, got {count}",
            spectrum.n()
        )));
    }
    let scalar = spectrum.eigenvectors().columns(0, count).into_owned();
    Subspace::from_scalar(scalar, m)
}

/// Orthogonal projector `P_U = U (U^T U)^{-1} U^T`.
pub fn projector(subspace: &Subspace) -> Result<DMatrix<f64>> {
    let u = subspace.basis();
    let gram = u.transpose() * u;
    let chol = gram.cholesky().ok_or(Error::RankDeficient {
        rank: numerical_rank(u),
        cols: u.ncols(),
    })?;
    let solved = chol.solve(&u.transpose());
    Ok(u * solved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn consensus_two_agents() {
        let s = consensus_subspace(2, 1).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((s.basis()[(0, 0)] - r).abs() < 1e-15);
        assert!((s.basis()[(1, 0)] - r).abs() < 1e-15);
        assert!(s.is_semi_orthogonal());
        let p = projector(&s).unwrap();
        for v in p.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
        let y = &p * nalgebra::DVector::from_column_slice(&[1.0, 0.0]);
        assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clustered_example() {
        let part = ClusterPartition::from_sizes(&[2, 1]).unwrap();
        let s = cluster_subspace(&part, 1).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let expected = DMatrix::from_row_slice(3, 2, &[r, 0.0, r, 0.0, 0.0, 1.0]);
        assert!((s.basis() - expected).norm() < 1e-15);
    }

    #[test]
    fn partition_validation() {
        assert!(ClusterPartition::from_sizes(&[2, 0]).is_err());
        assert!(ClusterPartition::from_assignment(&[0, 1, 0]).is_err());
        let p = ClusterPartition::from_assignment(&[0, 0, 1, 1, 1]).unwrap();
        assert_eq!(p.sizes(), &[2, 3]);
        assert_eq!(p.members(1), 2..5);
        assert!(p.same_cluster(2, 4));
    }

    #[test]
    fn rank_deficient_basis_is_rejected() {
        let u = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(
            Subspace::new(u, vec![1, 1, 1]),
            Err(Error::RankDeficient { rank: 1, cols: 2 })
        ));
    }

    #[test]
    fn bandlimited_field_is_fixed_by_band_projector() {
        use crate::data::{agent_rng, synth_smooth_tasks, AmplitudeProfile};
        use crate::graph::{build_laplacian, Graph};
        let g = Graph::ring(9, 1.0).unwrap();
        let spec = build_laplacian(&g).unwrap();
        let c = 3;
        let lc = spec.eigenvalues()[c - 1];
        // make sure the band edge is not inside a degenerate pair
        assert!(spec.eigenvalues()[c] > lc + 1e-9);
        let mut rng = agent_rng(4, 0, 0);
        let w = synth_smooth_tasks(&spec, 2, lc, AmplitudeProfile::Flat, &mut rng).unwrap();
        let s = laplacian_band_subspace(&spec, c, 2).unwrap();
        let p = projector(&s).unwrap();
        let x = w.to_dvector();
        assert!((&p * &x - &x).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn cluster_bases_are_semi_orthogonal(sizes in prop::collection::vec(1usize..5, 1..5), m in 1usize..4) {
            let part = ClusterPartition::from_sizes(&sizes).unwrap();
            let s = cluster_subspace(&part, m).unwrap();
            let p = s.dim();
            prop_assert!((s.basis().transpose() * s.basis() - DMatrix::identity(p, p)).norm() < 1e-12);
        }

        #[test]
        fn projector_properties_and_basis_invariance(
            rows in 3usize..8,
            seed in prop::collection::vec(-1.0f64..1.0, 64),
            gseed in prop::collection::vec(-1.0f64..1.0, 16),
        ) {
            let cols = 2;
            let u = DMatrix::from_fn(rows, cols, |i, j| seed[i * cols + j] + if i == j { 2.0 } else { 0.0 });
            let g = DMatrix::from_fn(cols, cols, |i, j| gseed[i * cols + j] + if i == j { 3.0 } else { 0.0 });
            let s = Subspace::new(u.clone(), vec![1; rows]).unwrap();
            let p = projector(&s).unwrap();
            prop_assert!((&p * &p - &p).norm() < 1e-10);
            prop_assert!((&p - p.transpose()).norm() < 1e-10);
            prop_assert!((&p * &u - &u).norm() < 1e-10 * u.norm());
            let s2 = Subspace::new(&u * g, vec![1; rows]).unwrap();
            let p2 = projector(&s2).unwrap();
            prop_assert!((p - p2).norm() < 1e-9);
        }
    }
}
