use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};

pub const DEFAULT_CHEBYSHEV_DEGREE: usize = 5;

/// Number of Gauss-Chebyshev nodes used to compute series coefficients.
const CHEBYSHEV_NODES: usize = 512;
/// Dense grid used to report the fit error.
const FIT_GRID: usize = 2001;

/// Closed-form kernels that are approximated by a Chebyshev polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "function", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelFn {
    /// `r(lambda) = lambda^exponent`
    Power { exponent: f64 },
    /// `r(lambda) = exp(tau * lambda) - 1`
    Exp { tau: f64 },
}

impl KernelFn {
    pub fn eval(&self, lambda: f64) -> f64 {
        match *self {
            KernelFn::Power { exponent } => lambda.max(0.0).powf(exponent),
            KernelFn::Exp { tau } => (tau * lambda).exp_m1(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum KernelKind {
    Polynomial,
    Function(KernelFn),
}

/// Nonnegative function `r` on the Laplacian spectrum together with the
/// monomial coefficients `beta_0..beta_S` the distributed recursion runs.
///
/// For closed-form kernels the coefficients are the truncated shifted
/// Chebyshev expansion on `[0, lambda_N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralKernel {
    kind: KernelKind,
    coefficients: Vec<f64>,
    fit_error: f64,
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, b| acc * x + b)
}

impl SpectralKernel {
    /// `r(lambda) = lambda`, the Laplacian regularizer.
    pub fn laplacian() -> Self {
        SpectralKernel {
            kind: KernelKind::Polynomial,
            coefficients: vec![0.0, 1.0],
            fit_error: 0.0,
        }
    }

    pub fn polynomial(coefficients: Vec<f64>, spectrum: &Spectrum) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidKernel("polynomial needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidKernel("non-finite polynomial coefficient".into()));
        }
        let kernel = SpectralKernel {
            kind: KernelKind::Polynomial,
            coefficients,
            fit_error: 0.0,
        };
        kernel.validate(spectrum)?;
        Ok(kernel)
    }

    /// Closed-form kernel with a degree-`degree` Chebyshev surrogate on `[0, lambda_N]`.
    pub fn chebyshev(function: KernelFn, degree: usize, spectrum: &Spectrum) -> Result<Self> {
        let mut fit = chebyshev_fit(|x| function.eval(x), degree, spectrum.lambda_max())?;
        // The truncated series can dip below zero by up to the fit error; lift
        // it by the deficit on the spectrum so r(L) stays positive semidefinite.
        let deficit = spectrum
            .eigenvalues()
            .iter()
            .map(|&l| horner(&fit.coefficients, l))
            .fold(0.0, f64::min);
        if deficit < 0.0 && -deficit <= fit.max_error + 1e-12 {
            fit.coefficients[0] -= deficit;
            fit.max_error -= deficit;
        }
        let kernel = SpectralKernel {
            kind: KernelKind::Function(function),
            coefficients: fit.coefficients,
            fit_error: fit.max_error,
        };
        kernel.validate(spectrum)?;
        Ok(kernel)
    }

    fn validate(&self, spectrum: &Spectrum) -> Result<()> {
        let scale = spectrum
            .eigenvalues()
            .iter()
            .map(|&l| self.eval_exact(l).abs())
            .fold(1.0, f64::max);
        for &lambda in spectrum.eigenvalues().iter() {
            let exact = self.eval_exact(lambda);
            let effective = self.eval(lambda);
            if !exact.is_finite() || exact < -1e-12 * scale {
                return Err(Error::InvalidKernel(format!(
                    "r({lambda}) = {exact} is negative on the spectrum"
                )));
            }
            if effective < -1e-6 * scale {
                return Err(Error::InvalidKernel(format!(
                    "polynomial surrogate is negative at lambda = {lambda} ({effective}); raise the degree"
                )));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Monomial coefficients `beta_0..beta_S`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Max-abs error of the Chebyshev surrogate on a dense grid (0 for polynomials).
    pub fn fit_error(&self) -> f64 {
        self.fit_error
    }

    pub fn is_polynomial(&self) -> bool {
        self.kind == KernelKind::Polynomial
    }

    pub fn function(&self) -> Option<KernelFn> {
        match self.kind {
            KernelKind::Function(f) => Some(f),
            KernelKind::Polynomial => None,
        }
    }

    /// Polynomial actually applied by the distributed recursion.
    pub fn eval(&self, lambda: f64) -> f64 {
        horner(&self.coefficients, lambda)
    }

    pub fn eval_exact(&self, lambda: f64) -> f64 {
        match self.kind {
            KernelKind::Polynomial => self.eval(lambda),
            KernelKind::Function(f) => f.eval(lambda),
        }
    }

    /// Effective kernel values `r(lambda_m)` on the spectrum.
    pub fn on_spectrum(&self, spectrum: &Spectrum) -> Vec<f64> {
        spectrum.eigenvalues().iter().map(|&l| self.eval(l)).collect()
    }

    pub fn is_monotone_on(&self, spectrum: &Spectrum) -> bool {
        let values = self.on_spectrum(spectrum);
        values.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0))
    }
}

/// Matrix function `r(L) = V r(Lambda) V^T` using the exact kernel.
pub fn apply_spectral_kernel(kernel: &SpectralKernel, spectrum: &Spectrum) -> Result<DMatrix<f64>> {
    let values: Vec<f64> = spectrum.eigenvalues().iter().map(|&l| kernel.eval_exact(l)).collect();
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if let Some(bad) = values.iter().position(|&v| v < -1e-12 * scale) {
        return Err(Error::InvalidKernel(format!(
            "r(lambda_{}) = {} is negative",
            bad + 1,
            values[bad]
        )));
    }
    let v = spectrum.eigenvectors();
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= values[j];
    }
    Ok(scaled * v.transpose())
}

/// `sum_s beta_s L^s` by Horner's rule on matrices.
pub fn polynomial_of_laplacian(coefficients: &[f64], laplacian: &DMatrix<f64>) -> DMatrix<f64> {
    let n = laplacian.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for &beta in coefficients.iter().rev() {
        acc = &acc * laplacian;
        for k in 0..n {
            acc[(k, k)] += beta;
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevFit {
    /// Monomial coefficients in `lambda`, lowest degree first.
    pub coefficients: Vec<f64>,
    /// Max-abs error sampled on a dense grid over the interval.
    pub max_error: f64,
}

/// Degree-`degree` truncated shifted-Chebyshev expansion of `r` on `[0, upper]`,
/// converted to the monomial basis.
pub fn chebyshev_fit(r: impl Fn(f64) -> f64, degree: usize, upper: f64) -> Result<ChebyshevFit> {
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Chebyshev interval upper end must be positive, got {upper}"
        )));
    }
    let to_lambda = |x: f64| 0.5 * upper * (x + 1.0);

    // Series coefficients by Gauss-Chebyshev quadrature.
    let k = CHEBYSHEV_NODES.max(4 * (degree + 1));
    let nodes: Vec<f64> = (0..k)
        .map(|i| (std::f64::consts::PI * (i as f64 + 0.5) / k as f64).cos())
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&x| r(to_lambda(x))).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("kernel is not finite on the interval".into()));
    }
    let series: Vec<f64> = (0..=degree)
        .map(|j| {
            let sum: f64 = nodes
                .iter()
                .zip(&values)
                .map(|(&x, &f)| f * (j as f64 * x.acos()).cos())
                .sum();
            2.0 * sum / k as f64
        })
        .collect();

    // T_j(a lambda + b) as monomials in lambda.
    let a = 2.0 / upper;
    let b = -1.0;
    let mut coefficients = vec![0.0; degree + 1];
    let mut t_prev = vec![1.0];
    let mut t_curr = vec![b, a];
    for (j, &c) in series.iter().enumerate() {
        let weight = if j == 0 { 0.5 * c } else { c };
        let tj: &[f64] = match j {
            0 => &t_prev,
            _ => &t_curr,
        };
        for (dst, &t) in coefficients.iter_mut().zip(tj) {
            *dst += weight * t;
        }
        if j >= 1 {
            // T_{j+1} = 2 (a lambda + b) T_j - T_{j-1}
            let mut next = vec![0.0; t_curr.len() + 1];
            for (i, &t) in t_curr.iter().enumerate() {
                next[i] += 2.0 * b * t;
                next[i + 1] += 2.0 * a * t;
            }
            for (i, &t) in t_prev.iter().enumerate() {
                next[i] -= t;
            }
            t_prev = std::mem::replace(&mut t_curr, next);
        }
    }

    let max_error = (0..FIT_GRID)
        .map(|i| {
            let lambda = upper * i as f64 / (FIT_GRID - 1) as f64;
            (horner(&coefficients, lambda) - r(lambda)).abs()
        })
        .fold(0.0, f64::max);

    Ok(ChebyshevFit {
        coefficients,
        max_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, Graph};
    use proptest::prelude::*;

    fn path2() -> Spectrum {
        build_laplacian(&Graph::path(2, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn linear_fit_is_exact() {
        let fit = chebyshev_fit(|x| x, 1, 2.0).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-13);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-13);
        assert!(fit.max_error < 1e-13);
    }

    #[test]
    fn cubic_fit_is_exact() {
        let fit = chebyshev_fit(|x| x * x * x, 3, 2.0).unwrap();
        let expected = [0.0, 0.0, 0.0, 1.0];
        for (c, e) in fit.coefficients.iter().zip(expected) {
            assert!((c - e).abs() < 1e-12, "{:?}", fit.coefficients);
        }
        assert!(fit.max_error < 1e-12);
    }

    #[test]
    fn exp_fit_improves_with_degree() {
        let e4 = chebyshev_fit(f64::exp, 4, 2.0).unwrap().max_error;
        let e5 = chebyshev_fit(f64::exp, 5, 2.0).unwrap().max_error;
        assert!(e5 < e4, "{e5} !< {e4}");
        assert!(e5 < 1e-3);
    }

    #[test]
    fn fit_rejects_empty_interval() {
        assert!(chebyshev_fit(|x| x, 2, 0.0).is_err());
        assert!(chebyshev_fit(|x| x, 2, -1.0).is_err());
    }

    #[test]
    fn identity_and_constant_kernels() {
        let s = build_laplacian(&Graph::ring(5, 1.3).unwrap()).unwrap();
        let lap = apply_spectral_kernel(&SpectralKernel::laplacian(), &s).unwrap();
        assert!((lap - s.laplacian()).norm() < 1e-12);
        let one = SpectralKernel::polynomial(vec![1.0], &s).unwrap();
        let eye = apply_spectral_kernel(&one, &s).unwrap();
        assert!((eye - DMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn cubic_kernel_on_two_nodes() {
        let s = path2();
        let cube = SpectralKernel::polynomial(vec![0.0, 0.0, 0.0, 1.0], &s).unwrap();
        let m = apply_spectral_kernel(&cube, &s).unwrap();
        let eig = m.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        assert!(lo.abs() < 1e-12);
        assert!((hi - 8.0).abs() < 1e-12);
    }

    #[test]
    fn negative_kernel_is_rejected() {
        let s = path2();
        assert!(SpectralKernel::polynomial(vec![0.0, -1.0], &s).is_err());
        assert!(SpectralKernel::polynomial(vec![], &s).is_err());
    }

    #[test]
    fn chebyshev_kernel_tracks_closed_form() {
        let s = build_laplacian(&Graph::ring(8, 1.0).unwrap()).unwrap();
        let k = SpectralKernel::chebyshev(KernelFn::Exp { tau: 0.5 }, 6, &s).unwrap();
        for &l in s.eigenvalues().iter() {
            assert!((k.eval(l) - k.eval_exact(l)).abs() <= k.fit_error() + 1e-12);
        }
        assert!(k.is_monotone_on(&s));
    }

    proptest! {
        #[test]
        fn polynomial_kernel_matches_horner(
            n in 2usize..10,
            coeffs in prop::collection::vec(0.0f64..2.0, 1..6),
            weight in 0.2f64..2.0,
        ) {
            let s = build_laplacian(&Graph::ring(n, weight).unwrap()).unwrap();
            let k = SpectralKernel::polynomial(coeffs.clone(), &s).unwrap();
            let spectral = apply_spectral_kernel(&k, &s).unwrap();
            let direct = polynomial_of_laplacian(&coeffs, s.laplacian());
            prop_assert!((&spectral - &direct).norm() <= 1e-9 * direct.norm().max(1.0));
        }
    }
}
