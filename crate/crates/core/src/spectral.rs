//! Orthonormal modal basis of the scaled Laplacian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::SymmetrizationData;

/// Eigenvalues with `|lambda| < ZERO_CLAMP` are snapped to exactly zero.
pub const ZERO_CLAMP: f64 = 1e-9;

/// Relative eigenvalue spacing below which modes count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Eigenpairs of `S0`, sorted by ascending eigenvalue.
///
/// Column `mu` of `vectors` is `v_mu`; its first component with magnitude
/// above `1e-12` is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub lambdas: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// `omega_mu = sqrt(lambda_mu)`.
    pub omegas: Vec<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Component `i` of eigenvector `mu`.
    #[inline]
    pub fn component(&self, mu: usize, i: usize) -> f64 {
        self.vectors[(i, mu)]
    }

    pub fn vector(&self, mu: usize) -> DVector<f64> {
        self.vectors.column(mu).into_owned()
    }

    pub fn omega_max(&self) -> f64 {
        self.omegas.last().copied().unwrap_or(0.0)
    }

    /// Smallest strictly positive eigenfrequency.
    pub fn smallest_nonzero_omega(&self) -> Option<f64> {
        self.omegas.iter().copied().find(|&w| w > 0.0)
    }

    /// `sum_mu lambda_mu v_mu v_mu^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.lambdas));
        &self.vectors * lambda * self.vectors.transpose()
    }

    /// Index ranges of modes sharing an eigenvalue, relative tolerance
    /// `DEGENERACY_TOL`.
    pub fn degenerate_clusters(&self) -> Vec<std::ops::Range<usize>> {
        let mut clusters = Vec::new();
        let mut start = 0;
        for mu in 1..=self.n() {
            let split = mu == self.n() || {
                let (a, b) = (self.lambdas[mu - 1], self.lambdas[mu]);
                (b - a).abs() > DEGENERACY_TOL * a.abs().max(b.abs()).max(1.0)
            };
            if split {
                clusters.push(start..mu);
                start = mu;
            }
        }
        clusters
    }

    /// Mode whose eigenfrequency is closest to `omega`.
    pub fn nearest_mode(&self, omega: f64) -> usize {
        self.omegas
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - omega).abs().total_cmp(&(b.1 - omega).abs()))
            .map(|(mu, _)| mu)
            .unwrap_or(0)
    }
}

/// Diagonalize `S0`.
pub fn eigendecompose(sym: &SymmetrizationData) -> Result<Spectrum> {
    eigendecompose_matrix(&sym.s0)
}

pub fn eigendecompose_matrix(s0: &DMatrix<f64>) -> Result<Spectrum> {
    let n = s0.nrows();
    if n == 0 || s0.ncols() != n {
        return Err(Error::InvalidParameter("matrix must be square and non-empty".into()));
    }
    let eig = SymmetricEigen::try_new(s0.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut lambdas = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut lambda = eig.eigenvalues[src];
        if lambda.abs() < ZERO_CLAMP {
            lambda = 0.0;
        } else if lambda < 0.0 {
            return Err(Error::Eigen(format!(
                "negative eigenvalue {lambda:.3e}; the input is not a Laplacian"
            )));
        }
        lambdas.push(lambda);

        let mut v = eig.eigenvectors.column(src).into_owned();
        if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(dst, &v);
    }
    let omegas = lambdas.iter().map(|l| l.sqrt()).collect();
    Ok(Spectrum {
        lambdas,
        vectors,
        omegas,
    })
}

/// Expansion coefficients of the unit vector at node `j`: `b_mu = v_mu(j)`.
pub fn mode_coefficients(spectrum: &Spectrum, j: usize) -> Result<Vec<f64>> {
    let n = spectrum.n();
    if j >= n {
        return Err(Error::NodeOutOfRange { node: j, n });
    }
    Ok((0..n).map(|mu| spectrum.component(mu, j)).collect())
}
