//! Jacobi matrices, their spectral data, and the inverse problem.
//!
//! For an `N × N` Jacobi matrix `J` with positive off-diagonal, the vector
//! `v_k = (P_0(λ_k), …, P_{N-1}(λ_k))` of orthonormal polynomials evaluated
//! at an eigenvalue `λ_k` satisfies `J v_k = λ_k v_k`. Since `P_0 = 1`, the
//! normalized eigenvector `ṽ_k = v_k / ‖v_k‖` has first component
//! `1 / ‖v_k‖`, and the Gauss quadrature weight of the spectral measure is
//!
//! ```text
//! w(λ_k) = 1 / Σ_n P_n(λ_k)^2 = (ṽ_k)_0^2 .
//! ```
//!
//! So the orthogonality weights are read off the first row of the
//! eigenvector matrix. The inverse map rebuilds `J` from `(λ_k, w_k)` with
//! the discrete Stieltjes procedure.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::orthopoly::{
    evaluate_ops, krawtchouk_coefficients, KrawtchoukParams, Normalization, PolynomialTable, RecurrenceCoefficients,
};
use crate::tridiag;

/// Real symmetric tridiagonal Hamiltonian of a weighted path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiMatrix {
    coeffs: RecurrenceCoefficients,
}

impl JacobiMatrix {
    pub fn new(offdiag: Vec<f64>, diag: Vec<f64>) -> Result<Self> {
        Ok(Self {
            coeffs: RecurrenceCoefficients::new(offdiag, diag)?,
        })
    }

    pub fn from_coeffs(coeffs: RecurrenceCoefficients) -> Self {
        Self { coeffs }
    }

    /// Adjacency matrix of the unweighted path on `n` vertices.
    pub fn unweighted_path(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n.saturating_sub(1)], vec![0.0; n])
    }

    /// The orthonormal Krawtchouk chain on `M + 1` vertices.
    pub fn krawtchouk(params: KrawtchoukParams) -> Result<Self> {
        Ok(Self::from_coeffs(krawtchouk_coefficients(params)?))
    }

    pub fn coeffs(&self) -> &RecurrenceCoefficients {
        &self.coeffs
    }

    pub fn size(&self) -> usize {
        self.coeffs.size()
    }

    pub fn offdiag(&self) -> &[f64] {
        self.coeffs.offdiag()
    }

    pub fn diag(&self) -> &[f64] {
        self.coeffs.diag()
    }

    /// `s · J` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.offdiag().iter().map(|a| a * s).collect(),
            self.diag().iter().map(|b| b * s).collect(),
        )
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for (i, &b) in self.diag().iter().enumerate() {
            m[(i, i)] = b;
        }
        for (i, &a) in self.offdiag().iter().enumerate() {
            m[(i, i + 1)] = a;
            m[(i + 1, i)] = a;
        }
        m
    }

    /// `J x` without forming the dense matrix.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let (a, b) = (self.offdiag(), self.diag());
        DVector::from_fn(self.size(), |i, _| {
            let mut y = b[i] * x[i];
            if i > 0 {
                y += a[i - 1] * x[i - 1];
            }
            if i < a.len() {
                y += a[i] * x[i + 1];
            }
            y
        })
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        tridiag::sturm_count(self.diag(), self.offdiag(), x)
    }

    /// Eigenvalues by Sturm bisection; shares no code with [`eigendecompose`].
    pub fn eigenvalues_by_bisection(&self) -> Vec<f64> {
        tridiag::bisection_eigenvalues(self.diag(), self.offdiag())
    }
}

/// Eigenvalues, orthogonality weights and orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Strictly increasing.
    pub eigenvalues: Vec<f64>,
    /// `w(λ_k)`, positive, summing to 1.
    pub weights: Vec<f64>,
    /// Column `k` is `ṽ_k`, with a positive first component.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Smallest gap between consecutive eigenvalues, `None` for `N = 1`.
    pub fn min_gap(&self) -> Option<f64> {
        self.eigenvalues.windows(2).map(|w| w[1] - w[0]).min_by(f64::total_cmp)
    }

    /// Orthonormal polynomial table at the eigenvalues, read off the
    /// eigenvectors: `P_n(λ_k) = ṽ_k(n) / √w_k`, and `P_N(λ_k) = 0`.
    ///
    /// Agrees with `evaluate_ops` at `self.eigenvalues` in exact arithmetic,
    /// but stays accurate where the forward recurrence is unstable (decaying
    /// eigenvector components, strongly varying couplings). The products
    /// `P_n P_m w` are exactly `ṽ_k(n) ṽ_k(m)`.
    pub fn polynomial_table(&self) -> PolynomialTable {
        let n = self.size();
        let values = DMatrix::from_fn(n + 1, n, |row, k| {
            if row == n {
                0.0
            } else {
                self.eigenvectors[(row, k)] / self.weights[k].sqrt()
            }
        });
        PolynomialTable {
            values,
            normalization: Normalization::Orthonormal,
            nodes: self.eigenvalues.clone(),
        }
    }

    pub fn spectral_range(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

pub fn eigendecompose(j: &JacobiMatrix) -> Result<SpectralDecomposition> {
    let n = j.size();
    let (eigenvalues, mut eigenvectors) = tridiag::eigensystem(j.diag(), j.offdiag())?;
    if let Some(index) = eigenvalues.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Numerical(format!(
            "eigenvalues {index} and {} are numerically equal ({:e})",
            index + 1,
            eigenvalues[index]
        )));
    }
    for k in 0..n {
        let mut col = eigenvectors.column_mut(k);
        if let Some(first) = col.iter().copied().find(|v| *v != 0.0) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
    let raw = tridiag::leading_weights(j.diag(), j.offdiag(), &eigenvalues, &eigenvectors);
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        weights,
        eigenvectors,
    })
}

/// Unnormalized eigenvectors `(P_0(λ_k), …, P_{N-1}(λ_k))` as columns.
pub fn eigenvectors_from_polynomials(j: &JacobiMatrix, decomp: &SpectralDecomposition) -> Result<DMatrix<f64>> {
    let n = j.size();
    if decomp.size() != n {
        return Err(Error::LengthMismatch {
            what: "decomposition",
            expected: n,
            actual: decomp.size(),
        });
    }
    let table = evaluate_ops(j.coeffs(), &decomp.eigenvalues, Normalization::Orthonormal)?;
    Ok(table.values.rows(0, n).into_owned())
}

/// Rebuilds the unique Jacobi matrix with spectral measure `Σ w_k δ_{λ_k}`.
///
/// Runs the Stieltjes three-term recurrence on the discrete measure, with
/// the polynomial values stored as `√w_k · q_n(λ_k)` and fully
/// reorthogonalized at every step.
pub fn jacobi_from_spectrum(eigenvalues: &[f64], weights: &[f64]) -> Result<JacobiMatrix> {
    let n = eigenvalues.len();
    if n == 0 {
        return Err(Error::Invalid("empty spectrum".into()));
    }
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: n,
            actual: weights.len(),
        });
    }
    check_finite("eigenvalues", eigenvalues)?;
    check_finite("weights", weights)?;
    if let Some(index) = eigenvalues.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::NotIncreasing { index });
    }
    let range = eigenvalues[n - 1] - eigenvalues[0];
    if let Some(index) = eigenvalues.windows(2).position(|w| w[1] - w[0] < 1e-10 * range) {
        return Err(Error::NearDegenerate {
            index,
            gap: eigenvalues[index + 1] - eigenvalues[index],
        });
    }
    if let Some(index) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::NonPositiveWeight {
            index,
            value: weights[index],
        });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightsNotNormalized { sum });
    }

    let scale = eigenvalues[0].abs().max(eigenvalues[n - 1].abs()).max(1.0);
    let lambda = DVector::from_column_slice(eigenvalues);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    basis.push(DVector::from_iterator(n, weights.iter().map(|w| (w / sum).sqrt())));
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n {
        let q = &basis[step];
        let xq = q.component_mul(&lambda);
        let b = q.dot(&xq);
        diag.push(b);
        if step + 1 == n {
            break;
        }
        let mut r = xq - q * b;
        if step > 0 {
            r -= &basis[step - 1] * offdiag[step - 1];
        }
        for _ in 0..2 {
            for prev in &basis {
                let c = prev.dot(&r);
                r -= prev * c;
            }
        }
        let a = r.norm();
        if !(a > 16.0 * f64::EPSILON * scale) {
            return Err(Error::StieltjesBreakdown {
                index: step,
                value: a * a,
            });
        }
        offdiag.push(a);
        basis.push(r / a);
    }
    JacobiMatrix::new(offdiag, diag)
}

/// Symmetry of `J` about its anti-diagonal, entrywise within `tol`.
pub fn mirror_symmetric(j: &JacobiMatrix, tol: f64) -> bool {
    let (a, b) = (j.offdiag(), j.diag());
    let diag_ok = b.iter().zip(b.iter().rev()).all(|(x, y)| (x - y).abs() <= tol);
    let off_ok = a.iter().zip(a.iter().rev()).all(|(x, y)| (x - y).abs() <= tol);
    diag_ok && off_ok
}

/// Weights `w_k ∝ 1 / Π_{j≠k} |λ_k - λ_j|`: the unique measure on the given
/// nodes whose Jacobi matrix is mirror symmetric.
pub fn mirror_symmetric_weights(eigenvalues: &[f64]) -> Vec<f64> {
    // Work in logs; products of many gaps overflow quickly.
    let logs: Vec<f64> = eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lk)| {
            -eigenvalues
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &lj)| (lk - lj).abs().ln())
                .sum::<f64>()
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}
