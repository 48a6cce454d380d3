//! Spectral surgery: delete points from the spectrum of a chain.
//!
//! Multiplying the spectral measure by `Π (x - λ)` over the removed
//! eigenvalues kills their mass and reweights the survivors. The transform
//! is only accepted when every surviving weight stays strictly positive.

use crate::error::{Error, Result};
use crate::pst::{certify_endpoint_pst_with, PstConfig, PstReport};
use crate::spectral::{eigendecompose, jacobi_from_spectrum, JacobiMatrix, SpectralDecomposition};

#[derive(Debug, Clone, PartialEq)]
pub struct SurgerySpec {
    /// Indices into the ascending spectrum of `source`.
    pub remove: Vec<usize>,
    pub source: SpectralDecomposition,
}

impl SurgerySpec {
    pub fn new(source: SpectralDecomposition, mut remove: Vec<usize>) -> Result<Self> {
        let n = source.size();
        remove.sort_unstable();
        if let Some(&index) = remove.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        if let Some(w) = remove.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Invalid(format!("index {} removed twice", w[0])));
        }
        if remove.len() >= n {
            return Err(Error::Invalid("surgery would remove the whole spectrum".into()));
        }
        Ok(Self { remove, source })
    }
}

/// Surviving nodes and their transformed, renormalized weights.
pub fn christoffel_transform(spec: &SurgerySpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let spec = SurgerySpec::new(spec.source.clone(), spec.remove.clone())?;
    let eig = &spec.source.eigenvalues;
    let removed: Vec<f64> = spec.remove.iter().map(|&i| eig[i]).collect();
    let mut nodes = Vec::with_capacity(eig.len() - removed.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    let mut offending = Vec::new();
    for (k, (&x, &w)) in eig.iter().zip(&spec.source.weights).enumerate() {
        if spec.remove.binary_search(&k).is_ok() {
            continue;
        }
        let factor: f64 = removed.iter().map(|l| x - l).product();
        if !(factor > 0.0) {
            offending.push(x);
        }
        nodes.push(x);
        weights.push(factor * w);
    }
    if !offending.is_empty() {
        return Err(Error::SignViolation { nodes: offending });
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((nodes, weights))
}

/// Removes spectrum points from `j`, rebuilds the chain and certifies it.
pub fn surgery_chain(j: &JacobiMatrix, remove: &[usize], config: &PstConfig) -> Result<(JacobiMatrix, PstReport)> {
    let spec = SurgerySpec::new(eigendecompose(j)?, remove.to_vec())?;
    let (nodes, weights) = christoffel_transform(&spec)?;
    let rebuilt = jacobi_from_spectrum(&nodes, &weights)?;
    let report = certify_endpoint_pst_with(&rebuilt, config)?;
    Ok((rebuilt, report))
}
