//! Continuous-time quantum walks on weighted paths.
//!
//! Evolution is `U(t) = e^{itJ}` and the transition amplitude from vertex
//! `n` to vertex `m` is `c_nm(t) = e_mᵀ e^{itJ} e_n`. In terms of the
//! orthonormal polynomials and the spectral measure,
//!
//! ```text
//! c_nm(t) = Σ_k P_n(λ_k) P_m(λ_k) w(λ_k) e^{iλ_k t}.
//! ```
//!
//! The exceptional walk in [`crate::xkrawtchouk`] uses the opposite sign
//! `e^{-iλt}`; each module follows its own amplitude formula.
//!
//! Amplitudes are reported raw, without removing a global phase.
//!
//! The classical counterpart is a finite birth–death chain, whose
//! transition probabilities come from the Karlin–McGregor representation
//! restricted to finitely many states.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::orthopoly::{Normalization, PolynomialTable};
use crate::spectral::{eigendecompose, JacobiMatrix, SpectralDecomposition};

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// `e_n` in a space of dimension `size`.
    pub fn basis(size: usize, n: usize) -> Result<Self> {
        if n >= size {
            return Err(Error::IndexOutOfRange { index: n, len: size });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Sampled `c_nm(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `(n, m)`: from vertex `n` to vertex `m`.
    pub source: (usize, usize),
}

impl AmplitudeSeries {
    pub fn probabilities(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// `e^{itJ}` through a cached eigendecomposition, `O(N)` per amplitude.
#[derive(Debug, Clone)]
pub struct Propagator {
    decomp: SpectralDecomposition,
}

impl Propagator {
    pub fn new(j: &JacobiMatrix) -> Result<Self> {
        Ok(Self {
            decomp: eigendecompose(j)?,
        })
    }

    pub fn from_decomposition(decomp: SpectralDecomposition) -> Self {
        Self { decomp }
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    pub fn size(&self) -> usize {
        self.decomp.size()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.size() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.size(),
            });
        }
        Ok(())
    }

    /// `c_nm(t)`.
    pub fn amplitude(&self, n: usize, m: usize, t: f64) -> Result<Complex64> {
        self.check_index(n)?;
        self.check_index(m)?;
        Ok(self.amplitude_unchecked(n, m, t))
    }

    pub(crate) fn amplitude_unchecked(&self, n: usize, m: usize, t: f64) -> Complex64 {
        let v = &self.decomp.eigenvectors;
        self.decomp
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lk)| Complex64::from_polar(v[(n, k)] * v[(m, k)], lk * t))
            .sum()
    }

    pub fn probability(&self, n: usize, m: usize, t: f64) -> Result<f64> {
        Ok(self.amplitude(n, m, t)?.norm_sqr())
    }

    /// `e^{itJ} ψ`.
    pub fn evolve(&self, initial: &QuantumState, t: f64) -> Result<QuantumState> {
        let n = self.size();
        if initial.len() != n {
            return Err(Error::LengthMismatch {
                what: "state",
                expected: n,
                actual: initial.len(),
            });
        }
        if !t.is_finite() {
            return Err(Error::Invalid(format!("time {t} is not finite")));
        }
        let v = &self.decomp.eigenvectors;
        let psi = initial.amplitudes();
        let spectral: Vec<Complex64> = (0..n)
            .map(|k| {
                let overlap: Complex64 = (0..n).map(|i| psi[i] * v[(i, k)]).sum();
                overlap * Complex64::from_polar(1.0, self.decomp.eigenvalues[k] * t)
            })
            .collect();
        let amplitudes = (0..n).map(|i| (0..n).map(|k| spectral[k] * v[(i, k)]).sum()).collect();
        Ok(QuantumState { amplitudes })
    }

    /// The default sampling grid: 512 points on `[0, 2π / g_min]`.
    pub fn default_times(&self) -> Vec<f64> {
        default_time_grid(&self.decomp)
    }
}

pub fn evolve(j: &JacobiMatrix, initial: &QuantumState, t: f64) -> Result<QuantumState> {
    Propagator::new(j)?.evolve(initial, t)
}

/// `|c_nm(t)|^2`.
pub fn transfer_probability(j: &JacobiMatrix, n: usize, m: usize, t: f64) -> Result<f64> {
    Propagator::new(j)?.probability(n, m, t)
}

/// Amplitudes from the spectral sum over the orthonormal polynomials.
///
/// `polys` must be the orthonormal table evaluated at `decomp.eigenvalues`.
pub fn amplitude_spectral(
    decomp: &SpectralDecomposition,
    polys: &PolynomialTable,
    n: usize,
    m: usize,
    times: &[f64],
) -> Result<AmplitudeSeries> {
    let size = decomp.size();
    for i in [n, m] {
        if i >= size {
            return Err(Error::IndexOutOfRange { index: i, len: size });
        }
    }
    if polys.normalization != Normalization::Orthonormal {
        return Err(Error::Invalid("amplitude formula needs the orthonormal table".into()));
    }
    if polys.nodes.len() != size || polys.max_degree() + 1 < size {
        return Err(Error::LengthMismatch {
            what: "polynomial table nodes",
            expected: size,
            actual: polys.nodes.len(),
        });
    }
    check_finite("times", times)?;
    let coeff: Vec<f64> = (0..size)
        .map(|k| polys.get(n, k) * polys.get(m, k) * decomp.weights[k])
        .collect();
    let values = times
        .iter()
        .map(|&t| {
            decomp
                .eigenvalues
                .iter()
                .zip(&coeff)
                .map(|(&lk, &ck)| Complex64::from_polar(ck, lk * t))
                .sum()
        })
        .collect();
    Ok(AmplitudeSeries {
        times: times.to_vec(),
        values,
        source: (n, m),
    })
}

/// 512 evenly spaced times on `[0, 2π / g_min]`, `g_min` the smallest gap.
pub fn default_time_grid(decomp: &SpectralDecomposition) -> Vec<f64> {
    let t_max = decomp.min_gap().map_or(2.0 * PI, |g| 2.0 * PI / g);
    linspace(0.0, t_max, 512)
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Rates of a finite birth–death chain on states `0..N`.
///
/// The chain reflects at the right end (`λ_{N-1} = 0`); a positive `μ_0`
/// kills probability at the left end, so rows are then sub-stochastic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathRates {
    birth: Vec<f64>,
    death: Vec<f64>,
}

impl BirthDeathRates {
    /// `birth = (λ_0..λ_{N-2})`, `death = (μ_0..μ_{N-1})`.
    pub fn new(birth: Vec<f64>, death: Vec<f64>) -> Result<Self> {
        if death.is_empty() {
            return Err(Error::Invalid("a chain needs at least one state".into()));
        }
        if birth.len() + 1 != death.len() {
            return Err(Error::LengthMismatch {
                what: "birth rates",
                expected: death.len() - 1,
                actual: birth.len(),
            });
        }
        check_finite("birth rates", &birth)?;
        check_finite("death rates", &death)?;
        if let Some(i) = birth.iter().position(|&l| l <= 0.0) {
            return Err(Error::Invalid(format!(
                "birth rate λ_{i} = {} must be positive",
                birth[i]
            )));
        }
        if death[0] < 0.0 {
            return Err(Error::Invalid(format!(
                "death rate μ_0 = {} must be non-negative",
                death[0]
            )));
        }
        if let Some(i) = death.iter().skip(1).position(|&m| m <= 0.0) {
            return Err(Error::Invalid(format!(
                "death rate μ_{} = {} must be positive",
                i + 1,
                death[i + 1]
            )));
        }
        Ok(Self { birth, death })
    }

    pub fn size(&self) -> usize {
        self.death.len()
    }

    pub fn birth(&self) -> &[f64] {
        &self.birth
    }

    pub fn death(&self) -> &[f64] {
        &self.death
    }

    /// The generator `A` with `P'(t) = A P(t)`.
    pub fn generator(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            let up = self.birth.get(i).copied().unwrap_or(0.0);
            a[(i, i)] = -(up + self.death[i]);
            if i + 1 < n {
                a[(i, i + 1)] = up;
                a[(i + 1, i)] = self.death[i + 1];
            }
        }
        a
    }

    /// Potential coefficients `π_0 = 1`, `π_i = λ_0⋯λ_{i-1} / (μ_1⋯μ_i)`.
    pub fn potential(&self) -> Vec<f64> {
        let mut pi = Vec::with_capacity(self.size());
        pi.push(1.0);
        for i in 1..self.size() {
            pi.push(pi[i - 1] * self.birth[i - 1] / self.death[i]);
        }
        pi
    }

    /// Jacobi matrix of `-A` after the diagonal similarity `diag(±√π_i)`.
    pub fn symmetrized(&self) -> Result<JacobiMatrix> {
        let n = self.size();
        let diag = (0..n)
            .map(|i| self.birth.get(i).copied().unwrap_or(0.0) + self.death[i])
            .collect();
        let offdiag = (0..n - 1).map(|i| (self.birth[i] * self.death[i + 1]).sqrt()).collect();
        JacobiMatrix::new(offdiag, diag)
    }

    /// `Q_0(x), …, Q_{N-1}(x)` from the birth–death recurrence
    /// `-x Q_n = μ_n Q_{n-1} - (λ_n + μ_n) Q_n + λ_n Q_{n+1}`, `Q_0 = 1`.
    pub fn polynomials(&self, x: f64) -> Vec<f64> {
        let n = self.size();
        let mut q = Vec::with_capacity(n);
        q.push(1.0);
        for i in 0..n - 1 {
            let prev = if i == 0 { 0.0 } else { q[i - 1] };
            let next = ((self.birth[i] + self.death[i] - x) * q[i] - self.death[i] * prev) / self.birth[i];
            q.push(next);
        }
        q
    }
}

/// Finite Karlin–McGregor data: nodes `x_k ≥ 0` of the spectral measure
/// `ψ`, its masses, and `Q_n(x_k)`.
#[derive(Debug, Clone)]
pub struct BirthDeathSpectrum {
    pub nodes: Vec<f64>,
    pub masses: Vec<f64>,
    /// Entry `(n, k)` is `Q_n(x_k)`.
    pub polynomials: DMatrix<f64>,
}

impl BirthDeathSpectrum {
    pub fn new(rates: &BirthDeathRates) -> Result<Self> {
        let d = eigendecompose(&rates.symmetrized()?)?;
        let pi = rates.potential();
        let n = rates.size();
        // Q_n(x_k) = (-1)^n u_k(n) / (u_k(0) √π_n); the eigenvector route
        // avoids the growth of the forward recurrence.
        let polynomials = DMatrix::from_fn(n, n, |i, k| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * d.eigenvectors[(i, k)] / (d.eigenvectors[(0, k)] * pi[i].sqrt())
        });
        Ok(Self {
            nodes: d.eigenvalues,
            masses: d.weights,
            polynomials,
        })
    }

    /// `P_ij(t) = Σ_k e^{-x_k t} Q_i Q_j ψ_k / Σ_k Q_j^2 ψ_k`.
    pub fn transition(&self, i: usize, j: usize, t: f64) -> f64 {
        let q = &self.polynomials;
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, (&x, &psi)) in self.nodes.iter().zip(&self.masses).enumerate() {
            num += (-x * t).exp() * q[(i, k)] * q[(j, k)] * psi;
            den += q[(j, k)] * q[(j, k)] * psi;
        }
        num / den
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Invalid(format!("time {t} must be finite and non-negative")));
    }
    Ok(())
}

/// `P_ij(t)` of the finite birth–death chain.
pub fn birth_death_transition(rates: &BirthDeathRates, i: usize, j: usize, t: f64) -> Result<f64> {
    let n = rates.size();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    check_time(t)?;
    Ok(BirthDeathSpectrum::new(rates)?.transition(i, j, t))
}

/// The full matrix `P(t) = e^{tA}`.
pub fn birth_death_matrix(rates: &BirthDeathRates, t: f64) -> Result<DMatrix<f64>> {
    check_time(t)?;
    let spec = BirthDeathSpectrum::new(rates)?;
    let n = rates.size();
    Ok(DMatrix::from_fn(n, n, |i, j| spec.transition(i, j, t)))
}
