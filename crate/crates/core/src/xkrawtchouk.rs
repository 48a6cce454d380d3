//! The X₂-Krawtchouk exceptional family and its band Hamiltonian.
//!
//! For `N ≥ 1` and `p ∈ (0, 1)` the family has `N + 2` members labelled
//! `0, …, N, N+3`, orthogonal on the grid `x = -1, …, N` against
//!
//! ```text
//! ŵ(x) = w(x+1; p, N+1) / (φ(x-N-1) φ(x-N)),   φ(y) = K_2(y; p, -N-2)
//! ```
//!
//! where `w` is the binomial weight. Member `n ≤ N` is
//!
//! ```text
//! K̂_n(x) = [(N-x) φ(x-N-1) K_n(x+1; p, N) + (1+x) φ(x-N) K_n(x; p, N)] / (N+3-n)
//! ```
//!
//! a monic polynomial of degree `n + 2`; the member labelled `N+3` is a
//! double sum of classical Krawtchouk polynomials of degree `N + 5`. The
//! labels form the index set of the family; the actual degrees are shifted
//! by two, which [`DegreeEntry`] records.
//!
//! Multiplication by `λ_x = -K_3(x-N; p, -N-1)` acts on the orthonormalized
//! family as a symmetric matrix of bandwidth 3. It is computed here from
//! discrete inner products and validated (bandwidth, spectrum) on
//! construction.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::{binomial, krawtchouk_monic, pochhammer, KrawtchoukParams};
use crate::pst::golden_min;
use crate::walk::{linspace, AmplitudeSeries};

/// Relative orthogonality residual tolerated by [`build_family`].
pub const ORTHOGONALITY_TOL: f64 = 1e-6;
/// Relative size of an entry outside the band that signals an inconsistent family.
pub const BANDWIDTH_TOL: f64 = 1e-8;
pub const SPECTRUM_TOL: f64 = 1e-8;
pub const RETURN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeEntry {
    /// Row of [`XKrawtchoukFamily::values`], `0..N+2`.
    pub index: usize,
    /// Label in the index set `{0, …, N, N+3}`.
    pub label: usize,
    pub polynomial_degree: usize,
    /// Vertex of the walk, `1..=N+2`.
    pub vertex: usize,
    /// Grid point paired with `index` in the weight table.
    pub grid_point: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XKrawtchoukFamily {
    n: usize,
    p: f64,
    labels: Vec<usize>,
    grid: Vec<i64>,
    weights_hat: Vec<f64>,
    /// Row `i` holds member `labels[i]` on the grid.
    values: DMatrix<f64>,
    norms: Vec<f64>,
}

fn phi(n: usize, p: f64, y: f64) -> f64 {
    let params = KrawtchoukParams::extended(p, -(n as i64) - 2).expect("p validated by caller");
    krawtchouk_monic(params, 2, y)
}

fn classical(p: f64, m: usize, degree: usize, x: f64) -> f64 {
    let params = KrawtchoukParams::new(p, m).expect("p validated by caller");
    krawtchouk_monic(params, degree, x)
}

/// `K_M(y; p, M)`. On integers `0 ≤ y ≤ M` the sum collapses to
/// `M! (-p)^{M-y} (1-p)^y`, which avoids its heavy cancellation there.
fn classical_full(p: f64, m: usize, y: f64) -> f64 {
    if y.fract() == 0.0 && (0.0..=m as f64).contains(&y) {
        let y = y as i32;
        let factorial: f64 = (1..=m).map(|i| i as f64).product();
        factorial * (-p).powi(m as i32 - y) * (1.0 - p).powi(y)
    } else {
        classical(p, m, m, y)
    }
}

/// `λ_x = -K_3(x - N; p, -N-1)`.
pub fn eigenvalue_formula(n: usize, p: f64, x: f64) -> f64 {
    let params = KrawtchoukParams::extended(p, -(n as i64) - 1).expect("p validated by caller");
    -krawtchouk_monic(params, 3, x - n as f64)
}

/// `ŵ(x)` at a real point.
pub fn weight_formula(n: usize, p: f64, x: i64) -> f64 {
    let shifted = x + 1;
    let binom = if (0..=n as i64 + 1).contains(&shifted) {
        binomial(n + 1, shifted as usize)
    } else {
        0.0
    };
    let w = binom * p.powi(shifted as i32) * (1.0 - p).powi(n as i32 - x as i32);
    let xf = x as f64;
    let nf = n as f64;
    w / (phi(n, p, xf - nf - 1.0) * phi(n, p, xf - nf))
}

/// Member with label `label` at a real point.
pub fn member_value(n: usize, p: f64, label: usize, x: f64) -> Result<f64> {
    check_parameters(n, p)?;
    let nf = n as f64;
    if label <= n {
        let a = (nf - x) * phi(n, p, x - nf - 1.0) * classical(p, n, label, x + 1.0);
        let b = (1.0 + x) * phi(n, p, x - nf) * classical(p, n, label, x);
        return Ok((a + b) / (nf + 3.0 - label as f64));
    }
    if label != n + 3 {
        return Err(Error::Invalid(format!("label {label} is not in {{0..{n}, {}}}", n + 3)));
    }
    let mut sum = 0.0;
    let mut j_fact = 1.0;
    for j in 0..=2usize {
        if j > 0 {
            j_fact *= j as f64;
        }
        let mut k_fact = 1.0;
        for k in 0..=2usize {
            if k > 0 {
                k_fact *= k as f64;
            }
            let coeff = pochhammer(-2.0, j) * pochhammer(-2.0, k) * (p - 1.0).powi(2 - k as i32) * p.powi(2 - j as i32)
                / (j_fact * k_fact)
                * pochhammer(-nf - 3.0, 2 - j)
                * pochhammer(-nf - 3.0, 2 - k);
            let m = n + k + j + 1;
            sum += coeff * classical_full(p, m, x + k as f64 + 1.0);
        }
    }
    Ok(sum)
}

fn check_parameters(n: usize, p: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::Invalid("the X₂-Krawtchouk family needs N >= 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Invalid(format!("p = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Evaluates the family on its grid and validates weights and orthogonality.
pub fn build_family(n: usize, p: f64) -> Result<XKrawtchoukFamily> {
    check_parameters(n, p)?;
    let grid: Vec<i64> = (-1..=n as i64).collect();
    let labels: Vec<usize> = (0..=n).chain(std::iter::once(n + 3)).collect();
    let size = n + 2;

    let weights_hat: Vec<f64> = grid.iter().map(|&x| weight_formula(n, p, x)).collect();
    if let Some((index, &value)) = weights_hat.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
        return Err(Error::NonPositiveWeight { index, value });
    }

    let mut values = DMatrix::zeros(size, size);
    for (i, &label) in labels.iter().enumerate() {
        for (c, &x) in grid.iter().enumerate() {
            values[(i, c)] = member_value(n, p, label, x as f64)?;
        }
    }

    let gram = DMatrix::from_fn(size, size, |a, b| {
        (0..size)
            .map(|c| values[(a, c)] * values[(b, c)] * weights_hat[c])
            .sum::<f64>()
    });
    let norms: Vec<f64> = (0..size).map(|i| gram[(i, i)]).collect();
    if let Some((i, _)) = norms.iter().enumerate().find(|(_, h)| !(**h > 0.0)) {
        return Err(Error::Orthogonality {
            n: i,
            m: i,
            residual: norms[i],
        });
    }
    let mut worst = (0, 0, 0.0);
    for a in 0..size {
        for b in a + 1..size {
            let r = gram[(a, b)].abs() / (norms[a] * norms[b]).sqrt();
            if r > worst.2 {
                worst = (a, b, r);
            }
        }
    }
    if worst.2 > ORTHOGONALITY_TOL {
        return Err(Error::Orthogonality {
            n: labels[worst.0],
            m: labels[worst.1],
            residual: worst.2,
        });
    }
    Ok(XKrawtchoukFamily {
        n,
        p,
        labels,
        grid,
        weights_hat,
        values,
        norms,
    })
}

impl XKrawtchoukFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.n + 2
    }

    /// The index set `(0, …, N, N+3)`.
    pub fn degree_set(&self) -> &[usize] {
        &self.labels
    }

    pub fn grid(&self) -> &[i64] {
        &self.grid
    }

    pub fn weights_hat(&self) -> &[f64] {
        &self.weights_hat
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Member at row `index` evaluated at any real `x`.
    pub fn evaluate(&self, index: usize, x: f64) -> Result<f64> {
        let label = *self.labels.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.size(),
        })?;
        member_value(self.n, self.p, label, x)
    }

    pub fn degree_map(&self) -> Vec<DegreeEntry> {
        self.labels
            .iter()
            .enumerate()
            .map(|(index, &label)| DegreeEntry {
                index,
                label,
                polynomial_degree: if label <= self.n { label + 2 } else { self.n + 5 },
                vertex: index + 1,
                grid_point: self.grid[index],
            })
            .collect()
    }

    /// `T_n(x) = √(ŵ(x) / ĥ_n) K̂_n(x)`, rows indexed by walk vertex.
    pub fn eigenvector_table(&self) -> XEigenvectorTable {
        let size = self.size();
        XEigenvectorTable {
            entries: DMatrix::from_fn(size, size, |i, c| {
                self.values[(i, c)] * (self.weights_hat[c] / self.norms[i]).sqrt()
            }),
        }
    }
}

/// `T_n(x)` for `n = 1..=N+2` (rows) and `x` on the grid (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct XEigenvectorTable {
    pub entries: DMatrix<f64>,
}

impl XEigenvectorTable {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry for walk vertex `n` (1-based) and grid column `c`.
    pub fn get(&self, n: usize, c: usize) -> Result<f64> {
        check_vertex(n, self.size())?;
        Ok(self.entries[(n - 1, c)])
    }

    /// Largest deviation of `TᵀT` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.size();
        (self.entries.transpose() * &self.entries - DMatrix::identity(n, n))
            .abs()
            .max()
    }
}

fn check_vertex(n: usize, size: usize) -> Result<()> {
    if n == 0 || n > size {
        return Err(Error::IndexOutOfRange { index: n, len: size });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandHamiltonian {
    pub size: usize,
    pub entries: DMatrix<f64>,
    /// `λ_x` over the grid, in grid order.
    pub spectrum_formula: Vec<f64>,
    /// Largest `|H_ij|` with `|i - j| > 3`.
    pub off_band_max: f64,
    /// Columns coupled to the last vertex (0-based).
    pub last_row_support: Vec<usize>,
}

pub fn build_band_hamiltonian(family: &XKrawtchoukFamily) -> Result<BandHamiltonian> {
    let size = family.size();
    let n = family.n;
    let lambda: Vec<f64> = family
        .grid
        .iter()
        .map(|&x| eigenvalue_formula(n, family.p, x as f64))
        .collect();
    let t = family.eigenvector_table().entries;
    let raw = &t * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&lambda)) * t.transpose();
    let entries = (&raw + raw.transpose()) * 0.5;

    let scale = lambda.iter().fold(1.0_f64, |acc, l| acc.max(l.abs()));
    let mut off_band_max = 0.0_f64;
    for r in 0..size {
        for c in 0..size {
            if r.abs_diff(c) > 3 {
                let v = entries[(r, c)];
                off_band_max = off_band_max.max(v.abs());
                if v.abs() > BANDWIDTH_TOL * scale {
                    return Err(Error::Bandwidth {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
        }
    }

    let mut dense: Vec<f64> = SymmetricEigen::new(entries.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    dense.sort_by(f64::total_cmp);
    let mut formula = lambda.clone();
    formula.sort_by(f64::total_cmp);
    for (k, (a, b)) in dense.iter().zip(&formula).enumerate() {
        if (a - b).abs() > SPECTRUM_TOL * scale {
            return Err(Error::Numerical(format!(
                "band matrix eigenvalue {k} is {a}, formula gives {b}"
            )));
        }
    }

    let last = size - 1;
    let last_row_support = (0..size)
        .filter(|&c| entries[(last, c)].abs() > BANDWIDTH_TOL * scale)
        .collect();
    Ok(BandHamiltonian {
        size,
        entries,
        spectrum_formula: lambda,
        off_band_max,
        last_row_support,
    })
}

fn amplitude(ham: &BandHamiltonian, table: &XEigenvectorTable, n: usize, m: usize, t: f64) -> Complex64 {
    ham.spectrum_formula
        .iter()
        .enumerate()
        .map(|(c, &l)| Complex64::from_polar(table.entries[(n - 1, c)] * table.entries[(m - 1, c)], -l * t))
        .sum()
}

fn check_table(ham: &BandHamiltonian, table: &XEigenvectorTable) -> Result<()> {
    if table.size() != ham.size {
        return Err(Error::LengthMismatch {
            what: "eigenvector table",
            expected: ham.size,
            actual: table.size(),
        });
    }
    Ok(())
}

/// `c_nm(t) = Σ_x T_n(x) T_m(x) e^{-iλ_x t}` for vertices `1 ≤ n, m ≤ N+2`.
pub fn x_amplitudes(
    ham: &BandHamiltonian,
    table: &XEigenvectorTable,
    n: usize,
    m: usize,
    times: &[f64],
) -> Result<AmplitudeSeries> {
    check_table(ham, table)?;
    check_vertex(n, ham.size)?;
    check_vertex(m, ham.size)?;
    Ok(AmplitudeSeries {
        times: times.to_vec(),
        values: times.iter().map(|&t| amplitude(ham, table, n, m, t)).collect(),
        source: (n, m),
    })
}

/// `min_n |c_nn(t)|`.
pub fn return_magnitude(ham: &BandHamiltonian, table: &XEigenvectorTable, t: f64) -> f64 {
    (1..=ham.size)
        .map(|n| amplitude(ham, table, n, n, t).norm())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfectReturn {
    pub time: f64,
    /// `min_n |c_nn(time)|`.
    pub magnitude: f64,
}

/// Default horizon for walk searches: `2π · 99 / g_min` over the formula spectrum.
pub fn default_horizon(ham: &BandHamiltonian) -> f64 {
    let mut l = ham.spectrum_formula.clone();
    l.sort_by(f64::total_cmp);
    let g_min = l.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    2.0 * PI * 99.0 / g_min
}

/// Local maxima of `f` on the grid, refined by golden section, best first.
fn refined_maxima(times: &[f64], f: impl Fn(f64) -> f64, keep: usize) -> Vec<(f64, f64)> {
    let vals: Vec<f64> = times.iter().map(|&t| f(t)).collect();
    let mut peaks: Vec<usize> = (1..vals.len())
        .filter(|&i| vals[i] >= vals[i - 1] && (i + 1 == vals.len() || vals[i] >= vals[i + 1]))
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    peaks.truncate(keep);
    let span = times.last().copied().unwrap_or(1.0).abs().max(1.0);
    let mut out: Vec<(f64, f64)> = peaks
        .into_iter()
        .map(|i| {
            let lo = times[i - 1];
            let hi = times[(i + 1).min(times.len() - 1)];
            let (t, neg) = golden_min(lo, hi, 1e-14 * span, |t| -f(t));
            if -neg >= vals[i] {
                (t, -neg)
            } else {
                (times[i], vals[i])
            }
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Earliest `t ∈ (0, t_max]` with `|c_nn(t)| ≥ 1 - RETURN_TOL` for every `n`.
pub fn perfect_return(
    ham: &BandHamiltonian,
    table: &XEigenvectorTable,
    t_max: f64,
    points: usize,
) -> Result<Option<PerfectReturn>> {
    check_table(ham, table)?;
    if !(t_max > 0.0) || points < 3 {
        return Err(Error::Invalid(
            "perfect-return search needs t_max > 0 and at least 3 points".into(),
        ));
    }
    let times = linspace(0.0, t_max, points);
    let found = refined_maxima(&times, |t| return_magnitude(ham, table, t), 64)
        .into_iter()
        .filter(|&(t, m)| t > 0.0 && m >= 1.0 - RETURN_TOL)
        .min_by(|a, b| a.0.total_cmp(&b.0));
    Ok(found.map(|(time, magnitude)| PerfectReturn { time, magnitude }))
}

/// Largest `|c_nm(t)|²` over `[0, t_max]`, grid plus refinement, with its time.
pub fn max_transfer_probability(
    ham: &BandHamiltonian,
    table: &XEigenvectorTable,
    n: usize,
    m: usize,
    t_max: f64,
    points: usize,
) -> Result<(f64, f64)> {
    check_table(ham, table)?;
    check_vertex(n, ham.size)?;
    check_vertex(m, ham.size)?;
    let times = linspace(0.0, t_max, points);
    let f = |t: f64| amplitude(ham, table, n, m, t).norm_sqr();
    let at_zero = (0.0, f(0.0));
    Ok(refined_maxima(&times, f, 16)
        .into_iter()
        .chain(std::iter::once(at_zero))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or(at_zero))
}
