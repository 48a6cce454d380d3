//! Symmetric tridiagonal eigensolvers.
//!
//! The main path is the implicit-shift QL iteration (EISPACK `tql2` /
//! `tqli`). Sturm-sequence bisection gives an independent route to the
//! eigenvalues that shares no code with QL.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// QL iteration on `(diag, offdiag)`. When `vectors` is given it must start
/// as the identity and ends with the eigenvectors in its columns.
/// Output is unsorted.
fn ql_implicit(diag: &mut [f64], offdiag: &[f64], mut vectors: Option<&mut DMatrix<f64>>) -> Result<()> {
    let n = diag.len();
    if n <= 1 {
        return Ok(());
    }
    // e[i] couples i and i+1; e[n-1] is padding.
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);
    let d = diag;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    index: l,
                    iterations: iter - 1,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = vectors.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Ascending eigenvalues of the symmetric tridiagonal matrix.
pub(crate) fn eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let mut d = diag.to_vec();
    ql_implicit(&mut d, offdiag, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
pub(crate) fn eigensystem(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut z = DMatrix::identity(n, n);
    ql_implicit(&mut d, offdiag, Some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok((values, vectors))
}

/// Squared first components of the unit eigenvectors, to high relative
/// accuracy.
///
/// QL eigenvectors carry absolute errors near machine epsilon, which swamp
/// the first component of an eigenvector localized away from vertex 0. Here
/// each vector is rebuilt from a twisted factorization of `J - λ I` at its
/// largest entry: the ratios `v_i / v_{i+1}` come from pivots of the
/// factorization that runs towards the peak, so small components keep
/// their relative accuracy.
pub(crate) fn leading_weights(diag: &[f64], offdiag: &[f64], eigenvalues: &[f64], vectors: &DMatrix<f64>) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![1.0];
    }
    let tiny = f64::MIN_POSITIVE.sqrt();
    let guard = |d: f64| if d == 0.0 { tiny } else { d };
    let mut top = vec![0.0; n];
    let mut bottom = vec![0.0; n];
    let mut v = vec![0.0; n];
    eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let twist = (0..n)
                .max_by(|&i, &j| vectors[(i, k)].abs().total_cmp(&vectors[(j, k)].abs()))
                .unwrap_or(0);
            top[0] = guard(diag[0] - lambda);
            for i in 1..twist {
                top[i] = guard(diag[i] - lambda - offdiag[i - 1] * offdiag[i - 1] / top[i - 1]);
            }
            bottom[n - 1] = guard(diag[n - 1] - lambda);
            for i in (twist + 1..n - 1).rev() {
                bottom[i] = guard(diag[i] - lambda - offdiag[i] * offdiag[i] / bottom[i + 1]);
            }
            v[twist] = 1.0;
            for i in (0..twist).rev() {
                v[i] = -offdiag[i] / top[i] * v[i + 1];
            }
            for i in twist..n - 1 {
                v[i + 1] = -offdiag[i] / bottom[i + 1] * v[i];
            }
            let norm: f64 = v.iter().map(|x| x * x).sum();
            v[0] * v[0] / norm
        })
        .collect()
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { offdiag[i - 1] * offdiag[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { coupling / q };
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues by bisection on the Sturm count, ascending.
pub fn bisection_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let radius = |i: usize| {
        let left = if i > 0 { offdiag[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        left + right
    };
    let lo0 = (0..n).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let hi0 = (0..n).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo0.abs().max(hi0.abs()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (lo0 - 1e-12 * scale, hi0 + 1e-12 * scale);
            while hi - lo > 2.0 * f64::EPSILON * scale {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(diag, offdiag, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}
