//! Finite orthogonal polynomial sequences.
//!
//! A sequence is described by its recurrence coefficients `a_0..a_{N-2}`
//! (off-diagonal, strictly positive) and `b_0..b_{N-1}` (diagonal). The
//! orthonormal polynomials satisfy
//!
//! ```text
//! a_n P_{n+1}(x) + b_n P_n(x) + a_{n-1} P_{n-1}(x) = x P_n(x),   P_{-1} = 0, P_0 = 1
//! ```
//!
//! for `n = 0..N-1`, with the free constant `a_{N-1}` fixed to 1. The monic
//! polynomials `p_n = a_0 ⋯ a_{n-1} P_n` satisfy
//! `x p_n = p_{n+1} + b_n p_n + a_{n-1}^2 p_{n-1}` and coincide with the
//! characteristic polynomials `det(x I_n - J_n)` of the leading principal
//! submatrices of the Jacobi matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::tridiag;

/// Recurrence coefficients of a finite orthogonal polynomial sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCoefficients {
    offdiag: Vec<f64>,
    diag: Vec<f64>,
}

impl RecurrenceCoefficients {
    /// Validates and wraps `(a_0..a_{N-2}, b_0..b_{N-1})`.
    pub fn new(offdiag: Vec<f64>, diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Invalid("at least one diagonal entry is required".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch {
                what: "off-diagonal",
                expected: diag.len() - 1,
                actual: offdiag.len(),
            });
        }
        check_finite("diagonal", &diag)?;
        check_finite("off-diagonal", &offdiag)?;
        if let Some(index) = offdiag.iter().position(|&a| a <= 0.0) {
            return Err(Error::NonPositiveOffdiag {
                index,
                value: offdiag[index],
            });
        }
        Ok(Self { offdiag, diag })
    }

    /// Builds coefficients from the monic form, i.e. from `a_n^2`.
    pub fn from_monic(offdiag_squared: &[f64], diag: Vec<f64>) -> Result<Self> {
        check_finite("off-diagonal", offdiag_squared)?;
        if let Some(index) = offdiag_squared.iter().position(|&a2| a2 <= 0.0) {
            return Err(Error::NonPositiveOffdiag {
                index,
                value: offdiag_squared[index],
            });
        }
        Self::new(offdiag_squared.iter().map(|a2| a2.sqrt()).collect(), diag)
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// The monic recurrence coefficients `a_n^2`.
    pub fn offdiag_squared(&self) -> Vec<f64> {
        self.offdiag.iter().map(|a| a * a).collect()
    }

    /// Coefficients of the leading `n × n` block.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.size() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.size(),
            });
        }
        Ok(Self {
            offdiag: self.offdiag[..n - 1].to_vec(),
            diag: self.diag[..n].to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Monic,
    Orthonormal,
}

/// Values `P_n(x_k)` for `n = 0..=N` (rows) at every node `x_k` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTable {
    pub values: DMatrix<f64>,
    pub normalization: Normalization,
    pub nodes: Vec<f64>,
}

impl PolynomialTable {
    /// Highest degree stored, i.e. `N`.
    pub fn max_degree(&self) -> usize {
        self.values.nrows() - 1
    }

    pub fn get(&self, degree: usize, node: usize) -> f64 {
        self.values[(degree, node)]
    }
}

/// Evaluates `P_0..P_N` at every node by forward recurrence.
///
/// Both normalizations are generated by their own recurrence; the
/// orthonormal values stay bounded where the monic ones would overflow.
pub fn evaluate_ops(
    coeffs: &RecurrenceCoefficients,
    nodes: &[f64],
    normalization: Normalization,
) -> Result<PolynomialTable> {
    check_finite("nodes", nodes)?;
    let n = coeffs.size();
    let a = coeffs.offdiag();
    let b = coeffs.diag();
    let mut values = DMatrix::zeros(n + 1, nodes.len());
    for (col, &x) in nodes.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = 1.0;
        values[(0, col)] = 1.0;
        for k in 0..n {
            // a_{N-1} := 1 closes the recurrence at the last step.
            let next = match normalization {
                Normalization::Monic => {
                    let a2 = if k == 0 { 0.0 } else { a[k - 1] * a[k - 1] };
                    (x - b[k]) * cur - a2 * prev
                }
                Normalization::Orthonormal => {
                    let a_prev = if k == 0 { 0.0 } else { a[k - 1] };
                    let a_k = if k + 1 < n { a[k] } else { 1.0 };
                    ((x - b[k]) * cur - a_prev * prev) / a_k
                }
            };
            values[(k + 1, col)] = next;
            prev = cur;
            cur = next;
        }
    }
    Ok(PolynomialTable {
        values,
        normalization,
        nodes: nodes.to_vec(),
    })
}

/// Real zeros of `P_n` in increasing order, as eigenvalues of `J_n`.
pub fn polynomial_zeros(coeffs: &RecurrenceCoefficients, n: usize) -> Result<Vec<f64>> {
    let block = coeffs.truncated(n)?;
    tridiag::eigenvalues(block.diag(), block.offdiag())
}

/// Parameters of the Krawtchouk family `K_n(x; p, M)`.
///
/// The classical family needs `M ≥ 1`; [`KrawtchoukParams::extended`]
/// admits any integer `M` (negative values appear in the exceptional
/// construction), since each term of the explicit sum is polynomial in `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrawtchoukParams {
    p: f64,
    m: i64,
}

impl KrawtchoukParams {
    pub fn new(p: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("Krawtchouk M must be at least 1".into()));
        }
        Self::extended(p, m as i64)
    }

    pub fn extended(p: f64, m: i64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Invalid(format!("Krawtchouk p = {p} must lie in (0, 1)")));
        }
        Ok(Self { p, m })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> i64 {
        self.m
    }
}

/// Rising factorial `(a)_j = a (a+1) ⋯ (a+j-1)`.
pub fn pochhammer(a: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// Monic Krawtchouk polynomial from its explicit hypergeometric sum
///
/// ```text
/// K_n(x; p, M) = Σ_{j=0}^{n} (-n)_j (-M+j)_{n-j} / j! · p^{n-j} (-x)_j
/// ```
///
/// This never touches the recurrence, so it serves as an independent check
/// of [`evaluate_ops`] on [`krawtchouk_coefficients`].
pub fn krawtchouk_monic(params: KrawtchoukParams, n: usize, x: f64) -> f64 {
    let p = params.p;
    let m = params.m as f64;
    let mut sum = 0.0;
    let mut j_factorial = 1.0;
    for j in 0..=n {
        if j > 0 {
            j_factorial *= j as f64;
        }
        sum += pochhammer(-(n as f64), j) * pochhammer(-m + j as f64, n - j) / j_factorial
            * p.powi((n - j) as i32)
            * pochhammer(-x, j);
    }
    sum
}

/// Orthonormal recurrence coefficients of the Krawtchouk family, size `M+1`.
///
/// Monic form: `b_n = M p + n (1 - 2p)` and `a_{n-1}^2 = n (M + 1 - n) p (1 - p)`.
pub fn krawtchouk_coefficients(params: KrawtchoukParams) -> Result<RecurrenceCoefficients> {
    if params.m < 1 {
        return Err(Error::Invalid(format!(
            "Krawtchouk recurrence needs M >= 1, got {}",
            params.m
        )));
    }
    let m = params.m as usize;
    let p = params.p;
    let mf = m as f64;
    let diag = (0..=m).map(|n| mf * p + n as f64 * (1.0 - 2.0 * p)).collect();
    let squared: Vec<f64> = (1..=m)
        .map(|n| n as f64 * (mf + 1.0 - n as f64) * p * (1.0 - p))
        .collect();
    RecurrenceCoefficients::from_monic(&squared, diag)
}

/// Binomial orthogonality weights `C(M, x) p^x (1-p)^{M-x}` on `x = 0..=M`.
pub fn krawtchouk_weights(params: KrawtchoukParams) -> Result<Vec<f64>> {
    if params.m < 1 {
        return Err(Error::Invalid("Krawtchouk weights need M >= 1".into()));
    }
    let m = params.m as usize;
    let p = params.p;
    Ok((0..=m)
        .map(|x| binomial(m, x) * p.powi(x as i32) * (1.0 - p).powi((m - x) as i32))
        .collect())
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kraw(p: f64, m: usize) -> KrawtchoukParams {
        KrawtchoukParams::new(p, m).unwrap()
    }

    #[test]
    fn krawtchouk_m4_monic_values_at_zero() {
        let coeffs = krawtchouk_coefficients(kraw(0.5, 4)).unwrap();
        let t = evaluate_ops(&coeffs, &[0.0], Normalization::Monic).unwrap();
        let expected = [1.0, -2.0, 3.0, -3.0, 1.5];
        for (n, e) in expected.iter().enumerate() {
            assert_relative_eq!(t.get(n, 0), *e, epsilon = 1e-14);
        }
    }

    #[test]
    fn empty_node_list() {
        let coeffs = krawtchouk_coefficients(kraw(0.5, 4)).unwrap();
        let t = evaluate_ops(&coeffs, &[], Normalization::Orthonormal).unwrap();
        assert_eq!(t.values.nrows(), 6);
        assert_eq!(t.values.ncols(), 0);
    }

    #[test]
    fn two_site_hand_recurrence() {
        let coeffs = RecurrenceCoefficients::new(vec![1.0], vec![0.0, 0.0]).unwrap();
        let t = evaluate_ops(&coeffs, &[1.0], Normalization::Monic).unwrap();
        assert_eq!(t.get(1, 0), 1.0);
        assert_eq!(t.get(2, 0), 0.0);
    }

    #[test]
    fn rejects_non_positive_offdiag() {
        let err = RecurrenceCoefficients::new(vec![1.0, 0.0], vec![0.0; 3]).unwrap_err();
        assert_eq!(err, Error::NonPositiveOffdiag { index: 1, value: 0.0 });
        assert!(RecurrenceCoefficients::new(vec![-1.0], vec![0.0; 2]).is_err());
        assert!(RecurrenceCoefficients::new(vec![1.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn single_site_is_legal() {
        let coeffs = RecurrenceCoefficients::new(vec![], vec![0.7]).unwrap();
        let t = evaluate_ops(&coeffs, &[2.0], Normalization::Orthonormal).unwrap();
        assert_relative_eq!(t.get(1, 0), 1.3);
        assert_eq!(polynomial_zeros(&coeffs, 1).unwrap(), vec![0.7]);
    }

    #[test]
    fn sum_form_examples() {
        let k = kraw(0.5, 4);
        assert_relative_eq!(krawtchouk_monic(k, 2, 1.0), 0.0, epsilon = 1e-14);
        assert_eq!(krawtchouk_monic(k, 0, 17.3), 1.0);
        assert_relative_eq!(krawtchouk_monic(k, 4, 2.0), 1.5, epsilon = 1e-13);
        // K_3(x) = x^3 - 6x^2 + 19/2 x - 3
        let x = 0.37_f64;
        assert_relative_eq!(
            krawtchouk_monic(k, 3, x),
            x.powi(3) - 6.0 * x * x + 9.5 * x - 3.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn rejects_bad_p() {
        assert!(KrawtchoukParams::new(0.0, 3).is_err());
        assert!(KrawtchoukParams::new(1.0, 3).is_err());
        assert!(KrawtchoukParams::new(f64::NAN, 3).is_err());
        assert!(KrawtchoukParams::new(0.5, 0).is_err());
        assert!(KrawtchoukParams::extended(0.5, -6).is_ok());
    }

    #[test]
    fn krawtchouk_recurrence_coefficients() {
        let c = krawtchouk_coefficients(kraw(0.5, 4)).unwrap();
        let a2 = c.offdiag_squared();
        for (got, want) in a2.iter().zip([1.0, 1.5, 1.5, 1.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }
        assert_eq!(c.diag(), &[2.0; 5]);
        let s = 1.5_f64.sqrt();
        for (got, want) in c.offdiag().iter().zip([1.0, s, s, 1.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }

        let c1 = krawtchouk_coefficients(kraw(0.5, 1)).unwrap();
        assert_relative_eq!(c1.offdiag_squared()[0], 0.25);
        assert_eq!(c1.diag(), &[0.5, 0.5]);
    }

    #[test]
    fn krawtchouk_zeros_are_the_grid() {
        let c = krawtchouk_coefficients(kraw(0.5, 4)).unwrap();
        let z = polynomial_zeros(&c, 5).unwrap();
        for (k, zk) in z.iter().enumerate() {
            assert_relative_eq!(*zk, k as f64, epsilon = 1e-12);
        }
    }

    /// Bisection on the listed quartic, independent of the eigensolver.
    #[test]
    fn krawtchouk_quartic_zeros_interlace_grid() {
        let k4 = |x: f64| x.powi(4) - 8.0 * x.powi(3) + 20.0 * x * x - 16.0 * x + 1.5;
        let mut oracle = Vec::new();
        for i in 0..4 {
            let (mut lo, mut hi) = (i as f64, i as f64 + 1.0);
            assert!(k4(lo) * k4(hi) < 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if k4(lo) * k4(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            oracle.push(0.5 * (lo + hi));
        }
        let c = krawtchouk_coefficients(kraw(0.5, 4)).unwrap();
        let z = polynomial_zeros(&c, 4).unwrap();
        for (i, (got, want)) in z.iter().zip(&oracle).enumerate() {
            assert_relative_eq!(*got, *want, epsilon = 1e-12);
            assert!(*got > i as f64 && *got < i as f64 + 1.0);
        }
    }

    #[test]
    fn general_p_recurrence_matches_sum_form() {
        for &p in &[0.1, 0.3, 0.5, 0.77, 0.9] {
            for m in 1..=12 {
                let k = kraw(p, m);
                let c = krawtchouk_coefficients(k).unwrap();
                let nodes: Vec<f64> = (0..24).map(|i| -2.0 + i as f64 * (m as f64 + 4.0) / 23.0).collect();
                let t = evaluate_ops(&c, &nodes, Normalization::Monic).unwrap();
                for n in 0..=m {
                    let scale = 1.0 + (0..nodes.len()).map(|col| t.get(n, col).abs()).fold(0.0, f64::max);
                    for (col, &x) in nodes.iter().enumerate() {
                        let direct = krawtchouk_monic(k, n, x);
                        assert!(
                            (direct - t.get(n, col)).abs() <= 1e-10 * scale,
                            "p={p} M={m} n={n} x={x}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn orthonormal_is_monic_over_running_product() {
        let c = RecurrenceCoefficients::new(vec![0.4, 1.7, 2.2], vec![0.3, -1.0, 0.5, 2.0]).unwrap();
        let nodes = [-1.3, 0.2, 4.1];
        let mo = evaluate_ops(&c, &nodes, Normalization::Monic).unwrap();
        let on = evaluate_ops(&c, &nodes, Normalization::Orthonormal).unwrap();
        let mut prod = 1.0;
        for n in 0..=4 {
            if n > 0 && n < 4 {
                prod *= c.offdiag()[n - 1];
            }
            for col in 0..nodes.len() {
                assert_relative_eq!(on.get(n, col), mo.get(n, col) / prod, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn pochhammer_basics() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(3.0, 3), 60.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
        assert_eq!(pochhammer(-4.0, 2), 12.0);
    }

    #[test]
    fn binomial_weights_sum_to_one() {
        let w = krawtchouk_weights(kraw(0.3, 9)).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        let w = krawtchouk_weights(kraw(0.5, 4)).unwrap();
        assert_eq!(w, vec![1.0 / 16.0, 0.25, 0.375, 0.25, 1.0 / 16.0]);
    }
}
