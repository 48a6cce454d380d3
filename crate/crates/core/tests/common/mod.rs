#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pstlab::JacobiMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let scaled = a / Complex64::new(2f64.powi(squarings), 0.0);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn expm_real(a: &DMatrix<f64>) -> DMatrix<f64> {
    expm(&a.map(|v| Complex64::new(v, 0.0))).map(|z| z.re)
}

/// `e^{i s t H}` for a real symmetric `H`.
pub fn unitary(h: &DMatrix<f64>, t: f64, sign: f64) -> DMatrix<Complex64> {
    expm(&h.map(|v| Complex64::new(0.0, sign * t * v)))
}

pub fn random_jacobi(rng: &mut StdRng, n: usize, off: (f64, f64), diag: (f64, f64)) -> JacobiMatrix {
    let a = (0..n.saturating_sub(1))
        .map(|_| rng.random_range(off.0..off.1))
        .collect();
    let b = (0..n).map(|_| rng.random_range(diag.0..diag.1)).collect();
    JacobiMatrix::new(a, b).unwrap()
}

pub fn random_zero_diagonal(rng: &mut StdRng, n: usize) -> JacobiMatrix {
    let a = (0..n - 1).map(|_| rng.random_range(0.1..3.0)).collect();
    JacobiMatrix::new(a, vec![0.0; n]).unwrap()
}

/// Mirror-symmetric chain: `a_i = a_{N-2-i}`, `b_i = b_{N-1-i}`.
pub fn random_mirror(rng: &mut StdRng, n: usize) -> JacobiMatrix {
    let mut a = vec![0.0; n - 1];
    for i in 0..(n - 1).div_ceil(2) {
        let v = rng.random_range(0.2..2.5);
        a[i] = v;
        a[n - 2 - i] = v;
    }
    let mut b = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let v = rng.random_range(-1.5..1.5);
        b[i] = v;
        b[n - 1 - i] = v;
    }
    JacobiMatrix::new(a, b).unwrap()
}

/// `n` distinct sorted integers from `[lo, hi]`.
pub fn random_integer_spectrum(rng: &mut StdRng, n: usize, lo: i64, hi: i64) -> Vec<f64> {
    let mut picked: Vec<i64> = Vec::with_capacity(n);
    while picked.len() < n {
        let v = rng.random_range(lo..=hi);
        if !picked.contains(&v) {
            picked.push(v);
        }
    }
    picked.sort_unstable();
    picked.into_iter().map(|v| v as f64).collect()
}

/// `det(x I_k - J_k)` for the leading `k × k` block, by the determinant recurrence.
pub fn charpoly(j: &JacobiMatrix, k: usize, x: f64) -> f64 {
    let (a, b) = (j.offdiag(), j.diag());
    let (mut prev, mut cur) = (0.0, 1.0);
    for i in 0..k {
        let coupling = if i == 0 { 0.0 } else { a[i - 1] * a[i - 1] };
        let next = (x - b[i]) * cur - coupling * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
