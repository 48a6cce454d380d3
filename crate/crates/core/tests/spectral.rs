mod common;

use proptest::prelude::*;
use pstlab::spectral::{eigendecompose, jacobi_from_spectrum, mirror_symmetric};
use pstlab::JacobiMatrix;

fn chain(max: usize, min_off: f64) -> impl Strategy<Value = JacobiMatrix> {
    (2usize..=max).prop_flat_map(move |n| {
        (
            prop::collection::vec(min_off..3.0, n - 1),
            prop::collection::vec(-2.0f64..2.0, n),
        )
            .prop_map(|(a, b)| JacobiMatrix::new(a, b).unwrap())
    })
}

fn mirror_chain() -> impl Strategy<Value = JacobiMatrix> {
    (2usize..=16, any::<u64>()).prop_map(|(n, seed)| common::random_mirror(&mut common::rng(seed), n))
}

proptest! {
    #![proptest_config(ProptestConfig {
        max_global_rejects: 1 << 16,
        ..ProptestConfig::with_cases(128)
    })]

    #[test]
    fn round_trip_through_spectral_data(j in chain(32, 0.1)) {
        let d = eigendecompose(&j).unwrap();
        let back = jacobi_from_spectrum(&d.eigenvalues, &d.weights).unwrap();
        prop_assert!(common::max_abs_diff(back.offdiag(), j.offdiag()) <= 1e-8);
        prop_assert!(common::max_abs_diff(back.diag(), j.diag()) <= 1e-8);
    }

    /// Gauss quadrature: `w_k = ‖p_{N-1}‖² / (p_N'(λ_k) p_{N-1}(λ_k))` for monic `p`.
    /// `p_{N-1}(λ_k)` cancels when `λ_k` nearly equals a zero of `p_{N-1}`;
    /// such instances are skipped.
    #[test]
    fn weights_match_quadrature_formula(j in chain(12, 0.5)) {
        let n = j.size();
        let d = eigendecompose(&j).unwrap();
        let head = JacobiMatrix::new(j.offdiag()[..n - 2].to_vec(), j.diag()[..n - 1].to_vec()).unwrap();
        let head_zeros = eigendecompose(&head).unwrap().eigenvalues;
        let separation = d.eigenvalues.iter()
            .flat_map(|l| head_zeros.iter().map(move |m| (l - m).abs()))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(separation > 1e-3);
        let norm: f64 = j.offdiag().iter().map(|a| a * a).product();
        for (k, &l) in d.eigenvalues.iter().enumerate() {
            let derivative: f64 = d.eigenvalues.iter().enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, &m)| l - m)
                .product();
            let w = norm / (derivative * common::charpoly(&j, n - 1, l));
            prop_assert!((w - d.weights[k]).abs() <= 1e-8 * (1.0 + w.abs()), "k={} {} vs {}", k, w, d.weights[k]);
        }
    }

    #[test]
    fn zero_diagonal_spectrum_is_symmetric(seed in any::<u64>(), n in 2usize..=20) {
        let j = common::random_zero_diagonal(&mut common::rng(seed), n);
        let d = eigendecompose(&j).unwrap();
        for k in 0..n {
            prop_assert!((d.eigenvalues[k] + d.eigenvalues[n - 1 - k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn mirror_chains_have_parity_eigenvectors(j in mirror_chain()) {
        prop_assert!(mirror_symmetric(&j, 1e-12));
        let n = j.size();
        let d = eigendecompose(&j).unwrap();
        // Eigenvectors of a pair closer than this mix at the 1e-9 level.
        prop_assume!(d.min_gap().unwrap() > 1e-5);
        for k in 0..n {
            let sign = if (n - 1 + k) % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..n {
                let v = &d.eigenvectors;
                prop_assert!((v[(i, k)] - sign * v[(n - 1 - i, k)]).abs() <= 1e-9, "k={} i={}", k, i);
            }
        }
    }
}

#[test]
fn spectrum_to_chain_and_back() {
    use rand::Rng;
    let mut rng = common::rng(7);
    for _ in 0..200 {
        let n = rng.random_range(1..=32);
        let mut eig: Vec<f64> = Vec::new();
        let mut x = rng.random_range(-5.0..0.0);
        for _ in 0..n {
            eig.push(x);
            x += rng.random_range(0.05..1.0);
        }
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let j = jacobi_from_spectrum(&eig, &w).unwrap();
        let d = eigendecompose(&j).unwrap();
        assert!(common::max_abs_diff(&d.eigenvalues, &eig) <= 1e-8);
        assert!(common::max_abs_diff(&d.weights, &w) <= 1e-8);
    }
}
