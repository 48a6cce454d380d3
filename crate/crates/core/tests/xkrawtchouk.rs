mod common;

use nalgebra::DVector;
use pstlab::xkrawtchouk::{
    build_band_hamiltonian, build_family, eigenvalue_formula, max_transfer_probability, x_amplitudes,
};
use rand::Rng;

const PS: [f64; 3] = [0.3, 0.5, 0.7];

#[test]
fn families_are_orthogonal_with_positive_weights() {
    for n in 1..=10 {
        for p in PS {
            let f = build_family(n, p).unwrap();
            assert_eq!(f.size(), n + 2);
            assert_eq!(f.degree_set().len(), f.grid().len());
            assert!(f.weights_hat().iter().all(|w| *w > 0.0));
            let t = f.eigenvector_table();
            assert!(t.orthonormality_residual() < 1e-8, "N={n} p={p}");
        }
    }
}

#[test]
fn band_spectrum_equals_formula() {
    for n in 1..=10 {
        for p in PS {
            let h = build_band_hamiltonian(&build_family(n, p).unwrap()).unwrap();
            let mut dense: Vec<f64> = h
                .entries
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            dense.sort_by(f64::total_cmp);
            let mut formula: Vec<f64> = (-1..=n as i64).map(|x| eigenvalue_formula(n, p, x as f64)).collect();
            formula.sort_by(f64::total_cmp);
            let scale = formula.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            assert!(common::max_abs_diff(&dense, &formula) <= 1e-8 * scale, "N={n} p={p}");
            assert!(h.off_band_max <= 1e-10 * scale, "N={n} p={p}: {}", h.off_band_max);
        }
    }
}

#[test]
fn table_columns_are_eigenvectors() {
    for n in 1..=10 {
        for p in PS {
            let f = build_family(n, p).unwrap();
            let h = build_band_hamiltonian(&f).unwrap();
            let t = f.eigenvector_table();
            for (c, &l) in h.spectrum_formula.iter().enumerate() {
                let v: DVector<f64> = t.entries.column(c).into_owned();
                let residual = (&h.entries * &v - &v * l).amax();
                assert!(residual <= 1e-8 * (1.0 + l.abs()), "N={n} p={p} x={c}");
            }
        }
    }
}

#[test]
fn amplitudes_match_matrix_exponential() {
    let mut rng = common::rng(31);
    for _ in 0..50 {
        let n = rng.random_range(1..=8);
        let p = PS[rng.random_range(0..3)];
        let f = build_family(n, p).unwrap();
        let h = build_band_hamiltonian(&f).unwrap();
        let t = f.eigenvector_table();
        let a = rng.random_range(1..=n + 2);
        let b = rng.random_range(1..=n + 2);
        let time = rng.random_range(-2.0..2.0);
        let got = x_amplitudes(&h, &t, a, b, &[time]).unwrap().values[0];
        let u = common::unitary(&h.entries, time, -1.0);
        assert!(
            (got - u[(b - 1, a - 1)]).norm() <= 1e-9,
            "N={n} p={p} ({a},{b}) t={time}"
        );
    }
}

#[test]
fn no_endpoint_transfer_on_any_size() {
    for n in 1..=8 {
        let f = build_family(n, 0.5).unwrap();
        let h = build_band_hamiltonian(&f).unwrap();
        let t = f.eigenvector_table();
        let (_, best) = max_transfer_probability(&h, &t, 1, n + 2, 60.0, 60_000).unwrap();
        assert!(best < 1.0 - 1e-3, "N={n}: {best}");
    }
}
