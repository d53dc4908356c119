//! Circulant spectra against dense eigenvalue oracles.

mod common;

use asclt::spectra::{
    circulant_eigen_dft, circulant_matrix, palindromic_matrix, periodogram, reverse_circulant_matrix, reverse_circulant_spectrum,
    symmetric_circulant_first_row, symmetric_circulant_spectrum,
};
use asclt::weights::max_trig_rows;
use asclt::{EmpiricalMeasure, SourceFamily, SourceSpec};
use proptest::prelude::*;
use rustfft::num_complex::Complex64;

fn spec(family: SourceFamily, seed: u64) -> SourceSpec {
    SourceSpec::new(family, seed, 0).unwrap()
}

#[test]
fn dft_matches_dense_oracle_small_n() {
    let rows = spec(SourceFamily::StandardizedExponential, 5);
    let mut offset = 1;
    for n in 1..=8usize {
        for _ in 0..50 {
            let mut row = vec![0.0; n];
            rows.fill_from(offset, &mut row);
            offset += n as u64;
            let d = common::match_distance(&circulant_eigen_dft(&row), &common::dense_eigenvalues(&circulant_matrix(&row)));
            assert!(d < 1e-9, "n={n} d={d}");
        }
    }
}

#[test]
fn oracle_self_check() {
    // diag(1, 2, 3) and a rotation by 90 degrees
    let ev = common::dense_eigenvalues(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
    let want = [1.0, 2.0, 3.0].map(|v| Complex64::new(v, 0.0));
    assert!(common::match_distance(&ev, &want) < 1e-12);
    let ev = common::dense_eigenvalues(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
    assert!(common::match_distance(&ev, &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]) < 1e-12);
    let j = common::jacobi_eigenvalues(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
    assert!((j[0] - 1.0).abs() < 1e-14 && (j[1] - 3.0).abs() < 1e-14);
}

#[test]
fn symmetric_circulant_matches_jacobi() {
    for n in 3..=24usize {
        let s = spec(SourceFamily::StandardNormal, n as u64);
        let spectrum = symmetric_circulant_spectrum(n, &s, (0.0, 1.0)).unwrap();
        let row = symmetric_circulant_first_row(n, &s.fill(n / 2 + 1)).unwrap();
        let scale = 1.0 / (n as f64).sqrt();
        let dense: Vec<Vec<f64>> = circulant_matrix(&row).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
        let oracle = common::jacobi_eigenvalues(&dense);
        let mut all: Vec<f64> = spectrum.eigenvalues.iter().chain(&spectrum.exceptional).copied().collect();
        all.sort_by(f64::total_cmp);
        for (a, b) in all.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "n={n}");
        }
        assert!(spectrum.imag_residual <= 1e-9);
    }
}

#[test]
fn reverse_circulant_matches_jacobi() {
    for n in 3..=24usize {
        let s = spec(SourceFamily::Rademacher, 100 + n as u64);
        let spectrum = reverse_circulant_spectrum(n, &s).unwrap();
        let scale = 1.0 / (n as f64).sqrt();
        let dense: Vec<Vec<f64>> = reverse_circulant_matrix(&s.fill(n)).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
        let oracle = common::jacobi_eigenvalues(&dense);
        let mut all: Vec<f64> = spectrum.eigenvalues.iter().chain(&spectrum.exceptional).copied().collect();
        all.sort_by(f64::total_cmp);
        for (a, b) in all.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "n={n}");
        }
    }
}

#[test]
fn reverse_pairs_are_periodogram_roots() {
    let n = 301;
    let s = spec(SourceFamily::StandardizedUniform, 9);
    let x = s.fill(n);
    let mut pos: Vec<f64> = reverse_circulant_spectrum(n, &s).unwrap().eigenvalues.into_iter().filter(|v| *v >= 0.0).collect();
    let mut roots: Vec<f64> = (1..=max_trig_rows(n)).map(|k| periodogram(&x, k).unwrap().sqrt()).collect();
    pos.sort_by(f64::total_cmp);
    roots.sort_by(f64::total_cmp);
    for (a, b) in pos.iter().zip(&roots) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn centering_moves_esd_little() {
    let n = 2001;
    let s = spec(SourceFamily::StandardizedExponential, 4);
    let full = |m: f64| {
        let sp = symmetric_circulant_spectrum(n, &s, (m, 1.0)).unwrap();
        EmpiricalMeasure::new(sp.eigenvalues.iter().chain(&sp.exceptional).copied().collect()).unwrap()
    };
    let plain = full(0.0);
    for m in [-3.0, 0.5, 10.0] {
        assert!(plain.ks_between(&full(m)) <= 2.0 / n as f64, "m={m}");
    }
}

#[test]
fn palindromic_and_symmetric_circulant_esds_agree() {
    let n = 201;
    let s = spec(SourceFamily::Rademacher, 12);
    let scale = 1.0 / (n as f64).sqrt();
    let pal: Vec<Vec<f64>> = palindromic_matrix(n, &s).unwrap().into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
    let pal_esd = EmpiricalMeasure::new(common::jacobi_eigenvalues(&pal)).unwrap();
    let sym = symmetric_circulant_spectrum(n - 1, &s, (0.0, 1.0)).unwrap();
    let mut all: Vec<f64> = sym.eigenvalues.iter().chain(&sym.exceptional).copied().collect();
    all.iter_mut().for_each(|v| *v *= ((n - 1) as f64 / n as f64).sqrt());
    let sym_esd = EmpiricalMeasure::new(all).unwrap();
    // a border of rank at most 2 moves at most a few eigenvalues past each point
    assert!(pal_esd.ks_between(&sym_esd) <= 4.0 / n as f64 + 1e-12);
}

proptest! {
    #[test]
    fn periodogram_is_nonnegative(values in proptest::collection::vec(-1e3f64..1e3, 3..80), k_frac in 0.0f64..1.0) {
        let n = values.len();
        let k = 1 + ((k_frac * max_trig_rows(n) as f64) as usize).min(max_trig_rows(n) - 1);
        prop_assert!(periodogram(&values, k).unwrap() >= 0.0);
    }

    #[test]
    fn circulant_trace_matches(row in proptest::collection::vec(-10.0f64..10.0, 1..64)) {
        let total: Complex64 = circulant_eigen_dft(&row).iter().sum();
        let n = row.len() as f64;
        prop_assert!((total.re - n * row[0]).abs() <= 1e-9 * (1.0 + n * row[0].abs()));
        prop_assert!(total.im.abs() <= 1e-9 * (1.0 + n));
    }
}
