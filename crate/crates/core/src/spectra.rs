//! Circulant-family spectra and periodograms.
//!
//! Every ensemble here is diagonalized by the DFT, so spectra are exact
//! `O(n log n)` computations. Eigenvalues that fall outside the paired
//! formulas (at most two per matrix) are kept in [`Spectrum::exceptional`]
//! and left out of the empirical spectral distribution.

use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::empirical::{exponential_cdf, normal_cdf, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::sources::SourceSpec;
use crate::transform::FastTrig;
use crate::weights::{max_trig_rows, turn_cos_sin};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    SymmetricCirculant,
    ReverseCirculant,
    /// Symmetric Toeplitz with a palindromic first row; dense only, see [`palindromic_matrix`].
    Palindromic,
    RawCirculantDft,
}

impl Ensemble {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" | "symmetric_circulant" => Ok(Ensemble::SymmetricCirculant),
            "reverse" | "reverse_circulant" => Ok(Ensemble::ReverseCirculant),
            other => Err(Error::InvalidParameter(format!("unknown ensemble `{other}` (expected symmetric or reverse)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub ensemble: Ensemble,
    pub n: usize,
    /// Scale applied to the matrix before diagonalization.
    pub normalization: f64,
    /// Paired eigenvalues, sorted ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues outside the paired formula (`k = 0` and, for even `n`, `k = n/2`).
    pub exceptional: Vec<f64>,
    /// Largest imaginary part discarded when reading a real spectrum off the DFT.
    pub imag_residual: f64,
}

impl Spectrum {
    pub fn esd(&self) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::new(self.eigenvalues.clone())
    }

    /// KS distance of the ESD to the ensemble's limit law.
    pub fn ks_to_limit(&self) -> Result<f64> {
        let esd = self.esd()?;
        Ok(match self.ensemble {
            Ensemble::ReverseCirculant => esd.ks_to(reverse_circulant_limit_cdf),
            _ => esd.ks_to(normal_cdf),
        })
    }

    /// CSV with header `index,eigenvalue`; paired eigenvalues first, then exceptional ones.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let map = |e: csv::Error| Error::Csv { path: path.to_path_buf(), msg: e.to_string() };
        let mut w = csv::Writer::from_path(path).map_err(map)?;
        w.write_record(["index", "eigenvalue", "exceptional"]).map_err(map)?;
        let rows = self.eigenvalues.iter().map(|v| (v, false)).chain(self.exceptional.iter().map(|v| (v, true)));
        for (i, (v, exc)) in rows.enumerate() {
            w.write_record([i.to_string(), format!("{v:.16e}"), exc.to_string()]).map_err(map)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> Result<SpectrumSummary> {
        Ok(SpectrumSummary {
            n: self.n,
            ensemble: self.ensemble,
            normalization: self.normalization,
            ks_to_limit: self.ks_to_limit()?,
            exceptional_eigenvalues: self.exceptional.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub n: usize,
    pub ensemble: Ensemble,
    pub normalization: f64,
    pub ks_to_limit: f64,
    pub exceptional_eigenvalues: Vec<f64>,
}

/// Limit CDF of the reverse-circulant ESD under `1/√n` scaling: density `|x| e^{-x²}`.
pub fn reverse_circulant_limit_cdf(x: f64) -> f64 {
    let tail = 0.5 * (-x * x).exp();
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Eigenvalues `λ_k = Σ_l c_l e^{-2πilk/n}`, `k = 0..n`, of the circulant with first row `c`.
pub fn circulant_eigen_dft(first_row: &[f64]) -> Vec<Complex64> {
    let n = first_row.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = first_row.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// First row `c_l = x_{l}` for `l ≤ ⌊n/2⌋`, mirrored `c_l = c_{n-l}` above.
/// `x` holds the `⌊n/2⌋ + 1` free entries.
pub fn symmetric_circulant_first_row(n: usize, x: &[f64]) -> Result<Vec<f64>> {
    let free = n / 2 + 1;
    if x.len() != free {
        return Err(Error::DimensionMismatch { expected: free, actual: x.len() });
    }
    Ok((0..n).map(|l| if l <= n / 2 { x[l] } else { x[n - l] }).collect())
}

/// Dense circulant matrix, `A[i][j] = c_{(j - i) mod n}`.
pub fn circulant_matrix(first_row: &[f64]) -> Vec<Vec<f64>> {
    let n = first_row.len();
    (0..n).map(|i| (0..n).map(|j| first_row[(j + n - i) % n]).collect()).collect()
}

/// Dense reverse circulant, `A[i][j] = c_{(i + j) mod n}`.
pub fn reverse_circulant_matrix(first_row: &[f64]) -> Vec<Vec<f64>> {
    let n = first_row.len();
    (0..n).map(|i| (0..n).map(|j| first_row[(i + j) % n]).collect()).collect()
}

/// Dense palindromic symmetric Toeplitz matrix: `A[i][j] = b_{|i-j|}` with
/// `b_l = X_{min(l, n-1-l) + 1}`. Its leading `(n-1)×(n-1)` block is the
/// symmetric circulant of order `n - 1`, so the two differ by a border only.
pub fn palindromic_matrix(n: usize, spec: &SourceSpec) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("palindromic matrix needs n >= 2, got {n}")));
    }
    let x = spec.fill(n.div_ceil(2));
    let b: Vec<f64> = (0..n).map(|l| x[l.min(n - 1 - l)]).collect();
    Ok((0..n).map(|i| (0..n).map(|j| b[i.abs_diff(j)]).collect()).collect())
}

fn exceptional_indices(n: usize) -> Vec<usize> {
    if n % 2 == 0 {
        vec![0, n / 2]
    } else {
        vec![0]
    }
}

/// Spectrum of `A_n / (σ√n)` for the symmetric circulant built from `X_j - m`.
pub fn symmetric_circulant_spectrum(n: usize, spec: &SourceSpec, standardize: (f64, f64)) -> Result<Spectrum> {
    let (m, sigma) = standardize;
    if !(sigma.is_finite() && sigma > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite m and sigma > 0, got ({m}, {sigma})")));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(format!("symmetric circulant needs n >= 3, got {n}")));
    }
    let row = symmetric_circulant_first_row(n, &spec.fill(n / 2 + 1))?;
    let scale = 1.0 / (sigma * (n as f64).sqrt());
    let mut lambda = circulant_eigen_dft(&row);
    // centering subtracts m·J, and the all-ones circulant J only has the eigenvalue n at k = 0
    lambda[0].re -= n as f64 * m;
    let imag_residual = lambda.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs())) * scale;
    let exc = exceptional_indices(n);
    let exceptional = exc.iter().map(|&k| lambda[k].re * scale).collect();
    let mut eigenvalues: Vec<f64> = (1..n).filter(|k| !exc.contains(k)).map(|k| lambda[k].re * scale).collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum { ensemble: Ensemble::SymmetricCirculant, n, normalization: scale, eigenvalues, exceptional, imag_residual })
}

/// Spectrum of `A_n / √n` for the reverse circulant with first row `X_1..X_n`.
///
/// Paired eigenvalues are `±|λ_k|/√n = ±√I_n(2πk/n)`, `1 ≤ k ≤ ⌊(n-1)/2⌋`.
pub fn reverse_circulant_spectrum(n: usize, spec: &SourceSpec) -> Result<Spectrum> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("reverse circulant needs n >= 3, got {n}")));
    }
    let row = spec.fill(n);
    let scale = 1.0 / (n as f64).sqrt();
    let lambda = circulant_eigen_dft(&row);
    let exceptional = exceptional_indices(n).into_iter().map(|k| lambda[k].re * scale).collect();
    let mut eigenvalues = Vec::with_capacity(2 * max_trig_rows(n));
    for z in &lambda[1..=max_trig_rows(n)] {
        let mag = z.norm() * scale;
        eigenvalues.push(mag);
        eigenvalues.push(-mag);
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum { ensemble: Ensemble::ReverseCirculant, n, normalization: scale, eigenvalues, exceptional, imag_residual: 0.0 })
}

/// `I_n(2πk/n) = (1/n)|Σ_j e^{-ij·2πk/n} x_j|²` by direct compensated summation.
pub fn periodogram(x: &[f64], k: usize) -> Result<f64> {
    let n = x.len();
    if k < 1 || k > max_trig_rows(n) {
        return Err(Error::InvalidParameter(format!("periodogram frequency k = {k} outside 1..={}", max_trig_rows(n))));
    }
    let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
    for (idx, &xj) in x.iter().enumerate() {
        let j = idx as u128 + 1;
        let (c, s) = turn_cos_sin(j * k as u128, n as u128);
        re.add(c * xj);
        im.add(-s * xj);
    }
    let (re, im) = (re.value(), im.value());
    Ok((re * re + im * im) / n as f64)
}

/// All ordinates `I_n(2πk/n)`, `k = 1..=⌊(n-1)/2⌋`, as `(S² + T²)/2` from the fast transform.
pub fn periodogram_ordinates(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let ps = FastTrig::new(n.max(1)).partial_sums(max_trig_rows(n), x)?;
    Ok(ps.squared_magnitudes().unwrap().into_iter().map(|v| 0.5 * v).collect())
}

/// `sup_{x ≥ 0} |F_n(x) - (1 - e^{-x})|` for the periodogram of `X_1..X_n`.
pub fn periodogram_ecdf_distance(n: usize, spec: &SourceSpec) -> Result<f64> {
    if n < 7 {
        return Err(Error::InvalidParameter(format!("periodogram distance needs n >= 7, got {n}")));
    }
    let ords = periodogram_ordinates(&spec.fill(n))?;
    Ok(EmpiricalMeasure::new(ords)?.ks_to(exponential_cdf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::SourceFamily;
    use crate::transform::partial_sums_naive;
    use crate::weights::make_trig_pair;

    #[test]
    fn scalar_row_gives_constant_spectrum() {
        let ev = circulant_eigen_dft(&[2.5, 0.0, 0.0, 0.0, 0.0]);
        assert!(ev.iter().all(|z| (z - Complex64::new(2.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn small_circulant_example() {
        let ev = circulant_eigen_dft(&[1.0, 2.0, 3.0, 2.0]);
        let expect = [8.0, -2.0, 0.0, -2.0];
        for (z, e) in ev.iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_identity() {
        let spec = SourceSpec::new(SourceFamily::StandardNormal, 3, 0).unwrap();
        for n in [1usize, 2, 7, 64, 1000] {
            let row = spec.fill(n);
            let total: Complex64 = circulant_eigen_dft(&row).iter().sum();
            let target = n as f64 * row[0];
            assert!((total.re - target).abs() <= 1e-9 * target.abs().max(1.0));
            assert!(total.im.abs() <= 1e-9 * (n as f64));
        }
    }

    #[test]
    fn zero_stream_spectra_vanish() {
        let zero = SourceSpec::new(SourceFamily::Zero, 0, 0).unwrap();
        let s = symmetric_circulant_spectrum(9, &zero, (0.0, 1.0)).unwrap();
        assert!(s.eigenvalues.iter().chain(&s.exceptional).all(|v| *v == 0.0));
        let r = reverse_circulant_spectrum(9, &zero).unwrap();
        assert!(r.eigenvalues.iter().chain(&r.exceptional).all(|v| *v == 0.0));
        assert_eq!(periodogram_ecdf_distance(16, &zero).unwrap(), 1.0);
    }

    #[test]
    fn symmetric_spectrum_shape() {
        let spec = SourceSpec::new(SourceFamily::Rademacher, 4, 0).unwrap();
        for n in [9usize, 10] {
            let s = symmetric_circulant_spectrum(n, &spec, (0.0, 1.0)).unwrap();
            assert_eq!(s.eigenvalues.len() + s.exceptional.len(), n);
            assert!(s.imag_residual < 1e-9);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            // paired eigenvalues come in equal twos
            for pair in s.eigenvalues.chunks(2) {
                assert!((pair[0] - pair[1]).abs() < 1e-12);
            }
        }
        assert!(symmetric_circulant_spectrum(9, &spec, (0.0, 0.0)).is_err());
    }

    #[test]
    fn centering_matches_shifted_row() {
        let n = 50;
        let spec = SourceSpec::new(SourceFamily::StandardizedExponential, 2, 0).unwrap();
        let (m, sigma) = (0.75, 2.0);
        let got = symmetric_circulant_spectrum(n, &spec, (m, sigma)).unwrap();
        let x: Vec<f64> = spec.fill(n / 2 + 1).into_iter().map(|v| v - m).collect();
        let lambda = circulant_eigen_dft(&symmetric_circulant_first_row(n, &x).unwrap());
        let scale = 1.0 / (sigma * (n as f64).sqrt());
        assert!((got.exceptional[0] - lambda[0].re * scale).abs() < 1e-12);
        assert!((got.exceptional[1] - lambda[n / 2].re * scale).abs() < 1e-12);
        let mut want: Vec<f64> = (1..n).filter(|&k| k != n / 2).map(|k| lambda[k].re * scale).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pairs_equal_trig_sums() {
        // λ_k/√n = S_{n,k}(c)/√2 with the first row c as input (c_n ≡ c_0)
        let n = 33;
        let spec = SourceSpec::new(SourceFamily::StandardizedUniform, 8, 1).unwrap();
        let x = spec.fill(n / 2 + 1);
        let row = symmetric_circulant_first_row(n, &x).unwrap();
        let shifted: Vec<f64> = (1..=n).map(|j| row[j % n]).collect();
        let ps = partial_sums_naive(&make_trig_pair(n, max_trig_rows(n)).unwrap(), &shifted).unwrap();
        let lambda = circulant_eigen_dft(&row);
        for k in 1..=max_trig_rows(n) {
            let ev = lambda[k].re / (n as f64).sqrt();
            assert!((ev - ps.s[k - 1] / 2f64.sqrt()).abs() < 1e-12);
            assert!(ps.t.as_ref().unwrap()[k - 1].abs() < 1e-12);
        }
    }

    #[test]
    fn reverse_spectrum_is_symmetric() {
        let spec = SourceSpec::new(SourceFamily::StandardizedExponential, 4, 0).unwrap();
        let s = reverse_circulant_spectrum(101, &spec).unwrap();
        let neg: Vec<f64> = s.eigenvalues.iter().rev().map(|v| -v).collect();
        assert_eq!(neg, s.eigenvalues);
        assert_eq!(s.exceptional.len(), 1);
    }

    #[test]
    fn periodogram_examples() {
        let n = 64;
        for k in [1, 5, 31] {
            assert!(periodogram(&vec![1.0; n], k).unwrap() < 1e-25);
        }
        let k0 = 5;
        let x: Vec<f64> = (1..=n).map(|j| turn_cos_sin((j * k0) as u128, n as u128).0).collect();
        assert!((periodogram(&x, k0).unwrap() - n as f64 / 4.0).abs() < 1e-12);
        assert!(periodogram(&x, 0).is_err());
        assert!(periodogram(&x, 32).is_err());
    }

    #[test]
    fn periodogram_matches_transform() {
        let spec = SourceSpec::new(SourceFamily::StandardNormal, 77, 0).unwrap();
        let n = 257;
        let x = spec.fill(n);
        let ords = periodogram_ordinates(&x).unwrap();
        for k in 1..=max_trig_rows(n) {
            let direct = periodogram(&x, k).unwrap();
            assert!(direct >= 0.0);
            assert!((direct - ords[k - 1]).abs() <= 1e-9 * direct.max(1e-300), "k={k}");
        }
    }

    #[test]
    fn periodogram_distance_small_n_rejected() {
        let spec = SourceSpec::new(SourceFamily::StandardNormal, 1, 0).unwrap();
        assert!(periodogram_ecdf_distance(6, &spec).is_err());
    }

    #[test]
    fn limit_cdf_is_a_cdf() {
        assert_eq!(reverse_circulant_limit_cdf(0.0), 0.5);
        assert!(reverse_circulant_limit_cdf(-10.0) < 1e-40);
        assert!((reverse_circulant_limit_cdf(10.0) - 1.0).abs() < 1e-15);
    }
}
