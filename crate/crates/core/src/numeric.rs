//! Small numerical kernels shared by the modules: compensated summation,
//! adaptive quadrature and bisection.

use std::ops::AddAssign;

/// Kahan–Babuška–Neumaier running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Compensated dot product.
pub fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = NeumaierSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is always split into at least `2^MIN_LEVELS` panels before the
/// error test is trusted, so narrow peaks are not missed by the first samples.
/// Returns a non-finite value if the integrand overflows anywhere it is sampled.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_LEVELS)
}

const MAX_LEVELS: u32 = 50;
const MIN_LEVELS: u32 = 6;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return f64::INFINITY;
    }
    if depth == 0 || (MAX_LEVELS - depth >= MIN_LEVELS && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Bisection for the boundary of a monotone predicate on `[lo, hi]`.
///
/// `pred` must be false at `lo` side and true at `hi` side (or everywhere true /
/// everywhere false, in which case the respective endpoint is returned).
/// Returns the smallest point (to `rel_tol`) at which `pred` holds.
pub fn bisect_threshold<P: Fn(f64) -> bool>(pred: P, lo: f64, hi: f64, rel_tol: f64) -> Option<f64> {
    if pred(lo) {
        return Some(lo);
    }
    if !pred(hi) {
        return None;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        if (b - a) <= rel_tol * b.abs() {
            break;
        }
        // geometric midpoint: the search range spans several decades
        let m = (a * b).sqrt();
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Some(b)
}

/// Stable hex digest of a slice of floats (bit patterns, little endian).
pub fn digest_f64(values: &[f64]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_bits().to_le_bytes());
    }
    let out = hasher.finalize();
    out.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = vals.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(vals), 2.0);
    }

    #[test]
    fn simpson_polynomial_and_gaussian() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        let g = adaptive_simpson(&|x: f64| (-0.5 * x * x).exp(), -12.0, 12.0, 1e-13);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let t = bisect_threshold(|x| x * x >= 2.0, 1e-3, 1e3, 1e-14).unwrap();
        assert!((t - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(bisect_threshold(|_| true, 1.0, 2.0, 1e-9), Some(1.0));
        assert_eq!(bisect_threshold(|_| false, 1.0, 2.0, 1e-9), None);
    }

    #[test]
    fn digest_is_prefix_sensitive() {
        let a = digest_f64(&[1.0, 2.0]);
        assert_eq!(a, digest_f64(&[1.0, 2.0]));
        assert_ne!(a, digest_f64(&[1.0, 2.0, 3.0]));
        assert_eq!(a.len(), 32);
    }
}
