//! Empirical measures and the statistics used to compare them with their limits.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Standard normal CDF via `erfc`; absolute error below `1e-15` on the real line.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard exponential CDF `(1 - e^{-x})₊`.
pub fn exponential_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

/// Chi-square CDF with two degrees of freedom, `(1 - e^{-x/2})₊`.
pub fn chi_square2_cdf(x: f64) -> f64 {
    exponential_cdf(0.5 * x)
}

/// Uniform probability measure on finitely many atoms, kept sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    values: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().copied().collect::<NeumaierSum>().value() / self.len() as f64
    }

    /// `#{v ≤ x} / m`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|v| *v <= x) as f64 / self.len() as f64
    }

    /// `sup_x |F_m(x) - cdf(x)|` for a continuous `cdf`, evaluated at the staircase corners.
    pub fn ks_to<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let m = self.len() as f64;
        let mut worst = 0.0f64;
        for (i, &v) in self.values.iter().enumerate() {
            let f = cdf(v);
            let below = i as f64 / m;
            let above = (i + 1) as f64 / m;
            worst = worst.max((above - f).abs()).max((below - f).abs());
        }
        worst
    }

    /// Two-sample distance `sup_x |F(x) - G(x)|`.
    pub fn ks_between(&self, other: &EmpiricalMeasure) -> f64 {
        let (a, b) = (&self.values, &other.values);
        let (ma, mb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0usize, 0usize);
        let mut worst = 0.0f64;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            worst = worst.max((i as f64 / ma - j as f64 / mb).abs());
        }
        worst
    }

    /// `(1/m) Σ e^{i s v}`.
    pub fn char_fn(&self, s: f64) -> Complex64 {
        empirical_char(self.values.iter().map(|&v| (v, 0.0)), s, 0.0)
    }

    /// Single column with header `value`, 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let map = |e: csv::Error| Error::Csv { path: path.to_path_buf(), msg: e.to_string() };
        let mut w = csv::Writer::from_path(path).map_err(map)?;
        w.write_record(["value"]).map_err(map)?;
        for v in &self.values {
            w.write_record([format!("{v:.16e}")]).map_err(map)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let map = |e: csv::Error| Error::Csv { path: path.to_path_buf(), msg: e.to_string() };
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(map)?;
        let headers = r.headers().map_err(map)?.clone();
        if headers.len() != 1 || &headers[0] != "value" {
            return Err(Error::Csv { path: path.to_path_buf(), msg: "expected a single `value` column".into() });
        }
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(map)?;
            let v = rec[0]
                .parse::<f64>()
                .map_err(|_| Error::Csv { path: path.to_path_buf(), msg: format!("row {}: cannot parse `{}`", i + 1, &rec[0]) })?;
            values.push(v);
        }
        EmpiricalMeasure::new(values)
    }
}

/// Fraction of pairs with `s ≤ x` and `t ≤ y`.
pub fn joint_cdf(pairs: &[(f64, f64)], x: f64, y: f64) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.iter().filter(|(s, t)| *s <= x && *t <= y).count() as f64 / pairs.len() as f64
}

/// `(1/m) Σ_k exp(i(s·a_k + t·b_k))` over `(a_k, b_k)` pairs.
pub fn empirical_char<I: IntoIterator<Item = (f64, f64)>>(points: I, s: f64, t: f64) -> Complex64 {
    let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
    let mut m = 0usize;
    for (a, b) in points {
        let phase = s * a + t * b;
        let (sn, cs) = phase.sin_cos();
        re.add(cs);
        im.add(sn);
        m += 1;
    }
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(re.value() / m as f64, im.value() / m as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    GaussianClosedForm,
    HistogramEstimate,
}

/// Relative entropy with respect to `N(0,1)`; may be `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateValue {
    pub value: f64,
    pub method: RateMethod,
}

/// `I(N(m, σ²)) = (σ² + m² - 1 - ln σ²) / 2`.
pub fn rate_function_gaussian(mean: f64, sigma2: f64) -> Result<RateValue> {
    if !(sigma2.is_finite() && sigma2 > 0.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite mean and sigma2 > 0, got ({mean}, {sigma2})")));
    }
    Ok(RateValue { value: 0.5 * (sigma2 + mean * mean - 1.0 - sigma2.ln()), method: RateMethod::GaussianClosedForm })
}

/// Histogram plug-in estimate of `I(μ)`.
///
/// The grid has `bins` equal cells spanning `[min - h, max + h]` with
/// `h = (max - min)/bins`; each nonempty cell contributes `p ln(p/q)` where
/// `p` is the cell's empirical mass and `q` its standard-normal mass (the
/// cell average of `φ`). Biased; meant for diagnostics only.
pub fn rate_function_estimate(mu: &EmpiricalMeasure, bins: usize) -> Result<RateValue> {
    if bins < 2 || mu.len() < bins {
        return Err(Error::InvalidParameter(format!("need m >= bins >= 2, got m = {}, bins = {bins}", mu.len())));
    }
    let v = mu.values();
    let (lo, hi) = (v[0], v[v.len() - 1]);
    if lo == hi {
        return Ok(RateValue { value: f64::INFINITY, method: RateMethod::HistogramEstimate });
    }
    let pad = (hi - lo) / bins as f64;
    let start = lo - pad;
    let width = (hi - lo + 2.0 * pad) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in v {
        let b = (((x - start) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let m = v.len() as f64;
    let mut kl = NeumaierSum::new();
    for (b, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let left = start + b as f64 * width;
        let right = left + width;
        let q = normal_mass(left, right);
        let p = c as f64 / m;
        if q <= 0.0 {
            return Ok(RateValue { value: f64::INFINITY, method: RateMethod::HistogramEstimate });
        }
        kl.add(p * (p / q).ln());
    }
    Ok(RateValue { value: kl.value().max(0.0), method: RateMethod::HistogramEstimate })
}

/// `Φ(b) - Φ(a)` without cancellation in the tails.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}
