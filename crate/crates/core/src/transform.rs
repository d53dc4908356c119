//! Weighted partial sums `S_{n,k} = Σ_j u_{k,j} X_j` and `T_{n,k} = Σ_j v_{k,j} X_j`.
//!
//! The naive path works for every weight kind with compensated accumulation
//! and is the reference. For trigonometric weights the fast path reads all
//! `(S_{n,k}, T_{n,k})` off one length-`n` DFT:
//! `Σ_j x_j e^{-2πijk/n} = √(n/2)·(S_{n,k} - i·T_{n,k})`.

use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_dot, NeumaierSum};
use crate::sources::{SourceFamily, SourceSpec};
use crate::weights::{make_trig_pair, max_trig_rows, WeightKind, WeightMatrixPair};

/// Default size at which trigonometric sums switch to the FFT path.
pub const DEFAULT_FAST_THRESHOLD: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub stream_id: u64,
    pub weight_kind: WeightKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialSums {
    pub n: usize,
    pub r: usize,
    pub s: Vec<f64>,
    pub t: Option<Vec<f64>>,
    pub provenance: Option<Provenance>,
}

impl PartialSums {
    pub fn with_provenance(mut self, spec: &SourceSpec, kind: WeightKind) -> Self {
        self.provenance = Some(Provenance { master_seed: spec.master_seed(), stream_id: spec.stream_id(), weight_kind: kind });
        self
    }

    /// `(S_k, T_k)` pairs; empty when `T` is absent.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        match &self.t {
            Some(t) => self.s.iter().copied().zip(t.iter().copied()).collect(),
            None => Vec::new(),
        }
    }

    /// `S_k² + T_k²` for each `k`.
    pub fn squared_magnitudes(&self) -> Option<Vec<f64>> {
        self.t.as_ref().map(|t| self.s.iter().zip(t).map(|(s, t)| s * s + t * t).collect())
    }

    /// CSV with header `k,s,t` (`t` empty when absent), 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let map = |e: csv::Error| Error::Csv { path: path.to_path_buf(), msg: e.to_string() };
        let mut w = csv::Writer::from_path(path).map_err(map)?;
        w.write_record(["k", "s", "t"]).map_err(map)?;
        for (i, s) in self.s.iter().enumerate() {
            let t = self.t.as_ref().map(|t| format!("{:.16e}", t[i])).unwrap_or_default();
            w.write_record([(i + 1).to_string(), format!("{s:.16e}"), t]).map_err(map)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_len(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
    }
    Ok(())
}

/// Reference `O(r·n)` evaluation with compensated accumulation.
pub fn partial_sums_naive(w: &WeightMatrixPair, x: &[f64]) -> Result<PartialSums> {
    let (n, r) = (w.n(), w.r());
    check_len(n, x)?;
    match w.trig_table() {
        Some(table) => {
            let scale = (2.0 / n as f64).sqrt();
            let mut s = Vec::with_capacity(r);
            let mut t = Vec::with_capacity(r);
            for k in 1..=r {
                let (mut cs, mut sn) = (NeumaierSum::new(), NeumaierSum::new());
                let mut idx = 0usize;
                for &xj in x {
                    idx += k;
                    if idx >= n {
                        idx -= n;
                    }
                    cs.add(table.cos(idx) * xj);
                    sn.add(table.sin(idx) * xj);
                }
                s.push(scale * cs.value());
                t.push(scale * sn.value());
            }
            Ok(PartialSums { n, r, s, t: Some(t), provenance: None })
        }
        None => {
            let s = (0..r).map(|k| compensated_dot(&w.u_row(k), x)).collect();
            let t = if w.has_v() { Some((0..r).map(|k| compensated_dot(&w.v_row(k).unwrap(), x)).collect()) } else { None };
            Ok(PartialSums { n, r, s, t, provenance: None })
        }
    }
}

/// A reusable forward DFT of length `n` for trigonometric partial sums.
///
/// Immutable after construction; clones share the plan.
#[derive(Clone)]
pub struct FastTrig {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FastTrig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FastTrig").field("n", &self.n).finish()
    }
}

impl FastTrig {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        Self { n, fft }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Forward DFT of `x` indexed from `j = 1`: `out[k] = Σ_{j=1}^n x_j e^{-2πijk/n}`.
    pub fn dft_one_based(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        check_len(self.n, x)?;
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        // j = n lands on bin 0
        buf[0] = Complex64::new(x[n - 1], 0.0);
        for j in 1..n {
            buf[j] = Complex64::new(x[j - 1], 0.0);
        }
        self.fft.process(&mut buf);
        Ok(buf)
    }

    /// `(S_{n,k}, T_{n,k})`, `k = 1..=r`, for `r ≤ ⌊(n-1)/2⌋`.
    pub fn partial_sums(&self, r: usize, x: &[f64]) -> Result<PartialSums> {
        if self.n < 3 || r < 1 || r > max_trig_rows(self.n) {
            return Err(Error::InvalidWeights(format!(
                "trig weights need n >= 3 and 1 <= r <= {}, got n = {}, r = {r}",
                max_trig_rows(self.n),
                self.n
            )));
        }
        let spec = self.dft_one_based(x)?;
        let scale = (2.0 / self.n as f64).sqrt();
        let s = spec[1..=r].iter().map(|z| scale * z.re).collect();
        let t = spec[1..=r].iter().map(|z| -scale * z.im).collect();
        Ok(PartialSums { n: self.n, r, s, t: Some(t), provenance: None })
    }
}

/// One-shot fast trigonometric partial sums.
pub fn partial_sums_fast(n: usize, r: usize, x: &[f64]) -> Result<PartialSums> {
    FastTrig::new(n.max(1)).partial_sums(r, x)
}

/// How to evaluate partial sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumPath {
    /// Fast for trig weights with `n ≥ threshold`, naive otherwise.
    Auto { threshold: usize },
    Naive,
    Fast,
}

impl Default for SumPath {
    fn default() -> Self {
        SumPath::Auto { threshold: DEFAULT_FAST_THRESHOLD }
    }
}

impl SumPath {
    pub fn uses_fast(self, w: &WeightMatrixPair) -> bool {
        match self {
            _ if w.kind() != WeightKind::Trig => false,
            SumPath::Auto { threshold } => w.n() >= threshold,
            SumPath::Naive => false,
            SumPath::Fast => true,
        }
    }
}

/// Partial sums along the selected path. `fast` may carry a prebuilt plan.
pub fn partial_sums(w: &WeightMatrixPair, x: &[f64], path: SumPath, fast: Option<&FastTrig>) -> Result<PartialSums> {
    if path.uses_fast(w) {
        match fast {
            Some(plan) if plan.n() == w.n() => plan.partial_sums(w.r(), x),
            _ => partial_sums_fast(w.n(), w.r(), x),
        }
    } else {
        partial_sums_naive(w, x)
    }
}

/// Trig sums of an i.i.d. standard-normal input, i.e. `r` i.i.d. `N(0,1)` pairs.
pub fn gaussian_oracle_sums(n: usize, r: usize, spec: &SourceSpec) -> Result<PartialSums> {
    if spec.family() != &SourceFamily::StandardNormal {
        return Err(Error::InvalidFamily(format!("gaussian oracle needs the normal family, got {}", spec.family())));
    }
    make_trig_pair(n, r)?;
    let x = spec.fill(n);
    Ok(partial_sums_fast(n, r, &x)?.with_provenance(spec, WeightKind::Trig))
}
