//! Weight matrices and the almost-orthogonality diagnostics.
//!
//! A [`WeightMatrixPair`] is either the trigonometric pair
//! `u_{k,j} = √(2/n) cos(2πjk/n)`, `v_{k,j} = √(2/n) sin(2πjk/n)` (stored
//! implicitly through a table of `n` angles), or a dense row-major matrix
//! (Haar-orthogonal draws and user-supplied matrices).

use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_dot, NeumaierSum};
use crate::sources::{SourceFamily, SourceSpec};

/// Largest `r * n` for which a trigonometric pair may be materialized densely.
pub const MAX_DENSE_ENTRIES: usize = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Trig,
    HaarOrthogonal,
    Custom,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Trig => "trig",
            WeightKind::HaarOrthogonal => "haar",
            WeightKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trig" => Ok(WeightKind::Trig),
            "haar" | "haar_orthogonal" => Ok(WeightKind::HaarOrthogonal),
            "custom" => Ok(WeightKind::Custom),
            other => Err(Error::InvalidWeights(format!("unknown weight kind `{other}` (expected trig, haar or custom)"))),
        }
    }
}

/// Largest admissible trigonometric row count, `⌊(n-1)/2⌋`.
pub fn max_trig_rows(n: usize) -> usize {
    n.saturating_sub(1) / 2
}

/// `cos(2πm/n)` and `sin(2πm/n)` for `m = 0..n`, reduced with integer
/// arithmetic to an angle in `[0, π/4]` before calling the libm kernels.
#[derive(Clone, Debug)]
pub struct TrigTable {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigTable {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let (cos, sin): (Vec<f64>, Vec<f64>) = (0..n).map(|m| turn_cos_sin(m as u128, n as u128)).unzip();
        Self { n, cos, sin }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `cos(2π·m/n)`, with `m` already reduced mod `n`.
    #[inline]
    pub fn cos(&self, m: usize) -> f64 {
        self.cos[m]
    }

    #[inline]
    pub fn sin(&self, m: usize) -> f64 {
        self.sin[m]
    }

    pub fn cos_slice(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_slice(&self) -> &[f64] {
        &self.sin
    }
}

/// `(cos, sin)` of `2π·m/n`.
pub(crate) fn turn_cos_sin(m: u128, n: u128) -> (f64, f64) {
    let m = m % n;
    // 4m = quadrant·n + rem; past π/4 inside the quadrant use the complementary angle
    let quadrant = (4 * m) / n;
    let rem = 4 * m - quadrant * n; // angle within quadrant: (π/2)·rem/n
    let (c, s) = if 2 * rem <= n {
        let theta = FRAC_PI_2 * rem as f64 / n as f64;
        (theta.cos(), theta.sin())
    } else {
        let theta = FRAC_PI_2 * (n - rem) as f64 / n as f64;
        (theta.sin(), theta.cos())
    };
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Trig(Arc<TrigTable>),
    Dense { u: Vec<f64>, v: Option<Vec<f64>> },
}

/// An `r × n` weight matrix `U` with optional companion `V`.
#[derive(Clone, Debug)]
pub struct WeightMatrixPair {
    kind: WeightKind,
    n: usize,
    r: usize,
    storage: Storage,
}

impl WeightMatrixPair {
    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn has_v(&self) -> bool {
        match &self.storage {
            Storage::Trig(_) => true,
            Storage::Dense { v, .. } => v.is_some(),
        }
    }

    pub fn trig_table(&self) -> Option<&Arc<TrigTable>> {
        match &self.storage {
            Storage::Trig(t) => Some(t),
            Storage::Dense { .. } => None,
        }
    }

    /// `u_{row+1, col+1}`.
    #[inline]
    pub fn u(&self, row: usize, col: usize) -> f64 {
        match &self.storage {
            Storage::Trig(t) => trig_scale(self.n) * t.cos(trig_index(row, col, self.n)),
            Storage::Dense { u, .. } => u[row * self.n + col],
        }
    }

    /// `v_{row+1, col+1}`, if `V` is present.
    #[inline]
    pub fn v(&self, row: usize, col: usize) -> Option<f64> {
        match &self.storage {
            Storage::Trig(t) => Some(trig_scale(self.n) * t.sin(trig_index(row, col, self.n))),
            Storage::Dense { v, .. } => v.as_ref().map(|v| v[row * self.n + col]),
        }
    }

    pub fn u_row(&self, row: usize) -> Vec<f64> {
        (0..self.n).map(|c| self.u(row, c)).collect()
    }

    pub fn v_row(&self, row: usize) -> Option<Vec<f64>> {
        if !self.has_v() {
            return None;
        }
        Some((0..self.n).map(|c| self.v(row, c).unwrap()).collect())
    }

    /// Row-major dense copies of `U` and `V`.
    pub fn to_dense(&self) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        match &self.storage {
            Storage::Dense { u, v } => Ok((u.clone(), v.clone())),
            Storage::Trig(_) => {
                if self.r * self.n > MAX_DENSE_ENTRIES {
                    return Err(Error::InvalidWeights(format!(
                        "refusing to materialize {}x{} trigonometric matrix",
                        self.r, self.n
                    )));
                }
                let u = (0..self.r).flat_map(|k| self.u_row(k)).collect();
                let v = (0..self.r).flat_map(|k| self.v_row(k).unwrap()).collect();
                Ok((u, Some(v)))
            }
        }
    }

    /// Dense weights from row-major data.
    pub fn custom(r: usize, n: usize, u: Vec<f64>, v: Option<Vec<f64>>) -> Result<Self> {
        if r == 0 || n == 0 {
            return Err(Error::InvalidWeights("custom matrix must have r >= 1 and n >= 1".into()));
        }
        if u.len() != r * n {
            return Err(Error::DimensionMismatch { expected: r * n, actual: u.len() });
        }
        if let Some(pos) = u.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        if let Some(v) = &v {
            if v.len() != r * n {
                return Err(Error::DimensionMismatch { expected: r * n, actual: v.len() });
            }
            if let Some(pos) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(pos));
            }
        }
        Ok(Self { kind: WeightKind::Custom, n, r, storage: Storage::Dense { u, v } })
    }

    /// First `rows` rows of this matrix (dense kinds only; trig pairs are rebuilt).
    pub fn truncate_rows(&self, rows: usize) -> Result<Self> {
        if rows == 0 || rows > self.r {
            return Err(Error::InvalidWeights(format!("cannot keep {rows} of {} rows", self.r)));
        }
        let storage = match &self.storage {
            Storage::Trig(t) => Storage::Trig(t.clone()),
            Storage::Dense { u, v } => Storage::Dense {
                u: u[..rows * self.n].to_vec(),
                v: v.as_ref().map(|v| v[..rows * self.n].to_vec()),
            },
        };
        Ok(Self { kind: self.kind, n: self.n, r: rows, storage })
    }

    /// Load `U` (and optionally `V`) from CSV files with one matrix row per line.
    pub fn from_csv(u_path: &Path, v_path: Option<&Path>) -> Result<Self> {
        let (r, n, u) = read_matrix_csv(u_path)?;
        let v = match v_path {
            Some(p) => {
                let (rv, nv, v) = read_matrix_csv(p)?;
                if (rv, nv) != (r, n) {
                    return Err(Error::DimensionMismatch { expected: r * n, actual: rv * nv });
                }
                Some(v)
            }
            None => None,
        };
        Self::custom(r, n, u, v)
    }

    /// Write `U` as CSV; `V` to `v_path` when present.
    pub fn write_csv(&self, u_path: &Path, v_path: Option<&Path>) -> Result<()> {
        let (u, v) = self.to_dense()?;
        write_matrix_csv(u_path, self.n, &u)?;
        if let (Some(p), Some(v)) = (v_path, v) {
            write_matrix_csv(p, self.n, &v)?;
        }
        Ok(())
    }
}

#[inline]
fn trig_scale(n: usize) -> f64 {
    (2.0 / n as f64).sqrt()
}

/// `(k·j) mod n` for zero-based row/column.
#[inline]
fn trig_index(row: usize, col: usize, n: usize) -> usize {
    (((row as u128 + 1) * (col as u128 + 1)) % n as u128) as usize
}

fn read_matrix_csv(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let csv_err = |msg: String| Error::Csv { path: path.to_path_buf(), msg };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_err(e.to_string()))?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let width = rec.len();
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => return Err(csv_err(format!("row {} has {width} columns, expected {c}", i + 1))),
            _ => {}
        }
        for field in rec.iter() {
            let x: f64 = field.parse().map_err(|_| csv_err(format!("row {}: cannot parse `{field}`", i + 1)))?;
            data.push(x);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| csv_err("empty matrix".into()))?;
    Ok((rows, cols, data))
}

fn write_matrix_csv(path: &Path, n: usize, data: &[f64]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.to_path_buf(), msg: e.to_string() })?;
    for row in data.chunks(n) {
        wtr.write_record(row.iter().map(|x| format!("{x:.16e}")))
            .map_err(|e| Error::Csv { path: path.to_path_buf(), msg: e.to_string() })?;
    }
    wtr.flush()?;
    Ok(())
}

/// The trigonometric pair with `1 ≤ r ≤ ⌊(n-1)/2⌋`.
pub fn make_trig_pair(n: usize, r: usize) -> Result<WeightMatrixPair> {
    make_trig_pair_with_table(Arc::new(TrigTable::new(n.max(1))), r)
}

/// Trig pair sharing an existing angle table.
pub fn make_trig_pair_with_table(table: Arc<TrigTable>, r: usize) -> Result<WeightMatrixPair> {
    let n = table.n();
    if n < 3 {
        return Err(Error::InvalidWeights(format!("trig weights need n >= 3, got {n}")));
    }
    if r < 1 || r > max_trig_rows(n) {
        return Err(Error::InvalidWeights(format!(
            "trig weights need 1 <= r <= floor((n-1)/2) = {} (2r < n), got r = {r}",
            max_trig_rows(n)
        )));
    }
    Ok(WeightMatrixPair { kind: WeightKind::Trig, n, r, storage: Storage::Trig(table) })
}

/// Haar-distributed `n × n` orthogonal matrix.
///
/// The Gaussian matrix is filled column by column from the standard-normal
/// stream with the seed and stream of `spec` (its family is ignored), then
/// factored as `QR`; each column of `Q` is flipped so that `diag(R) > 0`.
pub fn sample_haar_orthogonal(n: usize, spec: &SourceSpec) -> Result<WeightMatrixPair> {
    if n == 0 {
        return Err(Error::InvalidWeights("Haar sampler needs n >= 1".into()));
    }
    let gauss = spec.with_family(SourceFamily::StandardNormal)?;
    let draws = gauss.fill(n * n);
    let a = DMatrix::from_column_slice(n, n, &draws);
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..n {
        let d = r[(c, c)];
        if !d.is_finite() || d == 0.0 {
            return Err(Error::Numerical(format!("degenerate Gaussian draw: R[{c},{c}] = {d}")));
        }
        if d < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    let mut u = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            u.push(q[(row, col)]);
        }
    }
    if let Some(pos) = u.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    Ok(WeightMatrixPair { kind: WeightKind::HaarOrthogonal, n, r: n, storage: Storage::Dense { u, v: None } })
}

/// Raw left-hand sides of the almost-orthogonality conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: usize,
    pub r: usize,
    pub delta: f64,
    pub eps_entry_u: f64,
    pub eps_entry_v: Option<f64>,
    pub eps_orth_u: f64,
    pub eps_orth_v: Option<f64>,
    pub eps_cross: Option<f64>,
    /// `(log(1+r))^{1+δ}`.
    pub log_scale: f64,
}

impl ConditionReport {
    /// Largest of the orthogonality and cross residuals.
    pub fn max_orth(&self) -> f64 {
        [Some(self.eps_orth_u), self.eps_orth_v, self.eps_cross].into_iter().flatten().fold(0.0, f64::max)
    }
}

fn log_scale(r: usize, delta: f64) -> f64 {
    (1.0 + r as f64).ln().powf(1.0 + delta)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

/// Evaluate the entry, orthogonality and cross-orthogonality conditions for `w`.
///
/// Trig pairs use the product-to-sum reduction over compensated power sums
/// (see [`trig_power_sums`]); dense matrices use compensated inner products.
pub fn check_conditions(w: &WeightMatrixPair, delta: f64) -> Result<ConditionReport> {
    check_delta(delta)?;
    match &w.storage {
        Storage::Trig(table) => Ok(check_trig(table, w.r, delta)),
        Storage::Dense { .. } => check_conditions_dense(w, delta),
    }
}

/// Brute-force evaluation from the materialized entries.
pub fn check_conditions_dense(w: &WeightMatrixPair, delta: f64) -> Result<ConditionReport> {
    check_delta(delta)?;
    let (u, v) = w.to_dense()?;
    let n = w.n;
    let rows_u: Vec<&[f64]> = u.chunks(n).collect();
    let rows_v: Option<Vec<&[f64]>> = v.as_ref().map(|v| v.chunks(n).collect());
    let max_abs = |d: &[f64]| d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gram_dev = |rows: &[&[f64]]| {
        let mut worst = 0.0f64;
        for a in 0..rows.len() {
            for b in a..rows.len() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((compensated_dot(rows[a], rows[b]) - target).abs());
            }
        }
        worst
    };
    let eps_cross = rows_v.as_ref().map(|rv| {
        let mut worst = 0.0f64;
        for a in &rows_u {
            for b in rv {
                worst = worst.max(compensated_dot(a, b).abs());
            }
        }
        worst
    });
    Ok(ConditionReport {
        n,
        r: w.r,
        delta,
        eps_entry_u: max_abs(&u),
        eps_entry_v: v.as_deref().map(max_abs),
        eps_orth_u: gram_dev(&rows_u),
        eps_orth_v: rows_v.as_deref().map(gram_dev),
        eps_cross,
        log_scale: log_scale(w.r, delta),
    })
}

/// Power sums `C(m) = Σ_{j=1}^n cos(2πmj/n)` and `S(m) = Σ_j sin(2πmj/n)`, `m = 0..n`.
#[derive(Clone, Debug)]
pub struct PowerSums {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

/// Power sums by direct compensated summation, `O(n²)`.
pub fn trig_power_sums_direct(table: &TrigTable) -> PowerSums {
    let n = table.n();
    let mut cos = vec![0.0; n];
    let mut sin = vec![0.0; n];
    for m in 0..n {
        let (mut c, mut s) = (NeumaierSum::new(), NeumaierSum::new());
        let mut idx = 0usize;
        for _ in 0..n {
            idx += m;
            if idx >= n {
                idx -= n;
            }
            c.add(table.cos(idx));
            s.add(table.sin(idx));
        }
        cos[m] = c.value();
        sin[m] = s.value();
    }
    PowerSums { cos, sin }
}

/// Power sums with summands grouped by residue class.
///
/// For `g = gcd(m, n)` the indices `mj mod n`, `j = 1..n`, visit every
/// multiple of `g` exactly `g` times, so the sum equals `g` times the
/// compensated sum over one coset. The multiset of summands is unchanged.
pub fn trig_power_sums(table: &TrigTable) -> PowerSums {
    let n = table.n();
    let mut by_divisor: Vec<Option<(f64, f64)>> = vec![None; n + 1];
    let mut cos = vec![0.0; n];
    let mut sin = vec![0.0; n];
    for m in 0..n {
        let g = gcd(m, n);
        let (c, s) = *by_divisor[g].get_or_insert_with(|| {
            let (mut c, mut s) = (NeumaierSum::new(), NeumaierSum::new());
            for i in 0..n / g {
                c.add(table.cos(i * g));
                s.add(table.sin(i * g));
            }
            (c.value(), s.value())
        });
        cos[m] = g as f64 * c;
        sin[m] = g as f64 * s;
    }
    PowerSums { cos, sin }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_trig(table: &TrigTable, r: usize, delta: f64) -> ConditionReport {
    let n = table.n();
    let ps = trig_power_sums(table);
    let inv_n = 1.0 / n as f64;
    let scale = trig_scale(n);
    // k = 1 reaches every residue, so the entry maxima run over the whole table
    let eps_entry_u = scale * table.cos_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps_entry_v = scale * table.sin_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));

    // Gram entries: <u_a, u_b> = (C(a-b) + C(a+b))/n, <v_a, v_b> = (C(a-b) - C(a+b))/n,
    // <u_a, v_b> = (S(a+b) - S(a-b))/n; a + b ≤ 2r < n never wraps.
    let (c, s) = (&ps.cos, &ps.sin);
    let mut orth_u = 0.0f64;
    let mut orth_v = 0.0f64;
    let mut cross = 0.0f64;
    for a in 1..=r {
        // diagonal: C(0) = n exactly
        let cd = c[0] * inv_n;
        orth_u = orth_u.max((cd + c[2 * a] * inv_n - 1.0).abs());
        orth_v = orth_v.max((cd - c[2 * a] * inv_n - 1.0).abs());
        for b in (a + 1)..=r {
            let d = c[b - a];
            let p = c[a + b];
            orth_u = orth_u.max(((d + p) * inv_n).abs());
            orth_v = orth_v.max(((d - p) * inv_n).abs());
        }
        for b in 1..=r {
            let diff = if a >= b { a - b } else { n - (b - a) };
            cross = cross.max(((s[a + b] - s[diff]) * inv_n).abs());
        }
    }
    ConditionReport {
        n,
        r,
        delta,
        eps_entry_u,
        eps_entry_v: Some(eps_entry_v),
        eps_orth_u: orth_u,
        eps_orth_v: Some(orth_v),
        eps_cross: Some(cross),
        log_scale: log_scale(r, delta),
    }
}

/// Worst residuals of the four trigonometric identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub n: usize,
    pub tol: f64,
    pub passed: bool,
    pub worst: f64,
    pub cos_cos: f64,
    pub sin_sin: f64,
    pub cos_sin: f64,
    pub squares: f64,
}

/// Exact values of `Σ cos cos`, `Σ sin sin` for frequencies `k1, k2` (mod n):
/// `(n/2)([k1-k2 ≡ 0] + [k1+k2 ≡ 0])` and `(n/2)([k1-k2 ≡ 0] - [k1+k2 ≡ 0])`.
pub fn trig_identity_values(n: usize, k1: usize, k2: usize) -> (f64, f64) {
    let half = n as f64 / 2.0;
    let diff = usize::from((k1 + n - k2 % n) % n == 0) as f64;
    let sum = usize::from((k1 + k2) % n == 0) as f64;
    (half * (diff + sum), half * (diff - sum))
}

/// Check the identities over all `1 ≤ k1 ≤ k2 ≤ n` through the product-to-sum
/// reduction: `Σcos(ak1)cos(ak2) = (C(k2-k1) + C(k1+k2))/2`, etc.
pub fn verify_trig_identities(n: usize, tol: f64) -> Result<IdentityCheck> {
    if n < 3 {
        return Err(Error::InvalidWeights(format!("identity check needs n >= 3, got {n}")));
    }
    let table = TrigTable::new(n);
    let ps = trig_power_sums(&table);
    let nf = n as f64;
    // deviation of C from n·[m ≡ 0]; S should vanish everywhere
    let ec: Vec<f64> = ps.cos.iter().enumerate().map(|(m, c)| if m == 0 { c - nf } else { *c }).collect();
    let es = &ps.sin;
    // For k1 ≤ k2 put d = k2 - k1 and s = (k1 + k2) mod n. Every residual is a
    // function of (d, s), and for fixed d the reachable s are (2t + (d mod 2)) mod n
    // for a contiguous range of t, so the worst pair per d comes from range extrema.
    let parity_seq = |e: &[f64], odd: usize| (0..=n).map(|t| e[(2 * t + odd) % n]).collect::<Vec<f64>>();
    let c_ext = [RangeExtrema::new(&parity_seq(&ec, 0)), RangeExtrema::new(&parity_seq(&ec, 1))];
    let s_ext = [RangeExtrema::new(&parity_seq(es, 0)), RangeExtrema::new(&parity_seq(es, 1))];
    let (mut cc, mut ss, mut cs) = (0.0f64, 0.0f64, 0.0f64);
    for d in 0..n {
        // k1 runs over 1..=n-d; s = 2(k1 + ⌊d/2⌋) + (d mod 2)
        let (lo, hi) = (1 + d / 2, n - d + d / 2);
        let (cmin, cmax) = c_ext[d % 2].query(lo, hi);
        let (smin, smax) = s_ext[d % 2].query(lo, hi);
        let (a, e) = (ec[d], es[d]);
        cc = cc.max((0.5 * (a + cmax)).abs()).max((0.5 * (a + cmin)).abs());
        ss = ss.max((0.5 * (a - cmax)).abs()).max((0.5 * (a - cmin)).abs());
        // cos(k1)sin(k2) = (S(s) + S(d))/2, sin(k1)cos(k2) = (S(s) - S(d))/2
        for v in [smin, smax] {
            cs = cs.max((0.5 * (v + e)).abs()).max((0.5 * (v - e)).abs());
        }
    }
    // squares: Σcos² = (n + C(2k))/2, Σsin² = (n - C(2k))/2
    let mut sq = 0.0f64;
    for k in 1..=n {
        let two_k = (2 * k) % n;
        let expect_cos2 = if two_k == 0 { nf } else { nf / 2.0 };
        let got_cos2 = 0.5 * (nf + ps.cos[two_k]);
        let got_sin2 = 0.5 * (nf - ps.cos[two_k]);
        sq = sq.max((got_cos2 - expect_cos2).abs()).max((got_sin2 - (nf - expect_cos2)).abs());
    }
    let worst = cc.max(ss).max(cs).max(sq);
    Ok(IdentityCheck { n, tol, passed: worst <= tol, worst, cos_cos: cc, sin_sin: ss, cos_sin: cs, squares: sq })
}

/// Sparse table answering min/max over inclusive index ranges in `O(1)`.
struct RangeExtrema {
    min: Vec<Vec<f64>>,
    max: Vec<Vec<f64>>,
}

impl RangeExtrema {
    fn new(values: &[f64]) -> Self {
        let (mut min, mut max) = (vec![values.to_vec()], vec![values.to_vec()]);
        let mut width = 1;
        while 2 * width <= values.len() {
            let (pm, px) = (min.last().unwrap(), max.last().unwrap());
            let len = values.len() + 1 - 2 * width;
            let nm: Vec<f64> = (0..len).map(|i| pm[i].min(pm[i + width])).collect();
            let nx: Vec<f64> = (0..len).map(|i| px[i].max(px[i + width])).collect();
            min.push(nm);
            max.push(nx);
            width *= 2;
        }
        RangeExtrema { min, max }
    }

    fn query(&self, lo: usize, hi: usize) -> (f64, f64) {
        let level = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let right = hi + 1 - (1 << level);
        (self.min[level][lo].min(self.min[level][right]), self.max[level][lo].max(self.max[level][right]))
    }
}

/// `O(n³)` check from explicit products of table entries.
pub fn verify_trig_identities_direct(n: usize, tol: f64) -> Result<IdentityCheck> {
    if n < 3 {
        return Err(Error::InvalidWeights(format!("identity check needs n >= 3, got {n}")));
    }
    let t = TrigTable::new(n);
    let nf = n as f64;
    let (mut cc, mut ss, mut cs, mut sq) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k1 in 1..=n {
        for k2 in k1..=n {
            let (mut scc, mut sss, mut scs, mut ssc) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
            for j in 1..=n {
                let a = (k1 * j) % n;
                let b = (k2 * j) % n;
                scc.add(t.cos(a) * t.cos(b));
                sss.add(t.sin(a) * t.sin(b));
                scs.add(t.cos(a) * t.sin(b));
                ssc.add(t.sin(a) * t.cos(b));
            }
            let (ecc, ess) = trig_identity_values(n, k1, k2);
            let (rcc, rss) = ((scc.value() - ecc).abs(), (sss.value() - ess).abs());
            cs = cs.max(scs.value().abs()).max(ssc.value().abs());
            if k1 == k2 {
                let expect_cos2 = if (2 * k1) % n == 0 { nf } else { nf / 2.0 };
                sq = sq.max((scc.value() - expect_cos2).abs()).max((sss.value() - (nf - expect_cos2)).abs());
            }
            cc = cc.max(rcc);
            ss = ss.max(rss);
        }
    }
    let worst = cc.max(ss).max(cs).max(sq);
    Ok(IdentityCheck { n, tol, passed: worst <= tol, worst, cos_cos: cc, sin_sin: ss, cos_sin: cs, squares: sq })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_entries_exact_angles() {
        let w = make_trig_pair(8, 3).unwrap();
        assert!((w.u(0, 0) - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((w.u(1, 1) + 0.5).abs() < 1e-15);
        let row1 = w.u_row(0);
        let row2 = w.u_row(1);
        assert!(compensated_dot(&row1, &row2).abs() < 1e-15);
    }

    #[test]
    fn turn_table_matches_std() {
        for n in [1usize, 2, 3, 7, 8, 12, 1000, 4097] {
            let t = TrigTable::new(n);
            for m in 0..n {
                // the reference angle itself is rounded by up to ~2π·2⁻⁵³
                let ang = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
                assert!((t.cos(m) - ang.cos()).abs() < 2e-15, "n={n} m={m}");
                assert!((t.sin(m) - ang.sin()).abs() < 2e-15, "n={n} m={m}");
            }
        }
        // exact special angles
        let t = TrigTable::new(8);
        assert_eq!(t.cos(2), 0.0);
        assert_eq!(t.sin(4), 0.0);
        assert_eq!(t.cos(4), -1.0);
    }

    #[test]
    fn trig_bounds_enforced() {
        assert!(make_trig_pair(8, 4).is_err());
        assert!(make_trig_pair(8, 0).is_err());
        assert!(make_trig_pair(2, 1).is_err());
        assert!(make_trig_pair(9, 4).is_ok());
    }

    #[test]
    fn identity_examples() {
        let (cc, ss) = trig_identity_values(8, 3, 5);
        assert_eq!((cc, ss), (4.0, -4.0));
        let (cc, ss) = trig_identity_values(8, 4, 4);
        assert_eq!((cc, ss), (8.0, 0.0));
        let (cc, ss) = trig_identity_values(8, 1, 2);
        assert_eq!((cc, ss), (0.0, 0.0));
        // direct evaluation of the n = 8 examples
        let t = TrigTable::new(8);
        let sum = |f: &dyn Fn(usize) -> f64| (1..=8).map(f).sum::<f64>();
        assert!((sum(&|j| t.cos(3 * j % 8) * t.cos(5 * j % 8)) - 4.0).abs() < 1e-14);
        assert!((sum(&|j| t.sin(3 * j % 8) * t.sin(5 * j % 8)) + 4.0).abs() < 1e-14);
        assert!((sum(&|j| t.cos(4 * j % 8).powi(2)) - 8.0).abs() < 1e-14);
        assert!(sum(&|j| t.sin(4 * j % 8).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn structured_and_direct_identity_checks_agree() {
        for n in [3usize, 8, 15, 64, 127] {
            let tol = n as f64 * 2f64.powi(-46);
            let a = verify_trig_identities(n, tol).unwrap();
            let b = verify_trig_identities_direct(n, tol).unwrap();
            assert!(a.passed && b.passed, "n={n}: {a:?} {b:?}");
            assert!(a.worst < 1e-12 && b.worst < 1e-12);
        }
    }

    #[test]
    fn range_reduction_equals_pairwise_max() {
        for n in [3usize, 5, 12, 33, 100, 257] {
            let ps = trig_power_sums(&TrigTable::new(n));
            let nf = n as f64;
            let ec: Vec<f64> = ps.cos.iter().enumerate().map(|(m, c)| if m == 0 { c - nf } else { *c }).collect();
            let (mut cc, mut ss, mut cs) = (0.0f64, 0.0f64, 0.0f64);
            for k1 in 1..=n {
                for k2 in k1..=n {
                    let (d, t) = (k2 - k1, (k1 + k2) % n);
                    cc = cc.max((0.5 * (ec[d] + ec[t])).abs());
                    ss = ss.max((0.5 * (ec[d] - ec[t])).abs());
                    cs = cs.max((0.5 * (ps.sin[t] + ps.sin[d])).abs()).max((0.5 * (ps.sin[t] - ps.sin[d])).abs());
                }
            }
            let got = verify_trig_identities(n, 1.0).unwrap();
            assert_eq!((got.cos_cos, got.sin_sin, got.cos_sin), (cc, ss, cs), "n={n}");
        }
    }

    #[test]
    fn grouped_power_sums_match_direct() {
        for n in [5usize, 12, 64, 360, 1000] {
            let t = TrigTable::new(n);
            let g = trig_power_sums(&t);
            let d = trig_power_sums_direct(&t);
            for m in 0..n {
                assert!((g.cos[m] - d.cos[m]).abs() < 1e-12, "n={n} m={m}");
                assert!((g.sin[m] - d.sin[m]).abs() < 1e-12);
            }
            assert_eq!(g.cos[0], n as f64);
        }
    }

    #[test]
    fn trig_conditions_examples() {
        let w = make_trig_pair(8, 3).unwrap();
        let rep = check_conditions(&w, 1.0).unwrap();
        assert!(rep.eps_orth_u < 1e-14);
        assert!(rep.eps_orth_v.unwrap() < 1e-14);
        assert!(rep.eps_cross.unwrap() < 1e-14);
        assert!((rep.eps_entry_u - 0.5).abs() < 1e-15);
        assert!((rep.log_scale - 4f64.ln().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn structured_and_dense_checks_agree() {
        for (n, r) in [(9usize, 4usize), (64, 31), (101, 50), (256, 100)] {
            let w = make_trig_pair(n, r).unwrap();
            let a = check_conditions(&w, 0.5).unwrap();
            let b = check_conditions_dense(&w, 0.5).unwrap();
            assert_eq!(a.eps_entry_u, b.eps_entry_u);
            assert_eq!(a.eps_entry_v, b.eps_entry_v);
            assert!((a.eps_orth_u - b.eps_orth_u).abs() < 1e-13);
            assert!((a.eps_orth_v.unwrap() - b.eps_orth_v.unwrap()).abs() < 1e-13);
            assert!((a.eps_cross.unwrap() - b.eps_cross.unwrap()).abs() < 1e-13);
            assert!(a.max_orth() <= n as f64 * 2f64.powi(-46));
        }
    }

    #[test]
    fn entry_bounds_for_trig() {
        for n in [7usize, 8, 1023, 1024] {
            let rep = check_conditions(&make_trig_pair(n, max_trig_rows(n)).unwrap(), 1.0).unwrap();
            let bound = (2.0 / n as f64).sqrt();
            assert!((rep.eps_entry_u - bound).abs() < 1e-15);
            assert!(rep.eps_entry_v.unwrap() <= bound + 1e-15);
        }
    }

    #[test]
    fn entry_scale_bounded_along_schedule() {
        // eps_entry·(log(1+r))^{1+δ} stays bounded for δ = 1
        let mut prev = f64::INFINITY;
        for p in 10..=16 {
            let n = 1usize << p;
            let w = make_trig_pair(n, max_trig_rows(n)).unwrap();
            let rep = check_conditions(&w, 1.0).unwrap();
            let c = rep.eps_entry_u * rep.log_scale;
            assert!(c < 5.0 && c < prev, "n={n}: {c}");
            prev = c;
        }
    }

    #[test]
    fn unit_row_custom() {
        let mut u = vec![0.0; 5];
        u[0] = 1.0;
        let w = WeightMatrixPair::custom(1, 5, u, None).unwrap();
        let rep = check_conditions(&w, 1.0).unwrap();
        assert_eq!(rep.eps_entry_u, 1.0);
        assert_eq!(rep.eps_orth_u, 0.0);
        assert!(rep.eps_cross.is_none() && rep.eps_orth_v.is_none());
    }

    #[test]
    fn custom_rejects_bad_input() {
        assert!(WeightMatrixPair::custom(2, 2, vec![1.0; 3], None).is_err());
        assert!(WeightMatrixPair::custom(1, 2, vec![1.0, f64::NAN], None).is_err());
        assert!(check_conditions(&make_trig_pair(8, 3).unwrap(), 0.0).is_err());
    }

    #[test]
    fn haar_n1_is_sign() {
        let mut seen = [0usize; 2];
        for s in 0..200 {
            let spec = SourceSpec::new(SourceFamily::StandardNormal, s, 0).unwrap();
            let w = sample_haar_orthogonal(1, &spec).unwrap();
            let x = w.u(0, 0);
            assert!(x == 1.0 || x == -1.0);
            seen[usize::from(x > 0.0)] += 1;
        }
        assert!(seen[0] > 60 && seen[1] > 60, "{seen:?}");
    }

    #[test]
    fn haar_is_orthogonal() {
        for n in [2usize, 5, 33, 128] {
            let spec = SourceSpec::new(SourceFamily::Rademacher, 11, n as u64).unwrap();
            let w = sample_haar_orthogonal(n, &spec).unwrap();
            let rep = check_conditions(&w, 1.0).unwrap();
            assert!(rep.eps_orth_u <= 1e-10, "n={n}: {}", rep.eps_orth_u);
        }
    }

    #[test]
    fn haar_marginal_moments() {
        // first entry of a uniform unit vector in R^16: mean 0, variance 1/16
        let n = 16;
        let m = 10_000;
        let xs: Vec<f64> = (0..m)
            .map(|s| {
                let spec = SourceSpec::new(SourceFamily::StandardNormal, 5, s).unwrap();
                sample_haar_orthogonal(n, &spec).unwrap().u(0, 0)
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let target = 1.0 / n as f64;
        // E x⁴ = 3/(n(n+2)) for a uniform unit vector
        let fourth = 3.0 / (n * (n + 2)) as f64;
        let se_mean = (target / m as f64).sqrt();
        let se_var = ((fourth - target * target) / m as f64).sqrt();
        assert!(mean.abs() < 5.0 * se_mean, "mean {mean}");
        assert!((var - target).abs() < 5.0 * se_var, "var {var}");
    }

    #[test]
    fn haar_max_entry_calibrated() {
        // calibrated threshold: 2.2·√(log n / n); see pre-build simulation
        let n = 256;
        let bound = 2.2 * ((n as f64).ln() / n as f64).sqrt();
        let hits = (0..200)
            .filter(|&s| {
                let spec = SourceSpec::new(SourceFamily::StandardNormal, 77, s).unwrap();
                let w = sample_haar_orthogonal(n, &spec).unwrap();
                check_conditions(&w, 1.0).unwrap().eps_entry_u <= bound
            })
            .count();
        assert!(hits >= 190, "{hits}/200 draws within {bound}");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let w = make_trig_pair(9, 4).unwrap();
        let (pu, pv) = (dir.path().join("u.csv"), dir.path().join("v.csv"));
        w.write_csv(&pu, Some(&pv)).unwrap();
        let back = WeightMatrixPair::from_csv(&pu, Some(&pv)).unwrap();
        assert_eq!((back.r(), back.n(), back.kind()), (4, 9, WeightKind::Custom));
        for k in 0..4 {
            for j in 0..9 {
                assert_eq!(back.u(k, j), w.u(k, j));
                assert_eq!(back.v(k, j), w.v(k, j));
            }
        }
    }
}
