//! Independent standardized input streams with counter-based sampling.
//!
//! `X_j` is a pure function of `(master_seed, stream_id, j)`: the ChaCha8
//! keystream keyed by `master_seed` on stream `stream_id` is cut into
//! fixed four-word blocks and block `j - 1` is mapped through the family's
//! transformation. Reading `X_1..X_n` sequentially therefore yields exactly
//! the values obtained by seeking to each index, and a prefix never depends
//! on how far the stream is read.

use std::f64::consts::{E, PI};
use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::KeyValues;
use crate::numeric::{adaptive_simpson, bisect_threshold};

/// 32-bit words of keystream reserved per index.
const WORDS_PER_INDEX: u128 = 4;

/// Bracket for the exponential-moment search.
pub const TAU_SEARCH_RANGE: (f64, f64) = (1e-3, 1e3);

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Distribution of each `X_j`.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceFamily {
    /// ±1 with probability 1/2.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    StandardizedUniform,
    /// Standardized Bernoulli(p): `√((1-p)/p)` w.p. `p`, `-√(p/(1-p))` w.p. `1-p`.
    StandardizedTwoPoint(f64),
    StandardNormal,
    /// `E - 1` with `E` standard exponential.
    StandardizedExponential,
    /// Index `j` uses `families[(j - 1) % len]`.
    Heterogeneous(Vec<SourceFamily>),
    /// Degenerate `X ≡ 0`. Not standardized; negative control only.
    Zero,
}

impl SourceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SourceFamily::Rademacher => "rademacher",
            SourceFamily::StandardizedUniform => "uniform",
            SourceFamily::StandardizedTwoPoint(_) => "two_point",
            SourceFamily::StandardNormal => "normal",
            SourceFamily::StandardizedExponential => "exponential",
            SourceFamily::Heterogeneous(_) => "heterogeneous",
            SourceFamily::Zero => "zero",
        }
    }

    /// Parameter string as used in config blocks (`None` for parameterless families).
    pub fn params(&self) -> Option<String> {
        match self {
            SourceFamily::StandardizedTwoPoint(p) => Some(format!("{p}")),
            SourceFamily::Heterogeneous(list) => Some(list.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")),
            _ => None,
        }
    }

    /// Build a family from its config name and optional parameter string.
    pub fn from_parts(name: &str, params: Option<&str>) -> Result<Self> {
        let name = name.trim().to_ascii_lowercase();
        let no_params = |fam: SourceFamily| match params {
            Some(p) if !p.trim().is_empty() => Err(Error::InvalidFamily(format!("family `{name}` takes no params (got `{p}`)"))),
            _ => Ok(fam),
        };
        let fam = match name.as_str() {
            "rademacher" => no_params(SourceFamily::Rademacher)?,
            "uniform" => no_params(SourceFamily::StandardizedUniform)?,
            "normal" | "gaussian" => no_params(SourceFamily::StandardNormal)?,
            "exponential" => no_params(SourceFamily::StandardizedExponential)?,
            "zero" => no_params(SourceFamily::Zero)?,
            "two_point" => {
                let p = params.ok_or_else(|| Error::InvalidFamily("two_point requires params = p".into()))?;
                let p: f64 = p.trim().parse().map_err(|_| Error::InvalidFamily(format!("two_point: cannot parse p = `{p}`")))?;
                SourceFamily::StandardizedTwoPoint(p)
            }
            "heterogeneous" => {
                let list = params.ok_or_else(|| Error::InvalidFamily("heterogeneous requires params = comma-separated families".into()))?;
                let members = list
                    .split(',')
                    .map(|item| {
                        let item = item.trim();
                        match item.split_once(':') {
                            Some((n, p)) => SourceFamily::from_parts(n, Some(p)),
                            None => SourceFamily::from_parts(item, None),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                SourceFamily::Heterogeneous(members)
            }
            other => return Err(Error::InvalidFamily(format!("unknown family `{other}`"))),
        };
        fam.validate()?;
        Ok(fam)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SourceFamily::StandardizedTwoPoint(p) => {
                if !(p.is_finite() && *p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidFamily(format!("two_point requires 0 < p < 1, got {p}")));
                }
            }
            SourceFamily::Heterogeneous(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidFamily("heterogeneous family list is empty".into()));
                }
                for f in list {
                    if matches!(f, SourceFamily::Heterogeneous(_)) {
                        return Err(Error::InvalidFamily("heterogeneous families cannot be nested".into()));
                    }
                    f.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    #[inline]
    fn member(&self, j: u64) -> &SourceFamily {
        match self {
            SourceFamily::Heterogeneous(list) => &list[((j - 1) % list.len() as u64) as usize],
            other => other,
        }
    }

    /// Map one four-word block to a draw. Never called on `Heterogeneous`.
    #[inline]
    fn transform(&self, a: u64, b: u64) -> f64 {
        match self {
            SourceFamily::Rademacher => {
                if a >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            SourceFamily::StandardizedUniform => SQRT3 * (2.0 * unit_closed_open(a) - 1.0),
            SourceFamily::StandardizedTwoPoint(p) => {
                if unit_closed_open(a) < *p {
                    ((1.0 - p) / p).sqrt()
                } else {
                    -(p / (1.0 - p)).sqrt()
                }
            }
            SourceFamily::StandardNormal => {
                let u1 = unit_open(a);
                let u2 = unit_open(b);
                (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            }
            SourceFamily::StandardizedExponential => -unit_open(a).ln() - 1.0,
            SourceFamily::Zero => 0.0,
            SourceFamily::Heterogeneous(_) => unreachable!("heterogeneous family resolved per index"),
        }
    }

    fn variance(&self) -> f64 {
        match self {
            SourceFamily::Zero => 0.0,
            SourceFamily::Heterogeneous(list) => list.iter().map(|f| f.variance()).fold(f64::NAN, f64::max),
            _ => 1.0,
        }
    }

    /// Closed-form `E|X|³`.
    pub fn third_abs_moment(&self) -> f64 {
        match self {
            SourceFamily::Rademacher => 1.0,
            SourceFamily::StandardizedUniform => 3.0 * SQRT3 / 4.0,
            SourceFamily::StandardizedTwoPoint(p) => {
                let q = 1.0 - p;
                (q * q + p * p) / (p * q).sqrt()
            }
            SourceFamily::StandardNormal => 2.0 * (2.0 / PI).sqrt(),
            SourceFamily::StandardizedExponential => 12.0 / E - 2.0,
            SourceFamily::Zero => 0.0,
            SourceFamily::Heterogeneous(list) => list.iter().map(|f| f.third_abs_moment()).fold(0.0, f64::max),
        }
    }

    /// `E(|X|³ exp(|X|/τ))`, `+∞` when it diverges.
    pub fn sakhanenko_functional(&self, tau: f64) -> f64 {
        let inv = 1.0 / tau;
        match self {
            SourceFamily::Rademacher => inv.exp(),
            SourceFamily::StandardizedTwoPoint(p) => {
                let a = ((1.0 - p) / p).sqrt();
                let b = (p / (1.0 - p)).sqrt();
                p * a.powi(3) * (a * inv).exp() + (1.0 - p) * b.powi(3) * (b * inv).exp()
            }
            SourceFamily::StandardizedUniform => {
                let f = |x: f64| x.powi(3) * (x * inv).exp();
                adaptive_simpson(&f, 0.0, SQRT3, 1e-12) / SQRT3
            }
            SourceFamily::StandardNormal => {
                // integrand exp(x/τ - x²/2) peaks at x = 1/τ; integrate piecewise so the peak is resolved
                let f = |x: f64| x.powi(3) * (x * inv - 0.5 * x * x).exp();
                let upper = inv + 40.0;
                let pieces = (upper / 2.0).ceil() as usize;
                let width = upper / pieces as f64;
                let mut total = 0.0;
                for i in 0..pieces {
                    total += adaptive_simpson(&f, i as f64 * width, (i + 1) as f64 * width, 1e-13);
                    if !total.is_finite() {
                        return f64::INFINITY;
                    }
                }
                2.0 * total / (2.0 * PI).sqrt()
            }
            SourceFamily::StandardizedExponential => {
                if tau <= 1.0 {
                    return f64::INFINITY;
                }
                // |X| = 1 - E on E < 1 (y = 1 - E), and E - 1 on the tail (closed form)
                let f = |y: f64| y.powi(3) * (y * inv + y - 1.0).exp();
                let body = adaptive_simpson(&f, 0.0, 1.0, 1e-13);
                let tail = 6.0 / E / (1.0 - inv).powi(4);
                body + tail
            }
            SourceFamily::Zero => 0.0,
            SourceFamily::Heterogeneous(list) => list.iter().map(|f| f.sakhanenko_functional(tau)).fold(0.0, f64::max),
        }
    }

    /// Smallest `τ` in the search range with `E(|X|³ exp(|X|/τ)) ≤ τ`.
    pub fn exp_moment_tau(&self) -> Option<f64> {
        match self {
            // e^{1/τ} = τ  ⇔  w e^w = 1 with w = 1/τ, i.e. τ = 1/Ω
            SourceFamily::Rademacher => Some(1.0 / omega_constant()),
            _ => {
                let (lo, hi) = TAU_SEARCH_RANGE;
                bisect_threshold(|tau| self.sakhanenko_functional(tau) <= tau, lo, hi, 1e-12)
            }
        }
    }
}

impl fmt::Display for SourceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceFamily::StandardizedTwoPoint(p) => write!(f, "two_point:{p}"),
            SourceFamily::Heterogeneous(_) => write!(f, "heterogeneous[{}]", self.params().unwrap_or_default()),
            other => f.write_str(other.name()),
        }
    }
}

/// The omega constant `Ω`, the root of `w e^w = 1`.
pub fn omega_constant() -> f64 {
    let mut w: f64 = 0.5;
    for _ in 0..50 {
        let ew = w.exp();
        let step = (w * ew - 1.0) / (ew * (w + 1.0));
        w -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    w
}

#[inline]
fn unit_closed_open(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Closed-form moments of a source family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
    pub third_abs_moment: f64,
    pub exp_moment_tau: Option<f64>,
}

/// A reproducible stream of independent `X_1, X_2, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    family: SourceFamily,
    master_seed: u64,
    stream_id: u64,
}

impl SourceSpec {
    pub fn new(family: SourceFamily, master_seed: u64, stream_id: u64) -> Result<Self> {
        family.validate()?;
        Ok(Self { family, master_seed, stream_id })
    }

    pub fn family(&self) -> &SourceFamily {
        &self.family
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Same seed and stream, different family.
    pub fn with_family(&self, family: SourceFamily) -> Result<Self> {
        SourceSpec::new(family, self.master_seed, self.stream_id)
    }

    pub fn with_stream(&self, stream_id: u64) -> Self {
        Self { stream_id, ..self.clone() }
    }

    /// Stream for replica `index`: `(stream_id << 32) ^ index`.
    pub fn replica(&self, index: u64) -> Self {
        self.with_stream((self.stream_id << 32) ^ index)
    }

    fn keystream(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// `X_j` for `j ≥ 1`.
    pub fn sample(&self, j: u64) -> f64 {
        assert!(j >= 1, "source indices start at 1");
        let mut rng = self.keystream();
        rng.set_word_pos((j - 1) as u128 * WORDS_PER_INDEX);
        let a = rng.next_u64();
        let b = rng.next_u64();
        self.family.member(j).transform(a, b)
    }

    /// `X_1, ..., X_n`.
    pub fn fill(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.fill_from(1, &mut out);
        out
    }

    /// Writes `X_start, ..., X_{start + out.len() - 1}` into `out`.
    pub fn fill_from(&self, start: u64, out: &mut [f64]) {
        assert!(start >= 1, "source indices start at 1");
        if matches!(self.family, SourceFamily::Zero) {
            out.fill(0.0);
            return;
        }
        let mut rng = self.keystream();
        rng.set_word_pos((start - 1) as u128 * WORDS_PER_INDEX);
        for (offset, slot) in out.iter_mut().enumerate() {
            let a = rng.next_u64();
            let b = rng.next_u64();
            *slot = self.family.member(start + offset as u64).transform(a, b);
        }
    }

    pub fn moment_report(&self) -> MomentReport {
        MomentReport {
            mean: 0.0,
            variance: self.family.variance(),
            third_abs_moment: self.family.third_abs_moment(),
            exp_moment_tau: self.family.exp_moment_tau(),
        }
    }

    /// Render as a config block (`family`, `params`, `master_seed`, `stream_id`).
    pub fn to_config_block(&self) -> String {
        let mut s = format!("family = {}\n", self.family.name());
        if let Some(p) = self.family.params() {
            s.push_str(&format!("params = {p}\n"));
        }
        s.push_str(&format!("master_seed = {}\nstream_id = {}\n", self.master_seed, self.stream_id));
        s
    }

    /// Parse a config block. Unknown keys are rejected.
    pub fn from_config_block(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        for key in kv.keys() {
            if !SOURCE_KEYS.contains(&key) {
                return Err(kv.error_at(key, format!("unknown key `{key}` in source block")));
            }
        }
        Self::from_key_values(&kv)
    }

    /// Build from the source keys of a key/value set (other keys are ignored).
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let name = kv.value("family").ok_or_else(|| Error::ConfigGeneral("missing key `family`".into()))?;
        let family = SourceFamily::from_parts(name, kv.value("params")).map_err(|e| kv.error_at("family", e.to_string()))?;
        let master_seed = kv.parse_value::<u64>("master_seed")?.unwrap_or(0);
        let stream_id = kv.parse_value::<u64>("stream_id")?.unwrap_or(0);
        SourceSpec::new(family, master_seed, stream_id)
    }
}

pub const SOURCE_KEYS: [&str; 4] = ["family", "params", "master_seed", "stream_id"];

/// JSON form of a [`SourceSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub params: Option<String>,
    pub master_seed: u64,
    pub stream_id: u64,
}

impl From<&SourceSpec> for SourceRecord {
    fn from(s: &SourceSpec) -> Self {
        SourceRecord {
            family: s.family.name().to_string(),
            params: s.family.params(),
            master_seed: s.master_seed,
            stream_id: s.stream_id,
        }
    }
}

impl TryFrom<&SourceRecord> for SourceSpec {
    type Error = Error;

    fn try_from(r: &SourceRecord) -> Result<Self> {
        SourceSpec::new(SourceFamily::from_parts(&r.family, r.params.as_deref())?, r.master_seed, r.stream_id)
    }
}
