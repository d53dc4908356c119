//! Monte Carlo harnesses: single-path trajectories, characteristic-function
//! variance decay, CLT fluctuations of the empirical CDF, and LDP rates.
//!
//! Replica `i` always reads the stream `spec.replica(i)`. Replicas run on the
//! ambient rayon pool, are collected in index order and reduced sequentially,
//! so results do not depend on the thread count.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::{empirical_char, joint_cdf, normal_cdf, rate_function_gaussian, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::numeric::{digest_f64, NeumaierSum};
use crate::sources::{SourceFamily, SourceRecord, SourceSpec};
use crate::spectra::{periodogram_ecdf_distance, reverse_circulant_spectrum, symmetric_circulant_spectrum, Ensemble, Spectrum};
use crate::transform::{partial_sums, FastTrig, PartialSums, SumPath};
use crate::weights::{check_conditions, make_trig_pair, max_trig_rows, sample_haar_orthogonal, WeightKind, WeightMatrixPair};

pub const SCHEMA_VERSION: u32 = 1;

/// Grid used by the bivariate harness: `{-2, -1.5, ..., 2}²`.
pub const BIVARIATE_GRID: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

/// Minimum replica count for the variance and fluctuation harnesses.
pub const MIN_REPLICAS: usize = 100;

/// Stream offset for Haar matrices drawn inside a trajectory.
const HAAR_STREAM_TAG: u64 = 0x4841_4152 << 32;

/// `(n, r)` points, strictly increasing in `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    entries: Vec<(usize, usize)>,
}

impl Schedule {
    pub fn new(entries: Vec<(usize, usize)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSchedule("schedule is empty".into()));
        }
        for &(n, r) in &entries {
            if r < 1 || r > n {
                return Err(Error::InvalidSchedule(format!("need 1 <= r <= n, got n = {n}, r = {r}")));
            }
        }
        if let Some(w) = entries.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidSchedule(format!("n must increase strictly, got {} then {}", w[0].0, w[1].0)));
        }
        Ok(Self { entries })
    }

    pub fn single(n: usize, r: usize) -> Result<Self> {
        Self::new(vec![(n, r)])
    }

    /// `r = ⌊(n-1)/2⌋` at every `n`.
    pub fn full_trig(ns: &[usize]) -> Result<Self> {
        Self::new(ns.iter().map(|&n| (n, max_trig_rows(n))).collect())
    }

    /// Parse `n:r,n:r,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (n, r) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidSchedule(format!("schedule entry `{item}` is not of the form n:r")))?;
            let parse = |s: &str| {
                s.trim().parse::<usize>().map_err(|_| Error::InvalidSchedule(format!("bad integer `{s}` in schedule entry `{item}`")))
            };
            entries.push((parse(n)?, parse(r)?));
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn max_n(&self) -> usize {
        self.entries.last().unwrap().0
    }

    /// Checks the weight-kind bound on `r`.
    pub fn validate_for(&self, kind: WeightKind) -> Result<()> {
        if kind == WeightKind::Trig {
            for &(n, r) in &self.entries {
                if n < 3 || r > max_trig_rows(n) {
                    return Err(Error::InvalidSchedule(format!(
                        "trig weights need r <= floor((n-1)/2) = {}, got n = {n}, r = {r}",
                        max_trig_rows(n)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn growth(&self) -> GrowthDiagnostics {
        validate_growth(self)
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(n, r)| format!("{n}:{r}")).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEntry {
    pub n: usize,
    pub r: usize,
    /// `r³ (ln n)² / n`
    pub r_cubed_log_sq_over_n: f64,
    /// `r⁴ / n`
    pub r4_over_n: f64,
    /// `ln n / r`
    pub log_n_over_r: f64,
}

impl GrowthEntry {
    pub fn new(n: usize, r: usize) -> Self {
        let (nf, rf) = (n as f64, r as f64);
        let ln = nf.ln();
        GrowthEntry { n, r, r_cubed_log_sq_over_n: rf.powi(3) * ln * ln / nf, r4_over_n: rf.powi(4) / nf, log_n_over_r: ln / rf }
    }
}

/// Growth functionals along a schedule. Advisory only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthDiagnostics {
    pub entries: Vec<GrowthEntry>,
    pub r_cubed_log_sq_over_n_decreasing: bool,
    pub r4_over_n_decreasing: bool,
    pub log_n_over_r_decreasing: bool,
    /// The fluctuation CLT condition trends to zero along the schedule.
    pub clt_condition_vanishing: bool,
    /// Both LDP conditions trend to zero along the schedule.
    pub ldp_conditions_vanishing: bool,
}

fn strictly_decreasing(values: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.collect();
    v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0])
}

/// Per-entry growth functionals and whether each decreases strictly along the schedule.
/// A single-point schedule shows no trend, so every flag is false.
pub fn validate_growth(schedule: &Schedule) -> GrowthDiagnostics {
    let entries: Vec<GrowthEntry> = schedule.entries.iter().map(|&(n, r)| GrowthEntry::new(n, r)).collect();
    let a = strictly_decreasing(entries.iter().map(|e| e.r_cubed_log_sq_over_n));
    let b = strictly_decreasing(entries.iter().map(|e| e.r4_over_n));
    let c = strictly_decreasing(entries.iter().map(|e| e.log_n_over_r));
    GrowthDiagnostics {
        entries,
        r_cubed_log_sq_over_n_decreasing: a,
        r4_over_n_decreasing: b,
        log_n_over_r_decreasing: c,
        clt_condition_vanishing: a,
        ldp_conditions_vanishing: b && c,
    }
}

/// Statistics recorded at one schedule point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub n: usize,
    pub r: usize,
    pub stats: BTreeMap<String, f64>,
    /// Digest of the inputs `X_1..X_n` used at this point (single-path harnesses).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_digest: Option<String>,
    /// Digest of `X_1..X_{n'}` for the previous point's `n'`, recomputed from this point's inputs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prefix_digest: Option<String>,
}

impl PointRecord {
    fn new(n: usize, r: usize) -> Self {
        PointRecord { n, r, stats: BTreeMap::new(), input_digest: None, prefix_digest: None }
    }

    fn put(&mut self, key: &str, value: f64) {
        self.stats.insert(key.to_string(), value);
    }

    pub fn stat(&self, key: &str) -> Option<f64> {
        self.stats.get(key).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Unix seconds at completion.
    pub timestamp: u64,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub experiment: String,
    pub source: SourceRecord,
    pub weights: WeightKind,
    pub schedule: Vec<(usize, usize)>,
    pub replicas: usize,
    pub seeds: Vec<u64>,
    pub parameters: BTreeMap<String, f64>,
    pub points: Vec<PointRecord>,
    pub summary: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub growth: GrowthDiagnostics,
    pub notes: Vec<String>,
    pub timing: Timing,
}

impl ExperimentResult {
    fn start(experiment: &str, spec: &SourceSpec, weights: WeightKind, schedule: &Schedule, replicas: usize) -> Self {
        ExperimentResult {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            source: SourceRecord::from(spec),
            weights,
            schedule: schedule.entries.clone(),
            replicas,
            seeds: vec![spec.master_seed()],
            parameters: BTreeMap::new(),
            points: Vec::new(),
            summary: BTreeMap::new(),
            flags: BTreeMap::new(),
            growth: validate_growth(schedule),
            notes: Vec::new(),
            timing: Timing { timestamp: 0, wall_clock_seconds: 0.0 },
        }
    }

    fn finish(mut self, started: Instant) -> Result<Self> {
        self.timing = Timing {
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        };
        let all = self.points.iter().flat_map(|p| p.stats.values()).chain(self.summary.values()).chain(self.parameters.values());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("{} produced a non-finite statistic", self.experiment)));
        }
        Ok(self)
    }

    /// Statistic `key` at every point, in schedule order.
    pub fn series(&self, key: &str) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.stat(key)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the `timing` object removed; equal across reruns with the same inputs.
    pub fn to_reproducible_json(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timing");
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }

    /// One row per point, header `n,r,<stat keys>`; floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut keys: Vec<&String> = self.points.iter().flat_map(|p| p.stats.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut out = String::from("n,r");
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!("{},{}", p.n, p.r));
            for k in &keys {
                out.push(',');
                if let Some(v) = p.stats.get(*k) {
                    out.push_str(&format!("{v:.16e}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Writes `{experiment}-{seed}-{timestamp}.json` and `.csv` into `dir`; returns both paths.
    pub fn write_artifacts(&self, dir: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let stem = format!("{}-{}-{}", self.experiment, self.source.master_seed, self.timing.timestamp);
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, self.to_json()? + "\n")?;
        std::fs::write(&csv, self.to_csv())?;
        Ok((json, csv))
    }
}

/// Trig weights plus a prebuilt FFT plan for one `(n, r)`.
struct TrigEngine {
    pair: WeightMatrixPair,
    fast: FastTrig,
    path: SumPath,
}

impl TrigEngine {
    fn new(n: usize, r: usize, path: SumPath) -> Result<Self> {
        Ok(TrigEngine { pair: make_trig_pair(n, r)?, fast: FastTrig::new(n), path })
    }

    fn sums(&self, x: &[f64]) -> Result<PartialSums> {
        partial_sums(&self.pair, x, self.path, Some(&self.fast))
    }
}

fn require_replicas(replicas: usize) -> Result<()> {
    if replicas < MIN_REPLICAS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_REPLICAS} replicas, got {replicas}")));
    }
    Ok(())
}

/// Stream of the Haar matrix used at size `n` in a trajectory.
pub fn haar_stream(spec: &SourceSpec, n: usize) -> SourceSpec {
    SourceSpec::new(SourceFamily::StandardNormal, spec.master_seed(), spec.stream_id() ^ HAAR_STREAM_TAG ^ n as u64)
        .expect("standard normal is always valid")
}

/// Evaluates `f(i)` for `i = 0..replicas` in parallel and returns the results in index order.
fn replica_map<T, F>(replicas: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..replicas as u64).into_par_iter().map(f).collect()
}

/// Sample mean and unbiased variance with compensated sums.
fn mean_var(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().copied().collect::<NeumaierSum>().value() / m;
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).collect::<NeumaierSum>().value();
    (mean, if v.len() > 1 { ss / (m - 1.0) } else { 0.0 })
}

/// One fixed stream `X_1, X_2, ...`; at each `(n, r)` the prefix `X_1..X_n` is
/// summed and `KS(μ_n, Φ)` recorded, where `μ_n` is uniform on `S_{n,1..r}`.
///
/// Trig weights use the same prefix at every point. Haar weights draw one
/// matrix per `n` from [`haar_stream`] and keep its first `r` rows.
pub fn asclt_trajectory(spec: &SourceSpec, schedule: &Schedule, kind: WeightKind, path: SumPath) -> Result<ExperimentResult> {
    let started = Instant::now();
    if kind == WeightKind::Custom {
        return Err(Error::InvalidWeights("trajectories support trig and haar weights".into()));
    }
    schedule.validate_for(kind)?;
    let mut res = ExperimentResult::start("asclt", spec, kind, schedule, 1);
    let x = spec.fill(schedule.max_n());
    let mut prev_n = None;
    for &(n, r) in &schedule.entries {
        let prefix = &x[..n];
        let sums = match kind {
            WeightKind::Trig => TrigEngine::new(n, r, path)?.sums(prefix)?,
            _ => {
                let w = sample_haar_orthogonal(n, &haar_stream(spec, n))?.truncate_rows(r)?;
                partial_sums(&w, prefix, path, None)?
            }
        };
        let mu = EmpiricalMeasure::new(sums.s)?;
        let mut p = PointRecord::new(n, r);
        p.put("ks", mu.ks_to(normal_cdf));
        p.put("mean", mu.mean());
        p.input_digest = Some(digest_f64(prefix));
        p.prefix_digest = prev_n.map(|m: usize| digest_f64(&prefix[..m]));
        prev_n = Some(n);
        res.points.push(p);
    }
    res.summary.insert("final_ks".into(), *res.series("ks").last().unwrap());
    res.finish(started)
}

/// [`asclt_trajectory`] over master seeds `seed, seed + 1, ...`, reporting the median KS per point.
pub fn asclt_seed_ensemble(spec: &SourceSpec, schedule: &Schedule, seeds: usize, path: SumPath) -> Result<ExperimentResult> {
    let started = Instant::now();
    if seeds == 0 {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    schedule.validate_for(WeightKind::Trig)?;
    let base = spec.master_seed();
    let runs = replica_map(seeds, |i| {
        let s = SourceSpec::new(spec.family().clone(), base.wrapping_add(i), spec.stream_id())?;
        Ok(asclt_trajectory(&s, schedule, WeightKind::Trig, path)?.series("ks"))
    })?;
    let mut res = ExperimentResult::start("asclt-ensemble", spec, WeightKind::Trig, schedule, seeds);
    res.seeds = (0..seeds as u64).map(|i| base.wrapping_add(i)).collect();
    for (idx, &(n, r)) in schedule.entries.iter().enumerate() {
        let mut ks: Vec<f64> = runs.iter().map(|run| run[idx]).collect();
        ks.sort_by(f64::total_cmp);
        let mut p = PointRecord::new(n, r);
        p.put("median_ks", median_sorted(&ks));
        p.put("max_ks", ks[ks.len() - 1]);
        res.points.push(p);
    }
    let med = res.series("median_ks");
    res.flags.insert("median_strictly_decreasing".into(), med.windows(2).all(|w| w[1] < w[0]));
    res.finish(started)
}

fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Single-path bivariate check: `max_{(x,y) ∈ grid} |F_n(x, y) - Φ(x)Φ(y)|`
/// for the joint empirical CDF of `(S_{n,k}, T_{n,k})`.
pub fn asclt_bivariate(spec: &SourceSpec, schedule: &Schedule, path: SumPath) -> Result<ExperimentResult> {
    let started = Instant::now();
    schedule.validate_for(WeightKind::Trig)?;
    let mut res = ExperimentResult::start("bivariate", spec, WeightKind::Trig, schedule, 1);
    let x = spec.fill(schedule.max_n());
    for &(n, r) in &schedule.entries {
        let pairs = TrigEngine::new(n, r, path)?.sums(&x[..n])?.pairs();
        let mut worst: f64 = 0.0;
        for &gx in &BIVARIATE_GRID {
            for &gy in &BIVARIATE_GRID {
                worst = worst.max((joint_cdf(&pairs, gx, gy) - normal_cdf(gx) * normal_cdf(gy)).abs());
            }
        }
        let mut p = PointRecord::new(n, r);
        p.put("grid_deviation", worst);
        p.put("joint_at_origin", joint_cdf(&pairs, 0.0, 0.0));
        p.input_digest = Some(digest_f64(&x[..n]));
        res.points.push(p);
    }
    res.summary.insert("max_grid_deviation".into(), res.series("grid_deviation").into_iter().fold(0.0, f64::max));
    res.finish(started)
}

/// Monte Carlo estimate of `E|Φ_n(s,t) - e^{-(s²+t²)/2}|²` over independent
/// streams, where `Φ_n(s,t) = (1/r) Σ_k exp(i(s S_{n,k} + t T_{n,k}))`.
///
/// Each point also reports the i.i.d. Gaussian value `(1 - e^{-(s²+t²)})/r`.
pub fn char_variance_decay(spec: &SourceSpec, schedule: &Schedule, s: f64, t: f64, replicas: usize, path: SumPath) -> Result<ExperimentResult> {
    let started = Instant::now();
    require_replicas(replicas)?;
    schedule.validate_for(WeightKind::Trig)?;
    let mut res = ExperimentResult::start("char-decay", spec, WeightKind::Trig, schedule, replicas);
    res.parameters.insert("s".into(), s);
    res.parameters.insert("t".into(), t);
    let target = (-(s * s + t * t) / 2.0).exp();
    for &(n, r) in &schedule.entries {
        let engine = TrigEngine::new(n, r, path)?;
        let d = replica_map(replicas, |i| {
            let x = spec.replica(i).fill(n);
            let phi = empirical_char(engine.sums(&x)?.pairs(), s, t);
            let (re, im) = (phi.re - target, phi.im);
            Ok(re * re + im * im)
        })?;
        let (mean, var) = mean_var(&d);
        let se = (var / replicas as f64).sqrt();
        let rf = r as f64;
        let mut p = PointRecord::new(n, r);
        p.put("estimate", mean);
        p.put("standard_error", se);
        p.put("ratio_to_inv_r", mean * rf);
        p.put("gaussian_target", (1.0 - (-(s * s + t * t)).exp()) / rf);
        res.points.push(p);
    }
    res.finish(started)
}

/// Distance from a lattice ECDF to `Φ` evaluated half a lattice step away from
/// each atom, i.e. with a continuity correction. `atoms` is sorted.
fn continuity_corrected_ks(atoms: &[f64], step: f64) -> f64 {
    let m = atoms.len() as f64;
    let mut worst = normal_cdf(atoms[0] - 0.5 * step);
    let mut i = 0;
    while i < atoms.len() {
        let mut j = i;
        while j + 1 < atoms.len() && atoms[j + 1] <= atoms[i] + 0.5 * step {
            j += 1;
        }
        let f = (j + 1) as f64 / m;
        worst = worst.max((f - normal_cdf(atoms[j] + 0.5 * step)).abs());
        i = j + 1;
    }
    worst
}

/// Fluctuations of the empirical CDF at `x`:
/// `W = (1/√r) Σ_k (1{S_{n,k} ≤ x} - Φ(x))` over independent streams.
///
/// Reports the sample mean and variance of `W` (limit `0`, `Φ(x)(1-Φ(x))`),
/// the exact KS distance of the standardized sample to `Φ`, and the same
/// distance with a continuity correction for the `1/√r` lattice.
pub fn clt_fluctuation(spec: &SourceSpec, n: usize, r: usize, x: f64, replicas: usize, path: SumPath) -> Result<ExperimentResult> {
    let started = Instant::now();
    require_replicas(replicas)?;
    let schedule = Schedule::single(n, r)?;
    schedule.validate_for(WeightKind::Trig)?;
    let mut res = ExperimentResult::start("clt-fluct", spec, WeightKind::Trig, &schedule, replicas);
    res.parameters.insert("x".into(), x);
    let engine = TrigEngine::new(n, r, path)?;
    let phi_x = normal_cdf(x);
    let rf = r as f64;
    let w = replica_map(replicas, |i| {
        let sums = engine.sums(&spec.replica(i).fill(n))?;
        let below = sums.s.iter().filter(|&&v| v <= x).count() as f64;
        Ok((below - rf * phi_x) / rf.sqrt())
    })?;
    let (mean, var) = mean_var(&w);
    let sd = var.sqrt();
    let standardized: Vec<f64> = w.iter().map(|v| if sd > 0.0 { (v - mean) / sd } else { v - mean }).collect();
    let z = EmpiricalMeasure::new(standardized)?;
    let step = if sd > 0.0 { 1.0 / (rf.sqrt() * sd) } else { 0.0 };
    let mut p = PointRecord::new(n, r);
    p.put("mean", mean);
    p.put("variance", var);
    p.put("standard_error_mean", sd / (replicas as f64).sqrt());
    p.put("target_variance", phi_x * (1.0 - phi_x));
    p.put("ks", z.ks_to(normal_cdf));
    p.put("ks_continuity_corrected", continuity_corrected_ks(z.values(), step));
    p.put("r_cubed_log_sq_over_n", GrowthEntry::new(n, r).r_cubed_log_sq_over_n);
    res.points.push(p);
    res.notes.push("W takes values on a lattice of spacing 1/sqrt(r); its exact KS distance to a continuous law is bounded below by half the largest atom".into());
    res.finish(started)
}

/// Hit counts of `{mean(μ_n) ≥ a}` over `replicas` streams of `spec`.
fn ldp_hits(spec: &SourceSpec, engine: &TrigEngine, a: f64, replicas: usize) -> Result<usize> {
    let n = engine.pair.n();
    let r = engine.pair.r() as f64;
    let hits = replica_map(replicas, |i| {
        let sums = engine.sums(&spec.replica(i).fill(n))?;
        let mean = sums.s.iter().copied().collect::<NeumaierSum>().value() / r;
        Ok(mean >= a)
    })?;
    Ok(hits.into_iter().filter(|&h| h).count())
}

/// `(p̂, ρ̂ = -(1/r) ln p̂, lower_bound)`; zero hits use `p̂ = 1/replicas` and flag `ρ̂` as a lower bound.
fn rate_from_hits(hits: usize, replicas: usize, r: usize) -> (f64, f64, bool) {
    let (p, lower) = if hits == 0 { (1.0 / replicas as f64, true) } else { (hits as f64 / replicas as f64, false) };
    (p, -p.ln() / r as f64, lower)
}

/// Documented band for the Gaussian-oracle rate at `a = 0.5`, `r = 32`.
pub const LDP_RATE_BAND: (f64, f64) = (0.08, 0.22);

/// Estimates `p̂ = Pr(mean of μ_n ≥ a)` and `ρ̂ = -(1/r) ln p̂` for `spec`, and
/// the same for Gaussian inputs on the same seed and replica streams.
/// The analytic target `a²/2` is the rate function at `N(a, 1)`.
pub fn ldp_rate(spec: &SourceSpec, n: usize, r: usize, a: f64, replicas: usize, path: SumPath) -> Result<ExperimentResult> {
    let started = Instant::now();
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!("need a > 0, got {a}")));
    }
    if replicas == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    let schedule = Schedule::single(n, r)?;
    schedule.validate_for(WeightKind::Trig)?;
    let mut res = ExperimentResult::start("ldp", spec, WeightKind::Trig, &schedule, replicas);
    res.parameters.insert("a".into(), a);
    let engine = TrigEngine::new(n, r, path)?;
    let gauss = spec.with_family(SourceFamily::StandardNormal)?;
    let hits = ldp_hits(spec, &engine, a, replicas)?;
    let g_hits = ldp_hits(&gauss, &engine, a, replicas)?;
    let (p, rho, lower) = rate_from_hits(hits, replicas, r);
    let (gp, grho, glower) = rate_from_hits(g_hits, replicas, r);
    let target = rate_function_gaussian(a, 1.0)?.value;
    let exact_gauss = -normal_cdf(-a * (r as f64).sqrt()).ln() / r as f64;
    let mut pt = PointRecord::new(n, r);
    pt.put("hits", hits as f64);
    pt.put("p_hat", p);
    pt.put("rate_estimate", rho);
    pt.put("gaussian_hits", g_hits as f64);
    pt.put("gaussian_p_hat", gp);
    pt.put("gaussian_rate_estimate", grho);
    pt.put("rate_ratio_to_gaussian", rho / grho);
    pt.put("gaussian_exact_rate", exact_gauss);
    res.points.push(pt);
    res.summary.insert("target_rate".into(), target);
    res.summary.insert("rate_estimate".into(), rho);
    res.summary.insert("gaussian_rate_estimate".into(), grho);
    res.summary.insert("band_low".into(), LDP_RATE_BAND.0);
    res.summary.insert("band_high".into(), LDP_RATE_BAND.1);
    res.flags.insert("rate_is_lower_bound".into(), lower);
    res.flags.insert("gaussian_rate_is_lower_bound".into(), glower);
    res.finish(started)
}

/// Conditions report for `w` as a one-point result.
pub fn weight_conditions(w: &WeightMatrixPair, delta: f64, spec: &SourceSpec) -> Result<ExperimentResult> {
    let started = Instant::now();
    let report = check_conditions(w, delta)?;
    let schedule = Schedule::single(w.n(), w.r())?;
    let mut res = ExperimentResult::start("check-weights", spec, w.kind(), &schedule, 1);
    res.parameters.insert("delta".into(), delta);
    let mut p = PointRecord::new(w.n(), w.r());
    p.put("eps_entry_u", report.eps_entry_u);
    p.put("eps_orth_u", report.eps_orth_u);
    p.put("log_scale", report.log_scale);
    for (key, v) in [("eps_entry_v", report.eps_entry_v), ("eps_orth_v", report.eps_orth_v), ("eps_cross", report.eps_cross)] {
        if let Some(v) = v {
            p.put(key, v);
        }
    }
    res.points.push(p);
    res.finish(started)
}

/// KS distance of the periodogram ECDF to `1 - e^{-x}` at each `n`; `r` is the ordinate count.
pub fn periodogram_run(spec: &SourceSpec, ns: &[usize]) -> Result<ExperimentResult> {
    let started = Instant::now();
    let schedule = Schedule::new(ns.iter().map(|&n| (n, max_trig_rows(n).max(1))).collect())?;
    let mut res = ExperimentResult::start("periodogram", spec, WeightKind::Trig, &schedule, 1);
    for &(n, r) in &schedule.entries {
        let mut p = PointRecord::new(n, r);
        p.put("ks_exponential", periodogram_ecdf_distance(n, spec)?);
        res.points.push(p);
    }
    res.finish(started)
}

/// Spectrum of one circulant-family matrix with its KS distance to the limit law.
pub fn spectrum_run(spec: &SourceSpec, n: usize, ensemble: Ensemble, standardize: (f64, f64)) -> Result<(ExperimentResult, Spectrum)> {
    let started = Instant::now();
    let spectrum = match ensemble {
        Ensemble::SymmetricCirculant => symmetric_circulant_spectrum(n, spec, standardize)?,
        Ensemble::ReverseCirculant => reverse_circulant_spectrum(n, spec)?,
        other => return Err(Error::InvalidParameter(format!("no spectrum harness for {other:?}"))),
    };
    let schedule = Schedule::single(n, spectrum.eigenvalues.len())?;
    let mut res = ExperimentResult::start("spectrum", spec, WeightKind::Trig, &schedule, 1);
    if ensemble == Ensemble::SymmetricCirculant {
        res.parameters.insert("m".into(), standardize.0);
        res.parameters.insert("sigma".into(), standardize.1);
    }
    let mut p = PointRecord::new(n, spectrum.eigenvalues.len());
    p.put("ks_to_limit", spectrum.ks_to_limit()?);
    p.put("normalization", spectrum.normalization);
    p.put("imag_residual", spectrum.imag_residual);
    for (i, v) in spectrum.exceptional.iter().enumerate() {
        p.put(&format!("exceptional_{i}"), *v);
    }
    res.points.push(p);
    res.notes.push(format!("ensemble: {}", serde_json::to_value(ensemble)?.as_str().unwrap_or_default()));
    Ok((res.finish(started)?, spectrum))
}
