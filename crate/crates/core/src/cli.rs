//! Command-line front end.
//!
//! Every subcommand accepts a `key = value` config file (`--config`) and
//! flags; flags override file values. Keys not used by the subcommand are
//! rejected with the line they appear on.
//!
//! Exit codes: 0 success, 2 config or usage error, 3 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    asclt_bivariate, asclt_seed_ensemble, asclt_trajectory, char_variance_decay, clt_fluctuation, ldp_rate, periodogram_run, spectrum_run,
    weight_conditions, ExperimentResult, Schedule,
};
use crate::kv::{normalize_key, KeyValues};
use crate::sources::{SourceFamily, SourceSpec, SOURCE_KEYS};
use crate::spectra::Ensemble;
use crate::transform::{SumPath, DEFAULT_FAST_THRESHOLD};
use crate::weights::{make_trig_pair, max_trig_rows, sample_haar_orthogonal, WeightKind, WeightMatrixPair};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "asclt", version, about = "Almost-sure CLT experiments for weighted sums, periodograms and circulant spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the almost-orthogonality residuals of a weight pair
    CheckWeights(Flags),
    /// Single-path KS distance of the partial-sum ECDF to the normal law
    Asclt(Flags),
    /// Joint ECDF of (S, T) against the product normal law on a 9x9 grid
    Bivariate(Flags),
    /// Variance of the empirical characteristic function
    CharDecay(Flags),
    /// Fluctuations of the empirical CDF at a point
    CltFluct(Flags),
    /// Large-deviation rate of the mean of the partial-sum ECDF
    Ldp(Flags),
    /// KS distance of the periodogram ECDF to the exponential law
    Periodogram(Flags),
    /// Circulant-family spectrum
    Spectrum(Flags),
    /// Write a weight pair to CSV
    GenWeights(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckWeights(_) => "check-weights",
            Command::Asclt(_) => "asclt",
            Command::Bivariate(_) => "bivariate",
            Command::CharDecay(_) => "char-decay",
            Command::CltFluct(_) => "clt-fluct",
            Command::Ldp(_) => "ldp",
            Command::Periodogram(_) => "periodogram",
            Command::Spectrum(_) => "spectrum",
            Command::GenWeights(_) => "gen-weights",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::CheckWeights(f)
            | Command::Asclt(f)
            | Command::Bivariate(f)
            | Command::CharDecay(f)
            | Command::CltFluct(f)
            | Command::Ldp(f)
            | Command::Periodogram(f)
            | Command::Spectrum(f)
            | Command::GenWeights(f) => f,
        }
    }

    /// Config keys this subcommand understands, beyond `out`, `threads` and `fast_threshold`.
    fn keys(&self) -> &'static [&'static str] {
        const SRC: [&str; 4] = SOURCE_KEYS;
        match self {
            Command::CheckWeights(_) => &["kind", "n", "r", "delta", "u_path", "v_path", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::Asclt(_) => &["kind", "schedule", "n", "r", "seeds", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::Bivariate(_) => &["schedule", "n", "r", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::CharDecay(_) => &["schedule", "n", "r", "s", "t", "replicas", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::CltFluct(_) => &["n", "r", "x", "replicas", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::Ldp(_) => &["n", "r", "a", "replicas", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::Periodogram(_) => &["n", "schedule", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::Spectrum(_) => &["n", "ensemble", "m", "sigma", SRC[0], SRC[1], SRC[2], SRC[3]],
            Command::GenWeights(_) => &["kind", "n", "r", SRC[0], SRC[1], SRC[2], SRC[3]],
        }
    }
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// key = value config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source family: rademacher, uniform, two_point, normal, exponential, heterogeneous, zero
    #[arg(long)]
    family: Option<String>,
    /// Family parameters (two_point: p; heterogeneous: member list)
    #[arg(long)]
    params: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Stream id
    #[arg(long)]
    stream: Option<u64>,
    /// Weight kind: trig, haar or custom
    #[arg(long, visible_alias = "weights")]
    kind: Option<String>,
    /// Schedule as n:r,n:r,...
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Number of master seeds (asclt: report the median KS over seeds)
    #[arg(long)]
    seeds: Option<usize>,
    /// Spectrum ensemble: symmetric or reverse
    #[arg(long)]
    ensemble: Option<String>,
    /// Centering constant for the symmetric circulant
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    /// Scale for the symmetric circulant
    #[arg(long)]
    sigma: Option<f64>,
    /// CSV file with the U matrix (custom weights)
    #[arg(long)]
    u_path: Option<PathBuf>,
    /// CSV file with the V matrix (custom weights)
    #[arg(long)]
    v_path: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores); overrides ASCLT_THREADS
    #[arg(long)]
    threads: Option<usize>,
    /// Size at which trig sums switch to the FFT path
    #[arg(long)]
    fast_threshold: Option<usize>,
}

impl Flags {
    fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.set(k, v);
            }
        };
        put("family", self.family.clone());
        put("params", self.params.clone());
        put("master_seed", self.seed.map(|v| v.to_string()));
        put("stream_id", self.stream.map(|v| v.to_string()));
        put("kind", self.kind.clone());
        put("schedule", self.schedule.clone());
        put("n", self.n.map(|v| v.to_string()));
        put("r", self.r.map(|v| v.to_string()));
        put("delta", self.delta.map(|v| v.to_string()));
        put("x", self.x.map(|v| v.to_string()));
        put("s", self.s.map(|v| v.to_string()));
        put("t", self.t.map(|v| v.to_string()));
        put("a", self.a.map(|v| v.to_string()));
        put("replicas", self.replicas.map(|v| v.to_string()));
        put("seeds", self.seeds.map(|v| v.to_string()));
        put("ensemble", self.ensemble.clone());
        put("m", self.m.map(|v| v.to_string()));
        put("sigma", self.sigma.map(|v| v.to_string()));
        put("u_path", self.u_path.as_ref().map(|p| p.display().to_string()));
        put("v_path", self.v_path.as_ref().map(|p| p.display().to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        put("fast_threshold", self.fast_threshold.map(|v| v.to_string()));
        kv
    }
}

const COMMON_KEYS: [&str; 3] = ["out", "threads", "fast_threshold"];

/// Reads a config file into key/value pairs with line numbers.
pub fn load_config(path: &Path) -> Result<KeyValues> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigGeneral(format!("cannot read {}: {e}", path.display())))?;
    KeyValues::parse(&text)
}

/// A validated invocation.
#[derive(Debug)]
pub struct RunConfig {
    pub experiment: String,
    pub values: KeyValues,
    pub out: PathBuf,
    pub threads: usize,
    pub path: SumPath,
}

impl RunConfig {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values.parse_value(key)
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::ConfigGeneral(format!("{} needs `{key}`", self.experiment)))
    }

    fn source(&self) -> Result<SourceSpec> {
        if self.values.value("family").is_none() {
            return Err(Error::ConfigGeneral(format!("{} needs `family`", self.experiment)));
        }
        SourceSpec::from_key_values(&self.values)
    }

    fn kind(&self) -> Result<WeightKind> {
        match self.values.value("kind") {
            None => Ok(WeightKind::Trig),
            Some(k) => WeightKind::parse(k).map_err(|e| self.values.error_at("kind", e.to_string())),
        }
    }

    /// `schedule`, or the single point `(n, r)`, or `(n, ⌊(n-1)/2⌋)` when `r` is absent.
    fn schedule(&self, kind: WeightKind) -> Result<Schedule> {
        let key = if self.values.value("schedule").is_some() { "schedule" } else { "r" };
        let sched = match self.values.value("schedule") {
            Some(text) => Schedule::parse(text).map_err(|e| self.values.error_at("schedule", e.to_string()))?,
            None => {
                let n: usize = self.require("n")?;
                let r = match self.get::<usize>("r")? {
                    Some(r) => r,
                    None if kind == WeightKind::Trig => max_trig_rows(n),
                    None => n,
                };
                Schedule::single(n, r).map_err(|e| self.values.error_at(key, e.to_string()))?
            }
        };
        sched.validate_for(kind).map_err(|e| self.values.error_at(key, e.to_string()))?;
        Ok(sched)
    }

    fn single_point(&self) -> Result<(usize, usize)> {
        let s = self.schedule(WeightKind::Trig)?;
        Ok(s.entries()[0])
    }
}

fn build_config(cmd: &Command) -> Result<RunConfig> {
    let mut values = match &cmd.flags().config {
        Some(path) => load_config(path)?,
        None => KeyValues::new(),
    };
    values.overlay(&cmd.flags().to_key_values());
    let allowed: Vec<String> = cmd.keys().iter().chain(COMMON_KEYS.iter()).map(|k| normalize_key(k)).collect();
    for key in values.keys() {
        if !allowed.iter().any(|a| a == key) {
            return Err(values.error_at(key, format!("unknown key `{key}` for {}", cmd.name())));
        }
    }
    let threads = match values.parse_value::<usize>("threads")? {
        Some(t) => t,
        None => match std::env::var("ASCLT_THREADS") {
            Ok(v) => v.trim().parse().map_err(|_| Error::ConfigGeneral(format!("ASCLT_THREADS must be an integer, got `{v}`")))?,
            Err(_) => 0,
        },
    };
    let threshold = values.parse_value::<usize>("fast_threshold")?.unwrap_or(DEFAULT_FAST_THRESHOLD);
    let out = values.value("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"));
    Ok(RunConfig { experiment: cmd.name().to_string(), values, out, threads, path: SumPath::Auto { threshold } })
}

fn print_points(res: &ExperimentResult) {
    for p in &res.points {
        let stats: Vec<String> = p.stats.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
        println!("{} n={} r={} {}", res.experiment, p.n, p.r, stats.join(" "));
    }
}

fn persist(res: &ExperimentResult, cfg: &RunConfig) -> Result<()> {
    print_points(res);
    let (json, csv) = res.write_artifacts(&cfg.out)?;
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn weights_for(cfg: &RunConfig, kind: WeightKind) -> Result<(WeightMatrixPair, SourceSpec)> {
    let placeholder = || SourceSpec::new(SourceFamily::Zero, 0, 0);
    match kind {
        WeightKind::Trig => {
            let (n, r) = cfg.single_point()?;
            Ok((make_trig_pair(n, r)?, placeholder()?))
        }
        WeightKind::HaarOrthogonal => {
            let n: usize = cfg.require("n")?;
            let spec = if cfg.values.value("family").is_some() {
                cfg.source()?
            } else {
                SourceSpec::new(SourceFamily::StandardNormal, cfg.get("master_seed")?.unwrap_or(0), cfg.get("stream_id")?.unwrap_or(0))?
            };
            if spec.family() != &SourceFamily::StandardNormal {
                return Err(cfg.values.error_at("family", "haar weights are drawn from the normal family"));
            }
            let w = sample_haar_orthogonal(n, &spec)?;
            let r = cfg.get::<usize>("r")?.unwrap_or(n);
            if r > n {
                return Err(cfg.values.error_at("r", format!("haar weights need r <= n = {n}, got {r}")));
            }
            Ok((w.truncate_rows(r)?, spec))
        }
        WeightKind::Custom => {
            let u: PathBuf = cfg.require("u_path")?;
            let v = cfg.get::<PathBuf>("v_path")?;
            Ok((WeightMatrixPair::from_csv(&u, v.as_deref())?, placeholder()?))
        }
    }
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<()> {
    match cmd {
        Command::CheckWeights(_) => {
            let (w, spec) = weights_for(cfg, cfg.kind()?)?;
            let delta = cfg.get::<f64>("delta")?.unwrap_or(1.0);
            persist(&weight_conditions(&w, delta, &spec)?, cfg)
        }
        Command::Asclt(_) => {
            let kind = cfg.kind()?;
            let schedule = cfg.schedule(kind)?;
            let spec = cfg.source()?;
            let res = match cfg.get::<usize>("seeds")? {
                Some(seeds) if seeds > 1 => {
                    if kind != WeightKind::Trig {
                        return Err(cfg.values.error_at("seeds", "seed ensembles use trig weights"));
                    }
                    asclt_seed_ensemble(&spec, &schedule, seeds, cfg.path)?
                }
                _ => asclt_trajectory(&spec, &schedule, kind, cfg.path)?,
            };
            persist(&res, cfg)
        }
        Command::Bivariate(_) => persist(&asclt_bivariate(&cfg.source()?, &cfg.schedule(WeightKind::Trig)?, cfg.path)?, cfg),
        Command::CharDecay(_) => {
            let s = cfg.get("s")?.unwrap_or(1.0);
            let t = cfg.get("t")?.unwrap_or(0.0);
            let replicas = cfg.get("replicas")?.unwrap_or(500);
            persist(&char_variance_decay(&cfg.source()?, &cfg.schedule(WeightKind::Trig)?, s, t, replicas, cfg.path)?, cfg)
        }
        Command::CltFluct(_) => {
            let (n, r) = cfg.single_point()?;
            let x = cfg.get("x")?.unwrap_or(0.0);
            let replicas = cfg.get("replicas")?.unwrap_or(2000);
            persist(&clt_fluctuation(&cfg.source()?, n, r, x, replicas, cfg.path)?, cfg)
        }
        Command::Ldp(_) => {
            let (n, r) = cfg.single_point()?;
            let a = cfg.require("a")?;
            let replicas = cfg.get("replicas")?.unwrap_or(100_000);
            persist(&ldp_rate(&cfg.source()?, n, r, a, replicas, cfg.path)?, cfg)
        }
        Command::Periodogram(_) => {
            let ns: Vec<usize> = match cfg.values.value("schedule") {
                Some(text) => text
                    .split(',')
                    .map(|s| s.trim().split(':').next().unwrap_or("").parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| cfg.values.error_at("schedule", format!("bad schedule `{text}`")))?,
                None => vec![cfg.require("n")?],
            };
            persist(&periodogram_run(&cfg.source()?, &ns)?, cfg)
        }
        Command::Spectrum(_) => {
            let n = cfg.require("n")?;
            let ensemble = match cfg.values.value("ensemble") {
                Some(e) => Ensemble::parse(e).map_err(|err| cfg.values.error_at("ensemble", err.to_string()))?,
                None => Ensemble::SymmetricCirculant,
            };
            let m = cfg.get("m")?.unwrap_or(0.0);
            let sigma = cfg.get("sigma")?.unwrap_or(1.0);
            let (res, spectrum) = spectrum_run(&cfg.source()?, n, ensemble, (m, sigma))?;
            persist(&res, cfg)?;
            let path = cfg.out.join(format!("spectrum-{}-{}-eigenvalues.csv", res.source.master_seed, res.timing.timestamp));
            spectrum.write_csv(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::GenWeights(_) => {
            let (w, _) = weights_for(cfg, cfg.kind()?)?;
            std::fs::create_dir_all(&cfg.out)?;
            let u = cfg.out.join(format!("weights-{}-{}x{}-u.csv", w.kind().name(), w.r(), w.n()));
            let v = w.has_v().then(|| cfg.out.join(format!("weights-{}-{}x{}-v.csv", w.kind().name(), w.r(), w.n())));
            w.write_csv(&u, v.as_deref())?;
            println!("wrote {}", u.display());
            if let Some(v) = v {
                println!("wrote {}", v.display());
            }
            Ok(())
        }
    }
}

fn report(err: &Error) -> i32 {
    eprintln!("error: {err}");
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match build_config(&cli.command) {
        Ok(cfg) => cfg,
        Err(e) => return report(&e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => return report(&Error::ConfigGeneral(format!("cannot build thread pool: {e}"))),
    };
    match pool.install(|| execute(&cli.command, &cfg)) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("asclt".to_string()).chain(s.split_whitespace().map(String::from)).collect()
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(args("asclt --bogus 1")), EXIT_CONFIG);
        assert_eq!(run(args("frobnicate")), EXIT_CONFIG);
    }

    #[test]
    fn trig_bound_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "family = rademacher\nn = 16\nr = 8\n").unwrap();
        let cli = Cli::try_parse_from(args(&format!("asclt --config {}", cfg.display()))).unwrap();
        let rc = build_config(&cli.command).unwrap();
        let err = rc.schedule(WeightKind::Trig).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{msg}");
        assert!(msg.contains("floor((n-1)/2)"), "{msg}");
    }

    #[test]
    fn unknown_config_key_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "family = rademacher\n\nbogus = 1\n").unwrap();
        let cli = Cli::try_parse_from(args(&format!("ldp --config {}", cfg.display()))).unwrap();
        let err = build_config(&cli.command).unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "family = rademacher\nn = 64\n").unwrap();
        let cli = Cli::try_parse_from(args(&format!("asclt --config {} --n 128 --seed 4", cfg.display()))).unwrap();
        let rc = build_config(&cli.command).unwrap();
        assert_eq!(rc.schedule(WeightKind::Trig).unwrap().entries(), &[(128, 63)]);
        assert_eq!(rc.source().unwrap().master_seed(), 4);
    }

    #[test]
    fn empty_file_plus_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("empty.cfg");
        std::fs::write(&cfg, "").unwrap();
        let cli = Cli::try_parse_from(args(&format!("clt-fluct --config {} --family normal --seed 1 --n 256 --r 32 --x 0 --replicas 100", cfg.display())))
            .unwrap();
        let rc = build_config(&cli.command).unwrap();
        assert_eq!(rc.single_point().unwrap(), (256, 32));
    }

    #[test]
    fn duplicate_key_in_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("dup.cfg");
        std::fs::write(&cfg, "n = 8\nr = 3\nn = 9\n").unwrap();
        assert_eq!(run(args(&format!("check-weights --config {}", cfg.display()))), EXIT_CONFIG);
    }
}
