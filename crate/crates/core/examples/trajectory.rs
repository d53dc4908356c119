//! One sample path, growing n: KS distance of the partial-sum ECDF to the normal law.
//!
//! cargo run --release --example trajectory

use asclt::experiments::{asclt_seed_ensemble, asclt_trajectory, Schedule};
use asclt::{SourceFamily, SourceSpec, SumPath, WeightKind};

fn main() -> asclt::Result<()> {
    let ns: Vec<usize> = (8..=16).map(|e| 1usize << e).collect();
    let sched = Schedule::full_trig(&ns)?;
    let spec = SourceSpec::new(SourceFamily::Rademacher, 7, 0)?;
    let res = asclt_trajectory(&spec, &sched, WeightKind::Trig, SumPath::default())?;
    println!("{:>7} {:>7} {:>8}  digest of X_1..X_n", "n", "r", "KS");
    for p in &res.points {
        println!("{:>7} {:>7} {:>8.4}  {}", p.n, p.r, p.stat("ks").unwrap(), p.input_digest.as_deref().unwrap_or(""));
    }

    let ens = asclt_seed_ensemble(&spec, &Schedule::full_trig(&[1 << 10, 1 << 12, 1 << 14])?, 50, SumPath::default())?;
    println!("\nmedian KS over 50 seeds: {:?}", ens.series("median_ks"));
    println!("growth diagnostics (last point): {:?}", res.growth.entries.last().unwrap());
    Ok(())
}
