//! Joint ECDF of (S, T) against the product normal law.
//!
//! cargo run --release --example bivariate

use asclt::empirical::normal_cdf;
use asclt::experiments::{asclt_bivariate, Schedule};
use asclt::{SourceFamily, SourceSpec, SumPath};

fn main() -> asclt::Result<()> {
    let sched = Schedule::full_trig(&[1 << 10, 1 << 12, 1 << 14])?;
    for family in [SourceFamily::StandardNormal, SourceFamily::Rademacher, SourceFamily::StandardizedExponential] {
        let spec = SourceSpec::new(family.clone(), 5, 0)?;
        let res = asclt_bivariate(&spec, &sched, SumPath::default())?;
        for p in &res.points {
            println!(
                "{family:<12} n = {:>6}: max grid deviation {:.4}, F(0,0) = {:.4} (limit {:.2})",
                p.n,
                p.stat("grid_deviation").unwrap(),
                p.stat("joint_at_origin").unwrap(),
                normal_cdf(0.0).powi(2)
            );
        }
    }
    Ok(())
}
