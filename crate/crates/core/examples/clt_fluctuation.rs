//! Fluctuations of the partial-sum ECDF at a point: W = (1/sqrt r) sum_k (1{S_k <= x} - Phi(x)).
//!
//! cargo run --release --example clt_fluctuation

use asclt::experiments::clt_fluctuation;
use asclt::{SourceFamily, SourceSpec, SumPath};

fn main() -> asclt::Result<()> {
    for family in [SourceFamily::StandardNormal, SourceFamily::Rademacher] {
        let spec = SourceSpec::new(family.clone(), 7, 0)?;
        for x in [-1.0, 0.0, 1.0] {
            let res = clt_fluctuation(&spec, 4096, 32, x, 2000, SumPath::default())?;
            let p = &res.points[0];
            println!(
                "{family:<8} x = {x:+.1}: mean {:+.4}, variance {:.4} (limit {:.4}), KS {:.4}, continuity-corrected KS {:.4}",
                p.stat("mean").unwrap(),
                p.stat("variance").unwrap(),
                p.stat("target_variance").unwrap(),
                p.stat("ks").unwrap(),
                p.stat("ks_continuity_corrected").unwrap()
            );
        }
    }
    println!("r^3 (log n)^2 / n at (4096, 32) = {:.1}", asclt::experiments::GrowthEntry::new(4096, 32).r_cubed_log_sq_over_n);
    Ok(())
}
