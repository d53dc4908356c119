//! Variance of the empirical characteristic function, compared with 1/r.
//!
//! cargo run --release --example char_decay

use asclt::experiments::{char_variance_decay, Schedule};
use asclt::{SourceFamily, SourceSpec, SumPath};

fn main() -> asclt::Result<()> {
    let sched = Schedule::full_trig(&[64, 128, 512, 2048])?;
    for family in [SourceFamily::StandardNormal, SourceFamily::Rademacher] {
        let spec = SourceSpec::new(family.clone(), 7, 0)?;
        let res = char_variance_decay(&spec, &sched, 1.0, 0.0, 500, SumPath::default())?;
        println!("{family}");
        for p in &res.points {
            println!(
                "  r = {:>5}: E|Phi_n - e^(-1/2)|^2 = {:.3e} +- {:.1e}, r * estimate = {:.3}, normal value {:.3e}",
                p.r,
                p.stat("estimate").unwrap(),
                p.stat("standard_error").unwrap(),
                p.stat("ratio_to_inv_r").unwrap(),
                p.stat("gaussian_target").unwrap()
            );
        }
    }
    Ok(())
}
