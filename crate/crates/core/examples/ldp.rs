//! Large-deviation rate of the mean of the partial-sum ECDF.
//!
//! cargo run --release --example ldp

use asclt::empirical::rate_function_gaussian;
use asclt::experiments::ldp_rate;
use asclt::{SourceFamily, SourceSpec, SumPath};

fn main() -> asclt::Result<()> {
    let spec = SourceSpec::new(SourceFamily::Rademacher, 7, 0)?;
    for a in [0.25, 0.5, 0.75] {
        let res = ldp_rate(&spec, 4096, 32, a, 100_000, SumPath::default())?;
        let p = &res.points[0];
        println!(
            "a = {a:.2}: p = {:.2e}, rate {:.4} (normal inputs {:.4}, exact normal {:.4}), target a^2/2 = {:.4}{}",
            p.stat("p_hat").unwrap(),
            p.stat("rate_estimate").unwrap(),
            p.stat("gaussian_rate_estimate").unwrap(),
            p.stat("gaussian_exact_rate").unwrap(),
            res.summary["target_rate"],
            if res.flags["rate_is_lower_bound"] { " (no hits: lower bound)" } else { "" }
        );
    }
    println!("I(N(0.5, 1)) = {}", rate_function_gaussian(0.5, 1.0)?.value);
    Ok(())
}
