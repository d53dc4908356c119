//! Naive compensated sums versus the FFT path.
//!
//! cargo run --release --example fast_transform

use std::time::Instant;

use asclt::transform::{gaussian_oracle_sums, partial_sums_naive};
use asclt::weights::max_trig_rows;
use asclt::{make_trig_pair, FastTrig, SourceFamily, SourceSpec};

fn main() -> asclt::Result<()> {
    let spec = SourceSpec::new(SourceFamily::Rademacher, 11, 0)?;
    for n in [1000usize, 4096, 16384] {
        let r = max_trig_rows(n);
        let x = spec.fill(n);
        let t0 = Instant::now();
        let naive = partial_sums_naive(&make_trig_pair(n, r)?, &x)?;
        let t_naive = t0.elapsed();
        let plan = FastTrig::new(n);
        let t1 = Instant::now();
        let fast = plan.partial_sums(r, &x)?;
        let t_fast = t1.elapsed();
        let diff = naive.s.iter().zip(&fast.s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("n = {n:>6}, r = {r:>5}: naive {t_naive:>10.2?}, fast {t_fast:>10.2?}, max |diff| = {diff:.2e}");
    }

    // with normal inputs the 2r sums are i.i.d. N(0, 1)
    let g = SourceSpec::new(SourceFamily::StandardNormal, 3, 0)?;
    let sums = gaussian_oracle_sums(4096, 2047, &g)?;
    let all: Vec<f64> = sums.s.iter().chain(sums.t.as_ref().unwrap()).copied().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (all.len() - 1) as f64;
    println!("normal oracle: mean {mean:+.4}, variance {var:.4} over {} sums", all.len());
    Ok(())
}
